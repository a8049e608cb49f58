use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ezgreedy_runner::{execute, presets, Command, Invocation};

#[derive(Parser)]
#[command(name = "ezgreedy", version, about = "Run εz-greedy exploration experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train agents and write learning curves.
    Run(Common),
    /// Re-run a base config across values of one parameter.
    Sweep(Common),
    /// Average first-visit maps under fixed exploration.
    FirstVisit(Common),
    /// Steps until every state-action pair has been tried.
    CoverTime(Common),
    /// Exact reachability of state-action pairs under an option set.
    Coverage(Common),
    /// Tab-separated transition model of a tabular environment.
    ModelDump(Common),
    /// List bundled presets.
    Presets,
}

#[derive(Args)]
struct Common {
    /// JSON config; merged over the preset when both are given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Experiment seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

impl From<Common> for Invocation {
    fn from(c: Common) -> Self {
        Invocation { config: c.config, preset: c.preset, out: c.out, workers: c.workers.map(|w| w as usize), seed: c.seed }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Run(c) => (Command::Run, c),
        Cmd::Sweep(c) => (Command::Sweep, c),
        Cmd::FirstVisit(c) => (Command::FirstVisit, c),
        Cmd::CoverTime(c) => (Command::CoverTime, c),
        Cmd::Coverage(c) => (Command::Coverage, c),
        Cmd::ModelDump(c) => (Command::ModelDump, c),
        Cmd::Presets => {
            for name in presets::names() {
                let p = presets::get(name).expect("bundled presets parse");
                println!("{name:<26} {:<12} {}", p.command.name(), p.description);
            }
            return ExitCode::SUCCESS;
        }
    };
    match execute(command, &common.into()) {
        Ok(out) => {
            eprintln!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
