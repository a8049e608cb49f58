//! File writers. CSVs are UTF-8 with a header row and `\n` line endings;
//! floats use Rust's shortest round-trip formatting.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use ezgreedy::analysis::FirstVisitGrid;
use ezgreedy::learners::TrialResult;
use serde::Serialize;

use crate::{NamedReport, SweepPoint};

pub fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
}

pub fn learning_curves<W: Write>(w: &mut W, trials: &[TrialResult]) -> io::Result<()> {
    writeln!(w, "trial,episode,return,discounted_return,steps,goal_reached")?;
    for t in trials {
        for l in &t.logs {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                t.trial,
                l.episode,
                l.undiscounted_return,
                l.discounted_return,
                l.steps,
                u8::from(l.goal_reached)
            )?;
        }
    }
    Ok(())
}

pub fn greedy_evals<W: Write>(w: &mut W, trials: &[TrialResult]) -> io::Result<()> {
    writeln!(w, "trial,after_episode,mean_return,mean_discounted_return,goal_fraction")?;
    for t in trials {
        for e in &t.evals {
            writeln!(
                w,
                "{},{},{},{},{}",
                t.trial, e.after_episode, e.mean_return, e.mean_discounted_return, e.goal_fraction
            )?;
        }
    }
    Ok(())
}

pub fn sweep_table<W: Write>(w: &mut W, points: &[SweepPoint]) -> io::Result<()> {
    writeln!(w, "value,mean,std_error")?;
    for p in points {
        writeln!(w, "{},{},{}", p.value, p.mean, p.std_error)?;
    }
    Ok(())
}

pub fn sweep_trials<W: Write>(w: &mut W, points: &[SweepPoint]) -> io::Result<()> {
    writeln!(w, "value,trial,metric")?;
    for p in points {
        for (t, m) in p.metrics.iter().enumerate() {
            writeln!(w, "{},{t},{m}", p.value)?;
        }
    }
    Ok(())
}

/// Mean first-visit matrix with a `col_0,col_1,...` header.
pub fn first_visit_matrix<W: Write>(w: &mut W, grid: &FirstVisitGrid) -> io::Result<()> {
    let header: Vec<String> = (0..grid.cols()).map(|c| format!("col_{c}")).collect();
    writeln!(w, "{}", header.join(","))?;
    grid.write_csv(w)
}

pub fn cover_times<W: Write>(w: &mut W, reports: &[NamedReport]) -> io::Result<()> {
    writeln!(w, "policy,trial,cover_time")?;
    for r in reports {
        for (t, c) in r.report.cover_times.iter().enumerate() {
            match c {
                Some(c) => writeln!(w, "{},{t},{c}", r.name)?,
                None => writeln!(w, "{},{t},", r.name)?,
            }
        }
    }
    Ok(())
}

pub fn pairs<W: Write>(w: &mut W, pairs: &[(usize, usize)]) -> io::Result<()> {
    writeln!(w, "state,action")?;
    for (s, a) in pairs {
        writeln!(w, "{s},{a}")?;
    }
    Ok(())
}
