//! Named configuration bundles shipped with the binary.
//!
//! A preset is a JSON document `{command, description, config}`. A user
//! config is deep-merged over the preset's `config`: objects merge key by
//! key, every other value (arrays included) replaces the preset's.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::Command;

const BUNDLED: &[(&str, &str)] = &[
    ("deep_sea", include_str!("../presets/deep_sea.json")),
    ("deep_sea_randomized", include_str!("../presets/deep_sea_randomized.json")),
    ("grid_world", include_str!("../presets/grid_world.json")),
    ("mountain_car", include_str!("../presets/mountain_car.json")),
    ("cartpole", include_str!("../presets/cartpole.json")),
    ("chain_zeta", include_str!("../presets/chain_zeta.json")),
    ("chain_uniform", include_str!("../presets/chain_uniform.json")),
    ("chain_geometric", include_str!("../presets/chain_geometric.json")),
    ("deep_sea_first_visit", include_str!("../presets/deep_sea_first_visit.json")),
    ("grid_world_first_visit", include_str!("../presets/grid_world_first_visit.json")),
    ("mountain_car_first_visit", include_str!("../presets/mountain_car_first_visit.json")),
    ("cartpole_first_visit", include_str!("../presets/cartpole_first_visit.json")),
    ("open_grid_first_visit", include_str!("../presets/open_grid_first_visit.json")),
    ("open_grid_cover_time", include_str!("../presets/open_grid_cover_time.json")),
    ("chain_multiples_of_k", include_str!("../presets/chain_multiples_of_k.json")),
    ("grid_world_coverage", include_str!("../presets/grid_world_coverage.json")),
    ("deep_sea_coverage", include_str!("../presets/deep_sea_coverage.json")),
];

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub command: Command,
    pub description: String,
    pub config: Value,
}

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(name, _)| *name)
}

pub fn get(name: &str) -> Result<Preset> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| anyhow!("unknown preset {name:?}; available: {}", names().collect::<Vec<_>>().join(", ")))?;
    serde_json::from_str(text).with_context(|| format!("bundled preset {name} is malformed"))
}

/// Deep merge of `overlay` into `base`.
pub fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Builds the raw config document for `command`.
///
/// The preset comes from `preset_flag`, else from the config's own `preset`
/// key. `seed` overrides whatever the documents say.
pub fn assemble(command: Command, config_path: Option<&Path>, preset_flag: Option<&str>, seed: Option<u64>) -> Result<Value> {
    let user = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if !v.is_object() {
                bail!("{} must hold a JSON object", path.display());
            }
            v
        }
        None => Value::Object(Map::new()),
    };
    let name = match preset_flag {
        Some(n) => Some(n.to_string()),
        None => user.get("preset").and_then(Value::as_str).map(str::to_string),
    };
    let mut doc = match &name {
        Some(n) => {
            let preset = get(n)?;
            let compatible = preset.command == command || command == Command::ModelDump;
            if !compatible {
                bail!("preset {n} is for `{}`, not `{}`", preset.command.name(), command.name());
            }
            let mut config = preset.config;
            if command == Command::ModelDump {
                let env = config.get("env").cloned().or_else(|| config.pointer("/base/env").cloned());
                config = serde_json::json!({ "env": env.ok_or_else(|| anyhow!("preset {n} has no environment"))? });
            }
            config
        }
        None if config_path.is_none() => bail!("either --config or --preset is required"),
        None => Value::Object(Map::new()),
    };
    merge(&mut doc, user);
    if let Some(n) = name {
        doc["preset"] = Value::String(n);
    }
    if let Some(s) = seed {
        doc["seed"] = Value::from(s);
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn every_bundled_preset_parses() {
        for name in names() {
            let p = get(name).unwrap();
            assert!(p.config.is_object(), "{name}");
        }
    }

    #[test]
    fn merge_recurses_into_objects_and_replaces_the_rest() {
        let mut base = json!({"a": {"b": 1, "c": [1, 2]}, "d": 3});
        merge(&mut base, json!({"a": {"c": [9]}, "e": null}));
        assert_eq!(base, json!({"a": {"b": 1, "c": [9]}, "d": 3, "e": null}));
    }

    #[test]
    fn presets_are_bound_to_their_command() {
        assert!(assemble(Command::Sweep, None, Some("deep_sea"), None).is_err());
        let doc = assemble(Command::ModelDump, None, Some("chain_zeta"), Some(4)).unwrap();
        assert_eq!(doc["env"]["kind"], "chain");
        assert_eq!(doc["seed"], 4);
    }
}
