//! Scenario sections: user JSON laid over defaults, with every resolved
//! value echoed back into the manifest.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use atomcav::params::ValidatedSystem;

use crate::args::{Format, Grid};
use crate::error::{config, CliError};

/// Inputs shared by every subcommand.
pub struct Ctx<'a> {
    pub config: &'a Value,
    pub sys: ValidatedSystem,
    pub seed: Option<u64>,
    pub grids: &'a [Grid],
    pub format: Format,
    pub nu_bar: Option<f64>,
}

impl Ctx<'_> {
    pub fn section(&self, name: &str) -> Option<&Value> {
        self.config.get("scenario").and_then(|s| s.get(name))
    }

    /// The grid called `name`, or the unnamed one, or the default. Grids
    /// with other names are rejected.
    pub fn grid(&self, name: &str, default: (f64, f64, usize)) -> Result<Grid, CliError> {
        self.only_grids(&[name])?;
        let g = self
            .grids
            .iter()
            .find(|g| g.name.as_deref() == Some(name))
            .or_else(|| self.grids.iter().find(|g| g.name.is_none()));
        Ok(match g {
            Some(g) => Grid {
                name: Some(name.to_string()),
                ..g.clone()
            },
            None => Grid {
                name: Some(name.to_string()),
                start: default.0,
                stop: default.1,
                n: default.2,
            },
        })
    }

    pub fn only_grids(&self, allowed: &[&str]) -> Result<(), CliError> {
        for g in self.grids {
            match g.name.as_deref() {
                None if !allowed.is_empty() => {}
                Some(n) if allowed.contains(&n) => {}
                other => {
                    let what = other.map_or("an unnamed grid".to_string(), |n| format!("grid `{n}`"));
                    return Err(config(format!(
                        "{what} is not used here (accepted: {})",
                        allowed.join(", ")
                    )));
                }
            }
        }
        Ok(())
    }

    /// `--seed`, else the scenario's seed, else 0.
    pub fn seed(&self, scenario_seed: Option<u64>) -> u64 {
        self.seed.or(scenario_seed).unwrap_or(0)
    }
}

/// Overlays `user` on the serialized `default` (recursively for nested
/// objects) and deserializes. Unknown keys are rejected.
pub fn resolve<T: Serialize + DeserializeOwned>(
    default: &T,
    user: Option<&Value>,
    section: &str,
) -> Result<T, CliError> {
    let mut base = serde_json::to_value(default).map_err(|e| config(e.to_string()))?;
    if let Some(user) = user {
        overlay(&mut base, user, section)?;
    }
    serde_json::from_value(base).map_err(|e| config(format!("{section}: {e}")))
}

fn overlay(base: &mut Value, user: &Value, path: &str) -> Result<(), CliError> {
    let (Some(b), Some(u)) = (base.as_object_mut(), user.as_object()) else {
        return Err(config(format!("{path} must be an object")));
    };
    for (k, v) in u {
        let key_path = format!("{path}.{k}");
        match b.get_mut(k) {
            None => return Err(config(format!("unknown key `{key_path}`"))),
            Some(slot) if slot.is_object() && v.is_object() => overlay(slot, v, &key_path)?,
            Some(slot) => *slot = v.clone(),
        }
    }
    Ok(())
}

/// Copy of `config` with `scenario.<name>` replaced by `resolved`.
pub fn with_resolved(config: &Value, name: &str, resolved: Value) -> Value {
    let mut out = config.clone();
    if let Some(obj) = out.as_object_mut() {
        let scenario = obj.entry("scenario").or_insert_with(|| Value::Object(Map::new()));
        if !scenario.is_object() {
            *scenario = Value::Object(Map::new());
        }
        scenario.as_object_mut().unwrap().insert(name.to_string(), resolved);
    }
    out
}
