//! Resolved run configuration.
//!
//! A configuration is built in three layers: built-in defaults, an optional
//! JSON file, and command-line flags. Each layer is a JSON object; later
//! layers are merged key by key into earlier ones, recursing into nested
//! objects, and the result is deserialized into [`RunConfig`].

use std::fmt;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use germ_equiv::condition::SamplingSpec;
use germ_equiv::flow::{IntegratorSettings, DEFAULT_DELTA};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Check,
    Check0,
    Flow,
    Verify,
    Loja,
    Genpair,
    Distbound,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Check0 => "check0",
            Command::Flow => "flow",
            Command::Verify => "verify",
            Command::Loja => "loja",
            Command::Genpair => "genpair",
            Command::Distbound => "distbound",
        }
    }

    fn needs_g(self) -> bool {
        matches!(self, Command::Check | Command::Check0 | Command::Flow | Command::Verify)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Everything a run depends on. Embedded verbatim in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub f: String,
    pub g: Option<String>,
    pub n: usize,
    pub r: u32,
    pub sampling: SamplingSpec,
    pub integrator: IntegratorSettings,
    pub delta: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// `genpair`: explicit multipliers, one polynomial per generator.
    pub multipliers: Option<Vec<String>>,
    /// `genpair`: degree bound for random multipliers.
    pub multiplier_degree: u32,
    /// `flow`: start points; empty means the sampled domain.
    pub points: Vec<Vec<f64>>,
    /// `flow`: integrate from `t = 1` back to `t = 0`.
    pub inverse: bool,
    /// `verify`: largest `|f(x) − g(φ(x))|` reported as PASS.
    pub residual_tol: f64,
    /// `verify`: central-difference step of the Jacobian.
    pub jacobian_step: f64,
    /// `distbound` and the flow commands: known points of `Z` besides the origin.
    pub zero_points: Vec<Vec<f64>>,
    /// Grid pitch for refining `Z` numerically; off when absent.
    pub grid_pitch: Option<f64>,
}

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;
pub const DEFAULT_JACOBIAN_STEP: f64 = 1e-5;
pub const DEFAULT_MULTIPLIER_DEGREE: u32 = 2;

/// Defaults for `command` as a JSON layer. `f` and `n` have no default.
pub fn defaults(command: Command) -> Value {
    // dimension is overwritten from `n` after merging
    let sampling = match command {
        Command::Loja => SamplingSpec::lojasiewicz(1),
        _ => SamplingSpec::new(1),
    };
    serde_json::json!({
        "command": command,
        "g": null,
        "r": 1,
        "sampling": sampling,
        "integrator": IntegratorSettings::default(),
        "delta": DEFAULT_DELTA,
        "output": null,
        "format": Format::Json,
        "multipliers": null,
        "multiplier_degree": DEFAULT_MULTIPLIER_DEGREE,
        "points": [],
        "inverse": false,
        "residual_tol": DEFAULT_RESIDUAL_TOL,
        "jacobian_step": DEFAULT_JACOBIAN_STEP,
        "zero_points": [],
        "grid_pitch": null,
    })
}

/// Merges `overlay` into `base`; objects merge recursively, anything else replaces.
pub fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Reads a config file layer. The `command` key, if present, must match.
pub fn read_file_layer(path: &std::path::Path, command: Command) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let Value::Object(map) = &mut value else {
        bail!("config {} must be a JSON object", path.display());
    };
    if let Some(c) = map.remove("command") {
        if c != Value::String(command.name().into()) {
            bail!("config {} is for command {c}, not {command}", path.display());
        }
    }
    Ok(value)
}

/// Layers defaults, file and flags, then validates.
pub fn resolve(command: Command, file: Option<Value>, flags: Map<String, Value>) -> Result<RunConfig> {
    let mut value = defaults(command);
    if let Some(file) = file {
        merge(&mut value, file);
    }
    merge(&mut value, Value::Object(flags));
    let Some(n) = value.get("n").and_then(Value::as_u64) else {
        bail!("the dimension n is required (--n or \"n\" in the config file)");
    };
    merge(&mut value, serde_json::json!({ "sampling": { "dimension": n } }));
    let config: RunConfig = serde_json::from_value(value).context("invalid configuration")?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            bail!("n must be at least 1");
        }
        if self.command.needs_g() && self.g.is_none() {
            bail!("command {} requires g (--g)", self.command);
        }
        if matches!(self.command, Command::Check | Command::Flow | Command::Verify | Command::Genpair) && self.r < 1 {
            bail!("r must be at least 1");
        }
        self.sampling.validate()?;
        self.integrator.validate().map_err(anyhow::Error::msg)?;
        if !(self.delta > 2.0) {
            bail!("delta must exceed 2, got {}", self.delta);
        }
        if !(self.residual_tol >= 0.0) {
            bail!("residual_tol must be non-negative");
        }
        if !(self.jacobian_step > 0.0) {
            bail!("jacobian_step must be positive");
        }
        if let Some(p) = self.grid_pitch {
            if !(p > 0.0) {
                bail!("grid_pitch must be positive");
            }
        }
        for p in self.points.iter().chain(&self.zero_points) {
            if p.len() != self.n {
                bail!("point {p:?} does not have {} coordinates", self.n);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn flags(v: Value) -> Map<String, Value> {
        match v {
            Value::Object(m) => m,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let file = json!({ "n": 2, "f": "x1^2 + x2^2", "sampling": { "shells": 5, "seed": 9 } });
        let cfg = resolve(
            Command::Loja,
            Some(file),
            flags(json!({ "sampling": { "seed": 4 } })),
        )
        .unwrap();
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.sampling.dimension, 2);
        assert_eq!(cfg.sampling.shells, 5);
        assert_eq!(cfg.sampling.seed, 4);
        // untouched default from the loja sampling profile
        assert_eq!(cfg.sampling.points_per_shell, SamplingSpec::lojasiewicz(2).points_per_shell);
        assert_eq!(cfg.integrator, IntegratorSettings::default());
    }

    #[test]
    fn required_fields() {
        let err = resolve(Command::Check, None, flags(json!({ "f": "x1^2" }))).unwrap_err();
        assert!(err.to_string().contains("dimension n"));
        let err = resolve(Command::Flow, None, flags(json!({ "f": "x1^2", "n": 1 }))).unwrap_err();
        assert!(err.to_string().contains("requires g"));
        assert!(resolve(Command::Loja, None, flags(json!({ "f": "x1^2", "n": 1 }))).is_ok());
    }

    #[test]
    fn invalid_values() {
        let base = json!({ "f": "x1^2", "g": "x1^2", "n": 1 });
        for bad in [
            json!({ "delta": 2.0 }),
            json!({ "r": 0 }),
            json!({ "points": [[0.1, 0.2]] }),
            json!({ "sampling": { "radius_min": 0.5 } }),
            json!({ "integrator": { "rel_tol": 0.0 } }),
        ] {
            let mut v = base.clone();
            merge(&mut v, bad.clone());
            assert!(resolve(Command::Verify, None, flags(v)).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_roundtrips_through_json() {
        let cfg = resolve(Command::Check, None, flags(json!({ "f": "x1^2", "g": "2*x1^2", "n": 1 }))).unwrap();
        let back: RunConfig = serde_json::from_value(serde_json::to_value(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
