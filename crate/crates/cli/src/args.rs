use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::config::{Command, Format};

/// Numerical checks and constructions for right equivalence of polynomial germs.
///
/// Every option may also come from a JSON file given with --config; flags
/// take precedence over the file, and the file over the built-in defaults.
/// The fully resolved configuration is embedded in each report.
#[derive(Debug, Parser)]
#[command(name = "germeq", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Sample |∂^m(g−f)| ≤ C|∇f|^(r+2−|m|) for all |m| ≤ r.
    Check(CommonArgs),
    /// Sample |g−f| ≤ C|∇f|² and |∇(g−f)| ≤ C'|∇f|².
    Check0(CommonArgs),
    /// Integrate the homotopy flow and dump trajectories.
    Flow(FlowArgs),
    /// Check f = g∘φ, conservation, round trip and Jacobians on the sampled domain.
    Verify(VerifyArgs),
    /// Estimate the Łojasiewicz gradient exponent of f (and of g, if given).
    Loja(CommonArgs),
    /// Build g = f + (element of the (r+2)-th power of the Jacobi ideal of f).
    Genpair(GenpairArgs),
    /// Sample |∇f| ≤ A·dist(x, Z).
    Distbound(DistboundArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// The germ f, e.g. "x1^2 + 1/4*x1^3".
    #[arg(long)]
    pub f: Option<String>,
    /// The germ g.
    #[arg(long)]
    pub g: Option<String>,
    /// Number of variables.
    #[arg(long)]
    pub n: Option<usize>,
    /// Differentiability order r [default: 1].
    #[arg(long)]
    pub r: Option<u32>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report destination; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Report format [default: json].
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Outer sampling radius [default: 0.2; loja 0.1].
    #[arg(long)]
    pub radius_max: Option<f64>,
    /// Inner sampling radius [default: 1e-4].
    #[arg(long)]
    pub radius_min: Option<f64>,
    /// Number of log-spaced shells [default: 12].
    #[arg(long)]
    pub shells: Option<usize>,
    /// Sample directions per shell [default: 16; loja 64].
    #[arg(long)]
    pub points_per_shell: Option<usize>,
    /// Seed of the direction sampler [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Samples with |∇f| below this are excluded [default: 1e-14].
    #[arg(long)]
    pub grad_floor: Option<f64>,

    /// Integrator relative tolerance [default: 1e-10].
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Integrator absolute tolerance [default: 1e-10].
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Initial step [default: 1e-2].
    #[arg(long)]
    pub h_init: Option<f64>,
    /// Smallest step before giving up [default: 1e-12].
    #[arg(long)]
    pub h_min: Option<f64>,
    /// Step budget per trajectory [default: 1000000].
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Homotopy parameter bound, must exceed 2 [default: 3].
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ZeroSetArgs {
    /// Known point of Z other than the origin, comma separated; repeatable.
    #[arg(long = "zero-point", value_parser = parse_point)]
    pub zero_points: Vec<Vec<f64>>,
    /// Refine Z on a grid of this pitch over the sampling ball.
    #[arg(long)]
    pub grid_pitch: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub zero_set: ZeroSetArgs,
    /// Start point, comma separated; repeatable. Defaults to the sampled domain.
    #[arg(long = "point", value_parser = parse_point)]
    pub points: Vec<Vec<f64>>,
    /// Integrate the inverse map (t from 1 to 0).
    #[arg(long)]
    pub inverse: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub zero_set: ZeroSetArgs,
    /// Largest residual |f(x) − g(φ(x))| reported as PASS [default: 1e-8].
    #[arg(long)]
    pub residual_tol: Option<f64>,
    /// Central-difference step for the Jacobian of φ [default: 1e-5].
    #[arg(long)]
    pub jacobian_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenpairArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// One multiplier per generator, separated by ';'. Random when absent.
    #[arg(long, value_delimiter = ';')]
    pub multipliers: Option<Vec<String>>,
    /// Degree bound of random multipliers [default: 2].
    #[arg(long)]
    pub multiplier_degree: Option<u32>,
}

#[derive(Debug, Args)]
pub struct DistboundArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub zero_set: ZeroSetArgs,
}

fn parse_point(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| format!("bad coordinate {c:?}: {e}")))
        .collect()
}

fn put<T: serde::Serialize>(map: &mut Map<String, Value>, key: &str, v: Option<T>) {
    if let Some(v) = v {
        map.insert(key.into(), json!(v));
    }
}

impl CommonArgs {
    /// Flags that were actually given, as a config layer.
    fn layer(&self) -> Map<String, Value> {
        let mut top = Map::new();
        put(&mut top, "f", self.f.clone());
        put(&mut top, "g", self.g.clone());
        put(&mut top, "n", self.n);
        put(&mut top, "r", self.r);
        put(&mut top, "output", self.output.clone());
        put(&mut top, "format", self.format);
        put(&mut top, "delta", self.delta);
        let mut sampling = Map::new();
        put(&mut sampling, "radius_max", self.radius_max);
        put(&mut sampling, "radius_min", self.radius_min);
        put(&mut sampling, "shells", self.shells);
        put(&mut sampling, "points_per_shell", self.points_per_shell);
        put(&mut sampling, "seed", self.seed);
        put(&mut sampling, "grad_floor", self.grad_floor);
        let mut integrator = Map::new();
        put(&mut integrator, "rel_tol", self.rel_tol);
        put(&mut integrator, "abs_tol", self.abs_tol);
        put(&mut integrator, "h_init", self.h_init);
        put(&mut integrator, "h_min", self.h_min);
        put(&mut integrator, "max_steps", self.max_steps);
        top.insert("sampling".into(), Value::Object(sampling));
        top.insert("integrator".into(), Value::Object(integrator));
        top
    }
}

impl ZeroSetArgs {
    fn extend(&self, map: &mut Map<String, Value>) {
        if !self.zero_points.is_empty() {
            map.insert("zero_points".into(), json!(self.zero_points));
        }
        put(map, "grid_pitch", self.grid_pitch);
    }
}

impl Sub {
    /// The command, its `--config` path, and the layer of explicitly given flags.
    pub fn into_parts(self) -> (Command, Option<PathBuf>, Map<String, Value>) {
        let (command, common, mut layer) = match &self {
            Sub::Check(c) => (Command::Check, c, Map::new()),
            Sub::Check0(c) => (Command::Check0, c, Map::new()),
            Sub::Loja(c) => (Command::Loja, c, Map::new()),
            Sub::Flow(a) => {
                let mut m = Map::new();
                a.zero_set.extend(&mut m);
                if !a.points.is_empty() {
                    m.insert("points".into(), json!(a.points));
                }
                if a.inverse {
                    m.insert("inverse".into(), json!(true));
                }
                (Command::Flow, &a.common, m)
            }
            Sub::Verify(a) => {
                let mut m = Map::new();
                a.zero_set.extend(&mut m);
                put(&mut m, "residual_tol", a.residual_tol);
                put(&mut m, "jacobian_step", a.jacobian_step);
                (Command::Verify, &a.common, m)
            }
            Sub::Genpair(a) => {
                let mut m = Map::new();
                put(&mut m, "multipliers", a.multipliers.clone());
                put(&mut m, "multiplier_degree", a.multiplier_degree);
                (Command::Genpair, &a.common, m)
            }
            Sub::Distbound(a) => {
                let mut m = Map::new();
                a.zero_set.extend(&mut m);
                (Command::Distbound, &a.common, m)
            }
        };
        layer.extend(common.layer());
        (command, common.config.clone(), layer)
    }
}
