use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrator::{dopri5, StepFailure};
use super::{FlowError, HomotopySystem, IntegratorSettings, SingularSetApprox};
use crate::condition::{sample_domain, SamplingSpec};
use crate::fit::least_squares;
use crate::germ::GermError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    /// `t: 0 → 1` from `y(0) = x`; the endpoint is `φ(x)`.
    Forward,
    /// `t: 1 → 0` from `y(1) = x`; the endpoint is `φ⁻¹(x)`.
    Inverse,
}

impl Direction {
    fn span(self) -> (f64, f64) {
        match self {
            Direction::Forward => (0.0, 1.0),
            Direction::Inverse => (1.0, 0.0),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        }
    }
}

/// Accepted nodes of one solution of `dy/dt = W(t, y)`, in integration order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub t_nodes: Vec<f64>,
    pub y_nodes: Vec<Vec<f64>>,
    /// `F(t, y(t))` at each node.
    pub f_values: Vec<f64>,
    /// `|W(t, y(t))|` at each node.
    pub w_norms: Vec<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub conservation_drift: f64,
}

impl Trajectory {
    pub fn endpoint(&self) -> &[f64] {
        self.y_nodes.last().expect("trajectory has at least one node")
    }

    /// CSV with columns `t, y1..yn, F, W_norm`.
    pub fn to_csv(&self, with_header: bool) -> String {
        let n = self.y_nodes.first().map_or(0, Vec::len);
        let mut out = String::new();
        if with_header {
            out.push('t');
            for i in 1..=n {
                out.push_str(&format!(",y{i}"));
            }
            out.push_str(",F,W_norm\n");
        }
        for (k, t) in self.t_nodes.iter().enumerate() {
            out.push_str(&format!("{t:e}"));
            for v in &self.y_nodes[k] {
                out.push_str(&format!(",{v:e}"));
            }
            out.push_str(&format!(",{:e},{:e}\n", self.f_values[k], self.w_norms[k]));
        }
        out
    }
}

/// `max_t |F(t, y(t)) − F(t₀, y(t₀))|` over the recorded nodes.
pub fn conservation_check(traj: &Trajectory) -> f64 {
    let Some(&first) = traj.f_values.first() else {
        return 0.0;
    };
    traj.f_values
        .iter()
        .map(|v| (v - first).abs())
        .fold(0.0, f64::max)
}

/// Solves `dy/dt = W(t, y)` over `[0, 1]` in the given direction.
///
/// Steps are capped at half the distance to `zero_set`, and the solution is
/// aborted if it reaches numerical `Z` after starting off it.
pub fn integrate_trajectory(
    sys: &HomotopySystem,
    zero_set: &SingularSetApprox,
    x0: &[f64],
    direction: Direction,
    settings: &IntegratorSettings,
) -> Result<Trajectory, FlowError> {
    settings.validate().map_err(FlowError::InvalidSettings)?;
    if x0.len() != sys.dim() {
        return Err(GermError::DimensionMismatch {
            expected: sys.dim(),
            found: x0.len(),
        }
        .into());
    }
    let (t0, t1) = direction.span();
    let starts_off_z = sys.grad_f_norm(x0) >= sys.eps_z();
    let sol = dopri5(
        |t, y| sys.field_w(t, y),
        |y| zero_set.distance(y).map(|d| 0.5 * d),
        t0,
        t1,
        x0,
        settings,
    )
    .map_err(|e| match e {
        StepFailure::Rhs(e) => e,
        StepFailure::MaxSteps(m) => FlowError::MaxStepsExceeded(m),
        StepFailure::Underflow { t, h } => FlowError::StepUnderflow { t, h },
    })?;

    let mut f_values = Vec::with_capacity(sol.t.len());
    let mut w_norms = Vec::with_capacity(sol.t.len());
    for (t, y) in sol.t.iter().zip(&sol.y) {
        if starts_off_z && sys.grad_f_norm(y) < sys.eps_z() {
            return Err(FlowError::EnteredSingularSet { t: *t, y: y.clone() });
        }
        f_values.push(sys.homotopy_value(*t, y)?);
        w_norms.push(sys.field_w(*t, y)?.iter().map(|a| a * a).sum::<f64>().sqrt());
    }
    let mut traj = Trajectory {
        t_nodes: sol.t,
        y_nodes: sol.y,
        f_values,
        w_norms,
        accepted_steps: sol.accepted,
        rejected_steps: sol.rejected,
        conservation_drift: 0.0,
    };
    traj.conservation_drift = conservation_check(&traj);
    Ok(traj)
}

/// The time-one map of the homotopy flow, `φ(x) = y_x(1)`, or its inverse.
#[derive(Clone, Debug)]
pub struct DiffeoMap {
    pub system: HomotopySystem,
    pub settings: IntegratorSettings,
    pub direction: Direction,
    pub zero_set: SingularSetApprox,
}

impl DiffeoMap {
    /// Forward map with default integrator settings and `Z ⊇ {0}`.
    pub fn new(system: HomotopySystem) -> Self {
        let zero_set = SingularSetApprox::origin(system.dim());
        DiffeoMap {
            system,
            settings: IntegratorSettings::default(),
            direction: Direction::Forward,
            zero_set,
        }
    }

    pub fn with_settings(mut self, settings: IntegratorSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_zero_set(mut self, zero_set: SingularSetApprox) -> Self {
        self.zero_set = zero_set;
        self
    }

    pub fn inverse(&self) -> DiffeoMap {
        DiffeoMap {
            direction: self.direction.flip(),
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn trajectory(&self, x: &[f64]) -> Result<Trajectory, FlowError> {
        integrate_trajectory(&self.system, &self.zero_set, x, self.direction, &self.settings)
    }

    /// Evaluates the map in its own direction.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>, FlowError> {
        self.apply_in(x, self.direction)
    }

    fn apply_in(&self, x: &[f64], direction: Direction) -> Result<Vec<f64>, FlowError> {
        if x.len() != self.dim() {
            return Err(GermError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            }
            .into());
        }
        if self.zero_set.is_known_point(x) || self.system.is_trivial() {
            return Ok(x.to_vec());
        }
        let traj = integrate_trajectory(&self.system, &self.zero_set, x, direction, &self.settings)?;
        Ok(traj.endpoint().to_vec())
    }
}

/// `φ(x)`.
pub fn diffeo_forward(map: &DiffeoMap, x: &[f64]) -> Result<Vec<f64>, FlowError> {
    map.apply_in(x, Direction::Forward)
}

/// `φ⁻¹(x)`, by running the same non-autonomous flow from `t = 1` back to `t = 0`.
pub fn diffeo_inverse(map: &DiffeoMap, x: &[f64]) -> Result<Vec<f64>, FlowError> {
    map.apply_in(x, Direction::Inverse)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub x: Vec<f64>,
    pub image: Vec<f64>,
    /// `|f(x) − g(φ(x))|`.
    pub residual: f64,
    pub conservation_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub max_residual: f64,
    pub max_conservation_drift: f64,
    pub points: Vec<PointCheck>,
}

impl EquivalenceReport {
    /// CSV with columns `x1..xn, phi1..phin, residual, drift`.
    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, |p| p.x.len());
        let mut out = String::new();
        let head: Vec<String> = (1..=n)
            .map(|i| format!("x{i}"))
            .chain((1..=n).map(|i| format!("phi{i}")))
            .chain(["residual".into(), "drift".into()])
            .collect();
        out.push_str(&head.join(","));
        out.push('\n');
        for p in &self.points {
            let row: Vec<String> = p
                .x
                .iter()
                .chain(&p.image)
                .chain([&p.residual, &p.conservation_drift])
                .map(|v| format!("{v:e}"))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn sample_points(map: &DiffeoMap, spec: &SamplingSpec) -> Result<Vec<Vec<f64>>, FlowError> {
    if spec.dimension != map.dim() {
        return Err(GermError::DimensionMismatch {
            expected: map.dim(),
            found: spec.dimension,
        }
        .into());
    }
    Ok(sample_domain(spec)?.into_iter().map(|s| s.x).collect())
}

/// Max over sampled `x` of `|f(x) − g(φ(x))|`, one trajectory per sample.
pub fn verify_equivalence(map: &DiffeoMap, spec: &SamplingSpec) -> Result<EquivalenceReport, FlowError> {
    let forward = DiffeoMap {
        direction: Direction::Forward,
        ..map.clone()
    };
    let xs = sample_points(map, spec)?;
    let sys = &forward.system;
    let points = xs
        .into_par_iter()
        .map(|x| {
            let (image, drift) = if forward.zero_set.is_known_point(&x) || sys.is_trivial() {
                (x.clone(), 0.0)
            } else {
                let traj = forward.trajectory(&x)?;
                (traj.endpoint().to_vec(), traj.conservation_drift)
            };
            Ok(PointCheck {
                residual: (sys.eval_f(&x) - sys.eval_g(&image)).abs(),
                x,
                image,
                conservation_drift: drift,
            })
        })
        .collect::<Result<Vec<_>, FlowError>>()?;
    Ok(EquivalenceReport {
        max_residual: points.iter().map(|p| p.residual).fold(0.0, f64::max),
        max_conservation_drift: points.iter().map(|p| p.conservation_drift).fold(0.0, f64::max),
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub max_error: f64,
    pub worst_point: Vec<f64>,
}

/// Max over sampled `x` of `|φ⁻¹(φ(x)) − x|`.
pub fn round_trip(map: &DiffeoMap, spec: &SamplingSpec) -> Result<RoundTripReport, FlowError> {
    let xs = sample_points(map, spec)?;
    let errs = xs
        .par_iter()
        .map(|x| {
            let back = diffeo_inverse(map, &diffeo_forward(map, x)?)?;
            Ok(back.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        })
        .collect::<Result<Vec<f64>, FlowError>>()?;
    let (k, max_error) = errs
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (i, e)| if e > acc.1 { (i, e) } else { acc });
    Ok(RoundTripReport {
        max_error,
        worst_point: xs[k].clone(),
    })
}

/// Central-difference Jacobian of the map at `x`.
pub fn numeric_jacobian(map: &DiffeoMap, x: &[f64], h: f64) -> Result<DMatrix<f64>, FlowError> {
    if !(h > 0.0) {
        return Err(FlowError::InvalidStep(h));
    }
    let n = map.dim();
    if x.len() != n {
        return Err(GermError::DimensionMismatch { expected: n, found: x.len() }.into());
    }
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let (fp, fm) = (map.apply(&xp)?, map.apply(&xm)?);
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisplacementProfile {
    /// Fit of `log|φ(x) − x| = slope·log dist(x, Z) + intercept`.
    Decay { slope: f64, intercept: f64, fit_points: usize },
    /// Every displacement was below the noise floor.
    IdentityWithinNoise,
}

/// Displacements at or below this are indistinguishable from the identity.
pub const DISPLACEMENT_NOISE: f64 = 1e-14;

/// Log-log decay rate of `|φ(x) − x|` in `dist(x, Z)`.
pub fn displacement_profile(map: &DiffeoMap, spec: &SamplingSpec) -> Result<DisplacementProfile, FlowError> {
    let xs = sample_points(map, spec)?;
    let pairs = xs
        .par_iter()
        .map(|x| {
            let y = diffeo_forward(map, x)?;
            let disp = y.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let dist = map.zero_set.distance(x).ok_or(FlowError::EmptySingularSet)?;
            Ok((dist, disp))
        })
        .collect::<Result<Vec<_>, FlowError>>()?;
    let (lx, ly): (Vec<f64>, Vec<f64>) = pairs
        .into_iter()
        .filter(|&(dist, disp)| dist > 0.0 && disp > DISPLACEMENT_NOISE)
        .map(|(dist, disp)| (dist.ln(), disp.ln()))
        .unzip();
    Ok(match least_squares(&lx, &ly) {
        Some((slope, intercept)) => DisplacementProfile::Decay {
            slope,
            intercept,
            fit_points: lx.len(),
        },
        None => DisplacementProfile::IdentityWithinNoise,
    })
}
