use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ConditionError;

/// How to probe a punctured neighbourhood `radius_min ≤ |x| ≤ radius_max` of 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingSpec {
    pub dimension: usize,
    pub radius_max: f64,
    pub radius_min: f64,
    pub shells: usize,
    pub points_per_shell: usize,
    pub seed: u64,
    /// Samples with `|∇f(x)|` below this are excluded from ratio statistics.
    pub grad_floor: f64,
}

pub const DEFAULT_GRAD_FLOOR: f64 = 1e-14;

impl SamplingSpec {
    /// Condition-check defaults: `1e-4 ≤ |x| ≤ 0.2`, 12 shells × 16 points.
    pub fn new(dimension: usize) -> Self {
        SamplingSpec {
            dimension,
            radius_max: 0.2,
            radius_min: 1e-4,
            shells: 12,
            points_per_shell: 16,
            seed: 0,
            grad_floor: DEFAULT_GRAD_FLOOR,
        }
    }

    /// Łojasiewicz-fit defaults: `1e-4 ≤ |x| ≤ 1e-1`, 12 shells × 64 points.
    pub fn lojasiewicz(dimension: usize) -> Self {
        SamplingSpec {
            radius_max: 0.1,
            points_per_shell: 64,
            ..Self::new(dimension)
        }
    }

    pub fn with_radii(mut self, radius_min: f64, radius_max: f64) -> Self {
        self.radius_min = radius_min;
        self.radius_max = radius_max;
        self
    }

    pub fn with_grid(mut self, shells: usize, points_per_shell: usize) -> Self {
        self.shells = shells;
        self.points_per_shell = points_per_shell;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn total_points(&self) -> usize {
        self.shells * self.points_per_shell
    }

    pub fn validate(&self) -> Result<(), ConditionError> {
        let bad = |msg: &str| Err(ConditionError::InvalidSpec(msg.to_string()));
        if self.dimension == 0 {
            return bad("dimension must be at least 1");
        }
        if !(self.radius_min > 0.0 && self.radius_min < self.radius_max && self.radius_max.is_finite()) {
            return bad("need 0 < radius_min < radius_max");
        }
        if self.shells < 2 {
            return bad("need at least 2 shells");
        }
        if self.points_per_shell == 0 {
            return bad("need at least 1 point per shell");
        }
        if !(self.grad_floor >= 0.0) {
            return bad("grad_floor must be nonnegative");
        }
        Ok(())
    }

    /// Log-spaced shell radii from `radius_min` (index 0) to `radius_max`.
    pub fn radii(&self) -> Vec<f64> {
        let (lo, hi) = (self.radius_min.ln(), self.radius_max.ln());
        let last = self.shells - 1;
        (0..self.shells)
            .map(|k| match k {
                0 => self.radius_min,
                k if k == last => self.radius_max,
                k => (lo + (hi - lo) * k as f64 / last as f64).exp(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplePoint {
    pub shell: usize,
    pub radius: f64,
    pub x: Vec<f64>,
}

/// Unit directions shared by every shell. In one dimension they alternate `+1, -1`.
fn directions(spec: &SamplingSpec) -> Vec<Vec<f64>> {
    let n = spec.dimension;
    if n == 1 {
        return (0..spec.points_per_shell)
            .map(|j| vec![if j % 2 == 0 { 1.0 } else { -1.0 }])
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.points_per_shell);
    while out.len() < spec.points_per_shell {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            out.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    out
}

/// Deterministic sample of `shells · points_per_shell` points, shell-major.
pub fn sample_domain(spec: &SamplingSpec) -> Result<Vec<SamplePoint>, ConditionError> {
    spec.validate()?;
    let dirs = directions(spec);
    let mut out = Vec::with_capacity(spec.total_points());
    for (shell, radius) in spec.radii().into_iter().enumerate() {
        for u in &dirs {
            out.push(SamplePoint {
                shell,
                radius,
                x: u.iter().map(|c| c * radius).collect(),
            });
        }
    }
    Ok(out)
}
