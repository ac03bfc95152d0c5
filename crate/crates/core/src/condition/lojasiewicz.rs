use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sample_domain, ConditionError, SamplingSpec};
use crate::fit::least_squares;
use crate::germ::{CompiledPoly, GermError, Poly, PolyGerm};

pub const MIN_USABLE_SAMPLES: usize = 8;
pub const MIN_FIT_SHELLS: usize = 4;
const MAX_REBIND_ITERATIONS: usize = 50;

/// Fitted `|∇f(x)| ≥ C|f(x)|^η` near the origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LojasiewiczEstimate {
    pub eta_hat: f64,
    pub c_hat: f64,
    /// Number of binding points (one per usable shell) in the fit.
    pub fit_points: usize,
    /// Max deviation of the binding points from the fitted envelope line.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    /// `(log|f|, log|∇f|)` of the binding point on each usable shell.
    pub binding: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentComparison {
    pub f: LojasiewiczEstimate,
    pub g: LojasiewiczEstimate,
    pub delta: f64,
}

/// Lower-envelope fit of `log|∇f|` against `log|f|` over the sampled shells.
///
/// Each shell contributes its binding sample, the one minimising
/// `log|∇f| − η·log|f|`. Since `η` is what is being fitted, the first pass
/// binds on the smallest gradient per shell and the binding set is then
/// re-chosen with the current slope until it stops changing.
pub fn estimate_lojasiewicz(
    f: &PolyGerm,
    spec: &SamplingSpec,
) -> Result<LojasiewiczEstimate, ConditionError> {
    if f.dim() != spec.dimension {
        return Err(GermError::DimensionMismatch {
            expected: spec.dimension,
            found: f.dim(),
        }
        .into());
    }
    if f.is_zero() {
        return Err(ConditionError::ZeroGerm);
    }
    let samples = sample_domain(spec)?;
    let fc = f.compile();
    let grad: Vec<CompiledPoly> = f.gradient().iter().map(Poly::compile).collect();
    let logs: Vec<Option<(usize, f64, f64)>> = samples
        .par_iter()
        .map(|s| {
            let fv = fc.eval(&s.x).abs();
            let gv = grad.iter().map(|p| p.eval(&s.x).powi(2)).sum::<f64>().sqrt();
            (fv > 0.0 && gv > 0.0).then(|| (s.shell, fv.ln(), gv.ln()))
        })
        .collect();
    let usable: Vec<(usize, f64, f64)> = logs.into_iter().flatten().collect();
    if usable.len() < MIN_USABLE_SAMPLES {
        return Err(ConditionError::TooFewSamples {
            need: MIN_USABLE_SAMPLES,
            have: usable.len(),
        });
    }
    let mut by_shell: Vec<Vec<(f64, f64)>> = vec![Vec::new(); spec.shells];
    for &(shell, lf, lg) in &usable {
        by_shell[shell].push((lf, lg));
    }
    by_shell.retain(|v| !v.is_empty());
    if by_shell.len() < MIN_FIT_SHELLS {
        return Err(ConditionError::TooFewShells {
            need: MIN_FIT_SHELLS,
            have: by_shell.len(),
        });
    }

    let pick = |key: &dyn Fn(&(f64, f64)) -> f64| -> Vec<(f64, f64)> {
        by_shell
            .iter()
            .map(|pts| {
                *pts.iter()
                    .min_by(|a, b| key(a).total_cmp(&key(b)))
                    .expect("nonempty shell")
            })
            .collect()
    };
    let fit = |pts: &[(f64, f64)]| -> Result<(f64, f64), ConditionError> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
        least_squares(&xs, &ys).ok_or(ConditionError::DegenerateFit)
    };

    let mut binding = pick(&|p| p.1);
    let (mut eta, mut intercept) = fit(&binding)?;
    for _ in 0..MAX_REBIND_ITERATIONS {
        let next = pick(&|p| p.1 - eta * p.0);
        if next == binding {
            break;
        }
        binding = next;
        (eta, intercept) = fit(&binding)?;
    }

    let log_c = usable
        .iter()
        .map(|&(_, lf, lg)| lg - eta * lf)
        .fold(f64::INFINITY, f64::min);
    let residual = binding
        .iter()
        .map(|&(lf, lg)| (lg - (eta * lf + intercept)).abs())
        .fold(0.0, f64::max);
    let warning = (!(eta > 0.0 && eta < 1.0))
        .then(|| format!("fitted exponent {eta} outside (0, 1)"));
    Ok(LojasiewiczEstimate {
        eta_hat: eta,
        c_hat: log_c.exp(),
        fit_points: binding.len(),
        residual,
        warning,
        binding,
    })
}

/// Estimates both exponents on the same samples; `delta = |η_f − η_g|`.
pub fn compare_exponents(
    f: &PolyGerm,
    g: &PolyGerm,
    spec: &SamplingSpec,
) -> Result<ExponentComparison, ConditionError> {
    let ef = estimate_lojasiewicz(f, spec)?;
    let eg = estimate_lojasiewicz(g, spec)?;
    Ok(ExponentComparison {
        delta: (ef.eta_hat - eg.eta_hat).abs(),
        f: ef,
        g: eg,
    })
}
