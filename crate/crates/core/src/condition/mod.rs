//! Sampled evidence for the hypothesis inequalities of the equivalence
//! theorems, the gradient/distance bound, and the Łojasiewicz exponent.
//!
//! Every inequality here has the shape `ratio(x) ≤ C` on a punctured
//! neighbourhood of 0. A finite sample cannot certify that, so each ratio
//! family is summarised by its per-shell maxima and the log-log slope of
//! those maxima against the shell radius. A negative slope means the ratio
//! grows toward the origin.

mod lojasiewicz;
mod sampling;

pub use lojasiewicz::{compare_exponents, estimate_lojasiewicz, ExponentComparison, LojasiewiczEstimate};
pub use sampling::{sample_domain, SamplePoint, SamplingSpec, DEFAULT_GRAD_FLOOR};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::least_squares;
use crate::flow::SingularSetApprox;
use crate::germ::{CompiledPoly, GermError, MultiIndex, Poly, PolyGerm};

/// Slopes at or above this count as bounded.
pub const BOUNDED_SLOPE: f64 = -0.1;
/// Slopes below this (with enough growth) count as divergent.
pub const DIVERGENT_SLOPE: f64 = -0.25;
/// Required growth of the worst ratio over its outer-shell value for FAIL.
pub const DIVERGENT_GROWTH: f64 = 10.0;
/// Fewest samples for which a verdict is issued.
pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionError {
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error("invalid sampling spec: {0}")]
    InvalidSpec(String),
    #[error("gradient of f does not vanish at the origin")]
    NotCritical,
    #[error("order r must be at least {min}, got {got}")]
    InvalidOrder { min: u32, got: u32 },
    #[error("all {0} samples were excluded by grad_floor")]
    AllExcluded(usize),
    #[error("need at least {need} samples, have {have}")]
    TooFewSamples { need: usize, have: usize },
    #[error("germ is identically zero")]
    ZeroGerm,
    #[error("singular set approximation is empty")]
    EmptySingularSet,
    #[error("need usable samples on at least {need} shells, have {have}")]
    TooFewShells { need: usize, have: usize },
    #[error("binding points do not span a range of |f|; cannot fit an exponent")]
    DegenerateFit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Which quantity a [`RatioRecord`] bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RatioFamily {
    /// `|∂ᵐ(g−f)| / |∇f|^k`.
    Partial { m: Vec<u32>, power: u32 },
    /// `|∇(g−f)| / |∇f|^k`.
    Gradient { power: u32 },
    /// `|∇f| / dist(x, Z)`.
    GradientOverDistance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    #[serde(flatten)]
    pub family: RatioFamily,
    pub worst_ratio: f64,
    pub worst_point: Vec<f64>,
    pub ratio_slope: f64,
    /// Max ratio on the outermost shell that has usable samples.
    pub outer_ratio: f64,
    /// Max ratio per shell, innermost first (NaN for shells with no usable sample).
    pub shell_max: Vec<f64>,
}

impl RatioRecord {
    fn is_bounded(&self) -> bool {
        self.ratio_slope >= BOUNDED_SLOPE
    }

    fn is_divergent(&self) -> bool {
        self.ratio_slope < DIVERGENT_SLOPE && self.worst_ratio > DIVERGENT_GROWTH * self.outer_ratio
    }
}

/// One sample's raw ratios, in record order (NaN where excluded).
#[derive(Clone, Debug, PartialEq)]
pub struct RawSample {
    pub shell_radius: f64,
    pub x: Vec<f64>,
    pub ratios: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub records: Vec<RatioRecord>,
    pub c_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_prime_estimate: Option<f64>,
    pub excluded_count: usize,
    pub verdict: Verdict,
    #[serde(skip)]
    pub raw: Vec<RawSample>,
}

impl ConditionReport {
    /// CSV with columns `shell_radius, x1..xn, ratio_<record>...`.
    pub fn to_csv(&self) -> String {
        let n = self.raw.first().map_or(0, |s| s.x.len());
        let mut out = String::from("shell_radius");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        for rec in &self.records {
            let label = match &rec.family {
                RatioFamily::Partial { m, .. } => format!(
                    "ratio_m{}",
                    m.iter().map(u32::to_string).collect::<Vec<_>>().join("_")
                ),
                RatioFamily::Gradient { .. } => "ratio_grad".to_string(),
                RatioFamily::GradientOverDistance => "ratio_grad_dist".to_string(),
            };
            out.push(',');
            out.push_str(&label);
        }
        out.push('\n');
        for s in &self.raw {
            out.push_str(&format!("{:e}", s.shell_radius));
            for v in s.x.iter().chain(&s.ratios) {
                out.push_str(&format!(",{v:e}"));
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn verdict_of(records: &[RatioRecord]) -> Verdict {
    if records.iter().any(RatioRecord::is_divergent) {
        Verdict::Fail
    } else if records.iter().all(RatioRecord::is_bounded) {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}

/// Summarise one ratio family; `ratios[i]` is `None` for excluded samples.
pub(crate) fn summarize(
    family: RatioFamily,
    samples: &[SamplePoint],
    ratios: &[Option<f64>],
    shells: &[f64],
) -> RatioRecord {
    let mut shell_max = vec![f64::NAN; shells.len()];
    let mut worst = 0.0;
    let mut worst_point = samples.first().map(|s| s.x.clone()).unwrap_or_default();
    for (s, r) in samples.iter().zip(ratios) {
        let Some(r) = *r else { continue };
        let slot = &mut shell_max[s.shell];
        if slot.is_nan() || r > *slot {
            *slot = r;
        }
        if r > worst {
            worst = r;
            worst_point = s.x.clone();
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = shells
        .iter()
        .zip(&shell_max)
        .filter(|(_, m)| **m > 0.0 && m.is_finite())
        .map(|(r, m)| (r.ln(), m.ln()))
        .unzip();
    let ratio_slope = least_squares(&xs, &ys).map_or(0.0, |(s, _)| s);
    let outer_ratio = shell_max.iter().rev().copied().find(|m| !m.is_nan()).unwrap_or(0.0);
    RatioRecord {
        family,
        worst_ratio: worst,
        worst_point,
        ratio_slope,
        outer_ratio,
        shell_max,
    }
}

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|a| a * a).sum::<f64>().sqrt()
}

fn check_pair(f: &PolyGerm, g: &PolyGerm, spec: &SamplingSpec) -> Result<(), ConditionError> {
    spec.validate()?;
    for p in [f, g] {
        if p.dim() != spec.dimension {
            return Err(GermError::DimensionMismatch {
                expected: spec.dimension,
                found: p.dim(),
            }
            .into());
        }
    }
    if !f.is_critical_at_origin() {
        return Err(ConditionError::NotCritical);
    }
    if spec.total_points() < MIN_SAMPLES {
        return Err(ConditionError::TooFewSamples {
            need: MIN_SAMPLES,
            have: spec.total_points(),
        });
    }
    Ok(())
}

/// A ratio family evaluated at a point given `|∇f(x)|`.
enum Numerator {
    Partial(CompiledPoly),
    GradientNorm(Vec<CompiledPoly>),
}

impl Numerator {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Numerator::Partial(p) => p.eval(x).abs(),
            Numerator::GradientNorm(g) => norm(g.iter().map(|p| p.eval(x))),
        }
    }
}

fn run_ratios(
    f: &PolyGerm,
    families: Vec<(RatioFamily, Numerator, u32)>,
    spec: &SamplingSpec,
) -> Result<(Vec<RatioRecord>, usize, Vec<RawSample>), ConditionError> {
    let samples = sample_domain(spec)?;
    let grad_f: Vec<CompiledPoly> = f.gradient().iter().map(Poly::compile).collect();
    let rows: Vec<Option<Vec<f64>>> = samples
        .par_iter()
        .map(|s| {
            let gn = norm(grad_f.iter().map(|p| p.eval(&s.x)));
            if gn < spec.grad_floor || gn == 0.0 {
                return None;
            }
            Some(
                families
                    .iter()
                    .map(|(_, num, power)| num.eval(&s.x) / gn.powi(*power as i32))
                    .collect(),
            )
        })
        .collect();
    let excluded = rows.iter().filter(|r| r.is_none()).count();
    if excluded == samples.len() {
        return Err(ConditionError::AllExcluded(excluded));
    }
    let shells = spec.radii();
    let records = families
        .into_iter()
        .enumerate()
        .map(|(k, (family, _, _))| {
            let ratios: Vec<Option<f64>> = rows.iter().map(|r| r.as_ref().map(|v| v[k])).collect();
            summarize(family, &samples, &ratios, &shells)
        })
        .collect();
    let raw = samples
        .iter()
        .zip(&rows)
        .map(|(s, r)| RawSample {
            shell_radius: s.radius,
            x: s.x.clone(),
            ratios: r.clone().unwrap_or_else(|| vec![f64::NAN; rows_width(&rows)]),
        })
        .collect();
    Ok((records, excluded, raw))
}

fn rows_width(rows: &[Option<Vec<f64>>]) -> usize {
    rows.iter().flatten().next().map_or(0, Vec::len)
}

/// Tests `|∂ᵐ(g−f)(x)| ≤ C |∇f(x)|^{r+2−|m|}` for every `|m| ≤ r`.
pub fn check_theorem2(
    f: &PolyGerm,
    g: &PolyGerm,
    r: u32,
    spec: &SamplingSpec,
) -> Result<ConditionReport, ConditionError> {
    if r < 1 {
        return Err(ConditionError::InvalidOrder { min: 1, got: r });
    }
    check_pair(f, g, spec)?;
    let d = g.as_poly() - f.as_poly();
    let mut families = Vec::new();
    for m in MultiIndex::up_to_order(spec.dimension, r) {
        let power = r + 2 - m.order();
        let num = Numerator::Partial(d.partial(&m)?.compile());
        families.push((
            RatioFamily::Partial {
                m: m.exponents().to_vec(),
                power,
            },
            num,
            power,
        ));
    }
    let (records, excluded_count, raw) = run_ratios(f, families, spec)?;
    let c_estimate = records.iter().map(|r| r.worst_ratio).fold(0.0, f64::max);
    Ok(ConditionReport {
        verdict: verdict_of(&records),
        records,
        c_estimate,
        c_prime_estimate: None,
        excluded_count,
        raw,
    })
}

/// Tests `|(g−f)(x)| ≤ C|∇f(x)|²` and `|∇(g−f)(x)| ≤ C′|∇f(x)|²`.
///
/// Polynomial germs always have locally Lipschitz gradients, so only the two
/// inequalities need sampling.
pub fn check_theorem3(
    f: &PolyGerm,
    g: &PolyGerm,
    spec: &SamplingSpec,
) -> Result<ConditionReport, ConditionError> {
    check_pair(f, g, spec)?;
    let d = g.as_poly() - f.as_poly();
    let families = vec![
        (
            RatioFamily::Partial {
                m: vec![0; spec.dimension],
                power: 2,
            },
            Numerator::Partial(d.compile()),
            2,
        ),
        (
            RatioFamily::Gradient { power: 2 },
            Numerator::GradientNorm(d.gradient().iter().map(Poly::compile).collect()),
            2,
        ),
    ];
    let (records, excluded_count, raw) = run_ratios(f, families, spec)?;
    Ok(ConditionReport {
        verdict: verdict_of(&records),
        c_estimate: records[0].worst_ratio,
        c_prime_estimate: Some(records[1].worst_ratio),
        records,
        excluded_count,
        raw,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistBoundReport {
    pub a_estimate: f64,
    pub record: RatioRecord,
    pub excluded_count: usize,
    pub verdict: Verdict,
}

/// Samples `|∇f(x)| / dist(x, Z)`; samples on the approximation of `Z` are excluded.
pub fn estimate_gradient_dist_bound(
    f: &PolyGerm,
    zero_set: &SingularSetApprox,
    spec: &SamplingSpec,
) -> Result<DistBoundReport, ConditionError> {
    spec.validate()?;
    if f.dim() != spec.dimension {
        return Err(GermError::DimensionMismatch {
            expected: spec.dimension,
            found: f.dim(),
        }
        .into());
    }
    if zero_set.is_empty() {
        return Err(ConditionError::EmptySingularSet);
    }
    let samples = sample_domain(spec)?;
    let grad_f: Vec<CompiledPoly> = f.gradient().iter().map(Poly::compile).collect();
    let ratios: Vec<Option<f64>> = samples
        .par_iter()
        .map(|s| {
            let dist = zero_set.distance(&s.x)?;
            (dist > 0.0).then(|| norm(grad_f.iter().map(|p| p.eval(&s.x))) / dist)
        })
        .collect();
    let excluded_count = ratios.iter().filter(|r| r.is_none()).count();
    if excluded_count == samples.len() {
        return Err(ConditionError::AllExcluded(excluded_count));
    }
    let record = summarize(RatioFamily::GradientOverDistance, &samples, &ratios, &spec.radii());
    Ok(DistBoundReport {
        a_estimate: record.worst_ratio,
        verdict: verdict_of(std::slice::from_ref(&record)),
        record,
        excluded_count,
    })
}
