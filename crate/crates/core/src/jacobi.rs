//! Generators of powers of the Jacobi ideal `𝒥_f = (∂f/∂x₁, …, ∂f/∂xₙ)` and
//! construction of pairs `(f, g)` with `g − f ∈ 𝒥_f^{r+2}`.
//!
//! Membership of an arbitrary polynomial is not decided here; pairs are
//! built so that membership holds by construction.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::condition::{check_theorem2, ConditionError, ConditionReport, SamplingSpec, Verdict};
use crate::germ::{GermError, MultiIndex, Poly, PolyGerm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JacobiError {
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error("gradient of f does not vanish at the origin")]
    NotCritical,
    #[error("ideal power must be at least 1")]
    ZeroPower,
    #[error("expected {expected} multipliers, got {found}")]
    MultiplierCount { expected: usize, found: usize },
    #[error("ideal element does not assemble to g - f")]
    ElementMismatch,
    #[error("corollary inequality failed on sampled data (C estimate {})", .0.c_estimate)]
    CorollaryViolated(Box<ConditionReport>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct JacobiIdealBasis {
    f: PolyGerm,
    partials: Vec<Poly>,
}

impl JacobiIdealBasis {
    pub fn new(f: PolyGerm) -> Self {
        let partials = f.gradient();
        JacobiIdealBasis { f, partials }
    }

    pub fn f(&self) -> &PolyGerm {
        &self.f
    }

    pub fn partials(&self) -> &[Poly] {
        &self.partials
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    /// `Π partials[i]` over the (zero-based) word.
    pub fn product(&self, word: &[usize]) -> Poly {
        word.iter().fold(
            Poly::constant(self.dim(), BigRational::from_integer(1.into())),
            |acc, &i| &acc * &self.partials[i],
        )
    }
}

/// A product of `M` partials, labelled by its nondecreasing index word.
#[derive(Clone, Debug, PartialEq)]
pub struct IdealGenerator {
    pub word: Vec<usize>,
    pub poly: Poly,
}

/// Every product `∂_{i₁}f ⋯ ∂_{i_M}f` over multisets `{i₁ ≤ … ≤ i_M}`,
/// `C(n+M−1, M)` of them, in lexicographic order of the words.
pub fn ideal_power_generators(basis: &JacobiIdealBasis, power: u32) -> Result<Vec<IdealGenerator>, JacobiError> {
    if power == 0 {
        return Err(JacobiError::ZeroPower);
    }
    fn words(n: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            words(n, len, i, cur, out);
            cur.pop();
        }
    }
    let mut ws = Vec::new();
    words(basis.dim(), power as usize, 0, &mut Vec::new(), &mut ws);
    Ok(ws
        .into_iter()
        .map(|word| IdealGenerator {
            poly: basis.product(&word),
            word,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementTerm {
    pub multiplier: Poly,
    pub factor_word: Vec<usize>,
}

/// `Σ multiplier · Π partials[word]`, with its exact expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct IdealPowerElement {
    pub terms: Vec<ElementTerm>,
    pub assembled: Poly,
}

impl IdealPowerElement {
    pub fn new(basis: &JacobiIdealBasis, terms: Vec<ElementTerm>) -> Self {
        let mut assembled = Poly::zero(basis.dim());
        for t in &terms {
            assembled = &assembled + &(&t.multiplier * &basis.product(&t.factor_word));
        }
        IdealPowerElement { terms, assembled }
    }

    /// Re-expands the terms and compares with `assembled`.
    pub fn is_consistent(&self, basis: &JacobiIdealBasis) -> bool {
        Self::new(basis, self.terms.clone()).assembled == self.assembled
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedPair {
    pub g: PolyGerm,
    pub element: IdealPowerElement,
    pub generators: Vec<IdealGenerator>,
}

/// `g = f + Σ multipliers[k] · generators[k]` over the generators of `𝒥_f^{r+2}`.
pub fn generate_pair(f: &PolyGerm, r: u32, multipliers: &[Poly]) -> Result<GeneratedPair, JacobiError> {
    if !f.is_critical_at_origin() {
        return Err(JacobiError::NotCritical);
    }
    let basis = JacobiIdealBasis::new(f.clone());
    let generators = ideal_power_generators(&basis, r + 2)?;
    if multipliers.len() != generators.len() {
        return Err(JacobiError::MultiplierCount {
            expected: generators.len(),
            found: multipliers.len(),
        });
    }
    for m in multipliers {
        if m.dim() != f.dim() {
            return Err(GermError::DimensionMismatch {
                expected: f.dim(),
                found: m.dim(),
            }
            .into());
        }
    }
    let terms = multipliers
        .iter()
        .zip(&generators)
        .map(|(m, gen)| ElementTerm {
            multiplier: m.clone(),
            factor_word: gen.word.clone(),
        })
        .collect();
    let element = IdealPowerElement::new(&basis, terms);
    let g = PolyGerm::new(f.as_poly() + &element.assembled)?;
    Ok(GeneratedPair { g, element, generators })
}

/// Runs the hypothesis check on a pair whose difference is a known ideal element.
pub fn verify_corollary1(
    f: &PolyGerm,
    g: &PolyGerm,
    element: &IdealPowerElement,
    r: u32,
    spec: &SamplingSpec,
) -> Result<ConditionReport, JacobiError> {
    if element.assembled != g.as_poly() - f.as_poly() {
        return Err(JacobiError::ElementMismatch);
    }
    let report = check_theorem2(f, g, r, spec)?;
    if report.verdict == Verdict::Fail {
        return Err(JacobiError::CorollaryViolated(Box::new(report)));
    }
    Ok(report)
}

/// Random multipliers of total degree ≤ `max_degree` with coefficients
/// `k/64`, `|k| ≤ 8`, so every coefficient is at most 1/8 in magnitude.
pub fn random_multipliers(dim: usize, count: usize, max_degree: u32, seed: u64) -> Vec<Poly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let monomials = MultiIndex::up_to_order(dim, max_degree);
    (0..count)
        .map(|_| {
            let terms = monomials.iter().map(|m| {
                let k: i64 = rng.random_range(-8..=8);
                (BigRational::new(BigInt::from(k), BigInt::from(64)), m.clone())
            });
            Poly::from_terms(dim, terms.collect::<Vec<_>>()).expect("monomials share dimension")
        })
        .collect()
}
