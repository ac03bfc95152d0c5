use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{GermError, MultiIndex};

/// Sparse multivariate polynomial over ℚ in the variables `x1..xn`.
///
/// Terms are kept in canonical form: no zero coefficients, keys ordered
/// graded-lexicographically. Two polynomials are equal iff their term maps are.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    dim: usize,
    terms: BTreeMap<MultiIndex, BigRational>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Poly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: BigRational) -> Self {
        Self::monomial(c, MultiIndex::zeros(dim))
    }

    pub fn monomial(c: BigRational, m: MultiIndex) -> Self {
        let dim = m.dim();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { dim, terms }
    }

    /// The coordinate function `x_{i+1}` (zero-based `i`).
    pub fn var(dim: usize, i: usize) -> Self {
        Self::monomial(BigRational::one(), MultiIndex::unit(dim, i))
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs, merging
    /// duplicates and dropping zeros.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self, GermError>
    where
        I: IntoIterator<Item = (BigRational, MultiIndex)>,
    {
        let mut p = Poly::zero(dim);
        for (c, m) in terms {
            if m.dim() != dim {
                return Err(GermError::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: MultiIndex, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let remove = {
            let slot = self.terms.entry(m.clone()).or_insert_with(BigRational::zero);
            *slot += c;
            slot.is_zero()
        };
        if remove {
            self.terms.remove(&m);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &MultiIndex) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coefficient(&MultiIndex::zeros(self.dim))
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::order).max()
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.dim);
        }
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    /// Evaluates `Σ c_m · Π x_i^{m_i}` in double precision.
    pub fn eval(&self, x: &[f64]) -> Result<f64, GermError> {
        if x.len() != self.dim {
            return Err(GermError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| rational_to_f64(c) * monomial_value(m.exponents(), x))
            .sum())
    }

    /// Exact mixed partial `∂^{|m|} p / ∂x^m`.
    pub fn partial(&self, m: &MultiIndex) -> Result<Poly, GermError> {
        if m.dim() != self.dim {
            return Err(GermError::DimensionMismatch {
                expected: self.dim,
                found: m.dim(),
            });
        }
        let mut out = Poly::zero(self.dim);
        'terms: for (e, c) in &self.terms {
            let mut factor = BigInt::one();
            let mut exps = Vec::with_capacity(self.dim);
            for (&ei, &mi) in e.exponents().iter().zip(m.exponents()) {
                if ei < mi {
                    continue 'terms;
                }
                for k in 0..mi {
                    factor *= BigInt::from(ei - k);
                }
                exps.push(ei - mi);
            }
            out.add_term(MultiIndex::new(exps), c * BigRational::from_integer(factor));
        }
        Ok(out)
    }

    /// `(∂p/∂x1, …, ∂p/∂xn)`.
    pub fn gradient(&self) -> Vec<Poly> {
        (0..self.dim)
            .map(|i| {
                self.partial(&MultiIndex::unit(self.dim, i))
                    .expect("unit index has matching dimension")
            })
            .collect()
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::constant(self.dim, BigRational::one());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Double-precision copy for repeated evaluation.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            dim: self.dim,
            coeffs: self.terms.values().map(rational_to_f64).collect(),
            exponents: self
                .terms
                .keys()
                .map(|m| m.exponents().to_vec())
                .collect(),
        }
    }

    /// Sum of `|c_m| · |m| · R^{|m|-1}`: bounds `|∇p|` (in ℓ¹) on the ball of radius `R`.
    pub fn gradient_bound(&self, radius: f64) -> f64 {
        self.terms
            .iter()
            .filter(|(m, _)| m.order() > 0)
            .map(|(m, c)| {
                let k = m.order() as i32;
                rational_to_f64(c).abs() * k as f64 * radius.powi(k - 1)
            })
            .sum()
    }

    fn check_dim(&self, other: &Poly) {
        assert_eq!(
            self.dim, other.dim,
            "polynomial arithmetic across dimensions {} and {}",
            self.dim, other.dim
        );
    }
}

fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        if c.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

fn monomial_value(exps: &[u32], x: &[f64]) -> f64 {
    exps.iter()
        .zip(x)
        .filter(|(&e, _)| e > 0)
        .map(|(&e, &xi)| xi.powi(e as i32))
        .product()
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.check_dim(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.check_dim(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.check_dim(rhs);
        let mut out = Poly::zero(self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.add(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for Poly {
    /// Terms in graded-lex order, e.g. `x1^2 + 1/4*x1^3` or `x1*x2 - x2^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            if k == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let vars: Vec<String> = m
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// A polynomial germ `(ℝⁿ,0) → (ℝ,0)`: a [`Poly`] with zero constant term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyGerm(Poly);

impl PolyGerm {
    pub fn new(p: Poly) -> Result<Self, GermError> {
        let c = p.constant_term();
        if !c.is_zero() {
            return Err(GermError::NonzeroConstant(c.to_string()));
        }
        Ok(PolyGerm(p))
    }

    pub fn zero(dim: usize) -> Self {
        PolyGerm(Poly::zero(dim))
    }

    pub fn as_poly(&self) -> &Poly {
        &self.0
    }

    pub fn into_poly(self) -> Poly {
        self.0
    }

    /// `∇p(0) = 0`, decided exactly: no linear terms.
    pub fn is_critical_at_origin(&self) -> bool {
        self.0.terms().all(|(m, _)| m.order() != 1)
    }
}

impl Deref for PolyGerm {
    type Target = Poly;
    fn deref(&self) -> &Poly {
        &self.0
    }
}

impl fmt::Display for PolyGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Floating-point snapshot of a [`Poly`] for hot evaluation loops.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    dim: usize,
    coeffs: Vec<f64>,
    exponents: Vec<Vec<u32>>,
}

impl CompiledPoly {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Caller guarantees `x.len() == dim`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.coeffs
            .iter()
            .zip(&self.exponents)
            .map(|(c, e)| c * monomial_value(e, x))
            .sum()
    }
}
