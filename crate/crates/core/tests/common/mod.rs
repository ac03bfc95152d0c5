#![allow(dead_code)]

use germ_equiv::germ::{parse_poly, MultiIndex, Poly};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

/// Small rationals `p/q` with `|p| ≤ 12`, `1 ≤ q ≤ 8`.
pub fn rational() -> impl Strategy<Value = BigRational> {
    (-12i64..=12, 1i64..=8).prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
}

pub fn exponents(n: usize, max_degree: u32) -> impl Strategy<Value = MultiIndex> {
    proptest::collection::vec(0..=max_degree, n)
        .prop_filter("total degree", move |e| e.iter().sum::<u32>() <= max_degree)
        .prop_map(MultiIndex::new)
}

/// Polynomials in `n` variables of total degree ≤ `max_degree`.
pub fn poly(n: usize, max_degree: u32) -> impl Strategy<Value = Poly> {
    proptest::collection::vec((rational(), exponents(n, max_degree)), 0..8)
        .prop_map(move |terms| Poly::from_terms(n, terms).unwrap())
}

/// `(n, p, m, x)` with `|m| ≤ 3` and `|x|∞ ≤ 0.5`.
pub fn fd_case() -> impl Strategy<Value = (usize, Poly, MultiIndex, Vec<f64>)> {
    (1usize..=3).prop_flat_map(|n| {
        (
            Just(n),
            poly(n, 4),
            exponents(n, 3),
            proptest::collection::vec(-0.5f64..=0.5, n),
        )
    })
}

pub fn roundtrip_case() -> impl Strategy<Value = (usize, Poly)> {
    (1usize..=4).prop_flat_map(|n| (Just(n), poly(n, 6)))
}

/// Nested central differences in each coordinate with one Richardson step.
///
/// For total degree ≤ 4 the `h²` term is the whole truncation error, so the
/// extrapolated value is exact up to rounding.
pub fn finite_difference(p: &Poly, m: &MultiIndex, x: &[f64], h: f64) -> f64 {
    fn nested(p: &Poly, m: &[u32], i: usize, x: &mut Vec<f64>, h: f64) -> f64 {
        if i == m.len() {
            return p.eval(x).unwrap();
        }
        let k = m[i] as i32;
        // k-th central difference: Σ_j (−1)^j C(k,j) f(x + (k/2 − j) h)
        let mut acc = 0.0;
        let mut binom = 1.0;
        for j in 0..=k {
            let save = x[i];
            x[i] = save + (f64::from(k) / 2.0 - f64::from(j)) * h;
            let v = nested(p, m, i + 1, x, h);
            x[i] = save;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * v;
            binom = binom * f64::from(k - j) / f64::from(j + 1);
        }
        acc / h.powi(k)
    }
    let d = |h: f64| nested(p, m.exponents(), 0, &mut x.to_vec(), h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

pub fn l1_norm(p: &Poly) -> f64 {
    use num_traits::ToPrimitive;
    p.terms().map(|(_, c)| c.to_f64().unwrap().abs()).sum()
}

pub fn check_finite_difference(n: usize, p: &Poly, m: &MultiIndex, x: &[f64]) -> Result<(), TestCaseError> {
    let _ = n;
    let d = p.partial(m).unwrap();
    let exact = d.eval(x).unwrap();
    let fd = finite_difference(p, m, x, 0.1);
    let tol = 1e-6 * (exact.abs() + l1_norm(&d) + 1e-3);
    prop_assert!((exact - fd).abs() <= tol, "m={m} x={x:?} exact={exact} fd={fd}");
    Ok(())
}

pub fn check_roundtrip(n: usize, p: &Poly) -> Result<(), TestCaseError> {
    let text = p.to_string();
    let back = parse_poly(&text, n).map_err(|e| TestCaseError::fail(format!("{text:?}: {e}")))?;
    prop_assert_eq!(&back, p, "text {}", text);
    Ok(())
}
