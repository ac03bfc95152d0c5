use crate::germ::{CompiledPoly, GermError, Poly, PolyGerm};

use super::FlowError;

/// Default half-width of the `ξ`-interval; anything above 2 keeps `[0, 1]` inside.
pub const DEFAULT_DELTA: f64 = 3.0;

/// The homotopy `F(ξ, x) = f(x) + ξ·(g − f)(x)` and the vector fields built from it.
///
/// Gradients are differentiated once, exactly, at construction; every field
/// evaluation afterwards is plain floating-point polynomial evaluation.
#[derive(Clone, Debug)]
pub struct HomotopySystem {
    f: PolyGerm,
    g: PolyGerm,
    d: Poly,
    r: u32,
    delta: f64,
    eps_z: f64,
    f_c: CompiledPoly,
    g_c: CompiledPoly,
    d_c: CompiledPoly,
    grad_f: Vec<CompiledPoly>,
    grad_d: Vec<CompiledPoly>,
}

impl HomotopySystem {
    /// `eps_Z` defaults to `1e-12·(1 + B)` with `B` a bound on `|∇f|` over the unit ball.
    pub fn new(f: PolyGerm, g: PolyGerm, r: u32) -> Result<Self, FlowError> {
        if f.dim() != g.dim() {
            return Err(GermError::DimensionMismatch {
                expected: f.dim(),
                found: g.dim(),
            }
            .into());
        }
        if !f.is_critical_at_origin() {
            return Err(FlowError::NotCritical);
        }
        let d = g.as_poly() - f.as_poly();
        let eps_z = default_eps_z(&f, 1.0);
        Ok(HomotopySystem {
            f_c: f.compile(),
            g_c: g.compile(),
            d_c: d.compile(),
            grad_f: f.gradient().iter().map(Poly::compile).collect(),
            grad_d: d.gradient().iter().map(Poly::compile).collect(),
            f,
            g,
            d,
            r,
            delta: DEFAULT_DELTA,
            eps_z,
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self, FlowError> {
        if !(delta > 2.0) {
            return Err(FlowError::InvalidDelta(delta));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn with_eps_z(mut self, eps_z: f64) -> Self {
        self.eps_z = eps_z;
        self
    }

    /// Rescales the default `eps_Z` to the gradient bound on a ball of this radius.
    pub fn with_domain_radius(mut self, radius: f64) -> Self {
        self.eps_z = default_eps_z(&self.f, radius);
        self
    }

    pub fn f(&self) -> &PolyGerm {
        &self.f
    }

    pub fn g(&self) -> &PolyGerm {
        &self.g
    }

    /// `g − f`.
    pub fn difference(&self) -> &Poly {
        &self.d
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eps_z(&self) -> f64 {
        self.eps_z
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    /// True when `g = f`; the flow is then the identity.
    pub fn is_trivial(&self) -> bool {
        self.d.is_zero()
    }

    fn check(&self, xi: f64, x: &[f64]) -> Result<(), FlowError> {
        if x.len() != self.dim() {
            return Err(GermError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            }
            .into());
        }
        if !(xi.abs() < self.delta) {
            return Err(FlowError::OutOfDomain { xi, delta: self.delta });
        }
        Ok(())
    }

    pub(crate) fn eval_f(&self, x: &[f64]) -> f64 {
        self.f_c.eval(x)
    }

    pub(crate) fn eval_g(&self, x: &[f64]) -> f64 {
        self.g_c.eval(x)
    }

    pub(crate) fn grad_f_norm(&self, x: &[f64]) -> f64 {
        self.grad_f.iter().map(|p| p.eval(x).powi(2)).sum::<f64>().sqrt()
    }

    /// `F(ξ, x)`; equal to `f(x)` and `g(x)` bit for bit at `ξ = 0` and `ξ = 1`.
    pub fn homotopy_value(&self, xi: f64, x: &[f64]) -> Result<f64, FlowError> {
        self.check(xi, x)?;
        Ok(if xi == 0.0 {
            self.f_c.eval(x)
        } else if xi == 1.0 {
            self.g_c.eval(x)
        } else {
            self.f_c.eval(x) + xi * self.d_c.eval(x)
        })
    }

    /// `∇F(ξ, x) = ((g−f)(x), ∇f(x) + ξ∇(g−f)(x))`, length `n + 1`.
    pub fn homotopy_gradient(&self, xi: f64, x: &[f64]) -> Result<Vec<f64>, FlowError> {
        self.check(xi, x)?;
        Ok(self.gradient_unchecked(xi, x))
    }

    fn gradient_unchecked(&self, xi: f64, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim() + 1);
        out.push(self.d_c.eval(x));
        for (gf, gd) in self.grad_f.iter().zip(&self.grad_d) {
            out.push(gf.eval(x) + xi * gd.eval(x));
        }
        out
    }

    /// `X = (g−f)/|∇F|² · ∇F` off `Z`, zero on (numerical) `Z`.
    pub fn field_x(&self, xi: f64, x: &[f64]) -> Result<Vec<f64>, FlowError> {
        self.check(xi, x)?;
        let n1 = self.dim() + 1;
        if self.grad_f_norm(x) < self.eps_z {
            return Ok(vec![0.0; n1]);
        }
        let grad = self.gradient_unchecked(xi, x);
        let sq: f64 = grad.iter().map(|a| a * a).sum();
        if sq.sqrt() < self.eps_z {
            return Err(FlowError::InconsistentSingularity { x: x.to_vec(), xi });
        }
        let scale = grad[0] / sq;
        Ok(grad.into_iter().map(|a| scale * a).collect())
    }

    /// `W = (X₂, …, X_{n+1}) / (X₁ − 1)`.
    pub fn field_w(&self, xi: f64, x: &[f64]) -> Result<Vec<f64>, FlowError> {
        let xv = self.field_x(xi, x)?;
        let denom = xv[0] - 1.0;
        if denom.abs() <= 0.5 {
            return Err(FlowError::DomainTooLarge {
                x: x.to_vec(),
                xi,
                x1: xv[0],
            });
        }
        Ok(xv[1..].iter().map(|a| a / denom).collect())
    }
}

fn default_eps_z(f: &PolyGerm, radius: f64) -> f64 {
    1e-12 * (1.0 + f.gradient_bound(radius))
}
