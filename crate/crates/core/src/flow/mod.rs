//! The homotopy construction of the equivalence diffeomorphism.
//!
//! Along `F(ξ, x) = f(x) + ξ(g − f)(x)` the field
//! `X = (g − f)/|∇F|² · ∇F` (zero on `Z = {∇f = 0}`) is rescaled to
//! `W = (X₂, …, X_{n+1}) / (X₁ − 1)`. Solutions of `dy/dt = W(t, y)` keep
//! `F(t, y(t))` constant, so the time-one map `φ` satisfies `f = g ∘ φ`.

mod diffeo;
mod homotopy;
mod integrator;
mod singular;

pub use diffeo::{
    conservation_check, diffeo_forward, diffeo_inverse, displacement_profile, integrate_trajectory,
    numeric_jacobian, round_trip, verify_equivalence, DiffeoMap, Direction, DisplacementProfile,
    EquivalenceReport, PointCheck, RoundTripReport, Trajectory, DISPLACEMENT_NOISE,
};
pub use homotopy::{HomotopySystem, DEFAULT_DELTA};
pub use integrator::IntegratorSettings;
pub use singular::{GridRefinement, SingularSetApprox};

use thiserror::Error;

use crate::condition::ConditionError;
use crate::germ::GermError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Sampling(#[from] ConditionError),
    #[error("gradient of f does not vanish at the origin")]
    NotCritical,
    #[error("delta must exceed 2, got {0}")]
    InvalidDelta(f64),
    #[error("xi = {xi} outside (-{delta}, {delta})")]
    OutOfDomain { xi: f64, delta: f64 },
    #[error("|grad F| vanishes at x = {x:?}, xi = {xi} while grad f does not; hypothesis violated")]
    InconsistentSingularity { x: Vec<f64>, xi: f64 },
    #[error("|X1 - 1| <= 1/2 at x = {x:?}, xi = {xi} (X1 = {x1}); shrink radius_max")]
    DomainTooLarge { x: Vec<f64>, xi: f64, x1: f64 },
    #[error("invalid integrator settings: {0}")]
    InvalidSettings(String),
    #[error("exceeded {0} integration steps")]
    MaxStepsExceeded(usize),
    #[error("step size {h} fell below h_min at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("trajectory reached the singular set at t = {t}, y = {y:?}")]
    EnteredSingularSet { t: f64, y: Vec<f64> },
    #[error("finite-difference step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("singular set approximation is empty")]
    EmptySingularSet,
}
