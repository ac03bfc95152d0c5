//! Right equivalence of polynomial function germs.
//!
//! Given germs `f, g: (ℝⁿ,0) → (ℝ,0)` with `∇f(0) = 0`, the crate
//!
//! * samples the hypothesis `|∂ᵐ(g−f)| ≤ C|∇f|^{r+2−|m|}` ([`condition`]),
//! * builds the diffeomorphism `φ` with `f = g ∘ φ` by integrating the
//!   homotopy vector field ([`flow`]),
//! * generates pairs with `g − f` in a power of the Jacobi ideal of `f`
//!   ([`jacobi`]),
//! * and estimates Łojasiewicz gradient exponents for comparison.
//!
//! ```
//! use germ_equiv::germ::parse;
//! use germ_equiv::flow::{diffeo_forward, DiffeoMap, HomotopySystem};
//!
//! let f = parse("x1^2", 1).unwrap();
//! let g = parse("x1^2 + 1/4*x1^3", 1).unwrap();
//! let map = DiffeoMap::new(HomotopySystem::new(f.clone(), g.clone(), 1).unwrap());
//! let y = diffeo_forward(&map, &[0.1]).unwrap();
//! assert!((g.eval(&y).unwrap() - f.eval(&[0.1]).unwrap()).abs() < 1e-10);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod condition;
pub mod flow;
pub mod germ;
pub mod jacobi;

mod fit;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/germs.md")]
    mod germs {}
    #[doc = include_str!("../../../book/src/conditions.md")]
    mod conditions {}
    #[doc = include_str!("../../../book/src/flow.md")]
    mod flow {}
    #[doc = include_str!("../../../book/src/lojasiewicz.md")]
    mod lojasiewicz {}
    #[doc = include_str!("../../../book/src/jacobi.md")]
    mod jacobi {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
