use serde::{Deserialize, Serialize};

use crate::germ::{CompiledPoly, Poly, PolyGerm};

/// Points of `Z` found by scanning a grid for small `|∇f|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRefinement {
    pub pitch: f64,
    pub points: Vec<Vec<f64>>,
}

/// Finite approximation of the critical set `Z = {∇f = 0}`.
///
/// Distances to it over-estimate `dist(x, Z)` by at most the grid pitch
/// (zero when `Z` is exactly the declared points).
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSetApprox {
    dim: usize,
    known_points: Vec<Vec<f64>>,
    refinement: Option<GridRefinement>,
}

impl SingularSetApprox {
    /// `Z ⊇ {0}`, exact for germs with an isolated critical point.
    pub fn origin(dim: usize) -> Self {
        Self::from_points(dim, vec![vec![0.0; dim]])
    }

    pub fn from_points(dim: usize, known_points: Vec<Vec<f64>>) -> Self {
        SingularSetApprox {
            dim,
            known_points,
            refinement: None,
        }
    }

    /// Adds every node of the cube grid `[-radius, radius]ⁿ` with the given
    /// pitch at which `|∇f| < threshold`.
    pub fn refine_grid(mut self, f: &PolyGerm, radius: f64, pitch: f64, threshold: f64) -> Self {
        assert!(pitch > 0.0 && radius > 0.0);
        let grad: Vec<CompiledPoly> = f.gradient().iter().map(Poly::compile).collect();
        let steps = (radius / pitch).floor() as i64;
        let side = (2 * steps + 1) as usize;
        let total = side.pow(self.dim as u32);
        let mut points = Vec::new();
        let mut x = vec![0.0; self.dim];
        for mut idx in 0..total {
            for xi in x.iter_mut() {
                *xi = ((idx % side) as i64 - steps) as f64 * pitch;
                idx /= side;
            }
            let gn = grad.iter().map(|p| p.eval(&x).powi(2)).sum::<f64>().sqrt();
            if gn < threshold {
                points.push(x.clone());
            }
        }
        self.refinement = Some(GridRefinement { pitch, points });
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn known_points(&self) -> &[Vec<f64>] {
        &self.known_points
    }

    pub fn refinement(&self) -> Option<&GridRefinement> {
        self.refinement.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.known_points.is_empty() && self.refinement.as_ref().is_none_or(|r| r.points.is_empty())
    }

    /// Exact membership among the declared points.
    pub fn is_known_point(&self, x: &[f64]) -> bool {
        self.known_points.iter().any(|z| z.as_slice() == x)
    }

    /// Euclidean distance to the nearest point; `None` when empty.
    pub fn distance(&self, x: &[f64]) -> Option<f64> {
        let grid = self.refinement.iter().flat_map(|r| r.points.iter());
        self.known_points
            .iter()
            .chain(grid)
            .map(|z| z.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .reduce(f64::min)
    }
}
