//! Parameter-dependent matrices `A(t)`: the model capability, parameter
//! domains and grids, and the concrete models (affine, synthetic,
//! Schrödinger, snapshots).

mod affine;
pub mod expr;
mod schrodinger;
mod snapshot;
mod synthetic;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub use affine::{affine_eval, random_affine_model, AffineModel, Phi};
pub use schrodinger::{schrodinger_model, schrodinger_sigma, SchrodingerModel};
pub use snapshot::{snapshot_model, SnapshotModel};
pub use synthetic::{synthetic_model, SyntheticModel};

/// Box `[lower, upper] ⊂ ℝᵈ`. Every model in this crate is evaluated at
/// scalar parameters, so evaluation paths require `d = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParamDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidArgument(format!(
                "domain bounds must be nonempty and equally long ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u))
        {
            return Err(Error::InvalidArgument(format!(
                "domain requires finite lower <= upper, got {lower:?} / {upper:?}"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower], vec![upper])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// `(lower, upper)` of a one-dimensional domain.
    pub fn bounds(&self) -> Result<(f64, f64)> {
        if self.dim() != 1 {
            return Err(Error::InvalidArgument(format!(
                "expected a one-dimensional domain, got d = {}",
                self.dim()
            )));
        }
        Ok((self.lower[0], self.upper[0]))
    }

    pub fn length(&self) -> Result<f64> {
        let (lo, hi) = self.bounds()?;
        Ok(hi - lo)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.dim() == 1 && t >= self.lower[0] && t <= self.upper[0]
    }

    pub fn check(&self, t: f64) -> Result<()> {
        let (lower, upper) = self.bounds()?;
        if t >= lower && t <= upper {
            Ok(())
        } else {
            Err(Error::OutOfDomain { t, lower, upper })
        }
    }
}

/// Ordered evaluation points `t_1 < … < t_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamGrid {
    points: Vec<f64>,
}

impl ParamGrid {
    /// Validates that `points` is nonempty, strictly increasing and inside `domain`.
    pub fn new(points: Vec<f64>, domain: &ParamDomain) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("grid has no points".into()));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("grid points must be strictly increasing".into()));
        }
        for &t in &points {
            domain.check(t)?;
        }
        Ok(Self { points })
    }

    /// `q` equispaced points covering the interval, endpoints included.
    pub fn uniform(domain: &ParamDomain, q: usize) -> Result<Self> {
        if domain.dim() != 1 {
            return Err(Error::InvalidArgument(format!(
                "uniform grids are limited to intervals, got d = {}",
                domain.dim()
            )));
        }
        if q < 2 {
            return Err(Error::InvalidArgument(format!(
                "a uniform grid needs q >= 2 points, got {q}"
            )));
        }
        let (lo, hi) = domain.bounds()?;
        if lo == hi {
            return Err(Error::InvalidArgument(
                "cannot place distinct grid points on a degenerate interval".into(),
            ));
        }
        let h = (hi - lo) / (q - 1) as f64;
        let mut points: Vec<f64> = (0..q).map(|i| lo + i as f64 * h).collect();
        points[q - 1] = hi;
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Composite trapezoid weights; they sum to `t_q - t_1`.
    pub fn trapezoid_weights(&self) -> Result<Vec<f64>> {
        let q = self.points.len();
        if q < 2 {
            return Err(Error::InvalidArgument(
                "trapezoid rule needs at least two grid points".into(),
            ));
        }
        let mut w = vec![0.0; q];
        for (j, pair) in self.points.windows(2).enumerate() {
            let h = 0.5 * (pair[1] - pair[0]);
            w[j] += h;
            w[j + 1] += h;
        }
        Ok(w)
    }

    /// Composite trapezoid approximation of `∫ f` from samples on the grid.
    pub fn trapezoid(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.points.len() {
            return Err(crate::error::dim_err(
                "trapezoid",
                format!("{} values for {} grid points", values.len(), self.points.len()),
            ));
        }
        Ok(self.trapezoid_weights()?.iter().zip(values).map(|(w, v)| w * v).sum())
    }
}

/// `uniform_grid` as a free function.
pub fn uniform_grid(domain: &ParamDomain, q: usize) -> Result<ParamGrid> {
    ParamGrid::uniform(domain, q)
}

/// A matrix-valued function `t ↦ A(t)` of constant shape over a domain.
pub trait ParamMatrixModel: Send + Sync {
    fn dims(&self) -> (usize, usize);

    fn domain(&self) -> &ParamDomain;

    fn eval(&self, t: f64) -> Result<DenseMatrix>;

    /// Evaluates at every grid point, in grid order.
    fn eval_grid(&self, grid: &ParamGrid) -> Result<Vec<DenseMatrix>> {
        grid.points().par_iter().map(|&t| self.eval(t)).collect()
    }

    /// The affine structure `A(t) = Σ φ_i(t) A_i`, when the model has one.
    fn affine(&self) -> Option<&AffineModel> {
        None
    }
}
