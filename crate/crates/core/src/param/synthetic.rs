use super::{ParamDomain, ParamMatrixModel};
use crate::error::{Error, Result};
use crate::linalg::{matrix_exponential, DenseMatrix, RngState};

/// `A(t) = exp(t W₁) · eᵗ D · exp(t W₂)` on `[0, 1]`, with
/// `D = diag(2⁻¹, …, 2⁻ⁿ)` and random skew-symmetric `W₁`, `W₂`.
///
/// Since both exponentials are orthogonal, the singular values of `A(t)` are
/// exactly `eᵗ 2⁻ʲ`.
#[derive(Clone, Debug)]
pub struct SyntheticModel {
    w1: DenseMatrix,
    w2: DenseMatrix,
    d: Vec<f64>,
    domain: ParamDomain,
}

/// Draws `W = (G - Gᵀ)/2` for Gaussian `G`, first `W₁` then `W₂`.
pub fn synthetic_model(n: usize, rng: &mut RngState) -> Result<SyntheticModel> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("synthetic model needs n >= 2, got {n}")));
    }
    let mut skew = || {
        let g = rng.gaussian_matrix(n, n);
        g.sub(&g.transpose()).scale(0.5)
    };
    let w1 = skew();
    let w2 = skew();
    let d = (1..=n).map(|j| 0.5f64.powi(j as i32)).collect();
    Ok(SyntheticModel {
        w1,
        w2,
        d,
        domain: ParamDomain::interval(0.0, 1.0)?,
    })
}

impl SyntheticModel {
    pub fn w1(&self) -> &DenseMatrix {
        &self.w1
    }

    pub fn w2(&self) -> &DenseMatrix {
        &self.w2
    }

    /// Exact singular values `eᵗ 2⁻ʲ`, j = 1..n.
    pub fn exact_singular_values(&self, t: f64) -> Vec<f64> {
        self.d.iter().map(|d| t.exp() * d).collect()
    }
}

impl ParamMatrixModel for SyntheticModel {
    fn dims(&self) -> (usize, usize) {
        (self.d.len(), self.d.len())
    }

    fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    fn eval(&self, t: f64) -> Result<DenseMatrix> {
        self.domain.check(t)?;
        let mut left = matrix_exponential(&self.w1.scale(t))?;
        let et = t.exp();
        for (j, d) in self.d.iter().enumerate() {
            let s = et * d;
            left.col_mut(j).iter_mut().for_each(|x| *x *= s);
        }
        let right = matrix_exponential(&self.w2.scale(t))?;
        Ok(left.matmul(&right))
    }
}
