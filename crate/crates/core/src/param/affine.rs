use std::fmt;
use std::sync::Arc;

use super::expr::Expr;
use super::{ParamDomain, ParamMatrixModel};
use crate::error::{dim_err, Error, Result};
use crate::linalg::{DenseMatrix, RngState};

/// Scalar coefficient function `φ(t)` with a printable label.
#[derive(Clone)]
pub struct Phi {
    label: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Phi {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c:?}"), move |_| c)
    }

    /// `φ(t) = t^power`.
    pub fn monomial(power: i32) -> Self {
        Self::new(format!("t^{power}"), move |t| t.powi(power))
    }

    /// Parses an expression in `t`; see [`super::expr`].
    pub fn parse(src: &str) -> Result<Self> {
        let e = Expr::parse(src)?;
        Ok(Self::new(src.trim(), move |t| e.eval(t)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

impl fmt::Debug for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phi({})", self.label)
    }
}

/// `A(t) = Σ_{i=1}^k φ_i(t) A_i` with constant `A_i` of equal shape.
#[derive(Clone, Debug)]
pub struct AffineModel {
    domain: ParamDomain,
    phis: Vec<Phi>,
    matrices: Vec<DenseMatrix>,
    dims: (usize, usize),
}

impl AffineModel {
    pub fn new(domain: ParamDomain, terms: Vec<(Phi, DenseMatrix)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::InvalidArgument("an affine model needs at least one term".into()));
        };
        let dims = first.dims();
        for (i, (_, a)) in terms.iter().enumerate() {
            if a.dims() != dims {
                return Err(dim_err(
                    "AffineModel::new",
                    format!("term {i} is {:?}, expected {:?}", a.dims(), dims),
                ));
            }
            a.check_finite()?;
        }
        let (phis, matrices) = terms.into_iter().unzip();
        Ok(Self {
            domain,
            phis,
            matrices,
            dims,
        })
    }

    /// Number of terms `k`.
    pub fn k(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[DenseMatrix] {
        &self.matrices
    }

    pub fn phis(&self) -> &[Phi] {
        &self.phis
    }

    /// `(φ_1(t), …, φ_k(t))`.
    pub fn phi_values(&self, t: f64) -> Vec<f64> {
        self.phis.iter().map(|p| p.eval(t)).collect()
    }

    /// Coefficient vectors for every grid point.
    pub fn phi_table(&self, points: &[f64]) -> Vec<Vec<f64>> {
        points.iter().map(|&t| self.phi_values(t)).collect()
    }
}

impl ParamMatrixModel for AffineModel {
    fn dims(&self) -> (usize, usize) {
        self.dims
    }

    fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    fn eval(&self, t: f64) -> Result<DenseMatrix> {
        affine_eval(self, t)
    }

    fn affine(&self) -> Option<&AffineModel> {
        Some(self)
    }
}

/// Evaluates `Σ φ_i(t) A_i`; `t` must lie in the model's domain.
pub fn affine_eval(model: &AffineModel, t: f64) -> Result<DenseMatrix> {
    model.domain.check(t)?;
    DenseMatrix::linear_combination(&model.phi_values(t), &model.matrices)
}

/// Random affine model on `[0, 1]` with `φ_i(t) = t^{i-1}` and Gaussian
/// `A_i`. With `decay = Some(ρ)`, column `j` of every `A_i` is scaled by
/// `ρ^j`, which gives quickly decaying singular values.
pub fn random_affine_model(
    k: usize,
    m: usize,
    n: usize,
    decay: Option<f64>,
    rng: &mut RngState,
) -> Result<AffineModel> {
    if k == 0 || m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "random affine model needs k, m, n >= 1, got {k}, {m}, {n}"
        )));
    }
    let domain = ParamDomain::interval(0.0, 1.0)?;
    let terms = (0..k)
        .map(|i| {
            let mut a = rng.gaussian_matrix(m, n);
            if let Some(rho) = decay {
                for j in 0..n {
                    let s = rho.powi(j as i32);
                    a.col_mut(j).iter_mut().for_each(|x| *x *= s);
                }
            }
            (Phi::monomial(i as i32), a)
        })
        .collect();
    AffineModel::new(domain, terms)
}
