//! Types shared by both sketching methods.

use crate::error::{dim_err, Result};
use crate::linalg::{gemm, DenseMatrix, Op, RngState};

/// `A ≈ Q Wᵀ` with `Q` m×s and `W` n×s.
///
/// HMT produces an orthonormal `Q`. Generalized Nyström produces
/// `Q = X R̃†_ε`, which is not orthonormal; `orthonormal` records which one
/// this is so metrics never assume it.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankApprox {
    pub q: DenseMatrix,
    pub w: DenseMatrix,
    pub orthonormal: bool,
    /// Singular values dropped by the ε-pseudoinverse (always 0 for HMT).
    pub discarded: usize,
}

impl LowRankApprox {
    pub fn orthogonal(q: DenseMatrix, w: DenseMatrix) -> Self {
        debug_assert_eq!(q.cols(), w.cols());
        Self {
            q,
            w,
            orthonormal: true,
            discarded: 0,
        }
    }

    pub fn oblique(q: DenseMatrix, w: DenseMatrix, discarded: usize) -> Self {
        debug_assert_eq!(q.cols(), w.cols());
        Self {
            q,
            w,
            orthonormal: false,
            discarded,
        }
    }

    /// Number of columns in the factors (an upper bound on the rank).
    pub fn rank(&self) -> usize {
        self.q.cols()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.q.rows(), self.w.rows())
    }

    /// `Q Wᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.q.matmul_t(&self.w)
    }

    /// `‖A − Q Wᵀ‖_F²`.
    pub fn error_fro_sq(&self, a: &DenseMatrix) -> Result<f64> {
        if a.dims() != self.dims() {
            return Err(dim_err(
                "LowRankApprox::error_fro",
                format!("matrix is {:?}, approximation is {:?}", a.dims(), self.dims()),
            ));
        }
        let mut diff = a.clone();
        gemm(-1.0, &self.q, Op::N, &self.w, Op::T, 1.0, &mut diff);
        Ok(diff.frobenius_norm_sq())
    }

    /// `‖A − Q Wᵀ‖_F`.
    pub fn error_fro(&self, a: &DenseMatrix) -> Result<f64> {
        Ok(self.error_fro_sq(a)?.sqrt())
    }

    /// `‖QᵀQ − I‖_F`.
    pub fn orthonormality_defect(&self) -> f64 {
        self.q
            .t_matmul(&self.q)
            .sub(&DenseMatrix::identity(self.q.cols()))
            .frobenius_norm()
    }
}

/// Constant dimension reduction matrices: `Ω` (n×s) and, for generalized
/// Nyström, `Ψ` (m×(s+ℓ)).
#[derive(Clone, Debug, PartialEq)]
pub struct SketchPack {
    pub omega: DenseMatrix,
    pub psi: Option<DenseMatrix>,
    pub seed: u64,
    pub stream: u64,
}

/// `Ψ` comes from a seed derived from the `Ω` seed, so that both families are
/// column-nested across sketch sizes.
const PSI_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

impl SketchPack {
    /// Draws `Ω ∈ ℝ^{n×s}`. Its first `s'` columns equal the draw for any
    /// smaller `s'` with the same seed and stream.
    pub fn hmt(n: usize, s: usize, seed: u64, stream: u64) -> Self {
        Self {
            omega: RngState::new(seed, stream).gaussian_matrix(n, s),
            psi: None,
            seed,
            stream,
        }
    }

    /// Draws `Ω ∈ ℝ^{n×s}` and `Ψ ∈ ℝ^{m×(s+ℓ)}`.
    pub fn gn(m: usize, n: usize, s: usize, l: usize, seed: u64, stream: u64) -> Self {
        let psi = RngState::new(seed.wrapping_add(PSI_SEED_OFFSET), stream).gaussian_matrix(m, s + l);
        Self {
            psi: Some(psi),
            ..Self::hmt(n, s, seed, stream)
        }
    }

    /// Sketch size `s`.
    pub fn size(&self) -> usize {
        self.omega.cols()
    }
}
