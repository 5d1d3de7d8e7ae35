//! Randomized SVD (HMT) with a constant Gaussian `Ω`: per matrix, over a
//! parameter grid, and as an offline/online split for affine models.

use rayon::prelude::*;

use crate::error::{dim_err, Error, Result};
use crate::linalg::{pseudoinverse, qr_economy, qr_full_q, singular_values, split_svd, svd, DenseMatrix};
use crate::param::{AffineModel, ParamGrid, ParamMatrixModel};
use crate::sketch::{LowRankApprox, SketchPack};

/// Full-row-rank test for `V₁ᵀΩ`: `σ_min > FULL_RANK_RATIO · σ_max`.
pub const FULL_RANK_RATIO: f64 = 1e-10;

/// Target rank `r`, oversampling `p` and the seed/stream that determine `Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SketchConfig {
    pub rank: usize,
    pub oversampling: usize,
    pub seed: u64,
    pub stream: u64,
}

impl SketchConfig {
    /// Requires `r ≥ 2` and `p ≥ 2`.
    pub fn new(rank: usize, oversampling: usize, seed: u64) -> Result<Self> {
        if rank < 2 || oversampling < 2 {
            return Err(Error::Hypothesis(format!(
                "HMT needs rank r >= 2 and oversampling p >= 2, got r = {rank}, p = {oversampling}"
            )));
        }
        Ok(Self {
            rank,
            oversampling,
            seed,
            stream: 0,
        })
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    /// `s = r + p`.
    pub fn sketch_size(&self) -> usize {
        self.rank + self.oversampling
    }

    /// Checks `r + p ≤ min(m, n)`.
    pub fn check_dims(&self, m: usize, n: usize) -> Result<()> {
        let s = self.sketch_size();
        if s > m.min(n) {
            return Err(dim_err(
                "SketchConfig",
                format!("sketch size r + p = {s} exceeds min(m, n) = {}", m.min(n)),
            ));
        }
        Ok(())
    }

    pub fn pack(&self, n: usize) -> SketchPack {
        SketchPack::hmt(n, self.sketch_size(), self.seed, self.stream)
    }
}

/// HMT with a given `Ω`: `Q` from the economy QR of `BΩ`, `W = BᵀQ`.
pub fn hmt_with_omega(b: &DenseMatrix, omega: &DenseMatrix) -> Result<LowRankApprox> {
    let (m, n) = b.dims();
    if omega.rows() != n {
        return Err(dim_err(
            "hmt_with_omega",
            format!("B is {m}x{n} but Omega has {} rows", omega.rows()),
        ));
    }
    if omega.cols() > m {
        return Err(dim_err(
            "hmt_with_omega",
            format!("sketch size {} exceeds m = {m}", omega.cols()),
        ));
    }
    let q = qr_economy(&b.matmul(omega))?.q;
    let w = b.t_matmul(&q);
    Ok(LowRankApprox::orthogonal(q, w))
}

/// HMT on a single matrix with `Ω` drawn from `cfg`.
pub fn hmt_fixed(b: &DenseMatrix, cfg: &SketchConfig) -> Result<LowRankApprox> {
    let (m, n) = b.dims();
    cfg.check_dims(m, n)?;
    hmt_with_omega(b, &cfg.pack(n).omega)
}

/// Applies [`hmt_with_omega`] at every snapshot with the same `Ω`, in
/// parallel, results in snapshot order.
pub fn hmt_on_snapshots(snapshots: &[DenseMatrix], omega: &DenseMatrix) -> Result<Vec<LowRankApprox>> {
    snapshots.par_iter().map(|a| hmt_with_omega(a, omega)).collect()
}

/// `P_{A(t)Ω} A(t)` at every grid point, with one `Ω` for all points.
pub fn hmt_param_direct(
    model: &dyn ParamMatrixModel,
    grid: &ParamGrid,
    cfg: &SketchConfig,
) -> Result<Vec<LowRankApprox>> {
    let (m, n) = model.dims();
    cfg.check_dims(m, n)?;
    let snaps = model.eval_grid(grid)?;
    hmt_on_snapshots(&snaps, &cfg.pack(n).omega)
}

/// As [`hmt_param_direct`], but evaluates `A(t_j)` one point at a time
/// instead of holding every snapshot, for models too large to materialize.
pub fn hmt_param_streamed(
    model: &dyn ParamMatrixModel,
    grid: &ParamGrid,
    cfg: &SketchConfig,
) -> Result<Vec<LowRankApprox>> {
    let (m, n) = model.dims();
    cfg.check_dims(m, n)?;
    let omega = cfg.pack(n).omega;
    grid.points()
        .par_iter()
        .map(|&t| hmt_with_omega(&model.eval(t)?, &omega))
        .collect()
}

/// Offline data for an affine model `A(t) = Σ φ_i(t) A_i`.
#[derive(Clone, Debug)]
pub struct HmtOfflineData {
    /// m×ks orthonormal basis of `[A_1Ω … A_kΩ]`.
    pub q: DenseMatrix,
    /// `Y_i = QᵀA_iΩ`, each ks×s.
    pub y: Vec<DenseMatrix>,
    /// `Z_i = A_iᵀQ`, each n×ks.
    pub z: Vec<DenseMatrix>,
    pub omega: DenseMatrix,
}

impl HmtOfflineData {
    pub fn k(&self) -> usize {
        self.y.len()
    }

    pub fn sketch_size(&self) -> usize {
        self.omega.cols()
    }
}

/// Offline phase with `Ω` drawn from `cfg`. Requires `k(r + p) ≤ m`.
pub fn hmt_offline(model: &AffineModel, cfg: &SketchConfig) -> Result<HmtOfflineData> {
    let (m, n) = model.dims();
    cfg.check_dims(m, n)?;
    hmt_offline_with_omega(model, cfg.pack(n).omega)
}

pub fn hmt_offline_with_omega(model: &AffineModel, omega: DenseMatrix) -> Result<HmtOfflineData> {
    let (m, n) = model.dims();
    let k = model.k();
    let s = omega.cols();
    if omega.rows() != n {
        return Err(dim_err(
            "hmt_offline",
            format!("Omega has {} rows, model has n = {n}", omega.rows()),
        ));
    }
    if k * s > m {
        return Err(dim_err(
            "hmt_offline",
            format!("k(r + p) = {k}*{s} = {} exceeds m = {m}", k * s),
        ));
    }
    let xs: Vec<DenseMatrix> = model.matrices().par_iter().map(|a| a.matmul(&omega)).collect();
    let refs: Vec<&DenseMatrix> = xs.iter().collect();
    let q = qr_economy(&DenseMatrix::hcat(&refs)?)?.q;
    let y = xs.par_iter().map(|x| q.t_matmul(x)).collect();
    let z = model.matrices().par_iter().map(|a| a.t_matmul(&q)).collect();
    Ok(HmtOfflineData { q, y, z, omega })
}

/// Online phase at one parameter, given `(φ_1(t), …, φ_k(t))`.
pub fn hmt_online_point(data: &HmtOfflineData, phi: &[f64]) -> Result<LowRankApprox> {
    if phi.len() != data.k() {
        return Err(dim_err(
            "hmt_online",
            format!("{} coefficients for {} terms", phi.len(), data.k()),
        ));
    }
    let small = DenseMatrix::linear_combination(phi, &data.y)?;
    let qt = qr_economy(&small)?.q;
    let zsum = DenseMatrix::linear_combination(phi, &data.z)?;
    let w = zsum.matmul(&qt);
    let q = data.q.matmul(&qt);
    Ok(LowRankApprox::orthogonal(q, w))
}

/// Online phase over a grid; `phis[j]` holds the coefficients at `grid[j]`.
pub fn hmt_online(data: &HmtOfflineData, phis: &[Vec<f64>], grid: &ParamGrid) -> Result<Vec<LowRankApprox>> {
    if phis.len() != grid.len() {
        return Err(dim_err(
            "hmt_online",
            format!("{} coefficient rows for {} grid points", phis.len(), grid.len()),
        ));
    }
    phis.par_iter().map(|phi| hmt_online_point(data, phi)).collect()
}

/// Orthonormal basis for `range(x)`, with the same rank cutoff as
/// [`pseudoinverse`]. Unlike a QR basis it has exactly `rank(x)` columns.
pub fn range_basis(x: &DenseMatrix) -> Result<DenseMatrix> {
    let f = svd(x)?;
    let smax = f.sigma.first().copied().unwrap_or(0.0);
    let cutoff = x.rows().max(x.cols()) as f64 * f64::EPSILON * smax;
    let rank = f.sigma.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    Ok(f.u.columns(0, rank))
}

/// `(I − P_X) B` with the exact orthogonal projector onto `range(X)`.
pub fn projection_residual(x: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if x.rows() != b.rows() {
        return Err(dim_err(
            "projection_residual",
            format!("X has {} rows, B has {}", x.rows(), b.rows()),
        ));
    }
    let u = range_basis(x)?;
    Ok(b.sub(&u.matmul(&u.t_matmul(b))))
}

/// Orthogonal projector `X X†` onto `range(X)`.
pub fn projector(x: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(x.matmul(&pseudoinverse(x)?))
}

/// `σ_min(M) > FULL_RANK_RATIO · max(σ_max(M), scale)`. The extra `scale`
/// (the norm of the factor that produced `M`) catches products that vanish
/// up to roundoff, whose noise can look well conditioned on its own.
pub(crate) fn numerically_full_rank(mat: &DenseMatrix, scale: f64) -> Result<bool> {
    let s = singular_values(mat)?;
    let (Some(&hi), Some(&lo)) = (s.first(), s.last()) else {
        return Ok(false);
    };
    Ok(lo > FULL_RANK_RATIO * hi.max(scale))
}

fn check_full_row_rank(v1t_omega: &DenseMatrix, omega: &DenseMatrix) -> Result<()> {
    if v1t_omega.rows() > v1t_omega.cols() || !numerically_full_rank(v1t_omega, omega.frobenius_norm())? {
        return Err(Error::Precondition("V1^T Omega does not have full row rank".into()));
    }
    Ok(())
}

struct Structural {
    /// `‖Σ₂‖_F² + ‖Σ₂V₂ᵀΩ(V₁ᵀΩ)†‖_F²`.
    sq: f64,
    /// `V₂V₂ᵀΩ(V₁ᵀΩ)†`, with `V₂` completed to all of `range(V₁)^⊥`.
    v2_term: DenseMatrix,
}

fn structural_terms(b: &DenseMatrix, omega: &DenseMatrix, r: usize) -> Result<Structural> {
    let (m, n) = b.dims();
    if omega.rows() != n {
        return Err(dim_err(
            "structural bound",
            format!("B is {m}x{n} but Omega has {} rows", omega.rows()),
        ));
    }
    let f = svd(b)?;
    let split = split_svd(&f, r)?;
    let v1t_omega = split.v1.t_matmul(omega);
    check_full_row_rank(&v1t_omega, omega)?;
    let pinv = pseudoinverse(&v1t_omega)?;

    // Σ₂V₂ᵀΩ(V₁ᵀΩ)† only sees the thin V₂; the completion carries σ = 0.
    let mut s2v2t_omega = split.v2.t_matmul(omega);
    for (i, s) in split.sigma2.iter().enumerate() {
        for j in 0..s2v2t_omega.cols() {
            s2v2t_omega[(i, j)] *= s;
        }
    }
    let tail: f64 = split.sigma2.iter().map(|s| s * s).sum();
    let sq = tail + s2v2t_omega.matmul(&pinv).frobenius_norm_sq();

    let v2_full = qr_full_q(&split.v1)?.columns(r, n);
    let v2_term = v2_full.matmul(&v2_full.t_matmul(omega)).matmul(&pinv);
    Ok(Structural { sq, v2_term })
}

/// Both sides of the deterministic HMT bound
/// `‖(I − P_{BΩ})B‖_F² ≤ ‖Σ₂‖_F² + ‖Σ₂V₂ᵀΩ(V₁ᵀΩ)†‖_F²`.
///
/// Fails with [`Error::Precondition`] unless `V₁ᵀΩ` has numerically full row
/// rank.
pub fn structural_bound_gap(b: &DenseMatrix, omega: &DenseMatrix, r: usize) -> Result<(f64, f64)> {
    let terms = structural_terms(b, omega, r)?;
    let lhs = projection_residual(&b.matmul(omega), b)?.frobenius_norm_sq();
    Ok((lhs, terms.sq))
}

/// Both sides of the perturbed-projection bound
/// `‖(I − P_{(B+E)Ω})B‖_F ≤ √(‖Σ₂‖_F² + ‖Σ₂V₂ᵀΩ(V₁ᵀΩ)†‖_F²) + ‖EV₂V₂ᵀΩ(V₁ᵀΩ)†‖_F + ‖E‖_F`.
pub fn perturbed_bound_gap(b: &DenseMatrix, e: &DenseMatrix, omega: &DenseMatrix, r: usize) -> Result<(f64, f64)> {
    if e.dims() != b.dims() {
        return Err(dim_err(
            "perturbed_bound_gap",
            format!("B is {:?} but E is {:?}", b.dims(), e.dims()),
        ));
    }
    let terms = structural_terms(b, omega, r)?;
    let lhs = projection_residual(&b.add(e).matmul(omega), b)?.frobenius_norm();
    let rhs = terms.sq.sqrt() + e.matmul(&terms.v2_term).frobenius_norm() + e.frobenius_norm();
    Ok((lhs, rhs))
}

/// `f(t, Y) = ‖(I − P_{A(t)Y})A(t)‖_F²` for
/// `A(t) = [[1,0,0],[0,t,1],[0,0,0]]`, `Y = [[1,0],[0,1],[0,0]]`, at
/// `t ∈ {−1, −0.5, 0, 0.5, 1}`. The value jumps from 0 to 1 at `t = 0`.
pub fn hmt_discontinuity_case() -> Vec<(f64, f64)> {
    let y = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).expect("finite");
    [-1.0, -0.5, 0.0, 0.5, 1.0]
        .into_iter()
        .map(|t| {
            let a = DenseMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, t, 1.0], [0.0, 0.0, 0.0]]).expect("finite");
            let x = a.matmul(&y);
            let p = projector(&x).expect("3x2 matrices always factor");
            (t, a.sub(&p.matmul(&a)).frobenius_norm_sq())
        })
        .collect()
}
