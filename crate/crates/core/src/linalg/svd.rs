use super::dense::dot;
use super::DenseMatrix;
use crate::error::{Error, Result};

/// Thin SVD `A = U diag(sigma) Vᵀ`, with `k = min(m, n)` columns in `u` and
/// `v` and `sigma` sorted nonincreasing.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

/// Stop when every column pair satisfies |⟨a_i, a_j⟩| ≤ TOL·‖a_i‖‖a_j‖.
const JACOBI_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 30;

/// Orthogonalizes the columns of `work` in place by cyclic Jacobi rotations,
/// applying the same rotations to `v` when present. Returns the sweep count.
fn jacobi_sweeps(work: &mut DenseMatrix, mut v: Option<&mut DenseMatrix>) -> usize {
    let n = work.cols();
    let mut norms: Vec<f64> = (0..n).map(|j| dot(work.col(j), work.col(j))).collect();
    for sweep in 1..=MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let (ci, cj) = work.col_pair_mut(i, j);
                let gamma = dot(ci, cj);
                let alpha = norms[i];
                let beta = norms[j];
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(ci, cj, c, s);
                // Recompute rather than update so norms do not drift.
                norms[i] = dot(ci, ci);
                norms[j] = dot(cj, cj);
                if let Some(v) = v.as_deref_mut() {
                    let (vi, vj) = v.col_pair_mut(i, j);
                    rotate(vi, vj, c, s);
                }
            }
        }
        if !rotated {
            return sweep;
        }
    }
    log::warn!("one-sided Jacobi SVD stopped after {MAX_SWEEPS} sweeps without converging");
    MAX_SWEEPS
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

fn descending_order(sigma: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    order
}

/// Fills the (zero) columns of `u` listed in `zero_cols` with unit vectors
/// orthogonal to every other column.
fn complete_basis(u: &mut DenseMatrix, zero_cols: &[usize]) {
    let m = u.rows();
    let mut candidate = 0;
    for &jz in zero_cols {
        while candidate < m {
            let mut e = vec![0.0; m];
            e[candidate] = 1.0;
            candidate += 1;
            // Two passes of Gram–Schmidt against all other columns.
            for _ in 0..2 {
                for j in 0..u.cols() {
                    if j == jz {
                        continue;
                    }
                    let c = u.col(j);
                    let proj = dot(c, &e);
                    e.iter_mut().zip(c).for_each(|(x, y)| *x -= proj * y);
                }
            }
            let nrm = dot(&e, &e).sqrt();
            if nrm > 0.5 {
                u.col_mut(jz).iter_mut().zip(&e).for_each(|(dst, x)| *dst = x / nrm);
                break;
            }
        }
    }
}

fn svd_tall(a: &DenseMatrix) -> SvdFactors {
    let n = a.cols();
    let mut work = a.clone();
    let mut v = DenseMatrix::identity(n);
    jacobi_sweeps(&mut work, Some(&mut v));
    let raw: Vec<f64> = (0..n).map(|j| dot(work.col(j), work.col(j)).sqrt()).collect();
    let order = descending_order(&raw);
    let m = a.rows();
    let mut u = DenseMatrix::zeros(m, n);
    let mut v_sorted = DenseMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    let mut zero_cols = Vec::new();
    // Columns at roundoff level carry no reliable direction; their left
    // singular vectors are rebuilt by completion instead.
    let floor = m.max(n) as f64 * f64::EPSILON * order.first().map_or(0.0, |&i| raw[i]);
    for (dst, &src) in order.iter().enumerate() {
        let s = raw[src];
        sigma.push(s);
        v_sorted.col_mut(dst).copy_from_slice(v.col(src));
        if s > floor && s > 0.0 {
            u.col_mut(dst)
                .iter_mut()
                .zip(work.col(src))
                .for_each(|(x, w)| *x = w / s);
        } else {
            zero_cols.push(dst);
        }
    }
    complete_basis(&mut u, &zero_cols);
    SvdFactors { u, sigma, v: v_sorted }
}

/// Thin SVD by one-sided (Hestenes) Jacobi.
///
/// Wide matrices are handled through the transpose. Left singular vectors
/// belonging to exactly zero singular values are completed to an orthonormal
/// set.
pub fn svd(a: &DenseMatrix) -> Result<SvdFactors> {
    a.check_finite()?;
    if a.rows() >= a.cols() {
        Ok(svd_tall(a))
    } else {
        let f = svd_tall(&a.transpose());
        Ok(SvdFactors {
            u: f.v,
            sigma: f.sigma,
            v: f.u,
        })
    }
}

/// Singular values only, sorted nonincreasing (skips accumulating V).
pub fn singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    a.check_finite()?;
    let mut work = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
    jacobi_sweeps(&mut work, None);
    let mut sigma: Vec<f64> = (0..work.cols()).map(|j| dot(work.col(j), work.col(j)).sqrt()).collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    Ok(sigma)
}

/// Leading/trailing partition of an SVD at rank `r`.
#[derive(Clone, Debug)]
pub struct SvdSplit {
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
    /// n×r leading right singular vectors.
    pub v1: DenseMatrix,
    /// Trailing right singular vectors that carry `sigma2`.
    pub v2: DenseMatrix,
}

/// Splits `f` into the rank-`r` head and the tail. Requires `r < min(m, n)`.
pub fn split_svd(f: &SvdFactors, r: usize) -> Result<SvdSplit> {
    let k = f.sigma.len();
    if r >= k {
        return Err(Error::InvalidArgument(format!(
            "split rank {r} must be below min(m, n) = {k}"
        )));
    }
    Ok(SvdSplit {
        sigma1: f.sigma[..r].to_vec(),
        sigma2: f.sigma[r..].to_vec(),
        v1: f.v.columns(0, r),
        v2: f.v.columns(r, k),
    })
}

/// `Σ_{j>r} σ_j²` for a nonincreasing `sigma` (zero when `r ≥ len`).
pub fn tail_energy(sigma: &[f64], r: usize) -> f64 {
    sigma.iter().skip(r).map(|s| s * s).sum()
}

fn pinv_from_svd(f: &SvdFactors, keep: impl Fn(f64) -> bool) -> (DenseMatrix, usize) {
    let (m, n) = (f.u.rows(), f.v.rows());
    let mut vs = f.v.clone();
    let mut discarded = 0;
    for (j, &s) in f.sigma.iter().enumerate() {
        let inv = if keep(s) {
            1.0 / s
        } else {
            discarded += 1;
            0.0
        };
        vs.col_mut(j).iter_mut().for_each(|x| *x *= inv);
    }
    let out = vs.matmul_t(&f.u);
    debug_assert_eq!(out.dims(), (n, m));
    (out, discarded)
}

/// Moore–Penrose pseudoinverse via SVD; singular values at or below
/// `max(m, n) · ε_mach · σ_max` are treated as zero.
pub fn pseudoinverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let f = svd(a)?;
    let smax = f.sigma.first().copied().unwrap_or(0.0);
    let cutoff = a.rows().max(a.cols()) as f64 * f64::EPSILON * smax;
    Ok(pinv_from_svd(&f, |s| s > cutoff && s > 0.0).0)
}

/// ε-pseudoinverse `U₁ Σ₁⁻¹ V₁ᵀ`, where singular values below `epsilon` (an
/// absolute threshold) are discarded. Also returns the number discarded.
pub fn eps_pseudoinverse_counted(a: &DenseMatrix, epsilon: f64) -> Result<(DenseMatrix, usize)> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be nonnegative, got {epsilon}"
        )));
    }
    let f = svd(a)?;
    Ok(pinv_from_svd(&f, |s| s >= epsilon && s > 0.0))
}

pub fn eps_pseudoinverse(a: &DenseMatrix, epsilon: f64) -> Result<DenseMatrix> {
    Ok(eps_pseudoinverse_counted(a, epsilon)?.0)
}
