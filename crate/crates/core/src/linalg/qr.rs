use super::dense::dot;
use super::DenseMatrix;
use crate::error::{dim_err, Result};

/// Economy QR factors `A = Q R` with `Q` (m×n) orthonormal and `R` (n×n)
/// upper triangular with a nonnegative diagonal.
#[derive(Clone, Debug)]
pub struct QrFactors {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

/// Householder reflectors for an m×n matrix, m ≥ n.
struct Householder {
    /// Reflector vectors below the diagonal (column j holds v_j in rows j..m,
    /// normalized so v_j[j] = 1); R in the upper triangle.
    packed: DenseMatrix,
    tau: Vec<f64>,
    /// +1/-1 per column so that diag(R) ≥ 0 after flipping.
    signs: Vec<f64>,
}

fn householder(a: &DenseMatrix) -> Householder {
    let (m, n) = a.dims();
    let mut packed = a.clone();
    let mut tau = vec![0.0; n];
    let mut signs = vec![1.0; n];
    for k in 0..n.min(m) {
        let col = &mut packed.col_mut(k)[k..];
        let x0 = col[0];
        let tail_sq: f64 = col[1..].iter().map(|v| v * v).sum();
        if tail_sq == 0.0 {
            // Already triangular in this column; no reflection.
            if x0 < 0.0 {
                signs[k] = -1.0;
            }
            continue;
        }
        let norm = (x0 * x0 + tail_sq).sqrt();
        let beta = if x0 >= 0.0 { -norm } else { norm };
        let v0 = x0 - beta;
        for v in col[1..].iter_mut() {
            *v /= v0;
        }
        col[0] = beta;
        tau[k] = (beta - x0) / beta;
        if beta < 0.0 {
            signs[k] = -1.0;
        }
        // Apply H = I - tau v vᵀ to the trailing columns.
        let (left, right) = packed.as_mut_slice().split_at_mut((k + 1) * m);
        let v_tail = &left[k * m + k + 1..(k + 1) * m];
        for j in 0..n - k - 1 {
            let target = &mut right[j * m + k..(j + 1) * m];
            let w = tau[k] * (target[0] + dot(v_tail, &target[1..]));
            target[0] -= w;
            for (t, v) in target[1..].iter_mut().zip(v_tail) {
                *t -= w * v;
            }
        }
    }
    Householder { packed, tau, signs }
}

impl Householder {
    /// Applies H_0 H_1 … H_{n-1} to the first `ncols` columns of the identity.
    fn form_q(&self, ncols: usize) -> DenseMatrix {
        let (m, n) = self.packed.dims();
        let mut q = DenseMatrix::zeros(m, ncols);
        for j in 0..ncols.min(m) {
            q[(j, j)] = 1.0;
        }
        for k in (0..n.min(m)).rev() {
            let tau = self.tau[k];
            if tau == 0.0 {
                continue;
            }
            let v_tail = &self.packed.col(k)[k + 1..];
            // Columns j < k are still e_j here and vanish on rows k..m.
            for j in k..ncols {
                let target = &mut q.col_mut(j)[k..];
                let w = tau * (target[0] + dot(v_tail, &target[1..]));
                if w == 0.0 {
                    continue;
                }
                target[0] -= w;
                for (t, v) in target[1..].iter_mut().zip(v_tail) {
                    *t -= w * v;
                }
            }
        }
        for (k, &s) in self.signs.iter().enumerate() {
            if s < 0.0 && k < ncols {
                q.col_mut(k).iter_mut().for_each(|v| *v = -*v);
            }
        }
        q
    }

    fn form_r(&self) -> DenseMatrix {
        let n = self.packed.cols();
        let mut r = DenseMatrix::zeros(n, n);
        for j in 0..n {
            for i in 0..=j {
                r[(i, j)] = self.signs[i] * self.packed[(i, j)];
            }
        }
        r
    }
}

/// Economy-size QR by Householder reflections. Requires `m ≥ n`; rank
/// deficiency is allowed (R then has zero diagonal entries and Q is still
/// orthonormal).
pub fn qr_economy(a: &DenseMatrix) -> Result<QrFactors> {
    let (m, n) = a.dims();
    if m < n {
        return Err(dim_err("qr_economy", format!("needs rows >= cols, got {m}x{n}")));
    }
    let h = householder(a);
    Ok(QrFactors {
        q: h.form_q(n),
        r: h.form_r(),
    })
}

/// Square orthogonal factor of a full QR of an m×n matrix (m ≥ n). Its first
/// n columns equal the economy `Q`; the remaining `m - n` columns span the
/// orthogonal complement of the range.
pub fn qr_full_q(a: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, n) = a.dims();
    if m < n {
        return Err(dim_err("qr_full_q", format!("needs rows >= cols, got {m}x{n}")));
    }
    Ok(householder(a).form_q(m))
}

/// Orthonormal basis for the orthogonal complement of `range(q)`, for `q`
/// with orthonormal columns.
pub fn orthogonal_complement(q: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, k) = q.dims();
    Ok(qr_full_q(q)?.columns(k, m))
}
