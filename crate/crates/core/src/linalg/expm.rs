use super::DenseMatrix;
use crate::error::{dim_err, Error, Result};

/// Padé(13) numerator coefficients b_0..b_13.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// 1-norm threshold below which Padé(13) needs no scaling.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant.
pub fn matrix_exponential(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(dim_err(
            "matrix_exponential",
            format!("matrix must be square, got {:?}", a.dims()),
        ));
    }
    a.check_finite()?;
    let n = a.rows();
    if a.as_slice().iter().all(|&v| v == 0.0) {
        return Ok(DenseMatrix::identity(n));
    }

    let norm = a.norm_one();
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a.scale(0.5f64.powi(squarings));

    let b = &PADE13;
    let ident = DenseMatrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    // U = A [A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I]
    let mut inner = a6.scale(b[13]);
    inner.axpy(b[11], &a4);
    inner.axpy(b[9], &a2);
    let mut u = a6.matmul(&inner);
    u.axpy(b[7], &a6);
    u.axpy(b[5], &a4);
    u.axpy(b[3], &a2);
    u.axpy(b[1], &ident);
    let u = a.matmul(&u);

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let mut inner = a6.scale(b[12]);
    inner.axpy(b[10], &a4);
    inner.axpy(b[8], &a2);
    let mut v = a6.matmul(&inner);
    v.axpy(b[6], &a6);
    v.axpy(b[4], &a4);
    v.axpy(b[2], &a2);
    v.axpy(b[0], &ident);

    let p = v.add(&u);
    let q = v.sub(&u);
    let mut x = lu_solve(&q, &p)?;
    for _ in 0..squarings {
        x = x.matmul(&x);
    }
    Ok(x)
}

/// Solves `a x = b` by LU with partial pivoting.
pub(crate) fn lu_solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.rows();
    assert!(a.is_square() && b.rows() == n);
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| lu[(i, k)].abs().total_cmp(&lu[(j, k)].abs()))
            .expect("nonempty range");
        if lu[(pivot, k)] == 0.0 {
            return Err(Error::Precondition("singular matrix in LU solve".to_string()));
        }
        if pivot != k {
            perm.swap(k, pivot);
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = tmp;
            }
        }
        let d = lu[(k, k)];
        for i in k + 1..n {
            lu[(i, k)] /= d;
        }
        for j in k + 1..n {
            let ukj = lu[(k, j)];
            if ukj == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let l = lu[(i, k)];
                lu[(i, j)] -= l * ukj;
            }
        }
    }
    let mut x = DenseMatrix::from_fn(n, b.cols(), |i, j| b[(perm[i], j)]);
    for c in 0..b.cols() {
        let col = x.col_mut(c);
        for k in 0..n {
            let xk = col[k];
            for i in k + 1..n {
                col[i] -= lu[(i, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            col[k] /= lu[(k, k)];
            let xk = col[k];
            for i in 0..k {
                col[i] -= lu[(i, k)] * xk;
            }
        }
    }
    Ok(x)
}
