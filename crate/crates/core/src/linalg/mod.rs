//! Dense kernels: column-major matrices, Householder QR, one-sided Jacobi
//! SVD, pseudoinverses, Padé matrix exponential and seeded Gaussian sampling.

mod dense;
mod expm;
mod qr;
mod rng;
mod svd;

pub use dense::{gemm, product, DenseMatrix, Op};
pub use expm::matrix_exponential;
pub use qr::{orthogonal_complement, qr_economy, qr_full_q, QrFactors};
pub use rng::{gaussian_matrix, RngState};
pub use svd::{
    eps_pseudoinverse, eps_pseudoinverse_counted, pseudoinverse, singular_values, split_svd, svd, tail_energy,
    SvdFactors, SvdSplit,
};

/// Smallest over largest singular value (0 for a zero matrix).
pub fn inverse_condition(a: &DenseMatrix) -> crate::Result<f64> {
    let s = singular_values(a)?;
    let (Some(&hi), Some(&lo)) = (s.first(), s.last()) else {
        return Ok(0.0);
    };
    Ok(if hi > 0.0 { lo / hi } else { 0.0 })
}
