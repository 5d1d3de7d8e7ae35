//! Randomized low-rank approximation of parameter-dependent matrices `A(t)`.
//!
//! The central idea is to sketch every `A(t)` with the *same* Gaussian
//! dimension reduction matrices. This gives two methods:
//!
//! * [`hmt`]: randomized SVD (orthogonal projection onto `range(A(t)Ω)`),
//!   including an offline/online split for affine models `A(t) = Σ φ_i(t) A_i`.
//! * [`nystrom`]: the generalized Nyström method (oblique projection
//!   `A(t)Ω (ΨᵀA(t)Ω)† ΨᵀA(t)`), stabilized with an ε-pseudoinverse, with the
//!   same offline/online split and additive streaming updates.
//!
//! [`metrics`] evaluates L² / sup-norm errors and the closed-form error
//! bounds, and [`verify`] runs seeded Monte Carlo trials against them.
//! Everything sits on the small dense kernels in [`linalg`].

pub mod error;
pub mod hmt;
pub mod linalg;
pub mod metrics;
pub mod nystrom;
pub mod param;
pub mod sketch;
pub mod verify;

pub use error::{Error, Result};
pub use hmt::{HmtOfflineData, SketchConfig};
pub use linalg::{DenseMatrix, QrFactors, RngState, SvdFactors};
pub use metrics::{ErrorReport, GridSpectra, TailBoundParams};
pub use nystrom::{GnConfig, GnOfflineData, GnSketch};
pub use param::{AffineModel, ParamDomain, ParamGrid, ParamMatrixModel};
pub use sketch::{LowRankApprox, SketchPack};
pub use verify::{Experiment, Method, MethodConfig, TrialStats, Verdict};
