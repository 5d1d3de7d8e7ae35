//! Generalized Nyström with constant `Ω`, `Ψ`, stabilized by an
//! ε-pseudoinverse: `A(t) ≈ A(t)Ω (ΨᵀA(t)Ω)†_ε ΨᵀA(t)`.

use rayon::prelude::*;

use crate::error::{dim_err, Error, Result};
use crate::hmt::numerically_full_rank;
use crate::linalg::{eps_pseudoinverse_counted, orthogonal_complement, pseudoinverse, qr_economy, DenseMatrix};
use crate::param::{AffineModel, ParamGrid, ParamMatrixModel};
use crate::sketch::{LowRankApprox, SketchPack};

/// Default absolute ε-pseudoinverse threshold.
pub const DEFAULT_EPSILON: f64 = 2.22e-15;

/// Target rank `r`, oversampling `p`, second oversampling `ℓ`, ε and the
/// seed/stream that determine `Ω` and `Ψ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GnConfig {
    pub rank: usize,
    pub oversampling: usize,
    pub second_oversampling: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub stream: u64,
}

/// `ceil(0.2 (r + p))`, raised to 2 so the configuration stays valid for
/// small sketches.
pub fn default_second_oversampling(rank: usize, oversampling: usize) -> usize {
    (rank + oversampling).div_ceil(5).max(2)
}

impl GnConfig {
    /// Defaults `ℓ` and `ε`; requires `r, p ≥ 2`.
    pub fn new(rank: usize, oversampling: usize, seed: u64) -> Result<Self> {
        Self::with_params(
            rank,
            oversampling,
            default_second_oversampling(rank, oversampling),
            DEFAULT_EPSILON,
            seed,
        )
    }

    /// Requires `r, p, ℓ ≥ 2` and `ε ≥ 0`.
    pub fn with_params(
        rank: usize,
        oversampling: usize,
        second_oversampling: usize,
        epsilon: f64,
        seed: u64,
    ) -> Result<Self> {
        if rank < 2 || oversampling < 2 || second_oversampling < 2 {
            return Err(Error::Hypothesis(format!(
                "generalized Nystrom needs r, p, l >= 2, got r = {rank}, p = {oversampling}, l = {second_oversampling}"
            )));
        }
        if !(epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be nonnegative, got {epsilon}"
            )));
        }
        Ok(Self {
            rank,
            oversampling,
            second_oversampling,
            epsilon,
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

    /// Checks `r + p + ℓ ≤ m` and `r + p ≤ n`.
    pub fn check_dims(&self, m: usize, n: usize) -> Result<()> {
        let s = self.sketch_size();
        if s + self.second_oversampling > m || s > n {
            return Err(dim_err(
                "GnConfig",
                format!(
                    "need r + p + l = {} <= m = {m} and r + p = {s} <= n = {n}",
                    s + self.second_oversampling
                ),
            ));
        }
        Ok(())
    }

    pub fn pack(&self, m: usize, n: usize) -> SketchPack {
        SketchPack::gn(
            m,
            n,
            self.sketch_size(),
            self.second_oversampling,
            self.seed,
            self.stream,
        )
    }
}

fn check_drms(m: usize, n: usize, omega: &DenseMatrix, psi: &DenseMatrix) -> Result<()> {
    if omega.rows() != n || psi.rows() != m || psi.cols() < omega.cols() {
        return Err(dim_err(
            "generalized Nystrom",
            format!(
                "matrix is {m}x{n}, Omega is {:?}, Psi is {:?}",
                omega.dims(),
                psi.dims()
            ),
        ));
    }
    Ok(())
}

/// The three sketches of one matrix: `X = AΩ`, `Y = ΨᵀA`, `Z = ΨᵀAΩ`.
/// All are linear in `A`, so they can be updated additively.
#[derive(Clone, Debug, PartialEq)]
pub struct GnSketch {
    pub x: DenseMatrix,
    pub y: DenseMatrix,
    pub z: DenseMatrix,
}

impl GnSketch {
    pub fn of(a: &DenseMatrix, omega: &DenseMatrix, psi: &DenseMatrix) -> Result<Self> {
        check_drms(a.rows(), a.cols(), omega, psi)?;
        let y = psi.t_matmul(a);
        Ok(Self {
            x: a.matmul(omega),
            z: y.matmul(omega),
            y,
        })
    }

    /// `A ← A + B` on the sketches.
    pub fn update(&mut self, b: &DenseMatrix, omega: &DenseMatrix, psi: &DenseMatrix) -> Result<()> {
        let delta = GnSketch::of(b, omega, psi)?;
        if delta.x.dims() != self.x.dims() || delta.y.dims() != self.y.dims() {
            return Err(dim_err(
                "GnSketch::update",
                "update matrix does not match the sketched matrix".to_string(),
            ));
        }
        self.x.axpy(1.0, &delta.x);
        self.y.axpy(1.0, &delta.y);
        self.z.axpy(1.0, &delta.z);
        Ok(())
    }

    /// `Q = X R̃†_ε`, `W = YᵀQ̃` where `Z = Q̃R̃`.
    pub fn approx(&self, epsilon: f64) -> Result<LowRankApprox> {
        gn_from_sketches(&self.x, &self.y, &self.z, epsilon)
    }
}

/// Factors from precomputed sketches `X` (m×s), `Y` ((s+ℓ)×n), `Z = ΨᵀX`.
pub fn gn_from_sketches(x: &DenseMatrix, y: &DenseMatrix, z: &DenseMatrix, epsilon: f64) -> Result<LowRankApprox> {
    if z.dims() != (y.rows(), x.cols()) {
        return Err(dim_err(
            "gn_from_sketches",
            format!("X is {:?}, Y is {:?}, Z is {:?}", x.dims(), y.dims(), z.dims()),
        ));
    }
    let qr = qr_economy(z)?;
    let (r_pinv, discarded) = eps_pseudoinverse_counted(&qr.r, epsilon)?;
    if discarded > 0 {
        log::debug!(
            "epsilon-pseudoinverse discarded {discarded} of {} singular values",
            z.cols()
        );
    }
    let q = x.matmul(&r_pinv);
    let w = y.t_matmul(&qr.q);
    Ok(LowRankApprox::oblique(q, w, discarded))
}

/// Generalized Nyström with given DRMs and no hypothesis checks on the
/// oversampling (any `ℓ ≥ 0` is accepted).
pub fn gn_fixed_with(b: &DenseMatrix, omega: &DenseMatrix, psi: &DenseMatrix, epsilon: f64) -> Result<LowRankApprox> {
    GnSketch::of(b, omega, psi)?.approx(epsilon)
}

/// Generalized Nyström on one matrix with DRMs drawn from `cfg`.
pub fn gn_fixed(b: &DenseMatrix, cfg: &GnConfig) -> Result<LowRankApprox> {
    let (m, n) = b.dims();
    cfg.check_dims(m, n)?;
    let pack = cfg.pack(m, n);
    gn_fixed_with(b, &pack.omega, pack.psi.as_ref().expect("gn pack"), cfg.epsilon)
}

/// Generalized Nyström at each snapshot with one pair of DRMs.
pub fn gn_on_snapshots(
    snapshots: &[DenseMatrix],
    omega: &DenseMatrix,
    psi: &DenseMatrix,
    epsilon: f64,
) -> Result<Vec<LowRankApprox>> {
    snapshots
        .par_iter()
        .map(|a| gn_fixed_with(a, omega, psi, epsilon))
        .collect()
}

/// Generalized Nyström over a grid with one `(Ω, Ψ)` for all points.
pub fn gn_param(model: &dyn ParamMatrixModel, grid: &ParamGrid, cfg: &GnConfig) -> Result<Vec<LowRankApprox>> {
    let (m, n) = model.dims();
    cfg.check_dims(m, n)?;
    let pack = cfg.pack(m, n);
    let snaps = model.eval_grid(grid)?;
    gn_on_snapshots(&snaps, &pack.omega, pack.psi.as_ref().expect("gn pack"), cfg.epsilon)
}

/// As [`gn_param`], evaluating `A(t_j)` one point at a time.
pub fn gn_param_streamed(model: &dyn ParamMatrixModel, grid: &ParamGrid, cfg: &GnConfig) -> Result<Vec<LowRankApprox>> {
    let (m, n) = model.dims();
    cfg.check_dims(m, n)?;
    let pack = cfg.pack(m, n);
    let psi = pack.psi.as_ref().expect("gn pack");
    grid.points()
        .par_iter()
        .map(|&t| gn_fixed_with(&model.eval(t)?, &pack.omega, psi, cfg.epsilon))
        .collect()
}

/// Per-term sketches of an affine model.
#[derive(Clone, Debug)]
pub struct GnOfflineData {
    /// `X_i = A_iΩ`.
    pub x: Vec<DenseMatrix>,
    /// `Y_i = ΨᵀA_i`.
    pub y: Vec<DenseMatrix>,
    /// `Z_i = Y_iΩ`.
    pub z: Vec<DenseMatrix>,
    pub omega: DenseMatrix,
    pub psi: DenseMatrix,
    pub epsilon: f64,
}

impl GnOfflineData {
    pub fn k(&self) -> usize {
        self.x.len()
    }

    /// Sketches of `Σ φ_i A_i`.
    pub fn combine(&self, phi: &[f64]) -> Result<GnSketch> {
        if phi.len() != self.k() {
            return Err(dim_err(
                "gn_online",
                format!("{} coefficients for {} terms", phi.len(), self.k()),
            ));
        }
        Ok(GnSketch {
            x: DenseMatrix::linear_combination(phi, &self.x)?,
            y: DenseMatrix::linear_combination(phi, &self.y)?,
            z: DenseMatrix::linear_combination(phi, &self.z)?,
        })
    }
}

/// Offline phase with DRMs drawn from `cfg`.
pub fn gn_offline(model: &AffineModel, cfg: &GnConfig) -> Result<GnOfflineData> {
    let (m, n) = model.dims();
    cfg.check_dims(m, n)?;
    let pack = cfg.pack(m, n);
    gn_offline_with(model, pack.omega, pack.psi.expect("gn pack"), cfg.epsilon)
}

pub fn gn_offline_with(
    model: &AffineModel,
    omega: DenseMatrix,
    psi: DenseMatrix,
    epsilon: f64,
) -> Result<GnOfflineData> {
    let (m, n) = model.dims();
    check_drms(m, n, &omega, &psi)?;
    let sketches: Vec<GnSketch> = model
        .matrices()
        .par_iter()
        .map(|a| GnSketch::of(a, &omega, &psi))
        .collect::<Result<_>>()?;
    let mut data = GnOfflineData {
        x: Vec::with_capacity(sketches.len()),
        y: Vec::with_capacity(sketches.len()),
        z: Vec::with_capacity(sketches.len()),
        omega,
        psi,
        epsilon,
    };
    for s in sketches {
        data.x.push(s.x);
        data.y.push(s.y);
        data.z.push(s.z);
    }
    Ok(data)
}

/// Online phase at one parameter.
pub fn gn_online_point(data: &GnOfflineData, phi: &[f64]) -> Result<LowRankApprox> {
    data.combine(phi)?.approx(data.epsilon)
}

/// Online phase over a grid; `phis[j]` holds the coefficients at `grid[j]`.
pub fn gn_online(data: &GnOfflineData, phis: &[Vec<f64>], grid: &ParamGrid) -> Result<Vec<LowRankApprox>> {
    if phis.len() != grid.len() {
        return Err(dim_err(
            "gn_online",
            format!("{} coefficient rows for {} grid points", phis.len(), grid.len()),
        ));
    }
    phis.par_iter().map(|phi| gn_online_point(data, phi)).collect()
}

/// Sketches of `A(t_j)` at every grid point.
pub fn gn_sketch_param(
    model: &dyn ParamMatrixModel,
    grid: &ParamGrid,
    omega: &DenseMatrix,
    psi: &DenseMatrix,
) -> Result<Vec<GnSketch>> {
    let snaps = model.eval_grid(grid)?;
    snaps.par_iter().map(|a| GnSketch::of(a, omega, psi)).collect()
}

/// Streaming update `A(t) ← A(t) + B(t)` of per-point sketches, touching only
/// `B(t)`.
pub fn gn_streaming_update(
    sketches: &mut [GnSketch],
    update: &dyn ParamMatrixModel,
    grid: &ParamGrid,
    omega: &DenseMatrix,
    psi: &DenseMatrix,
) -> Result<()> {
    if sketches.len() != grid.len() {
        return Err(dim_err(
            "gn_streaming_update",
            format!("{} sketches for {} grid points", sketches.len(), grid.len()),
        ));
    }
    let deltas = update.eval_grid(grid)?;
    sketches
        .par_iter_mut()
        .zip(deltas.par_iter())
        .try_for_each(|(s, b)| s.update(b, omega, psi))
}

/// Both sides of the exact identity
/// `‖(I − P_{BΩ,Ψ})B‖_F² = ‖(I − QQᵀ)B‖_F² + ‖(ΨᵀQ)†(ΨᵀQ_⊥)(Q_⊥ᵀB)‖_F²`,
/// where `P_{BΩ,Ψ} = BΩ(ΨᵀBΩ)†Ψᵀ` and `BΩ = QR`.
///
/// Fails with [`Error::Precondition`] unless `ΨᵀBΩ` has numerically full
/// column rank.
pub fn gn_structural_identity_gap(b: &DenseMatrix, omega: &DenseMatrix, psi: &DenseMatrix) -> Result<(f64, f64)> {
    let (m, n) = b.dims();
    check_drms(m, n, omega, psi)?;
    let x = b.matmul(omega);
    let z = psi.t_matmul(&x);
    if !numerically_full_rank(&z, psi.frobenius_norm() * x.frobenius_norm())? {
        return Err(Error::Precondition(
            "Psi^T B Omega does not have full column rank".into(),
        ));
    }
    let oblique = x.matmul(&pseudoinverse(&z)?).matmul(&psi.t_matmul(b));
    let lhs = b.sub(&oblique).frobenius_norm_sq();

    let q = qr_economy(&x)?.q;
    let q_perp = orthogonal_complement(&q)?;
    let orth = b.sub(&q.matmul(&q.t_matmul(b))).frobenius_norm_sq();
    let second = pseudoinverse(&psi.t_matmul(&q))?
        .matmul(&psi.t_matmul(&q_perp))
        .matmul(&q_perp.t_matmul(b));
    Ok((lhs, orth + second.frobenius_norm_sq()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmt::hmt_with_omega;
    use crate::linalg::{gaussian_matrix, qr_full_q, RngState};
    use crate::param::{random_affine_model, uniform_grid, ParamDomain, Phi};
    use proptest::prelude::*;

    fn low_rank(m: usize, n: usize, rank: usize, rng: &mut RngState) -> DenseMatrix {
        rng.gaussian_matrix(m, rank).matmul_t(&rng.gaussian_matrix(n, rank))
    }

    #[test]
    fn config_defaults_and_hypotheses() {
        let cfg = GnConfig::new(10, 10, 0).unwrap();
        assert_eq!(cfg.second_oversampling, 4);
        assert_eq!(cfg.epsilon, 2.22e-15);
        assert_eq!(GnConfig::new(20, 5, 0).unwrap().second_oversampling, 5);
        assert_eq!(GnConfig::new(2, 2, 0).unwrap().second_oversampling, 2);
        assert!(GnConfig::with_params(5, 5, 1, 0.0, 0).is_err());
        assert!(GnConfig::with_params(5, 5, 2, -1.0, 0).is_err());
        assert!(cfg.check_dims(23, 30).is_err());
        assert!(cfg.check_dims(24, 20).is_ok());
    }

    #[test]
    fn exact_rank_is_recovered_with_tiny_second_oversampling() {
        let mut rng = RngState::new(1, 0);
        let b = low_rank(30, 20, 3, &mut rng);
        let omega = rng.gaussian_matrix(20, 5);
        let psi = rng.gaussian_matrix(30, 6);
        let la = gn_fixed_with(&b, &omega, &psi, DEFAULT_EPSILON).unwrap();
        assert!(!la.orthonormal);
        assert!(la.error_fro(&b).unwrap() <= 1e-8 * b.frobenius_norm());
    }

    #[test]
    fn zero_matrix_gives_zero_factors() {
        let la = gn_fixed(&DenseMatrix::zeros(20, 15), &GnConfig::new(3, 3, 2).unwrap()).unwrap();
        assert_eq!(la.q.max_abs(), 0.0);
        assert_eq!(la.w.max_abs(), 0.0);
    }

    #[test]
    fn param_matches_fixed_and_constant_model() {
        let model = random_affine_model(2, 20, 15, None, &mut RngState::new(4, 0)).unwrap();
        let grid = uniform_grid(model.domain(), 5).unwrap();
        let cfg = GnConfig::new(3, 3, 9).unwrap();
        let out = gn_param(&model, &grid, &cfg).unwrap();
        for (t, la) in grid.points().iter().zip(&out) {
            let fixed = gn_fixed(&model.eval(*t).unwrap(), &cfg).unwrap();
            assert!(la.reconstruct().sub(&fixed.reconstruct()).max_abs() <= 1e-13);
        }

        let domain = ParamDomain::interval(0.0, 1.0).unwrap();
        let b = gaussian_matrix(3, 0, 20, 15);
        let constant = AffineModel::new(domain, vec![(Phi::constant(1.0), b)]).unwrap();
        let out = gn_param(&constant, &grid, &cfg).unwrap();
        assert!(out.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(
            gn_param_streamed(&model, &grid, &cfg).unwrap(),
            gn_param(&model, &grid, &cfg).unwrap()
        );
    }

    #[test]
    fn offline_sketches_are_consistent() {
        let model = random_affine_model(3, 25, 20, None, &mut RngState::new(5, 0)).unwrap();
        let cfg = GnConfig::new(3, 3, 1).unwrap();
        let data = gn_offline(&model, &cfg).unwrap();
        let a1 = &model.matrices()[0];
        let other_order = data.psi.t_matmul(&a1.matmul(&data.omega));
        assert!(data.z[0].sub(&other_order).max_abs() <= 1e-13 * other_order.max_abs());

        let t = 0.61;
        let zsum = DenseMatrix::linear_combination(&model.phi_values(t), &data.z).unwrap();
        let direct = data.psi.t_matmul(&model.eval(t).unwrap().matmul(&data.omega));
        assert!(zsum.sub(&direct).frobenius_norm() <= 1e-12 * direct.frobenius_norm());
    }

    #[test]
    fn online_matches_param_and_degenerate_cases() {
        let model = random_affine_model(3, 50, 40, Some(0.8), &mut RngState::new(6, 0)).unwrap();
        let grid = uniform_grid(model.domain(), 6).unwrap();
        let cfg = GnConfig::new(4, 4, 2).unwrap();
        let data = gn_offline(&model, &cfg).unwrap();
        let online = gn_online(&data, &model.phi_table(grid.points()), &grid).unwrap();
        let param = gn_param(&model, &grid, &cfg).unwrap();
        for ((t, on), pa) in grid.points().iter().zip(&online).zip(&param) {
            let a = model.eval(*t).unwrap();
            assert!(on.reconstruct().sub(&pa.reconstruct()).frobenius_norm() <= 1e-9 * a.frobenius_norm());
        }

        let zeros = vec![vec![0.0; 3]; grid.len()];
        for la in gn_online(&data, &zeros, &grid).unwrap() {
            assert_eq!(la.reconstruct().max_abs(), 0.0);
        }

        let single = random_affine_model(1, 50, 40, None, &mut RngState::new(7, 0)).unwrap();
        let data = gn_offline(&single, &cfg).unwrap();
        let on = gn_online_point(&data, &[1.0]).unwrap();
        let fixed = gn_fixed(&single.matrices()[0], &cfg).unwrap();
        assert_eq!(on, fixed);
        assert!(gn_online_point(&data, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn streaming_update_equals_recomputation() {
        let mut rng = RngState::new(8, 0);
        let a = random_affine_model(2, 30, 20, None, &mut rng).unwrap();
        let b = random_affine_model(2, 30, 20, None, &mut rng).unwrap();
        let grid = uniform_grid(a.domain(), 4).unwrap();
        let pack = SketchPack::gn(30, 20, 6, 3, 5, 0);
        let psi = pack.psi.as_ref().unwrap();

        let mut sk = gn_sketch_param(&a, &grid, &pack.omega, psi).unwrap();
        let before = sk.clone();
        let zero = AffineModel::new(
            a.domain().clone(),
            vec![(Phi::constant(0.0), DenseMatrix::zeros(30, 20))],
        )
        .unwrap();
        gn_streaming_update(&mut sk, &zero, &grid, &pack.omega, psi).unwrap();
        assert_eq!(sk, before);

        gn_streaming_update(&mut sk, &b, &grid, &pack.omega, psi).unwrap();
        for (s, t) in sk.iter().zip(grid.points()) {
            let sum = a.eval(*t).unwrap().add(&b.eval(*t).unwrap());
            let fresh = gn_fixed_with(&sum, &pack.omega, psi, DEFAULT_EPSILON).unwrap();
            let upd = s.approx(DEFAULT_EPSILON).unwrap();
            assert!(upd.reconstruct().sub(&fresh.reconstruct()).frobenius_norm() <= 1e-12 * sum.frobenius_norm());
        }

        let mut sk = gn_sketch_param(&a, &grid, &pack.omega, psi).unwrap();
        let neg = AffineModel::new(
            a.domain().clone(),
            a.phis()
                .iter()
                .cloned()
                .zip(a.matrices().iter().map(|m| m.scale(-1.0)))
                .collect(),
        )
        .unwrap();
        gn_streaming_update(&mut sk, &neg, &grid, &pack.omega, psi).unwrap();
        for s in &sk {
            assert!(s.x.max_abs() <= 1e-13 && s.y.max_abs() <= 1e-13 && s.z.max_abs() <= 1e-13);
        }
    }

    #[test]
    fn structural_identity_special_cases() {
        let mut rng = RngState::new(9, 0);
        let b = low_rank(25, 20, 4, &mut rng);
        let omega = rng.gaussian_matrix(20, 6);
        let psi = rng.gaussian_matrix(25, 8);
        // Rank 4 with 6 columns: Ψᵀ B Ω is rank deficient.
        assert!(matches!(
            gn_structural_identity_gap(&b, &omega, &psi),
            Err(Error::Precondition(_))
        ));
        let omega = rng.gaussian_matrix(20, 4);
        let (lhs, rhs) = gn_structural_identity_gap(&b, &omega, &psi).unwrap();
        assert!(lhs <= 1e-20 * b.frobenius_norm_sq() + 1e-24 && rhs <= 1e-20 * b.frobenius_norm_sq() + 1e-24);

        let b = rng.gaussian_matrix(12, 10);
        let omega = rng.gaussian_matrix(10, 4);
        let psi = qr_full_q(&rng.gaussian_matrix(12, 12)).unwrap();
        let (lhs, rhs) = gn_structural_identity_gap(&b, &omega, &psi).unwrap();
        let q = qr_economy(&b.matmul(&omega)).unwrap().q;
        let orth = b.sub(&q.matmul(&q.t_matmul(&b))).frobenius_norm_sq();
        assert!((lhs - orth).abs() <= 1e-9 * (1.0 + orth));
        assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn oblique_error_at_least_orthogonal(seed in any::<u64>(), s in 2usize..7, l in 0usize..4) {
            let b = gaussian_matrix(seed, 0, 20, 15);
            let omega = gaussian_matrix(seed, 1, 15, s);
            let psi = gaussian_matrix(seed, 2, 20, s + l);
            let gn = gn_fixed_with(&b, &omega, &psi, DEFAULT_EPSILON).unwrap().error_fro(&b).unwrap();
            let hmt = hmt_with_omega(&b, &omega).unwrap().error_fro(&b).unwrap();
            prop_assert!(gn >= hmt - 1e-10);
        }

        #[test]
        fn sketches_are_linear(seed in any::<u64>(), alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
            let a = gaussian_matrix(seed, 0, 12, 9);
            let b = gaussian_matrix(seed, 1, 12, 9);
            let omega = gaussian_matrix(seed, 2, 9, 4);
            let psi = gaussian_matrix(seed, 3, 12, 6);
            let combo = GnSketch::of(&a.scale(alpha).add(&b.scale(beta)), &omega, &psi).unwrap();
            let sa = GnSketch::of(&a, &omega, &psi).unwrap();
            let sb = GnSketch::of(&b, &omega, &psi).unwrap();
            for (c, (x, y)) in [(&combo.x, (&sa.x, &sb.x)), (&combo.y, (&sa.y, &sb.y)), (&combo.z, (&sa.z, &sb.z))] {
                let lin = x.scale(alpha).add(&y.scale(beta));
                prop_assert!(c.sub(&lin).max_abs() <= 1e-13 * (1.0 + lin.max_abs()));
            }
        }
    }
}
