use super::{ParamDomain, ParamGrid, ParamMatrixModel};
use crate::error::{Error, Result};
use crate::linalg::{qr_economy, DenseMatrix, RngState};

/// End of the integration window `[0, T]`.
const HORIZON: f64 = 0.1;

/// Discrete Schrödinger equation in imaginary time,
/// `Ȧ = -H[A]` with `H[A] = -½(DA + AD) + V A V`, `D = tridiag(-1, 2, -1)`
/// and `V = diag(1 - cos(2jπ/n))`, `j = -n/2 … n/2-1`, on `[0, 0.1]`.
///
/// Integrated with classical RK4 using `steps` uniform steps over the whole
/// window (steps are scaled down proportionally for shorter spans).
#[derive(Clone, Debug)]
pub struct SchrodingerModel {
    a0: DenseMatrix,
    potential: Vec<f64>,
    steps: usize,
    domain: ParamDomain,
}

/// Initial singular values `10⁻ⁱ`, i = 1..n, truncated to zero below `1e-16`.
pub fn schrodinger_sigma(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| if i <= 16 { 10f64.powi(-(i as i32)) } else { 0.0 })
        .collect()
}

/// Builds the model with `A₀ = U diag(initial_sigma) Vᵀ`, where `U`, `V` are
/// the Q factors of two Gaussian `n × n` draws from `rng`. `initial_sigma` is
/// zero-padded to length `n`.
pub fn schrodinger_model(
    n: usize,
    initial_sigma: &[f64],
    steps: usize,
    rng: &mut RngState,
) -> Result<SchrodingerModel> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "Schrödinger model needs an even n >= 2, got {n}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be >= 1".into()));
    }
    if initial_sigma.len() > n {
        return Err(Error::InvalidArgument(format!(
            "{} singular values for dimension {n}",
            initial_sigma.len()
        )));
    }
    let u = qr_economy(&rng.gaussian_matrix(n, n))?.q;
    let v = qr_economy(&rng.gaussian_matrix(n, n))?.q;
    let mut us = u;
    for j in 0..n {
        let s = initial_sigma.get(j).copied().unwrap_or(0.0);
        us.col_mut(j).iter_mut().for_each(|x| *x *= s);
    }
    let a0 = us.matmul_t(&v);
    let half = (n / 2) as i64;
    let potential = (-half..half)
        .map(|j| 1.0 - (2.0 * j as f64 * std::f64::consts::PI / n as f64).cos())
        .collect();
    Ok(SchrodingerModel {
        a0,
        potential,
        steps,
        domain: ParamDomain::interval(0.0, HORIZON)?,
    })
}

impl SchrodingerModel {
    pub fn initial(&self) -> &DenseMatrix {
        &self.a0
    }

    /// Same model with a different step count.
    pub fn with_steps(&self, steps: usize) -> Self {
        Self {
            steps: steps.max(1),
            ..self.clone()
        }
    }

    /// `-H[A] = ½(DA + AD) - V A V`, evaluated by stencil.
    fn rhs(&self, a: &DenseMatrix) -> DenseMatrix {
        let n = a.rows();
        let v = &self.potential;
        DenseMatrix::from_fn(n, n, |i, j| {
            let c = a[(i, j)];
            let mut nb = 0.0;
            if i > 0 {
                nb += a[(i - 1, j)];
            }
            if i + 1 < n {
                nb += a[(i + 1, j)];
            }
            if j > 0 {
                nb += a[(i, j - 1)];
            }
            if j + 1 < n {
                nb += a[(i, j + 1)];
            }
            2.0 * c - 0.5 * nb - v[i] * v[j] * c
        })
    }

    fn rk4_step(&self, a: &DenseMatrix, h: f64) -> DenseMatrix {
        let k1 = self.rhs(a);
        let mut y = a.clone();
        y.axpy(0.5 * h, &k1);
        let k2 = self.rhs(&y);
        let mut y = a.clone();
        y.axpy(0.5 * h, &k2);
        let k3 = self.rhs(&y);
        let mut y = a.clone();
        y.axpy(h, &k3);
        let k4 = self.rhs(&y);
        let mut out = a.clone();
        out.axpy(h / 6.0, &k1);
        out.axpy(h / 3.0, &k2);
        out.axpy(h / 3.0, &k3);
        out.axpy(h / 6.0, &k4);
        out
    }

    /// Advances `a` over a span of length `dt`.
    fn advance(&self, mut a: DenseMatrix, dt: f64) -> DenseMatrix {
        if dt <= 0.0 {
            return a;
        }
        let n_steps = ((self.steps as f64 * dt / HORIZON).ceil() as usize).max(1);
        let h = dt / n_steps as f64;
        for _ in 0..n_steps {
            a = self.rk4_step(&a, h);
        }
        a
    }
}

impl ParamMatrixModel for SchrodingerModel {
    fn dims(&self) -> (usize, usize) {
        self.a0.dims()
    }

    fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    fn eval(&self, t: f64) -> Result<DenseMatrix> {
        self.domain.check(t)?;
        Ok(self.advance(self.a0.clone(), t))
    }

    /// Marches one trajectory through the sorted grid instead of restarting
    /// from `t = 0` at every point.
    fn eval_grid(&self, grid: &ParamGrid) -> Result<Vec<DenseMatrix>> {
        let mut out = Vec::with_capacity(grid.len());
        let mut state = self.a0.clone();
        let mut t_prev = 0.0;
        for &t in grid.points() {
            self.domain.check(t)?;
            state = self.advance(state, t - t_prev);
            t_prev = t;
            out.push(state.clone());
        }
        Ok(out)
    }
}
