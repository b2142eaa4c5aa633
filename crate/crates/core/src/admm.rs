//! ADMM for `min ‖Y − ΦS‖²_F` subject to `‖S‖₂,₀ ≤ s`, split as `B = S`.
//!
//! With penalty `ρ` and multiplier `L`, one iteration is
//!
//! ```text
//! B ← P_s(S − L/ρ)                                   row-wise hard thresholding
//! S ← (2ΦᵀΦ + ρI)⁻¹ (2ΦᵀY + ρB + L)                  cached SPD solve
//! L ← L + ρ(B − S)
//! ```
//!
//! starting from Gaussian `S⁰` and `L⁰ = 0`. The solver returns the final `B`.
//! The SPD system is factorized once, either directly (`N × N`) or through the
//! Woodbury identity
//!
//! ```text
//! (2ΦᵀΦ + ρI)⁻¹ = I/ρ − (2/ρ²) Φᵀ (I + 2ΦΦᵀ/ρ)⁻¹ Φ
//! ```
//!
//! which only factors an `M × M` matrix.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, Dyn};
use serde::{Deserialize, Serialize};

use crate::datagen::rng_stream;
use crate::error::{dim_err, Error, Result};
use crate::matrix::DenseMatrix;
use crate::projection::{check_budget, project_in_place};

/// How the `S`-update linear system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Cholesky factor of the `N × N` matrix `2ΦᵀΦ + ρI`.
    #[default]
    Plain,
    /// Cholesky factor of the `M × M` matrix `I + 2ΦΦᵀ/ρ`, applied via Woodbury.
    Smw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub rho: f64,
    /// Row-sparsity budget.
    pub s: usize,
    pub max_iter: usize,
    /// Threshold on `‖B − S‖_F`.
    pub eps_primal: f64,
    /// Threshold on `‖Sᵏ⁺¹ − Sᵏ‖_F`.
    pub eps_change: f64,
    /// Threshold on `‖L‖_F`.
    pub eps_dual: f64,
    pub backend: Backend,
    /// Seed for the Gaussian `S⁰`.
    pub seed: u64,
    pub criterion_enabled: bool,
}

impl SolverConfig {
    /// Defaults: `ρ = 1`, 1000 iterations, all thresholds `1e-6`, criterion on.
    pub fn new(s: usize) -> Self {
        Self {
            rho: 1.0,
            s,
            max_iter: 1000,
            eps_primal: 1e-6,
            eps_change: 1e-6,
            eps_dual: 1e-6,
            backend: Backend::Plain,
            seed: 0,
            criterion_enabled: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.rho) {
            return Err(Error::Parameter(format!("rho must be positive, got {}", self.rho)));
        }
        for (name, v) in [
            ("eps_primal", self.eps_primal),
            ("eps_change", self.eps_change),
            ("eps_dual", self.eps_dual),
        ] {
            if !positive(v) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be at least 1".into()));
        }
        if self.s == 0 {
            return Err(Error::Parameter("sparsity budget s must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Converged,
    MaxIter,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::MaxIter => "max_iter",
        })
    }
}

/// Per-iteration convergence quantities.
///
/// For the ADMM solvers these are `‖B − S‖_F`, `‖Sᵏ⁺¹ − Sᵏ‖_F` and `‖L‖_F`. The
/// greedy and thresholding baselines have no splitting; they report the data
/// residual `‖Y − ΦS‖_F` as `primal`, the iterate change as `change`, and 0 as `dual`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResidualTriple {
    pub primal: f64,
    pub change: f64,
    pub dual: f64,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    /// The recovered matrix (the final `B` for the ADMM solvers).
    pub s_hat: DenseMatrix,
    /// The final `S` iterate, where the solver has one distinct from `s_hat`.
    pub s_final: Option<DenseMatrix>,
    pub iterations: usize,
    pub termination: Termination,
    pub residual_history: Vec<ResidualTriple>,
    /// `‖2Φᵀ(ΦS − Y) − L‖_F` at the final iterate.
    pub kkt_stationarity: f64,
    pub wall_time_seconds: f64,
}

enum Factor {
    Plain(Cholesky<f64, Dyn>),
    Smw {
        chol: Cholesky<f64, Dyn>,
        phi: DMatrix<f64>,
    },
}

/// A reusable solve handle for `(2ΦᵀΦ + ρI) X = R`.
pub struct FactorizedNormalMatrix {
    rho: f64,
    n: usize,
    factor: Factor,
}

impl std::fmt::Debug for FactorizedNormalMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FactorizedNormalMatrix")
            .field("backend", &self.backend())
            .field("rho", &self.rho)
            .field("n", &self.n)
            .finish()
    }
}

pub fn factorize(phi: &DenseMatrix, rho: f64, backend: Backend) -> Result<FactorizedNormalMatrix> {
    FactorizedNormalMatrix::new(phi.as_inner(), rho, backend)
}

impl FactorizedNormalMatrix {
    pub(crate) fn new(phi: &DMatrix<f64>, rho: f64, backend: Backend) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::Parameter(format!("rho must be positive, got {rho}")));
        }
        let (m, n) = phi.shape();
        let factor = match backend {
            Backend::Plain => {
                let mut a = phi.tr_mul(phi);
                a *= 2.0;
                for i in 0..n {
                    a[(i, i)] += rho;
                }
                Factor::Plain(cholesky(a)?)
            }
            Backend::Smw => {
                let mut w = phi * phi.transpose();
                w *= 2.0 / rho;
                for i in 0..m {
                    w[(i, i)] += 1.0;
                }
                Factor::Smw {
                    chol: cholesky(w)?,
                    phi: phi.clone(),
                }
            }
        };
        Ok(Self { rho, n, factor })
    }

    pub fn backend(&self) -> Backend {
        match self.factor {
            Factor::Plain(_) => Backend::Plain,
            Factor::Smw { .. } => Backend::Smw,
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Solves `(2ΦᵀΦ + ρI) X = rhs`.
    pub fn solve(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if rhs.rows() != self.n {
            return Err(dim_err(
                "FactorizedNormalMatrix::solve",
                format!("rhs has {} rows, system has {}", rhs.rows(), self.n),
            ));
        }
        DenseMatrix::new(self.solve_inner(rhs.as_inner()))
    }

    pub(crate) fn solve_inner(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.factor {
            Factor::Plain(chol) => chol.solve(rhs),
            Factor::Smw { chol, phi } => {
                let inner = chol.solve(&(phi * rhs));
                let mut out = rhs / self.rho;
                out.gemm_tr(-2.0 / (self.rho * self.rho), phi, &inner, 1.0);
                out
            }
        }
    }
}

fn cholesky(a: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite entry in normal matrix".into()));
    }
    Cholesky::new(a).ok_or_else(|| Error::Numeric("normal matrix is not positive definite".into()))
}

fn same_shape(op: &'static str, a: &DenseMatrix, b: &DenseMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(dim_err(op, format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

/// `B = P_s(S − L/ρ)`.
pub fn update_b(s_mat: &DenseMatrix, l: &DenseMatrix, rho: f64, s: usize) -> Result<DenseMatrix> {
    same_shape("update_b", s_mat, l)?;
    check_budget(s, s_mat.rows())?;
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Parameter(format!("rho must be positive, got {rho}")));
    }
    DenseMatrix::new(b_step(s_mat.as_inner(), l.as_inner(), rho, s))
}

fn b_step(s_mat: &DMatrix<f64>, l: &DMatrix<f64>, rho: f64, s: usize) -> DMatrix<f64> {
    let mut v = s_mat - l / rho;
    project_in_place(&mut v, s);
    v
}

/// Solves `(2ΦᵀΦ + ρI) S = 2ΦᵀY + ρB + L` with a prepared factorization.
pub fn update_s(
    fact: &FactorizedNormalMatrix,
    phi: &DenseMatrix,
    y: &DenseMatrix,
    b: &DenseMatrix,
    l: &DenseMatrix,
    rho: f64,
) -> Result<DenseMatrix> {
    check_system(phi, y)?;
    same_shape("update_s", b, l)?;
    if b.rows() != phi.cols() || b.cols() != y.cols() {
        return Err(dim_err(
            "update_s",
            format!("B is {:?}, expected {}x{}", b.shape(), phi.cols(), y.cols()),
        ));
    }
    if rho != fact.rho {
        return Err(Error::Parameter(format!(
            "rho {rho} differs from the factorization's {}",
            fact.rho
        )));
    }
    let two_phit_y = 2.0 * phi.as_inner().tr_mul(y.as_inner());
    DenseMatrix::new(s_step(fact, &two_phit_y, b.as_inner(), l.as_inner()))
}

fn s_step(
    fact: &FactorizedNormalMatrix,
    two_phit_y: &DMatrix<f64>,
    b: &DMatrix<f64>,
    l: &DMatrix<f64>,
) -> DMatrix<f64> {
    let rhs = two_phit_y + b * fact.rho + l;
    fact.solve_inner(&rhs)
}

/// `L + ρ(B − S)`.
pub fn update_l(l: &DenseMatrix, b: &DenseMatrix, s: &DenseMatrix, rho: f64) -> Result<DenseMatrix> {
    same_shape("update_l", l, b)?;
    same_shape("update_l", b, s)?;
    DenseMatrix::new(l.as_inner() + (b.as_inner() - s.as_inner()) * rho)
}

/// Evaluates the three stopping quantities and compares them with the thresholds.
pub fn check_convergence(
    prev_s: &DenseMatrix,
    b: &DenseMatrix,
    s: &DenseMatrix,
    l: &DenseMatrix,
    cfg: &SolverConfig,
) -> (bool, ResidualTriple) {
    let t = residual_triple(prev_s.as_inner(), b.as_inner(), s.as_inner(), l.as_inner());
    (below_thresholds(&t, cfg), t)
}

pub(crate) fn residual_triple(
    prev_s: &DMatrix<f64>,
    b: &DMatrix<f64>,
    s: &DMatrix<f64>,
    l: &DMatrix<f64>,
) -> ResidualTriple {
    ResidualTriple {
        primal: (b - s).norm(),
        change: (s - prev_s).norm(),
        dual: l.norm(),
    }
}

fn below_thresholds(t: &ResidualTriple, cfg: &SolverConfig) -> bool {
    t.primal < cfg.eps_primal && t.change < cfg.eps_change && t.dual < cfg.eps_dual
}

/// `‖2Φᵀ(ΦS − Y) − L‖_F`, the stationarity part of the KKT conditions.
pub fn kkt_stationarity(
    phi: &DenseMatrix,
    y: &DenseMatrix,
    s: &DenseMatrix,
    l: &DenseMatrix,
) -> Result<f64> {
    check_system(phi, y)?;
    same_shape("kkt_stationarity", s, l)?;
    if s.rows() != phi.cols() || s.cols() != y.cols() {
        return Err(dim_err(
            "kkt_stationarity",
            format!("S is {:?}, expected {}x{}", s.shape(), phi.cols(), y.cols()),
        ));
    }
    Ok(kkt_inner(phi.as_inner(), y.as_inner(), s.as_inner(), l.as_inner()))
}

pub(crate) fn kkt_inner(
    phi: &DMatrix<f64>,
    y: &DMatrix<f64>,
    s: &DMatrix<f64>,
    l: &DMatrix<f64>,
) -> f64 {
    let resid = phi * s - y;
    let mut g = l.clone();
    g.gemm_tr(2.0, phi, &resid, -1.0);
    g.norm()
}

pub(crate) fn check_system(phi: &DenseMatrix, y: &DenseMatrix) -> Result<()> {
    if phi.rows() != y.rows() {
        return Err(dim_err(
            "solve",
            format!("Phi has {} rows but Y has {}", phi.rows(), y.rows()),
        ));
    }
    Ok(())
}

pub(crate) fn all_finite(x: &DMatrix<f64>) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Runs the ADMM iteration to convergence or `cfg.max_iter`.
pub fn solve(phi: &DenseMatrix, y: &DenseMatrix, cfg: &SolverConfig) -> Result<SolverResult> {
    solve_observed(phi, y, cfg, |_, _, _| {})
}

/// Like [`solve`], calling `observe(iteration, B, S)` after every iteration.
pub fn solve_observed<F>(
    phi: &DenseMatrix,
    y: &DenseMatrix,
    cfg: &SolverConfig,
    mut observe: F,
) -> Result<SolverResult>
where
    F: FnMut(usize, &DMatrix<f64>, &DMatrix<f64>),
{
    cfg.validate()?;
    check_system(phi, y)?;
    let (n, j) = (phi.cols(), y.cols());
    check_budget(cfg.s, n)?;
    let start = Instant::now();

    let fact = FactorizedNormalMatrix::new(phi.as_inner(), cfg.rho, cfg.backend)?;
    let two_phit_y = 2.0 * phi.as_inner().tr_mul(y.as_inner());

    let mut s_cur = rng_stream(cfg.seed).normal_matrix(n, j);
    let mut l = DMatrix::zeros(n, j);
    let mut b = DMatrix::zeros(n, j);
    let mut history = Vec::with_capacity(cfg.max_iter.min(4096));
    let mut termination = Termination::MaxIter;

    for k in 1..=cfg.max_iter {
        b = b_step(&s_cur, &l, cfg.rho, cfg.s);
        let s_next = s_step(&fact, &two_phit_y, &b, &l);
        l += (&b - &s_next) * cfg.rho;
        if !all_finite(&s_next) || !all_finite(&l) {
            return Err(Error::Divergence { iteration: k });
        }
        let triple = residual_triple(&s_cur, &b, &s_next, &l);
        history.push(triple);
        s_cur = s_next;
        observe(k, &b, &s_cur);
        if cfg.criterion_enabled && below_thresholds(&triple, cfg) {
            termination = Termination::Converged;
            break;
        }
    }

    let kkt = kkt_inner(phi.as_inner(), y.as_inner(), &s_cur, &l);
    Ok(SolverResult {
        s_hat: DenseMatrix::from_inner_unchecked(b),
        s_final: Some(DenseMatrix::from_inner_unchecked(s_cur)),
        iterations: history.len(),
        termination,
        residual_history: history,
        kkt_stationarity: kkt,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}
