//! Comparison solvers sharing [`SolverResult`] with the ℓ2,0 ADMM.
//!
//! Update rules, for auditing reported numbers:
//!
//! * **SOMP** (simultaneous orthogonal matching pursuit). Start from `R = Y` and
//!   an empty support `Γ`. Repeat exactly `K` times: add the unselected column
//!   `i` maximizing `‖φᵢᵀR‖₂` (smaller index on ties), refit `S_Γ` as the
//!   least-squares solution of `Φ_Γ S_Γ ≈ Y` via Householder QR, and set
//!   `R = Y − Φ_Γ S_Γ`.
//! * **SNIHT** (simultaneous normalized iterative hard thresholding). Start from
//!   `S = 0` with `Γ` the `K` largest rows of `ΦᵀY`. Each iteration takes
//!   `G = Φᵀ(Y − ΦS)`, step `μ = ‖G_Γ‖²_F / ‖Φ_Γ G_Γ‖²_F`, and candidate
//!   `P_K(S + μG)`; while the candidate increases `‖Y − ΦS‖²_F`, `μ` is halved
//!   (at most 60 times, after which the iterate is kept). `Γ` becomes the
//!   candidate's support. Stops after `max_iter` or once
//!   `‖ΔS‖_F ≤ 1e-13·max(1, ‖S‖_F)`.
//! * **ADMM-ℓ2,1**. The same splitting as the ℓ2,0 solver applied to
//!   `λ‖B‖₂,₁ + ‖Y − ΦS‖²_F`: the `B` step is row-wise group soft thresholding
//!   at level `λ/ρ`, the `S` and `L` steps are unchanged, with Gaussian `S⁰` and
//!   the same three-residual stopping rule.

use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::admm::{
    all_finite, check_system, kkt_inner, residual_triple, Backend, FactorizedNormalMatrix,
    ResidualTriple, SolverResult, Termination,
};
use crate::datagen::rng_stream;
use crate::error::{Error, Result};
use crate::matrix::{row_norms_of, DenseMatrix};
use crate::projection::{check_budget, project_in_place, top_rows};

const SNIHT_MAX_HALVINGS: usize = 60;
const SNIHT_STALL_TOL: f64 = 1e-13;
const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineAlgorithm {
    Somp,
    Sniht,
    AdmmL21,
}

/// SNIHT step-size rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepPolicy {
    /// Support-restricted normalized step, halved while the objective increases.
    #[default]
    NormalizedAdaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub algorithm: BaselineAlgorithm,
    /// Sparsity for SOMP and SNIHT.
    pub sparsity_k: Option<usize>,
    pub lambda: f64,
    pub rho: f64,
    pub max_iter: usize,
    pub step_policy: StepPolicy,
    /// Stopping thresholds for ADMM-ℓ2,1 (primal, change, dual).
    pub eps: f64,
    /// Seed of the ADMM-ℓ2,1 starting point.
    pub seed: u64,
}

impl BaselineConfig {
    fn base(algorithm: BaselineAlgorithm, sparsity_k: Option<usize>) -> Self {
        Self {
            algorithm,
            sparsity_k,
            lambda: 1e-6,
            rho: 1e-5,
            max_iter: 1000,
            step_policy: StepPolicy::NormalizedAdaptive,
            eps: 1e-6,
            seed: 0,
        }
    }

    pub fn somp(k: usize) -> Self {
        Self::base(BaselineAlgorithm::Somp, Some(k))
    }

    pub fn sniht(k: usize) -> Self {
        Self::base(BaselineAlgorithm::Sniht, Some(k))
    }

    /// `λ = 1e-6`, `ρ = 1e-5`, 1000 iterations.
    pub fn admm_l21() -> Self {
        Self::base(BaselineAlgorithm::AdmmL21, None)
    }

    fn k(&self) -> Result<usize> {
        self.sparsity_k
            .ok_or_else(|| Error::Parameter(format!("{:?} needs sparsity_k", self.algorithm)))
    }
}

/// Dispatches on `cfg.algorithm`.
pub fn solve_baseline(phi: &DenseMatrix, y: &DenseMatrix, cfg: &BaselineConfig) -> Result<SolverResult> {
    match cfg.algorithm {
        BaselineAlgorithm::Somp => somp_solve(phi, y, cfg.k()?),
        BaselineAlgorithm::Sniht => sniht_solve(phi, y, cfg.k()?, cfg.max_iter),
        BaselineAlgorithm::AdmmL21 => admm_l21_solve(phi, y, cfg),
    }
}

fn finish(
    phi: &DenseMatrix,
    y: &DenseMatrix,
    s_hat: DMatrix<f64>,
    history: Vec<ResidualTriple>,
    termination: Termination,
    start: Instant,
) -> SolverResult {
    let l = DMatrix::zeros(s_hat.nrows(), s_hat.ncols());
    let kkt = kkt_inner(phi.as_inner(), y.as_inner(), &s_hat, &l);
    SolverResult {
        s_hat: DenseMatrix::from_inner_unchecked(s_hat),
        s_final: None,
        iterations: history.len(),
        termination,
        residual_history: history,
        kkt_stationarity: kkt,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    }
}

fn select_columns(phi: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(phi.nrows(), cols.len(), |i, c| phi[(i, cols[c])])
}

/// Least-squares coefficients of `Y` on the columns of `a` (full column rank required).
fn least_squares(a: DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let qr = a.qr();
    let r = qr.r();
    let diag_max = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if diag_max == 0.0 || r.diagonal().iter().any(|v| v.abs() <= RANK_TOL * diag_max) {
        return Err(Error::Numeric("selected columns are rank deficient".into()));
    }
    let mut rhs = y.clone();
    qr.q_tr_mul(&mut rhs);
    let k = r.nrows();
    let rhs = rhs.rows(0, k).into_owned();
    r.solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::Numeric("triangular solve failed".into()))
}

/// Simultaneous orthogonal matching pursuit with exactly `k` greedy selections.
pub fn somp_solve(phi: &DenseMatrix, y: &DenseMatrix, k: usize) -> Result<SolverResult> {
    somp_with_support(phi, y, k).map(|(res, _)| res)
}

/// SOMP returning the selection order alongside the result.
pub fn somp_with_support(
    phi: &DenseMatrix,
    y: &DenseMatrix,
    k: usize,
) -> Result<(SolverResult, Vec<usize>)> {
    check_system(phi, y)?;
    let (m, n) = phi.shape();
    if k == 0 || k > m {
        return Err(Error::Parameter(format!("SOMP sparsity K = {k} must lie in [1, {m}]")));
    }
    let start = Instant::now();
    let (p, yy) = (phi.as_inner(), y.as_inner());
    let mut order = Vec::with_capacity(k);
    let mut selected = vec![false; n];
    let mut resid = yy.clone();
    let mut s_prev = DMatrix::zeros(n, y.cols());
    let mut history = Vec::with_capacity(k);

    for _ in 0..k {
        let corr = p.tr_mul(&resid);
        let scores = row_norms_of(&corr);
        let best = (0..n)
            .filter(|&i| !selected[i])
            .max_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(b.cmp(&a)))
            .expect("k <= m < n leaves unselected columns");
        selected[best] = true;
        order.push(best);

        let coef = least_squares(select_columns(p, &order), yy)?;
        let mut s_next = DMatrix::zeros(n, y.cols());
        for (r, &row) in order.iter().enumerate() {
            s_next.row_mut(row).copy_from(&coef.row(r));
        }
        resid = yy - p * &s_next;
        history.push(ResidualTriple {
            primal: resid.norm(),
            change: (&s_next - &s_prev).norm(),
            dual: 0.0,
        });
        s_prev = s_next;
    }
    Ok((finish(phi, y, s_prev, history, Termination::Converged, start), order))
}

fn objective(phi: &DMatrix<f64>, y: &DMatrix<f64>, s: &DMatrix<f64>) -> f64 {
    (y - phi * s).norm_squared()
}

/// Simultaneous normalized iterative hard thresholding at sparsity `k`.
pub fn sniht_solve(
    phi: &DenseMatrix,
    y: &DenseMatrix,
    k: usize,
    max_iter: usize,
) -> Result<SolverResult> {
    sniht_observed(phi, y, k, max_iter, |_, _| {})
}

/// [`sniht_solve`] calling `observe(iteration, S)` after every iteration.
pub fn sniht_observed<F>(
    phi: &DenseMatrix,
    y: &DenseMatrix,
    k: usize,
    max_iter: usize,
    mut observe: F,
) -> Result<SolverResult>
where
    F: FnMut(usize, &DMatrix<f64>),
{
    check_system(phi, y)?;
    let n = phi.cols();
    check_budget(k, n)?;
    if max_iter == 0 {
        return Err(Error::Parameter("max_iter must be at least 1".into()));
    }
    let start = Instant::now();
    let (p, yy) = (phi.as_inner(), y.as_inner());

    let mut s = DMatrix::zeros(n, y.cols());
    let mut obj = yy.norm_squared();
    let mut support = top_rows(&row_norms_of(&p.tr_mul(yy)), k);
    let mut history = Vec::new();
    let mut termination = Termination::MaxIter;

    for it in 1..=max_iter {
        let grad = p.tr_mul(&(yy - p * &s));
        let mut g_sup = DMatrix::zeros(n, y.cols());
        for &i in &support {
            g_sup.row_mut(i).copy_from(&grad.row(i));
        }
        let num = g_sup.norm_squared();
        let den = (p * &g_sup).norm_squared();
        let mut mu = if den > 0.0 { num / den } else { 0.0 };

        let mut accepted = None;
        for _ in 0..=SNIHT_MAX_HALVINGS {
            let mut cand = &s + &grad * mu;
            let kept = project_in_place(&mut cand, k);
            let cand_obj = objective(p, yy, &cand);
            if !cand_obj.is_finite() || !all_finite(&cand) {
                return Err(Error::Divergence { iteration: it });
            }
            if cand_obj <= obj {
                accepted = Some((cand, kept, cand_obj));
                break;
            }
            mu *= 0.5;
        }

        let change = match accepted {
            Some((cand, kept, cand_obj)) => {
                let change = (&cand - &s).norm();
                s = cand;
                support = kept;
                obj = cand_obj;
                change
            }
            None => 0.0,
        };
        history.push(ResidualTriple {
            primal: obj.sqrt(),
            change,
            dual: 0.0,
        });
        observe(it, &s);
        if change <= SNIHT_STALL_TOL * s.norm().max(1.0) {
            termination = Termination::Converged;
            break;
        }
    }
    Ok(finish(phi, y, s, history, termination, start))
}

/// Row-wise group soft thresholding: each row `v` becomes `max(0, 1 − t/‖v‖)·v`.
pub fn group_soft_threshold(x: &DenseMatrix, threshold: f64) -> Result<DenseMatrix> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::Parameter(format!("threshold must be non-negative, got {threshold}")));
    }
    let mut out = x.as_inner().clone();
    soft_threshold_in_place(&mut out, threshold);
    DenseMatrix::new(out)
}

fn soft_threshold_in_place(x: &mut DMatrix<f64>, threshold: f64) {
    let scale: Vec<f64> = row_norms_of(x)
        .into_iter()
        .map(|nrm| if nrm > threshold { 1.0 - threshold / nrm } else { 0.0 })
        .collect();
    for mut col in x.column_iter_mut() {
        for (v, &c) in col.iter_mut().zip(&scale) {
            *v *= c;
        }
    }
}

/// ADMM on `λ‖B‖₂,₁ + ‖Y − ΦS‖²_F` subject to `B = S`.
pub fn admm_l21_solve(phi: &DenseMatrix, y: &DenseMatrix, cfg: &BaselineConfig) -> Result<SolverResult> {
    admm_l21_observed(phi, y, cfg, |_, _, _| {})
}

/// [`admm_l21_solve`] calling `observe(iteration, B-step input, B)` every iteration.
pub fn admm_l21_observed<F>(
    phi: &DenseMatrix,
    y: &DenseMatrix,
    cfg: &BaselineConfig,
    mut observe: F,
) -> Result<SolverResult>
where
    F: FnMut(usize, &DMatrix<f64>, &DMatrix<f64>),
{
    check_system(phi, y)?;
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(cfg.lambda) || !positive(cfg.rho) || !positive(cfg.eps) {
        return Err(Error::Parameter(format!(
            "lambda, rho, eps must be positive (got {}, {}, {})",
            cfg.lambda, cfg.rho, cfg.eps
        )));
    }
    if cfg.max_iter == 0 {
        return Err(Error::Parameter("max_iter must be at least 1".into()));
    }
    let start = Instant::now();
    let (n, j) = (phi.cols(), y.cols());
    let rho = cfg.rho;
    let level = cfg.lambda / rho;
    let fact = FactorizedNormalMatrix::new(phi.as_inner(), rho, Backend::Plain)?;
    let two_phit_y = 2.0 * phi.as_inner().tr_mul(y.as_inner());

    let mut s = rng_stream(cfg.seed).normal_matrix(n, j);
    let mut l = DMatrix::zeros(n, j);
    let mut b = DMatrix::zeros(n, j);
    let mut history = Vec::new();
    let mut termination = Termination::MaxIter;

    for it in 1..=cfg.max_iter {
        let input = &s - &l / rho;
        b = input.clone();
        soft_threshold_in_place(&mut b, level);
        observe(it, &input, &b);
        let rhs = &two_phit_y + &b * rho + &l;
        let s_next = fact.solve_inner(&rhs);
        l += (&b - &s_next) * rho;
        if !all_finite(&s_next) || !all_finite(&l) {
            return Err(Error::Divergence { iteration: it });
        }
        let t = residual_triple(&s, &b, &s_next, &l);
        history.push(t);
        s = s_next;
        if t.primal < cfg.eps && t.change < cfg.eps && t.dual < cfg.eps {
            termination = Termination::Converged;
            break;
        }
    }

    let kkt = kkt_inner(phi.as_inner(), y.as_inner(), &s, &l);
    Ok(SolverResult {
        s_hat: DenseMatrix::from_inner_unchecked(b),
        s_final: Some(DenseMatrix::from_inner_unchecked(s)),
        iterations: history.len(),
        termination,
        residual_history: history,
        kkt_stationarity: kkt,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}
