//! Experiment specs, per-trial seeding, the trial runner and aggregation.
//!
//! Per-trial seeds are `base_seed XOR digest(N, M, K, J, t)` where `digest` folds
//! the five values through SplitMix64 starting from `0x9E3779B97F4A7C15`. The
//! seed depends only on the grid point and trial index, so reordering the grid
//! or the solver list never changes which instance a trial sees. The ADMM
//! starting point is seeded from `splitmix64(trial_seed ^ 0x5EED)`.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use jointsparse::admm::{solve, Backend, SolverConfig, SolverResult};
use jointsparse::baselines::{solve_baseline, BaselineConfig};
use jointsparse::matrix::rmse;
use jointsparse::projection::sparsity_budget;
use jointsparse::{generate, InstanceSpec, ProblemInstance};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{BenchError, Result};

pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_SUCCESS_THRESHOLD: f64 = 1e-5;

fn default_trials() -> usize {
    DEFAULT_TRIALS
}
fn default_threshold() -> f64 {
    DEFAULT_SUCCESS_THRESHOLD
}
fn default_max_iter() -> usize {
    1000
}
fn default_eps() -> f64 {
    1e-6
}
fn default_true() -> bool {
    true
}
fn one() -> f64 {
    1.0
}
fn l21_lambda() -> f64 {
    1e-6
}
fn l21_rho() -> f64 {
    1e-5
}
fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub grid: Vec<GridTemplate>,
    pub solvers: Vec<SolverSpec>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_threshold")]
    pub success_threshold: f64,
}

/// One block of the grid: the cartesian product of its four axes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridTemplate {
    #[serde(deserialize_with = "one_or_many")]
    pub n: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub m: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub k: Vec<usize>,
    #[serde(deserialize_with = "one_or_many")]
    pub j: Vec<usize>,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Axis {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(match Axis::deserialize(d)? {
        Axis::One(v) => vec![v],
        Axis::Many(v) => v,
    })
}

impl GridTemplate {
    pub fn single(n: usize, m: usize, k: usize, j: usize) -> Self {
        Self {
            n: vec![n],
            m: vec![m],
            k: vec![k],
            j: vec![j],
        }
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &m in &self.m {
                for &k in &self.k {
                    for &j in &self.j {
                        out.push(GridPoint { n, m, k, j });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub j: usize,
}

impl GridPoint {
    pub fn instance(&self, seed: u64) -> InstanceSpec {
        InstanceSpec::new(self.n, self.m, self.k, self.j, seed)
    }
}

/// How the ℓ2,0 solver's row budget `s` is chosen for an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum SparsityPolicy {
    /// `s = K + offset`, capped at `N`.
    KPlus {
        #[serde(default = "two")]
        offset: usize,
    },
    Fixed {
        s: usize,
    },
    /// `s = ⌊(spark(Φ) + rank(Y) − 2)/2⌋` with spark estimated as `M + 1`.
    Theory,
}

impl Default for SparsityPolicy {
    fn default() -> Self {
        SparsityPolicy::KPlus { offset: 2 }
    }
}

impl SparsityPolicy {
    pub fn budget(&self, inst: &ProblemInstance) -> usize {
        let n = inst.spec.n;
        match *self {
            SparsityPolicy::KPlus { offset } => (inst.spec.k + offset).min(n),
            SparsityPolicy::Fixed { s } => s,
            SparsityPolicy::Theory => sparsity_budget(inst.spec.m, &inst.y).s.min(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmmL20Spec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default = "one")]
    pub rho: f64,
    #[serde(default)]
    pub sparsity: SparsityPolicy,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_true")]
    pub criterion: bool,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default = "default_eps")]
    pub eps_primal: f64,
    #[serde(default = "default_eps")]
    pub eps_change: f64,
    #[serde(default = "default_eps")]
    pub eps_dual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmmL21Spec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default = "l21_lambda")]
    pub lambda: f64,
    #[serde(default = "l21_rho")]
    pub rho: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SompSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnihtSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl Default for AdmmL20Spec {
    fn default() -> Self {
        Self {
            label: None,
            rho: one(),
            sparsity: SparsityPolicy::default(),
            max_iter: default_max_iter(),
            criterion: true,
            backend: Backend::Plain,
            eps_primal: default_eps(),
            eps_change: default_eps(),
            eps_dual: default_eps(),
        }
    }
}

impl Default for AdmmL21Spec {
    fn default() -> Self {
        Self {
            label: None,
            lambda: l21_lambda(),
            rho: l21_rho(),
            max_iter: default_max_iter(),
            eps: default_eps(),
        }
    }
}

impl Default for SnihtSpec {
    fn default() -> Self {
        Self {
            label: None,
            max_iter: default_max_iter(),
        }
    }
}

/// A solver entry in a config, tagged by its `"solver"` key.
///
/// SOMP and SNIHT are given the true row count `K` of each instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "solver", rename_all = "snake_case")]
pub enum SolverSpec {
    AdmmL20(AdmmL20Spec),
    AdmmL21(AdmmL21Spec),
    Somp(SompSpec),
    Sniht(SnihtSpec),
}

/// Solver kinds accepted in configs and by `--solver`.
pub const SOLVER_KINDS: [&str; 4] = ["admm_l20", "admm_l21", "somp", "sniht"];

// Hand-written so that errors inside a variant keep the offending field name,
// which serde's buffered internal tagging loses.
impl<'de> Deserialize<'de> for SolverSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        use serde_json::{Map, Value};

        fn body<T: serde::de::DeserializeOwned, E: serde::de::Error>(v: Value) -> std::result::Result<T, E> {
            serde_path_to_error::deserialize(v).map_err(|e| {
                let path = e.path().to_string();
                let inner = e.into_inner();
                if path == "." {
                    E::custom(inner)
                } else {
                    E::custom(format_args!("field `{path}`: {inner}"))
                }
            })
        }

        let mut map = Map::deserialize(d)?;
        let kind = match map.remove("solver") {
            Some(Value::String(k)) => k,
            Some(other) => {
                return Err(D::Error::custom(format_args!("field `solver` must be a string, got {other}")))
            }
            None => return Err(D::Error::missing_field("solver")),
        };
        let rest = Value::Object(map);
        match kind.as_str() {
            "admm_l20" => body(rest).map(SolverSpec::AdmmL20),
            "admm_l21" => body(rest).map(SolverSpec::AdmmL21),
            "somp" => body(rest).map(SolverSpec::Somp),
            "sniht" => body(rest).map(SolverSpec::Sniht),
            other => Err(D::Error::unknown_variant(other, &SOLVER_KINDS)),
        }
    }
}

impl SolverSpec {
    /// ℓ2,0 ADMM with the default `ρ = 1`, 1000 iterations and `1e-6` thresholds.
    pub fn admm_l20(sparsity: SparsityPolicy, backend: Backend, criterion: bool) -> Self {
        SolverSpec::AdmmL20(AdmmL20Spec {
            sparsity,
            backend,
            criterion,
            ..AdmmL20Spec::default()
        })
    }

    pub fn admm_l21() -> Self {
        SolverSpec::AdmmL21(AdmmL21Spec::default())
    }

    pub fn somp() -> Self {
        SolverSpec::Somp(SompSpec { label: None })
    }

    pub fn sniht() -> Self {
        SolverSpec::Sniht(SnihtSpec::default())
    }

    fn label_slot(&mut self) -> &mut Option<String> {
        match self {
            SolverSpec::AdmmL20(s) => &mut s.label,
            SolverSpec::AdmmL21(s) => &mut s.label,
            SolverSpec::Somp(s) => &mut s.label,
            SolverSpec::Sniht(s) => &mut s.label,
        }
    }

    pub fn with_label(mut self, new: impl Into<String>) -> Self {
        *self.label_slot() = Some(new.into());
        self
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SolverSpec::AdmmL20(_) => "admm_l20",
            SolverSpec::AdmmL21(_) => "admm_l21",
            SolverSpec::Somp(_) => "somp",
            SolverSpec::Sniht(_) => "sniht",
        }
    }

    /// The name used in reports.
    pub fn label(&self) -> String {
        let explicit = match self {
            SolverSpec::AdmmL20(s) => &s.label,
            SolverSpec::AdmmL21(s) => &s.label,
            SolverSpec::Somp(s) => &s.label,
            SolverSpec::Sniht(s) => &s.label,
        };
        if let Some(l) = explicit {
            return l.clone();
        }
        match self {
            SolverSpec::AdmmL20(s) if s.backend == Backend::Smw => "admm-l20-smw".into(),
            SolverSpec::AdmmL20(_) => "admm-l20".into(),
            SolverSpec::AdmmL21(_) => "admm-l21".into(),
            SolverSpec::Somp(_) => "somp".into(),
            SolverSpec::Sniht(_) => "sniht".into(),
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(BenchError::config(format!("{field}.{name}"), format!("must be positive, got {v}")))
            }
        };
        let iters = |v: usize| {
            if v >= 1 {
                Ok(())
            } else {
                Err(BenchError::config(format!("{field}.max_iter"), "must be at least 1"))
            }
        };
        match self {
            SolverSpec::AdmmL20(a) => {
                positive("rho", a.rho)?;
                positive("eps_primal", a.eps_primal)?;
                positive("eps_change", a.eps_change)?;
                positive("eps_dual", a.eps_dual)?;
                if let SparsityPolicy::Fixed { s: 0 } = a.sparsity {
                    return Err(BenchError::config(format!("{field}.sparsity.s"), "must be at least 1"));
                }
                iters(a.max_iter)
            }
            SolverSpec::AdmmL21(a) => {
                positive("lambda", a.lambda)?;
                positive("rho", a.rho)?;
                positive("eps", a.eps)?;
                iters(a.max_iter)
            }
            SolverSpec::Somp(_) => Ok(()),
            SolverSpec::Sniht(a) => iters(a.max_iter),
        }
    }

    /// Runs this solver on one instance.
    pub fn run(&self, inst: &ProblemInstance, solver_seed: u64) -> jointsparse::Result<SolverResult> {
        let (phi, y, k) = (&inst.phi, &inst.y, inst.spec.k);
        match self {
            SolverSpec::AdmmL20(a) => {
                let cfg = SolverConfig {
                    rho: a.rho,
                    s: a.sparsity.budget(inst),
                    max_iter: a.max_iter,
                    eps_primal: a.eps_primal,
                    eps_change: a.eps_change,
                    eps_dual: a.eps_dual,
                    backend: a.backend,
                    seed: solver_seed,
                    criterion_enabled: a.criterion,
                };
                solve(phi, y, &cfg)
            }
            SolverSpec::AdmmL21(a) => {
                let cfg = BaselineConfig {
                    lambda: a.lambda,
                    rho: a.rho,
                    max_iter: a.max_iter,
                    eps: a.eps,
                    seed: solver_seed,
                    ..BaselineConfig::admm_l21()
                };
                solve_baseline(phi, y, &cfg)
            }
            SolverSpec::Somp(_) => solve_baseline(phi, y, &BaselineConfig::somp(k)),
            SolverSpec::Sniht(a) => {
                let cfg = BaselineConfig {
                    max_iter: a.max_iter,
                    ..BaselineConfig::sniht(k)
                };
                solve_baseline(phi, y, &cfg)
            }
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(BenchError::config("trials", "must be at least 1"));
        }
        if self.grid.is_empty() {
            return Err(BenchError::config("grid", "must not be empty"));
        }
        if self.solvers.is_empty() {
            return Err(BenchError::config("solvers", "must not be empty"));
        }
        if !(self.success_threshold.is_finite() && self.success_threshold > 0.0) {
            return Err(BenchError::config(
                "success_threshold",
                format!("must be positive, got {}", self.success_threshold),
            ));
        }
        for (i, g) in self.grid.iter().enumerate() {
            for (axis, vals) in [("n", &g.n), ("m", &g.m), ("k", &g.k), ("j", &g.j)] {
                if vals.is_empty() {
                    return Err(BenchError::config(format!("grid[{i}].{axis}"), "must not be empty"));
                }
            }
            for p in g.points() {
                p.instance(0)
                    .validate()
                    .map_err(|e| BenchError::config(format!("grid[{i}]"), e.to_string()))?;
            }
        }
        let mut labels = HashMap::new();
        for (i, s) in self.solvers.iter().enumerate() {
            s.validate(&format!("solvers[{i}]"))?;
            if let Some(prev) = labels.insert(s.label(), i) {
                return Err(BenchError::config(
                    format!("solvers[{i}].label"),
                    format!("duplicates solvers[{prev}] ({})", s.label()),
                ));
            }
        }
        Ok(())
    }

    /// Distinct grid points in first-appearance order.
    pub fn grid_points(&self) -> Vec<GridPoint> {
        let mut seen = std::collections::HashSet::new();
        self.grid
            .iter()
            .flat_map(GridTemplate::points)
            .filter(|p| seen.insert(*p))
            .collect()
    }

    /// Keeps only solvers whose label or kind is in `names`.
    pub fn retain_solvers(&mut self, names: &[String]) -> Result<()> {
        if names.is_empty() {
            return Ok(());
        }
        for name in names {
            if !self
                .solvers
                .iter()
                .any(|s| &s.label() == name || s.kind() == name)
            {
                let mut available: Vec<String> = Vec::new();
                let names = self.solvers.iter().map(SolverSpec::label);
                for a in names.chain(SOLVER_KINDS.iter().map(|s| s.to_string())) {
                    if !available.contains(&a) {
                        available.push(a);
                    }
                }
                return Err(BenchError::UnknownSolver {
                    name: name.clone(),
                    available: available.join(", "),
                });
            }
        }
        self.solvers
            .retain(|s| names.iter().any(|n| n == &s.label() || n == s.kind()));
        Ok(())
    }
}

const DIGEST_INIT: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Instance seed for trial `t` at `point`.
pub fn trial_seed(base_seed: u64, point: &GridPoint, t: usize) -> u64 {
    let digest = [point.n, point.m, point.k, point.j, t]
        .iter()
        .fold(DIGEST_INIT, |h, &v| splitmix64(h ^ v as u64));
    base_seed ^ digest
}

pub fn solver_seed(trial_seed: u64) -> u64 {
    splitmix64(trial_seed ^ 0x5EED)
}

/// Outcome of one (instance, solver) pair. Field names match the CSV header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub instance_id: String,
    pub solver: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "J")]
    pub j: usize,
    pub seed: u64,
    /// Missing when the solver failed.
    pub rmse: Option<f64>,
    pub success: bool,
    pub iterations: usize,
    pub time_s: f64,
    pub termination: String,
}

impl TrialRecord {
    pub fn point(&self) -> GridPoint {
        GridPoint {
            n: self.n,
            m: self.m,
            k: self.k,
            j: self.j,
        }
    }
}

pub fn instance_id(point: &GridPoint, t: usize, seed: u64) -> String {
    format!(
        "n{}-m{}-k{}-j{}-t{t}-{seed:016x}",
        point.n, point.m, point.k, point.j
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "J")]
    pub j: usize,
    pub solver: String,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Over trials that produced an estimate.
    pub mean_rmse: f64,
    pub std_rmse: f64,
    pub mean_time: f64,
    pub std_time: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<AggregateRow>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

/// Runs one solver on one instance, turning errors and panics into a failed record.
pub fn run_trial(
    inst: &ProblemInstance,
    solver: &SolverSpec,
    t: usize,
    success_threshold: f64,
) -> TrialRecord {
    run_trial_with(inst, &solver.label(), t, success_threshold, |inst, seed| {
        solver.run(inst, seed)
    })
}

/// [`run_trial`] for an arbitrary solve closure, which receives the instance and
/// the starting-point seed.
pub fn run_trial_with<F>(
    inst: &ProblemInstance,
    label: &str,
    t: usize,
    success_threshold: f64,
    f: F,
) -> TrialRecord
where
    F: FnOnce(&ProblemInstance, u64) -> jointsparse::Result<SolverResult>,
{
    let point = GridPoint {
        n: inst.spec.n,
        m: inst.spec.m,
        k: inst.spec.k,
        j: inst.spec.j,
    };
    let seed = inst.spec.seed;
    let outcome = catch_unwind(AssertUnwindSafe(|| f(inst, solver_seed(seed))));
    let (rmse_val, iterations, time_s, termination) = match outcome {
        Ok(Ok(res)) => (
            rmse(&res.s_hat, &inst.s_true).ok(),
            res.iterations,
            res.wall_time_seconds,
            res.termination.to_string(),
        ),
        Ok(Err(jointsparse::Error::Divergence { iteration })) => {
            (None, iteration, 0.0, format!("diverged@{iteration}"))
        }
        Ok(Err(e)) => (None, 0, 0.0, format!("error: {e}")),
        Err(payload) => (None, 0, 0.0, format!("panic: {}", panic_message(payload))),
    };
    TrialRecord {
        instance_id: instance_id(&point, t, seed),
        solver: label.to_string(),
        n: point.n,
        m: point.m,
        k: point.k,
        j: point.j,
        seed,
        rmse: rmse_val,
        success: rmse_val.is_some_and(|e| e < success_threshold),
        iterations,
        time_s,
        termination,
    }
}

/// (grid point index, solver index, trial index)
type SortKey = (usize, usize, usize);

/// Runs every (grid point, trial) instance through every solver and aggregates.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<ExperimentOutput> {
    spec.validate()?;
    let points = spec.grid_points();
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..spec.trials).map(move |t| (p, t)))
        .collect();

    let run_task = |&(pi, t): &(usize, usize)| -> Result<Vec<(SortKey, TrialRecord)>> {
        let point = points[pi];
        let inst = generate(point.instance(trial_seed(spec.base_seed, &point, t)))?;
        Ok(spec
            .solvers
            .iter()
            .enumerate()
            .map(|(si, solver)| ((pi, si, t), run_trial(&inst, solver, t, spec.success_threshold)))
            .collect())
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build()?;
    let nested: Vec<Result<Vec<_>>> = pool.install(|| tasks.par_iter().map(run_task).collect());

    let mut keyed = Vec::with_capacity(tasks.len() * spec.solvers.len());
    for chunk in nested {
        keyed.extend(chunk?);
    }
    keyed.sort_by_key(|(key, _)| *key);
    let records: Vec<TrialRecord> = keyed.into_iter().map(|(_, r)| r).collect();
    let aggregates = aggregate(&records);
    Ok(ExperimentOutput {
        records,
        aggregates,
    })
}

/// Two-pass mean and sample (n − 1) standard deviation; `(NaN, NaN)` when empty.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups records by (grid point, solver) in order of first appearance.
pub fn aggregate(records: &[TrialRecord]) -> Vec<AggregateRow> {
    let mut order: Vec<(GridPoint, String)> = Vec::new();
    let mut groups: HashMap<(GridPoint, String), Vec<&TrialRecord>> = HashMap::new();
    for r in records {
        let key = (r.point(), r.solver.clone());
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let rs = &groups[&key];
            let rmses: Vec<f64> = rs.iter().filter_map(|r| r.rmse).collect();
            let times: Vec<f64> = rs.iter().map(|r| r.time_s).collect();
            let successes = rs.iter().filter(|r| r.success).count();
            let (mean_rmse, std_rmse) = mean_std(&rmses);
            let (mean_time, std_time) = mean_std(&times);
            let mean_iterations =
                rs.iter().map(|r| r.iterations as f64).sum::<f64>() / rs.len() as f64;
            let (point, solver) = key;
            AggregateRow {
                n: point.n,
                m: point.m,
                k: point.k,
                j: point.j,
                solver,
                trials: rs.len(),
                successes,
                success_rate: successes as f64 / rs.len() as f64,
                mean_rmse,
                std_rmse,
                mean_time,
                std_time,
                mean_iterations,
            }
        })
        .collect()
}
