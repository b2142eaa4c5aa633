use jointsparse::baselines::{solve_baseline, BaselineConfig};
use jointsparse::matrix::rmse;
use jointsparse::{generate, Backend, Error, InstanceSpec};
use jointsparse_bench::experiment::{
    aggregate, run_trial_with, AdmmL20Spec, GridPoint, RunOptions, TrialRecord,
};
use jointsparse_bench::report::{
    aggregate_path, emit_report, json_path, read_aggregates_csv, read_report_json,
    read_trials_csv, trials_path, ReportFormat,
};
use jointsparse_bench::{
    run_experiment, trial_seed, ExperimentSpec, GridTemplate, SolverSpec, SparsityPolicy,
};
use proptest::prelude::*;

fn small_spec() -> ExperimentSpec {
    ExperimentSpec {
        name: "small".into(),
        grid: vec![GridTemplate {
            n: vec![60],
            m: vec![25],
            k: vec![3, 5],
            j: vec![3],
        }],
        solvers: vec![
            SolverSpec::admm_l20(SparsityPolicy::default(), Backend::Plain, true),
            SolverSpec::somp(),
            SolverSpec::sniht(),
        ],
        trials: 4,
        base_seed: 11,
        success_threshold: 1e-5,
    }
}

fn without_time(records: &[TrialRecord]) -> Vec<TrialRecord> {
    records.iter().map(|r| TrialRecord { time_s: 0.0, ..r.clone() }).collect()
}

#[test]
fn reruns_are_identical_apart_from_time() {
    let spec = small_spec();
    let a = run_experiment(&spec, &RunOptions { threads: Some(1) }).unwrap();
    let b = run_experiment(&spec, &RunOptions { threads: Some(2) }).unwrap();
    assert_eq!(without_time(&a.records), without_time(&b.records));
    assert_eq!(a.records.len(), 2 * 4 * 3);
}

#[test]
fn records_are_sorted_by_point_solver_trial() {
    let out = run_experiment(&small_spec(), &RunOptions::default()).unwrap();
    let labels = ["admm-l20", "somp", "sniht"];
    let mut i = 0;
    for k in [3, 5] {
        for label in labels {
            for t in 0..4 {
                let r = &out.records[i];
                assert_eq!((r.k, r.solver.as_str()), (k, label));
                assert!(r.instance_id.contains(&format!("-t{t}-")));
                i += 1;
            }
        }
    }
}

#[test]
fn every_solver_sees_the_same_instance() {
    let spec = small_spec();
    let out = run_experiment(&spec, &RunOptions::default()).unwrap();
    for chunk in out.records.chunks(4 * 3) {
        for t in 0..4 {
            let same_trial: Vec<&TrialRecord> = chunk.iter().skip(t).step_by(4).collect();
            assert_eq!(same_trial.len(), 3);
            assert!(same_trial.iter().all(|r| r.seed == same_trial[0].seed));
            assert!(same_trial.iter().all(|r| r.instance_id == same_trial[0].instance_id));
        }
    }
    // the SOMP rmse is reproducible from the recorded seed alone
    for r in out.records.iter().filter(|r| r.solver == "somp") {
        let inst = generate(InstanceSpec::new(r.n, r.m, r.k, r.j, r.seed)).unwrap();
        let res = solve_baseline(&inst.phi, &inst.y, &BaselineConfig::somp(r.k)).unwrap();
        assert_eq!(Some(rmse(&res.s_hat, &inst.s_true).unwrap()), r.rmse);
    }
}

#[test]
fn grid_order_does_not_change_instances() {
    let spec = small_spec();
    let mut reversed = spec.clone();
    reversed.grid[0].k.reverse();
    reversed.solvers.reverse();
    let a = run_experiment(&spec, &RunOptions::default()).unwrap();
    let b = run_experiment(&reversed, &RunOptions::default()).unwrap();
    for r in &a.records {
        let twin = b
            .records
            .iter()
            .find(|o| o.instance_id == r.instance_id && o.solver == r.solver)
            .unwrap();
        assert_eq!(twin.seed, r.seed);
        assert_eq!(twin.rmse, r.rmse);
    }
    let p = GridPoint { n: 60, m: 25, k: 3, j: 3 };
    assert_eq!(a.records[0].seed, trial_seed(11, &p, 0));
}

#[test]
fn failing_trials_do_not_abort_the_sweep() {
    let mut spec = small_spec();
    spec.solvers.insert(
        0,
        SolverSpec::AdmmL20(AdmmL20Spec {
            label: Some("oversized".into()),
            sparsity: SparsityPolicy::Fixed { s: 1000 },
            max_iter: 10,
            ..AdmmL20Spec::default()
        }),
    );
    let out = run_experiment(&spec, &RunOptions::default()).unwrap();
    let failed: Vec<_> = out.records.iter().filter(|r| r.solver == "oversized").collect();
    assert_eq!(failed.len(), 8);
    for r in failed {
        assert!(!r.success && r.rmse.is_none());
        assert!(r.termination.starts_with("error:"), "{}", r.termination);
    }
    assert_eq!(out.records.len(), 2 * 4 * 4);
    let somp = out.aggregates.iter().find(|a| a.solver == "somp").unwrap();
    assert!(somp.successes > 0);
}

#[test]
fn panics_and_divergence_become_failed_records() {
    let inst = generate(InstanceSpec::new(30, 12, 2, 2, 4)).unwrap();
    let prev = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let panicked = run_trial_with(&inst, "boom", 3, 1e-5, |_, _| panic!("solver blew up"));
    std::panic::set_hook(prev);
    assert_eq!(panicked.termination, "panic: solver blew up");
    assert!(!panicked.success && panicked.rmse.is_none());
    assert_eq!(panicked.solver, "boom");
    assert!(panicked.instance_id.contains("-t3-"));

    let diverged = run_trial_with(&inst, "div", 0, 1e-5, |_, _| Err(Error::Divergence { iteration: 7 }));
    assert_eq!(diverged.termination, "diverged@7");
    assert_eq!(diverged.iterations, 7);
    assert!(!diverged.success);
}

fn record(rmse: Option<f64>, time_s: f64, success: bool) -> TrialRecord {
    TrialRecord {
        instance_id: "n10-m5-k1-j1-t0-0000000000000000".into(),
        solver: "x".into(),
        n: 10,
        m: 5,
        k: 1,
        j: 1,
        seed: 0,
        rmse,
        success,
        iterations: 3,
        time_s,
        termination: "converged".into(),
    }
}

/// Welford's running mean and sample variance.
fn welford(xs: &[f64]) -> (f64, f64) {
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, &x) in xs.iter().enumerate() {
        let d = x - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (x - mean);
    }
    (mean, (m2 / (xs.len() - 1) as f64).sqrt())
}

#[test]
fn aggregate_matches_independent_oracle() {
    let mut rng = jointsparse::datagen::rng_stream(3);
    let rmses: Vec<f64> = (0..10).map(|_| rng.uniform() * 1e-3).collect();
    let times: Vec<f64> = (0..10).map(|_| rng.uniform()).collect();
    let records: Vec<TrialRecord> = rmses
        .iter()
        .zip(&times)
        .map(|(&e, &t)| record(Some(e), t, e < 5e-4))
        .collect();
    let rows = aggregate(&records);
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    let (mr, sr) = welford(&rmses);
    let (mt, st) = welford(&times);
    assert!((row.mean_rmse - mr).abs() <= 1e-14);
    assert!((row.std_rmse - sr).abs() <= 1e-14);
    assert!((row.mean_time - mt).abs() <= 1e-14);
    assert!((row.std_time - st).abs() <= 1e-14);
    let expected = rmses.iter().filter(|&&e| e < 5e-4).count();
    assert_eq!(row.successes, expected);
    assert_eq!(row.success_rate, expected as f64 / 10.0);
}

proptest! {
    #[test]
    fn success_rate_times_trials_is_integral(flags in prop::collection::vec(any::<bool>(), 1..40)) {
        let records: Vec<TrialRecord> = flags
            .iter()
            .map(|&ok| record(ok.then_some(1e-9), 0.1, ok))
            .collect();
        let row = &aggregate(&records)[0];
        let scaled = row.success_rate * row.trials as f64;
        prop_assert!((scaled - scaled.round()).abs() < 1e-9);
        prop_assert_eq!(row.successes, flags.iter().filter(|&&f| f).count());
    }
}

#[test]
fn csv_and_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec();
    spec.trials = 1;
    spec.grid[0].k = vec![3];
    let mut out = run_experiment(&spec, &RunOptions::default()).unwrap();
    assert_eq!(out.records.len(), 3);
    out.records[1].rmse = None;
    out.records[2].termination = "error: \"quoted\", with comma".into();

    let files = emit_report(&spec, &out, ReportFormat::Both, dir.path()).unwrap();
    assert_eq!(files.len(), 3);

    let text = std::fs::read_to_string(trials_path(dir.path(), "small")).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert_eq!(
        text.lines().next().unwrap(),
        "instance_id,solver,N,M,K,J,seed,rmse,success,iterations,time_s,termination"
    );
    assert_eq!(read_trials_csv(&trials_path(dir.path(), "small")).unwrap(), out.records);
    assert_eq!(read_aggregates_csv(&aggregate_path(dir.path(), "small")).unwrap(), out.aggregates);

    let report = read_report_json(&json_path(dir.path(), "small")).unwrap();
    assert_eq!(report.spec, spec);
    assert_eq!(report.records, out.records);
    assert_eq!(report.aggregates, out.aggregates);
}

#[test]
fn unwritable_directory_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let spec = small_spec();
    let out = jointsparse_bench::ExperimentOutput { records: vec![], aggregates: vec![] };
    let err = emit_report(&spec, &out, ReportFormat::Csv, &blocker.join("sub")).unwrap_err();
    assert!(matches!(err, jointsparse_bench::BenchError::Io { .. }), "{err}");
}

#[test]
fn spec_json_round_trips_with_defaults() {
    let text = r#"{
        "name": "cfg",
        "grid": [{"n": 100, "m": 40, "k": [5, 10], "j": 2}],
        "solvers": [
            {"solver": "admm_l20", "sparsity": {"policy": "theory"}, "backend": "smw"},
            {"solver": "admm_l21", "max_iter": 50},
            {"solver": "somp", "label": "greedy"}
        ]
    }"#;
    let spec: ExperimentSpec = serde_json::from_str(text).unwrap();
    assert_eq!(spec.trials, 100);
    assert_eq!(spec.success_threshold, 1e-5);
    assert_eq!(spec.grid_points().len(), 2);
    assert_eq!(spec.solvers[0], SolverSpec::admm_l20(SparsityPolicy::Theory, Backend::Smw, true));
    assert_eq!(spec.solvers[2].label(), "greedy");
    let again: ExperimentSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(again, spec);
}
