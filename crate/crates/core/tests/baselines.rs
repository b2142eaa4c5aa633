use jointsparse::baselines::{
    admm_l21_observed, group_soft_threshold, sniht_observed, sniht_solve, solve_baseline,
    somp_with_support, BaselineConfig,
};
use jointsparse::datagen::rng_stream;
use jointsparse::matrix::{l20_norm, rmse, row_norms, DenseMatrix};
use jointsparse::{generate, InstanceSpec, Termination};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Best `k`-row least-squares fit by exhaustive support enumeration, with its residual.
fn best_support_fit(phi: &DenseMatrix, y: &DenseMatrix, k: usize) -> (f64, DMatrix<f64>) {
    let n = phi.cols();
    let mut best = (f64::INFINITY, DMatrix::zeros(n, y.cols()));
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let cols: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sub = DMatrix::from_fn(phi.rows(), k, |i, c| phi.get(i, cols[c]));
        let Some(chol) = (sub.transpose() * &sub).cholesky() else { continue };
        let coef = chol.solve(&(sub.transpose() * y.as_inner()));
        let resid = (y.as_inner() - &sub * &coef).norm();
        if resid < best.0 {
            let mut full = DMatrix::zeros(n, y.cols());
            for (r, &row) in cols.iter().enumerate() {
                full.row_mut(row).copy_from(&coef.row(r));
            }
            best = (resid, full);
        }
    }
    best
}

#[test]
fn somp_support_grows_by_one_without_repeats() {
    let inst = generate(InstanceSpec::new(100, 40, 8, 3, 2)).unwrap();
    let (res, order) = somp_with_support(&inst.phi, &inst.y, 8).unwrap();
    assert_eq!(order.len(), 8);
    let mut dedup = order.clone();
    dedup.sort_unstable();
    dedup.dedup();
    assert_eq!(dedup.len(), 8);
    assert_eq!(res.iterations, 8);
    assert_eq!(l20_norm(&res.s_hat, 0.0), 8);
    assert_eq!(res.termination, Termination::Converged);
}

#[test]
fn somp_refit_is_orthogonal() {
    for seed in 0..4 {
        let inst = generate(InstanceSpec::new(120, 40, 10, 4, seed)).unwrap();
        // under-selecting leaves a nonzero residual that must still be orthogonal
        for k in [4, 10] {
            let (res, order) = somp_with_support(&inst.phi, &inst.y, k).unwrap();
            let p = inst.phi.as_inner();
            let resid = inst.y.as_inner() - p * res.s_hat.as_inner();
            for &c in &order {
                let dot = p.column(c).transpose() * &resid;
                assert!(dot.norm() <= 1e-10, "seed {seed} k {k}: {}", dot.norm());
            }
        }
    }
}

#[test]
fn somp_matches_enumeration_when_greedy_succeeds() {
    let mut successes = 0;
    for seed in 0..10 {
        let inst = generate(InstanceSpec::new(8, 6, 2, 3, seed)).unwrap();
        let (oracle_resid, oracle) = best_support_fit(&inst.phi, &inst.y, 2);
        assert!(oracle_resid <= 1e-10);
        let (res, _) = somp_with_support(&inst.phi, &inst.y, 2).unwrap();
        let recovered = rmse(&res.s_hat, &inst.s_true).unwrap() < 1e-5;
        if recovered {
            successes += 1;
            assert!((res.s_hat.as_inner() - &oracle).norm() <= 1e-10);
        }
    }
    assert!(successes > 0);
}

#[test]
fn sniht_iterates_are_feasible_and_monotone() {
    let inst = generate(InstanceSpec::new(200, 60, 15, 4, 3)).unwrap();
    let p = inst.phi.as_inner();
    let yy = inst.y.as_inner();
    let mut objectives = vec![yy.norm_squared()];
    let res = sniht_observed(&inst.phi, &inst.y, 15, 300, |_, s| {
        assert!(l20_norm(&DenseMatrix::new(s.clone()).unwrap(), 0.0) <= 15);
        objectives.push((yy - p * s).norm_squared());
    })
    .unwrap();
    for w in objectives.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
    }
    assert_eq!(objectives.len(), res.iterations + 1);
}

#[test]
fn sniht_recovers_single_row_instances() {
    for seed in 0..5 {
        let inst = generate(InstanceSpec::new(8, 6, 1, 2, seed)).unwrap();
        let (_, oracle) = best_support_fit(&inst.phi, &inst.y, 1);
        let res = sniht_solve(&inst.phi, &inst.y, 1, 1000).unwrap();
        assert!(rmse(&res.s_hat, &inst.s_true).unwrap() <= 1e-6, "seed {seed}");
        assert!((res.s_hat.as_inner() - oracle).norm() <= 1e-6);
    }
}

#[test]
fn admm_l21_shrinkage_holds_every_iteration() {
    let inst = generate(InstanceSpec::new(100, 40, 5, 3, 1)).unwrap();
    let cfg = BaselineConfig { max_iter: 200, ..BaselineConfig::admm_l21() };
    admm_l21_observed(&inst.phi, &inst.y, &cfg, |_, input, b| {
        let before = row_norms(&DenseMatrix::new(input.clone()).unwrap());
        let after = row_norms(&DenseMatrix::new(b.clone()).unwrap());
        for (a, o) in before.iter().zip(&after) {
            assert!(o <= a);
        }
    })
    .unwrap();
}

#[test]
fn baselines_share_the_result_shape() {
    let inst = generate(InstanceSpec::new(60, 25, 4, 3, 7)).unwrap();
    for cfg in [
        BaselineConfig::somp(4),
        BaselineConfig::sniht(4),
        BaselineConfig { max_iter: 50, ..BaselineConfig::admm_l21() },
    ] {
        let res = solve_baseline(&inst.phi, &inst.y, &cfg).unwrap();
        assert_eq!(res.s_hat.shape(), (60, 3));
        assert_eq!(res.residual_history.len(), res.iterations);
        assert!(res.wall_time_seconds >= 0.0);
        assert!(res.kkt_stationarity.is_finite());
    }
}

proptest! {
    #[test]
    fn soft_threshold_identity(
        rows in prop::collection::vec(prop::collection::vec(-4.0f64..4.0, 3), 1..8),
        t in 0.0f64..3.0,
    ) {
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let out = group_soft_threshold(&x, t).unwrap();
        for (i, row) in rows.iter().enumerate() {
            let nrm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = if nrm > 0.0 { (1.0 - t / nrm).max(0.0) } else { 0.0 };
            for (c, v) in row.iter().enumerate() {
                prop_assert!((out.get(i, c) - scale * v).abs() <= 1e-14);
            }
        }
    }
}

#[test]
fn soft_threshold_with_vanishing_level_is_identity() {
    let x = DenseMatrix::new(rng_stream(4).normal_matrix(6, 3)).unwrap();
    assert_eq!(group_soft_threshold(&x, 0.0).unwrap(), x);
    let near = group_soft_threshold(&x, 1e-300).unwrap();
    assert!(rmse(&near, &x).unwrap() <= 1e-15);
}
