use jointsparse::matrix::{
    frobenius_norm, l20_norm, l21_norm, rmse, row_norms, DenseMatrix, RowSupport,
};
use proptest::prelude::*;

fn entries(rows: usize, cols: usize, e: &[f64]) -> Vec<Vec<f64>> {
    (0..rows).map(|i| e[i * cols..(i + 1) * cols].to_vec()).collect()
}

/// Matrices with a random subset of rows zeroed out.
fn sparse_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..10, 1usize..5).prop_flat_map(|(r, c)| {
        (
            prop::collection::vec(-10.0f64..10.0, r * c),
            prop::collection::vec(any::<bool>(), r),
        )
            .prop_map(move |(e, zero)| {
                let mut rows = entries(r, c, &e);
                for (row, z) in rows.iter_mut().zip(zero) {
                    if z {
                        row.iter_mut().for_each(|v| *v = 0.0);
                    }
                }
                rows
            })
    })
}

fn oracle_row_norm(row: &[f64]) -> f64 {
    row.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[test]
fn random_matrix_against_direct_recomputation() {
    let mut rng = jointsparse::datagen::rng_stream(99);
    let rows: Vec<Vec<f64>> = (0..6).map(|_| (0..3).map(|_| rng.normal()).collect()).collect();
    let x = DenseMatrix::from_rows(&rows).unwrap();

    let norms = row_norms(&x);
    for (got, row) in norms.iter().zip(&rows) {
        assert!((got - oracle_row_norm(row)).abs() <= 1e-14);
    }
    let l21: f64 = rows.iter().map(|r| oracle_row_norm(r)).sum();
    assert!((l21_norm(&x) - l21).abs() <= 1e-12);
    let fro = rows.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    assert!((frobenius_norm(&x) - fro).abs() <= 1e-14);

    let other: Vec<Vec<f64>> = (0..6).map(|_| (0..3).map(|_| rng.normal()).collect()).collect();
    let y = DenseMatrix::from_rows(&other).unwrap();
    let sq: f64 = rows
        .iter()
        .flatten()
        .zip(other.iter().flatten())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let oracle = (sq / 18.0).sqrt();
    assert!((rmse(&x, &y).unwrap() - oracle).abs() <= 1e-14);
}

#[test]
fn generated_instance_has_exact_row_count() {
    let inst = jointsparse::generate(jointsparse::InstanceSpec::new(500, 150, 50, 10, 5)).unwrap();
    assert_eq!(l20_norm(&inst.s_true, 0.0), 50);
}

proptest! {
    #[test]
    fn norms_are_row_permutation_invariant(rows in sparse_matrix(), seed in any::<u64>()) {
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let n = x.rows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = jointsparse::datagen::rng_stream(seed);
        for i in (1..n).rev() {
            perm.swap(i, rng.index_in(0, i + 1));
        }
        let p = x.permute_rows(&perm).unwrap();
        prop_assert_eq!(l20_norm(&p, 0.0), l20_norm(&x, 0.0));
        prop_assert!((l21_norm(&p) - l21_norm(&x)).abs() <= 1e-12);
    }

    #[test]
    fn l20_matches_entry_scan(rows in sparse_matrix()) {
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let scanned: Vec<usize> = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.iter().any(|&v| v != 0.0))
            .map(|(i, _)| i)
            .collect();
        prop_assert_eq!(l20_norm(&x, 0.0), scanned.len());
        let support = RowSupport::of_matrix(&x, 0.0);
        prop_assert_eq!(support.indices(), &scanned[..]);
    }

    #[test]
    fn rmse_is_symmetric_and_zero_on_diagonal(a in sparse_matrix(), scale in -3.0f64..3.0) {
        let x = DenseMatrix::from_rows(&a).unwrap();
        let y = x.scaled(scale).unwrap();
        prop_assert_eq!(rmse(&x, &x).unwrap(), 0.0);
        prop_assert_eq!(rmse(&x, &y).unwrap(), rmse(&y, &x).unwrap());
    }

    #[test]
    fn l21_vanishes_only_at_zero(rows in sparse_matrix()) {
        let x = DenseMatrix::from_rows(&rows).unwrap();
        let is_zero = rows.iter().flatten().all(|&v| v == 0.0);
        prop_assert!(l21_norm(&x) >= 0.0);
        prop_assert_eq!(l21_norm(&x) == 0.0, is_zero);
    }

    #[test]
    fn l20_is_scale_invariant(rows in sparse_matrix(), c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0]) {
        let x = DenseMatrix::from_rows(&rows).unwrap();
        prop_assert_eq!(l20_norm(&x.scaled(c).unwrap(), 0.0), l20_norm(&x, 0.0));
    }
}
