//! Projection onto the row-sparse set `{X : ‖X‖₂,₀ ≤ s}` and the sparsity budget `s`.

use std::cmp::Ordering;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{row_norms_of, DenseMatrix};

/// Relative singular-value cutoff used by [`sparsity_budget`].
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Keeps the `s` rows of largest Euclidean norm and zeroes the rest.
///
/// When norms tie at the boundary the row with the smaller index wins. If `X`
/// already has at most `s` nonzero rows it is returned unchanged.
pub fn project_row_sparse(x: &DenseMatrix, s: usize) -> Result<DenseMatrix> {
    check_budget(s, x.rows())?;
    let mut out = x.as_inner().clone();
    project_in_place(&mut out, s);
    Ok(DenseMatrix::from_inner_unchecked(out))
}

pub(crate) fn check_budget(s: usize, rows: usize) -> Result<()> {
    if s == 0 || s > rows {
        return Err(Error::Parameter(format!(
            "sparsity budget s = {s} must lie in [1, {rows}]"
        )));
    }
    Ok(())
}

/// Indices of the `s` largest-norm rows, sorted ascending.
pub(crate) fn top_rows(norms: &[f64], s: usize) -> Vec<usize> {
    let n = norms.len();
    let mut idx: Vec<usize> = (0..n).collect();
    if s < n {
        // larger norm first, then smaller index; a strict total order
        let by_rank = |&a: &usize, &b: &usize| -> Ordering {
            norms[b].total_cmp(&norms[a]).then(a.cmp(&b))
        };
        idx.select_nth_unstable_by(s - 1, by_rank);
        idx.truncate(s);
    }
    idx.sort_unstable();
    idx
}

/// Projects `x` in place and returns the kept rows (sorted).
pub(crate) fn project_in_place(x: &mut DMatrix<f64>, s: usize) -> Vec<usize> {
    let n = x.nrows();
    let kept = top_rows(&row_norms_of(x), s);
    if kept.len() < n {
        let mut keep = vec![false; n];
        for &i in &kept {
            keep[i] = true;
        }
        for mut col in x.column_iter_mut() {
            for (v, &k) in col.iter_mut().zip(&keep) {
                if !k {
                    *v = 0.0;
                }
            }
        }
    }
    kept
}

/// Spark estimate for an i.i.d. Gaussian `M × N` sensing matrix with `M < N`.
pub fn spark_estimate(m: usize) -> usize {
    m + 1
}

/// Number of singular values above `tol` times the largest one.
pub fn numeric_rank(y: &DenseMatrix, tol: f64) -> usize {
    let sv = y.as_inner().clone().singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&v| v > tol * top).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparsityBudget {
    pub s: usize,
    pub spark_estimate: usize,
    pub rank_y: usize,
}

impl SparsityBudget {
    /// `s = ⌊(spark + rank − 2) / 2⌋`, clamped below at 1.
    pub fn from_parts(spark_estimate: usize, rank_y: usize) -> Self {
        let s = ((spark_estimate + rank_y).saturating_sub(2) / 2).max(1);
        Self {
            s,
            spark_estimate,
            rank_y,
        }
    }
}

/// Sparsity budget for an `m`-row sensing matrix and measurements `y`.
pub fn sparsity_budget(phi_rows: usize, y: &DenseMatrix) -> SparsityBudget {
    SparsityBudget::from_parts(spark_estimate(phi_rows), numeric_rank(y, DEFAULT_RANK_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{frobenius_norm, l20_norm};

    #[test]
    fn already_sparse_is_unchanged() {
        let x = DenseMatrix::from_rows(&[vec![0., 0.], vec![1., 2.], vec![0., 0.], vec![-3., 0.5]])
            .unwrap();
        assert_eq!(project_row_sparse(&x, 3).unwrap(), x);
        assert_eq!(project_row_sparse(&x, 2).unwrap(), x);
    }

    #[test]
    fn keeps_top_two_rows() {
        let x = DenseMatrix::from_rows(&[vec![3., 4.], vec![1., 0.], vec![0., 3.]]).unwrap();
        let p = project_row_sparse(&x, 2).unwrap();
        assert_eq!(p.to_rows(), vec![vec![3., 4.], vec![0., 0.], vec![0., 3.]]);
    }

    #[test]
    fn ties_prefer_smaller_index() {
        let x = DenseMatrix::from_rows(&[vec![1., 0.], vec![0., 2.], vec![0., 1.], vec![1., 0.]])
            .unwrap();
        let p = project_row_sparse(&x, 2).unwrap();
        assert_eq!(p.to_rows(), vec![vec![1., 0.], vec![0., 2.], vec![0., 0.], vec![0., 0.]]);
    }

    #[test]
    fn invalid_budget_is_rejected() {
        let x = DenseMatrix::zeros(3, 2).unwrap();
        assert!(matches!(project_row_sparse(&x, 0), Err(Error::Parameter(_))));
        assert!(matches!(project_row_sparse(&x, 4), Err(Error::Parameter(_))));
    }

    #[test]
    fn projection_of_zero_is_zero() {
        let x = DenseMatrix::zeros(5, 2).unwrap();
        let p = project_row_sparse(&x, 1).unwrap();
        assert_eq!(frobenius_norm(&p), 0.0);
        assert_eq!(l20_norm(&p, 0.0), 0);
    }

    #[test]
    fn spark_and_budget_arithmetic() {
        assert_eq!(spark_estimate(150), 151);
        assert_eq!(spark_estimate(1), 2);
        assert_eq!(spark_estimate(1500), 1501);
        assert_eq!(SparsityBudget::from_parts(151, 10).s, 79);
        assert_eq!(SparsityBudget::from_parts(2, 0).s, 1);
        assert_eq!(SparsityBudget::from_parts(105, 10).s, 56);
    }

    #[test]
    fn numeric_rank_small_cases() {
        assert_eq!(numeric_rank(&DenseMatrix::zeros(4, 3).unwrap(), DEFAULT_RANK_TOL), 0);
        let mut e = vec![0.0; 15];
        for i in 0..3 {
            e[i * 3 + i] = 1.0 + i as f64;
        }
        let x = DenseMatrix::from_row_major(5, 3, e).unwrap();
        assert_eq!(numeric_rank(&x, DEFAULT_RANK_TOL), 3);
        // rank-1 outer product
        let r1 = DenseMatrix::from_rows(&[vec![1., 2.], vec![2., 4.], vec![3., 6.]]).unwrap();
        assert_eq!(numeric_rank(&r1, DEFAULT_RANK_TOL), 1);
    }

    #[test]
    fn budget_from_measurements() {
        let y = DenseMatrix::zeros(1, 1).unwrap();
        let b = sparsity_budget(1, &y);
        assert_eq!((b.s, b.spark_estimate, b.rank_y), (1, 2, 0));
    }
}
