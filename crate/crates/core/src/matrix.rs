//! Dense matrices, row supports, and the norms and metrics every solver reports.
//!
//! A [`DenseMatrix`] is a validated wrapper over `nalgebra::DMatrix<f64>`: both
//! dimensions are positive and every entry is finite. The logical layout at the
//! interface is row-major (see [`DenseMatrix::from_row_major`]); storage is
//! nalgebra's column-major.

use std::io::{BufRead, BufReader, Read, Write};

use nalgebra::DMatrix;

use crate::error::{dim_err, Error, Result};

/// Row-support tolerance used when reporting supports of recovered iterates.
pub const RECOVERED_ROW_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(dim_err(
                "from_row_major",
                format!("{} entries for a {rows}x{cols} matrix", entries.len()),
            ));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, &entries))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != m) {
            return Err(dim_err(
                "from_rows",
                format!("row {bad} has {} entries, expected {m}", rows[bad].len()),
            ));
        }
        Self::from_row_major(n, m, rows.concat())
    }

    /// Wraps an nalgebra matrix after checking shape and finiteness.
    pub fn new(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(dim_err(
                "DenseMatrix::new",
                format!("empty {}x{} matrix", inner.nrows(), inner.ncols()),
            ));
        }
        if let Some(pos) = inner.iter().position(|v| !v.is_finite()) {
            let (r, c) = (pos % inner.nrows(), pos / inner.nrows());
            return Err(Error::Numeric(format!("non-finite entry at ({r}, {c})")));
        }
        Ok(Self(inner))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    /// Wraps a matrix the caller has already proven finite and non-empty.
    pub(crate) fn from_inner_unchecked(inner: DMatrix<f64>) -> Self {
        debug_assert!(inner.iter().all(|v| v.is_finite()));
        Self(inner)
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn as_inner(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// Returns a copy with the rows reordered so that output row `i` is input row `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        let n = self.rows();
        let mut seen = vec![false; n];
        if perm.len() != n || !perm.iter().all(|&p| p < n && !std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Parameter("row permutation is not a bijection".into()));
        }
        Ok(Self(DMatrix::from_fn(n, self.cols(), |i, j| self.0[(perm[i], j)])))
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(&self.0 * c)
    }
}

impl AsRef<DMatrix<f64>> for DenseMatrix {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl TryFrom<DMatrix<f64>> for DenseMatrix {
    type Error = Error;

    fn try_from(value: DMatrix<f64>) -> Result<Self> {
        Self::new(value)
    }
}

/// A sorted set of distinct row indices below a fixed row count.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RowSupport {
    indices: Vec<usize>,
}

impl RowSupport {
    /// Sorts `indices`; fails on duplicates or indices `>= n_rows`.
    pub fn new(mut indices: Vec<usize>, n_rows: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parameter("duplicate row index in support".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= n_rows {
                return Err(Error::Parameter(format!(
                    "row index {last} out of range for {n_rows} rows"
                )));
            }
        }
        Ok(Self { indices })
    }

    /// Rows whose Euclidean norm exceeds `tol`.
    pub fn of_matrix(x: &DenseMatrix, tol: f64) -> Self {
        let indices = row_norms(x)
            .into_iter()
            .enumerate()
            .filter(|&(_, v)| v > tol)
            .map(|(i, _)| i)
            .collect();
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, row: usize) -> bool {
        self.indices.binary_search(&row).is_ok()
    }
}

pub(crate) fn row_norms_of(x: &DMatrix<f64>) -> Vec<f64> {
    let mut sq = vec![0.0; x.nrows()];
    // column-major storage: accumulate squares column by column
    for col in x.column_iter() {
        for (acc, v) in sq.iter_mut().zip(col.iter()) {
            *acc += v * v;
        }
    }
    sq.into_iter().map(f64::sqrt).collect()
}

/// Euclidean norm of every row.
pub fn row_norms(x: &DenseMatrix) -> Vec<f64> {
    row_norms_of(&x.0)
}

/// Number of rows with Euclidean norm strictly above `tol` (the ℓ2,0 "norm").
///
/// Use `tol = 0` for exact data and [`RECOVERED_ROW_TOL`] for solver output.
pub fn l20_norm(x: &DenseMatrix, tol: f64) -> usize {
    row_norms(x).into_iter().filter(|&v| v > tol).count()
}

/// Sum of row Euclidean norms.
pub fn l21_norm(x: &DenseMatrix) -> f64 {
    row_norms(x).into_iter().sum()
}

pub fn frobenius_norm(x: &DenseMatrix) -> f64 {
    x.0.norm()
}

/// `‖Ŝ − S‖_F / √(N·J)`.
pub fn rmse(s_hat: &DenseMatrix, s: &DenseMatrix) -> Result<f64> {
    if s_hat.shape() != s.shape() {
        return Err(dim_err(
            "rmse",
            format!("{:?} vs {:?}", s_hat.shape(), s.shape()),
        ));
    }
    let (n, j) = s.shape();
    Ok((&s_hat.0 - &s.0).norm() / ((n * j) as f64).sqrt())
}

/// Writes the fixture text format: a `rows cols` line, then one line per row.
pub fn write_matrix_text<W: Write>(x: &DenseMatrix, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", x.rows(), x.cols())?;
    for row in x.0.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_matrix_text<R: Read>(input: R) -> Result<DenseMatrix> {
    let mut lines = BufReader::new(input)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("missing `rows cols` header".into()))??;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Format(format!("bad header {header:?}: {e}")))?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Format(format!("bad header {header:?}")));
    };
    let mut entries = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::Format(format!("expected {rows} rows, found {r}")))??;
        let before = entries.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|e| Error::Format(format!("row {r}: {tok:?}: {e}")))?;
            entries.push(v);
        }
        if entries.len() - before != cols {
            return Err(Error::Format(format!(
                "row {r} has {} entries, expected {cols}",
                entries.len() - before
            )));
        }
    }
    DenseMatrix::from_row_major(rows, cols, entries)
}
