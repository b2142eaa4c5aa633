//! Seeded synthetic MMV instances.
//!
//! Generation consumes a single [`RngStream`] in a fixed order:
//!
//! 1. `M·N` standard normals filling `Φ` row by row, after which every column is
//!    divided by its Euclidean norm;
//! 2. `K` uniform draws performing a partial Fisher-Yates shuffle of `0..N`, whose
//!    first `K` slots (sorted) form the row support;
//! 3. `K·J` standard normals filling the support rows of `S` in ascending row
//!    order, row by row.
//!
//! `Y = Φ·S` is then computed. The stream is ChaCha8 seeded from the 64-bit seed.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, RowSupport};
use crate::projection::{numeric_rank, spark_estimate, DEFAULT_RANK_TOL};

/// Deterministic source of standard-normal and uniform variates.
#[derive(Debug, Clone)]
pub struct RngStream(ChaCha8Rng);

pub fn rng_stream(seed: u64) -> RngStream {
    RngStream(ChaCha8Rng::seed_from_u64(seed))
}

impl RngStream {
    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.0.random()
    }

    /// Uniform integer in `lo..hi`.
    pub fn index_in(&mut self, lo: usize, hi: usize) -> usize {
        self.0.random_range(lo..hi)
    }

    /// A `rows × cols` matrix of standard normals drawn in row-major order.
    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> DMatrix<f64> {
        let entries: Vec<f64> = (0..rows * cols).map(|_| self.normal()).collect();
        DMatrix::from_row_slice(rows, cols, &entries)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InstanceSpec {
    /// Signal dimension (rows of `S`).
    pub n: usize,
    /// Measurements per sensor (rows of `Φ`).
    pub m: usize,
    /// Number of nonzero rows of `S`.
    pub k: usize,
    /// Number of sensors (columns of `S`).
    pub j: usize,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(n: usize, m: usize, k: usize, j: usize, seed: u64) -> Self {
        Self { n, m, k, j, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let Self { n, m, k, j, .. } = *self;
        if m == 0 || k == 0 || j == 0 {
            return Err(Error::Spec(format!("M, K, J must be positive (M={m}, K={k}, J={j})")));
        }
        if m >= n {
            return Err(Error::Spec(format!("need M < N, got M={m}, N={n}")));
        }
        if k > n {
            return Err(Error::Spec(format!("need K <= N, got K={k}, N={n}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub spec: InstanceSpec,
    pub phi: DenseMatrix,
    pub s_true: DenseMatrix,
    pub y: DenseMatrix,
    pub support: RowSupport,
}

impl ProblemInstance {
    /// Whether `K < (spark(Φ) + rank(Y) − 1) / 2`, the condition under which `S`
    /// is the unique sparsest solution of `Y = ΦS`.
    pub fn uniqueness_guaranteed(&self) -> bool {
        let spark = spark_estimate(self.spec.m);
        let rank = numeric_rank(&self.y, DEFAULT_RANK_TOL);
        2 * self.spec.k + 1 < spark + rank
    }
}

pub fn generate(spec: InstanceSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let InstanceSpec { n, m, k, j, seed } = spec;
    let mut rng = rng_stream(seed);

    let mut phi = rng.normal_matrix(m, n);
    for mut col in phi.column_iter_mut() {
        let norm = col.norm();
        if norm == 0.0 {
            return Err(Error::Numeric("zero column in Gaussian draw".into()));
        }
        col /= norm;
    }

    let mut rows: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let r = rng.index_in(i, n);
        rows.swap(i, r);
    }
    rows.truncate(k);
    let support = RowSupport::new(rows, n)?;

    let mut s_true = DMatrix::zeros(n, j);
    for &row in support.indices() {
        for c in 0..j {
            s_true[(row, c)] = rng.normal();
        }
    }
    let y = &phi * &s_true;

    Ok(ProblemInstance {
        spec,
        phi: DenseMatrix::new(phi)?,
        s_true: DenseMatrix::new(s_true)?,
        y: DenseMatrix::new(y)?,
        support,
    })
}
