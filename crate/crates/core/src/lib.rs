//! Joint-sparse recovery for the multiple-measurement-vector (MMV) model `Y = Φ S`.
//!
//! The central solver is an ADMM scheme over the splitting
//! `min ‖Y − ΦS‖²_F + I(‖B‖₂,₀ ≤ s)` subject to `B = S`, where the `B` step is a
//! row-wise hard-thresholding projection and the `S` step is a cached
//! positive-definite solve (directly, or through the Woodbury identity when `M ≪ N`).
//!
//! Alongside it live three comparison solvers ([`baselines`]), seeded synthetic
//! instance generation ([`datagen`]) and the norm/metric helpers they share ([`matrix`]).

pub mod admm;
pub mod baselines;
pub mod datagen;
pub mod error;
pub mod matrix;
pub mod projection;

pub use admm::{
    solve, Backend, FactorizedNormalMatrix, ResidualTriple, SolverConfig, SolverResult,
    Termination,
};
pub use baselines::{BaselineAlgorithm, BaselineConfig};
pub use datagen::{generate, InstanceSpec, ProblemInstance};
pub use error::{Error, Result};
pub use matrix::{DenseMatrix, RowSupport};
pub use projection::{project_row_sparse, SparsityBudget};
