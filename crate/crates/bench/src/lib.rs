//! Experiment harness for the `jointsparse` solvers.
//!
//! An [`ExperimentSpec`] describes a grid of instance shapes, a list of solvers and
//! a trial count. [`run_experiment`] generates one seeded instance per
//! (grid point, trial), hands the same instance to every solver, and aggregates
//! RMSE, success rate and solve time per (grid point, solver). Reports are written
//! as CSV or JSON by [`report`].

pub mod cli;
pub mod error;
pub mod experiment;
pub mod presets;
pub mod report;
pub mod trace;

pub use error::{BenchError, Result};
pub use experiment::{
    run_experiment, trial_seed, AggregateRow, ExperimentOutput, ExperimentSpec, GridTemplate,
    SolverSpec, SparsityPolicy, TrialRecord,
};
