//! Matching losses with analytic gradients, projected BFGS, the gradient
//! descent baseline and parameter sweeps.

mod bfgs;
mod gd;
mod problem;
mod sweep;

pub use bfgs::{bfgs_reparam, log_csv, BfgsConfig, LogRow, OptimResult, StopReason};
pub use gd::{gd_reparam, GdConfig};
pub use problem::{
    finite_difference_gradient, gradient_relative_error, CurveProblem, LossProblem, SurfaceProblem, SINGULAR_TOL,
};
pub use sweep::{run_sweep, sweep_csv, SweepRow};
