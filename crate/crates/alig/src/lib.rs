//! Adaptive Polyak step-size optimization with a benchmark harness.
//!
//! The library implements the ALI-G update rule — a stochastic Polyak step
//! with an additive stabilizer in the denominator, clipped at a constant
//! maximal learning-rate and followed by projection onto a feasible region
//! — alongside SPS (multiplicative denominator constant, decaying bound),
//! constant-LR SGD and the exact Polyak step as comparators. Synthetic
//! problems with exact gradients probe the interpolation regime where
//! these rules have zero-loss fixed points.
//!
//! The `harness` module and the `alig` binary drive single runs, grid
//! sweeps and paired rule comparisons from a flat key-value config format,
//! persisting per-step traces as CSV and summaries as JSON.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod optimizer;
pub mod problems;
pub mod step_rules;

pub use error::{Error, Result};
pub use geometry::{FeasibleRegion, ParamVector};
pub use optimizer::{
    run_epochs, MemoryTrace, MomentumConfig, MomentumFlavor, Optimizer, OptimizerState,
    RunOptions, RunSummary, StepRecord, TraceRow, TraceSink,
};
pub use problems::{
    check_gradients, interpolation_residual, GradCheckReport, InterpLeastSquares,
    NonInterpLeastSquares, ProblemSpec, SeparableLogistic, StochasticObjective, TwoMoonsMlp,
};
pub use step_rules::{
    alig_step_size, constant_step_size, exact_polyak_step_size, sps_step_size, step_size,
    BoundSchedule, StepInputs, StepRuleConfig,
};
