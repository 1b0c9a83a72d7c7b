//! Batch Monte Carlo harness around the `robustmc` estimators.
//!
//! Experiments run as pure functions of `(options, base seed)`: repetition
//! `r` draws from stream `base_seed ^ r`, results are gathered into a
//! repetition-indexed buffer and reduced by pairwise summation, so the CSV
//! output is byte-identical no matter how many worker threads run.

pub mod commands;
pub mod config;
pub mod harness;
pub mod manifest;

pub use commands::bias_table::{run_bias_table, BiasCell, BiasTableOpts, ScaleMode, TrimMode};
pub use commands::scale_sweep::{run_scale_sweep, ScaleSweepOpts, SweepReport, SweepRow};
pub use commands::theory_report::{run_theory_report, TheoryReportOpts, TheoryRow};
pub use commands::verify::{run_verify, CheckResult, VerifyOpts};
