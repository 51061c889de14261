//! Experiment orchestration: deterministic single trials, Monte-Carlo
//! sweeps over parameter grids, and trace-file ingestion.
//!
//! Everything here is pinned to `f64`. Reproducibility is structural: every
//! random draw in a trial comes from a seed derived with [`derive_seed`]
//! from `(base_seed, cell, trial)`, so re-running a sweep — at any worker
//! count — produces byte-identical tables.

mod config;
mod seeds;
mod sweep;
mod trial;

pub use config::{parse_config, read_config, ConfigDoc};
pub use seeds::derive_seed;
pub use sweep::{run_sweep, Axis, AxisParam, CellResult, SweepResult, SweepSpec};
pub use trial::{run_trial, SuccessRule, TrialConfig, TrialReport, EXACT_RESIDUAL_TOL};

pub use crate::trace::{
    emit_trace, ingest_trace, parse_trace, read_sidecar, sidecar_path, TraceData, TraceMeta,
    FOLD_RANGE_SLACK,
};
