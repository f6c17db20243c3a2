//! Experiment harness: config parsing, single runs, grid sweeps and paired
//! rule comparisons, with CSV/JSON persistence.

pub mod compare;
pub mod config;
pub mod run;
pub mod sweep;
pub mod trace;

pub use compare::{compare_rules, CompareEntry, CompareTable};
pub use config::{
    parse_config, parse_grid, parse_problem_arg, parse_rules, ExperimentConfig, RawConfig,
    KNOWN_KEYS,
};
pub use run::{export_dataset, run};
pub use sweep::{sweep, CellOutcome, SortMetric, SweepCell, SweepTable};
pub use trace::{CsvTrace, TeeTrace, TRACE_HEADER};
