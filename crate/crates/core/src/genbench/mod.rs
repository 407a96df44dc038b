//! Random instance generation and the benchmark suite.

mod generate;
mod suite;

pub use generate::{generate, GenError, GenSpec, HORIZONS, LUNCH_HORIZON, MAX_GEN_POIS};
pub use suite::{
    aggregate, run_instances, run_suite, suite_instances, write_outputs, AggregateRow, ResultRow, RunStatus,
    SuiteConfig, SuiteInstance, SuiteReport,
};
