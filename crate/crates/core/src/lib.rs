//! Personalized tourist agenda optimization.
//!
//! A [`TouristProblem`] bundles the route details a
//! user provides, the recommended points of interest with their value and
//! duration interval, opening hours and travel times. Plans are scored with
//! four preference penalties combined into the M1/M2/M3/M1' metrics,
//! checked by a normative validator, searched to optimality by a
//! branch-and-bound solver and cross-checked by an exhaustive oracle.
//!
//! ```
//! use agenda_core::model::TouristProblem;
//! use agenda_core::scoring::MetricKind;
//! use agenda_core::solver::{solve, SolveOptions};
//!
//! let doc = r#"{
//!   "route": {"t_start": 540, "t_end": 720, "start_loc": "hotel", "final_loc": "hotel",
//!             "mode": "walk", "pref_visits": "many", "pref_occup": "high"},
//!   "vmax": 300,
//!   "visits": [{"id": "museum", "value": 280, "dmin": 60, "dmax": 120}],
//!   "hours": [{"id": "museum", "open": 600, "close": 1080}],
//!   "travel": [{"from": "hotel", "to": "museum", "minutes": 15},
//!              {"from": "museum", "to": "hotel", "minutes": 15}]
//! }"#;
//! let problem = TouristProblem::load(doc.as_bytes()).unwrap();
//! let result = solve(&problem, MetricKind::M1, &SolveOptions::default()).unwrap();
//! assert_eq!(result.plan.visits.len(), 1);
//! assert!(result.proven_optimal);
//! ```

pub mod exec;
pub mod genbench;
pub mod model;
pub mod oracle;
pub mod pddl;
pub mod scoring;
pub mod solver;
pub mod validate;

pub use exec::Execution;
pub use model::{Plan, TouristProblem};
pub use scoring::{MetricKind, PenaltyBreakdown, Rational};
pub use solver::{solve, SolveOptions, SolveResult};

/// Version of the JSON document formats (instances, plans, reports).
pub const SCHEMA_VERSION: &str = "1";
