//! Exact plan search by depth-first branch and bound.
//!
//! The search enumerates visit sequences (which POIs, in which order, and
//! where the lunch stop goes). Every search node is a sequence prefix and
//! carries a Pareto set of *labels*, one per non-dominated way of choosing
//! the durations of the visits placed so far. Three devices keep the tree
//! small:
//!
//! * label dominance inside a node, specialised per metric and occupation
//!   preference (e.g. under M1 with High occupation only the earliest finish
//!   and the longest visiting time matter);
//! * a state memo: two prefixes over the same POI set ending at the same
//!   place are compared label by label, so permutations collapse;
//! * an admissible lower bound that, for every possible number of further
//!   visits, combines the best still-collectable value, the cheapest
//!   remaining travel and the tightest occupation estimate.
//!
//! Durations are searched on a grid `{dmin, dmin+g, …} ∪ {dmax}`. The winning
//! sequence is rebuilt with [`schedule_sequence`], validated and rescored by
//! the scoring module, so the reported objective is exactly the metric of the
//! returned plan.

mod indexed;
mod schedule;
mod search;

pub use schedule::{schedule_sequence, ScheduleError};

use crate::model::{DurationMin, Plan, TouristProblem};
use crate::scoring::{self, exact, MetricKind, PenaltyBreakdown, Rational};
use crate::validate::validate;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Default duration grid step in minutes.
pub const DEFAULT_GRID: u32 = 5;
/// Largest number of recommended POIs the solver accepts.
pub const MAX_POIS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    /// Step of the duration grid in minutes (≥ 1).
    pub duration_grid: u32,
    /// Stop after expanding this many nodes.
    pub node_limit: Option<u64>,
    /// Stop after this much wall-clock time.
    pub time_limit: Option<Duration>,
    /// Shuffle the branching order with this seed.
    pub seed: Option<u64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { duration_grid: DEFAULT_GRID, node_limit: None, time_limit: None, seed: None }
    }
}

impl SolveOptions {
    pub fn with_grid(mut self, grid: u32) -> Self {
        self.duration_grid = grid;
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn with_node_limit(mut self, limit: u64) -> Self {
        self.node_limit = Some(limit);
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("no feasible plan exists")]
    Infeasible,
    #[error("search limit reached before any feasible plan was found")]
    NoSolutionWithinLimits,
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("{n} POIs exceed the limit of {max} for this method")]
    TooLarge { n: usize, max: usize },
}

/// An optimal (or best-found) plan with its score and search statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub metric: MetricKind,
    pub plan: Plan,
    #[serde(with = "exact")]
    pub objective: Rational,
    /// `objective` as a decimal, for reports.
    pub objective_value: f64,
    pub breakdown: PenaltyBreakdown,
    pub nodes_explored: u64,
    pub elapsed_ms: u64,
    pub proven_optimal: bool,
}

/// Duration grid `{dmin, dmin+step, …} ∪ {dmax}`, ascending.
pub fn duration_grid(dmin: DurationMin, dmax: DurationMin, step: u32) -> Vec<DurationMin> {
    let step = step.max(1);
    let mut out: Vec<DurationMin> = (dmin..dmax).step_by(step as usize).collect();
    out.push(dmax);
    out
}

/// Tie-break key of a plan: visited ids with durations, in visiting order.
pub fn plan_key(plan: &Plan) -> Vec<(&str, DurationMin)> {
    plan.visits.iter().map(|v| (v.poi_id.as_str(), v.dur)).collect()
}

/// Total order used to pick among optimal plans: objective, then fewer POI
/// visits, then the lexicographically smallest sequence of (id, duration).
pub fn compare_candidates(a_obj: &Rational, a: &Plan, b_obj: &Rational, b: &Plan) -> Ordering {
    a_obj.cmp(b_obj).then(a.poi_visit_count().cmp(&b.poi_visit_count())).then_with(|| plan_key(a).cmp(&plan_key(b)))
}

/// Finds a plan minimizing `kind`.
pub fn solve(problem: &TouristProblem, kind: MetricKind, opts: &SolveOptions) -> Result<SolveResult, SolveError> {
    if opts.duration_grid == 0 {
        return Err(SolveError::InvalidOptions("duration grid must be at least 1 minute".into()));
    }
    let n = problem.visits().len();
    if n > MAX_POIS {
        return Err(SolveError::TooLarge { n, max: MAX_POIS });
    }
    let started = Instant::now();
    let ix = indexed::Indexed::new(problem, opts.duration_grid);
    let outcome = search::run(&ix, problem, kind, opts, started);
    let Some(best) = outcome.best else {
        return Err(if outcome.complete { SolveError::Infeasible } else { SolveError::NoSolutionWithinLimits });
    };

    let ids: Vec<&str> = best.sequence.iter().map(|&i| ix.ids[i].as_str()).collect();
    let plan = schedule_sequence(problem, &ids, &best.durations)
        .expect("search only produces sequences the scheduler accepts");
    let violations = validate(problem, &plan);
    assert!(violations.is_empty(), "solver produced an invalid plan: {violations:?}");
    let breakdown = scoring::breakdown(problem, &plan, kind.occup_variant());
    let objective = breakdown.metric(kind);
    assert_eq!(objective, best.objective, "search objective disagrees with scoring");

    Ok(SolveResult {
        metric: kind,
        plan,
        objective_value: scoring::to_f64(&objective),
        objective,
        breakdown,
        nodes_explored: outcome.nodes,
        elapsed_ms: started.elapsed().as_millis() as u64,
        proven_optimal: outcome.complete,
    })
}
