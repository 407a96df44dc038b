//! Brute-force optimum for small instances.
//!
//! Enumerates every subset of the POIs that fit the horizon, every order of
//! each subset (with the lunch stop at every possible position) and every
//! combination of grid durations. Each candidate is scheduled at the
//! earliest feasible times by this module's own code; feasible candidates
//! are scored by the scoring module and the winners are checked by the
//! validator. None of the solver's pruning machinery is used: the only
//! shortcut is that once a prefix is infeasible, its completions are counted
//! as rejected without being visited, which keeps the enumeration count
//! exact.
//!
//! Subsets are independent shards; results are merged in subset order with
//! the solver's tie-break rule, so sequential and parallel runs agree.

use crate::exec::Execution;
use crate::model::{total_time, MoveAction, Plan, TouristProblem, VisitAction, RESTAURANT};
use crate::scoring::{self, metric_from_totals, MetricKind, PlanTotals, Rational, ScoreContext};
use crate::solver::{duration_grid, SolveError, SolveResult};
use crate::validate::validate;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::time::Instant;

/// Largest instance the oracle agrees to enumerate.
pub const MAX_ORACLE_POIS: usize = 7;

/// Results for several metrics from one enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub results: Vec<SolveResult>,
    /// Candidates predicted by the closed-form count.
    pub candidates_expected: u64,
    /// Candidates accounted for by the enumeration (visited or rejected with their prefix).
    pub candidates_enumerated: u64,
    /// Candidates whose schedule was feasible.
    pub feasible: u64,
}

/// Exact optimum of `kind` over the duration grid `grid`.
pub fn oracle_solve(problem: &TouristProblem, kind: MetricKind, grid: u32) -> Result<SolveResult, SolveError> {
    let mut report = oracle_solve_all(problem, &[kind], grid, Execution::Sequential)?;
    Ok(report.results.remove(0))
}

/// Exact optima of several metrics from a single enumeration.
pub fn oracle_solve_all(
    problem: &TouristProblem,
    kinds: &[MetricKind],
    grid: u32,
    exec: Execution,
) -> Result<OracleReport, SolveError> {
    if grid == 0 {
        return Err(SolveError::InvalidOptions("duration grid must be at least 1 minute".into()));
    }
    let n = problem.visits().len();
    if n > MAX_ORACLE_POIS {
        return Err(SolveError::TooLarge { n, max: MAX_ORACLE_POIS });
    }
    let started = Instant::now();
    let space = Space::new(problem, grid);
    let masks: Vec<u32> = (0..(1u32 << space.pois.len())).collect();
    let shards = exec.map_collect(&masks, |&mask| space.enumerate_subset(mask, kinds));

    let mut best: Vec<Option<Candidate>> = vec![None; kinds.len()];
    let mut enumerated = 0;
    let mut feasible = 0;
    for shard in shards {
        enumerated += shard.enumerated;
        feasible += shard.feasible;
        for (slot, cand) in best.iter_mut().zip(shard.best) {
            if let Some(cand) = cand {
                if slot.as_ref().is_none_or(|b| cand.cmp(b) == Ordering::Less) {
                    *slot = Some(cand);
                }
            }
        }
    }

    let mut results = Vec::with_capacity(kinds.len());
    for (&kind, cand) in kinds.iter().zip(best) {
        let cand = cand.ok_or(SolveError::Infeasible)?;
        let plan = space.build_plan(&cand.sequence, &cand.durations);
        let violations = validate(problem, &plan);
        assert!(violations.is_empty(), "oracle produced an invalid plan: {violations:?}");
        let breakdown = scoring::breakdown(problem, &plan, kind.occup_variant());
        let objective = breakdown.metric(kind);
        assert_eq!(objective, cand.objective, "oracle objective disagrees with scoring");
        results.push(SolveResult {
            metric: kind,
            plan,
            objective_value: scoring::to_f64(&objective),
            objective,
            breakdown,
            nodes_explored: enumerated,
            elapsed_ms: started.elapsed().as_millis() as u64,
            proven_optimal: true,
        });
    }
    Ok(OracleReport {
        results,
        candidates_expected: space.expected_count(),
        candidates_enumerated: enumerated,
        feasible,
    })
}

/// Closed-form size of the enumeration space: for every subset `S` of the
/// POIs whose `dmin` fits the horizon, `|S|!` orders (times `|S|+1` lunch
/// positions when lunch is required) times the product of grid sizes.
pub fn expected_candidate_count(problem: &TouristProblem, grid: u32) -> u64 {
    Space::new(problem, grid).expected_count()
}

#[derive(Debug, Clone)]
struct Candidate {
    objective: Rational,
    visits: u32,
    /// `(rank of id, duration)` per visit; ranks follow id order.
    key: Vec<(u32, u32)>,
    sequence: Vec<usize>,
    durations: Vec<u32>,
}

impl Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.objective.cmp(&other.objective).then(self.visits.cmp(&other.visits)).then_with(|| self.key.cmp(&other.key))
    }
}

struct Shard {
    best: Vec<Option<Candidate>>,
    enumerated: u64,
    feasible: u64,
}

/// Element of a candidate sequence: a POI (index into `pois`) or lunch.
const LUNCH: usize = usize::MAX;

struct Space<'a> {
    problem: &'a TouristProblem,
    score: ScoreContext,
    /// Recommendation indices of the POIs that fit the horizon.
    pois: Vec<usize>,
    grids: Vec<Vec<u32>>,
    /// Rank of each candidate POI id, and of the restaurant, in id order.
    ranks: Vec<u32>,
    lunch_rank: u32,
}

impl<'a> Space<'a> {
    fn new(problem: &'a TouristProblem, grid: u32) -> Self {
        let horizon = total_time(problem);
        let recs = problem.visits();
        let pois: Vec<usize> = (0..recs.len()).filter(|&i| recs[i].dmin <= horizon).collect();
        let grids = pois.iter().map(|&i| duration_grid(recs[i].dmin, recs[i].dmax, grid)).collect();
        let mut names: Vec<&str> = pois.iter().map(|&i| recs[i].poi_id.as_str()).collect();
        names.push(RESTAURANT);
        let mut sorted = names.clone();
        sorted.sort_unstable();
        let rank_of = |name: &str| sorted.iter().position(|s| *s == name).expect("present") as u32;
        let ranks = names[..pois.len()].iter().map(|n| rank_of(n)).collect();
        Space { problem, score: ScoreContext::new(problem), pois, grids, ranks, lunch_rank: rank_of(RESTAURANT) }
    }

    fn has_lunch(&self) -> bool {
        self.problem.lunch().is_some()
    }

    fn id(&self, element: usize) -> &str {
        if element == LUNCH {
            RESTAURANT
        } else {
            &self.problem.visits()[self.pois[element]].poi_id
        }
    }

    fn grid_size(&self, element: usize) -> u64 {
        if element == LUNCH {
            1
        } else {
            self.grids[element].len() as u64
        }
    }

    fn expected_count(&self) -> u64 {
        let mut total = 0;
        for mask in 0..(1u32 << self.pois.len()) {
            let members: Vec<usize> = (0..self.pois.len()).filter(|&i| mask & (1 << i) != 0).collect();
            let k = members.len() as u64;
            let orders: u64 = (1..=k).product::<u64>() * if self.has_lunch() { k + 1 } else { 1 };
            let durations: u64 = members.iter().map(|&i| self.grid_size(i)).product();
            total += orders * durations;
        }
        total
    }

    /// Number of full candidates extending a prefix whose unused elements are `rest`.
    fn completions(&self, rest: &[usize]) -> u64 {
        let orders: u64 = (1..=rest.len() as u64).product();
        orders * rest.iter().map(|&e| self.grid_size(e)).product::<u64>()
    }

    fn enumerate_subset(&self, mask: u32, kinds: &[MetricKind]) -> Shard {
        let mut elements: Vec<usize> = (0..self.pois.len()).filter(|&i| mask & (1 << i) != 0).collect();
        if self.has_lunch() {
            elements.push(LUNCH);
        }
        let mut walk = Walk {
            space: self,
            kinds,
            best: vec![None; kinds.len()],
            best_f64: vec![f64::INFINITY; kinds.len()],
            enumerated: 0,
            feasible: 0,
            sequence: Vec::with_capacity(elements.len()),
            durations: Vec::with_capacity(elements.len()),
        };
        let route = self.problem.route();
        walk.extend(&elements, &route.start_loc, route.t_start, Tally::default());
        Shard { best: walk.best, enumerated: walk.enumerated, feasible: walk.feasible }
    }

    /// Earliest-start plan of a sequence known to be feasible.
    fn build_plan(&self, sequence: &[usize], durations: &[u32]) -> Plan {
        let route = self.problem.route();
        let travel = self.problem.travel();
        let mut plan = Plan::default();
        let mut loc = route.start_loc.clone();
        let mut time = route.t_start;
        for (&e, &d) in sequence.iter().zip(durations) {
            let id = self.id(e).to_string();
            let leg = travel.get(&loc, &id).expect("complete travel table");
            plan.moves.push(MoveAction { from_loc: loc, to_loc: id.clone(), t_s: time, dur: leg });
            let start = if e == LUNCH {
                self.problem.lunch().expect("lunch element").l_start
            } else {
                let hours = self.problem.hours_of(&id).expect("hours");
                (time + leg).max(hours.open)
            };
            plan.visits.push(VisitAction { poi_id: id.clone(), t_s: start, dur: d });
            time = start + d;
            loc = id;
        }
        let leg = travel.get(&loc, &route.final_loc).expect("complete travel table");
        plan.moves.push(MoveAction { from_loc: loc, to_loc: route.final_loc.clone(), t_s: time, dur: leg });
        plan
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    visits: u32,
    value: u64,
    value_time: u64,
    poi_time: u64,
    journey: u64,
    busy: u64,
}

struct Walk<'s, 'a> {
    space: &'s Space<'a>,
    kinds: &'s [MetricKind],
    best: Vec<Option<Candidate>>,
    best_f64: Vec<f64>,
    enumerated: u64,
    feasible: u64,
    sequence: Vec<usize>,
    durations: Vec<u32>,
}

impl Walk<'_, '_> {
    fn extend(&mut self, remaining: &[usize], loc: &str, time: u32, tally: Tally) {
        let problem = self.space.problem;
        let route = problem.route();
        if remaining.is_empty() {
            self.enumerated += 1;
            let leg = problem.travel().get(loc, &route.final_loc).expect("complete travel table");
            if time + leg <= route.t_end {
                self.feasible += 1;
                let journey = tally.journey + u64::from(leg);
                let busy = tally.busy + u64::from(leg);
                let totals = PlanTotals {
                    visits: tally.visits,
                    value: tally.value,
                    value_time: tally.value_time,
                    poi_time: tally.poi_time,
                    journey,
                    free_time: (u64::from(total_time(problem)) - busy) as u32,
                };
                self.record(&totals);
            }
            return;
        }
        for (pos, &e) in remaining.iter().enumerate() {
            let mut rest = remaining.to_vec();
            rest.remove(pos);
            let id = self.space.id(e);
            let leg = problem.travel().get(loc, id).expect("complete travel table");
            let arrive = time + leg;
            if e == LUNCH {
                let lunch = problem.lunch().expect("lunch element");
                if arrive > lunch.l_start {
                    self.enumerated += self.space.completions(&rest);
                    continue;
                }
                let next = Tally {
                    journey: tally.journey + u64::from(leg),
                    busy: tally.busy + u64::from(leg) + u64::from(lunch.duration()),
                    ..tally
                };
                self.sequence.push(e);
                self.durations.push(lunch.duration());
                self.extend(&rest, id, lunch.l_end, next);
                self.sequence.pop();
                self.durations.pop();
                continue;
            }
            let rec = &problem.visits()[self.space.pois[e]];
            let hours = problem.hours_of(id).expect("hours");
            let start = arrive.max(hours.open);
            for &d in &self.space.grids[e] {
                let finish = start + d;
                if finish > hours.close || finish > route.t_end {
                    self.enumerated += self.space.completions(&rest);
                    continue;
                }
                let v = u64::from(rec.value);
                let next = Tally {
                    visits: tally.visits + 1,
                    value: tally.value + v,
                    value_time: tally.value_time + v * u64::from(d),
                    poi_time: tally.poi_time + u64::from(d),
                    journey: tally.journey + u64::from(leg),
                    busy: tally.busy + u64::from(leg) + u64::from(d),
                };
                self.sequence.push(e);
                self.durations.push(d);
                self.extend(&rest, id, finish, next);
                self.sequence.pop();
                self.durations.pop();
            }
        }
    }

    fn record(&mut self, totals: &PlanTotals) {
        for (i, &kind) in self.kinds.iter().enumerate() {
            let approx = self.space.score.metric_f64(totals, kind);
            if approx > self.best_f64[i] + 1e-9 {
                continue;
            }
            let objective = metric_from_totals(self.space.problem, totals, kind);
            let cand = Candidate {
                objective,
                visits: totals.visits,
                key: self
                    .sequence
                    .iter()
                    .zip(&self.durations)
                    .map(|(&e, &d)| (if e == LUNCH { self.space.lunch_rank } else { self.space.ranks[e] }, d))
                    .collect(),
                sequence: self.sequence.clone(),
                durations: self.durations.clone(),
            };
            if self.best[i].as_ref().is_none_or(|b| cand.cmp(b) == Ordering::Less) {
                self.best_f64[i] = approx;
                self.best[i] = Some(cand);
            }
        }
    }
}
