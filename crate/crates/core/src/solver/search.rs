//! Depth-first branch and bound over visit sequences with Pareto labels.

use super::indexed::Indexed;
use super::SolveOptions;
use crate::model::{OccupationPreference, TouristProblem};
use crate::scoring::{metric_from_totals, MetricKind, OccupVariant, PlanTotals, Rational, ScoreContext};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::time::Instant;

/// Slack for comparing floating-point bounds against the incumbent.
const EPS: f64 = 1e-9;
const NO_TRAIL: u32 = u32::MAX;
/// Number of dominance coordinates besides the clock.
const DIMS: usize = 4;

/// One way of reaching a search node: the clock plus the running sums the
/// metrics depend on, and a back-pointer into the duration trail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Label {
    time: u32,
    journey: u32,
    poi_time: u32,
    value_time: u64,
    trail: u32,
    /// Dominance coordinates, smaller is better.
    cost: [i64; DIMS],
}

/// Which label coordinates matter for the remaining objective.
#[derive(Debug, Clone, Copy)]
enum Coord {
    Journey,
    /// Visiting time; prefer more.
    MorePoiTime,
    /// Visiting time; prefer less.
    LessPoiTime,
    /// Value-weighted visiting time; prefer more.
    MoreValueTime,
    /// Busy time (visits, lunch, moves); prefer more.
    MoreBusy,
    /// Busy time; prefer less.
    LessBusy,
    /// Journey plus busy time; prefer less.
    LessJourneyBusy,
}

/// Coordinates whose component-wise order guarantees that every completion
/// of the better label scores at least as well as the same completion of the
/// worse one (given the same POI set, position and lunch status).
fn dominance_coords(kind: MetricKind, occup: OccupationPreference) -> Vec<Coord> {
    use Coord::*;
    use OccupationPreference as O;
    match (kind, occup) {
        // Journey and free time cancel: only visiting time matters.
        (MetricKind::M1 | MetricKind::M1Prime, O::High) => vec![MorePoiTime],
        (MetricKind::M1 | MetricKind::M1Prime, O::Indif) => vec![Journey],
        (MetricKind::M1, O::Low) => vec![Journey, LessBusy],
        (MetricKind::M1Prime, O::Low) => vec![LessJourneyBusy],
        (MetricKind::M2, O::High) => vec![MoreValueTime, MoreBusy],
        (MetricKind::M2, O::Indif) => vec![MoreValueTime],
        (MetricKind::M2, O::Low) => vec![MoreValueTime, LessBusy],
        // Journey and free time cancel; the weighted mean needs equal weights.
        (MetricKind::M3, O::High) => vec![MoreValueTime, MorePoiTime, LessPoiTime],
        (MetricKind::M3, O::Indif) => vec![Journey, MoreValueTime, LessPoiTime],
        (MetricKind::M3, O::Low) => vec![Journey, LessBusy, MoreValueTime, LessPoiTime],
    }
}

#[derive(Debug, Clone)]
pub(super) struct Best {
    pub objective: Rational,
    visits: u32,
    key: Vec<(u32, u32)>,
    pub sequence: Vec<usize>,
    pub durations: Vec<u32>,
}

pub(super) struct Outcome {
    pub best: Option<Best>,
    pub nodes: u64,
    pub complete: bool,
}

/// Addable POIs of a node, summarised for the bound.
struct Addable {
    members: Vec<usize>,
    /// Prefix sums over the `r` best members for each quantity.
    top_value: Vec<u64>,
    top_value_dmax: Vec<u64>,
    top_dmax: Vec<u64>,
    low_min_in: Vec<u64>,
    low_dmin: Vec<u64>,
    low_reach: Vec<u64>,
    max_value: u64,
}

fn prefix(mut xs: Vec<u64>, descending: bool) -> Vec<u64> {
    if descending {
        xs.sort_unstable_by(|a, b| b.cmp(a));
    } else {
        xs.sort_unstable();
    }
    let mut out = Vec::with_capacity(xs.len() + 1);
    out.push(0);
    let mut acc = 0;
    for x in xs {
        acc += x;
        out.push(acc);
    }
    out
}

struct Search<'a> {
    ix: &'a Indexed,
    problem: &'a TouristProblem,
    kind: MetricKind,
    score: ScoreContext,
    pref_occup: OccupationPreference,
    coords: Vec<Coord>,
    order: Vec<usize>,
    arena: Vec<(u32, u32)>,
    sequence: Vec<usize>,
    memo: HashMap<(u32, usize, bool), Vec<Label>>,
    best: Option<Best>,
    best_f64: f64,
    nodes: u64,
    node_limit: u64,
    deadline: Option<Instant>,
    stopped: bool,
}

pub(super) fn run(
    ix: &Indexed,
    problem: &TouristProblem,
    kind: MetricKind,
    opts: &SolveOptions,
    started: Instant,
) -> Outcome {
    let route = problem.route();
    let mut order: Vec<usize> = (0..ix.n).collect();
    // Highest value per minimum minute first.
    order.sort_by(|&a, &b| {
        let lhs = ix.value[a] * u64::from(ix.dmin[b]);
        let rhs = ix.value[b] * u64::from(ix.dmin[a]);
        rhs.cmp(&lhs).then(ix.rank[a].cmp(&ix.rank[b]))
    });
    if let Some(seed) = opts.seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    if ix.lunch.is_some() {
        order.push(ix.rest());
    }

    let mut s = Search {
        ix,
        problem,
        kind,
        score: ScoreContext::new(problem),
        pref_occup: route.pref_occup,
        coords: dominance_coords(kind, route.pref_occup),
        order,
        arena: Vec::new(),
        sequence: Vec::new(),
        memo: HashMap::new(),
        best: None,
        best_f64: f64::INFINITY,
        nodes: 1,
        node_limit: opts.node_limit.unwrap_or(u64::MAX),
        deadline: opts.time_limit.map(|d| started + d),
        stopped: false,
    };
    let mut root = Label { time: ix.t_start, journey: 0, poi_time: 0, value_time: 0, trail: NO_TRAIL, cost: [0; DIMS] };
    s.set_cost(&mut root, false);
    s.node(0, ix.start(), false, 0, 0, vec![root]);
    Outcome { best: s.best, nodes: s.nodes, complete: !s.stopped }
}

impl<'a> Search<'a> {
    fn lunch_len(&self, lunch_done: bool) -> u32 {
        if lunch_done {
            self.ix.lunch_len()
        } else {
            0
        }
    }

    fn set_cost(&self, l: &mut Label, lunch_done: bool) {
        let busy = i64::from(l.poi_time) + i64::from(l.journey) + i64::from(self.lunch_len(lunch_done));
        let mut cost = [0i64; DIMS];
        for (slot, c) in cost.iter_mut().zip(&self.coords) {
            *slot = match c {
                Coord::Journey => i64::from(l.journey),
                Coord::MorePoiTime => -i64::from(l.poi_time),
                Coord::LessPoiTime => i64::from(l.poi_time),
                Coord::MoreValueTime => -(l.value_time as i64),
                Coord::MoreBusy => -busy,
                Coord::LessBusy => busy,
                Coord::LessJourneyBusy => i64::from(l.journey) + busy,
            };
        }
        l.cost = cost;
    }

    fn dominates(a: &Label, b: &Label) -> bool {
        a.time <= b.time && a.cost.iter().zip(&b.cost).all(|(x, y)| x <= y)
    }

    fn pareto(mut labels: Vec<Label>) -> Vec<Label> {
        labels.sort_by_key(|a| (a.time, a.cost));
        let mut kept: Vec<Label> = Vec::with_capacity(labels.len().min(64));
        for l in labels {
            if !kept.iter().any(|k| Self::dominates(k, &l)) {
                kept.push(l);
            }
        }
        kept
    }

    fn out_of_budget(&mut self) -> bool {
        if self.stopped {
            return true;
        }
        self.nodes += 1;
        if self.nodes > self.node_limit {
            self.stopped = true;
        } else if self.nodes.is_multiple_of(256) {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.stopped = true;
                }
            }
        }
        self.stopped
    }

    /// Durations of the visits on the label's trail, in visiting order.
    fn durations(&self, trail: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.sequence.len() + 1);
        let mut at = trail;
        while at != NO_TRAIL {
            let (parent, dur) = self.arena[at as usize];
            out.push(dur);
            at = parent;
        }
        out.reverse();
        out
    }

    /// Scores closing the route right after the label (through the lunch stop
    /// if it is still pending) and records it if it beats the incumbent.
    fn close(&mut self, loc: usize, lunch_done: bool, visits: u32, value: u64, l: &Label) {
        let ix = self.ix;
        let pending = ix.lunch.is_some() && !lunch_done;
        let (finish, journey) = if pending {
            let (l_start, l_end) = ix.lunch.expect("pending implies lunch");
            if l.time + ix.tr(loc, ix.rest()) > l_start {
                return;
            }
            let back = ix.tr(ix.rest(), ix.fin());
            (l_end + back, l.journey + ix.tr(loc, ix.rest()) + back)
        } else {
            let leg = ix.tr(loc, ix.fin());
            (l.time + leg, l.journey + leg)
        };
        if finish > ix.t_end {
            return;
        }
        let busy = u64::from(l.poi_time) + u64::from(journey) + u64::from(ix.lunch_len());
        let totals = PlanTotals {
            visits,
            value,
            value_time: l.value_time,
            poi_time: u64::from(l.poi_time),
            journey: u64::from(journey),
            free_time: (u64::from(ix.total) - busy) as u32,
        };
        let approx = self.score.metric_f64(&totals, self.kind);
        if approx > self.best_f64 + EPS {
            return;
        }
        let objective = metric_from_totals(self.problem, &totals, self.kind);
        let mut sequence = self.sequence.clone();
        let mut durations = self.durations(l.trail);
        if pending {
            sequence.push(ix.rest());
            durations.push(ix.lunch_len());
        }
        let key: Vec<(u32, u32)> = sequence.iter().zip(&durations).map(|(&i, &d)| (ix.rank[i], d)).collect();
        let better = match &self.best {
            None => true,
            Some(b) => {
                objective.cmp(&b.objective).then(visits.cmp(&b.visits)).then_with(|| key.cmp(&b.key)) == Ordering::Less
            }
        };
        if better {
            self.best_f64 = approx;
            self.best = Some(Best { objective, visits, key, sequence, durations });
        }
    }

    fn addable(&self, mask: u32, t_min: u32) -> Addable {
        let ix = self.ix;
        let members: Vec<usize> = (0..ix.n)
            .filter(|&p| mask & (1 << p) == 0)
            .filter(|&p| {
                let start = (t_min + ix.min_in[p]).max(ix.open[p]);
                let finish = start + ix.dmin[p];
                finish <= ix.close[p] && finish + ix.min_in[ix.fin()] <= ix.t_end
            })
            .collect();
        let collect = |f: &dyn Fn(usize) -> u64| members.iter().map(|&p| f(p)).collect::<Vec<u64>>();
        Addable {
            top_value: prefix(collect(&|p| ix.value[p]), true),
            top_value_dmax: prefix(collect(&|p| ix.value[p] * u64::from(ix.dmax[p])), true),
            top_dmax: prefix(collect(&|p| u64::from(ix.dmax[p])), true),
            low_min_in: prefix(collect(&|p| u64::from(ix.min_in[p])), false),
            low_dmin: prefix(collect(&|p| u64::from(ix.dmin[p])), false),
            low_reach: prefix(collect(&|p| u64::from(ix.min_in[p] + ix.dmin[p])), false),
            max_value: members.iter().map(|&p| ix.value[p]).max().unwrap_or(0),
            members,
        }
    }

    /// Lower bound on the objective of any completion that adds at least one
    /// more POI to the label; `INFINITY` if no such completion can exist.
    fn expansion_bound(&self, a: &Addable, lunch_done: bool, visits: u32, value: u64, l: &Label) -> f64 {
        let ix = self.ix;
        let total = f64::from(ix.total);
        let vmax = f64::from(ix.vmax);
        let pending = ix.lunch.is_some() && !lunch_done;
        let pend_len = if pending { u64::from(ix.lunch_len()) } else { 0 };
        let pend_in = if pending { u64::from(ix.min_in[ix.rest()]) } else { 0 };
        let lunch_all = u64::from(ix.lunch_len());
        let fin_in = u64::from(ix.min_in[ix.fin()]);
        let time = u64::from(l.time);
        let t_end = u64::from(ix.t_end);
        let busy_now = u64::from(l.poi_time) + u64::from(l.journey) + u64::from(self.lunch_len(lunch_done));
        let mean_now = if l.poi_time == 0 { 0.0 } else { l.value_time as f64 / f64::from(l.poi_time) };

        let mut best = f64::INFINITY;
        for r in 1..=a.members.len() {
            if time + a.low_reach[r] + fin_in + pend_in + pend_len > t_end {
                break;
            }
            let journey_add = a.low_min_in[r] + fin_in + pend_in;
            let journey_lb = u64::from(l.journey) + journey_add;
            let remaining = t_end - time;
            let poi_add_max = a.top_dmax[r].min(remaining.saturating_sub(journey_add + pend_len));
            let poi_add_min = a.low_dmin[r];
            let k = visits + r as u32;

            let p_u1 =
                if ix.total_value == 0 { 1.0 } else { 1.0 - (value + a.top_value[r]) as f64 / ix.total_value as f64 };
            let p_visits = self.score.visits_f64(k);
            let p_journey = journey_lb as f64 / total;
            let future_busy_max =
                remaining.min(a.top_dmax[r] + pend_len + (r as u64 + 1 + u64::from(pending)) * u64::from(ix.max_edge));
            let future_busy_min = poi_add_min + pend_len + journey_add;
            let p_occup = match (self.pref_occup, self.kind.occup_variant()) {
                (OccupationPreference::High, _) => {
                    let free_lb = i64::from(ix.total) - busy_now as i64 - future_busy_max as i64;
                    free_lb.max(0) as f64 / total
                }
                (OccupationPreference::Indif, _) => 0.0,
                (OccupationPreference::Low, variant) => {
                    let free_ub = i64::from(ix.total) - busy_now as i64 - future_busy_min as i64;
                    match variant {
                        OccupVariant::Reciprocal => {
                            if free_ub <= 0 {
                                1.0
                            } else {
                                1.0 / (free_ub as f64 * total)
                            }
                        }
                        OccupVariant::Linear => ((busy_now + future_busy_min) as f64 / total).min(1.0),
                    }
                }
            };
            let journey_and_occup = if self.pref_occup == OccupationPreference::High {
                // Travel counts as occupied time, so the two terms together
                // only depend on the visiting time.
                let combined = (total - f64::from(l.poi_time) - poi_add_max as f64 - lunch_all as f64) / total;
                (p_journey + p_occup).max(combined)
            } else {
                p_journey + p_occup
            };
            let bound = match self.kind {
                MetricKind::M1 | MetricKind::M1Prime => p_u1 + p_visits + journey_and_occup,
                MetricKind::M2 => {
                    let vt_add = a.top_value_dmax[r].min(a.max_value * poi_add_max);
                    let p_u2 = 1.0 - (l.value_time + vt_add) as f64 / total / vmax;
                    p_u2 + p_visits + p_occup
                }
                MetricKind::M3 => {
                    let p_u3 = 1.0 - mean_now.max(a.max_value as f64) / vmax;
                    p_u3 + p_visits + journey_and_occup
                }
            };
            best = best.min(bound);
        }
        best
    }

    /// Admits labels not dominated by previously expanded labels of the same
    /// state and records them.
    fn memo_filter(&mut self, key: (u32, usize, bool), labels: Vec<Label>) -> Vec<Label> {
        let stored = self.memo.entry(key).or_default();
        let fresh: Vec<Label> = labels.into_iter().filter(|l| !stored.iter().any(|s| Self::dominates(s, l))).collect();
        if !fresh.is_empty() {
            stored.retain(|s| !fresh.iter().any(|l| Self::dominates(l, s)));
            stored.extend(fresh.iter().copied());
        }
        fresh
    }

    fn node(&mut self, mask: u32, loc: usize, lunch_done: bool, visits: u32, value: u64, labels: Vec<Label>) {
        for l in &labels {
            self.close(loc, lunch_done, visits, value, l);
        }

        let t_min = labels.iter().map(|l| l.time).min().expect("nodes have labels");
        let addable = self.addable(mask, t_min);
        if addable.members.is_empty() {
            return;
        }
        let limit = self.best_f64 + EPS;
        let labels: Vec<Label> = labels
            .into_iter()
            .filter(|l| self.expansion_bound(&addable, lunch_done, visits, value, l) <= limit)
            .collect();
        if labels.is_empty() {
            return;
        }
        let labels = self.memo_filter((mask, loc, lunch_done), labels);
        if labels.is_empty() {
            return;
        }

        let ix = self.ix;
        let order = self.order.clone();
        for &next in &order {
            let is_rest = next == ix.rest();
            if is_rest {
                if lunch_done {
                    continue;
                }
            } else if !addable.members.contains(&next) {
                continue;
            }
            if self.out_of_budget() {
                return;
            }
            let mark = self.arena.len();
            let children = self.extend(loc, lunch_done, next, &labels);
            if children.is_empty() {
                self.arena.truncate(mark);
                continue;
            }
            self.sequence.push(next);
            if is_rest {
                self.node(mask, next, true, visits, value, children);
            } else {
                self.node(mask | (1 << next), next, lunch_done, visits + 1, value + ix.value[next], children);
            }
            self.sequence.pop();
            self.arena.truncate(mark);
            if self.stopped {
                return;
            }
        }
    }

    fn push_trail(&mut self, parent: u32, dur: u32) -> u32 {
        self.arena.push((parent, dur));
        (self.arena.len() - 1) as u32
    }

    /// Labels of the child reached by visiting `next` after each label.
    fn extend(&mut self, loc: usize, lunch_done: bool, next: usize, labels: &[Label]) -> Vec<Label> {
        let ix = self.ix;
        let leg = ix.tr(loc, next);
        let mut out = Vec::new();
        if next == ix.rest() {
            let (l_start, l_end) = ix.lunch.expect("restaurant branch needs lunch");
            for l in labels {
                if l.time + leg > l_start {
                    continue;
                }
                let mut c = Label {
                    time: l_end,
                    journey: l.journey + leg,
                    poi_time: l.poi_time,
                    value_time: l.value_time,
                    trail: self.push_trail(l.trail, ix.lunch_len()),
                    cost: [0; DIMS],
                };
                self.set_cost(&mut c, true);
                out.push(c);
            }
            return Self::pareto(out);
        }

        let pending_deadline = match ix.lunch {
            Some((l_start, _)) if !lunch_done => Some(l_start),
            _ => None,
        };
        let latest = ix.close[next].min(ix.t_end.saturating_sub(ix.min_in[ix.fin()]));
        for l in labels {
            let start = (l.time + leg).max(ix.open[next]);
            for &d in &ix.grid[next] {
                let finish = start + d;
                if finish > latest {
                    break;
                }
                if let Some(l_start) = pending_deadline {
                    if finish + ix.min_in[ix.rest()] > l_start {
                        break;
                    }
                }
                let mut c = Label {
                    time: finish,
                    journey: l.journey + leg,
                    poi_time: l.poi_time + d,
                    value_time: l.value_time + ix.value[next] * u64::from(d),
                    trail: self.push_trail(l.trail, d),
                    cost: [0; DIMS],
                };
                self.set_cost(&mut c, lunch_done);
                out.push(c);
            }
        }
        Self::pareto(out)
    }
}
