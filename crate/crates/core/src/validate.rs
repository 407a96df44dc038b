//! Normative plan feasibility checker and timeline renderer.
//!
//! [`validate`] is the single definition of plan validity: solver and oracle
//! output must pass it. Checks run in three stages and later stages only run
//! when earlier ones are clean, so that a single faulty field produces a
//! single, well-targeted violation code:
//!
//! 1. identity — every referenced location exists, nothing is visited twice;
//! 2. structure — moves and visits alternate in one chain from the start to
//!    the final location;
//! 3. timing — durations, opening hours, travel times, the lunch slot and the
//!    horizon.

use crate::model::{total_time, Plan, TouristProblem, RESTAURANT};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationCode {
    /// A location is visited more than once.
    DuplicateVisit,
    /// The move/visit chain has a gap or a missing link.
    EmptyPosition,
    /// The route does not end at the final location.
    DestinationNotLast,
    /// A visit duration lies outside the recommended interval.
    DurationOutOfBounds,
    /// A visit is not contained in the opening hours of its POI.
    OutsideOpeningHours,
    /// A move does not take the tabulated time or overlaps its neighbours.
    TravelTimeViolated,
    /// The lunch stop is missing or not exactly on the lunch window.
    LunchMisplaced,
    /// An action starts before the route starts or ends after it ends.
    HorizonExceeded,
    /// A location that does not belong to the problem.
    UnknownPoi,
}

impl ViolationCode {
    pub const ALL: [ViolationCode; 9] = [
        Self::DuplicateVisit,
        Self::EmptyPosition,
        Self::DestinationNotLast,
        Self::DurationOutOfBounds,
        Self::OutsideOpeningHours,
        Self::TravelTimeViolated,
        Self::LunchMisplaced,
        Self::HorizonExceeded,
        Self::UnknownPoi,
    ];
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One broken constraint, naming the offending action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub detail: String,
}

impl Violation {
    fn new(code: ViolationCode, detail: String) -> Self {
        Self { code, detail }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.detail)
    }
}

/// Checks `plan` against `problem`; an empty list means the plan is valid.
pub fn validate(problem: &TouristProblem, plan: &Plan) -> Vec<Violation> {
    let out = check_identity(problem, plan);
    if !out.is_empty() {
        return out;
    }
    let out = check_structure(problem, plan);
    if !out.is_empty() {
        return out;
    }
    check_timing(problem, plan)
}

/// Convenience wrapper for `validate(..).is_empty()`.
pub fn is_valid(problem: &TouristProblem, plan: &Plan) -> bool {
    validate(problem, plan).is_empty()
}

fn check_identity(problem: &TouristProblem, plan: &Plan) -> Vec<Violation> {
    use ViolationCode::*;
    let route = problem.route();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, v) in plan.visits.iter().enumerate() {
        let is_poi = problem.recommendation(&v.poi_id).is_some();
        let is_lunch = v.is_restaurant() && route.lunch.is_some();
        if !is_poi && !is_lunch {
            out.push(Violation::new(
                UnknownPoi,
                format!("visit #{i} refers to `{}`, which is not a recommended POI", v.poi_id),
            ));
        } else if !seen.insert(v.poi_id.as_str()) {
            out.push(Violation::new(DuplicateVisit, format!("visit #{i}: `{}` is visited more than once", v.poi_id)));
        }
    }
    for (i, m) in plan.moves.iter().enumerate() {
        for loc in [&m.from_loc, &m.to_loc] {
            if !problem.is_location(loc) {
                out.push(Violation::new(UnknownPoi, format!("move #{i} refers to unknown location `{loc}`")));
            }
        }
    }
    out
}

fn check_structure(problem: &TouristProblem, plan: &Plan) -> Vec<Violation> {
    use ViolationCode::*;
    let route = problem.route();
    let n_visits = plan.visits.len();

    if plan.moves.is_empty() {
        if n_visits == 0 && route.start_loc == route.final_loc {
            return Vec::new();
        }
        return vec![Violation::new(EmptyPosition, "plan has no moves".into())];
    }
    if plan.moves.len() != n_visits + 1 {
        return vec![Violation::new(
            EmptyPosition,
            format!("{} visit(s) need {} move(s), plan has {}", n_visits, n_visits + 1, plan.moves.len()),
        )];
    }

    let mut out = Vec::new();
    if plan.moves[0].from_loc != route.start_loc {
        out.push(Violation::new(
            EmptyPosition,
            format!("move #0 leaves `{}` instead of the start location `{}`", plan.moves[0].from_loc, route.start_loc),
        ));
    }
    for (i, v) in plan.visits.iter().enumerate() {
        if plan.moves[i].to_loc != v.poi_id {
            out.push(Violation::new(
                EmptyPosition,
                format!("move #{i} arrives at `{}` but visit #{i} is at `{}`", plan.moves[i].to_loc, v.poi_id),
            ));
        }
        if plan.moves[i + 1].from_loc != v.poi_id {
            out.push(Violation::new(
                EmptyPosition,
                format!("move #{} leaves `{}` but visit #{i} is at `{}`", i + 1, plan.moves[i + 1].from_loc, v.poi_id),
            ));
        }
    }
    let last = plan.moves.last().expect("non-empty");
    if last.to_loc != route.final_loc {
        out.push(Violation::new(
            DestinationNotLast,
            format!(
                "move #{} ends at `{}` instead of the final location `{}`",
                plan.moves.len() - 1,
                last.to_loc,
                route.final_loc
            ),
        ));
    }
    out
}

fn check_timing(problem: &TouristProblem, plan: &Plan) -> Vec<Violation> {
    use ViolationCode::*;
    let route = problem.route();
    let mut out = Vec::new();

    for (i, v) in plan.visits.iter().enumerate() {
        if v.is_restaurant() {
            let lunch = route.lunch.expect("identity stage admits the restaurant only with lunch");
            if v.t_s != lunch.l_start || v.dur != lunch.duration() {
                out.push(Violation::new(
                    LunchMisplaced,
                    format!(
                        "visit #{i}: lunch occupies [{}, {}] instead of [{}, {}]",
                        v.t_s,
                        v.finish(),
                        lunch.l_start,
                        lunch.l_end
                    ),
                ));
            }
            continue;
        }
        let rec = problem.recommendation(&v.poi_id).expect("identity stage checked");
        if v.dur < rec.dmin || v.dur > rec.dmax {
            out.push(Violation::new(
                DurationOutOfBounds,
                format!("visit #{i} `{}` lasts {} min, outside [{}, {}]", v.poi_id, v.dur, rec.dmin, rec.dmax),
            ));
        }
        let hours = problem.hours_of(&v.poi_id).expect("every POI has hours");
        if v.t_s < hours.open || v.finish() > hours.close {
            out.push(Violation::new(
                OutsideOpeningHours,
                format!(
                    "visit #{i} `{}` occupies [{}, {}] but the POI is open [{}, {}]",
                    v.poi_id,
                    v.t_s,
                    v.finish(),
                    hours.open,
                    hours.close
                ),
            ));
        }
    }
    if let Some(lunch) = route.lunch {
        if !plan.visits.iter().any(|v| v.is_restaurant()) {
            out.push(Violation::new(
                LunchMisplaced,
                format!("no lunch stop in the window [{}, {}]", lunch.l_start, lunch.l_end),
            ));
        }
    }

    for (i, m) in plan.moves.iter().enumerate() {
        let expected = problem.travel().get(&m.from_loc, &m.to_loc).expect("travel table is complete");
        if m.dur != expected {
            out.push(Violation::new(
                TravelTimeViolated,
                format!("move #{i} {} -> {} takes {} min, the table says {expected}", m.from_loc, m.to_loc, m.dur),
            ));
        }
        if i > 0 {
            let prev = &plan.visits[i - 1];
            if m.t_s < prev.finish() {
                out.push(Violation::new(
                    TravelTimeViolated,
                    format!("move #{i} departs at {} before visit #{} ends at {}", m.t_s, i - 1, prev.finish()),
                ));
            }
        }
        if let Some(next) = plan.visits.get(i) {
            if next.t_s < m.finish() {
                out.push(Violation::new(
                    TravelTimeViolated,
                    format!("visit #{i} starts at {} before move #{i} arrives at {}", next.t_s, m.finish()),
                ));
            }
        }
    }

    let actions = plan
        .moves
        .iter()
        .enumerate()
        .map(|(i, m)| (format!("move #{i}"), m.t_s, m.finish()))
        .chain(plan.visits.iter().enumerate().map(|(i, v)| (format!("visit #{i}"), v.t_s, v.finish())));
    for (name, start, finish) in actions {
        if start < route.t_start || finish > route.t_end {
            out.push(Violation::new(
                HorizonExceeded,
                format!("{name} occupies [{start}, {finish}] outside the route [{}, {}]", route.t_start, route.t_end),
            ));
        }
    }
    out
}

/// Formats minutes since midnight as `HH:MM`.
pub fn hhmm(t: u32) -> String {
    format!("{:02}:{:02}", t / 60, t % 60)
}

/// Kind of a timeline row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Move,
    Visit,
    Lunch,
    Slack,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineRow {
    pub kind: RowKind,
    pub label: String,
    pub start: u32,
    pub end: u32,
}

/// Chronological action list with the slack between actions made explicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timeline {
    pub rows: Vec<TimelineRow>,
    /// Sum of the slack rows.
    pub total_slack: u32,
    /// `free_time` of the plan; equals `total_slack` for valid plans.
    pub free_time: u32,
    pub total_time: u32,
}

impl Timeline {
    /// Number of move, visit and lunch rows.
    pub fn action_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.kind != RowKind::Slack).count()
    }

    pub fn slack_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.kind == RowKind::Slack).count()
    }
}

impl fmt::Display for Timeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<5} {:<5} {:>5}  {:<6} what", "start", "end", "min", "kind")?;
        for row in &self.rows {
            let kind = match row.kind {
                RowKind::Move => "move",
                RowKind::Visit => "visit",
                RowKind::Lunch => "lunch",
                RowKind::Slack => "slack",
            };
            writeln!(
                f,
                "{} {} {:>5}  {:<6} {}",
                hhmm(row.start),
                hhmm(row.end),
                row.end.saturating_sub(row.start),
                kind,
                row.label
            )?;
        }
        writeln!(f, "total slack: {} min", self.total_slack)?;
        write!(f, "free time: {} of {} min", self.free_time, self.total_time)
    }
}

/// Renders the plan as a chronological timeline, inserting slack rows for
/// idle intervals, including those before the first and after the last action.
pub fn explain(problem: &TouristProblem, plan: &Plan) -> Timeline {
    let route = problem.route();
    let mut actions: Vec<TimelineRow> = Vec::with_capacity(plan.moves.len() + plan.visits.len());
    for (i, m) in plan.moves.iter().enumerate() {
        actions.push(TimelineRow {
            kind: RowKind::Move,
            label: format!("{} -> {}", m.from_loc, m.to_loc),
            start: m.t_s,
            end: m.finish(),
        });
        if let Some(v) = plan.visits.get(i) {
            actions.push(TimelineRow {
                kind: if v.poi_id == RESTAURANT { RowKind::Lunch } else { RowKind::Visit },
                label: v.poi_id.clone(),
                start: v.t_s,
                end: v.finish(),
            });
        }
    }
    // Visits without a matching move (malformed plans) are still shown.
    for v in plan.visits.iter().skip(plan.moves.len()) {
        actions.push(TimelineRow {
            kind: if v.poi_id == RESTAURANT { RowKind::Lunch } else { RowKind::Visit },
            label: v.poi_id.clone(),
            start: v.t_s,
            end: v.finish(),
        });
    }
    actions.sort_by_key(|r| (r.start, r.end));

    let mut rows = Vec::with_capacity(actions.len() * 2 + 1);
    let mut cursor = route.t_start;
    let mut total_slack = 0;
    for row in actions {
        if row.start > cursor {
            total_slack += row.start - cursor;
            rows.push(TimelineRow { kind: RowKind::Slack, label: String::new(), start: cursor, end: row.start });
        }
        cursor = cursor.max(row.end);
        rows.push(row);
    }
    if route.t_end > cursor {
        total_slack += route.t_end - cursor;
        rows.push(TimelineRow { kind: RowKind::Slack, label: String::new(), start: cursor, end: route.t_end });
    }
    Timeline { rows, total_slack, free_time: crate::model::free_time(problem, plan), total_time: total_time(problem) }
}
