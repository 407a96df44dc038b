//! Earliest-start scheduling of a fixed visit sequence.
//!
//! Every metric depends on the chosen durations and travel sums only, never
//! on where waiting happens, so the earliest-start schedule of a sequence is
//! as good as any other feasible schedule of it — and it is feasible whenever
//! any schedule is, because each window is a single interval.

use crate::model::{DurationMin, MoveAction, Plan, TouristProblem, VisitAction, RESTAURANT};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("unknown location `{0}` in the sequence")]
    UnknownPoi(String),
    #[error("`{0}` appears more than once in the sequence")]
    DuplicateVisit(String),
    #[error("{pois} POIs but {durations} durations")]
    LengthMismatch { pois: usize, durations: usize },
    #[error("duration {dur} of `{poi}` lies outside [{dmin}, {dmax}]")]
    DurationOutOfBounds { poi: String, dur: DurationMin, dmin: DurationMin, dmax: DurationMin },
    #[error("the sequence must contain the lunch stop `{RESTAURANT}`")]
    MissingLunch,
    #[error("infeasible at position {position}: {reason}")]
    Infeasible { position: usize, reason: String },
}

/// Builds the earliest-start plan visiting `ordered_pois` with `durations`.
///
/// The restaurant, when listed, is pinned to the lunch window and its entry
/// in `durations` is ignored. The first move leaves at `t_start` and every
/// later move leaves as soon as the previous visit ends; any waiting happens
/// on arrival.
pub fn schedule_sequence(
    problem: &TouristProblem,
    ordered_pois: &[&str],
    durations: &[DurationMin],
) -> Result<Plan, ScheduleError> {
    if ordered_pois.len() != durations.len() {
        return Err(ScheduleError::LengthMismatch { pois: ordered_pois.len(), durations: durations.len() });
    }
    let route = problem.route();
    let travel = problem.travel();
    let mut seen = std::collections::HashSet::new();
    for &id in ordered_pois {
        let known = problem.recommendation(id).is_some() || (id == RESTAURANT && route.lunch.is_some());
        if !known {
            return Err(ScheduleError::UnknownPoi(id.to_string()));
        }
        if !seen.insert(id) {
            return Err(ScheduleError::DuplicateVisit(id.to_string()));
        }
    }
    if route.lunch.is_some() && !seen.contains(RESTAURANT) {
        return Err(ScheduleError::MissingLunch);
    }

    let mut plan = Plan::default();
    let mut loc = route.start_loc.as_str();
    let mut time = route.t_start;
    for (position, (&id, &dur)) in ordered_pois.iter().zip(durations).enumerate() {
        let leg = travel.get(loc, id).expect("validated travel table");
        let arrive = time + leg;
        plan.moves.push(MoveAction { from_loc: loc.to_string(), to_loc: id.to_string(), t_s: time, dur: leg });
        let (start, dur) = if id == RESTAURANT {
            let lunch = route.lunch.expect("checked above");
            if arrive > lunch.l_start {
                return Err(ScheduleError::Infeasible {
                    position,
                    reason: format!("lunch reached at {arrive}, after it starts at {}", lunch.l_start),
                });
            }
            (lunch.l_start, lunch.duration())
        } else {
            let rec = problem.recommendation(id).expect("checked above");
            if dur < rec.dmin || dur > rec.dmax {
                return Err(ScheduleError::DurationOutOfBounds {
                    poi: id.to_string(),
                    dur,
                    dmin: rec.dmin,
                    dmax: rec.dmax,
                });
            }
            let hours = problem.hours_of(id).expect("validated problem");
            let start = arrive.max(hours.open);
            if start + dur > hours.close {
                return Err(ScheduleError::Infeasible {
                    position,
                    reason: format!("`{id}` would end at {}, after it closes at {}", start + dur, hours.close),
                });
            }
            (start, dur)
        };
        if start + dur > route.t_end {
            return Err(ScheduleError::Infeasible {
                position,
                reason: format!("`{id}` would end at {}, after the route ends at {}", start + dur, route.t_end),
            });
        }
        plan.visits.push(VisitAction { poi_id: id.to_string(), t_s: start, dur });
        loc = id;
        time = start + dur;
    }

    let leg = travel.get(loc, &route.final_loc).expect("validated travel table");
    if time + leg > route.t_end {
        return Err(ScheduleError::Infeasible {
            position: ordered_pois.len(),
            reason: format!("final location reached at {}, after the route ends at {}", time + leg, route.t_end),
        });
    }
    plan.moves.push(MoveAction { from_loc: loc.to_string(), to_loc: route.final_loc.clone(), t_s: time, dur: leg });
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate::validate;

    fn problem() -> TouristProblem {
        let locs = ["s", "f", "a", "b", RESTAURANT];
        let mut travel = Vec::new();
        for x in locs {
            for y in locs {
                if x != y {
                    travel.push(serde_json::json!({"from": x, "to": y, "minutes": 10}));
                }
            }
        }
        let doc = serde_json::json!({
            "route": {"t_start": 60, "t_end": 400, "start_loc": "s", "final_loc": "f",
                      "lunch": {"l_start": 200, "l_end": 260},
                      "mode": "walk", "pref_visits": "many", "pref_occup": "high"},
            "visits": [{"id": "a", "value": 200, "dmin": 30, "dmax": 60},
                       {"id": "b", "value": 250, "dmin": 20, "dmax": 40}],
            "hours": [{"id": "a", "open": 100, "close": 400}, {"id": "b", "open": 60, "close": 190}],
            "travel": travel
        });
        TouristProblem::load(doc.to_string().as_bytes()).unwrap()
    }

    #[test]
    fn earliest_start_waits_for_opening() {
        let p = problem();
        let plan = schedule_sequence(&p, &["a", RESTAURANT, "b"], &[60, 0, 20]);
        assert!(matches!(plan, Err(ScheduleError::Infeasible { position: 2, .. })), "{plan:?}");
        let plan = schedule_sequence(&p, &["a", "b", RESTAURANT], &[60, 20, 0]).unwrap();
        let starts: Vec<u32> = plan.visits.iter().map(|v| v.t_s).collect();
        assert_eq!(starts, vec![100, 170, 200]);
        assert_eq!(plan.moves.last().unwrap().t_s, 260);
        assert_eq!(validate(&p, &plan), vec![]);
    }

    #[test]
    fn rejects_bad_input() {
        let p = problem();
        assert_eq!(schedule_sequence(&p, &["a"], &[60]), Err(ScheduleError::MissingLunch));
        assert!(matches!(schedule_sequence(&p, &["x", RESTAURANT], &[1, 0]), Err(ScheduleError::UnknownPoi(_))));
        assert!(matches!(
            schedule_sequence(&p, &["a", RESTAURANT], &[61, 0]),
            Err(ScheduleError::DurationOutOfBounds { .. })
        ));
        assert!(matches!(
            schedule_sequence(&p, &["a", "a", RESTAURANT], &[30, 30, 0]),
            Err(ScheduleError::DuplicateVisit(_))
        ));
        assert!(matches!(schedule_sequence(&p, &["a"], &[]), Err(ScheduleError::LengthMismatch { .. })));
    }
}
