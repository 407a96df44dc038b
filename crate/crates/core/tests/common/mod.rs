//! Fixtures and random plan generation shared by the integration tests.
#![allow(dead_code)]

use agenda_core::genbench::{generate, GenSpec, HORIZONS};
use agenda_core::model::{DurationMin, OccupationPreference, Plan, TouristProblem, VisitPreference, RESTAURANT};
use agenda_core::solver::schedule_sequence;
use agenda_core::validate::is_valid;
use rand::seq::SliceRandom;
use rand::Rng;
use std::path::PathBuf;

pub fn data_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(rel)
}

pub fn read_data(rel: &str) -> Vec<u8> {
    std::fs::read(data_path(rel)).unwrap_or_else(|e| panic!("reading {rel}: {e}"))
}

pub fn load_problem(rel: &str) -> TouristProblem {
    TouristProblem::load(&read_data(rel)).unwrap()
}

pub fn load_plan(rel: &str) -> Plan {
    Plan::load(&read_data(rel)).unwrap()
}

/// The six-POI example (hotel to station, 0..600, lunch 180..300).
pub fn six_poi() -> TouristProblem {
    load_problem("six_poi/problem.json")
}

/// Plans 1 to 4 of the six-POI example.
pub fn six_poi_plan(k: usize) -> Plan {
    load_plan(&format!("six_poi/plan{k}.json"))
}

/// A random generated instance drawn from `rng`.
pub fn random_instance<R: Rng>(rng: &mut R, max_n: usize) -> TouristProblem {
    let spec = GenSpec::new(
        rng.gen(),
        rng.gen_range(1..=max_n),
        HORIZONS[rng.gen_range(0..HORIZONS.len())],
        VisitPreference::ALL[rng.gen_range(0..3)],
        OccupationPreference::ALL[rng.gen_range(0..3)],
    );
    generate(&spec).unwrap()
}

/// Draws a random valid plan: POIs in random order are inserted at random
/// positions with random durations, each kept only if the earliest-start
/// schedule stays feasible. Returns `None` when not even the bare route
/// (with lunch, if required) is feasible.
pub fn random_plan<R: Rng>(rng: &mut R, problem: &TouristProblem) -> Option<Plan> {
    let mut ids: Vec<&str> = problem.visits().iter().map(|r| r.poi_id.as_str()).collect();
    ids.shuffle(rng);
    let target = rng.gen_range(0..=ids.len().min(5));
    let mut seq: Vec<&str> = Vec::new();
    let mut durs: Vec<DurationMin> = Vec::new();
    if problem.lunch().is_some() {
        seq.push(RESTAURANT);
        durs.push(0);
    }
    let mut plan = schedule_sequence(problem, &seq, &durs).ok()?;
    for id in ids {
        if plan.poi_visit_count() >= target {
            break;
        }
        let r = problem.recommendation(id).unwrap();
        let at = rng.gen_range(0..=seq.len());
        seq.insert(at, id);
        durs.insert(at, rng.gen_range(r.dmin..=r.dmax));
        match schedule_sequence(problem, &seq, &durs) {
            Ok(next) => plan = next,
            Err(_) => {
                seq.remove(at);
                durs.remove(at);
            }
        }
    }
    is_valid(problem, &plan).then_some(plan)
}

/// Draws random instances until one yields a valid random plan.
pub fn random_valid_pair<R: Rng>(rng: &mut R, max_n: usize) -> (TouristProblem, Plan) {
    loop {
        let problem = random_instance(rng, max_n);
        for _ in 0..8 {
            if let Some(plan) = random_plan(rng, &problem) {
                return (problem, plan);
            }
        }
    }
}

/// A valid plan on the six-POI example with slack around every action, so
/// that each single-field edit in [`mutations`] breaks exactly one rule.
pub fn mutation_base() -> Plan {
    load_plan("six_poi/mutation_base.json")
}

/// One targeted single-field mutation of [`mutation_base`] per violation code.
pub fn mutations() -> Vec<(agenda_core::validate::ViolationCode, &'static str, Plan)> {
    use agenda_core::validate::ViolationCode::*;
    let base = mutation_base();
    let edit = |f: &dyn Fn(&mut Plan)| {
        let mut p = base.clone();
        f(&mut p);
        p
    };
    vec![
        (DuplicateVisit, "lunch stop renamed to V1", edit(&|p| p.visits[1].poi_id = "V1".into())),
        (EmptyPosition, "second move leaves V4", edit(&|p| p.moves[1].from_loc = "V4".into())),
        (DestinationNotLast, "last move ends at the hotel", edit(&|p| p.moves[2].to_loc = "hotel".into())),
        (DurationOutOfBounds, "V1 visit of 59 min", edit(&|p| p.visits[0].dur = 59)),
        (OutsideOpeningHours, "V1 visit starts at 55", edit(&|p| p.visits[0].t_s = 55)),
        (TravelTimeViolated, "V1 -> lunch move of 25 min", edit(&|p| p.moves[1].dur = 25)),
        (LunchMisplaced, "lunch of 110 min", edit(&|p| p.visits[1].dur = 110)),
        (HorizonExceeded, "last move leaves at 545", edit(&|p| p.moves[2].t_s = 545)),
        (UnknownPoi, "V1 renamed to V9", edit(&|p| p.visits[0].poi_id = "V9".into())),
    ]
}
