//! Seeded random instance generator.

use crate::model::{
    LunchWindow, OccupationPreference, PoiHours, Recommendation, RouteDetails, TouristProblem, TravelTable,
    VisitPreference, DAY_END, DEFAULT_VMAX, RESTAURANT,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Horizons (minutes) of the short, half-day and all-day plans.
pub const HORIZONS: [u32; 3] = [180, 300, 540];
/// Horizon from which a lunch stop is generated.
pub const LUNCH_HORIZON: u32 = 540;
/// Largest number of POIs the generator produces.
pub const MAX_GEN_POIS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

/// Parameters of one random instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub seed: u64,
    pub n_visits: usize,
    /// Route length in minutes.
    pub horizon: u32,
    pub pref_visits: VisitPreference,
    pub pref_occup: OccupationPreference,
    /// Inclusive range of recommendation values.
    pub value_range: (u32, u32),
    /// Inclusive range of pairwise travel times.
    pub travel_range: (u32, u32),
    /// Inclusive range of average visit durations.
    pub avg_dur_range: (u32, u32),
    /// Relative half-width of the duration interval around the average.
    pub dur_spread_pct: u32,
    /// Route start, minutes after midnight.
    pub t_start: u32,
    /// Lunch window used for all-day routes.
    pub lunch: (u32, u32),
}

impl GenSpec {
    pub fn new(
        seed: u64,
        n_visits: usize,
        horizon: u32,
        pref_visits: VisitPreference,
        pref_occup: OccupationPreference,
    ) -> Self {
        Self {
            seed,
            n_visits,
            horizon,
            pref_visits,
            pref_occup,
            value_range: (180, 300),
            travel_range: (1, 60),
            avg_dur_range: (30, 200),
            dur_spread_pct: 20,
            t_start: 540,
            lunch: (780, 840),
        }
    }

    fn check(&self) -> Result<(), GenError> {
        let bad = |msg: String| Err(GenError::InvalidSpec(msg));
        if self.n_visits > MAX_GEN_POIS {
            return bad(format!("n_visits must be at most {MAX_GEN_POIS}"));
        }
        if self.horizon == 0 || self.t_start + self.horizon > DAY_END {
            return bad(format!("route {}+{} must fit in the day", self.t_start, self.horizon));
        }
        if self.t_start < 120 {
            return bad("t_start must leave room for early openings (>= 120)".into());
        }
        for (name, (lo, hi)) in [
            ("value_range", self.value_range),
            ("travel_range", self.travel_range),
            ("avg_dur_range", self.avg_dur_range),
        ] {
            if lo > hi {
                return bad(format!("{name} is empty ({lo} > {hi})"));
            }
        }
        if self.value_range.1 > DEFAULT_VMAX {
            return bad(format!("values above {DEFAULT_VMAX} are not allowed"));
        }
        if self.avg_dur_range.0 == 0 || self.avg_dur_range.0 > self.horizon {
            return bad("the shortest average duration must be positive and fit the horizon".into());
        }
        if self.dur_spread_pct >= 100 {
            return bad("dur_spread_pct must be below 100".into());
        }
        if self.has_lunch() {
            let (s, e) = self.lunch;
            if !(self.t_start <= s && s < e && e <= self.t_start + self.horizon) {
                return bad(format!("lunch window {s}..{e} must lie inside the route"));
            }
        }
        Ok(())
    }

    pub fn has_lunch(&self) -> bool {
        self.horizon >= LUNCH_HORIZON
    }
}

fn poi_id(i: usize) -> String {
    format!("p{:02}", i + 1)
}

fn scaled(avg: u32, pct: u32) -> u32 {
    // Round half up in integer arithmetic.
    (avg * pct + 50) / 100
}

/// Draws an instance. The same spec always yields the same instance.
pub fn generate(spec: &GenSpec) -> Result<TouristProblem, GenError> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let t_start = spec.t_start;
    let t_end = t_start + spec.horizon;

    let mut visits = Vec::with_capacity(spec.n_visits);
    let mut hours = Vec::with_capacity(spec.n_visits);
    for i in 0..spec.n_visits {
        let id = poi_id(i);
        let value = rng.gen_range(spec.value_range.0..=spec.value_range.1);
        // Averages that cannot fit the horizon are discarded and redrawn.
        let avg = loop {
            let a = rng.gen_range(spec.avg_dur_range.0..=spec.avg_dur_range.1);
            if a <= spec.horizon {
                break a;
            }
        };
        let dmin = scaled(avg, 100 - spec.dur_spread_pct).max(1);
        let dmax = scaled(avg, 100 + spec.dur_spread_pct);
        let open = rng.gen_range(t_start - 120..=t_start + spec.horizon / 2);
        let close = (open + rng.gen_range(120..=600)).min(DAY_END);
        visits.push(Recommendation { poi_id: id.clone(), value, dmin, dmax });
        hours.push(PoiHours { poi_id: id, open, close });
    }

    let lunch = spec.has_lunch().then_some(LunchWindow { l_start: spec.lunch.0, l_end: spec.lunch.1 });
    let mut locations: Vec<String> = vec!["origin".into(), "destination".into()];
    locations.extend((0..spec.n_visits).map(poi_id));
    if lunch.is_some() {
        locations.push(RESTAURANT.into());
    }
    let mut travel = TravelTable::new("walk");
    for (a, from) in locations.iter().enumerate() {
        for to in &locations[a + 1..] {
            let minutes = rng.gen_range(spec.travel_range.0..=spec.travel_range.1);
            travel.insert(from.clone(), to.clone(), minutes);
            travel.insert(to.clone(), from.clone(), minutes);
        }
    }

    let route = RouteDetails {
        t_start,
        t_end,
        start_loc: "origin".into(),
        final_loc: "destination".into(),
        lunch,
        mode: "walk".into(),
        pref_visits: spec.pref_visits,
        pref_occup: spec.pref_occup,
    };
    let problem = TouristProblem::new(route, visits, hours, travel, DEFAULT_VMAX)
        .expect("generated instances satisfy the model invariants");
    Ok(problem)
}
