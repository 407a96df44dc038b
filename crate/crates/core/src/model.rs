//! Problem and plan data model.
//!
//! All times are integer minutes measured from 00:00. A problem is loaded
//! from the canonical JSON instance document and validated once; after
//! construction it is immutable.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Minutes since 00:00, in `[0, 1440]`.
pub type TimePoint = u32;
/// A nonnegative span of minutes.
pub type DurationMin = u32;

/// Last minute of the day.
pub const DAY_END: TimePoint = 1440;
/// Recommendation scale used by the recommender feeding this engine.
pub const DEFAULT_VMAX: u32 = 300;
/// Reserved location identifier of the generic lunch restaurant.
pub const RESTAURANT: &str = "__restaurant__";

/// Preference on how many of the recommended places end up in the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisitPreference {
    #[serde(alias = "Few")]
    Few,
    #[serde(alias = "Indif", alias = "indifferent")]
    Indif,
    #[serde(alias = "Many")]
    Many,
}

/// Preference on how much of the available time is spent in activities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OccupationPreference {
    #[serde(alias = "High")]
    High,
    #[serde(alias = "Indif", alias = "indifferent")]
    Indif,
    #[serde(alias = "Low")]
    Low,
}

impl VisitPreference {
    pub const ALL: [VisitPreference; 3] = [Self::Few, Self::Indif, Self::Many];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Few => "few",
            Self::Indif => "indif",
            Self::Many => "many",
        }
    }
}

impl OccupationPreference {
    pub const ALL: [OccupationPreference; 3] = [Self::High, Self::Indif, Self::Low];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::High => "high",
            Self::Indif => "indif",
            Self::Low => "low",
        }
    }
}

impl fmt::Display for VisitPreference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for OccupationPreference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VisitPreference {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "few" => Ok(Self::Few),
            "indif" | "indifferent" => Ok(Self::Indif),
            "many" => Ok(Self::Many),
            other => Err(format!("unknown visit preference `{other}` (few|indif|many)")),
        }
    }
}

impl FromStr for OccupationPreference {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "high" => Ok(Self::High),
            "indif" | "indifferent" => Ok(Self::Indif),
            "low" => Ok(Self::Low),
            other => Err(format!("unknown occupation preference `{other}` (high|indif|low)")),
        }
    }
}

/// Opening hours of one point of interest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoiHours {
    #[serde(rename = "id")]
    pub poi_id: String,
    pub open: TimePoint,
    pub close: TimePoint,
}

/// One recommended visit: value to the user and the recommended duration interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recommendation {
    #[serde(rename = "id")]
    pub poi_id: String,
    pub value: u32,
    pub dmin: DurationMin,
    pub dmax: DurationMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LunchWindow {
    pub l_start: TimePoint,
    pub l_end: TimePoint,
}

impl LunchWindow {
    pub fn duration(&self) -> DurationMin {
        self.l_end - self.l_start
    }
}

/// Route details entered by the user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteDetails {
    pub t_start: TimePoint,
    pub t_end: TimePoint,
    pub start_loc: String,
    pub final_loc: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lunch: Option<LunchWindow>,
    pub mode: String,
    pub pref_visits: VisitPreference,
    pub pref_occup: OccupationPreference,
}

/// Travel times between locations for one transport mode.
///
/// Entries are raw inputs: no symmetry or triangle inequality is assumed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TravelTable {
    pub mode: String,
    entries: BTreeMap<(String, String), DurationMin>,
}

impl TravelTable {
    pub fn new(mode: impl Into<String>) -> Self {
        Self { mode: mode.into(), entries: BTreeMap::new() }
    }

    /// Inserts an entry, returning the previous value if one existed.
    pub fn insert(
        &mut self,
        from: impl Into<String>,
        to: impl Into<String>,
        minutes: DurationMin,
    ) -> Option<DurationMin> {
        self.entries.insert((from.into(), to.into()), minutes)
    }

    /// Travel time from `from` to `to`; staying in place costs nothing.
    pub fn get(&self, from: &str, to: &str) -> Option<DurationMin> {
        if from == to {
            return Some(0);
        }
        self.entries.get(&(from.to_string(), to.to_string())).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, DurationMin)> {
        self.entries.iter().map(|((f, t), m)| (f.as_str(), t.as_str(), *m))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TravelEntry {
    pub from: String,
    pub to: String,
    pub minutes: DurationMin,
}

/// The canonical JSON instance document, before validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub route: RouteDetails,
    #[serde(default = "default_vmax")]
    pub vmax: u32,
    pub visits: Vec<Recommendation>,
    pub hours: Vec<PoiHours>,
    pub travel: Vec<TravelEntry>,
}

fn default_vmax() -> u32 {
    DEFAULT_VMAX
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("invalid route: {0}")]
    InvalidRoute(String),
    #[error("invalid POI `{poi}`: {reason}")]
    InvalidPoi { poi: String, reason: String },
    #[error("travel table is missing {} pair(s): {}", .0.len(), format_pairs(.0))]
    MissingTravel(Vec<(String, String)>),
    #[error("invalid travel entry {from} -> {to}: {reason}")]
    InvalidTravel { from: String, to: String, reason: String },
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(a, b)| format!("({a}, {b})")).collect::<Vec<_>>().join(", ")
}

/// A tourist problem: route details, recommended visits, hours and travel times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TouristProblem {
    route: RouteDetails,
    visits: Vec<Recommendation>,
    hours: Vec<PoiHours>,
    travel: TravelTable,
    vmax: u32,
    visit_index: HashMap<String, usize>,
    hours_index: HashMap<String, usize>,
}

impl TouristProblem {
    /// Validates the parts and builds a problem.
    pub fn new(
        route: RouteDetails,
        visits: Vec<Recommendation>,
        hours: Vec<PoiHours>,
        travel: TravelTable,
        vmax: u32,
    ) -> Result<Self, ModelError> {
        check_route(&route)?;
        if vmax == 0 {
            return Err(ModelError::InvalidRoute("vmax must be positive".into()));
        }

        let mut visit_index = HashMap::with_capacity(visits.len());
        for (i, rec) in visits.iter().enumerate() {
            let reserved = rec.poi_id == RESTAURANT || rec.poi_id == route.start_loc || rec.poi_id == route.final_loc;
            if reserved {
                return Err(invalid_poi(&rec.poi_id, "identifier is reserved for a route endpoint"));
            }
            if rec.poi_id.is_empty() {
                return Err(invalid_poi(&rec.poi_id, "empty identifier"));
            }
            if rec.dmin == 0 || rec.dmin > rec.dmax {
                return Err(invalid_poi(
                    &rec.poi_id,
                    &format!("duration interval must satisfy 0 < dmin <= dmax (got {}..{})", rec.dmin, rec.dmax),
                ));
            }
            if rec.value > vmax {
                return Err(invalid_poi(&rec.poi_id, &format!("value {} exceeds vmax {vmax}", rec.value)));
            }
            if visit_index.insert(rec.poi_id.clone(), i).is_some() {
                return Err(invalid_poi(&rec.poi_id, "recommended more than once"));
            }
        }

        let mut hours_index = HashMap::with_capacity(hours.len());
        for (i, h) in hours.iter().enumerate() {
            if !visit_index.contains_key(&h.poi_id) {
                return Err(invalid_poi(&h.poi_id, "opening hours given for a POI that is not recommended"));
            }
            if h.open >= h.close || h.close > DAY_END {
                return Err(invalid_poi(
                    &h.poi_id,
                    &format!("opening hours must satisfy open < close <= {DAY_END} (got {}..{})", h.open, h.close),
                ));
            }
            if hours_index.insert(h.poi_id.clone(), i).is_some() {
                return Err(invalid_poi(&h.poi_id, "opening hours listed more than once"));
            }
        }
        if let Some(rec) = visits.iter().find(|r| !hours_index.contains_key(&r.poi_id)) {
            return Err(invalid_poi(&rec.poi_id, "missing opening hours"));
        }

        let locations = location_set(&route, &visits);
        for (from, to, _) in travel.iter() {
            for loc in [from, to] {
                if !locations.contains(loc) {
                    return Err(ModelError::InvalidTravel {
                        from: from.into(),
                        to: to.into(),
                        reason: format!("unknown location `{loc}`"),
                    });
                }
            }
        }
        let mut missing = Vec::new();
        let ordered: Vec<&String> = {
            let mut v: Vec<&String> = locations.iter().collect();
            v.sort();
            v
        };
        for from in &ordered {
            for to in &ordered {
                if from != to && travel.get(from, to).is_none() {
                    missing.push(((*from).clone(), (*to).clone()));
                }
            }
        }
        if !missing.is_empty() {
            return Err(ModelError::MissingTravel(missing));
        }

        Ok(Self { route, visits, hours, travel, vmax, visit_index, hours_index })
    }

    /// Parses and validates a canonical JSON instance document.
    pub fn load(bytes: &[u8]) -> Result<Self, ModelError> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        let doc: ProblemDocument = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ModelError::Parse { path, message: e.into_inner().to_string() }
        })?;
        Self::from_document(doc)
    }

    pub fn from_document(doc: ProblemDocument) -> Result<Self, ModelError> {
        let mut travel = TravelTable::new(doc.route.mode.clone());
        for e in doc.travel {
            if e.from == e.to {
                return Err(ModelError::InvalidTravel { from: e.from, to: e.to, reason: "self-loop entry".into() });
            }
            if travel.insert(e.from.clone(), e.to.clone(), e.minutes).is_some() {
                return Err(ModelError::InvalidTravel { from: e.from, to: e.to, reason: "duplicate entry".into() });
            }
        }
        Self::new(doc.route, doc.visits, doc.hours, travel, doc.vmax)
    }

    pub fn to_document(&self) -> ProblemDocument {
        ProblemDocument {
            route: self.route.clone(),
            vmax: self.vmax,
            visits: self.visits.clone(),
            hours: self.hours.clone(),
            travel: self
                .travel
                .iter()
                .map(|(from, to, minutes)| TravelEntry { from: from.into(), to: to.into(), minutes })
                .collect(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("problem documents always serialize")
    }

    pub fn route(&self) -> &RouteDetails {
        &self.route
    }

    pub fn visits(&self) -> &[Recommendation] {
        &self.visits
    }

    pub fn hours(&self) -> &[PoiHours] {
        &self.hours
    }

    pub fn travel(&self) -> &TravelTable {
        &self.travel
    }

    pub fn vmax(&self) -> u32 {
        self.vmax
    }

    pub fn lunch(&self) -> Option<LunchWindow> {
        self.route.lunch
    }

    pub fn recommendation(&self, poi: &str) -> Option<&Recommendation> {
        self.visit_index.get(poi).map(|&i| &self.visits[i])
    }

    pub fn hours_of(&self, poi: &str) -> Option<&PoiHours> {
        self.hours_index.get(poi).map(|&i| &self.hours[i])
    }

    /// Value of a visited location; the restaurant and unknown ids are worth 0.
    pub fn value_of(&self, poi: &str) -> u32 {
        self.recommendation(poi).map_or(0, |r| r.value)
    }

    /// Whether `loc` is a location of this problem (endpoints, POIs, restaurant if lunch).
    pub fn is_location(&self, loc: &str) -> bool {
        loc == self.route.start_loc
            || loc == self.route.final_loc
            || self.visit_index.contains_key(loc)
            || (loc == RESTAURANT && self.route.lunch.is_some())
    }

    pub fn total_value(&self) -> u64 {
        self.visits.iter().map(|r| u64::from(r.value)).sum()
    }

    /// Available time `t_end - t_start`.
    pub fn total_time(&self) -> DurationMin {
        total_time(self)
    }
}

fn invalid_poi(poi: &str, reason: &str) -> ModelError {
    ModelError::InvalidPoi { poi: poi.to_string(), reason: reason.to_string() }
}

fn check_route(route: &RouteDetails) -> Result<(), ModelError> {
    if route.t_start >= route.t_end {
        return Err(ModelError::InvalidRoute(format!(
            "t_start ({}) must precede t_end ({})",
            route.t_start, route.t_end
        )));
    }
    if route.t_end > DAY_END {
        return Err(ModelError::InvalidRoute(format!("t_end ({}) is past {DAY_END}", route.t_end)));
    }
    if route.start_loc.is_empty() || route.final_loc.is_empty() {
        return Err(ModelError::InvalidRoute("route endpoints must be named".into()));
    }
    if route.start_loc == RESTAURANT || route.final_loc == RESTAURANT {
        return Err(ModelError::InvalidRoute(format!("`{RESTAURANT}` cannot be a route endpoint")));
    }
    if let Some(l) = route.lunch {
        if !(route.t_start <= l.l_start && l.l_start < l.l_end && l.l_end <= route.t_end) {
            return Err(ModelError::InvalidRoute(format!(
                "lunch window {}..{} must lie inside {}..{} and be non-empty",
                l.l_start, l.l_end, route.t_start, route.t_end
            )));
        }
    }
    Ok(())
}

fn location_set(route: &RouteDetails, visits: &[Recommendation]) -> HashSet<String> {
    let mut set: HashSet<String> = visits.iter().map(|r| r.poi_id.clone()).collect();
    set.insert(route.start_loc.clone());
    set.insert(route.final_loc.clone());
    if route.lunch.is_some() {
        set.insert(RESTAURANT.to_string());
    }
    set
}

/// `(visit p t_s dur)`
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisitAction {
    #[serde(rename = "id")]
    pub poi_id: String,
    #[serde(rename = "start")]
    pub t_s: TimePoint,
    pub dur: DurationMin,
}

impl VisitAction {
    pub fn finish(&self) -> TimePoint {
        self.t_s + self.dur
    }

    pub fn is_restaurant(&self) -> bool {
        self.poi_id == RESTAURANT
    }
}

/// `(move p q t_s dur)`
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveAction {
    #[serde(rename = "from")]
    pub from_loc: String,
    #[serde(rename = "to")]
    pub to_loc: String,
    #[serde(rename = "start")]
    pub t_s: TimePoint,
    pub dur: DurationMin,
}

impl MoveAction {
    pub fn finish(&self) -> TimePoint {
        self.t_s + self.dur
    }
}

/// A plan: ordered visit actions and ordered move actions forming the chain
/// `move, visit, move, ..., move` from the start to the final location.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plan {
    pub visits: Vec<VisitAction>,
    pub moves: Vec<MoveAction>,
}

impl Plan {
    pub fn load(bytes: &[u8]) -> Result<Self, ModelError> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        serde_path_to_error::deserialize(de)
            .map_err(|e| ModelError::Parse { path: e.path().to_string(), message: e.into_inner().to_string() })
    }

    /// Visits to recommended POIs, i.e. everything except the lunch stop.
    pub fn poi_visits(&self) -> impl Iterator<Item = &VisitAction> {
        self.visits.iter().filter(|v| !v.is_restaurant())
    }

    pub fn poi_visit_count(&self) -> usize {
        self.poi_visits().count()
    }

    pub fn visit_time(&self) -> u64 {
        self.visits.iter().map(|v| u64::from(v.dur)).sum()
    }

    pub fn travel_time(&self) -> u64 {
        self.moves.iter().map(|m| u64::from(m.dur)).sum()
    }
}

/// `t_end - t_start`.
pub fn total_time(problem: &TouristProblem) -> DurationMin {
    problem.route.t_end - problem.route.t_start
}

/// Slack left in the horizon once every visit and move is accounted for.
///
/// Saturates at zero for overcommitted plans, which never validate.
pub fn free_time(problem: &TouristProblem, plan: &Plan) -> DurationMin {
    let used = plan.visit_time() + plan.travel_time();
    u64::from(total_time(problem)).saturating_sub(used) as DurationMin
}
