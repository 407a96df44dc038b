//! Utilities, preference penalties, metrics and evaluation measures.
//!
//! Every quantity is an exact rational; rounding happens only when a value
//! is reported. All penalties live in `[0, 1]` and every metric is an
//! equal-weight sum of penalties, so lower is better.
//!
//! The scoring of a plan depends only on a handful of integer aggregates
//! ([`PlanTotals`]); the search code accumulates those incrementally and the
//! public per-plan functions derive them from a [`Plan`].

use crate::model::{free_time, total_time, OccupationPreference, Plan, TouristProblem, VisitPreference};
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Exact rational number used for every score.
pub type Rational = Ratio<i128>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScoringError {
    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(&'static str),
}

/// Formula used for the Low occupation preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OccupVariant {
    /// `1 / (free_time · total_time)`, capped at 1 when there is no free time.
    Reciprocal,
    /// `(total_time − free_time) / total_time`, expressible as a linear plan metric.
    Linear,
}

/// Objective to minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricKind {
    /// Utility per POI: `P_U1 + P_journey + P_visits + P_occup`.
    #[serde(rename = "m1")]
    M1,
    /// Utility per time unit: `P_U2 + P_visits + P_occup`.
    #[serde(rename = "m2")]
    M2,
    /// Utility per visiting time: `P_U3 + P_journey + P_visits + P_occup`.
    #[serde(rename = "m3")]
    M3,
    /// M1 with the linear Low-occupation penalty.
    #[serde(rename = "m1prime")]
    M1Prime,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [Self::M1, Self::M2, Self::M3, Self::M1Prime];

    pub fn occup_variant(self) -> OccupVariant {
        match self {
            Self::M1Prime => OccupVariant::Linear,
            _ => OccupVariant::Reciprocal,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::M1 => "m1",
            Self::M2 => "m2",
            Self::M3 => "m3",
            Self::M1Prime => "m1prime",
        }
    }

    /// Whether the objective contains the journey penalty.
    pub fn uses_journey(self) -> bool {
        !matches!(self, Self::M2)
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(Self::M1),
            "m2" => Ok(Self::M2),
            "m3" => Ok(Self::M3),
            "m1prime" | "m1'" | "m1p" => Ok(Self::M1Prime),
            other => Err(format!("unknown metric `{other}` (m1|m2|m3|m1prime)")),
        }
    }
}

/// Integer aggregates of a plan that fully determine its scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PlanTotals {
    /// Number of visits to recommended POIs (lunch excluded).
    pub visits: u32,
    /// Σ v_p over visited POIs.
    pub value: u64,
    /// Σ v_p · dur_p over visited POIs.
    pub value_time: u64,
    /// Σ dur_p over visited POIs (lunch excluded).
    pub poi_time: u64,
    /// Σ move durations.
    pub journey: u64,
    /// Horizon minutes not spent in visits, lunch or moves.
    pub free_time: u32,
}

impl PlanTotals {
    pub fn of(problem: &TouristProblem, plan: &Plan) -> Self {
        let mut t =
            PlanTotals { journey: plan.travel_time(), free_time: free_time(problem, plan), ..PlanTotals::default() };
        for v in plan.poi_visits() {
            let value = u64::from(problem.value_of(&v.poi_id));
            t.visits += 1;
            t.value += value;
            t.value_time += value * u64::from(v.dur);
            t.poi_time += u64::from(v.dur);
        }
        t
    }
}

/// The six penalties, the three raw utilities and the free time of a plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PenaltyBreakdown {
    #[serde(with = "exact")]
    pub u1: Rational,
    #[serde(with = "exact")]
    pub u2: Rational,
    #[serde(with = "exact")]
    pub u3: Rational,
    #[serde(with = "exact")]
    pub p_u1: Rational,
    #[serde(with = "exact")]
    pub p_u2: Rational,
    #[serde(with = "exact")]
    pub p_u3: Rational,
    #[serde(with = "exact")]
    pub p_journey: Rational,
    #[serde(with = "exact")]
    pub p_visits: Rational,
    #[serde(with = "exact")]
    pub p_occup: Rational,
    pub free_time: u32,
    pub occup_variant: OccupVariant,
}

impl PenaltyBreakdown {
    /// Builds the breakdown from plan aggregates.
    ///
    /// Degenerate denominators follow the worst-case conventions: with no
    /// recommended value `U1 = 0`, and with no recommended POIs the visits
    /// penalty is 0 (there is nothing to prefer).
    pub fn from_totals(problem: &TouristProblem, totals: &PlanTotals, variant: OccupVariant) -> Self {
        let t = i128::from(total_time(problem));
        let vmax = i128::from(problem.vmax());
        let total_value = i128::from(problem.total_value());
        let one = Rational::from_integer(1);

        let u1 = if total_value == 0 { Rational::zero() } else { Rational::new(totals.value as i128, total_value) };
        let u2 = Rational::new(totals.value_time as i128, t);
        let u3 = if totals.poi_time == 0 {
            Rational::zero()
        } else {
            Rational::new(totals.value_time as i128, totals.poi_time as i128)
        };
        let vmax_r = Rational::from_integer(vmax);
        let route = problem.route();
        PenaltyBreakdown {
            p_u1: one - u1,
            p_u2: (vmax_r - u2) / vmax_r,
            p_u3: (vmax_r - u3) / vmax_r,
            p_journey: Rational::new(totals.journey as i128, t),
            p_visits: visits_term(route.pref_visits, totals.visits, problem.visits().len()),
            p_occup: occup_term(route.pref_occup, variant, totals.free_time, total_time(problem)),
            u1,
            u2,
            u3,
            free_time: totals.free_time,
            occup_variant: variant,
        }
    }

    /// Objective value of `kind`. The occupation term is taken as stored, so
    /// the breakdown should be computed with `kind.occup_variant()` (the two
    /// variants only differ under the Low occupation preference).
    pub fn metric(&self, kind: MetricKind) -> Rational {
        match kind {
            MetricKind::M1 | MetricKind::M1Prime => self.p_u1 + self.p_journey + self.p_visits + self.p_occup,
            MetricKind::M2 => self.p_u2 + self.p_visits + self.p_occup,
            MetricKind::M3 => self.p_u3 + self.p_journey + self.p_visits + self.p_occup,
        }
    }
}

fn visits_term(pref: VisitPreference, k: u32, n: usize) -> Rational {
    if n == 0 {
        return Rational::zero();
    }
    let n = n as i128;
    let k = i128::from(k);
    match pref {
        VisitPreference::Many => Rational::new(n - k, n),
        VisitPreference::Indif => Rational::zero(),
        VisitPreference::Few => Rational::new(k, n),
    }
}

fn occup_term(pref: OccupationPreference, variant: OccupVariant, free: u32, total: u32) -> Rational {
    let free = i128::from(free);
    let total = i128::from(total);
    match (pref, variant) {
        (OccupationPreference::High, _) => Rational::new(free, total),
        (OccupationPreference::Indif, _) => Rational::zero(),
        (OccupationPreference::Low, OccupVariant::Reciprocal) => {
            if free == 0 {
                Rational::from_integer(1)
            } else {
                Rational::new(1, free * total)
            }
        }
        (OccupationPreference::Low, OccupVariant::Linear) => Rational::new(total - free, total),
    }
}

/// Fraction of the total recommended value collected by the plan.
pub fn utility_u1(problem: &TouristProblem, plan: &Plan) -> Result<Rational, ScoringError> {
    let total = problem.total_value();
    if total == 0 {
        return Err(ScoringError::DegenerateDenominator("the recommended values sum to zero"));
    }
    let got: u64 = plan.poi_visits().map(|v| u64::from(problem.value_of(&v.poi_id))).sum();
    Ok(Rational::new(got as i128, total as i128))
}

/// Value-weighted visiting time per minute of the horizon.
pub fn utility_u2(problem: &TouristProblem, plan: &Plan) -> Rational {
    PenaltyBreakdown::from_totals(problem, &PlanTotals::of(problem, plan), OccupVariant::Reciprocal).u2
}

/// Duration-weighted mean value of the visited POIs; 0 for an empty agenda.
pub fn utility_u3(problem: &TouristProblem, plan: &Plan) -> Rational {
    PenaltyBreakdown::from_totals(problem, &PlanTotals::of(problem, plan), OccupVariant::Reciprocal).u3
}

/// Share of the horizon spent travelling.
pub fn penalty_journey(problem: &TouristProblem, plan: &Plan) -> Rational {
    Rational::new(plan.travel_time() as i128, i128::from(total_time(problem)))
}

/// Penalty for deviating from the preferred number of visits.
pub fn penalty_visits(problem: &TouristProblem, plan: &Plan, pref: VisitPreference) -> Result<Rational, ScoringError> {
    let n = problem.visits().len();
    if n == 0 {
        return Err(ScoringError::DegenerateDenominator("no recommended POIs"));
    }
    Ok(visits_term(pref, plan.poi_visit_count() as u32, n))
}

/// Penalty for deviating from the preferred temporal occupation.
pub fn penalty_occup(
    problem: &TouristProblem,
    plan: &Plan,
    pref: OccupationPreference,
    variant: OccupVariant,
) -> Rational {
    occup_term(pref, variant, free_time(problem, plan), total_time(problem))
}

/// Full breakdown using the problem's preferences.
pub fn breakdown(problem: &TouristProblem, plan: &Plan, variant: OccupVariant) -> PenaltyBreakdown {
    PenaltyBreakdown::from_totals(problem, &PlanTotals::of(problem, plan), variant)
}

/// Objective value of `plan` under `kind`.
pub fn metric(problem: &TouristProblem, plan: &Plan, kind: MetricKind) -> Rational {
    breakdown(problem, plan, kind.occup_variant()).metric(kind)
}

/// Objective value from aggregates; the search hot path.
pub fn metric_from_totals(problem: &TouristProblem, totals: &PlanTotals, kind: MetricKind) -> Rational {
    PenaltyBreakdown::from_totals(problem, totals, kind.occup_variant()).metric(kind)
}

/// Mean per-visit fraction of `vmax`; 0 for an empty agenda.
pub fn eval_u1_star(problem: &TouristProblem, plan: &Plan) -> Rational {
    let t = PlanTotals::of(problem, plan);
    if t.visits == 0 {
        return Rational::zero();
    }
    Rational::new(t.value as i128, i128::from(t.visits) * i128::from(problem.vmax()))
}

/// Fraction of the horizon spent in visits, lunch or moves.
pub fn eval_occupation(problem: &TouristProblem, plan: &Plan) -> Rational {
    let total = i128::from(total_time(problem));
    Rational::from_integer(1) - Rational::new(i128::from(free_time(problem, plan)), total)
}

/// Lossy conversion for reporting.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Problem constants needed to score plan aggregates quickly.
///
/// [`ScoreContext::metric_f64`] mirrors the exact formulas in floating
/// point; search code uses it to discard clearly worse candidates before
/// paying for exact rational arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreContext {
    pub total_time: u32,
    pub total_value: u64,
    pub vmax: u32,
    pub n_visits: usize,
    pub pref_visits: VisitPreference,
    pub pref_occup: OccupationPreference,
}

impl ScoreContext {
    pub fn new(problem: &TouristProblem) -> Self {
        let route = problem.route();
        Self {
            total_time: total_time(problem),
            total_value: problem.total_value(),
            vmax: problem.vmax(),
            n_visits: problem.visits().len(),
            pref_visits: route.pref_visits,
            pref_occup: route.pref_occup,
        }
    }

    pub fn visits_f64(&self, k: u32) -> f64 {
        if self.n_visits == 0 {
            return 0.0;
        }
        let n = self.n_visits as f64;
        match self.pref_visits {
            VisitPreference::Many => (n - f64::from(k)) / n,
            VisitPreference::Indif => 0.0,
            VisitPreference::Few => f64::from(k) / n,
        }
    }

    pub fn occup_f64(&self, free: f64, variant: OccupVariant) -> f64 {
        let total = f64::from(self.total_time);
        let free = free.max(0.0);
        match (self.pref_occup, variant) {
            (OccupationPreference::High, _) => free / total,
            (OccupationPreference::Indif, _) => 0.0,
            (OccupationPreference::Low, OccupVariant::Reciprocal) => {
                if free == 0.0 {
                    1.0
                } else {
                    1.0 / (free * total)
                }
            }
            (OccupationPreference::Low, OccupVariant::Linear) => (total - free) / total,
        }
    }

    /// Floating-point approximation of the metric of `totals`.
    pub fn metric_f64(&self, totals: &PlanTotals, kind: MetricKind) -> f64 {
        let total = f64::from(self.total_time);
        let vmax = f64::from(self.vmax);
        let p_u1 = if self.total_value == 0 { 1.0 } else { 1.0 - totals.value as f64 / self.total_value as f64 };
        let p_journey = totals.journey as f64 / total;
        let p_visits = self.visits_f64(totals.visits);
        let p_occup = self.occup_f64(f64::from(totals.free_time), kind.occup_variant());
        match kind {
            MetricKind::M1 | MetricKind::M1Prime => p_u1 + p_journey + p_visits + p_occup,
            MetricKind::M2 => 1.0 - totals.value_time as f64 / total / vmax + p_visits + p_occup,
            MetricKind::M3 => {
                let p_u3 = if totals.poi_time == 0 {
                    1.0
                } else {
                    1.0 - totals.value_time as f64 / totals.poi_time as f64 / vmax
                };
                p_u3 + p_journey + p_visits + p_occup
            }
        }
    }
}

/// Everything the `score` command reports about one plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub breakdown: PenaltyBreakdown,
    /// Low-occupation penalty under the linear variant (equals `p_occup` unless the preference is Low).
    #[serde(with = "exact")]
    pub p_occup_linear: Rational,
    pub metrics: MetricValues,
    #[serde(with = "exact")]
    pub u1_star: Rational,
    #[serde(with = "exact")]
    pub occupation: Rational,
    /// Decimal rendering of the values above, for humans and spreadsheets.
    pub rounded: RoundedScores,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricValues {
    #[serde(with = "exact")]
    pub m1: Rational,
    #[serde(with = "exact")]
    pub m2: Rational,
    #[serde(with = "exact")]
    pub m3: Rational,
    #[serde(with = "exact")]
    pub m1prime: Rational,
}

impl MetricValues {
    pub fn get(&self, kind: MetricKind) -> Rational {
        match kind {
            MetricKind::M1 => self.m1,
            MetricKind::M2 => self.m2,
            MetricKind::M3 => self.m3,
            MetricKind::M1Prime => self.m1prime,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundedScores {
    pub p_u1: f64,
    pub p_u2: f64,
    pub p_u3: f64,
    pub p_journey: f64,
    pub p_visits: f64,
    pub p_occup: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m1prime: f64,
    pub u1_star: f64,
    pub occupation: f64,
}

/// Rounds to four decimals for reports.
pub fn round4(r: &Rational) -> f64 {
    (to_f64(r) * 1e4).round() / 1e4
}

pub fn score_report(problem: &TouristProblem, plan: &Plan) -> ScoreReport {
    let totals = PlanTotals::of(problem, plan);
    let reciprocal = PenaltyBreakdown::from_totals(problem, &totals, OccupVariant::Reciprocal);
    let linear = PenaltyBreakdown::from_totals(problem, &totals, OccupVariant::Linear);
    let metrics = MetricValues {
        m1: reciprocal.metric(MetricKind::M1),
        m2: reciprocal.metric(MetricKind::M2),
        m3: reciprocal.metric(MetricKind::M3),
        m1prime: linear.metric(MetricKind::M1Prime),
    };
    let u1_star = eval_u1_star(problem, plan);
    let occupation = eval_occupation(problem, plan);
    let rounded = RoundedScores {
        p_u1: round4(&reciprocal.p_u1),
        p_u2: round4(&reciprocal.p_u2),
        p_u3: round4(&reciprocal.p_u3),
        p_journey: round4(&reciprocal.p_journey),
        p_visits: round4(&reciprocal.p_visits),
        p_occup: round4(&reciprocal.p_occup),
        m1: round4(&metrics.m1),
        m2: round4(&metrics.m2),
        m3: round4(&metrics.m3),
        m1prime: round4(&metrics.m1prime),
        u1_star: round4(&u1_star),
        occupation: round4(&occupation),
    };
    ScoreReport { p_occup_linear: linear.p_occup, breakdown: reciprocal, metrics, u1_star, occupation, rounded }
}

/// Serde adapter writing rationals as `"num/den"` strings (or `"num"` when integral).
pub mod exact {
    use super::Rational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).ok_or_else(|| D::Error::custom(format!("invalid rational `{s}`")))
    }

    pub fn parse(s: &str) -> Option<Rational> {
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let d: i128 = d.trim().parse().ok()?;
                if d == 0 {
                    return None;
                }
                Some(Rational::new(n.trim().parse().ok()?, d))
            }
            None => Some(Rational::from_integer(s.parse().ok()?)),
        }
    }
}
