//! PDDL export and plan-trace import.
//!
//! The domain has three durative actions, `move`, `visit` and `eat`, over
//! the fluents `free_time`, `transport_time` and `number_visit_location`.
//! Opening hours become timed initial literals and every recommended POI a
//! soft goal whose violation costs its share of the total value. Only the
//! linear metric M1' can be written as a PDDL metric: U2, U3 and the
//! reciprocal low-occupation penalty need products of fluents, which
//! temporal planners with preference support do not accept.
//!
//! Planner time starts at zero, so all times in the problem file and in
//! plan traces are relative to the route start.
//!
//! Location names are lower-cased and reduced to `[a-z0-9_-]` to survive
//! case-insensitive planners; [`PddlNames`] keeps the mapping.

use crate::model::{MoveAction, OccupationPreference, Plan, TouristProblem, VisitAction, VisitPreference, RESTAURANT};
use crate::scoring::MetricKind;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use thiserror::Error;

/// Name of the single person object.
pub const PERSON: &str = "tourist";
/// Name of the problem written by [`export_problem`].
pub const PROBLEM_NAME: &str = "agenda";

const DOMAIN: &str = "\
(define (domain tourism)
  (:requirements :typing :durative-actions :duration-inequalities
                 :numeric-fluents :timed-initial-literals :preferences)
  (:types
    location person - object
    restaurant - location)
  (:predicates
    (person_at ?y - person ?x - location)
    (visit_location ?x - location)
    (not_visit_location ?x - location)
    (open ?x - location)
    (eaten ?y - person)
    (not_eaten ?y - person))
  (:functions
    (location_time ?x ?z - location)
    (min_visit_time ?x - location)
    (max_visit_time ?x - location)
    (lunch_time)
    (free_time)
    (transport_time)
    (number_visit_location))

(:durative-action move
  :parameters (?x - location ?y - person ?z - location)
  :duration (= ?duration (location_time ?x ?z))
  :condition
    (and
      (at start (person_at ?y ?x))
      (at start (>= (free_time)(location_time ?x ?z))))
  :effect
    (and
      (at start (not (person_at ?y ?x)))
      (at end (person_at ?y ?z))
      (at end (decrease (free_time)
        (location_time ?x ?z)))
      (at end (increase (transport_time)
        (location_time ?x ?z)))))

(:durative-action visit
  :parameters (?x - location ?y - person)
  :duration
    (and
      (>= ?duration (min_visit_time ?x))
      (<= ?duration (max_visit_time ?x))
      (<= ?duration (free_time)))
  :condition
    (and
      (at start (not_visit_location ?x))
      (over all (person_at ?y ?x))
      (over all (open ?x)))
  :effect
    (and
      (at start (not (not_visit_location ?x)))
      (at end (visit_location ?x))
      (at end (increase (number_visit_location) 1))
      (at end (decrease (free_time) ?duration))))

(:durative-action eat
  :parameters (?x - restaurant ?y - person)
  :duration
    (and
      (= ?duration (lunch_time))
      (<= ?duration (free_time)))
  :condition
    (and
      (at start (not_eaten ?y))
      (over all (person_at ?y ?x))
      (over all (open ?x)))
  :effect
    (and
      (at start (not (not_eaten ?y)))
      (at end (eaten ?y))
      (at end (decrease (free_time) ?duration))))
)
";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error("metric {0} cannot be expressed in PDDL: the planner is not able to handle nonlinear functions; only m1prime is supported")]
    UnsupportedMetric(MetricKind),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unknown location `{name}`")]
    UnknownPoi { line: usize, name: String },
}

/// The tourism domain (move, visit and eat). Identical for every problem.
pub fn export_domain() -> String {
    DOMAIN.to_string()
}

/// Bidirectional mapping between problem location ids and PDDL object names.
#[derive(Debug, Clone)]
pub struct PddlNames {
    to_pddl: HashMap<String, String>,
    to_id: HashMap<String, String>,
}

fn sanitize(id: &str) -> String {
    if id == RESTAURANT {
        return "restaurant".into();
    }
    let mut s: String = id
        .chars()
        .map(|c| {
            let c = c.to_ascii_lowercase();
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if !s.starts_with(|c: char| c.is_ascii_alphabetic()) {
        s.insert_str(0, "l_");
    }
    s
}

impl PddlNames {
    pub fn new(problem: &TouristProblem) -> Self {
        let route = problem.route();
        let mut ids: Vec<&str> = vec![route.start_loc.as_str(), route.final_loc.as_str()];
        ids.extend(problem.visits().iter().map(|r| r.poi_id.as_str()));
        if route.lunch.is_some() {
            ids.push(RESTAURANT);
        }
        let mut to_pddl = HashMap::new();
        let mut to_id = HashMap::new();
        let mut taken: HashSet<String> = HashSet::from([PERSON.to_string(), PROBLEM_NAME.to_string()]);
        for id in ids {
            if to_pddl.contains_key(id) {
                continue;
            }
            let base = sanitize(id);
            let mut name = base.clone();
            let mut k = 2;
            while taken.contains(&name) {
                name = format!("{base}-{k}");
                k += 1;
            }
            taken.insert(name.clone());
            to_pddl.insert(id.to_string(), name.clone());
            to_id.insert(name, id.to_string());
        }
        Self { to_pddl, to_id }
    }

    /// Object name of a location id.
    pub fn object(&self, id: &str) -> Option<&str> {
        self.to_pddl.get(id).map(String::as_str)
    }

    /// Location id of an object name (case-insensitive). Original ids are
    /// accepted as well.
    pub fn location(&self, name: &str) -> Option<&str> {
        if let Some((id, _)) = self.to_pddl.get_key_value(name) {
            return Some(id.as_str());
        }
        self.to_id.get(&name.to_ascii_lowercase()).map(String::as_str)
    }
}

fn frac(num: impl std::fmt::Display, den: impl std::fmt::Display) -> String {
    format!("(/ {num} {den})")
}

/// Problem file for `problem` with the M1' metric.
pub fn export_problem(problem: &TouristProblem, kind: MetricKind) -> Result<String, PddlError> {
    if kind != MetricKind::M1Prime {
        return Err(PddlError::UnsupportedMetric(kind));
    }
    let names = PddlNames::new(problem);
    let obj = |id: &str| names.object(id).expect("every location is named").to_string();
    let route = problem.route();
    let t0 = route.t_start;
    let total = problem.total_time();
    let mut out = String::new();

    let _ = writeln!(out, "(define (problem {PROBLEM_NAME})");
    let _ = writeln!(out, "  (:domain tourism)");

    // Objects, in a stable order: endpoints, POIs, restaurant.
    let mut locations: Vec<String> = Vec::new();
    for id in [&route.start_loc, &route.final_loc] {
        let o = obj(id);
        if !locations.contains(&o) {
            locations.push(o);
        }
    }
    for r in problem.visits() {
        locations.push(obj(&r.poi_id));
    }
    let _ = writeln!(out, "  (:objects");
    let _ = writeln!(out, "    {} - location", locations.join(" "));
    if route.lunch.is_some() {
        let _ = writeln!(out, "    {} - restaurant", obj(RESTAURANT));
    }
    let _ = writeln!(out, "    {PERSON} - person)");

    let _ = writeln!(out, "  (:init");
    let _ = writeln!(out, "    (person_at {PERSON} {})", obj(&route.start_loc));
    let _ = writeln!(out, "    (= (free_time) {total})");
    let _ = writeln!(out, "    (= (transport_time) 0)");
    let _ = writeln!(out, "    (= (number_visit_location) 0)");
    let window = |out: &mut String, o: &str, open: u32, close: u32| {
        if close <= t0 {
            return;
        }
        if open <= t0 {
            let _ = writeln!(out, "    (open {o})");
        } else {
            let _ = writeln!(out, "    (at {} (open {o}))", open - t0);
        }
        let _ = writeln!(out, "    (at {} (not (open {o})))", close - t0);
    };
    for r in problem.visits() {
        let o = obj(&r.poi_id);
        let _ = writeln!(out, "    (not_visit_location {o})");
        let _ = writeln!(out, "    (= (min_visit_time {o}) {})", r.dmin);
        let _ = writeln!(out, "    (= (max_visit_time {o}) {})", r.dmax);
        let h = problem.hours_of(&r.poi_id).expect("every POI has hours");
        window(&mut out, &o, h.open, h.close);
    }
    if let Some(l) = route.lunch {
        let o = obj(RESTAURANT);
        let _ = writeln!(out, "    (not_eaten {PERSON})");
        let _ = writeln!(out, "    (= (lunch_time) {})", l.duration());
        window(&mut out, &o, l.l_start, l.l_end);
    }
    let mut travel: BTreeMap<(String, String), u32> = BTreeMap::new();
    for (from, to, minutes) in problem.travel().iter() {
        if let (Some(a), Some(b)) = (names.object(from), names.object(to)) {
            if a != b {
                travel.insert((a.to_string(), b.to_string()), minutes);
            }
        }
    }
    for ((a, b), m) in &travel {
        let _ = writeln!(out, "    (= (location_time {a} {b}) {m})");
    }
    let _ = writeln!(out, "  )");

    let _ = writeln!(out, "  (:goal");
    let _ = writeln!(out, "    (and");
    let _ = writeln!(out, "      (person_at {PERSON} {})", obj(&route.final_loc));
    if route.lunch.is_some() {
        let _ = writeln!(out, "      (eaten {PERSON})");
    }
    for (i, r) in problem.visits().iter().enumerate() {
        let _ = writeln!(out, "      (preference p{} (visit_location {}))", i + 1, obj(&r.poi_id));
    }
    let _ = writeln!(out, "    ))");

    // P_U1 + P_journey + P_#visits + P_occup (linear variant).
    let mut terms: Vec<String> = Vec::new();
    let sum = problem.total_value();
    if sum == 0 {
        terms.push("1".into());
    } else {
        for (i, r) in problem.visits().iter().enumerate() {
            terms.push(frac(format!("(* {} (is-violated p{}))", r.value, i + 1), sum));
        }
    }
    terms.push(frac("(transport_time)", total));
    let n = problem.visits().len();
    if n > 0 {
        match route.pref_visits {
            VisitPreference::Few => terms.push(frac("(number_visit_location)", n)),
            VisitPreference::Many => terms.push(frac(format!("(- {n} (number_visit_location))"), n)),
            VisitPreference::Indif => {}
        }
    }
    match route.pref_occup {
        OccupationPreference::High => terms.push(frac("(free_time)", total)),
        OccupationPreference::Low => terms.push(frac(format!("(- {total} (free_time))"), total)),
        OccupationPreference::Indif => {}
    }
    let _ = writeln!(out, "  (:metric minimize");
    let _ = writeln!(out, "    (+");
    for t in &terms {
        let _ = writeln!(out, "      {t}");
    }
    let _ = writeln!(out, "    ))");
    let _ = writeln!(out, ")");
    Ok(out)
}

/// Temporal plan trace of `plan`, one `time: (action args) [duration]` line
/// per action in chain order, times relative to the route start.
pub fn to_trace(problem: &TouristProblem, plan: &Plan) -> String {
    let names = PddlNames::new(problem);
    let t0 = i64::from(problem.route().t_start);
    let name = |id: &str| names.object(id).map_or_else(|| id.to_string(), str::to_string);
    let mut out = String::new();
    let mut line = |t: u32, body: String, dur: u32| {
        let _ = writeln!(out, "{:.3}: ({body}) [{dur}.000]", i64::from(t) - t0);
    };
    let mut moves = plan.moves.iter();
    for v in &plan.visits {
        if let Some(m) = moves.next() {
            line(m.t_s, format!("move {} {PERSON} {}", name(&m.from_loc), name(&m.to_loc)), m.dur);
        }
        let action = if v.is_restaurant() { "eat" } else { "visit" };
        line(v.t_s, format!("{action} {} {PERSON}", name(&v.poi_id)), v.dur);
    }
    for m in moves {
        line(m.t_s, format!("move {} {PERSON} {}", name(&m.from_loc), name(&m.to_loc)), m.dur);
    }
    out
}

/// Parses a whole number of minutes written as an integer or a decimal.
fn parse_minutes(s: &str, line: usize) -> Result<i64, PddlError> {
    let bad = |m: String| PddlError::Parse { line, message: m };
    let x: f64 = s.parse().map_err(|_| bad(format!("`{s}` is not a number")))?;
    let r = x.round();
    if !x.is_finite() || (x - r).abs() > 1e-3 {
        return Err(bad(format!("`{s}` is not a whole number of minutes")));
    }
    Ok(r as i64)
}

/// Reads a temporal plan (`time: (action args) [duration]` per line) into a
/// [`Plan`]. Blank lines and `;` comments are ignored; actions are ordered
/// by start time.
pub fn import_plan_trace(problem: &TouristProblem, trace: &str) -> Result<Plan, PddlError> {
    let names = PddlNames::new(problem);
    let t0 = i64::from(problem.route().t_start);
    let mut plan = Plan::default();
    for (idx, raw) in trace.lines().enumerate() {
        let line = idx + 1;
        let text = raw.split(';').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let bad = |m: &str| PddlError::Parse { line, message: m.to_string() };
        let (time, rest) = text.split_once(':').ok_or_else(|| bad("expected `time: (action args) [duration]`"))?;
        let rest = rest.trim();
        let open = rest.find('(').ok_or_else(|| bad("missing `(`"))?;
        let close = rest.find(')').ok_or_else(|| bad("missing `)`"))?;
        if open != 0 || close < open {
            return Err(bad("expected `(action args)` after the time"));
        }
        let words: Vec<&str> = rest[1..close].split_whitespace().collect();
        let tail = rest[close + 1..].trim();
        let dur =
            tail.strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(|| bad("missing `[duration]`"))?;
        let start = parse_minutes(time.trim(), line)? + t0;
        let dur = parse_minutes(dur.trim(), line)?;
        if start < 0 || dur < 0 || start + dur > i64::from(u32::MAX) {
            return Err(bad("time out of range"));
        }
        let (start, dur) = (start as u32, dur as u32);
        let loc = |name: &str| {
            names
                .location(name)
                .map(str::to_string)
                .ok_or_else(|| PddlError::UnknownPoi { line, name: name.to_string() })
        };
        let action = words.first().map(|w| w.to_ascii_lowercase());
        match (action.as_deref(), words.len()) {
            (Some("move"), 4) => {
                plan.moves.push(MoveAction { from_loc: loc(words[1])?, to_loc: loc(words[3])?, t_s: start, dur })
            }
            (Some("visit"), 3) | (Some("eat"), 3) => {
                plan.visits.push(VisitAction { poi_id: loc(words[1])?, t_s: start, dur })
            }
            (Some(a @ ("move" | "visit" | "eat")), k) => {
                return Err(bad(&format!("`{a}` takes {} arguments, got {}", if a == "move" { 3 } else { 2 }, k - 1)))
            }
            (Some(a), _) => return Err(bad(&format!("unknown action `{a}`"))),
            (None, _) => return Err(bad("empty action")),
        }
    }
    plan.visits.sort_by_key(|v| v.t_s);
    plan.moves.sort_by_key(|m| m.t_s);
    Ok(plan)
}

/// S-expression used by the lint pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items) => Some(items),
            Sexp::Atom(_) => None,
        }
    }

    fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::atom)
    }
}

/// Parses PDDL text into its top-level s-expressions (`;` starts a comment).
pub fn parse_sexps(text: &str) -> Result<Vec<Sexp>, PddlError> {
    let mut stack: Vec<(usize, Vec<Sexp>)> = Vec::new();
    let mut top = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let code = raw.split(';').next().unwrap_or("");
        let spaced = code.replace('(', " ( ").replace(')', " ) ");
        for tok in spaced.split_whitespace() {
            match tok {
                "(" => stack.push((line, Vec::new())),
                ")" => {
                    let (_, items) =
                        stack.pop().ok_or_else(|| PddlError::Parse { line, message: "unbalanced `)`".into() })?;
                    let node = Sexp::List(items);
                    match stack.last_mut() {
                        Some((_, parent)) => parent.push(node),
                        None => top.push(node),
                    }
                }
                atom => {
                    let node = Sexp::Atom(atom.to_ascii_lowercase());
                    match stack.last_mut() {
                        Some((_, parent)) => parent.push(node),
                        None => top.push(node),
                    }
                }
            }
        }
    }
    if let Some((line, _)) = stack.last() {
        return Err(PddlError::Parse { line: *line, message: "unclosed `(`".into() });
    }
    Ok(top)
}

fn section<'a>(define: &'a [Sexp], key: &str) -> Option<&'a [Sexp]> {
    define.iter().find(|s| s.head() == Some(key)).and_then(Sexp::list).map(|l| &l[1..])
}

/// Predicate and function arities declared by a domain.
fn domain_symbols(domain: &str) -> Result<HashMap<String, usize>, PddlError> {
    let parsed = parse_sexps(domain)?;
    let define = parsed.first().and_then(Sexp::list).unwrap_or(&[]);
    let mut out = HashMap::new();
    for key in [":predicates", ":functions"] {
        for decl in section(define, key).unwrap_or(&[]) {
            if let Some(items) = decl.list() {
                if let Some(name) = items.first().and_then(Sexp::atom) {
                    let arity = items[1..].iter().filter(|s| s.atom().is_some_and(|a| a.starts_with('?'))).count();
                    out.insert(name.to_string(), arity);
                }
            }
        }
    }
    Ok(out)
}

const OPERATORS: [&str; 9] = ["and", "not", "+", "-", "*", "/", "=", ">=", "<="];

struct Lint<'a> {
    symbols: &'a HashMap<String, usize>,
    objects: &'a HashSet<String>,
    preferences: &'a HashSet<String>,
    issues: Vec<String>,
}

impl Lint<'_> {
    fn expr(&mut self, e: &Sexp) {
        let Some(items) = e.list() else {
            if let Some(a) = e.atom() {
                if a.parse::<f64>().is_err() {
                    self.issues.push(format!("stray symbol `{a}`"));
                }
            }
            return;
        };
        let Some(head) = items.first().and_then(Sexp::atom) else {
            self.issues.push("list without a head symbol".into());
            return;
        };
        let args = &items[1..];
        match head {
            h if OPERATORS.contains(&h) => args.iter().for_each(|a| self.expr(a)),
            "at" => {
                if args.len() != 2 || args[0].atom().is_none_or(|t| t.parse::<f64>().is_err()) {
                    self.issues.push("`at` needs a time and a literal".into());
                }
                args.iter().skip(1).for_each(|a| self.expr(a));
            }
            "preference" => args.iter().skip(1).for_each(|a| self.expr(a)),
            "is-violated" => match args {
                [Sexp::Atom(p)] if self.preferences.contains(p) => {}
                _ => self.issues.push(format!("`is-violated` of an undeclared preference: {args:?}")),
            },
            name => match self.symbols.get(name) {
                None => self.issues.push(format!("undeclared predicate or function `{name}`")),
                Some(&arity) => {
                    if args.len() != arity {
                        self.issues.push(format!("`{name}` takes {arity} arguments, got {}", args.len()));
                    }
                    for a in args {
                        match a.atom() {
                            Some(o) if self.objects.contains(o) => {}
                            _ => self.issues.push(format!("`{name}` references undeclared object {a:?}")),
                        }
                    }
                }
            },
        }
    }
}

/// Closed-world check of a problem file against the domain: every atom uses
/// a declared predicate or function with the right arity and only objects
/// declared in `:objects`; every `is-violated` names a declared preference.
/// Returns the issues found (empty when clean).
pub fn lint_problem(domain: &str, problem: &str) -> Result<Vec<String>, PddlError> {
    let symbols = domain_symbols(domain)?;
    let parsed = parse_sexps(problem)?;
    let define = match parsed.as_slice() {
        [d] if d.head() == Some("define") => d.list().unwrap_or(&[]),
        _ => return Ok(vec!["expected a single `(define ...)` form".into()]),
    };
    let mut objects = HashSet::new();
    let mut issues = Vec::new();
    let mut type_next = false;
    for s in section(define, ":objects").unwrap_or(&[]) {
        match s.atom() {
            Some("-") => type_next = true,
            Some(_) if type_next => type_next = false,
            Some(name) => {
                if !objects.insert(name.to_string()) {
                    issues.push(format!("object `{name}` declared twice"));
                }
            }
            None => issues.push("unexpected list in :objects".into()),
        }
    }
    let goal = section(define, ":goal").unwrap_or(&[]);
    let mut preferences = HashSet::new();
    fn collect(e: &Sexp, out: &mut HashSet<String>) {
        if let Some(items) = e.list() {
            if e.head() == Some("preference") {
                if let Some(name) = items.get(1).and_then(Sexp::atom) {
                    out.insert(name.to_string());
                }
            }
            items.iter().for_each(|i| collect(i, out));
        }
    }
    goal.iter().for_each(|g| collect(g, &mut preferences));

    let mut lint = Lint { symbols: &symbols, objects: &objects, preferences: &preferences, issues };
    for key in [":init", ":goal"] {
        match section(define, key) {
            Some(items) => items.iter().for_each(|e| lint.expr(e)),
            None => lint.issues.push(format!("missing {key}")),
        }
    }
    if let Some(metric) = section(define, ":metric") {
        match metric {
            [Sexp::Atom(dir), e] if dir == "minimize" || dir == "maximize" => lint.expr(e),
            _ => lint.issues.push("`:metric` must be `minimize` or `maximize` of one expression".into()),
        }
    }
    Ok(lint.issues)
}
