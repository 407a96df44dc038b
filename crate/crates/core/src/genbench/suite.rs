//! Benchmark harness: solve a grid of generated instances under several
//! metrics and aggregate the evaluation measures per preference group.
//!
//! Instances are indexed by size, horizon, visit preference, occupation
//! preference and replicate, in that nesting order. The random draw of an
//! instance depends on the suite seed, size, horizon and replicate only, so
//! the nine preference combinations of a replicate share the same POIs,
//! hours and travel times; preference groups are therefore compared on
//! identical geography.

use super::generate::{generate, GenSpec};
use crate::exec::Execution;
use crate::model::{OccupationPreference, TouristProblem, VisitPreference};
use crate::scoring::{self, MetricKind};
use crate::solver::{solve, SolveError, SolveOptions};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;
use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub horizons: Vec<u32>,
    pub metrics: Vec<MetricKind>,
    pub instances_per_combo: usize,
    pub grid: u32,
    pub time_limit: Option<Duration>,
    pub exec: Execution,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            sizes: vec![3, 5, 7],
            horizons: super::HORIZONS.to_vec(),
            metrics: MetricKind::ALL.to_vec(),
            instances_per_combo: 2,
            grid: crate::solver::DEFAULT_GRID,
            time_limit: Some(Duration::from_secs(60)),
            exec: Execution::Parallel,
        }
    }
}

/// One generated instance of the suite.
#[derive(Debug, Clone)]
pub struct SuiteInstance {
    pub id: String,
    pub spec: GenSpec,
    pub problem: TouristProblem,
}

/// Outcome of one solver run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    /// Proven optimal.
    Optimal,
    /// Limit reached; the best plan found is reported.
    Timeout,
    /// Limit reached without any plan.
    Unsolved,
    /// No feasible plan exists.
    Infeasible,
}

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub id: String,
    pub n: usize,
    pub horizon: u32,
    pub pref_visits: VisitPreference,
    pub pref_occup: OccupationPreference,
    pub metric: MetricKind,
    pub status: RunStatus,
    pub objective: Option<f64>,
    /// Number of POI visits (lunch excluded).
    pub visits: Option<u32>,
    /// Fraction of the horizon spent in activities.
    pub occupation: Option<f64>,
    pub u1_star: Option<f64>,
    /// U2 normalised by vmax.
    pub u2: Option<f64>,
    /// U3 normalised by vmax.
    pub u3: Option<f64>,
    pub nodes: u64,
    pub elapsed_ms: u64,
}

impl ResultRow {
    fn has_plan(&self) -> bool {
        self.visits.is_some()
    }
}

/// One line of `aggregates.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    /// `occup` (grouped by occupation preference), `visits` (by visit
    /// preference) or `panel` (by size and horizon).
    pub table: String,
    pub metric: MetricKind,
    pub group: String,
    pub runs: usize,
    pub solved: usize,
    pub optimal: usize,
    pub occupation: f64,
    pub visits: f64,
    pub u1_star: f64,
    pub u2: f64,
    pub u3: f64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl SuiteReport {
    /// Looks up an aggregate line.
    pub fn aggregate(&self, table: &str, metric: MetricKind, group: &str) -> Option<&AggregateRow> {
        self.aggregates.iter().find(|a| a.table == table && a.metric == metric && a.group == group)
    }

    pub fn write_results_csv<W: io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_aggregates_csv<W: io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.aggregates {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mixes the suite seed with an instance coordinate (SplitMix64 finaliser).
fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The instances of a suite, in report order.
pub fn suite_instances(config: &SuiteConfig) -> Vec<SuiteInstance> {
    let mut out = Vec::new();
    for &n in &config.sizes {
        for &horizon in &config.horizons {
            for pv in VisitPreference::ALL {
                for po in OccupationPreference::ALL {
                    for rep in 0..config.instances_per_combo {
                        let salt = ((n as u64) << 40) | (u64::from(horizon) << 16) | rep as u64;
                        let spec = GenSpec::new(derive_seed(config.seed, salt), n, horizon, pv, po);
                        let problem = generate(&spec).expect("suite specs are valid");
                        out.push(SuiteInstance { id: format!("n{n}-h{horizon}-{pv}-{po}-r{rep}"), spec, problem });
                    }
                }
            }
        }
    }
    out
}

fn run_one(inst: &SuiteInstance, kind: MetricKind, opts: &SolveOptions) -> ResultRow {
    let mut row = ResultRow {
        id: inst.id.clone(),
        n: inst.spec.n_visits,
        horizon: inst.spec.horizon,
        pref_visits: inst.spec.pref_visits,
        pref_occup: inst.spec.pref_occup,
        metric: kind,
        status: RunStatus::Infeasible,
        objective: None,
        visits: None,
        occupation: None,
        u1_star: None,
        u2: None,
        u3: None,
        nodes: 0,
        elapsed_ms: 0,
    };
    let started = std::time::Instant::now();
    match solve(&inst.problem, kind, opts) {
        Ok(res) => {
            let p = &inst.problem;
            let vmax = f64::from(p.vmax());
            let b = scoring::breakdown(p, &res.plan, kind.occup_variant());
            row.status = if res.proven_optimal { RunStatus::Optimal } else { RunStatus::Timeout };
            row.objective = Some(res.objective_value);
            row.visits = Some(res.plan.poi_visit_count() as u32);
            row.occupation = Some(scoring::to_f64(&scoring::eval_occupation(p, &res.plan)));
            row.u1_star = Some(scoring::to_f64(&scoring::eval_u1_star(p, &res.plan)));
            row.u2 = Some(scoring::to_f64(&b.u2) / vmax);
            row.u3 = Some(scoring::to_f64(&b.u3) / vmax);
            row.nodes = res.nodes_explored;
        }
        Err(SolveError::NoSolutionWithinLimits) => row.status = RunStatus::Unsolved,
        Err(_) => row.status = RunStatus::Infeasible,
    }
    row.elapsed_ms = started.elapsed().as_millis() as u64;
    row
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Averages per (table, metric, group), in a deterministic order.
pub fn aggregate(rows: &[ResultRow], metrics: &[MetricKind]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(u8, MetricKind, String), Vec<&ResultRow>> = BTreeMap::new();
    for row in rows {
        groups.entry((0, row.metric, row.pref_occup.to_string())).or_default().push(row);
        groups.entry((1, row.metric, row.pref_visits.to_string())).or_default().push(row);
        groups.entry((2, row.metric, format!("n{}-h{}", row.n, row.horizon))).or_default().push(row);
    }
    let tables = ["occup", "visits", "panel"];
    let mut out = Vec::new();
    for ((table, metric, group), members) in groups {
        if !metrics.contains(&metric) {
            continue;
        }
        let solved: Vec<&&ResultRow> = members.iter().filter(|r| r.has_plan()).collect();
        out.push(AggregateRow {
            table: tables[table as usize].to_string(),
            metric,
            group,
            runs: members.len(),
            solved: solved.len(),
            optimal: members.iter().filter(|r| r.status == RunStatus::Optimal).count(),
            occupation: mean(solved.iter().filter_map(|r| r.occupation)),
            visits: mean(solved.iter().filter_map(|r| r.visits.map(f64::from))),
            u1_star: mean(solved.iter().filter_map(|r| r.u1_star)),
            u2: mean(solved.iter().filter_map(|r| r.u2)),
            u3: mean(solved.iter().filter_map(|r| r.u3)),
            elapsed_ms: mean(members.iter().map(|r| r.elapsed_ms as f64)),
        });
    }
    out
}

/// Solves every suite instance under every metric.
pub fn run_suite(config: &SuiteConfig) -> SuiteReport {
    let instances = suite_instances(config);
    run_instances(config, &instances)
}

/// Solves the given instances under every metric of `config`.
pub fn run_instances(config: &SuiteConfig, instances: &[SuiteInstance]) -> SuiteReport {
    let opts = SolveOptions { duration_grid: config.grid, time_limit: config.time_limit, ..SolveOptions::default() };
    let jobs: Vec<(usize, MetricKind)> =
        (0..instances.len()).flat_map(|i| config.metrics.iter().map(move |&k| (i, k))).collect();
    let rows = config.exec.map_collect(&jobs, |&(i, kind)| run_one(&instances[i], kind, &opts));
    let aggregates = aggregate(&rows, &config.metrics);
    SuiteReport { rows, aggregates }
}

/// Writes `instances/*.json`, `results.csv` and `aggregates.csv` under `dir`.
pub fn write_outputs(dir: &Path, instances: &[SuiteInstance], report: &SuiteReport) -> io::Result<()> {
    let inst_dir = dir.join("instances");
    fs::create_dir_all(&inst_dir)?;
    for inst in instances {
        fs::write(inst_dir.join(format!("{}.json", inst.id)), inst.problem.to_json_pretty())?;
    }
    let to_io = |e: csv::Error| io::Error::other(e);
    report.write_results_csv(fs::File::create(dir.join("results.csv"))?).map_err(to_io)?;
    report.write_aggregates_csv(fs::File::create(dir.join("aggregates.csv"))?).map_err(to_io)?;
    Ok(())
}
