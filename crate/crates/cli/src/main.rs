//! `agenda`: generate, solve, score, validate and export tourist agendas.
//!
//! Every subcommand reads JSON documents (a path, or `-` for standard
//! input) and writes machine-readable output to standard output;
//! diagnostics go to standard error. Exit codes: 0 on success, 1 on domain
//! errors (infeasible instance, invalid plan, malformed document), 2 on
//! usage errors.

use agenda_core::genbench::{self, GenSpec, SuiteConfig};
use agenda_core::model::{OccupationPreference, Plan, TouristProblem, VisitPreference};
use agenda_core::oracle::oracle_solve;
use agenda_core::solver::{solve, SolveOptions, DEFAULT_GRID};
use agenda_core::validate::{explain, validate};
use agenda_core::{pddl, scoring, Execution, MetricKind, SCHEMA_VERSION};
use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

#[derive(Debug, Parser)]
#[command(name = "agenda", about = "Personalized tourist agenda optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of POIs.
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Route length in minutes.
        #[arg(long, default_value_t = 540)]
        horizon: u32,
        #[arg(long, default_value = "indif")]
        pref_visits: VisitPreference,
        #[arg(long, default_value = "indif")]
        pref_occup: OccupationPreference,
        /// Output file (standard output when absent).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Find an optimal plan with branch and bound.
    Solve(SolveArgs),
    /// Find an optimal plan by exhaustive enumeration (at most 7 POIs).
    Oracle(SolveArgs),
    /// Score a plan: penalties, all metrics, U1* and occupation.
    Score {
        #[arg(short, long)]
        input: String,
        #[arg(short, long)]
        plan: String,
        /// Also report this metric as the headline objective.
        #[arg(long)]
        metric: Option<MetricKind>,
    },
    /// Check a plan; prints the violation list and exits 1 if it is not empty.
    Validate {
        #[arg(short, long)]
        input: String,
        #[arg(short, long)]
        plan: String,
        /// Print a human-readable timeline instead of JSON.
        #[arg(long)]
        explain: bool,
    },
    /// Write `domain.pddl` and `problem-<id>.pddl`.
    ExportPddl {
        /// Instance to export; only the domain is written when absent.
        #[arg(short, long)]
        input: Option<String>,
        #[arg(long, default_value = "m1prime")]
        metric: MetricKind,
        /// Output directory (the problem, or the domain, goes to standard output when absent).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Problem id used in the file name (defaults to the input file stem).
        #[arg(long)]
        id: Option<String>,
    },
    /// Convert a temporal plan trace into a plan document.
    ImportPlan {
        #[arg(short, long)]
        input: String,
        /// Trace file, `time: (action args) [duration]` per line.
        #[arg(short, long, default_value = "-")]
        trace: String,
    },
    /// Run the benchmark suite and write instances, results and aggregates.
    Bench {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Per-run time limit in seconds.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        #[arg(long, value_delimiter = ',', default_value = "m1,m2,m3,m1prime")]
        metrics: Vec<MetricKind>,
        #[arg(long, value_delimiter = ',', default_value = "3,5,7")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "180,300,540")]
        horizons: Vec<u32>,
        /// Instances per (size, horizon, preference) combination.
        #[arg(long, default_value_t = 2)]
        per_combo: usize,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: u32,
        /// Run on the calling thread only.
        #[arg(long)]
        sequential: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Debug, clap::Args)]
struct SolveArgs {
    #[arg(short, long)]
    input: String,
    #[arg(long, default_value = "m1")]
    metric: MetricKind,
    /// Duration grid step in minutes.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: u32,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
    /// Shuffle the branching order (off by default).
    #[arg(long)]
    seed: Option<u64>,
}

enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    fn domain(e: impl std::fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn read_input(path: &str) -> Result<Vec<u8>, CliError> {
    if path == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).map_err(|e| CliError::Usage(format!("reading standard input: {e}")))?;
        Ok(buf)
    } else {
        fs::read(path).map_err(|e| CliError::Usage(format!("reading {path}: {e}")))
    }
}

fn load_problem(path: &str) -> Result<TouristProblem, CliError> {
    TouristProblem::load(&read_input(path)?).map_err(|e| CliError::Domain(format!("{path}: {e}")))
}

fn load_plan(path: &str) -> Result<Plan, CliError> {
    Plan::load(&read_input(path)?).map_err(|e| CliError::Domain(format!("{path}: {e}")))
}

fn check_stdin_once(paths: &[&str]) -> CliResult {
    if paths.iter().filter(|p| **p == "-").count() > 1 {
        return Err(CliError::Usage("only one input can be read from standard input".into()));
    }
    Ok(())
}

fn emit(text: &str) -> CliResult {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| if text.ends_with('\n') { Ok(()) } else { out.write_all(b"\n") })
        .map_err(|e| CliError::Usage(format!("writing output: {e}")))
}

fn emit_json<T: serde::Serialize>(value: &T) -> CliResult {
    emit(&serde_json::to_string_pretty(value).expect("reports serialize"))
}

fn write_file(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::Usage(format!("writing {}: {e}", path.display())))
}

fn seconds(secs: f64) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(secs).map_err(|_| CliError::Usage(format!("invalid time limit {secs}")))
}

fn solve_opts(args: &SolveArgs) -> Result<SolveOptions, CliError> {
    Ok(SolveOptions {
        duration_grid: args.grid,
        node_limit: args.node_limit,
        time_limit: args.time_limit.map(seconds).transpose()?,
        seed: args.seed,
    })
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Gen { seed, n, horizon, pref_visits, pref_occup, output } => {
            let spec = GenSpec::new(seed, n, horizon, pref_visits, pref_occup);
            let problem = genbench::generate(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
            let text = problem.to_json_pretty();
            match output {
                Some(path) => write_file(&path, &(text + "\n")),
                None => emit(&text),
            }
        }
        Command::Solve(args) => {
            let problem = load_problem(&args.input)?;
            let result = solve(&problem, args.metric, &solve_opts(&args)?).map_err(CliError::domain)?;
            emit_json(&result)
        }
        Command::Oracle(args) => {
            let problem = load_problem(&args.input)?;
            let result = oracle_solve(&problem, args.metric, args.grid).map_err(CliError::domain)?;
            emit_json(&result)
        }
        Command::Score { input, plan, metric } => {
            check_stdin_once(&[&input, &plan])?;
            let problem = load_problem(&input)?;
            let plan = load_plan(&plan)?;
            let report = scoring::score_report(&problem, &plan);
            match metric {
                None => emit_json(&report),
                Some(kind) => {
                    let objective = report.metrics.get(kind);
                    emit_json(&serde_json::json!({
                        "metric": kind,
                        "objective": objective.to_string(),
                        "objective_value": scoring::to_f64(&objective),
                        "report": report,
                    }))
                }
            }
        }
        Command::Validate { input, plan, explain: timeline } => {
            check_stdin_once(&[&input, &plan])?;
            let problem = load_problem(&input)?;
            let plan = load_plan(&plan)?;
            let violations = validate(&problem, &plan);
            if timeline && violations.is_empty() {
                emit(&explain(&problem, &plan).to_string())?;
            } else {
                emit_json(&violations)?;
            }
            if violations.is_empty() {
                Ok(())
            } else {
                Err(CliError::Domain(format!("plan has {} violation(s)", violations.len())))
            }
        }
        Command::ExportPddl { input, metric, out_dir, id } => {
            let domain = pddl::export_domain();
            let problem = match &input {
                Some(path) => {
                    let p = load_problem(path)?;
                    Some(pddl::export_problem(&p, metric).map_err(CliError::domain)?)
                }
                None => None,
            };
            match out_dir {
                None => emit(problem.as_deref().unwrap_or(&domain)),
                Some(dir) => {
                    fs::create_dir_all(&dir)
                        .map_err(|e| CliError::Usage(format!("creating {}: {e}", dir.display())))?;
                    let domain_path = dir.join("domain.pddl");
                    write_file(&domain_path, &domain)?;
                    let mut written = serde_json::json!({ "domain": domain_path });
                    if let Some(text) = problem {
                        let id = id
                            .or_else(|| {
                                input
                                    .as_deref()
                                    .filter(|p| *p != "-")
                                    .and_then(|p| Path::new(p).file_stem())
                                    .map(|s| s.to_string_lossy().into_owned())
                            })
                            .unwrap_or_else(|| "stdin".into());
                        let path = dir.join(format!("problem-{id}.pddl"));
                        write_file(&path, &text)?;
                        written["problem"] = serde_json::json!(path);
                    }
                    emit_json(&written)
                }
            }
        }
        Command::ImportPlan { input, trace } => {
            check_stdin_once(&[&input, &trace])?;
            let problem = load_problem(&input)?;
            let bytes = read_input(&trace)?;
            let text = String::from_utf8(bytes).map_err(|_| CliError::Domain("trace is not UTF-8".into()))?;
            let plan = pddl::import_plan_trace(&problem, &text).map_err(CliError::domain)?;
            emit_json(&plan)
        }
        Command::Bench { seed, time_limit, metrics, sizes, horizons, per_combo, grid, sequential, out_dir } => {
            if let Some(&n) = sizes.iter().find(|&&n| n > genbench::MAX_GEN_POIS) {
                return Err(CliError::Usage(format!("size {n} exceeds {}", genbench::MAX_GEN_POIS)));
            }
            let config = SuiteConfig {
                seed,
                sizes,
                horizons,
                metrics,
                instances_per_combo: per_combo,
                grid,
                time_limit: Some(seconds(time_limit)?),
                exec: if sequential { Execution::Sequential } else { Execution::Parallel },
            };
            let instances = genbench::suite_instances(&config);
            let report = genbench::run_instances(&config, &instances);
            genbench::write_outputs(&out_dir, &instances, &report)
                .map_err(|e| CliError::Usage(format!("writing {}: {e}", out_dir.display())))?;
            let mut buf = Vec::new();
            report.write_aggregates_csv(&mut buf).map_err(CliError::domain)?;
            emit(&String::from_utf8(buf).expect("csv is UTF-8"))
        }
    }
}

fn main() -> ExitCode {
    let version: &'static str =
        Box::leak(format!("{} (schema {SCHEMA_VERSION})", env!("CARGO_PKG_VERSION")).into_boxed_str());
    let matches = Cli::command().version(version).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
