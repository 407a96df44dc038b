//! The branch-and-bound solver must agree with exhaustive enumeration on
//! small random instances, for every metric and preference combination.

use agenda_core::genbench::{generate, GenSpec, HORIZONS};
use agenda_core::model::{OccupationPreference, VisitPreference};
use agenda_core::oracle::oracle_solve_all;
use agenda_core::solver::{solve, SolveError, SolveOptions};
use agenda_core::validate::validate;
use agenda_core::{Execution, MetricKind};

const GRID: u32 = 10;

fn spec(i: u64) -> GenSpec {
    let n = 3 + (i % 3) as usize;
    let horizon = HORIZONS[(i / 3 % 3) as usize];
    let pv = VisitPreference::ALL[(i / 9 % 3) as usize];
    let po = OccupationPreference::ALL[(i / 27 % 3) as usize];
    GenSpec::new(1000 + i, n, horizon, pv, po)
}

fn check(i: u64) {
    let spec = spec(i);
    let problem = generate(&spec).unwrap();
    let oracle = oracle_solve_all(&problem, &MetricKind::ALL, GRID, Execution::default());
    let opts = SolveOptions::default().with_grid(GRID);
    for (k, &kind) in MetricKind::ALL.iter().enumerate() {
        let solved = solve(&problem, kind, &opts);
        match (&oracle, solved) {
            (Ok(report), Ok(res)) => {
                let want = &report.results[k];
                assert!(res.proven_optimal, "instance {i} {kind}: not proven optimal");
                assert_eq!(res.objective, want.objective, "instance {i} {kind}: objective differs");
                assert_eq!(res.plan, want.plan, "instance {i} {kind}: tie-break differs");
                assert!(validate(&problem, &res.plan).is_empty());
            }
            (Err(SolveError::Infeasible), Err(SolveError::Infeasible)) => {}
            (o, s) => panic!("instance {i} {kind}: oracle {:?} vs solver {:?}", o.as_ref().err(), s.err()),
        }
    }
}

#[test]
fn solver_matches_oracle_on_200_instances() {
    for i in 0..200 {
        check(i);
    }
}
