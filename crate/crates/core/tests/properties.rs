//! Invariants over random instances and random valid plans.

mod common;

use agenda_core::genbench::{generate, GenSpec};
use agenda_core::model::{free_time, OccupationPreference, TouristProblem, VisitPreference};
use agenda_core::scoring::{self, MetricKind, OccupVariant, Rational};
use agenda_core::solver::{schedule_sequence, solve, SolveOptions};
use agenda_core::validate::{is_valid, validate};
use common::{random_instance, random_plan, random_valid_pair};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn in_unit(r: &Rational) -> bool {
    *r >= Rational::zero() && *r <= Rational::one()
}

fn with_doc(problem: &TouristProblem, edit: impl FnOnce(&mut agenda_core::model::ProblemDocument)) -> TouristProblem {
    let mut doc = problem.to_document();
    edit(&mut doc);
    TouristProblem::from_document(doc).unwrap()
}

#[test]
fn penalties_in_unit_interval_on_10k_valid_plans() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..10_000 {
        let (problem, plan) = random_valid_pair(&mut rng, 8);
        for variant in [OccupVariant::Reciprocal, OccupVariant::Linear] {
            let b = scoring::breakdown(&problem, &plan, variant);
            for (name, r) in [
                ("p_u1", &b.p_u1),
                ("p_u2", &b.p_u2),
                ("p_u3", &b.p_u3),
                ("p_journey", &b.p_journey),
                ("p_visits", &b.p_visits),
                ("p_occup", &b.p_occup),
            ] {
                assert!(in_unit(r), "{name} = {r} for {plan:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn free_time_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (problem, plan) = random_valid_pair(&mut rng, 8);
        let used = plan.visit_time() + plan.travel_time();
        prop_assert_eq!(u64::from(free_time(&problem, &plan)) + used, u64::from(problem.total_time()));
        let b = scoring::breakdown(&problem, &plan, OccupVariant::Reciprocal);
        prop_assert_eq!(b.free_time, free_time(&problem, &plan));
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), n in 0usize..12, h in 0usize..3) {
        let spec = GenSpec::new(seed, n, [180, 300, 540][h], VisitPreference::Many, OccupationPreference::Low);
        prop_assert_eq!(generate(&spec).unwrap().to_json_pretty(), generate(&spec).unwrap().to_json_pretty());
    }

    #[test]
    fn metrics_are_invariant_under_value_scaling(seed in any::<u64>(), k in 2u32..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (problem, plan) = random_valid_pair(&mut rng, 8);
        let scaled = with_doc(&problem, |doc| {
            doc.vmax *= k;
            doc.visits.iter_mut().for_each(|r| r.value *= k);
        });
        for kind in MetricKind::ALL {
            prop_assert_eq!(scoring::metric(&problem, &plan, kind), scoring::metric(&scaled, &plan, kind));
        }
    }

    #[test]
    fn validity_is_monotone_in_the_horizon_end(seed in any::<u64>(), extra in 1u32..120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (problem, plan) = random_valid_pair(&mut rng, 8);
        let longer = with_doc(&problem, |doc| doc.route.t_end = (doc.route.t_end + extra).min(1440));
        prop_assert!(is_valid(&longer, &plan));
    }

    #[test]
    fn scheduler_output_always_validates(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let problem = random_instance(&mut rng, 6);
        let ids: Vec<&str> = problem.visits().iter().map(|r| r.poi_id.as_str()).collect();
        let mut seq: Vec<&str> = ids.iter().copied().filter(|_| rand::Rng::gen_bool(&mut rng, 0.5)).collect();
        let mut durs: Vec<u32> = seq.iter().map(|id| problem.recommendation(id).unwrap().dmin).collect();
        if problem.lunch().is_some() {
            seq.push(agenda_core::model::RESTAURANT);
            durs.push(0);
        }
        if let Ok(plan) = schedule_sequence(&problem, &seq, &durs) {
            prop_assert_eq!(validate(&problem, &plan), vec![]);
        }
    }

    #[test]
    fn scheduler_accepts_every_valid_sequence(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (problem, plan) = random_valid_pair(&mut rng, 8);
        let ids: Vec<&str> = plan.visits.iter().map(|v| v.poi_id.as_str()).collect();
        let durs: Vec<u32> = plan.visits.iter().map(|v| v.dur).collect();
        let rebuilt = schedule_sequence(&problem, &ids, &durs).unwrap();
        prop_assert_eq!(free_time(&problem, &rebuilt), free_time(&problem, &plan));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn solver_optimum_bounds_every_valid_plan(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (problem, _) = random_valid_pair(&mut rng, 4);
        let opts = SolveOptions::default().with_grid(1);
        for kind in MetricKind::ALL {
            let best = solve(&problem, kind, &opts).unwrap();
            prop_assert!(best.proven_optimal);
            for _ in 0..20 {
                if let Some(plan) = random_plan(&mut rng, &problem) {
                    prop_assert!(best.objective <= scoring::metric(&problem, &plan, kind));
                }
            }
        }
    }

    #[test]
    fn solve_is_deterministic_and_seed_independent(seed in any::<u64>(), shuffle in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let problem = random_instance(&mut rng, 6);
        for kind in MetricKind::ALL {
            let a = solve(&problem, kind, &SolveOptions::default());
            let b = solve(&problem, kind, &SolveOptions::default());
            let c = solve(&problem, kind, &SolveOptions { seed: Some(shuffle), ..SolveOptions::default() });
            match (a, b, c) {
                (Ok(a), Ok(b), Ok(c)) => {
                    prop_assert_eq!(&a.plan, &b.plan);
                    prop_assert_eq!(&a.objective, &b.objective);
                    prop_assert_eq!(&a.plan, &c.plan);
                }
                (Err(a), Err(b), Err(c)) => {
                    prop_assert_eq!(&a, &b);
                    prop_assert_eq!(&a, &c);
                }
                other => prop_assert!(false, "inconsistent outcomes: {other:?}"),
            }
        }
    }
}
