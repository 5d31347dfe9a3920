mod common;

use common::*;
use epibif::model::presets;
use epibif::odesim::{IntegratorConfig, StepStats};
use epibif::report::{format_trajectory, parse_trajectory};
use epibif::{ModelId, StateVector, Trajectory};
use proptest::prelude::*;

fn factors() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..1.5, MAX_FIELDS)
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn equilibria_annihilate_the_field(f in factors(), which in 0usize..5) {
        let m = perturbed(bases()[which], &f);
        prop_assume!(m.is_some());
        prop_assert!(residuals(&m.unwrap()).is_ok());
    }

    #[test]
    fn analytic_jacobian_matches_differences(
        f in factors(),
        which in 0usize..5,
        x in prop::collection::vec(0.01f64..100.0, 3),
    ) {
        let m = perturbed(bases()[which], &f);
        prop_assume!(m.is_some());
        let m = m.unwrap();
        let r = jacobian_vs_differences(&m, &sample_state(&m, &x));
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn planar_autoimmune_trace_is_pinned(f in factors(), lambda in 1.0f64..5000.0) {
        let m = perturbed(presets::autoimmune_2d(lambda), &f);
        prop_assume!(m.is_some());
        let r = planar_autoimmune_trace(&m.unwrap());
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn trajectory_csv_round_trips_bitwise(
        t0 in -1e3f64..1e3,
        steps in prop::collection::vec(1e-9f64..1e3, 1..40),
        dim in 2usize..4,
        seed in prop::collection::vec(prop::num::f64::NORMAL, 120),
    ) {
        let mut times = vec![t0];
        for s in &steps {
            let last = *times.last().unwrap();
            prop_assume!(last + s > last);
            times.push(last + s);
        }
        let states: Vec<StateVector> = (0..times.len())
            .map(|i| StateVector::new((0..dim).map(|k| seed[(i * dim + k) % seed.len()]).collect()))
            .collect();
        let model = if dim == 2 { ModelId::InhostConvex } else { ModelId::Autoimmune3d };
        let tr = Trajectory { model, param_value: 0.0, times: times.clone(), states: states.clone(), stats: StepStats::default() };
        let (bt, bs) = parse_trajectory(&format_trajectory(&tr, 1).unwrap()).unwrap();
        prop_assert_eq!(bits(&bt), bits(&times));
        for (a, b) in bs.iter().zip(&states) {
            prop_assert_eq!(bits(a.as_slice()), bits(b.as_slice()));
        }
    }

    #[test]
    fn along_branch_intersections_are_equilibria(a in 0.02f64..1.0, b in 0.005f64..0.2) {
        let r = along_branch_intersections(a, b);
        prop_assert!(r.is_ok(), "{:?}", r);
    }
}

#[test]
fn quoted_along_branch_example_has_two_crossings() {
    assert_eq!(along_branch_intersections(0.364, 0.03).unwrap(), Some(2));
}

#[test]
fn integrator_defaults_per_model() {
    assert_eq!(IntegratorConfig::for_model(ModelId::InhostConvex).t_end, 5000.0);
    assert_eq!(IntegratorConfig::for_model(ModelId::Autoimmune3d).t_end, 2000.0);
}
