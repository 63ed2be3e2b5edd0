//! Structural properties of single trajectories over random initial values.

use proptest::prelude::*;
use sn_bound::analysis::sturm_node_bound;
use sn_bound::shoot::{classify, Verdict};
use sn_bound::{escape_predicate, launch, EventKind, IntegrationControls, ProblemParams, Termination};

fn params() -> impl Strategy<Value = ProblemParams> {
    prop_oneof![
        (0u8..=1).prop_map(|parity| ProblemParams::new(1, parity as f64).unwrap()),
        (0.0f64..4.0).prop_map(|m| ProblemParams::new(2, m).unwrap()),
    ]
}

// Below about 0.02 in the plane the radius where V = 1 grows like u0^-2
// and full trajectories carry tens of thousands of zeros.
fn log_u0() -> impl Strategy<Value = f64> {
    (-1.7f64..1.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn radii_increase_and_potential_grows(p in params(), u0 in log_u0()) {
        let c = IntegrationControls::default();
        let (prof, _) = launch(u0, &p, &c).unwrap();
        for w in prof.samples.windows(2) {
            prop_assert!(w[1].r > w[0].r);
            prop_assert!(w[1].state.v > w[0].state.v, "V drops at r = {}", w[1].r);
        }
        for s in &prof.samples {
            prop_assert!(s.state.dv > 0.0);
        }
    }

    #[test]
    fn zeros_are_simple_and_ordered(p in params(), u0 in log_u0()) {
        let c = IntegrationControls::default();
        let (prof, events) = launch(u0, &p, &c).unwrap();
        for w in prof.zeros.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        let located: Vec<_> = events.iter().filter(|e| e.kind == EventKind::UZero).collect();
        prop_assert_eq!(located.len(), prof.zeros.len());
        for (e, &z) in located.iter().zip(&prof.zeros) {
            prop_assert_eq!(e.r, z);
            prop_assert!(e.state.u.abs() < 10.0 * c.abs_tol);
            prop_assert!(e.state.du != 0.0);
        }
    }

    #[test]
    fn escape_verdict_matches_predicate(p in params(), u0 in log_u0()) {
        let c = IntegrationControls::default();
        let (prof, events) = launch(u0, &p, &c).unwrap();
        let cl = classify(u0, &p, &c).unwrap();
        let escape = events.iter().find(|e| e.kind == EventKind::Escape);
        match cl.verdict {
            Verdict::Undecided => prop_assert!(escape.is_none()),
            v => {
                let e = escape.unwrap();
                prop_assert!(escape_predicate(&e.state, u0, &c));
                prop_assert_eq!(v == Verdict::EscapedPositive, e.state.u > 0.0);
                prop_assert_eq!(cl.nodes, prof.zeros_before(e.r));
                prop_assert_eq!(Some(e.r), cl.r_escape);
            }
        }
    }

    #[test]
    fn sturm_bound_never_exceeds_nodes(p in params(), e in -4.0f64..1.0) {
        // The bound counts zeros below b, so any horizon beyond b will do.
        let u0 = 10f64.powf(e);
        let b = p.half_radius_lower_bound(u0);
        let c = IntegrationControls { r_max: Some(4.0 * b.max(5.0)), ..Default::default() };
        let cl = classify(u0, &p, &c).unwrap();
        prop_assert!(cl.nodes >= sturm_node_bound(u0, &p).unwrap());
    }
}

#[test]
fn step_budget_ends_without_error() {
    let p = ProblemParams::new(2, 0.0).unwrap();
    let c = IntegrationControls {
        max_steps: 5000,
        ..Default::default()
    };
    let (prof, _) = launch(1e-3, &p, &c).unwrap();
    assert_eq!(prof.termination, Termination::StepLimit);
    assert!(!prof.zeros.is_empty());
    let cl = classify(1e-3, &p, &c).unwrap();
    assert_eq!(cl.verdict, Verdict::Undecided);
    assert_eq!(cl.nodes, prof.zeros.len());
}
