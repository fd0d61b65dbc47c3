use lipembed_core::params::{check_constraints, Verdict};
use lipembed_core::ParameterSet;
use proptest::prelude::*;

const VIOLATED: [&str; 3] = ["k0 > 6000 alpha gamma", "m >= 9 alpha beta + 3 alpha gamma v0", "gamma k0 > 300 alpha beta"];

#[test]
fn printed_values_verdicts() {
    let r = check_constraints(&ParameterSet::reference());
    assert_eq!(r.rows.len(), 10);
    for row in &r.rows {
        let want = if VIOLATED.contains(&row.name) { Verdict::Violated } else { Verdict::Satisfied };
        assert_eq!(row.verdict, want, "{}", row.name);
    }
    assert!(!r.overall);
    // Exact hand values for the failing rows.
    let row = |n: &str| r.rows.iter().find(|x| x.name == n).unwrap().clone();
    assert_eq!(row(VIOLATED[0]).rhs, "16800000");
    assert_eq!(row(VIOLATED[0]).slack, "-3800000");
    assert_eq!(row(VIOLATED[1]).rhs, "702000000");
    assert_eq!(row(VIOLATED[2]).lhs, "4550000000");
    assert_eq!(row(VIOLATED[2]).rhs, "10800000000");
    let last = r.rows.last().unwrap();
    assert!(last.error_bound <= 1e-14);
    assert!(last.slack_f64 > 0.1);
}

#[test]
fn gamma_forty_alpha_boundary() {
    let base = ParameterSet::reference();
    let at = |alpha: f64, gamma: f64| {
        let r = check_constraints(&ParameterSet { alpha, gamma, ..base.clone() });
        r.rows.iter().find(|x| x.name == "gamma > 40 alpha").unwrap().verdict
    };
    assert_eq!(at(8.0, 350.0), Verdict::Satisfied);
    assert_eq!(at(7.0, 280.0), Verdict::Violated);
}

#[test]
fn overall_is_the_conjunction() {
    for p in [ParameterSet::reference(), ParameterSet::toy()] {
        let r = check_constraints(&p);
        assert_eq!(r.overall, r.rows.iter().all(|x| x.verdict == Verdict::Satisfied));
    }
}

proptest! {
    #[test]
    fn raising_gamma_keeps_gamma_constraint(alpha in 1u32..20, gamma in 1u32..2000, extra in 0u32..500) {
        let base = ParameterSet::reference();
        let v = |g: u32| {
            let r = check_constraints(&ParameterSet { alpha: alpha as f64, gamma: g as f64, ..base.clone() });
            r.rows.iter().find(|x| x.name == "gamma > 40 alpha").unwrap().verdict
        };
        if v(gamma) == Verdict::Satisfied {
            prop_assert_eq!(v(gamma + extra), Verdict::Satisfied);
        }
    }

    #[test]
    fn report_is_pure(k0 in 1u64..100_000_000, v0 in 1u64..1_000_000) {
        let p = ParameterSet { k0, v0, ..ParameterSet::reference() };
        prop_assert_eq!(check_constraints(&p), check_constraints(&p));
    }
}
