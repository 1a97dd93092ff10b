mod common;

use std::collections::BTreeMap;

use incver_core::mini::{cond_truth_probability, parse_condition, CondExpr, Mini};
use incver_core::reliability::{verify_reliability, ProbExpr, ReliabilityProfile};
use incver_core::{Rational, Scalar};
use incver_testkit::mini::{random_program, GenConfig};
use incver_testkit::reliability::reliability;
use incver_testkit::safety::alphabet_of;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{rngs::StdRng, SeedableRng};

fn cond_strategy() -> impl Strategy<Value = CondExpr> {
    let leaf = prop_oneof![
        "[a-c]".prop_map(CondExpr::VarEqTrue),
        "[a-c]".prop_map(CondExpr::VarEqFalse),
        Just(CondExpr::Placeholder),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(CondExpr::not),
            (inner.clone(), inner).prop_map(|(a, b)| CondExpr::and(a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(160))]

    #[test]
    fn matches_path_enumeration(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let cfg = GenConfig { scoped: true, max_depth: 3, max_len: 6, ..GenConfig::default() };
        let program = random_program(&mut rng, &cfg);
        let (exact, float) = common::random_profiles(&mut rng, &alphabet_of(cfg.functions));
        let expected = reliability(&program, &float).unwrap();

        let mini = Mini::new();
        let tree = mini.parse(&program.to_string()).unwrap();
        let (report, _) = verify_reliability(&tree, mini.grammar(), &exact).unwrap();
        let value = report.value.as_constant().expect("scoped programs have constant reliability");
        prop_assert!((value.to_f64() - expected).abs() < 1e-12, "{} vs {}", value, expected);
        prop_assert!(value.is_probability());

        let (report, _) = verify_reliability(&tree, mini.grammar(), &to_float(&exact)).unwrap();
        prop_assert!((report.value.as_constant().unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn truth_probability_in_range(e in cond_strategy(), pa in 0u32..=10, pb in 0u32..=10, pc in 0u32..=10, star in 0u32..=10) {
        let probs: BTreeMap<&str, Rational> =
            [("a", pa), ("b", pb), ("c", pc)].into_iter().map(|(v, p)| (v, common::ratio(p.into(), 10))).collect();
        let lookup = |v: &str| ProbExpr::constant(probs[v].clone());
        let p = cond_truth_probability(&e, &lookup, &common::ratio(star.into(), 10)).as_constant().unwrap();
        prop_assert!(p >= Rational::zero() && p <= Rational::one());
    }

    #[test]
    fn condition_display_round_trips(e in cond_strategy()) {
        prop_assert_eq!(parse_condition(&e.to_string()).unwrap(), e);
    }

    /// Defining more variables never turns a known truth value into another.
    #[test]
    fn kleene_monotone(e in cond_strategy(), a in proptest::option::of(any::<bool>()), b in any::<bool>()) {
        let partial = |v: &str| if v == "a" { a } else { None };
        let fuller = |v: &str| match v { "a" => a, "b" => Some(b), _ => None };
        if let Some(known) = e.evaluate(&partial) {
            prop_assert_eq!(e.evaluate(&fuller), Some(known));
        }
    }
}

fn to_float(p: &ReliabilityProfile<Rational>) -> ReliabilityProfile<f64> {
    let convert = |m: &BTreeMap<String, Rational>| m.iter().map(|(k, v)| (k.clone(), v.to_f64())).collect();
    ReliabilityProfile { succ: convert(&p.succ), ret_true: convert(&p.ret_true), placeholder: p.placeholder.to_f64() }
}
