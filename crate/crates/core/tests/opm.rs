use std::collections::BTreeSet;

use incver_core::arith::{arithmetic_grammar, tokenize_arithmetic, ArithmeticSchema};
use incver_core::grammar::{terminal_border_sets, validate_fnf, validate_operator_form, Grammar};
use incver_core::mini::{mini_grammar, untokenize, Mini};
use incver_core::{compute_opm, evaluate, parse, Relation};
use incver_testkit::arith::random_sum;
use incver_testkit::mini::{random_program, GenConfig};
use proptest::prelude::*;
use rand::{rngs::StdRng, SeedableRng};

fn named_relations(g: &Grammar) -> BTreeSet<(String, String, Relation)> {
    compute_opm(g)
        .unwrap()
        .entries()
        .map(|(a, b, r)| (g.terminal_name(a).to_string(), g.terminal_name(b).to_string(), r))
        .collect()
}

fn rebuilt(g: &Grammar, order: &[usize]) -> Grammar {
    let mut builder = Grammar::builder(g.nonterminal_name(g.axiom()));
    for &i in order {
        let rule = &g.rules()[i];
        let rhs: Vec<String> = rule.rhs().iter().map(|s| g.symbol_name(*s).to_string()).collect();
        builder = builder.rule(rule.name(), g.nonterminal_name(rule.lhs()), rhs);
    }
    builder.build().unwrap()
}

#[test]
fn shipped_grammars_are_well_formed() {
    for g in [arithmetic_grammar(), mini_grammar()] {
        assert!(validate_operator_form(&g).is_ok());
        assert!(validate_fnf(&g).is_ok());
        assert!(terminal_border_sets(&g).is_fixpoint(&g));
        assert!(compute_opm(&g).is_ok());
    }
}

proptest! {
    #[test]
    fn matrix_ignores_rule_order(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut rng = StdRng::seed_from_u64(seed);
        for g in [arithmetic_grammar(), mini_grammar()] {
            let mut order: Vec<usize> = (0..g.rules().len()).collect();
            order.shuffle(&mut rng);
            prop_assert_eq!(named_relations(&rebuilt(&g, &order)), named_relations(&g));
        }
    }

    #[test]
    fn arithmetic_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let sum = random_sum(&mut rng, 12);
        let g = arithmetic_grammar();
        let m = compute_opm(&g).unwrap();
        let tokens = tokenize_arithmetic(&g, &sum.to_string()).unwrap();
        let tree = parse(&g, &m, &tokens).unwrap();
        prop_assert_eq!(tree.tokens(), tokens);
        let map = evaluate(&tree, &g, &ArithmeticSchema::<u128>::new()).unwrap();
        prop_assert_eq!(*map.get(tree.root().id()).unwrap(), sum.value());
    }

    #[test]
    fn mini_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let program = random_program(&mut rng, &GenConfig { max_depth: 3, max_len: 6, ..GenConfig::default() });
        let mini = Mini::new();
        let lexed = mini.tokenize(&program.to_string()).unwrap();
        let tree = mini.parse_tokens(&lexed.tokens).unwrap();
        prop_assert_eq!(tree.tokens(), lexed.tokens.clone());
        let again = mini.parse(&untokenize(&lexed.tokens)).unwrap();
        prop_assert!(again.structurally_equal(&tree));
    }
}
