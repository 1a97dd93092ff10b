mod common;

use incver_core::arith::{arithmetic_grammar, tokenize_arithmetic, ArithmeticSchema};
use incver_core::grammar::{Grammar, PrecedenceMatrix};
use incver_core::mini::Mini;
use incver_core::reliability::ReliabilitySchema;
use incver_core::safety::{image_automaton, SafetySchema};
use incver_core::{apply_edit, compute_opm, diff_to_edit, evaluate, parse, reevaluate, AttributeSchema, Token};
use incver_testkit::arith::random_sum;
use incver_testkit::mini::{random_program_of_len, random_statement, GenConfig};
use incver_testkit::safety::{alphabet_of, random_automaton};
use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

/// Re-evaluates after `old → new` and compares with a fresh evaluation.
fn agree<S: AttributeSchema>(g: &Grammar, m: &PrecedenceMatrix, schema: &S, old: &[Token], new: &[Token]) {
    let tree = parse(g, m, old).unwrap();
    let Ok(map) = evaluate(&tree, g, schema) else { return };
    let (next, _, splice) = apply_edit(&tree, &diff_to_edit(old, new), g, m).unwrap();
    let incremental = reevaluate(&next, g, schema, splice.as_ref(), map);
    match (incremental, evaluate(&next, g, schema)) {
        (Ok((map, stats)), Ok(fresh)) => {
            assert_eq!(map, fresh);
            assert_eq!(stats.attributes_recomputed + stats.attributes_reused, fresh.attribute_count());
        }
        (Err(_), Err(_)) => {}
        (a, b) => panic!("disagreement: {:?} vs {:?}", a.map(|_| ()).err(), b.map(|_| ()).err()),
    }
}

fn mini_versions(rng: &mut impl Rng, cfg: &GenConfig, mini: &Mini) -> (Vec<Token>, Vec<Token>) {
    let len = rng.gen_range(1..12);
    let mut program = random_program_of_len(rng, cfg, len);
    let old = mini.tokenize(&program.to_string()).unwrap().tokens;
    let i = rng.gen_range(0..program.body.len());
    if rng.gen_bool(0.2) && program.body.len() > 1 {
        program.body.remove(i);
    } else {
        program.body[i] = random_statement(rng, cfg);
    }
    (old, mini.tokenize(&program.to_string()).unwrap().tokens)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn arithmetic(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = arithmetic_grammar();
        let m = compute_opm(&g).unwrap();
        let old = tokenize_arithmetic(&g, &random_sum(&mut rng, 10).to_string()).unwrap();
        let new = tokenize_arithmetic(&g, &random_sum(&mut rng, 10).to_string()).unwrap();
        agree(&g, &m, &ArithmeticSchema::<u128>::new(), &old, &new);
        // Small in-place change.
        let mut tweaked = old.clone();
        let at = rng.gen_range(0..tweaked.len()) / 2 * 2;
        tweaked[at] = tokenize_arithmetic(&g, &rng.gen_range(0..100).to_string()).unwrap()[0].clone();
        agree(&g, &m, &ArithmeticSchema::<u128>::new(), &old, &tweaked);
    }

    #[test]
    fn reliability(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mini = Mini::new();
        let cfg = GenConfig::default();
        let (exact, _) = common::random_profiles(&mut rng, &alphabet_of(cfg.functions));
        let (old, new) = mini_versions(&mut rng, &cfg, &mini);
        agree(mini.grammar(), mini.opm(), &ReliabilitySchema::new(exact), &old, &new);
    }

    #[test]
    fn safety(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mini = Mini::new();
        let cfg = GenConfig::default();
        let alphabet = alphabet_of(cfg.functions);
        let automaton = common::property_automaton(&random_automaton(&mut rng, 3, &alphabet), &alphabet);
        let (old, new) = mini_versions(&mut rng, &cfg, &mini);
        agree(mini.grammar(), mini.opm(), &SafetySchema::new(image_automaton(&automaton), 2), &old, &new);
    }
}
