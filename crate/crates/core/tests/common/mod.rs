#![allow(dead_code)]

use incver_core::reliability::ReliabilityProfile;
use incver_core::safety::PropertyAutomaton;
use incver_core::Rational;
use incver_testkit::reliability::Profile;
use incver_testkit::safety::Automaton;
use rand::Rng;

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// The same profile in exact and floating form, probabilities in hundredths.
pub fn random_profiles(rng: &mut impl Rng, functions: &[String]) -> (ReliabilityProfile<Rational>, Profile) {
    let placeholder = rng.gen_range(1..100);
    let mut exact = ReliabilityProfile::new(ratio(placeholder, 100));
    let mut float = Profile { succ: Default::default(), ret_true: Default::default(), placeholder: placeholder as f64 / 100.0 };
    for f in functions {
        let s = rng.gen_range(50..=100);
        let t = rng.gen_range(0..=100);
        exact = exact.with_succ(f, ratio(s, 100)).with_ret_true(f, ratio(t, 100));
        float.succ.insert(f.clone(), s as f64 / 100.0);
        float.ret_true.insert(f.clone(), t as f64 / 100.0);
    }
    (exact, float)
}

pub fn property_automaton(a: &Automaton, alphabet: &[String]) -> PropertyAutomaton {
    let states: Vec<String> = (0..a.states).map(Automaton::state_name).collect();
    let transitions: Vec<(String, String, String)> = a
        .delta
        .iter()
        .map(|((s, f), t)| (Automaton::state_name(*s), f.clone(), Automaton::state_name(*t)))
        .collect();
    PropertyAutomaton::new(&states, &Automaton::state_name(a.initial), alphabet, &transitions).unwrap()
}
