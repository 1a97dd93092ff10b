//! Safety by concrete execution.
//!
//! Runs the program from every initial valuation, following every function
//! return value and every resolution of each `*` occurrence, and reports
//! whether some run drives the automaton into its error trap. Loops run at
//! most `unroll` times.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::mini::{Cond, Program, Stmt};

/// Deterministic automaton; missing moves lead to the trap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    pub states: usize,
    pub initial: usize,
    pub delta: BTreeMap<(usize, String), usize>,
}

impl Automaton {
    pub fn state_name(i: usize) -> String {
        format!("s{i}")
    }
}

pub fn random_automaton(rng: &mut impl Rng, max_states: usize, alphabet: &[String]) -> Automaton {
    let states = rng.gen_range(1..=max_states.max(1));
    let mut delta = BTreeMap::new();
    for s in 0..states {
        for f in alphabet {
            if rng.gen_bool(0.7) {
                delta.insert((s, f.clone()), rng.gen_range(0..states));
            }
        }
    }
    Automaton { states, initial: rng.gen_range(0..states), delta }
}

type Vars = BTreeMap<String, bool>;

/// A run that has not been trapped: automaton state and variables.
type Run = (usize, Vars);

fn stars(c: &Cond) -> usize {
    match c {
        Cond::Star => 1,
        Cond::Var(..) => 0,
        Cond::Not(a) => stars(a),
        Cond::And(a, b) => stars(a) + stars(b),
    }
}

fn eval(c: &Cond, vars: &Vars, choices: &mut impl Iterator<Item = bool>) -> bool {
    match c {
        Cond::Var(v, expected) => vars[v] == *expected,
        Cond::Star => choices.next().unwrap(),
        Cond::Not(a) => !eval(a, vars, choices),
        Cond::And(a, b) => {
            let left = eval(a, vars, choices);
            let right = eval(b, vars, choices);
            left && right
        }
    }
}

/// Every truth value `c` can take in `vars`.
fn outcomes(c: &Cond, vars: &Vars) -> BTreeSet<bool> {
    let n = stars(c);
    (0u32..1 << n).map(|mask| eval(c, vars, &mut (0..n).map(|i| mask >> i & 1 == 1))).collect()
}

struct Exec<'a> {
    automaton: &'a Automaton,
    unroll: usize,
    violated: bool,
}

impl Exec<'_> {
    fn call(&mut self, runs: BTreeSet<Run>, f: &str, assign: Option<&str>) -> BTreeSet<Run> {
        let mut out = BTreeSet::new();
        for (loc, vars) in runs {
            let Some(&next) = self.automaton.delta.get(&(loc, f.to_string())) else {
                self.violated = true;
                continue;
            };
            match assign {
                None => {
                    out.insert((next, vars));
                }
                Some(v) => {
                    for b in [true, false] {
                        let mut vars = vars.clone();
                        vars.insert(v.to_string(), b);
                        out.insert((next, vars));
                    }
                }
            }
        }
        out
    }

    fn branch(&self, runs: &BTreeSet<Run>, c: &Cond, want: bool) -> BTreeSet<Run> {
        runs.iter().filter(|(_, vars)| outcomes(c, vars).contains(&want)).cloned().collect()
    }

    fn list(&mut self, mut runs: BTreeSet<Run>, list: &[Stmt]) -> BTreeSet<Run> {
        for s in list {
            if self.violated {
                break;
            }
            runs = match s {
                Stmt::Call(f) => self.call(runs, f, None),
                Stmt::AssignCall(v, f) => self.call(runs, f, Some(v)),
                Stmt::Assign(v, b) => runs
                    .into_iter()
                    .map(|(loc, mut vars)| {
                        vars.insert(v.clone(), *b);
                        (loc, vars)
                    })
                    .collect(),
                Stmt::If(c, t, e) => {
                    let then = self.branch(&runs, c, true);
                    let otherwise = self.branch(&runs, c, false);
                    let mut out = self.list(then, t);
                    out.extend(self.list(otherwise, e));
                    out
                }
                Stmt::While(c, body) => {
                    let mut out = self.branch(&runs, c, false);
                    let mut current = runs;
                    for _ in 0..self.unroll {
                        let entering = self.branch(&current, c, true);
                        current = self.list(entering, body);
                        out.extend(self.branch(&current, c, false));
                    }
                    out
                }
            };
        }
        runs
    }
}

fn variables(list: &[Stmt], out: &mut BTreeSet<String>) {
    fn cond(c: &Cond, out: &mut BTreeSet<String>) {
        match c {
            Cond::Var(v, _) => {
                out.insert(v.clone());
            }
            Cond::Not(a) => cond(a, out),
            Cond::And(a, b) => {
                cond(a, out);
                cond(b, out);
            }
            Cond::Star => {}
        }
    }
    for s in list {
        match s {
            Stmt::Assign(v, _) | Stmt::AssignCall(v, _) => {
                out.insert(v.clone());
            }
            Stmt::If(c, t, e) => {
                cond(c, out);
                variables(t, out);
                variables(e, out);
            }
            Stmt::While(c, b) => {
                cond(c, out);
                variables(b, out);
            }
            Stmt::Call(_) => {}
        }
    }
}

/// Whether some bounded run reaches the trap.
pub fn violates(program: &Program, automaton: &Automaton, unroll: usize) -> bool {
    let mut names = BTreeSet::new();
    variables(&program.body, &mut names);
    let names: Vec<String> = names.into_iter().collect();
    let runs: BTreeSet<Run> = (0u32..1 << names.len())
        .map(|mask| {
            let vars = names.iter().enumerate().map(|(i, v)| (v.clone(), mask >> i & 1 == 1)).collect();
            (automaton.initial, vars)
        })
        .collect();
    let mut exec = Exec { automaton, unroll, violated: false };
    exec.list(runs, &program.body);
    exec.violated
}

/// Functions named in the program, for building automata over them.
pub fn alphabet_of(functions: usize) -> Vec<String> {
    (0..functions).map(crate::mini::function_name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alternation() -> Automaton {
        Automaton {
            states: 2,
            initial: 0,
            delta: [((0, "opA".to_string()), 1), ((1, "opB".to_string()), 0)].into(),
        }
    }

    fn example(value: bool) -> Program {
        Program {
            body: vec![
                Stmt::Call("opA".into()),
                Stmt::Assign("x".into(), value),
                Stmt::If(
                    Cond::Var("x".into(), true),
                    vec![Stmt::Call("opB".into())],
                    vec![Stmt::Call("opA".into())],
                ),
            ],
        }
    }

    #[test]
    fn hand_verdicts() {
        assert!(!violates(&example(true), &alternation(), 3));
        assert!(violates(&example(false), &alternation(), 3));
        let looping = Program { body: vec![Stmt::While(Cond::Star, vec![Stmt::Call("opA".into())])] };
        assert!(!violates(&looping, &alternation(), 1));
        assert!(violates(&looping, &alternation(), 2));
    }
}
