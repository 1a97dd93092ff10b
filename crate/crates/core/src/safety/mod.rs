//! Safety of Mini programs against a property automaton.
//!
//! Function calls drive the automaton; undefined moves trap in `ERR`. Each
//! statement is summarized by a [`TransitionSet`] relating locations before
//! and after it, and the program is unsafe when a consistent template leads
//! from the initial location to `ERR`. Loops are unrolled a bounded number of
//! times.

mod automaton;
mod relation;

use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

pub use automaton::{image_automaton, AutomatonError, ImageAutomaton, Location, PropertyAutomaton, ERR};
pub use relation::{
    compose, compose_counted, compose_unpruned, relation_iterate, relation_iterate_counted, upd, ConfTransformer,
    Endpoints, Step, Template, TransitionSet,
};

use crate::attributes::{evaluate, AttributeMap, AttributeSchema, Child, EvalError};
use crate::grammar::{Grammar, Rule};
use crate::mini::{parse_condition, CondExpr, CondSyntaxError};
use crate::parser::SyntaxTree;

pub const DEFAULT_UNROLL: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SafetyValue {
    Gamma(TransitionSet),
    Cond { when_true: TransitionSet, when_false: TransitionSet, nu: CondExpr },
    Ident { eta: String },
}

impl SafetyValue {
    pub fn gamma(&self) -> Option<&TransitionSet> {
        match self {
            SafetyValue::Gamma(g) => Some(g),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SafetyError {
    #[error("function `{0}` is not in the automaton alphabet")]
    Alphabet(String),
    #[error(transparent)]
    Condition(#[from] CondSyntaxError),
    #[error("no semantic function for rule `{0}`")]
    UnknownRule(String),
}

/// The safety attribute schema for one image automaton and unrolling bound.
#[derive(Debug)]
pub struct SafetySchema {
    image: ImageAutomaton,
    unroll: usize,
    tuples: AtomicUsize,
}

impl SafetySchema {
    pub fn new(image: ImageAutomaton, unroll: usize) -> Self {
        SafetySchema { image, unroll, tuples: AtomicUsize::new(0) }
    }

    pub fn image(&self) -> &ImageAutomaton {
        &self.image
    }

    pub fn unroll(&self) -> usize {
        self.unroll
    }

    /// Templates materialized by synthesis so far, before pruning.
    pub fn tuples_processed(&self) -> usize {
        self.tuples.load(Ordering::Relaxed)
    }

    pub fn reset_tuples(&self) {
        self.tuples.store(0, Ordering::Relaxed);
    }

    fn count(&self, n: usize) {
        self.tuples.fetch_add(n, Ordering::Relaxed);
    }

    fn compose(&self, g1: &TransitionSet, g2: &TransitionSet) -> TransitionSet {
        let (g, n) = compose_counted(g1, g2);
        self.count(n);
        g
    }

    fn moves(&self, function: &str, steps: &[Vec<Step>]) -> Result<TransitionSet, SafetyError> {
        let mut out = TransitionSet::empty();
        for from in 0..self.image.state_count() {
            let to = self.image.step(from, function).ok_or_else(|| SafetyError::Alphabet(function.to_string()))?;
            for s in steps {
                out.insert(Template::new(Endpoints::Move { from, to }, s.clone()));
            }
        }
        self.count(out.len());
        Ok(out)
    }
}

pub fn safety_schema(image: ImageAutomaton, unroll: usize) -> SafetySchema {
    SafetySchema::new(image, unroll)
}

fn gamma<'a>(child: &Child<'a, SafetyValue>) -> &'a TransitionSet {
    child.value().and_then(SafetyValue::gamma).expect("block child")
}

fn eta<'a>(child: &Child<'a, SafetyValue>) -> &'a str {
    match child.value() {
        Some(SafetyValue::Ident { eta }) => eta,
        _ => panic!("identifier child expected"),
    }
}

fn branches<'a>(child: &Child<'a, SafetyValue>) -> (&'a TransitionSet, &'a TransitionSet) {
    match child.value() {
        Some(SafetyValue::Cond { when_true, when_false, .. }) => (when_true, when_false),
        _ => panic!("condition child expected"),
    }
}

fn single(step: Step) -> TransitionSet {
    [Template::new(Endpoints::Stay, vec![step])].into_iter().collect()
}

impl AttributeSchema for SafetySchema {
    type Value = SafetyValue;
    type Error = SafetyError;

    fn name(&self) -> &str {
        "safety"
    }

    fn synthesize(&self, rule: &Rule, c: &[Child<'_, SafetyValue>]) -> Result<SafetyValue, SafetyError> {
        let value = match rule.name() {
            "program" => SafetyValue::Gamma(gamma(&c[1]).clone()),
            "list.cons" => SafetyValue::Gamma(self.compose(gamma(&c[0]), gamma(&c[2]))),
            "list.last" => SafetyValue::Gamma(gamma(&c[0]).clone()),
            "stmt.call" => SafetyValue::Gamma(self.moves(eta(&c[0]), &[Vec::new()])?),
            "stmt.assign-true" | "stmt.assign-false" => {
                let g = single(Step::Assign(eta(&c[0]).to_string(), rule.name() == "stmt.assign-true"));
                self.count(1);
                SafetyValue::Gamma(g)
            }
            "stmt.assign-call" => {
                let v = eta(&c[0]);
                let steps = [vec![Step::Assign(v.to_string(), true)], vec![Step::Assign(v.to_string(), false)]];
                SafetyValue::Gamma(self.moves(eta(&c[2]), &steps)?)
            }
            "stmt.if" => {
                let (t, f) = branches(&c[1]);
                let then = self.compose(t, gamma(&c[3]));
                let otherwise = self.compose(f, gamma(&c[5]));
                SafetyValue::Gamma(then.union(&otherwise))
            }
            "stmt.while" => {
                let (t, f) = branches(&c[1]);
                let body = self.compose(t, gamma(&c[3]));
                let (iterated, n) = relation_iterate_counted(&body, self.unroll);
                self.count(n);
                SafetyValue::Gamma(self.compose(&iterated, f))
            }
            "var-id" | "function-id" => {
                SafetyValue::Ident { eta: c[0].token().expect("identifier token").lexeme().to_string() }
            }
            "cond" => {
                let nu = parse_condition(c[0].token().expect("condition token").lexeme())?;
                self.count(2);
                SafetyValue::Cond {
                    when_true: single(Step::Check(nu.clone(), true)).prune(),
                    when_false: single(Step::Check(nu.clone(), false)).prune(),
                    nu,
                }
            }
            other => return Err(SafetyError::UnknownRule(other.to_string())),
        };
        Ok(value)
    }

    fn attribute_names(&self, value: &SafetyValue) -> &'static [&'static str] {
        match value {
            SafetyValue::Gamma(_) => &["γ"],
            SafetyValue::Cond { .. } => &["γ", "ν"],
            SafetyValue::Ident { .. } => &["η"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Safe,
    Unsafe,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Safe => "safe",
            Verdict::Unsafe => "unsafe",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyReport {
    pub verdict: Verdict,
    /// Steps of a violating template; the shortest one when there are several.
    pub witness: Option<Vec<Step>>,
    pub tuples_processed: usize,
    /// `γ` of the root.
    pub gamma: TransitionSet,
    pub warnings: Vec<String>,
}

/// Grounds `gamma` at the initial location and looks for a live template
/// reaching `ERR`.
pub fn safety_verdict(image: &ImageAutomaton, gamma: &TransitionSet) -> (Verdict, Option<Vec<Step>>) {
    let witness = gamma
        .ground(image.automaton().initial())
        .into_iter()
        .filter(|t| matches!(t.endpoints, Endpoints::Move { to: Location::Err, .. }) && t.transformer.is_live())
        .map(|t| t.steps().to_vec())
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    match witness {
        Some(w) => (Verdict::Unsafe, Some(w)),
        None => (Verdict::Safe, None),
    }
}

pub fn automaton_warnings(automaton: &PropertyAutomaton) -> Vec<String> {
    automaton
        .assignment_symbols()
        .map(|s| format!("symbol `{s}` only extends the alphabet; assignments from calls follow the function's own transitions"))
        .collect()
}

pub fn verify_safety(
    tree: &SyntaxTree,
    grammar: &Grammar,
    automaton: &PropertyAutomaton,
    unroll: usize,
) -> Result<(SafetyReport, AttributeMap<SafetyValue>), EvalError<SafetyError>> {
    let schema = SafetySchema::new(image_automaton(automaton), unroll);
    let map = evaluate(tree, grammar, &schema)?;
    let gamma = map.get(tree.root().id()).and_then(SafetyValue::gamma).cloned().expect("root value");
    let (verdict, witness) = safety_verdict(schema.image(), &gamma);
    let report = SafetyReport {
        verdict,
        witness,
        tuples_processed: schema.tuples_processed(),
        gamma,
        warnings: automaton_warnings(automaton),
    };
    Ok((report, map))
}
