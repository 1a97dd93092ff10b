//! Expected reliability of Mini programs.
//!
//! Every function call succeeds with a profile probability `Pr_S(f)`; the
//! reliability of a program is the probability of completing without a
//! failure, averaged over branch outcomes. Branch probabilities `Pr_T` of
//! conditions start out symbolic and are refined with the knowledge that
//! earlier assignments in the same statement sequence provide.
//!
//! Attributes: `γ` (reliability) and `ϑ` (assignment knowledge) for blocks
//! and statements, `δ` (truth probability) for conditions, `η` (literal) for
//! identifiers.

mod expr;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use expr::{ExprError, Monomial, ProbExpr};

use crate::attributes::{evaluate, AttributeMap, AttributeSchema, Child, EvalError};
use crate::grammar::{Grammar, Rule};
use crate::mini::{cond_truth_probability, parse_condition, CondExpr, CondSyntaxError, CONDITION};
use crate::parser::SyntaxTree;
use crate::scalar::Scalar;

/// Per-function success and return probabilities, and `Pr_T(*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityProfile<S> {
    pub succ: BTreeMap<String, S>,
    pub ret_true: BTreeMap<String, S>,
    pub placeholder: S,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("profile value for {what} is outside [0, 1]")]
pub struct ProfileError {
    pub what: String,
}

impl<S: Scalar> ReliabilityProfile<S> {
    pub fn new(placeholder: S) -> Self {
        ReliabilityProfile { succ: BTreeMap::new(), ret_true: BTreeMap::new(), placeholder }
    }

    pub fn with_succ(mut self, function: &str, p: S) -> Self {
        self.succ.insert(function.to_string(), p);
        self
    }

    pub fn with_ret_true(mut self, function: &str, p: S) -> Self {
        self.ret_true.insert(function.to_string(), p);
        self
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let entries = self
            .succ
            .iter()
            .map(|(f, p)| (format!("Pr_S({f})"), p))
            .chain(self.ret_true.iter().map(|(f, p)| (format!("Pr_T({f})"), p)))
            .chain(std::iter::once(("Pr_T(*)".to_string(), &self.placeholder)));
        for (what, p) in entries {
            if !p.is_probability() {
                return Err(ProfileError { what });
            }
        }
        Ok(())
    }
}

/// `ϑ`: what assignments have established about `Pr_T` of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Knowledge<S>(BTreeMap<String, S>);

impl<S> Default for Knowledge<S> {
    fn default() -> Self {
        Knowledge(BTreeMap::new())
    }
}

impl<S: Scalar> Knowledge<S> {
    pub fn single(variable: &str, p: S) -> Self {
        Knowledge([(variable.to_string(), p)].into())
    }

    pub fn get(&self, variable: &str) -> Option<&S> {
        self.0.get(variable)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &S)> + '_ {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl<S: Scalar> FromIterator<(String, S)> for Knowledge<S> {
    fn from_iter<I: IntoIterator<Item = (String, S)>>(iter: I) -> Self {
        Knowledge(iter.into_iter().collect())
    }
}

/// `γ | ϑ`: substitutes the known truth probabilities into `g`.
pub fn refine<S: Scalar>(g: &ProbExpr<S>, k: &Knowledge<S>) -> Result<ProbExpr<S>, ExprError> {
    if k.is_empty() {
        return Ok(g.clone());
    }
    g.substitute(&|v| k.get(v).cloned())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReliabilityError {
    #[error("no success probability for function `{0}`")]
    MissingSuccess(String),
    #[error("no return probability for function `{0}`")]
    MissingReturn(String),
    #[error("loop condition is always true; the loop never terminates")]
    Divergence,
    #[error(transparent)]
    Condition(#[from] CondSyntaxError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("no semantic function for rule `{0}`")]
    UnknownRule(String),
}

/// Expected reliability of `while` with condition probability `d` and body
/// reliability `body`: `(1 - d) / (1 - d·body)`.
pub fn while_reliability<S: Scalar>(d: &ProbExpr<S>, body: &ProbExpr<S>) -> Result<ProbExpr<S>, ReliabilityError> {
    if d.as_constant().is_some_and(|c| c == S::one()) {
        return Err(ReliabilityError::Divergence);
    }
    let den = (d * body).complement();
    d.complement().checked_div(&den).map_err(|_| ReliabilityError::Divergence)
}

#[derive(Debug, Clone)]
pub enum ReliabilityValue<S> {
    Block { gamma: ProbExpr<S>, theta: Knowledge<S> },
    Cond { delta: ProbExpr<S> },
    Ident { eta: String },
}

impl<S: Scalar> ReliabilityValue<S> {
    pub fn gamma(&self) -> Option<&ProbExpr<S>> {
        match self {
            ReliabilityValue::Block { gamma, .. } => Some(gamma),
            _ => None,
        }
    }

    pub fn theta(&self) -> Option<&Knowledge<S>> {
        match self {
            ReliabilityValue::Block { theta, .. } => Some(theta),
            _ => None,
        }
    }

    fn block(gamma: ProbExpr<S>) -> Self {
        ReliabilityValue::Block { gamma, theta: Knowledge::default() }
    }
}

impl<S: Scalar> PartialEq for ReliabilityValue<S> {
    fn eq(&self, other: &Self) -> bool {
        use ReliabilityValue as V;
        match (self, other) {
            (V::Block { gamma: g1, theta: t1 }, V::Block { gamma: g2, theta: t2 }) => g1 == g2 && t1 == t2,
            (V::Cond { delta: d1 }, V::Cond { delta: d2 }) => d1 == d2,
            (V::Ident { eta: e1 }, V::Ident { eta: e2 }) => e1 == e2,
            _ => false,
        }
    }
}

impl<S: Scalar> fmt::Display for ReliabilityValue<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReliabilityValue::Block { gamma, theta } => {
                let pairs: Vec<String> = theta.iter().map(|(v, p)| format!("<{v}, {p}>")).collect();
                write!(f, "γ = {gamma}, ϑ = {{{}}}", pairs.join(", "))
            }
            ReliabilityValue::Cond { delta } => write!(f, "δ = {delta}"),
            ReliabilityValue::Ident { eta } => write!(f, "η = {eta}"),
        }
    }
}

/// The reliability attribute schema over the Mini grammar.
#[derive(Debug, Clone)]
pub struct ReliabilitySchema<S> {
    profile: ReliabilityProfile<S>,
}

impl<S: Scalar> ReliabilitySchema<S> {
    pub fn new(profile: ReliabilityProfile<S>) -> Self {
        ReliabilitySchema { profile }
    }

    pub fn profile(&self) -> &ReliabilityProfile<S> {
        &self.profile
    }
}

/// Shorthand constructor matching the other schema builders.
pub fn reliability_schema<S: Scalar>(profile: ReliabilityProfile<S>) -> ReliabilitySchema<S> {
    ReliabilitySchema::new(profile)
}

fn gamma<S: Scalar>(child: &Child<'_, ReliabilityValue<S>>) -> ProbExpr<S> {
    child.value().and_then(ReliabilityValue::gamma).cloned().expect("block child")
}

fn eta<'a, S>(child: &Child<'a, ReliabilityValue<S>>) -> &'a str {
    match child.value() {
        Some(ReliabilityValue::Ident { eta }) => eta,
        _ => panic!("identifier child expected"),
    }
}

impl<S: Scalar> AttributeSchema for ReliabilitySchema<S> {
    type Value = ReliabilityValue<S>;
    type Error = ReliabilityError;

    fn name(&self) -> &str {
        "reliability"
    }

    fn synthesize(&self, rule: &Rule, c: &[Child<'_, Self::Value>]) -> Result<Self::Value, ReliabilityError> {
        use ReliabilityValue as V;
        let one = ProbExpr::one;
        let value = match rule.name() {
            "program" => V::block(gamma(&c[1])),
            "list.cons" => {
                let theta = c[0].value().and_then(V::theta).expect("statement child");
                V::block(refine(&(&gamma(&c[0]) * &gamma(&c[2])), theta)?)
            }
            "list.last" => V::block(gamma(&c[0])),
            "stmt.call" => {
                let f = eta(&c[0]);
                let p = self.profile.succ.get(f).ok_or_else(|| ReliabilityError::MissingSuccess(f.into()))?;
                V::block(ProbExpr::constant(p.clone()))
            }
            "stmt.assign-true" => V::Block { gamma: one(), theta: Knowledge::single(eta(&c[0]), S::one()) },
            "stmt.assign-false" => V::Block { gamma: one(), theta: Knowledge::single(eta(&c[0]), S::zero()) },
            "stmt.assign-call" => {
                let f = eta(&c[2]);
                let p = self.profile.ret_true.get(f).ok_or_else(|| ReliabilityError::MissingReturn(f.into()))?;
                V::Block { gamma: one(), theta: Knowledge::single(eta(&c[0]), p.clone()) }
            }
            "stmt.if" => {
                let delta = match c[1].value() {
                    Some(V::Cond { delta }) => delta,
                    _ => panic!("condition child expected"),
                };
                let then = &gamma(&c[3]) * delta;
                let otherwise = &gamma(&c[5]) * &delta.complement();
                V::block(&then + &otherwise)
            }
            "stmt.while" => {
                let delta = match c[1].value() {
                    Some(V::Cond { delta }) => delta,
                    _ => panic!("condition child expected"),
                };
                V::block(while_reliability(delta, &gamma(&c[3]))?)
            }
            "var-id" | "function-id" => {
                V::Ident { eta: c[0].token().expect("identifier token").lexeme().to_string() }
            }
            "cond" => {
                let text = c[0].token().expect("condition token").lexeme();
                let e = parse_condition(text)?;
                V::Cond { delta: cond_truth_probability(&e, &|v| ProbExpr::atom(v), &self.profile.placeholder) }
            }
            other => return Err(ReliabilityError::UnknownRule(other.to_string())),
        };
        Ok(value)
    }

    fn attribute_names(&self, value: &Self::Value) -> &'static [&'static str] {
        match value {
            ReliabilityValue::Block { .. } => &["γ", "ϑ"],
            ReliabilityValue::Cond { .. } => &["δ"],
            ReliabilityValue::Ident { .. } => &["η"],
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReliabilityReport<S> {
    /// `γ` of the root; symbolic if some variable is read before any assignment.
    pub value: ProbExpr<S>,
    pub warnings: Vec<String>,
}

impl<S: Scalar> PartialEq for ReliabilityReport<S> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.warnings == other.warnings
    }
}

/// Diagnostics that do not prevent a result.
pub fn reliability_warnings<S: Scalar>(
    tree: &SyntaxTree,
    grammar: &Grammar,
    profile: &ReliabilityProfile<S>,
    value: &ProbExpr<S>,
) -> Vec<String> {
    let mut warnings = Vec::new();
    let atoms = value.atoms();
    if !atoms.is_empty() {
        let names: Vec<&str> = atoms.iter().map(String::as_str).collect();
        warnings.push(format!(
            "result depends on the unknown truth probability of {}; no assignment reaches the condition",
            names.join(", ")
        ));
    }
    let condition = grammar.terminal(CONDITION);
    let assign_call = grammar.rule_by_name("stmt.assign-call").map(Rule::id);
    let mut seen_functions = std::collections::BTreeSet::new();
    for (_, node) in tree.preorder() {
        if node.rule().is_some() && node.rule() == assign_call {
            let f = node.children()[2].children()[0].token().map(|t| t.lexeme().to_string());
            if let Some(f) = f {
                if let Some(p) = profile.succ.get(&f) {
                    if *p != S::one() && seen_functions.insert(f.clone()) {
                        warnings.push(format!(
                            "function `{f}` is used in an assignment; its success probability {p} is treated as 1"
                        ));
                    }
                }
            }
        }
        let Some(token) = node.token() else { continue };
        if Some(token.terminal()) != condition {
            continue;
        }
        if let Ok(e) = parse_condition(token.lexeme()) {
            if has_shared_conjunction(&e) {
                warnings.push(format!(
                    "condition `{}` reads a variable more than once; its probability assumes independence",
                    token.lexeme()
                ));
            }
        }
    }
    warnings
}

fn has_shared_conjunction(e: &CondExpr) -> bool {
    match e {
        CondExpr::And(a, b) => {
            let left = a.variables();
            b.variables().iter().any(|v| left.contains(v)) || has_shared_conjunction(a) || has_shared_conjunction(b)
        }
        CondExpr::Not(inner) => has_shared_conjunction(inner),
        _ => false,
    }
}

/// Evaluates the reliability schema over a parsed Mini program.
pub fn verify_reliability<S: Scalar>(
    tree: &SyntaxTree,
    grammar: &Grammar,
    profile: &ReliabilityProfile<S>,
) -> Result<(ReliabilityReport<S>, AttributeMap<ReliabilityValue<S>>), EvalError<ReliabilityError>> {
    let schema = ReliabilitySchema::new(profile.clone());
    let map = evaluate(tree, grammar, &schema)?;
    let value = map.get(tree.root().id()).and_then(ReliabilityValue::gamma).cloned().expect("root value");
    let warnings = reliability_warnings(tree, grammar, profile, &value);
    Ok((ReliabilityReport { value, warnings }, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mini::Mini;
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn profile() -> ReliabilityProfile<BigRational> {
        ReliabilityProfile::new(r(1, 2)).with_succ("opA", r(97, 100)).with_succ("opB", r(99, 100))
    }

    fn run(src: &str, p: &ReliabilityProfile<BigRational>) -> Result<ReliabilityReport<BigRational>, EvalError<ReliabilityError>> {
        let mini = Mini::new();
        let tree = mini.parse(src).unwrap();
        verify_reliability(&tree, mini.grammar(), p).map(|(report, _)| report)
    }

    const V1: &str = "begin opA(); x := true; if (x==true) then opB(); else opA(); endif; end";
    const V2: &str = "begin opA(); x := false; if (x==true) then opB(); else opA(); endif; end";

    #[test]
    fn example_versions() {
        assert_eq!(run(V1, &profile()).unwrap().value.as_constant(), Some(r(9603, 10000)));
        assert_eq!(run(V2, &profile()).unwrap().value.as_constant(), Some(r(9409, 10000)));
        assert_eq!(run("begin opA(); end", &profile()).unwrap().value.as_constant(), Some(r(97, 100)));
    }

    #[test]
    fn refinement() {
        let x = ProbExpr::<BigRational>::atom("v");
        let g = &ProbExpr::constant(r(9, 10)) * &x;
        assert_eq!(refine(&g, &Knowledge::single("v", r(7, 10))).unwrap().as_constant(), Some(r(63, 100)));
        assert_eq!(refine(&g, &Knowledge::default()).unwrap(), g);
        let x = ProbExpr::atom("x");
        let g = &(&ProbExpr::constant(r(99, 100)) * &x) + &(&ProbExpr::constant(r(97, 100)) * &x.complement());
        assert_eq!(refine(&g, &Knowledge::single("x", r(1, 1))).unwrap().as_constant(), Some(r(99, 100)));
        let c = ProbExpr::constant(r(1, 3));
        assert_eq!(refine(&c, &Knowledge::single("x", r(1, 2))).unwrap(), c);
    }

    #[test]
    fn loops() {
        let e = |n, d| ProbExpr::constant(r(n, d));
        assert_eq!(while_reliability(&e(0, 1), &e(1, 3)).unwrap().as_constant(), Some(r(1, 1)));
        assert_eq!(while_reliability(&e(1, 2), &e(1, 1)).unwrap().as_constant(), Some(r(1, 1)));
        assert_eq!(while_reliability(&e(1, 2), &e(4, 5)).unwrap().as_constant(), Some(r(5, 6)));
        assert_eq!(while_reliability(&e(1, 1), &e(1, 2)), Err(ReliabilityError::Divergence));

        let p = ReliabilityProfile::new(r(1, 2)).with_succ("f", r(4, 5));
        let report = run("begin while * do f(); endwhile; end", &p).unwrap();
        assert_eq!(report.value.as_constant(), Some(r(5, 6)));
        let p = ReliabilityProfile::new(r(1, 1)).with_succ("f", r(4, 5));
        let err = run("begin while * do f(); endwhile; end", &p).unwrap_err();
        assert_eq!(err.source, ReliabilityError::Divergence);
    }

    #[test]
    fn symbolic_results_warn() {
        let report = run("begin if (y==true) then opA(); else opB(); endif; end", &profile()).unwrap();
        assert_eq!(report.value.atoms(), ["y".to_string()].into());
        assert!(report.warnings.iter().any(|w| w.contains('y')));
        let expected = &ProbExpr::constant(r(99, 100)) - &(&ProbExpr::constant(r(2, 100)) * &ProbExpr::atom("y"));
        assert_eq!(report.value, expected);
    }

    #[test]
    fn assignments_from_functions() {
        let p = profile().with_ret_true("g", r(3, 10)).with_succ("g", r(1, 2));
        let report = run("begin x := g(); if x==true then opA(); else opB(); endif; end", &p).unwrap();
        // 0.3 * 0.97 + 0.7 * 0.99
        assert_eq!(report.value.as_constant(), Some(r(984, 1000)));
        assert!(report.warnings.iter().any(|w| w.contains("`g`")));
        let err = run("begin x := h(); end", &profile()).unwrap_err();
        assert_eq!(err.source, ReliabilityError::MissingReturn("h".into()));
        let err = run("begin nope(); end", &profile()).unwrap_err();
        assert_eq!(err.source, ReliabilityError::MissingSuccess("nope".into()));
    }

    #[test]
    fn shared_conjunction_warning() {
        let p = profile();
        let report = run("begin x := true; if x==true && !(x==false) then opA(); else opB(); endif; end", &p).unwrap();
        assert!(report.warnings.iter().any(|w| w.contains("independence")));
    }

    #[test]
    fn floats_agree() {
        let p = ReliabilityProfile::<f64>::new(0.5).with_succ("opA", 0.97).with_succ("opB", 0.99);
        let mini = Mini::new();
        let tree = mini.parse(V1).unwrap();
        let (report, _) = verify_reliability(&tree, mini.grammar(), &p).unwrap();
        assert!((report.value.as_constant().unwrap() - 0.9603).abs() < 1e-12);
    }

    #[test]
    fn profile_validation() {
        assert!(profile().validate().is_ok());
        assert!(profile().with_succ("bad", r(3, 2)).validate().is_err());
    }
}
