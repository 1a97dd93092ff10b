//! Expected reliability by enumerating execution paths.
//!
//! Each condition evaluation flips one coin per predicate occurrence: a
//! variable occurrence is true with the probability the latest assignment in
//! scope gives it, a `*` with the placeholder probability.

use std::collections::BTreeMap;

use crate::geometric_sum;
use crate::mini::{Cond, Program, Stmt};

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub succ: BTreeMap<String, f64>,
    pub ret_true: BTreeMap<String, f64>,
    pub placeholder: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleError {
    /// A variable read before any assignment in scope.
    Unknown,
    /// A loop whose condition is always true.
    Divergent,
    Missing,
}

type Knowledge = BTreeMap<String, f64>;

fn occurrences(c: &Cond, knowledge: &Knowledge, placeholder: f64, out: &mut Vec<f64>) -> Result<(), OracleError> {
    match c {
        Cond::Var(v, _) => out.push(*knowledge.get(v).ok_or(OracleError::Unknown)?),
        Cond::Star => out.push(placeholder),
        Cond::Not(a) => occurrences(a, knowledge, placeholder, out)?,
        Cond::And(a, b) => {
            occurrences(a, knowledge, placeholder, out)?;
            occurrences(b, knowledge, placeholder, out)?;
        }
    }
    Ok(())
}

/// Consumes coins in the order [`occurrences`] lists them.
fn decide(c: &Cond, coins: &mut impl Iterator<Item = bool>) -> bool {
    match c {
        Cond::Var(_, expected) => coins.next().unwrap() == *expected,
        Cond::Star => coins.next().unwrap(),
        Cond::Not(a) => !decide(a, coins),
        Cond::And(a, b) => {
            let left = decide(a, coins);
            let right = decide(b, coins);
            left && right
        }
    }
}

/// Probability that `c` comes out true, summed over all coin outcomes.
pub fn truth_probability(c: &Cond, knowledge: &Knowledge, placeholder: f64) -> Result<f64, OracleError> {
    let mut probs = Vec::new();
    occurrences(c, knowledge, placeholder, &mut probs)?;
    let mut total = 0.0;
    for mask in 0u32..1 << probs.len() {
        let coins: Vec<bool> = (0..probs.len()).map(|i| mask >> i & 1 == 1).collect();
        let weight: f64 = probs.iter().zip(&coins).map(|(p, &c)| if c { *p } else { 1.0 - p }).product();
        if decide(c, &mut coins.into_iter()) {
            total += weight;
        }
    }
    Ok(total)
}

fn block(list: &[Stmt], knowledge: &Knowledge, profile: &Profile) -> Result<f64, OracleError> {
    let Some((first, rest)) = list.split_first() else { return Ok(1.0) };
    let mut knowledge = knowledge.clone();
    let here = match first {
        Stmt::Call(f) => *profile.succ.get(f).ok_or(OracleError::Missing)?,
        Stmt::Assign(v, b) => {
            knowledge.insert(v.clone(), if *b { 1.0 } else { 0.0 });
            1.0
        }
        Stmt::AssignCall(v, f) => {
            knowledge.insert(v.clone(), *profile.ret_true.get(f).ok_or(OracleError::Missing)?);
            1.0
        }
        Stmt::If(c, t, e) => {
            let p = truth_probability(c, &knowledge, profile.placeholder)?;
            let mut total = 0.0;
            // Each branch is a separate family of paths.
            for (weight, branch) in [(p, t), (1.0 - p, e)] {
                if weight > 0.0 {
                    total += weight * block(branch, &knowledge, profile)?;
                }
            }
            total
        }
        Stmt::While(c, body) => {
            let d = truth_probability(c, &knowledge, profile.placeholder)?;
            if d >= 1.0 {
                return Err(OracleError::Divergent);
            }
            // n iterations: d^n · body^n · (1 - d)
            let r = if d > 0.0 { block(body, &knowledge, profile)? } else { 0.0 };
            geometric_sum(1.0 - d, d * r).ok_or(OracleError::Divergent)?
        }
    };
    Ok(here * block(rest, &knowledge, profile)?)
}

pub fn reliability(program: &Program, profile: &Profile) -> Result<f64, OracleError> {
    block(&program.body, &Knowledge::new(), profile)
}
