//! Sidecar JSON files: usage profiles and property automata.

use std::collections::BTreeMap;
use std::path::Path;

use incver_core::reliability::ReliabilityProfile;
use incver_core::safety::PropertyAutomaton;
use incver_core::{Rational, Scalar};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

/// `{"success": {"f": 0.97}, "return_true": {"g": 0.3}, "placeholder": 0.5}`.
///
/// Probabilities are JSON numbers, read digit for digit, or strings holding
/// a decimal or a fraction `n/d`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    success: BTreeMap<String, Value>,
    #[serde(default)]
    return_true: BTreeMap<String, Value>,
    placeholder: Option<Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AutomatonFile {
    states: Vec<String>,
    initial: String,
    alphabet: Vec<String>,
    #[serde(default)]
    transitions: Vec<TransitionEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionEntry {
    from: String,
    on: String,
    to: String,
}

fn config_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Config { path: path.display().to_string(), message: message.into() }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = crate::read_file(path)?;
    serde_json::from_str(&text).map_err(|e| config_error(path, e.to_string()))
}

/// Exact value of a probability literal.
pub fn parse_probability(value: &Value) -> Option<Rational> {
    let text = match value {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.trim().to_string(),
        _ => return None,
    };
    match text.split_once('/') {
        Some((n, d)) => {
            let n: num_bigint::BigInt = n.trim().parse().ok()?;
            let d: num_bigint::BigInt = d.trim().parse().ok()?;
            (d != num_bigint::BigInt::from(0)).then(|| Rational::new(n, d))
        }
        None => Rational::from_decimal(&text),
    }
}

pub fn load_profile(path: &Path) -> Result<ReliabilityProfile<Rational>, CliError> {
    let file: ProfileFile = read_json(path)?;
    let number = |what: String, v: &Value| {
        parse_probability(v).ok_or_else(|| config_error(path, format!("{what} is not a number: {v}")))
    };
    let placeholder = match &file.placeholder {
        Some(v) => number("placeholder".into(), v)?,
        None => Rational::new(1.into(), 2.into()),
    };
    let mut profile = ReliabilityProfile::new(placeholder);
    for (f, v) in &file.success {
        profile = profile.with_succ(f, number(format!("success of `{f}`"), v)?);
    }
    for (f, v) in &file.return_true {
        profile = profile.with_ret_true(f, number(format!("return_true of `{f}`"), v)?);
    }
    profile.validate().map_err(|e| config_error(path, e.to_string()))?;
    Ok(profile)
}

pub fn load_automaton(path: &Path) -> Result<PropertyAutomaton, CliError> {
    let file: AutomatonFile = read_json(path)?;
    let transitions: Vec<(String, String, String)> =
        file.transitions.into_iter().map(|t| (t.from, t.on, t.to)).collect();
    PropertyAutomaton::new(&file.states, &file.initial, &file.alphabet, &transitions)
        .map_err(|e| config_error(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probabilities_are_exact() {
        let v: Value = serde_json::from_str("0.97").unwrap();
        assert_eq!(parse_probability(&v), Some(Rational::new(97.into(), 100.into())));
        let v: Value = serde_json::from_str("\"1/3\"").unwrap();
        assert_eq!(parse_probability(&v), Some(Rational::new(1.into(), 3.into())));
        assert_eq!(parse_probability(&Value::String("1/0".into())), None);
        assert_eq!(parse_probability(&Value::Bool(true)), None);
    }
}
