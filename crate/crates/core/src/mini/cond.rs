use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::reliability::ProbExpr;
use crate::scalar::Scalar;

/// Boolean condition of an `if` or `while`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CondExpr {
    VarEqTrue(String),
    VarEqFalse(String),
    Not(Box<CondExpr>),
    And(Box<CondExpr>, Box<CondExpr>),
    /// Nondeterministic predicate `*`.
    Placeholder,
}

impl CondExpr {
    pub fn not(e: CondExpr) -> Self {
        CondExpr::Not(Box::new(e))
    }

    pub fn and(a: CondExpr, b: CondExpr) -> Self {
        CondExpr::And(Box::new(a), Box::new(b))
    }

    /// Kleene three-valued evaluation; `None` is unknown.
    pub fn evaluate(&self, lookup: &impl Fn(&str) -> Option<bool>) -> Option<bool> {
        match self {
            CondExpr::VarEqTrue(v) => lookup(v),
            CondExpr::VarEqFalse(v) => lookup(v).map(|b| !b),
            CondExpr::Not(e) => e.evaluate(lookup).map(|b| !b),
            CondExpr::And(a, b) => match (a.evaluate(lookup), b.evaluate(lookup)) {
                (Some(false), _) | (_, Some(false)) => Some(false),
                (Some(true), Some(true)) => Some(true),
                _ => None,
            },
            CondExpr::Placeholder => None,
        }
    }

    /// Variable names in order of occurrence, repeats included.
    pub fn variable_occurrences(&self) -> Vec<&str> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            match e {
                CondExpr::VarEqTrue(v) | CondExpr::VarEqFalse(v) => out.push(v.as_str()),
                CondExpr::Not(inner) => stack.push(inner),
                CondExpr::And(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                CondExpr::Placeholder => {}
            }
        }
        out
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.variable_occurrences().into_iter().collect()
    }

    pub fn has_placeholder(&self) -> bool {
        match self {
            CondExpr::Placeholder => true,
            CondExpr::Not(e) => e.has_placeholder(),
            CondExpr::And(a, b) => a.has_placeholder() || b.has_placeholder(),
            _ => false,
        }
    }
}

impl fmt::Display for CondExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CondExpr::VarEqTrue(v) => write!(f, "{v}==true"),
            CondExpr::VarEqFalse(v) => write!(f, "{v}==false"),
            CondExpr::Placeholder => f.write_str("*"),
            CondExpr::Not(e) => match **e {
                CondExpr::Placeholder | CondExpr::Not(_) => write!(f, "!{e}"),
                _ => write!(f, "!({e})"),
            },
            CondExpr::And(a, b) => match **b {
                CondExpr::And(..) => write!(f, "{a} && ({b})"),
                _ => write!(f, "{a} && {b}"),
            },
        }
    }
}

/// Three-valued evaluation against a partial variable map.
pub fn cond_evaluate(e: &CondExpr, vm: &std::collections::BTreeMap<String, bool>) -> Option<bool> {
    e.evaluate(&|v| vm.get(v).copied())
}

/// `Pr_T(e)` under independence: products for conjunctions, complements for
/// negations. `lookup` supplies `Pr_T(v)`, typically an atom when unknown.
pub fn cond_truth_probability<S: Scalar>(
    e: &CondExpr,
    lookup: &impl Fn(&str) -> ProbExpr<S>,
    placeholder: &S,
) -> ProbExpr<S> {
    match e {
        CondExpr::VarEqTrue(v) => lookup(v),
        CondExpr::VarEqFalse(v) => lookup(v).complement(),
        CondExpr::Not(inner) => cond_truth_probability(inner, lookup, placeholder).complement(),
        CondExpr::And(a, b) => {
            &cond_truth_probability(a, lookup, placeholder) * &cond_truth_probability(b, lookup, placeholder)
        }
        CondExpr::Placeholder => ProbExpr::constant(placeholder.clone()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("condition syntax error at byte {position}: {message}")]
pub struct CondSyntaxError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Ident(&'a str),
    EqEq,
    Bang,
    AndAnd,
    Open,
    Close,
    Star,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok<'_>)>, CondSyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let two = bytes.get(i..i + 2);
        let (tok, len) = match b {
            _ if b.is_ascii_whitespace() => {
                i += 1;
                continue;
            }
            b'=' if two == Some(b"==") => (Tok::EqEq, 2),
            b'&' if two == Some(b"&&") => (Tok::AndAnd, 2),
            b'!' => (Tok::Bang, 1),
            b'(' => (Tok::Open, 1),
            b')' => (Tok::Close, 1),
            b'*' => (Tok::Star, 1),
            b if b.is_ascii_alphabetic() || b == b'_' => {
                let len = bytes[i..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == b'_').count();
                (Tok::Ident(&text[i..i + len]), len)
            }
            _ => {
                let found = text[i..].chars().next().unwrap_or('?');
                return Err(CondSyntaxError { position: i, message: format!("unexpected {found:?}") });
            }
        };
        out.push((i, tok));
        i += len;
    }
    Ok(out)
}

struct CondParser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    end: usize,
}

impl<'a> CondParser<'a> {
    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(i, _)| *i)
    }

    fn error<T>(&self, message: &str) -> Result<T, CondSyntaxError> {
        Err(CondSyntaxError { position: self.offset(), message: message.to_string() })
    }

    fn conjunction(&mut self) -> Result<CondExpr, CondSyntaxError> {
        let mut left = self.unary()?;
        while matches!(self.peek(), Some(Tok::AndAnd) | Some(Tok::Ident("and"))) {
            self.pos += 1;
            left = CondExpr::and(left, self.unary()?);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<CondExpr, CondSyntaxError> {
        match self.peek() {
            Some(Tok::Bang) | Some(Tok::Ident("not")) => {
                self.pos += 1;
                Ok(CondExpr::not(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<CondExpr, CondSyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Star) => {
                self.pos += 1;
                Ok(CondExpr::Placeholder)
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let inner = self.conjunction()?;
                if self.peek() != Some(&Tok::Close) {
                    return self.error("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Tok::Ident(name)) if !matches!(name, "and" | "not" | "true" | "false") => {
                self.pos += 1;
                if self.peek() != Some(&Tok::EqEq) {
                    return self.error("expected `==`");
                }
                self.pos += 1;
                let value = match self.peek() {
                    Some(Tok::Ident("true")) => CondExpr::VarEqTrue(name.to_string()),
                    Some(Tok::Ident("false")) => CondExpr::VarEqFalse(name.to_string()),
                    _ => return self.error("expected `true` or `false`"),
                };
                self.pos += 1;
                Ok(value)
            }
            _ => self.error("expected a predicate"),
        }
    }
}

/// Parses `v==true`, `v==false`, `!e`/`not e`, `e && e`/`e and e`,
/// parentheses and `*`.
pub fn parse_condition(text: &str) -> Result<CondExpr, CondSyntaxError> {
    let mut parser = CondParser { toks: lex(text)?, pos: 0, end: text.len() };
    let expr = parser.conjunction()?;
    if parser.pos != parser.toks.len() {
        return parser.error("unexpected trailing input");
    }
    Ok(expr)
}
