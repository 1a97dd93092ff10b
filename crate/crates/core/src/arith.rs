//! Arithmetic expressions over `+` and `*`, with a value-computing schema.

use std::fmt::Debug;
use std::marker::PhantomData;

use num_traits::Num;
use thiserror::Error;

use crate::attributes::{AttributeSchema, Child};
use crate::grammar::{Grammar, Rule};
use crate::parser::Token;

/// `S ::= A | B`, `A ::= A + B | B + B`, `B ::= B * n | n`.
pub fn arithmetic_grammar() -> Grammar {
    Grammar::builder("S")
        .rule("S.sum", "S", ["A"])
        .rule("S.product", "S", ["B"])
        .rule("A.sum", "A", ["A", "+", "B"])
        .rule("A.first", "A", ["B", "+", "B"])
        .rule("B.product", "B", ["B", "*", "n"])
        .rule("B.number", "B", ["n"])
        .build()
        .expect("arithmetic grammar is well formed")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unexpected character {found:?} at byte {position}")]
pub struct ArithLexError {
    pub position: usize,
    pub found: char,
}

/// Splits into decimal literals (`n`), `+` and `*`; whitespace is skipped.
pub fn tokenize_arithmetic(grammar: &Grammar, source: &str) -> Result<Vec<Token>, ArithLexError> {
    let term = |name| grammar.terminal(name).expect("arithmetic terminal");
    let (n, plus, star) = (term("n"), term("+"), term("*"));
    let mut tokens = Vec::new();
    let mut chars = source.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '+' => tokens.push(Token::new(plus, "+")),
            '*' => tokens.push(Token::new(star, "*")),
            c if c.is_ascii_digit() => {
                let mut end = i + 1;
                while let Some(&(j, d)) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    end = j + 1;
                    chars.next();
                }
                tokens.push(Token::new(n, &source[i..end]));
            }
            c if c.is_whitespace() => {}
            found => return Err(ArithLexError { position: i, found }),
        }
    }
    Ok(tokens)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithmeticError {
    #[error("invalid number literal {0:?}")]
    Literal(String),
    #[error("no semantic function for rule `{0}`")]
    UnknownRule(String),
}

/// `value` of every node: sums and products of the literals below it.
#[derive(Debug, Clone, Default)]
pub struct ArithmeticSchema<T> {
    _value: PhantomData<fn() -> T>,
}

impl<T> ArithmeticSchema<T> {
    pub fn new() -> Self {
        ArithmeticSchema { _value: PhantomData }
    }
}

impl<T: Num + Clone + Debug> AttributeSchema for ArithmeticSchema<T> {
    type Value = T;
    type Error = ArithmeticError;

    fn name(&self) -> &str {
        "arithmetic"
    }

    fn synthesize(&self, rule: &Rule, children: &[Child<'_, T>]) -> Result<T, ArithmeticError> {
        let value = |i: usize| children[i].value().cloned().expect("nonterminal child");
        match rule.name() {
            "S.sum" | "S.product" => Ok(value(0)),
            "A.sum" | "A.first" => Ok(value(0) + value(2)),
            "B.product" | "B.number" => {
                let literal = children.last().and_then(Child::token).expect("literal child").lexeme();
                let n = T::from_str_radix(literal, 10).map_err(|_| ArithmeticError::Literal(literal.into()))?;
                Ok(if children.len() == 3 { value(0) * n } else { n })
            }
            other => Err(ArithmeticError::UnknownRule(other.to_string())),
        }
    }

    fn attribute_names(&self, _: &T) -> &'static [&'static str] {
        &["value"]
    }
}
