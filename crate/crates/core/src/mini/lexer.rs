use std::ops::Range;

use thiserror::Error;

use super::{Mini, CONDITION, FUNCTION, KEYWORDS, VARIABLE};
use crate::parser::Token;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unexpected character {found:?} at byte {position}")]
    UnexpectedChar { position: usize, found: char },
    #[error("condition starting at byte {position} is not closed by `{expected}`")]
    UnterminatedCondition { position: usize, expected: &'static str },
    #[error("empty condition at byte {position}")]
    EmptyCondition { position: usize },
}

impl LexError {
    pub fn position(&self) -> usize {
        match *self {
            LexError::UnexpectedChar { position, .. }
            | LexError::UnterminatedCondition { position, .. }
            | LexError::EmptyCondition { position } => position,
        }
    }
}

/// Tokens with the byte range each one came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexed {
    pub tokens: Vec<Token>,
    pub spans: Vec<Range<usize>>,
}

fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

fn is_ident(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

/// Byte index of the first standalone occurrence of `word` at or after `from`.
fn find_word(src: &str, from: usize, word: &str) -> Option<usize> {
    let bytes = src.as_bytes();
    let mut at = from;
    while let Some(i) = src[at..].find(word).map(|i| i + at) {
        let before = i == 0 || !is_ident(bytes[i - 1]);
        let after = bytes.get(i + word.len()).is_none_or(|&b| !is_ident(b));
        if before && after {
            return Some(i);
        }
        at = i + 1;
    }
    None
}

pub(super) fn tokenize(mini: &Mini, src: &str) -> Result<Lexed, LexError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut spans = Vec::new();
    let mut push = |term: &str, range: Range<usize>| {
        tokens.push(Token::new(mini.terminal(term), &src[range.clone()]));
        spans.push(range);
    };
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        match b {
            b';' | b'(' | b')' => {
                push(&src[i..i + 1], i..i + 1);
                i += 1;
            }
            b':' if bytes.get(i + 1) == Some(&b'=') => {
                push(":=", i..i + 2);
                i += 2;
            }
            b if is_ident_start(b) => {
                let start = i;
                while i < bytes.len() && is_ident(bytes[i]) {
                    i += 1;
                }
                let word = &src[start..i];
                if KEYWORDS.contains(&word) {
                    push(word, start..i);
                    let closer = match word {
                        "if" => "then",
                        "while" => "do",
                        _ => continue,
                    };
                    let close = find_word(src, i, closer)
                        .ok_or(LexError::UnterminatedCondition { position: i, expected: closer })?;
                    let text = src[i..close].trim();
                    if text.is_empty() {
                        return Err(LexError::EmptyCondition { position: i });
                    }
                    let cond_start = i + (src[i..close].len() - src[i..close].trim_start().len());
                    push(CONDITION, cond_start..cond_start + text.len());
                    i = close;
                } else {
                    let next = src[i..].trim_start().as_bytes().first();
                    push(if next == Some(&b'(') { FUNCTION } else { VARIABLE }, start..i);
                }
            }
            _ => {
                let found = src[i..].chars().next().expect("non-empty remainder");
                return Err(LexError::UnexpectedChar { position: i, found });
            }
        }
    }
    Ok(Lexed { tokens, spans })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes(src: &str) -> Vec<(String, String)> {
        let mini = Mini::new();
        let g = mini.grammar();
        mini.tokenize(src)
            .unwrap()
            .tokens
            .iter()
            .map(|t| (g.terminal_name(t.terminal()).to_string(), t.lexeme().to_string()))
            .collect()
    }

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn assignment() {
        assert_eq!(
            classes("x := true ;"),
            pairs(&[(VARIABLE, "x"), (":=", ":="), ("true", "true"), (";", ";")])
        );
    }

    #[test]
    fn condition_capture() {
        assert_eq!(
            classes("if (x==true) then"),
            pairs(&[("if", "if"), (CONDITION, "(x==true)"), ("then", "then")])
        );
        assert_eq!(
            classes("while !a && then_b==false do"),
            pairs(&[("while", "while"), (CONDITION, "!a && then_b==false"), ("do", "do")])
        );
    }

    #[test]
    fn functions_by_right_context() {
        assert_eq!(
            classes("y := f ( ) ; g();"),
            pairs(&[
                (VARIABLE, "y"),
                (":=", ":="),
                (FUNCTION, "f"),
                ("(", "("),
                (")", ")"),
                (";", ";"),
                (FUNCTION, "g"),
                ("(", "("),
                (")", ")"),
                (";", ";"),
            ])
        );
    }

    #[test]
    fn spans_and_errors() {
        let mini = Mini::new();
        let lexed = mini.tokenize("begin  x := true; end").unwrap();
        assert_eq!(lexed.spans[1], 7..8);
        assert_eq!(lexed.tokens.len(), lexed.spans.len());
        assert_eq!(mini.tokenize("x = 1"), Err(LexError::UnexpectedChar { position: 2, found: '=' }));
        assert!(matches!(mini.tokenize("if x==true"), Err(LexError::UnterminatedCondition { .. })));
        assert!(matches!(mini.tokenize("if then"), Err(LexError::EmptyCondition { .. })));
    }

    #[test]
    fn example_program_token_count() {
        let mini = Mini::new();
        let lexed = mini.tokenize(super::super::tests::V1).unwrap();
        assert_eq!(lexed.tokens.len(), 24);
    }
}
