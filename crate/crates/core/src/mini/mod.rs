//! The *Mini* language: a tiny imperative language with global boolean
//! variables, zero-argument functions, `if` and `while`.
//!
//! ```text
//! S        ::= begin stmtlist end
//! stmtlist ::= stmt ; stmtlist | stmt ;
//! stmt     ::= function-id ( ) | var-id := true | var-id := false
//!            | var-id := function-id ( )
//!            | if cond then stmtlist else stmtlist endif
//!            | while cond do stmtlist endwhile
//! ```
//!
//! Identifiers, function names and whole conditions are single tokens, so the
//! grammar stays operator-precedence; conditions are analyzed separately by
//! [`parse_condition`].

mod cond;
mod lexer;

use std::collections::HashMap;

pub use cond::{cond_evaluate, cond_truth_probability, parse_condition, CondExpr, CondSyntaxError};
pub use lexer::{LexError, Lexed};

use crate::grammar::{compute_opm, Grammar, PrecedenceMatrix, TermId};
use crate::parser::{parse, NodeId, ParseError, SyntaxTree, Token};

pub const VARIABLE: &str = "variable";
pub const FUNCTION: &str = "function";
pub const CONDITION: &str = "condition";

pub const KEYWORDS: [&str; 11] =
    ["begin", "end", "if", "then", "else", "endif", "while", "do", "endwhile", "true", "false"];

pub fn mini_grammar() -> Grammar {
    Grammar::builder("S")
        .rule("program", "S", ["begin", "stmtlist", "end"])
        .rule("list.cons", "stmtlist", ["stmt", ";", "stmtlist"])
        .rule("list.last", "stmtlist", ["stmt", ";"])
        .rule("stmt.call", "stmt", ["function-id", "(", ")"])
        .rule("stmt.assign-true", "stmt", ["var-id", ":=", "true"])
        .rule("stmt.assign-false", "stmt", ["var-id", ":=", "false"])
        .rule("stmt.assign-call", "stmt", ["var-id", ":=", "function-id", "(", ")"])
        .rule("stmt.if", "stmt", ["if", "cond", "then", "stmtlist", "else", "stmtlist", "endif"])
        .rule("stmt.while", "stmt", ["while", "cond", "do", "stmtlist", "endwhile"])
        .rule("var-id", "var-id", [VARIABLE])
        .rule("function-id", "function-id", [FUNCTION])
        .rule("cond", "cond", [CONDITION])
        .build()
        .expect("Mini grammar is well formed")
}

#[derive(Debug, thiserror::Error)]
pub enum MiniError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Syntax(#[from] ParseError),
}

/// The Mini grammar with its precedence matrix, ready to lex and parse.
#[derive(Debug, Clone)]
pub struct Mini {
    grammar: Grammar,
    opm: PrecedenceMatrix,
    terminals: HashMap<String, TermId>,
}

impl Default for Mini {
    fn default() -> Self {
        Self::new()
    }
}

impl Mini {
    pub fn new() -> Self {
        let grammar = mini_grammar();
        let opm = compute_opm(&grammar).expect("Mini grammar is operator precedence");
        let terminals = grammar.terminals().map(|t| (grammar.terminal_name(t).to_string(), t)).collect();
        Mini { grammar, opm, terminals }
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn opm(&self) -> &PrecedenceMatrix {
        &self.opm
    }

    pub(crate) fn terminal(&self, name: &str) -> TermId {
        self.terminals[name]
    }

    pub fn tokenize(&self, source: &str) -> Result<Lexed, LexError> {
        lexer::tokenize(self, source)
    }

    pub fn parse_tokens(&self, tokens: &[Token]) -> Result<SyntaxTree, ParseError> {
        parse(&self.grammar, &self.opm, tokens)
    }

    pub fn parse(&self, source: &str) -> Result<SyntaxTree, MiniError> {
        let lexed = self.tokenize(source)?;
        Ok(self.parse_tokens(&lexed.tokens)?)
    }
}

/// Renders tokens back to source text, one space between tokens.
pub fn untokenize(tokens: &[Token]) -> String {
    tokens.iter().map(Token::lexeme).collect::<Vec<_>>().join(" ")
}

/// Preorder numbering of inner nodes and content leaves (identifiers,
/// literals, conditions); keywords and punctuation are not numbered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreorderNumbering {
    ids: Vec<NodeId>,
    numbers: HashMap<NodeId, usize>,
}

impl PreorderNumbering {
    pub fn new(tree: &SyntaxTree, grammar: &Grammar) -> Self {
        let content: Vec<TermId> = [VARIABLE, FUNCTION, CONDITION, "true", "false"]
            .iter()
            .filter_map(|name| grammar.terminal(name))
            .collect();
        let ids: Vec<NodeId> = tree
            .preorder()
            .filter(|(_, n)| n.token().is_none_or(|t| content.contains(&t.terminal())))
            .map(|(_, n)| n.id())
            .collect();
        let numbers = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        PreorderNumbering { ids, numbers }
    }

    pub fn number(&self, id: NodeId) -> Option<usize> {
        self.numbers.get(&id).copied()
    }

    pub fn id(&self, number: usize) -> Option<NodeId> {
        self.ids.get(number).copied()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{validate_fnf, validate_operator_form};

    pub(crate) const V1: &str = "begin\n opA();\n x := true;\n if (x==true)\n  then opB();\n  else opA();\n endif;\nend\n";

    #[test]
    fn grammar_is_an_fnf_opg() {
        let mini = Mini::new();
        assert!(validate_operator_form(mini.grammar()).is_ok());
        assert!(validate_fnf(mini.grammar()).is_ok());
        assert!(compute_opm(mini.grammar()).is_ok());
    }

    #[test]
    fn example_tree_numbering() {
        let mini = Mini::new();
        let tree = mini.parse(V1).unwrap();
        let g = mini.grammar();
        let numbering = PreorderNumbering::new(&tree, g);
        assert_eq!(numbering.len(), 22);
        let label = |n: usize| {
            let node = tree.find(numbering.id(n).unwrap()).unwrap();
            match node.token() {
                Some(t) => t.lexeme().to_string(),
                None => g.nonterminal_name(node.lhs().unwrap()).to_string(),
            }
        };
        let labels: Vec<String> = (0..22).map(label).collect();
        assert_eq!(
            labels,
            [
                "S", "stmtlist", "stmt", "function-id", "opA", "stmtlist", "stmt", "var-id", "x", "true",
                "stmtlist", "stmt", "cond", "(x==true)", "stmtlist", "stmt", "function-id", "opB",
                "stmtlist", "stmt", "function-id", "opA"
            ]
        );
        let rule = |n: usize| tree.find(numbering.id(n).unwrap()).unwrap().rule().map(|r| g.rule(r).name());
        assert_eq!(rule(0), Some("program"));
        assert_eq!(rule(1), Some("list.cons"));
        assert_eq!(rule(10), Some("list.last"));
        assert_eq!(rule(14), Some("list.last"));
        assert_eq!(rule(6), Some("stmt.assign-true"));
        assert_eq!(g.display_rule(tree.root().rule().unwrap()), "S ::= begin stmtlist end");
    }

    #[test]
    fn untokenize_round_trips() {
        let mini = Mini::new();
        let lexed = mini.tokenize(V1).unwrap();
        let again = mini.tokenize(&untokenize(&lexed.tokens)).unwrap();
        assert_eq!(lexed.tokens, again.tokens);
    }

    #[test]
    fn syntax_errors() {
        let mini = Mini::new();
        assert!(matches!(mini.parse(""), Err(MiniError::Syntax(ParseError { position: 0, .. }))));
        assert!(matches!(mini.parse("begin opA() end"), Err(MiniError::Syntax(_))));
        assert!(matches!(mini.parse("begin x := 1; end"), Err(MiniError::Lex(_))));
    }
}
