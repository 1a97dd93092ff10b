//! Shift-reduce parsing driven by a precedence matrix.
//!
//! Trees are persistent: nodes are reference counted and never mutated, so an
//! incremental edit can share every untouched subtree with the previous
//! version. Each node records how many tokens it covers; absolute spans are
//! recovered by walking from the root.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

pub use crate::grammar::precedence_between;
use crate::grammar::{Grammar, NontermId, PrecedenceMatrix, Relation, RuleId, Symbol, TermId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u64);

impl NodeId {
    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    terminal: TermId,
    lexeme: String,
}

impl Token {
    pub fn new(terminal: TermId, lexeme: impl Into<String>) -> Self {
        Token { terminal, lexeme: lexeme.into() }
    }

    pub fn terminal(&self) -> TermId {
        self.terminal
    }

    pub fn lexeme(&self) -> &str {
        &self.lexeme
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Leaf(Token),
    Inner { rule: RuleId, lhs: NontermId },
}

#[derive(Debug)]
pub struct Node {
    id: NodeId,
    kind: NodeKind,
    children: Vec<Arc<Node>>,
    width: usize,
    size: usize,
}

impl Node {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn kind(&self) -> &NodeKind {
        &self.kind
    }

    pub fn children(&self) -> &[Arc<Node>] {
        &self.children
    }

    /// Number of tokens covered.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of nodes in this subtree, leaves included.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf(_))
    }

    pub fn token(&self) -> Option<&Token> {
        match &self.kind {
            NodeKind::Leaf(t) => Some(t),
            NodeKind::Inner { .. } => None,
        }
    }

    pub fn rule(&self) -> Option<RuleId> {
        match self.kind {
            NodeKind::Inner { rule, .. } => Some(rule),
            NodeKind::Leaf(_) => None,
        }
    }

    pub fn lhs(&self) -> Option<NontermId> {
        match self.kind {
            NodeKind::Inner { lhs, .. } => Some(lhs),
            NodeKind::Leaf(_) => None,
        }
    }

    pub(crate) fn symbol(&self) -> Symbol {
        match &self.kind {
            NodeKind::Leaf(t) => Symbol::T(t.terminal),
            NodeKind::Inner { lhs, .. } => Symbol::N(*lhs),
        }
    }

    pub(crate) fn with_children(&self, children: Vec<Arc<Node>>) -> Node {
        Node::new(self.id, self.kind.clone(), children)
    }

    fn new(id: NodeId, kind: NodeKind, children: Vec<Arc<Node>>) -> Node {
        let (width, size) = match kind {
            NodeKind::Leaf(_) => (1, 1),
            NodeKind::Inner { .. } => children
                .iter()
                .fold((0, 1), |(w, s), c| (w + c.width, s + c.size)),
        };
        Node { id, kind, children, width, size }
    }
}

// Right-recursive lists produce trees as deep as the program is long, so the
// default recursive drop could exhaust the stack.
impl Drop for Node {
    fn drop(&mut self) {
        let mut pending = std::mem::take(&mut self.children);
        while let Some(child) = pending.pop() {
            if let Ok(mut node) = Arc::try_unwrap(child) {
                pending.append(&mut node.children);
            }
        }
    }
}

/// A parse tree together with the id counter used to extend it.
#[derive(Debug, Clone)]
pub struct SyntaxTree {
    root: Arc<Node>,
    next_id: u64,
}

impl SyntaxTree {
    pub(crate) fn from_parts(root: Arc<Node>, next_id: u64) -> Self {
        SyntaxTree { root, next_id }
    }

    pub(crate) fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn root(&self) -> &Arc<Node> {
        &self.root
    }

    pub fn token_count(&self) -> usize {
        self.root.width
    }

    pub fn node_count(&self) -> usize {
        self.root.size
    }

    /// Nodes in preorder with the index of their first token.
    pub fn preorder(&self) -> Preorder<'_> {
        Preorder { stack: vec![(0, &self.root)] }
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Token> + '_ {
        self.preorder().filter_map(|(_, n)| n.token())
    }

    pub fn tokens(&self) -> Vec<Token> {
        self.leaves().cloned().collect()
    }

    pub fn token_at(&self, index: usize) -> Option<&Token> {
        if index >= self.root.width {
            return None;
        }
        let mut node = &self.root;
        let mut offset = 0;
        while let NodeKind::Inner { .. } = node.kind {
            let mut next = None;
            for child in &node.children {
                if index < offset + child.width {
                    next = Some(child);
                    break;
                }
                offset += child.width;
            }
            node = next?;
        }
        node.token()
    }

    pub fn find(&self, id: NodeId) -> Option<&Arc<Node>> {
        self.preorder().find(|(_, n)| n.id == id).map(|(_, n)| n)
    }

    /// Token range covered by the node with the given id.
    pub fn span_of(&self, id: NodeId) -> Option<Range<usize>> {
        self.preorder()
            .find(|(_, n)| n.id == id)
            .map(|(start, n)| start..start + n.width)
    }

    /// Same rules, same token spans and same leaf tokens; ids are ignored.
    pub fn structurally_equal(&self, other: &SyntaxTree) -> bool {
        let mut stack = vec![(&self.root, &other.root)];
        while let Some((a, b)) = stack.pop() {
            if a.kind != b.kind || a.width != b.width || a.children.len() != b.children.len() {
                return false;
            }
            stack.extend(a.children.iter().zip(&b.children));
        }
        true
    }

    /// Indented dump with node ids, rules and token spans.
    pub fn render(&self, grammar: &Grammar) -> String {
        let mut out = String::new();
        let mut stack = vec![(0usize, 0usize, &self.root)];
        while let Some((depth, start, node)) = stack.pop() {
            let label = match &node.kind {
                NodeKind::Leaf(t) => {
                    format!("{} {:?}", grammar.terminal_name(t.terminal), t.lexeme)
                }
                NodeKind::Inner { rule, .. } => grammar.display_rule(*rule),
            };
            out.push_str(&format!(
                "{:indent$}{} {} [{}, {})\n",
                "",
                node.id,
                label,
                start,
                start + node.width,
                indent = depth * 2
            ));
            let mut offset = start + node.width;
            for child in node.children.iter().rev() {
                offset -= child.width;
                stack.push((depth + 1, offset, child));
            }
        }
        out
    }
}

pub struct Preorder<'a> {
    stack: Vec<(usize, &'a Arc<Node>)>,
}

impl<'a> Iterator for Preorder<'a> {
    type Item = (usize, &'a Arc<Node>);

    fn next(&mut self) -> Option<Self::Item> {
        let (start, node) = self.stack.pop()?;
        let mut offset = start + node.width;
        for child in node.children.iter().rev() {
            offset -= child.width;
            self.stack.push((offset, child));
        }
        Some((start, node))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    /// The matrix has no entry for the two terminals.
    NoRelation { left: TermId, right: TermId },
    /// A handle matches no rule.
    NoRule,
    /// A handle matches several rules; the grammar is not invertible.
    AmbiguousHandle(Vec<RuleId>),
    /// Input reduced to something other than the axiom.
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at token {position}: {}", describe(kind))]
pub struct ParseError {
    pub position: usize,
    pub kind: SyntaxErrorKind,
}

fn describe(kind: &SyntaxErrorKind) -> &'static str {
    match kind {
        SyntaxErrorKind::NoRelation { .. } => "unexpected token",
        SyntaxErrorKind::NoRule => "no rule matches the handle",
        SyntaxErrorKind::AmbiguousHandle(_) => "handle matches several rules",
        SyntaxErrorKind::Incomplete => "incomplete input",
    }
}

/// Creates nodes, optionally reusing nodes of a previous tree whose children
/// are identical to the ones being reduced.
pub(crate) struct NodeFactory<'a> {
    next_id: u64,
    reuse: Option<&'a HashMap<NodeId, Arc<Node>>>,
    pub(crate) fresh: Vec<NodeId>,
}

impl<'a> NodeFactory<'a> {
    pub(crate) fn new(next_id: u64) -> Self {
        NodeFactory { next_id, reuse: None, fresh: Vec::new() }
    }

    /// `parents` maps each old child id to its old parent.
    pub(crate) fn reusing(next_id: u64, parents: &'a HashMap<NodeId, Arc<Node>>) -> Self {
        NodeFactory { next_id, reuse: Some(parents), fresh: Vec::new() }
    }

    pub(crate) fn next_id(&self) -> u64 {
        self.next_id
    }

    fn alloc(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.fresh.push(id);
        id
    }

    pub(crate) fn leaf(&mut self, token: Token) -> Arc<Node> {
        let id = self.alloc();
        Arc::new(Node::new(id, NodeKind::Leaf(token), Vec::new()))
    }

    fn inner(&mut self, rule: RuleId, lhs: NontermId, children: Vec<Arc<Node>>) -> Arc<Node> {
        if let (Some(parents), Some(first)) = (self.reuse, children.first()) {
            if let Some(old) = parents.get(&first.id) {
                let same = old.rule() == Some(rule)
                    && old.children.len() == children.len()
                    && old.children.iter().zip(&children).all(|(a, b)| a.id == b.id);
                if same {
                    return Arc::clone(old);
                }
            }
        }
        let id = self.alloc();
        Arc::new(Node::new(id, NodeKind::Inner { rule, lhs }, children))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Whole input between `#` sentinels; the result must be the axiom.
    Full,
    /// A region inside a terminal context; the result is any single nonterminal.
    Region { left: TermId, right: TermId },
}

#[derive(Debug)]
pub(crate) enum RegionError {
    Syntax(ParseError),
    /// The region cannot be parsed without touching its context.
    Context,
}

enum Item {
    Bottom(TermId),
    Term { term: TermId, rel: Relation, leaf: Arc<Node> },
    Nonterm(Arc<Node>),
}

impl Item {
    fn terminal(&self) -> Option<TermId> {
        match self {
            Item::Bottom(t) | Item::Term { term: t, .. } => Some(*t),
            Item::Nonterm(_) => None,
        }
    }
}

fn top_terminal(stack: &[Item]) -> (usize, TermId) {
    let i = stack.len() - 1;
    match stack[i].terminal() {
        Some(t) => (i, t),
        // Operator form keeps nonterminals from stacking on each other.
        None => (i - 1, stack[i - 1].terminal().expect("adjacent nonterminals on stack")),
    }
}

/// Core shift-reduce loop shared by full and region parsing. `offset` is the
/// absolute index of `leaves[0]`, used in error positions.
pub(crate) fn parse_leaves(
    grammar: &Grammar,
    opm: &PrecedenceMatrix,
    leaves: Vec<Arc<Node>>,
    offset: usize,
    mode: Mode,
    factory: &mut NodeFactory<'_>,
) -> Result<Arc<Node>, RegionError> {
    let (bottom, end) = match mode {
        Mode::Full => (TermId::SENTINEL, TermId::SENTINEL),
        Mode::Region { left, right } => (left, right),
    };
    let region = matches!(mode, Mode::Region { .. });
    let syntax = |position: usize, kind| RegionError::Syntax(ParseError { position, kind });
    let n = leaves.len();
    let mut input = leaves.into_iter().peekable();
    let mut i = 0;
    let mut stack = Vec::with_capacity(64);
    stack.push(Item::Bottom(bottom));

    loop {
        let (top, a) = top_terminal(&stack);
        if top == 0 && i == n {
            break;
        }
        let b = match input.peek() {
            Some(leaf) => leaf.token().map(Token::terminal).expect("input must be leaves"),
            None => end,
        };
        let rel = opm
            .get(a, b)
            .ok_or_else(|| syntax(offset + i, SyntaxErrorKind::NoRelation { left: a, right: b }))?;
        match rel {
            Relation::Yields | Relation::Equal => {
                if i == n || (region && top == 0 && rel == Relation::Equal) {
                    return Err(if region { RegionError::Context } else { syntax(offset + i, SyntaxErrorKind::Incomplete) });
                }
                let leaf = input.next().expect("lookahead present");
                stack.push(Item::Term { term: b, rel, leaf });
                i += 1;
            }
            Relation::Takes => {
                if top == 0 {
                    return Err(if region { RegionError::Context } else { syntax(offset + i, SyntaxErrorKind::Incomplete) });
                }
                let mut j = top;
                loop {
                    match &stack[j] {
                        Item::Term { rel: Relation::Equal, .. } => {
                            j = if stack[j - 1].terminal().is_some() { j - 1 } else { j - 2 };
                            if j == 0 {
                                return Err(RegionError::Context);
                            }
                        }
                        Item::Term { .. } => break,
                        _ => unreachable!("handle walk stops at a terminal"),
                    }
                }
                let start = if matches!(stack[j - 1], Item::Nonterm(_)) { j - 1 } else { j };
                let children: Vec<Arc<Node>> = stack
                    .drain(start..)
                    .map(|item| match item {
                        Item::Term { leaf, .. } => leaf,
                        Item::Nonterm(node) => node,
                        Item::Bottom(_) => unreachable!("bottom is never part of a handle"),
                    })
                    .collect();
                let rhs: Vec<Symbol> = children.iter().map(|c| c.symbol()).collect();
                let rule = match grammar.rules_with_rhs(&rhs) {
                    [rule] => grammar.rule(*rule),
                    [] => return Err(syntax(offset + i, SyntaxErrorKind::NoRule)),
                    many => return Err(syntax(offset + i, SyntaxErrorKind::AmbiguousHandle(many.to_vec()))),
                };
                stack.push(Item::Nonterm(factory.inner(rule.id(), rule.lhs(), children)));
            }
        }
    }

    let result = match stack.pop() {
        Some(Item::Nonterm(node)) => node,
        _ if region => return Err(RegionError::Context),
        _ => {
            let empty = grammar
                .rules_with_rhs(&[])
                .iter()
                .map(|&r| grammar.rule(r))
                .find(|r| r.lhs() == grammar.axiom())
                .ok_or_else(|| syntax(offset, SyntaxErrorKind::Incomplete))?;
            return Ok(factory.inner(empty.id(), empty.lhs(), Vec::new()));
        }
    };
    if region {
        return Ok(result);
    }
    let lhs = result.lhs().expect("reduced node is inner");
    if lhs == grammar.axiom() {
        return Ok(result);
    }
    let wrap = grammar
        .rules_with_rhs(&[Symbol::N(lhs)])
        .iter()
        .map(|&r| grammar.rule(r))
        .find(|r| r.lhs() == grammar.axiom())
        .ok_or_else(|| syntax(offset + n, SyntaxErrorKind::Incomplete))?;
    Ok(factory.inner(wrap.id(), wrap.lhs(), vec![result]))
}

/// Parses a complete token stream.
pub fn parse(grammar: &Grammar, opm: &PrecedenceMatrix, tokens: &[Token]) -> Result<SyntaxTree, ParseError> {
    let mut factory = NodeFactory::new(0);
    let leaves = tokens.iter().map(|t| factory.leaf(t.clone())).collect();
    match parse_leaves(grammar, opm, leaves, 0, Mode::Full, &mut factory) {
        Ok(root) => Ok(SyntaxTree::from_parts(root, factory.next_id())),
        Err(RegionError::Syntax(e)) => Err(e),
        Err(RegionError::Context) => unreachable!("full parses have no context"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{arithmetic_grammar, tokenize_arithmetic};
    use crate::grammar::compute_opm;

    fn tree(src: &str) -> (Grammar, SyntaxTree) {
        let g = arithmetic_grammar();
        let m = compute_opm(&g).unwrap();
        let t = parse(&g, &m, &tokenize_arithmetic(&g, src).unwrap()).unwrap();
        (g, t)
    }

    /// Bracketed rendering using nonterminal names, e.g. `A(B(n) + B(n))`.
    fn shape(g: &Grammar, node: &Node) -> String {
        match node.kind() {
            NodeKind::Leaf(t) => t.lexeme().to_string(),
            NodeKind::Inner { lhs, .. } => {
                let inner: Vec<String> = node.children().iter().map(|c| shape(g, c)).collect();
                format!("{}({})", g.nonterminal_name(*lhs), inner.join(" "))
            }
        }
    }

    #[test]
    fn expression_tree_shape() {
        let (g, t) = tree("5*4+2+6*7*8");
        assert_eq!(
            shape(&g, t.root()),
            "S(A(A(B(B(5) * 4) + B(2)) + B(B(B(6) * 7) * 8)))"
        );
        assert_eq!(t.token_count(), 11);
        assert_eq!(t.tokens().iter().map(Token::lexeme).collect::<String>(), "5*4+2+6*7*8");
    }

    #[test]
    fn reduction_order_follows_ids() {
        let (g, t) = tree("5*4+2+6*7*8");
        // Leaves take ids 0..11; inner nodes follow in reduction order.
        let id_of = |text: &str| {
            t.preorder()
                .find(|(_, n)| !n.is_leaf() && shape(&g, n) == text)
                .map(|(_, n)| n.id())
                .unwrap()
        };
        assert!(id_of("B(6)") < id_of("B(B(6) * 7)"));
        assert!(id_of("B(B(6) * 7)") < id_of("B(B(B(6) * 7) * 8)"));
        assert!(t.preorder().filter(|(_, n)| n.is_leaf()).all(|(_, n)| n.id().get() < 11));
    }

    #[test]
    fn malformed_input_reports_position() {
        let g = arithmetic_grammar();
        let m = compute_opm(&g).unwrap();
        let n = g.terminal("n").unwrap();
        let toks = vec![Token::new(n, "1"), Token::new(n, "2")];
        let err = parse(&g, &m, &toks).unwrap_err();
        assert_eq!(err.position, 1);
        assert_eq!(err.kind, SyntaxErrorKind::NoRelation { left: n, right: n });

        let err = parse(&g, &m, &[]).unwrap_err();
        assert_eq!(err.position, 0);
        let plus = g.terminal("+").unwrap();
        let err = parse(&g, &m, &[Token::new(n, "1"), Token::new(plus, "+")]).unwrap_err();
        assert_eq!(err.position, 2);
    }

    #[test]
    fn spans_and_lookup() {
        let (_, t) = tree("1+2*3");
        for (start, node) in t.preorder() {
            assert_eq!(t.span_of(node.id()), Some(start..start + node.width()));
            let mut offset = start;
            for child in node.children() {
                assert_eq!(t.span_of(child.id()).unwrap().start, offset);
                offset += child.width();
            }
            if !node.is_leaf() {
                assert_eq!(offset, start + node.width());
            }
        }
        assert_eq!(t.token_at(2).unwrap().lexeme(), "2");
        assert!(t.token_at(5).is_none());
        assert_eq!(t.node_count(), t.preorder().count());
    }

    #[test]
    fn deterministic_and_structural() {
        let (_, a) = tree("1+2+3*4");
        let (_, b) = tree("1+2+3*4");
        let (_, c) = tree("1*2+3+4");
        assert!(a.structurally_equal(&b));
        assert!(!a.structurally_equal(&c));
        let ids_a: Vec<_> = a.preorder().map(|(_, n)| n.id()).collect();
        let ids_b: Vec<_> = b.preorder().map(|(_, n)| n.id()).collect();
        assert_eq!(ids_a, ids_b);
    }

    #[test]
    fn empty_axiom_rule() {
        let g = Grammar::builder("S")
            .rule("S.list", "S", ["a", "L"])
            .rule("S.empty", "S", Vec::<&str>::new())
            .rule("L", "L", ["b"])
            .build()
            .unwrap();
        let m = compute_opm(&g).unwrap();
        let t = parse(&g, &m, &[]).unwrap();
        assert_eq!(t.root().rule(), g.rule_by_name("S.empty").map(|r| r.id()));
        assert_eq!(t.token_count(), 0);
    }

    #[test]
    fn render_lists_every_node() {
        let (g, t) = tree("7");
        let text = t.render(&g);
        assert_eq!(text.lines().count(), t.node_count());
        assert!(text.starts_with("#2 S ::= B [0, 1)"));
    }

    #[test]
    fn deep_trees_drop_without_recursion() {
        let g = arithmetic_grammar();
        let m = compute_opm(&g).unwrap();
        let src = vec!["1"; 200_000].join("*");
        let t = parse(&g, &m, &tokenize_arithmetic(&g, &src).unwrap()).unwrap();
        assert_eq!(t.token_count(), 399_999);
        drop(t);
    }
}
