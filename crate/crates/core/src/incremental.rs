//! Incremental re-parsing.
//!
//! An edit is re-parsed inside the smallest subtree that covers it, using the
//! terminals just outside that subtree as context. If the region reduces to
//! the same nonterminal as before, the new subtree is spliced in place and
//! the path from the root down to it is copied; otherwise the next enclosing
//! subtree is tried, ending with a full parse at the root.

use std::collections::{HashMap, HashSet, VecDeque};
use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

use crate::grammar::{Grammar, NontermId, PrecedenceMatrix, TermId};
use crate::parser::{parse_leaves, Mode, Node, NodeFactory, NodeId, ParseError, RegionError, SyntaxTree, Token};

/// Replace the old tokens in `range` by `replacement`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub range: Range<usize>,
    pub replacement: Vec<Token>,
}

impl Edit {
    pub fn new(range: Range<usize>, replacement: Vec<Token>) -> Self {
        Edit { range, replacement }
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty() && self.replacement.is_empty()
    }

    /// The edited token stream.
    pub fn apply(&self, tokens: &[Token]) -> Vec<Token> {
        let mut out = Vec::with_capacity(tokens.len() + self.replacement.len() - self.range.len().min(tokens.len()));
        out.extend_from_slice(&tokens[..self.range.start]);
        out.extend_from_slice(&self.replacement);
        out.extend_from_slice(&tokens[self.range.end..]);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReuseStats {
    pub tokens_reparsed: usize,
    pub nodes_rebuilt: usize,
    pub nodes_reused: usize,
    /// Range of the new token stream that was re-parsed.
    pub subcontext: Range<usize>,
}

/// Where and how a new tree differs from its predecessor.
#[derive(Debug, Clone)]
pub struct Splice {
    node: Arc<Node>,
    offset: usize,
    replaced: NodeId,
    spine: Vec<Arc<Node>>,
    fresh: HashSet<NodeId>,
    removed: Vec<NodeId>,
}

impl Splice {
    /// Root of the re-parsed subtree in the new tree.
    pub fn node(&self) -> &Arc<Node> {
        &self.node
    }

    /// Index of the first token of [`Splice::node`].
    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Id of the old subtree root that was replaced.
    pub fn replaced(&self) -> NodeId {
        self.replaced
    }

    /// Copied ancestors of the spliced node, root first. They keep their ids.
    pub fn spine(&self) -> &[Arc<Node>] {
        &self.spine
    }

    pub fn is_fresh(&self, id: NodeId) -> bool {
        self.fresh.contains(&id)
    }

    pub fn fresh(&self) -> &HashSet<NodeId> {
        &self.fresh
    }

    /// Old node ids that no longer occur in the new tree.
    pub fn removed(&self) -> &[NodeId] {
        &self.removed
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error("edit range {start}..{end} is outside the {len}-token stream")]
    OutOfBounds { start: usize, end: usize, len: usize },
    #[error(transparent)]
    Syntax(#[from] ParseError),
}

/// Two derivations in the same terminal context are interchangeable when they
/// produce the same nonterminal.
pub fn matching_condition(old: NontermId, new: NontermId, _context: (TermId, TermId)) -> bool {
    old == new
}

/// The single edit turning `old` into `new`: common prefix and suffix are kept.
pub fn diff_to_edit(old: &[Token], new: &[Token]) -> Edit {
    let prefix = old.iter().zip(new).take_while(|(a, b)| a == b).count();
    let suffix = old[prefix..]
        .iter()
        .rev()
        .zip(new[prefix..].iter().rev())
        .take_while(|(a, b)| a == b)
        .count();
    if prefix == old.len() && prefix == new.len() {
        return Edit::new(0..0, Vec::new());
    }
    Edit::new(prefix..old.len() - suffix, new[prefix..new.len() - suffix].to_vec())
}

fn collect_leaves(node: &Arc<Node>, out: &mut Vec<Arc<Node>>) {
    let mut stack = vec![node];
    while let Some(n) = stack.pop() {
        if n.is_leaf() {
            out.push(Arc::clone(n));
        } else {
            stack.extend(n.children().iter().rev());
        }
    }
}

fn record_parents(node: &Arc<Node>, parents: &mut HashMap<NodeId, Arc<Node>>) {
    let mut stack = vec![node];
    while let Some(n) = stack.pop() {
        for c in n.children() {
            parents.insert(c.id(), Arc::clone(n));
            stack.push(c);
        }
    }
}

/// Path from the root to the deepest inner node covering `range`, with each
/// node's first token index and its position among its parent's children.
fn covering_path(tree: &SyntaxTree, range: &Range<usize>) -> Vec<(Arc<Node>, usize, usize)> {
    let mut path = vec![(Arc::clone(tree.root()), 0, 0)];
    loop {
        let (node, start, _) = path.last().expect("path starts at the root");
        let mut offset = *start;
        let mut next = None;
        for (i, child) in node.children().iter().enumerate() {
            let end = offset + child.width();
            let covers = if range.is_empty() {
                offset <= range.start && range.start <= end
            } else {
                offset <= range.start && range.end <= end
            };
            if covers {
                if !child.is_leaf() {
                    next = Some((Arc::clone(child), offset, i));
                }
                break;
            }
            offset = end;
        }
        match next {
            Some(step) => path.push(step),
            None => return path,
        }
    }
}

/// Re-parses only as much of `old` as `edit` requires. Returns the new tree,
/// reuse accounting, and the splice description (absent for an empty edit).
pub fn apply_edit(
    old: &SyntaxTree,
    edit: &Edit,
    grammar: &Grammar,
    opm: &PrecedenceMatrix,
) -> Result<(SyntaxTree, ReuseStats, Option<Splice>), EditError> {
    let len = old.token_count();
    let Range { start, end } = edit.range;
    if start > end || end > len {
        return Err(EditError::OutOfBounds { start, end, len });
    }
    if edit.is_empty() {
        let stats = ReuseStats {
            tokens_reparsed: 0,
            nodes_rebuilt: 0,
            nodes_reused: old.node_count(),
            subcontext: start..start,
        };
        return Ok((old.clone(), stats, None));
    }

    let path = covering_path(old, &edit.range);
    let mut parents: HashMap<NodeId, Arc<Node>> = HashMap::new();
    // Old leaves of the current candidate, in order.
    let mut leaves: VecDeque<Arc<Node>> = VecDeque::new();
    let mut covered: Option<NodeId> = None;

    for depth in (0..path.len()).rev() {
        let (candidate, node_start, _) = &path[depth];
        let node_start = *node_start;
        let node_end = node_start + candidate.width();

        // Grow the parent map and leaf list from the previous candidate.
        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut seen_covered = false;
        for child in candidate.children() {
            parents.insert(child.id(), Arc::clone(candidate));
            if Some(child.id()) == covered {
                seen_covered = true;
                continue;
            }
            record_parents(child, &mut parents);
            collect_leaves(child, if seen_covered || covered.is_none() { &mut right } else { &mut left });
        }
        for leaf in left.into_iter().rev() {
            leaves.push_front(leaf);
        }
        leaves.extend(right);
        covered = Some(candidate.id());

        let mut factory = NodeFactory::reusing(old.next_id(), &parents);
        let mut input: Vec<Arc<Node>> = leaves.range(..start - node_start).cloned().collect();
        input.extend(edit.replacement.iter().map(|t| factory.leaf(t.clone())));
        input.extend(leaves.range(end - node_start..).cloned());
        let region_len = input.len();

        let mode = if depth == 0 {
            Mode::Full
        } else {
            let context = |i: Option<usize>| i.and_then(|i| old.token_at(i)).map_or(TermId::SENTINEL, Token::terminal);
            Mode::Region { left: context(node_start.checked_sub(1)), right: context(Some(node_end)) }
        };
        let new_node = match parse_leaves(grammar, opm, input, node_start, mode, &mut factory) {
            Ok(node) => node,
            Err(RegionError::Syntax(e)) if depth == 0 => return Err(e.into()),
            Err(_) => continue,
        };
        if let Mode::Region { left, right } = mode {
            let (Some(was), Some(now)) = (candidate.lhs(), new_node.lhs()) else { continue };
            if !matching_condition(was, now, (left, right)) {
                continue;
            }
        }

        let next_id = factory.next_id();
        let fresh: HashSet<NodeId> = factory.fresh.into_iter().collect();
        let removed = removed_ids(candidate, &new_node, &fresh);

        let mut spine = Vec::with_capacity(depth);
        let mut child = Arc::clone(&new_node);
        for j in (0..depth).rev() {
            let index = path[j + 1].2;
            let mut children = path[j].0.children().to_vec();
            children[index] = child;
            child = Arc::new(path[j].0.with_children(children));
            spine.push(Arc::clone(&child));
        }
        spine.reverse();
        let tree = SyntaxTree::from_parts(child, next_id);

        let nodes_rebuilt = fresh.len() + spine.len();
        let stats = ReuseStats {
            tokens_reparsed: region_len,
            nodes_rebuilt,
            nodes_reused: tree.node_count() - nodes_rebuilt,
            subcontext: node_start..node_start + region_len,
        };
        let splice = Splice { node: new_node, offset: node_start, replaced: candidate.id(), spine, fresh, removed };
        return Ok((tree, stats, Some(splice)));
    }
    unreachable!("the root is always a candidate")
}

/// Ids under `old` that do not survive into `new`.
fn removed_ids(old: &Arc<Node>, new: &Arc<Node>, fresh: &HashSet<NodeId>) -> Vec<NodeId> {
    let mut kept = HashSet::new();
    let mut stack = vec![new];
    while let Some(n) = stack.pop() {
        if fresh.contains(&n.id()) {
            stack.extend(n.children());
        } else {
            kept.insert(n.id());
        }
    }
    let mut removed = Vec::new();
    let mut stack = vec![old];
    while let Some(n) = stack.pop() {
        if !kept.contains(&n.id()) {
            removed.push(n.id());
            stack.extend(n.children());
        }
    }
    removed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{arithmetic_grammar, tokenize_arithmetic};
    use crate::grammar::compute_opm;
    use crate::parser::parse;

    struct Fixture {
        g: Grammar,
        m: PrecedenceMatrix,
    }

    impl Fixture {
        fn new() -> Self {
            let g = arithmetic_grammar();
            let m = compute_opm(&g).unwrap();
            Fixture { g, m }
        }

        fn toks(&self, s: &str) -> Vec<Token> {
            tokenize_arithmetic(&self.g, s).unwrap()
        }

        fn tree(&self, s: &str) -> SyntaxTree {
            parse(&self.g, &self.m, &self.toks(s)).unwrap()
        }
    }

    #[test]
    fn right_summand_is_replaced_in_place() {
        let f = Fixture::new();
        let old = f.tree("5*4+2+6*7*8");
        let (new, stats, splice) = apply_edit(&old, &Edit::new(6..11, f.toks("7*8")), &f.g, &f.m).unwrap();
        assert!(new.structurally_equal(&f.tree("5*4+2+7*8")));
        let splice = splice.unwrap();
        assert_eq!(splice.node().lhs(), f.g.nonterminal("B"));
        assert_eq!(stats.subcontext, 6..9);
        assert_eq!(stats.tokens_reparsed, 3);
        // S and the top A are copied; the left summand is shared.
        assert_eq!(splice.spine().len(), 2);
        let left = &old.root().children()[0].children()[0];
        assert!(Arc::ptr_eq(left, &new.root().children()[0].children()[0]));
        assert_eq!(stats.nodes_rebuilt + stats.nodes_reused, new.node_count());
    }

    #[test]
    fn changing_an_operator_widens() {
        let f = Fixture::new();
        let old = f.tree("5*4+2+6*7*8");
        let star = f.toks("*");
        let (new, stats, _) = apply_edit(&old, &Edit::new(5..6, star), &f.g, &f.m).unwrap();
        assert!(new.structurally_equal(&f.tree("5*4+2*6*7*8")));
        assert!(stats.tokens_reparsed > 3);
    }

    #[test]
    fn edits_match_scratch_parses() {
        let f = Fixture::new();
        let cases = [
            ("1+2", 0..1, "3*4"),
            ("1+2", 1..2, "*"),
            ("1+2*3", 2..2, "4+"),
            ("1+2*3", 1..3, ""),
            ("1*2*3*4+5", 5..6, "+"),
            ("7", 0..1, "8+9"),
        ];
        for (src, range, rep) in cases {
            let old = f.tree(src);
            let edit = Edit::new(range, f.toks(rep));
            let expected = edit.apply(&old.tokens());
            let (new, _, _) = apply_edit(&old, &edit, &f.g, &f.m).unwrap();
            let scratch = parse(&f.g, &f.m, &expected).unwrap();
            assert!(new.structurally_equal(&scratch), "{src} {rep}");
        }
    }

    #[test]
    fn shared_nodes_keep_ids() {
        let f = Fixture::new();
        let old = f.tree("1*2+3*4+5*6");
        let (new, _, splice) = apply_edit(&old, &Edit::new(8..9, f.toks("7")), &f.g, &f.m).unwrap();
        let splice = splice.unwrap();
        let old_ids: HashSet<_> = old.preorder().map(|(_, n)| n.id()).collect();
        for (_, n) in new.preorder() {
            assert!(old_ids.contains(&n.id()) || splice.is_fresh(n.id()));
        }
        for id in splice.removed() {
            assert!(new.find(*id).is_none());
        }
        let new_ids: HashSet<_> = new.preorder().map(|(_, n)| n.id()).collect();
        assert_eq!(new_ids.len(), new.node_count());
    }

    #[test]
    fn syntax_errors_surface_after_widening() {
        let f = Fixture::new();
        let old = f.tree("1+2");
        let err = apply_edit(&old, &Edit::new(1..2, f.toks("3")), &f.g, &f.m).unwrap_err();
        assert!(matches!(err, EditError::Syntax(ParseError { position: 1, .. })));
        let err = apply_edit(&old, &Edit::new(2..4, vec![]), &f.g, &f.m).unwrap_err();
        assert!(matches!(err, EditError::OutOfBounds { .. }));
    }

    #[test]
    fn empty_edit_changes_nothing() {
        let f = Fixture::new();
        let old = f.tree("1+2");
        let (new, stats, splice) = apply_edit(&old, &Edit::new(1..1, vec![]), &f.g, &f.m).unwrap();
        assert!(splice.is_none());
        assert!(Arc::ptr_eq(old.root(), new.root()));
        assert_eq!(stats.nodes_reused, old.node_count());
    }

    #[test]
    fn matching_is_nonterminal_equality() {
        let f = Fixture::new();
        let b = f.g.nonterminal("B").unwrap();
        let a = f.g.nonterminal("A").unwrap();
        let ctx = (f.g.terminal("+").unwrap(), TermId::SENTINEL);
        assert!(matching_condition(b, b, ctx));
        assert!(!matching_condition(b, a, ctx));
    }

    #[test]
    fn diffs() {
        let f = Fixture::new();
        let a = f.toks("1+2*3");
        let b = f.toks("1+4+5*3");
        let edit = diff_to_edit(&a, &b);
        assert_eq!(edit.range, 2..3);
        assert_eq!(edit.replacement, f.toks("4+5"));
        assert_eq!(edit.apply(&a), b);
        let same = diff_to_edit(&a, &a);
        assert_eq!(same.range, 0..0);
        assert!(same.replacement.is_empty());
        let shrink = diff_to_edit(&f.toks("1+1+1"), &f.toks("1+1"));
        assert_eq!(shrink.apply(&f.toks("1+1+1")), f.toks("1+1"));
    }
}
