//! Synthesized attribute evaluation.
//!
//! A schema computes one value per internal node from the values of its
//! children (and the tokens of its leaf children). Values are kept in an
//! [`AttributeMap`] keyed by node id, which lets an edited tree reuse the map
//! of its predecessor: nodes shared between versions keep their ids and so
//! keep their values.

use std::collections::HashMap;
use std::fmt::Debug;
use std::sync::Arc;

use thiserror::Error;

use crate::grammar::{Grammar, Rule};
use crate::incremental::Splice;
use crate::parser::{Node, NodeId, SyntaxTree, Token};

/// What a synthesis function sees of one child.
#[derive(Debug, Clone, Copy)]
pub enum Child<'a, V> {
    Token(&'a Token),
    Node(&'a V),
}

impl<'a, V> Child<'a, V> {
    pub fn token(&self) -> Option<&'a Token> {
        match *self {
            Child::Token(t) => Some(t),
            Child::Node(_) => None,
        }
    }

    pub fn value(&self) -> Option<&'a V> {
        match *self {
            Child::Node(v) => Some(v),
            Child::Token(_) => None,
        }
    }
}

pub trait AttributeSchema {
    /// All attributes of one node. Equality drives the re-evaluation cutoff.
    type Value: Clone + PartialEq + Debug;
    type Error: std::error::Error + 'static;

    fn name(&self) -> &str;

    fn synthesize(&self, rule: &Rule, children: &[Child<'_, Self::Value>]) -> Result<Self::Value, Self::Error>;

    /// Names of the attributes carried by a value, used for accounting.
    fn attribute_names(&self, value: &Self::Value) -> &'static [&'static str];
}

#[derive(Debug, Error)]
#[error("attribute evaluation failed at node {node} ({rule}): {source}")]
pub struct EvalError<E: std::error::Error + 'static> {
    pub node: NodeId,
    pub rule: String,
    #[source]
    pub source: E,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeMap<V> {
    values: HashMap<NodeId, V>,
    attributes: usize,
}

impl<V> Default for AttributeMap<V> {
    fn default() -> Self {
        AttributeMap { values: HashMap::new(), attributes: 0 }
    }
}

impl<V> AttributeMap<V> {
    pub fn get(&self, id: NodeId) -> Option<&V> {
        self.values.get(&id)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.values.contains_key(&id)
    }

    /// Number of nodes with values.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total number of individual attributes stored.
    pub fn attribute_count(&self) -> usize {
        self.attributes
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &V)> + '_ {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    fn insert(&mut self, id: NodeId, value: V, count: usize) -> Option<V> {
        self.attributes += count;
        self.values.insert(id, value)
    }

    fn remove(&mut self, id: NodeId, count: impl Fn(&V) -> usize) -> Option<V> {
        let old = self.values.remove(&id)?;
        self.attributes -= count(&old);
        Some(old)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecomputeStats {
    /// Nodes whose values were computed, in evaluation order.
    pub recomputed: Vec<NodeId>,
    pub attributes_recomputed: usize,
    pub attributes_reused: usize,
}

fn synthesize_node<S: AttributeSchema>(
    grammar: &Grammar,
    schema: &S,
    node: &Node,
    map: &AttributeMap<S::Value>,
) -> Result<S::Value, EvalError<S::Error>> {
    let rule = grammar.rule(node.rule().expect("inner node"));
    let children: Vec<Child<'_, S::Value>> = node
        .children()
        .iter()
        .map(|c| match c.token() {
            Some(t) => Child::Token(t),
            None => Child::Node(map.get(c.id()).expect("children are evaluated first")),
        })
        .collect();
    schema
        .synthesize(rule, &children)
        .map_err(|source| EvalError { node: node.id(), rule: rule.name().to_string(), source })
}

/// Post-order evaluation of the inner nodes under `root` for which
/// `visit` holds; subtrees rejected by `visit` must already have values.
fn evaluate_where<S: AttributeSchema>(
    grammar: &Grammar,
    schema: &S,
    root: &Arc<Node>,
    map: &mut AttributeMap<S::Value>,
    visit: impl Fn(&Node) -> bool,
    mut on_value: impl FnMut(NodeId, usize),
) -> Result<(), EvalError<S::Error>> {
    let mut stack: Vec<(&Arc<Node>, bool)> = vec![(root, false)];
    while let Some((node, expanded)) = stack.pop() {
        if node.is_leaf() || !visit(node) {
            continue;
        }
        if expanded {
            let value = synthesize_node(grammar, schema, node, map)?;
            let count = schema.attribute_names(&value).len();
            on_value(node.id(), count);
            map.insert(node.id(), value, count);
        } else {
            stack.push((node, true));
            stack.extend(node.children().iter().rev().map(|c| (c, false)));
        }
    }
    Ok(())
}

pub fn evaluate<S: AttributeSchema>(
    tree: &SyntaxTree,
    grammar: &Grammar,
    schema: &S,
) -> Result<AttributeMap<S::Value>, EvalError<S::Error>> {
    let mut map = AttributeMap::default();
    evaluate_where(grammar, schema, tree.root(), &mut map, |_| true, |_, _| {})?;
    Ok(map)
}

/// Updates `old` after an incremental edit: values inside the spliced
/// subtree are computed for new nodes only, then ancestors are recomputed
/// bottom-up until one of them comes out unchanged.
pub fn reevaluate<S: AttributeSchema>(
    tree: &SyntaxTree,
    grammar: &Grammar,
    schema: &S,
    splice: Option<&Splice>,
    old: AttributeMap<S::Value>,
) -> Result<(AttributeMap<S::Value>, RecomputeStats), EvalError<S::Error>> {
    let mut map = old;
    let mut stats = RecomputeStats::default();
    let Some(splice) = splice else {
        stats.attributes_reused = map.attribute_count();
        return Ok((map, stats));
    };

    debug_assert_eq!(splice.spine().first().unwrap_or(splice.node()).id(), tree.root().id());
    let replaced = map.get(splice.replaced()).cloned();
    let count = |v: &S::Value| schema.attribute_names(v).len();
    for &id in splice.removed() {
        map.remove(id, count);
    }

    let spliced = splice.node();
    evaluate_where(
        grammar,
        schema,
        spliced,
        &mut map,
        |n| splice.is_fresh(n.id()),
        |id, n| {
            stats.recomputed.push(id);
            stats.attributes_recomputed += n;
        },
    )?;

    let unchanged = |map: &AttributeMap<S::Value>| match (&replaced, map.get(spliced.id())) {
        (Some(old), Some(new)) => old == new,
        // A leaf replaced by a leaf carries no attributes.
        (None, None) => true,
        _ => false,
    };
    if !unchanged(&map) {
        for ancestor in splice.spine().iter().rev() {
            let value = synthesize_node(grammar, schema, ancestor, &map)?;
            let n = count(&value);
            stats.recomputed.push(ancestor.id());
            stats.attributes_recomputed += n;
            let previous = map.remove(ancestor.id(), count);
            let same = previous.as_ref() == Some(&value);
            map.insert(ancestor.id(), value, n);
            if same {
                break;
            }
        }
    }
    stats.attributes_reused = map.attribute_count() - stats.attributes_recomputed;
    Ok((map, stats))
}
