//! Context-free grammars in operator form and their precedence matrices.
//!
//! A [`Grammar`] is built from named rules; every symbol that appears as a
//! left-hand side is a nonterminal and every other symbol is a terminal. The
//! sentinel terminal `#` is reserved and injected automatically at index 0.
//!
//! [`compute_opm`] derives the operator precedence matrix with the classical
//! construction over leftmost/rightmost terminal sets, reporting every cell
//! that receives more than one relation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

/// The reserved end-of-input terminal.
pub const SENTINEL: &str = "#";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub(crate) u32);

impl TermId {
    pub const SENTINEL: TermId = TermId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NontermId(pub(crate) u32);

impl NontermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId(pub(crate) u32);

impl RuleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    T(TermId),
    N(NontermId),
}

impl Symbol {
    pub fn is_nonterminal(self) -> bool {
        matches!(self, Symbol::N(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    id: RuleId,
    name: String,
    lhs: NontermId,
    rhs: Vec<Symbol>,
}

impl Rule {
    pub fn id(&self) -> RuleId {
        self.id
    }

    /// Stable identifier used by attribute schemas to select synthesis functions.
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lhs(&self) -> NontermId {
        self.lhs
    }

    pub fn rhs(&self) -> &[Symbol] {
        &self.rhs
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("the sentinel terminal `#` is reserved")]
    ReservedSentinel,
    #[error("axiom `{0}` has no rules")]
    UnknownAxiom(String),
    #[error("duplicate rule name `{0}`")]
    DuplicateRuleName(String),
    #[error("grammar has no rules")]
    Empty,
}

/// Builder collecting `(name, lhs, rhs)` triples.
#[derive(Debug, Clone)]
pub struct GrammarBuilder {
    axiom: String,
    rules: Vec<(String, String, Vec<String>)>,
}

impl GrammarBuilder {
    pub fn rule<I, S>(mut self, name: &str, lhs: &str, rhs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let rhs = rhs.into_iter().map(|s| s.as_ref().to_string()).collect();
        self.rules.push((name.to_string(), lhs.to_string(), rhs));
        self
    }

    pub fn build(self) -> Result<Grammar, GrammarError> {
        if self.rules.is_empty() {
            return Err(GrammarError::Empty);
        }
        let mut nonterminals: Vec<String> = Vec::new();
        let mut nt_index: HashMap<String, NontermId> = HashMap::new();
        for (_, lhs, _) in &self.rules {
            if lhs == SENTINEL {
                return Err(GrammarError::ReservedSentinel);
            }
            if !nt_index.contains_key(lhs) {
                nt_index.insert(lhs.clone(), NontermId(nonterminals.len() as u32));
                nonterminals.push(lhs.clone());
            }
        }
        let axiom = *nt_index
            .get(&self.axiom)
            .ok_or_else(|| GrammarError::UnknownAxiom(self.axiom.clone()))?;

        let mut terminals = vec![SENTINEL.to_string()];
        let mut term_index: HashMap<String, TermId> = HashMap::new();
        term_index.insert(SENTINEL.to_string(), TermId::SENTINEL);

        let mut rules = Vec::with_capacity(self.rules.len());
        let mut names = BTreeSet::new();
        for (i, (name, lhs, rhs)) in self.rules.into_iter().enumerate() {
            if !names.insert(name.clone()) {
                return Err(GrammarError::DuplicateRuleName(name));
            }
            let mut symbols = Vec::with_capacity(rhs.len());
            for sym in rhs {
                if sym == SENTINEL {
                    return Err(GrammarError::ReservedSentinel);
                }
                if let Some(&n) = nt_index.get(&sym) {
                    symbols.push(Symbol::N(n));
                } else {
                    let next = TermId(terminals.len() as u32);
                    let t = *term_index.entry(sym.clone()).or_insert_with(|| {
                        terminals.push(sym.clone());
                        next
                    });
                    symbols.push(Symbol::T(t));
                }
            }
            rules.push(Rule { id: RuleId(i as u32), name, lhs: nt_index[&lhs], rhs: symbols });
        }

        let mut by_rhs: HashMap<Vec<Symbol>, Vec<RuleId>> = HashMap::new();
        for rule in &rules {
            by_rhs.entry(rule.rhs.clone()).or_default().push(rule.id);
        }
        let by_name = rules.iter().map(|r| (r.name.clone(), r.id)).collect();

        Ok(Grammar { terminals, nonterminals, rules, axiom, term_index, nt_index, by_rhs, by_name })
    }
}

/// A context-free grammar `⟨V_N, V_T, P, S⟩`.
#[derive(Debug, Clone)]
pub struct Grammar {
    terminals: Vec<String>,
    nonterminals: Vec<String>,
    rules: Vec<Rule>,
    axiom: NontermId,
    term_index: HashMap<String, TermId>,
    nt_index: HashMap<String, NontermId>,
    by_rhs: HashMap<Vec<Symbol>, Vec<RuleId>>,
    by_name: HashMap<String, RuleId>,
}

impl Grammar {
    pub fn builder(axiom: &str) -> GrammarBuilder {
        GrammarBuilder { axiom: axiom.to_string(), rules: Vec::new() }
    }

    pub fn axiom(&self) -> NontermId {
        self.axiom
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id.index()]
    }

    pub fn rule_by_name(&self, name: &str) -> Option<&Rule> {
        self.by_name.get(name).map(|&id| self.rule(id))
    }

    /// All terminals including the sentinel at index 0.
    pub fn terminal_count(&self) -> usize {
        self.terminals.len()
    }

    pub fn terminals(&self) -> impl Iterator<Item = TermId> + '_ {
        (0..self.terminals.len() as u32).map(TermId)
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = NontermId> + '_ {
        (0..self.nonterminals.len() as u32).map(NontermId)
    }

    pub fn terminal(&self, name: &str) -> Option<TermId> {
        self.term_index.get(name).copied()
    }

    pub fn nonterminal(&self, name: &str) -> Option<NontermId> {
        self.nt_index.get(name).copied()
    }

    pub fn terminal_name(&self, t: TermId) -> &str {
        &self.terminals[t.index()]
    }

    pub fn nonterminal_name(&self, n: NontermId) -> &str {
        &self.nonterminals[n.index()]
    }

    pub fn symbol_name(&self, s: Symbol) -> &str {
        match s {
            Symbol::T(t) => self.terminal_name(t),
            Symbol::N(n) => self.nonterminal_name(n),
        }
    }

    /// Rules whose right-hand side is exactly `rhs`.
    pub fn rules_with_rhs(&self, rhs: &[Symbol]) -> &[RuleId] {
        self.by_rhs.get(rhs).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Renders a rule as `lhs ::= a b c` (`ε` for an empty right-hand side).
    pub fn display_rule(&self, id: RuleId) -> String {
        let rule = self.rule(id);
        let rhs = if rule.rhs.is_empty() {
            "ε".to_string()
        } else {
            rule.rhs.iter().map(|&s| self.symbol_name(s)).collect::<Vec<_>>().join(" ")
        };
        format!("{} ::= {}", self.nonterminal_name(rule.lhs), rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorFormViolation {
    pub rule: RuleId,
    /// Index of the first of the two adjacent nonterminals.
    pub position: usize,
}

pub fn validate_operator_form(grammar: &Grammar) -> Result<(), Vec<OperatorFormViolation>> {
    let violations: Vec<_> = grammar
        .rules()
        .iter()
        .flat_map(|rule| {
            rule.rhs.windows(2).enumerate().filter_map(move |(i, w)| {
                (w[0].is_nonterminal() && w[1].is_nonterminal())
                    .then_some(OperatorFormViolation { rule: rule.id, position: i })
            })
        })
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FnfViolation {
    /// Several rules share one right-hand side.
    NotInvertible { rules: Vec<RuleId> },
    AxiomInRhs { rule: RuleId, position: usize },
    EmptyRule { rule: RuleId },
    /// Single-nonterminal right-hand side for a non-axiom left-hand side.
    Renaming { rule: RuleId },
}

/// Checks the Fischer normal form clauses.
pub fn validate_fnf(grammar: &Grammar) -> Result<(), Vec<FnfViolation>> {
    let mut violations = Vec::new();
    let mut shared: Vec<Vec<RuleId>> =
        grammar.by_rhs.values().filter(|ids| ids.len() > 1).cloned().collect();
    shared.sort();
    violations.extend(shared.into_iter().map(|rules| FnfViolation::NotInvertible { rules }));

    for rule in grammar.rules() {
        for (position, sym) in rule.rhs.iter().enumerate() {
            if *sym == Symbol::N(grammar.axiom) {
                violations.push(FnfViolation::AxiomInRhs { rule: rule.id, position });
            }
        }
        let is_axiom = rule.lhs == grammar.axiom;
        if rule.rhs.is_empty() && !is_axiom {
            violations.push(FnfViolation::EmptyRule { rule: rule.id });
        }
        if !is_axiom && matches!(rule.rhs.as_slice(), [Symbol::N(_)]) {
            violations.push(FnfViolation::Renaming { rule: rule.id });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Leftmost and rightmost terminal sets of every nonterminal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalBorders {
    left: Vec<BTreeSet<TermId>>,
    right: Vec<BTreeSet<TermId>>,
}

impl TerminalBorders {
    pub fn left(&self, n: NontermId) -> &BTreeSet<TermId> {
        &self.left[n.index()]
    }

    pub fn right(&self, n: NontermId) -> &BTreeSet<TermId> {
        &self.right[n.index()]
    }

    /// One propagation round; returns whether anything was added.
    fn step(&mut self, grammar: &Grammar) -> bool {
        let mut changed = false;
        for rule in grammar.rules() {
            let lhs = rule.lhs.index();
            let mut add_left = Vec::new();
            match rule.rhs.as_slice() {
                [Symbol::T(a), ..] => add_left.push(*a),
                [Symbol::N(m), rest @ ..] => {
                    add_left.extend(self.left[m.index()].iter().copied());
                    if let Some(Symbol::T(b)) = rest.first() {
                        add_left.push(*b);
                    }
                }
                [] => {}
            }
            let mut add_right = Vec::new();
            match rule.rhs.as_slice() {
                [.., Symbol::T(a)] => add_right.push(*a),
                [rest @ .., Symbol::N(m)] => {
                    add_right.extend(self.right[m.index()].iter().copied());
                    if let Some(Symbol::T(b)) = rest.last() {
                        add_right.push(*b);
                    }
                }
                [] => {}
            }
            for t in add_left {
                changed |= self.left[lhs].insert(t);
            }
            for t in add_right {
                changed |= self.right[lhs].insert(t);
            }
        }
        changed
    }

    /// Whether one more propagation round would change nothing.
    pub fn is_fixpoint(&self, grammar: &Grammar) -> bool {
        let mut copy = self.clone();
        !copy.step(grammar)
    }
}

/// Least fixpoint of the leftmost/rightmost terminal sets.
pub fn terminal_border_sets(grammar: &Grammar) -> TerminalBorders {
    let n = grammar.nonterminals.len();
    let mut borders = TerminalBorders { left: vec![BTreeSet::new(); n], right: vec![BTreeSet::new(); n] };
    while borders.step(grammar) {}
    borders
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `a ⋖ b`
    Yields,
    /// `a ≐ b`
    Equal,
    /// `a ⋗ b`
    Takes,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Yields => "⋖",
            Relation::Equal => "≐",
            Relation::Takes => "⋗",
        })
    }
}

/// A conflict-free operator precedence matrix over `V_T ∪ {#}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceMatrix {
    size: usize,
    cells: Vec<Option<Relation>>,
}

impl PrecedenceMatrix {
    pub fn get(&self, a: TermId, b: TermId) -> Option<Relation> {
        self.cells.get(a.index() * self.size + b.index()).copied().flatten()
    }

    /// Non-empty cells in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (TermId, TermId, Relation)> + '_ {
        self.cells.iter().enumerate().filter_map(move |(i, cell)| {
            cell.map(|r| (TermId((i / self.size) as u32), TermId((i % self.size) as u32), r))
        })
    }

    pub fn render(&self, grammar: &Grammar) -> String {
        let names: Vec<&str> = grammar.terminals().map(|t| grammar.terminal_name(t)).collect();
        let width = names.iter().map(|n| n.chars().count()).max().unwrap_or(1).max(1);
        let mut out = format!("{:width$} |", "");
        for n in &names {
            out.push_str(&format!(" {n:>width$}"));
        }
        out.push('\n');
        for (i, row) in names.iter().enumerate() {
            out.push_str(&format!("{row:width$} |"));
            for j in 0..names.len() {
                let cell = self.cells[i * self.size + j].map(|r| r.to_string()).unwrap_or_default();
                out.push_str(&format!(" {cell:>width$}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Free-function form of [`PrecedenceMatrix::get`].
pub fn precedence_between(opm: &PrecedenceMatrix, a: TermId, b: TermId) -> Option<Relation> {
    opm.get(a, b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpmConflict {
    pub left: TermId,
    pub right: TermId,
    pub relations: BTreeSet<Relation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("grammar is not operator precedence: {} conflicting cell(s)", conflicts.len())]
pub struct OpmConflicts {
    pub conflicts: Vec<OpmConflict>,
}

impl OpmConflicts {
    pub fn describe(&self, grammar: &Grammar) -> String {
        self.conflicts
            .iter()
            .map(|c| {
                let rels: Vec<String> = c.relations.iter().map(|r| r.to_string()).collect();
                format!(
                    "({}, {}): {}",
                    grammar.terminal_name(c.left),
                    grammar.terminal_name(c.right),
                    rels.join(" ")
                )
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

pub fn compute_opm(grammar: &Grammar) -> Result<PrecedenceMatrix, OpmConflicts> {
    let borders = terminal_border_sets(grammar);
    let size = grammar.terminal_count();
    let mut cells: BTreeMap<(TermId, TermId), BTreeSet<Relation>> = BTreeMap::new();
    let mut put = |a: TermId, b: TermId, r: Relation| {
        cells.entry((a, b)).or_default().insert(r);
    };

    for rule in grammar.rules() {
        let rhs = rule.rhs.as_slice();
        for i in 0..rhs.len() {
            match rhs[i] {
                Symbol::T(a) => {
                    match rhs.get(i + 1) {
                        Some(Symbol::T(b)) => put(a, *b, Relation::Equal),
                        Some(Symbol::N(m)) => {
                            for &b in borders.left(*m) {
                                put(a, b, Relation::Yields);
                            }
                            if let Some(Symbol::T(b)) = rhs.get(i + 2) {
                                put(a, *b, Relation::Equal);
                            }
                        }
                        None => {}
                    }
                }
                Symbol::N(m) => {
                    if let Some(Symbol::T(b)) = rhs.get(i + 1) {
                        for &a in borders.right(m) {
                            put(a, *b, Relation::Takes);
                        }
                    }
                }
            }
        }
    }
    for t in grammar.terminals().skip(1) {
        put(TermId::SENTINEL, t, Relation::Yields);
        put(t, TermId::SENTINEL, Relation::Takes);
    }

    let mut matrix = PrecedenceMatrix { size, cells: vec![None; size * size] };
    let mut conflicts = Vec::new();
    for ((a, b), rels) in cells {
        if rels.len() > 1 {
            conflicts.push(OpmConflict { left: a, right: b, relations: rels });
        } else if let Some(&r) = rels.iter().next() {
            matrix.cells[a.index() * size + b.index()] = Some(r);
        }
    }
    if conflicts.is_empty() {
        Ok(matrix)
    } else {
        Err(OpmConflicts { conflicts })
    }
}
