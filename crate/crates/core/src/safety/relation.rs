//! Symbolic transition relations over extended states.
//!
//! A template relates an automaton location before and after a program
//! fragment, together with the fragment's effect on the configuration: the
//! assignments it performs and the branch conditions it assumes. Templates
//! whose assumptions contradict each other are dropped as soon as they appear.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::automaton::{ImageAutomaton, Location};
use crate::mini::CondExpr;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    Assign(String, bool),
    /// The condition was evaluated with the given outcome.
    Check(CondExpr, bool),
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Assign(v, b) => write!(f, "Assign({v},{b})"),
            Step::Check(e, b) => write!(f, "Check({e},{b})"),
        }
    }
}

/// Ordered configuration updates of one template.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfTransformer {
    steps: Vec<Step>,
}

impl ConfTransformer {
    pub fn new(steps: Vec<Step>) -> Self {
        ConfTransformer { steps }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Whether some initial configuration makes every check come out as
    /// recorded. Checks are evaluated against the assignments made before
    /// them; variables not yet assigned take their initial value, and each
    /// `*` occurrence may resolve either way.
    pub fn is_live(&self) -> bool {
        let mut vm: BTreeMap<&str, bool> = BTreeMap::new();
        let mut pending: Vec<(&CondExpr, bool, BTreeMap<&str, bool>)> = Vec::new();
        for step in &self.steps {
            match step {
                Step::Assign(v, b) => {
                    vm.insert(v, *b);
                }
                Step::Check(e, expected) => match e.evaluate(&|v| vm.get(v).copied()) {
                    Some(actual) if actual != *expected => return false,
                    Some(_) => {}
                    None => pending.push((e, *expected, vm.clone())),
                },
            }
        }
        if pending.is_empty() {
            return true;
        }
        let inputs: Vec<&str> = pending
            .iter()
            .flat_map(|(e, _, snapshot)| e.variables().into_iter().filter(move |v| !snapshot.contains_key(v)))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        assert!(inputs.len() < usize::BITS as usize, "too many free variables");
        (0..1usize << inputs.len()).any(|bits| {
            let initial = |v: &str| inputs.iter().position(|i| *i == v).map(|k| bits >> k & 1 == 1);
            pending.iter().all(|(e, expected, snapshot)| {
                let value = e.evaluate(&|v| snapshot.get(v).copied().or_else(|| initial(v)));
                value.is_none_or(|b| b == *expected)
            })
        })
    }
}

/// Above this many variables a transformer is keyed by its steps alone.
const MAX_TABULATED: usize = 5;

/// The observable effect of a transformer: the final value of every variable
/// it assigns, and, for each partial starting configuration over its
/// variables, which initial values of the unset ones let every check pass.
/// Transformers with equal behaviour are interchangeable in every
/// composition, so a set keeps only one of them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Behaviour {
    Table { vars: Vec<String>, assigned: Vec<Option<bool>>, accepted: Vec<u64> },
    Steps(Vec<Step>),
}

impl ConfTransformer {
    /// Replays the steps from `start`; unset variables read `initial`.
    fn accepts(&self, start: &BTreeMap<&str, bool>, initial: &dyn Fn(&str) -> Option<bool>) -> bool {
        let mut vm = start.clone();
        self.steps.iter().all(|step| match step {
            Step::Assign(v, b) => {
                vm.insert(v, *b);
                true
            }
            Step::Check(e, expected) => {
                e.evaluate(&|v| vm.get(v).copied().or_else(|| initial(v))).is_none_or(|b| b == *expected)
            }
        })
    }

    fn behaviour(&self) -> Behaviour {
        let mut vars = BTreeSet::new();
        for step in &self.steps {
            match step {
                Step::Assign(v, _) => {
                    vars.insert(v.as_str());
                }
                Step::Check(e, _) => vars.extend(e.variables()),
            }
        }
        if vars.len() > MAX_TABULATED {
            return Behaviour::Steps(self.steps.clone());
        }
        let vars: Vec<&str> = vars.into_iter().collect();
        let mut assigned = vec![None; vars.len()];
        for step in &self.steps {
            if let Step::Assign(v, b) = step {
                assigned[vars.iter().position(|w| w == v).expect("collected")] = Some(*b);
            }
        }
        // Starting configurations in base 3: unset, false, true.
        let starts = 3usize.pow(vars.len() as u32);
        let accepted = (0..starts)
            .map(|code| {
                let mut start = BTreeMap::new();
                let mut unset = Vec::new();
                let mut rest = code;
                for v in &vars {
                    match rest % 3 {
                        0 => unset.push(*v),
                        digit => {
                            start.insert(*v, digit == 2);
                        }
                    }
                    rest /= 3;
                }
                (0..1u64 << unset.len()).fold(0u64, |mask, bits| {
                    let initial = |v: &str| unset.iter().position(|u| *u == v).map(|k| bits >> k & 1 == 1);
                    if self.accepts(&start, &initial) {
                        mask | 1 << bits
                    } else {
                        mask
                    }
                })
            })
            .collect();
        Behaviour::Table { vars: vars.into_iter().map(str::to_string).collect(), assigned, accepted }
    }
}

/// Extends a configuration transformer with one step; `None` stands for an
/// inconsistent configuration.
pub fn upd(c: Option<&ConfTransformer>, step: Step) -> Option<ConfTransformer> {
    let mut steps = c?.steps.clone();
    steps.push(step);
    let next = ConfTransformer { steps };
    next.is_live().then_some(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoints {
    /// Any location, unchanged.
    Stay,
    Move { from: usize, to: Location },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Template {
    pub endpoints: Endpoints,
    pub transformer: ConfTransformer,
}

impl Template {
    pub fn new(endpoints: Endpoints, steps: Vec<Step>) -> Self {
        Template { endpoints, transformer: ConfTransformer::new(steps) }
    }

    pub fn steps(&self) -> &[Step] {
        self.transformer.steps()
    }

    fn reaches_error(&self) -> bool {
        matches!(self.endpoints, Endpoints::Move { to: Location::Err, .. })
    }

    pub fn display<'a>(&'a self, img: &'a ImageAutomaton) -> impl fmt::Display + 'a {
        TemplateDisplay { t: self, img }
    }
}

struct TemplateDisplay<'a> {
    t: &'a Template,
    img: &'a ImageAutomaton,
}

impl fmt::Display for TemplateDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let steps: Vec<String> = self.t.steps().iter().map(Step::to_string).collect();
        match self.t.endpoints {
            Endpoints::Stay => write!(f, "<ANY, ANY, [{}]>", steps.join(", ")),
            Endpoints::Move { from, to } => write!(
                f,
                "<{}, {}, [{}]>",
                self.img.location_name(Location::State(from)),
                self.img.location_name(to),
                steps.join(", ")
            ),
        }
    }
}

/// `γ`: a finite set of transition templates, at most one per endpoint pair
/// and behaviour. Among equivalent templates the one with the fewest steps
/// (then the smallest) is kept.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionSet {
    templates: BTreeMap<(Endpoints, Behaviour), Template>,
}

fn preferred(a: &Template, b: &Template) -> bool {
    (a.steps().len(), a.steps()) < (b.steps().len(), b.steps())
}

impl TransitionSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `{⟨ANY, ANY, []⟩}`, the neutral element of [`compose`].
    pub fn identity() -> Self {
        [Template::new(Endpoints::Stay, Vec::new())].into_iter().collect()
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Template> + '_ {
        self.templates.values()
    }

    /// Whether the set holds `t` or a template equivalent to it.
    pub fn contains(&self, t: &Template) -> bool {
        self.templates.contains_key(&(t.endpoints, t.transformer.behaviour()))
    }

    /// Adds `t`; returns whether the set changed.
    pub fn insert(&mut self, t: Template) -> bool {
        let key = (t.endpoints, t.transformer.behaviour());
        match self.templates.get_mut(&key) {
            Some(kept) if !preferred(&t, kept) => false,
            Some(kept) => {
                *kept = t;
                true
            }
            None => {
                self.templates.insert(key, t);
                true
            }
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in other.iter() {
            out.insert(t.clone());
        }
        out
    }

    /// Drops templates whose configuration is inconsistent.
    pub fn prune(&self) -> Self {
        TransitionSet {
            templates: self.templates.iter().filter(|(_, t)| t.transformer.is_live()).map(|(k, t)| (k.clone(), t.clone())).collect(),
        }
    }

    /// Templates applicable from `state`, with `Stay` instantiated there.
    pub fn ground(&self, state: usize) -> Vec<Template> {
        self.iter()
            .filter_map(|t| match t.endpoints {
                Endpoints::Stay => Some(Template {
                    endpoints: Endpoints::Move { from: state, to: Location::State(state) },
                    transformer: t.transformer.clone(),
                }),
                Endpoints::Move { from, .. } if from == state => Some(t.clone()),
                Endpoints::Move { .. } => None,
            })
            .collect()
    }
}

impl FromIterator<Template> for TransitionSet {
    fn from_iter<I: IntoIterator<Item = Template>>(iter: I) -> Self {
        let mut set = TransitionSet::empty();
        for t in iter {
            set.insert(t);
        }
        set
    }
}

fn join(a: Endpoints, b: Endpoints) -> Option<Endpoints> {
    match (a, b) {
        (Endpoints::Stay, e) | (e, Endpoints::Stay) => Some(e),
        (Endpoints::Move { from, to: Location::State(mid) }, Endpoints::Move { from: next, to }) if mid == next => {
            Some(Endpoints::Move { from, to })
        }
        _ => None,
    }
}

/// Relational composition without removing inconsistent results. Returns the
/// set and the number of templates materialized.
///
/// Templates of `g1` that already reach the error location are kept as they
/// are: the violation has happened regardless of what follows.
pub fn compose_unpruned(g1: &TransitionSet, g2: &TransitionSet) -> (TransitionSet, usize) {
    let mut out = TransitionSet::empty();
    let mut materialized = 0;
    for t1 in g1.iter() {
        if t1.reaches_error() {
            materialized += 1;
            out.insert(t1.clone());
            continue;
        }
        for t2 in g2.iter() {
            let Some(endpoints) = join(t1.endpoints, t2.endpoints) else { continue };
            materialized += 1;
            let mut steps = t1.steps().to_vec();
            steps.extend_from_slice(t2.steps());
            out.insert(Template::new(endpoints, steps));
        }
    }
    (out, materialized)
}

/// `g1 ∘ g2` with inconsistent templates removed, plus the materialized count.
pub fn compose_counted(g1: &TransitionSet, g2: &TransitionSet) -> (TransitionSet, usize) {
    let (raw, n) = compose_unpruned(g1, g2);
    (raw.prune(), n)
}

pub fn compose(g1: &TransitionSet, g2: &TransitionSet) -> TransitionSet {
    compose_counted(g1, g2).0
}

/// Union of `g^0 … g^k`, plus the materialized count.
pub fn relation_iterate_counted(g: &TransitionSet, k: usize) -> (TransitionSet, usize) {
    let mut acc = TransitionSet::identity();
    let mut power = TransitionSet::identity();
    let mut materialized = 0;
    for _ in 0..k {
        let (next, n) = compose_counted(&power, g);
        materialized += n;
        acc = acc.union(&next);
        power = next;
    }
    (acc, materialized)
}

pub fn relation_iterate(g: &TransitionSet, k: usize) -> TransitionSet {
    relation_iterate_counted(g, k).0
}
