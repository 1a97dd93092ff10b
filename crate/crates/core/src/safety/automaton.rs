use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Name reserved for the error location of image automata.
pub const ERR: &str = "ERR";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("automaton has no states")]
    NoStates,
    #[error("state name `{0}` is declared twice")]
    DuplicateState(String),
    #[error("`{ERR}` is reserved for the error location")]
    ReservedState,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
    #[error("two transitions leave `{0}` on `{1}`")]
    Nondeterministic(String, String),
}

/// A location of an image automaton: a property state or the error trap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Location {
    State(usize),
    Err,
}

/// Deterministic automaton over function names and `x:=f` symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyAutomaton {
    states: Vec<String>,
    initial: usize,
    alphabet: BTreeSet<String>,
    delta: BTreeMap<(usize, String), usize>,
}

impl PropertyAutomaton {
    pub fn new<S: AsRef<str>>(
        states: &[S],
        initial: &str,
        alphabet: &[S],
        transitions: &[(S, S, S)],
    ) -> Result<Self, AutomatonError> {
        if states.is_empty() {
            return Err(AutomatonError::NoStates);
        }
        let mut names: Vec<String> = Vec::with_capacity(states.len());
        for s in states {
            let s = s.as_ref();
            if s == ERR {
                return Err(AutomatonError::ReservedState);
            }
            if names.iter().any(|n| n == s) {
                return Err(AutomatonError::DuplicateState(s.to_string()));
            }
            names.push(s.to_string());
        }
        let index = |name: &str| {
            names.iter().position(|n| n == name).ok_or_else(|| AutomatonError::UnknownState(name.to_string()))
        };
        let initial = index(initial)?;
        let alphabet: BTreeSet<String> = alphabet.iter().map(|s| s.as_ref().to_string()).collect();
        let mut delta = BTreeMap::new();
        for (from, on, to) in transitions {
            let (from, on, to) = (from.as_ref(), on.as_ref(), to.as_ref());
            if !alphabet.contains(on) {
                return Err(AutomatonError::UnknownSymbol(on.to_string()));
            }
            let key = (index(from)?, on.to_string());
            if delta.insert(key, index(to)?).is_some() {
                return Err(AutomatonError::Nondeterministic(from.to_string(), on.to_string()));
            }
        }
        Ok(PropertyAutomaton { states: names, initial, alphabet, delta })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|n| n == name)
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn alphabet(&self) -> &BTreeSet<String> {
        &self.alphabet
    }

    pub fn transition(&self, state: usize, symbol: &str) -> Option<usize> {
        self.delta.get(&(state, symbol.to_string())).copied()
    }

    /// Alphabet symbols of the form `x:=f`.
    pub fn assignment_symbols(&self) -> impl Iterator<Item = &str> + '_ {
        self.alphabet.iter().map(String::as_str).filter(|s| s.contains(":="))
    }
}

/// The totalized automaton: undefined moves lead to [`Location::Err`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageAutomaton {
    automaton: PropertyAutomaton,
    delta: BTreeMap<(usize, String), Location>,
}

pub fn image_automaton(a: &PropertyAutomaton) -> ImageAutomaton {
    let mut delta = BTreeMap::new();
    for s in 0..a.states.len() {
        for t in &a.alphabet {
            let to = a.transition(s, t).map_or(Location::Err, Location::State);
            delta.insert((s, t.clone()), to);
        }
    }
    ImageAutomaton { automaton: a.clone(), delta }
}

impl ImageAutomaton {
    pub fn automaton(&self) -> &PropertyAutomaton {
        &self.automaton
    }

    pub fn state_count(&self) -> usize {
        self.automaton.states.len()
    }

    /// `δ′(state, symbol)`; `None` when the symbol is not in the alphabet.
    pub fn step(&self, state: usize, symbol: &str) -> Option<Location> {
        self.delta.get(&(state, symbol.to_string())).copied()
    }

    /// Moves added by totalization.
    pub fn error_edges(&self) -> impl Iterator<Item = (usize, &str)> + '_ {
        self.delta
            .iter()
            .filter(|(_, to)| **to == Location::Err)
            .map(|((s, t), _)| (*s, t.as_str()))
    }

    pub fn location_name(&self, l: Location) -> &str {
        match l {
            Location::State(s) => &self.automaton.states[s],
            Location::Err => ERR,
        }
    }
}

impl fmt::Display for ImageAutomaton {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((s, t), to) in &self.delta {
            writeln!(f, "{} --{}--> {}", self.automaton.states[*s], t, self.location_name(*to))?;
        }
        Ok(())
    }
}
