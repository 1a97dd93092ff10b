use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cond {
    Var(String, bool),
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Star,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Call(String),
    Assign(String, bool),
    AssignCall(String, String),
    If(Cond, Vec<Stmt>, Vec<Stmt>),
    While(Cond, Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub body: Vec<Stmt>,
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Var(v, b) => write!(f, "{v}=={b}"),
            Cond::Not(c) => write!(f, "!({c})"),
            Cond::And(a, b) => write!(f, "({a} && {b})"),
            Cond::Star => f.write_str("*"),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, list: &[Stmt]) -> fmt::Result {
    for s in list {
        write!(f, " {s};")?;
    }
    Ok(())
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Call(g) => write!(f, "{g}()"),
            Stmt::Assign(v, b) => write!(f, "{v} := {b}"),
            Stmt::AssignCall(v, g) => write!(f, "{v} := {g}()"),
            Stmt::If(c, t, e) => {
                write!(f, "if {c} then")?;
                write_list(f, t)?;
                f.write_str(" else")?;
                write_list(f, e)?;
                f.write_str(" endif")
            }
            Stmt::While(c, body) => {
                write!(f, "while {c} do")?;
                write_list(f, body)?;
                f.write_str(" endwhile")
            }
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("begin")?;
        write_list(f, &self.body)?;
        f.write_str(" end")
    }
}

fn count(list: &[Stmt]) -> usize {
    list.iter()
        .map(|s| match s {
            Stmt::If(_, t, e) => 1 + count(t) + count(e),
            Stmt::While(_, b) => 1 + count(b),
            _ => 1,
        })
        .sum()
}

impl Program {
    /// Statements at every nesting level.
    pub fn statement_count(&self) -> usize {
        count(&self.body)
    }
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub functions: usize,
    pub variables: usize,
    pub max_depth: usize,
    pub max_len: usize,
    pub loops: bool,
    /// Restricts programs to the shape whose reliability is determined by
    /// assignments alone: reads follow an assignment in the same or an
    /// enclosing list, nested blocks neither reassign outer variables nor
    /// leak their own, and loop conditions only use `*`.
    pub scoped: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { functions: 3, variables: 3, max_depth: 2, max_len: 4, loops: true, scoped: false }
    }
}

pub fn function_name(i: usize) -> String {
    format!("f{i}")
}

pub fn variable_name(i: usize) -> String {
    format!("v{i}")
}

#[derive(Clone, Default)]
struct Scope {
    assigned: BTreeSet<String>,
    locked: BTreeSet<String>,
}

impl Scope {
    fn nested(&self) -> Scope {
        Scope { assigned: self.assigned.clone(), locked: self.assigned.clone() }
    }
}

struct Gen<'a, R> {
    rng: &'a mut R,
    cfg: &'a GenConfig,
}

impl<R: Rng> Gen<'_, R> {
    fn function(&mut self) -> String {
        function_name(self.rng.gen_range(0..self.cfg.functions.max(1)))
    }

    fn cond(&mut self, readable: &[String], depth: usize) -> Cond {
        let leaf = depth == 0 || self.rng.gen_bool(0.5);
        if leaf {
            match readable.choose(self.rng) {
                Some(v) if self.rng.gen_bool(0.8) => Cond::Var(v.clone(), self.rng.gen_bool(0.5)),
                _ => Cond::Star,
            }
        } else if self.rng.gen_bool(0.4) {
            Cond::Not(Box::new(self.cond(readable, depth - 1)))
        } else {
            Cond::And(Box::new(self.cond(readable, depth - 1)), Box::new(self.cond(readable, depth - 1)))
        }
    }

    fn list(&mut self, scope: &mut Scope, depth: usize, len: usize) -> Vec<Stmt> {
        (0..len).map(|_| self.stmt(scope, depth)).collect()
    }

    fn block(&mut self, scope: &Scope, depth: usize) -> Vec<Stmt> {
        let len = self.rng.gen_range(1..=self.cfg.max_len.clamp(1, 3));
        if self.cfg.scoped {
            self.list(&mut scope.nested(), depth, len)
        } else {
            self.list(&mut scope.clone(), depth, len)
        }
    }

    fn stmt(&mut self, scope: &mut Scope, depth: usize) -> Stmt {
        let writable: Vec<String> = (0..self.cfg.variables)
            .map(variable_name)
            .filter(|v| !self.cfg.scoped || !scope.locked.contains(v))
            .collect();
        let readable: Vec<String> = if self.cfg.scoped {
            scope.assigned.iter().cloned().collect()
        } else {
            (0..self.cfg.variables).map(variable_name).collect()
        };
        let kinds = if depth == 0 { 3 } else if self.cfg.loops { 5 } else { 4 };
        match self.rng.gen_range(0..kinds) {
            1 | 2 if !writable.is_empty() => {
                let v = writable.choose(self.rng).unwrap().clone();
                scope.assigned.insert(v.clone());
                if self.rng.gen_bool(0.5) {
                    Stmt::Assign(v, self.rng.gen_bool(0.5))
                } else {
                    Stmt::AssignCall(v, self.function())
                }
            }
            3 => {
                let c = self.cond(&readable, 2);
                Stmt::If(c, self.block(scope, depth - 1), self.block(scope, depth - 1))
            }
            4 => {
                let c = if self.cfg.scoped { self.cond(&[], 1) } else { self.cond(&readable, 1) };
                Stmt::While(c, self.block(scope, depth - 1))
            }
            _ => Stmt::Call(self.function()),
        }
    }
}

pub fn random_program(rng: &mut impl Rng, cfg: &GenConfig) -> Program {
    let len = rng.gen_range(1..=cfg.max_len.max(1));
    random_program_of_len(rng, cfg, len)
}

/// A program with exactly `len` top-level statements.
pub fn random_program_of_len(rng: &mut impl Rng, cfg: &GenConfig, len: usize) -> Program {
    let mut gen = Gen { rng, cfg };
    Program { body: gen.list(&mut Scope::default(), cfg.max_depth, len.max(1)) }
}

/// A statement to splice in anywhere; reads are not scoped.
pub fn random_statement(rng: &mut impl Rng, cfg: &GenConfig) -> Stmt {
    let unscoped = GenConfig { scoped: false, ..cfg.clone() };
    let mut gen = Gen { rng, cfg: &unscoped };
    gen.stmt(&mut Scope::default(), cfg.max_depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, SeedableRng};

    #[test]
    fn rendering() {
        let p = Program {
            body: vec![
                Stmt::Call("opA".into()),
                Stmt::Assign("x".into(), true),
                Stmt::If(
                    Cond::Var("x".into(), true),
                    vec![Stmt::Call("opB".into())],
                    vec![Stmt::Call("opA".into())],
                ),
            ],
        };
        assert_eq!(p.to_string(), "begin opA(); x := true; if x==true then opB(); else opA(); endif; end");
        assert_eq!(p.statement_count(), 5);
    }

    #[test]
    fn scoped_reads_follow_writes() {
        fn check(list: &[Stmt], mut known: BTreeSet<String>) {
            let reads = |c: &Cond, known: &BTreeSet<String>| {
                let mut stack = vec![c.clone()];
                while let Some(c) = stack.pop() {
                    match c {
                        Cond::Var(v, _) => assert!(known.contains(&v)),
                        Cond::Not(a) => stack.push(*a),
                        Cond::And(a, b) => stack.extend([*a, *b]),
                        Cond::Star => {}
                    }
                }
            };
            for s in list {
                match s {
                    Stmt::Assign(v, _) | Stmt::AssignCall(v, _) => {
                        known.insert(v.clone());
                    }
                    Stmt::If(c, t, e) => {
                        reads(c, &known);
                        check(t, known.clone());
                        check(e, known.clone());
                    }
                    Stmt::While(c, b) => {
                        reads(c, &BTreeSet::new());
                        check(b, known.clone());
                    }
                    Stmt::Call(_) => {}
                }
            }
        }
        let mut rng = StdRng::seed_from_u64(7);
        let cfg = GenConfig { scoped: true, ..GenConfig::default() };
        for _ in 0..200 {
            check(&random_program(&mut rng, &cfg).body, BTreeSet::new());
        }
    }
}
