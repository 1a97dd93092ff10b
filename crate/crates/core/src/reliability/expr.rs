//! Rational functions over truth-probability atoms `Pr_T(v)`.
//!
//! A [`ProbExpr`] is a quotient of two polynomials whose variables are the
//! atoms. The representation is normalized after every operation so that
//! constant expressions are always a plain constant; equality is decided by
//! cross-multiplication.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::Scalar;

/// Product of atoms with positive exponents; empty for the constant monomial.
pub type Monomial = BTreeMap<String, u32>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("division by zero")]
    DivisionByZero,
}

#[derive(Debug, Clone, PartialEq)]
struct Poly<S> {
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> Poly<S> {
    fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    fn constant(c: S) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::new(), c);
        }
        Poly { terms }
    }

    fn atom(name: &str) -> Self {
        let mut m = Monomial::new();
        m.insert(name.to_string(), 1);
        Poly { terms: [(m, S::one())].into() }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn as_constant(&self) -> Option<S> {
        match self.terms.len() {
            0 => Some(S::zero()),
            1 => self.terms.get(&Monomial::new()).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    fn neg(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), S::zero() - c.clone())).collect() }
    }

    fn scale(&self, k: &S) -> Self {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone() * k.clone());
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m = m1.clone();
                for (v, e) in m2 {
                    *m.entry(v.clone()).or_insert(0) += e;
                }
                out.add_term(m, c1.clone() * c2.clone());
            }
        }
        out
    }

    fn substitute(&self, values: &impl Fn(&str) -> Option<S>) -> Self {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Monomial::new();
            for (v, e) in m {
                match values(v) {
                    Some(x) => {
                        for _ in 0..*e {
                            coeff = coeff * x.clone();
                        }
                    }
                    None => {
                        rest.insert(v.clone(), *e);
                    }
                }
            }
            out.add_term(rest, coeff);
        }
        out
    }

    /// `Some(k)` when `self = k · other` (other non-zero).
    fn ratio_to(&self, other: &Self) -> Option<S> {
        let (lead, lead_c) = other.terms.iter().next_back()?;
        let k = self.terms.get(lead)?.clone() / lead_c.clone();
        (self.terms.len() == other.terms.len() && *self == other.scale(&k)).then_some(k)
    }

    fn atoms(&self, out: &mut BTreeSet<String>) {
        for m in self.terms.keys() {
            out.extend(m.keys().cloned());
        }
    }
}

impl<S: Scalar> fmt::Display for Poly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let atoms: Vec<String> = m
                .iter()
                .map(|(v, e)| if *e == 1 { format!("Pr_T({v})") } else { format!("Pr_T({v})^{e}") })
                .collect();
            if atoms.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                f.write_str(&atoms.join("*"))?;
            } else {
                write!(f, "{c}*{}", atoms.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ProbExpr<S> {
    num: Poly<S>,
    den: Poly<S>,
}

impl<S: Scalar> ProbExpr<S> {
    pub fn constant(c: S) -> Self {
        ProbExpr { num: Poly::constant(c), den: Poly::constant(S::one()) }
    }

    pub fn zero() -> Self {
        Self::constant(S::zero())
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    /// The unknown `Pr_T(variable)`.
    pub fn atom(variable: &str) -> Self {
        ProbExpr { num: Poly::atom(variable), den: Poly::constant(S::one()) }
    }

    fn normalized(num: Poly<S>, den: Poly<S>) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return Self::zero();
        }
        if let Some(d) = den.as_constant() {
            let inv = S::one() / d;
            return ProbExpr { num: num.scale(&inv), den: Poly::constant(S::one()) };
        }
        if let Some(k) = num.ratio_to(&den) {
            return Self::constant(k);
        }
        let lead = den.terms.values().next_back().cloned().expect("non-zero denominator");
        let inv = S::one() / lead;
        ProbExpr { num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn as_constant(&self) -> Option<S> {
        match (self.num.as_constant(), self.den.as_constant()) {
            (Some(n), Some(d)) => Some(n / d),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// Variables whose `Pr_T` atom still occurs.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.num.atoms(&mut out);
        self.den.atoms(&mut out);
        out
    }

    /// `1 - self`.
    pub fn complement(&self) -> Self {
        &Self::one() - self
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, ExprError> {
        if other.num.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Self::normalized(self.num.mul(&other.den), self.den.mul(&other.num)))
    }

    /// Replaces the atoms for which `values` has an entry.
    pub fn substitute(&self, values: &impl Fn(&str) -> Option<S>) -> Result<Self, ExprError> {
        let num = self.num.substitute(values);
        let den = self.den.substitute(values);
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    /// Numeric value when every atom is assigned.
    pub fn evaluate(&self, values: &impl Fn(&str) -> Option<S>) -> Option<S> {
        self.substitute(values).ok()?.as_constant()
    }
}

impl<S: Scalar> PartialEq for ProbExpr<S> {
    fn eq(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl<S: Scalar> From<S> for ProbExpr<S> {
    fn from(c: S) -> Self {
        Self::constant(c)
    }
}

impl<'a, S: Scalar> Add<&'a ProbExpr<S>> for &'a ProbExpr<S> {
    type Output = ProbExpr<S>;

    fn add(self, rhs: &'a ProbExpr<S>) -> ProbExpr<S> {
        if self.den == rhs.den {
            return ProbExpr::normalized(self.num.add(&rhs.num), self.den.clone());
        }
        let num = self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den));
        ProbExpr::normalized(num, self.den.mul(&rhs.den))
    }
}

impl<'a, S: Scalar> Sub<&'a ProbExpr<S>> for &'a ProbExpr<S> {
    type Output = ProbExpr<S>;

    fn sub(self, rhs: &'a ProbExpr<S>) -> ProbExpr<S> {
        self + &-rhs
    }
}

impl<'a, S: Scalar> Mul<&'a ProbExpr<S>> for &'a ProbExpr<S> {
    type Output = ProbExpr<S>;

    fn mul(self, rhs: &'a ProbExpr<S>) -> ProbExpr<S> {
        ProbExpr::normalized(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }
}

impl<S: Scalar> Neg for &ProbExpr<S> {
    type Output = ProbExpr<S>;

    fn neg(self) -> ProbExpr<S> {
        ProbExpr { num: self.num.neg(), den: self.den.clone() }
    }
}

impl<S: Scalar> fmt::Display for ProbExpr<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = self.as_constant() {
            return write!(f, "{c}");
        }
        match self.den.as_constant() {
            Some(_) => write!(f, "{}", self.num),
            None => write!(f, "({}) / ({})", self.num, self.den),
        }
    }
}
