//! Incremental syntactic-semantic verification.
//!
//! Programs are parsed with operator-precedence grammars, whose locality lets
//! an edit be re-parsed inside a small enclosing subtree. Verification
//! procedures are synthesized-attribute schemas, so after an edit only the
//! attributes on the path from the changed subtree to the root are
//! recomputed, and even that walk stops at the first unchanged value.
//!
//! The crate ships the *Mini* language front end with two schemas: expected
//! reliability under a probabilistic usage profile, and reachability of an
//! error location of a property automaton.

pub mod arith;
pub mod attributes;
pub mod grammar;
pub mod incremental;
pub mod mini;
pub mod parser;
pub mod reliability;
pub mod safety;
pub mod scalar;

use num_rational::BigRational;

pub use attributes::{evaluate, reevaluate, AttributeMap, AttributeSchema, Child, EvalError, RecomputeStats};
pub use grammar::{compute_opm, Grammar, PrecedenceMatrix, Relation};
pub use incremental::{apply_edit, diff_to_edit, Edit, ReuseStats, Splice};
pub use parser::{parse, NodeId, SyntaxTree, Token};
pub use scalar::Scalar;

/// Exact rational numbers.
pub type Rational = BigRational;

pub type ExactProbExpr = reliability::ProbExpr<Rational>;
pub type FloatProbExpr = reliability::ProbExpr<f64>;
pub type ExactProfile = reliability::ReliabilityProfile<Rational>;
pub type FloatProfile = reliability::ReliabilityProfile<f64>;
pub type ExactReliabilitySchema = reliability::ReliabilitySchema<Rational>;
pub type FloatReliabilitySchema = reliability::ReliabilitySchema<f64>;
pub type ExactArithmeticSchema = arith::ArithmeticSchema<num_bigint::BigInt>;
