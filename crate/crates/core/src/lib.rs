//! Definable relation families over finite first-order structures.
//!
//! For a finite structure `A` and a class of formulas closed under `∧`, `∨`
//! and minors, the family of definable relations of every arity is determined
//! by its members of arity `|A|^2`. This crate computes those families, takes
//! their canonical arity-`|A|^2` fingerprints, decides equality of two
//! structures' definable geometries, builds canonical relational
//! presentations, and classifies finite algebras up to algebraic and
//! quantifier-free (L0) equivalence.
//!
//! Module map:
//!
//! * [`structure`], [`syntax`]: structures, terms, formulas, parsing, minors of formulas
//! * [`eval`]: term and formula evaluation, solution sets
//! * [`relation`]: bitset relations, minors of sets, characteristic functions
//! * [`geometry`]: term clones, algebraic sets, the equational-domain check
//! * [`closure`]: definable families, fingerprints, equivalence, canonical presentations, the oracle
//! * [`classify`]: batch classification and reports

pub mod classify;
pub mod closure;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod limits;
pub mod relation;
pub mod spec;
pub mod structure;
pub mod syntax;

pub use error::{Error, Result};
pub use limits::Limits;
pub use relation::{Elem, MinorMap, Relation};
pub use spec::{ClosureMode, FormulaClassSpec, Generator};
pub use structure::Structure;
pub use syntax::{Formula, Term};
