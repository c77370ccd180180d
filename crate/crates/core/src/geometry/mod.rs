//! Term clones, algebraic sets and the equational-domain check.

mod algebraic;
mod clone;
mod ed;

pub use algebraic::{
    algebraic_family, algebraic_family_bounded, equation_solution, AlgebraicFamily, Provenance,
};
pub use clone::{term_clone, term_clone_bounded, TermClone, Witness};
pub(crate) use ed::ed_check_reusing;
pub use ed::{ed_check, ed_check_family, EdCounterexample, EdReport, EdVerdict};
