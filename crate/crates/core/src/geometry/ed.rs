use std::fmt;

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::relation::Relation;
use crate::structure::Structure;

use super::algebraic::{algebraic_family, AlgebraicFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdVerdict {
    /// No union of two algebraic sets escaped the family at any checked arity.
    PassesAtBound,
    Fails,
}

impl fmt::Display for EdVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdVerdict::PassesAtBound => "passes_at_bound",
            EdVerdict::Fails => "fails",
        })
    }
}

/// Two algebraic sets whose union is not algebraic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdCounterexample {
    pub arity: usize,
    pub s: Relation,
    pub t: Relation,
}

impl EdCounterexample {
    pub fn union(&self) -> Relation {
        self.s.union(&self.t).expect("counterexample sets share an arity")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdReport {
    pub verdict: EdVerdict,
    pub bound: usize,
    pub counterexample: Option<EdCounterexample>,
}

impl EdReport {
    /// Line-oriented form: verdict and bound, then for a failure the arity and
    /// the relations `S`, `T` and `S ∪ T` in canonical text.
    pub fn to_text(&self) -> String {
        let mut out = format!("edcheck verdict={} bound={}\n", self.verdict, self.bound);
        if let Some(c) = &self.counterexample {
            out.push_str(&format!("arity={}\n", c.arity));
            out.push_str(&format!("S={}\n", c.s));
            out.push_str(&format!("T={}\n", c.t));
            out.push_str(&format!("union={}\n", c.union()));
        }
        out
    }
}

/// First pair of members whose union is not a member, if any.
///
/// Every member is the union of the point closures `V_s` of its points, so the
/// family is closed under union iff `S ∪ V_s` is a member for every member `S`
/// and every point `s`. Members are scanned in ascending order, points by index.
pub fn ed_check_family(family: &AlgebraicFamily) -> Option<EdCounterexample> {
    let n = family.arity();
    let points = family.members()[0].size();
    let closures: Vec<Relation> = (0..points).map(|t| family.point_closure(t)).collect();
    let present: FxHashSet<&Relation> = family.members().iter().collect();
    let mut sorted: Vec<&Relation> = family.members().iter().collect();
    sorted.sort();
    for s in sorted {
        for (t, v) in closures.iter().enumerate() {
            if s.contains_index(t) {
                continue;
            }
            let mut u = s.clone();
            u.or_assign(v);
            if !present.contains(&u) {
                return Some(EdCounterexample {
                    arity: n,
                    s: s.clone(),
                    t: v.clone(),
                });
            }
        }
    }
    None
}

/// Checks that unions of algebraic sets stay algebraic at every arity `1..=bound`.
pub fn ed_check(a: &Structure, bound: usize, limits: &Limits) -> Result<EdReport> {
    ed_check_reusing(a, bound, None, limits)
}

/// [`ed_check`], taking the family at one arity from `known` instead of
/// recomputing it.
pub(crate) fn ed_check_reusing(
    a: &Structure,
    bound: usize,
    known: Option<&AlgebraicFamily>,
    limits: &Limits,
) -> Result<EdReport> {
    if bound == 0 {
        return Err(Error::Invalid("the equational-domain bound must be at least 1".into()));
    }
    for n in 1..=bound {
        let computed;
        let family = match known {
            Some(f) if f.arity() == n => f,
            _ => {
                computed = algebraic_family(a, n, limits)?;
                &computed
            }
        };
        if let Some(c) = ed_check_family(family) {
            return Ok(EdReport {
                verdict: EdVerdict::Fails,
                bound,
                counterexample: Some(c),
            });
        }
    }
    Ok(EdReport {
        verdict: EdVerdict::PassesAtBound,
        bound,
        counterexample: None,
    })
}
