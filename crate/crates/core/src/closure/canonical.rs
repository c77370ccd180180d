use crate::error::Result;
use crate::limits::Limits;
use crate::relation::Relation;
use crate::spec::{FormulaClassSpec, Generator};
use crate::structure::{RelTable, Structure, Universe};
use crate::syntax::{Formula, Term};

use super::family::def_family;
use super::fingerprint::{compare_families, Fingerprint};

/// A relational structure whose atoms `s_i(x1, ..., xm)` generate the same
/// definable sets as the original class.
#[derive(Debug, Clone)]
pub struct CanonicalPresentation {
    structure: Structure,
    spec: FormulaClassSpec,
    fingerprint: Fingerprint,
}

impl CanonicalPresentation {
    /// Relations `s0, s1, ...` of arity `m`: `∅` first when it is definable,
    /// then the distinct point closures in fingerprint order.
    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    /// The atoms `s_i(x1, ..., xm)` under the original closure mode.
    pub fn spec(&self) -> &FormulaClassSpec {
        &self.spec
    }

    /// Fingerprint of the original class.
    pub fn fingerprint(&self) -> &Fingerprint {
        &self.fingerprint
    }
}

/// Builds the canonical presentation of `spec` over `a`.
///
/// Every member at the comparison arity is a union of point closures, and
/// the family is closed under minors, so the closures (with `∅` when it is a
/// member) generate exactly the same family.
pub fn canonicalize(a: &Structure, spec: &FormulaClassSpec, limits: &Limits) -> Result<CanonicalPresentation> {
    let m = limits.comparison_arity(a.k());
    let family = def_family(a, spec, m, limits)?;
    let fingerprint = Fingerprint::of(&family);
    let mut relations: Vec<Relation> = Vec::new();
    if fingerprint.has_empty() {
        relations.push(Relation::empty(a.k(), m));
    }
    relations.extend(fingerprint.closures().iter().cloned());
    let rels: Vec<RelTable> = relations
        .into_iter()
        .enumerate()
        .map(|(i, r)| RelTable::new(format!("s{i}"), r))
        .collect();
    let atoms: Vec<Generator> = (0..rels.len())
        .map(|i| Generator::Formula(Formula::Atom(i, (1..=m as u32).map(Term::Var).collect())))
        .collect();
    let structure = Structure::new(
        format!("{}_canonical", a.name()),
        Universe::new(a.k())?,
        Vec::new(),
        rels,
    )?;
    Ok(CanonicalPresentation {
        structure,
        spec: FormulaClassSpec::new(atoms, spec.mode())?,
        fingerprint,
    })
}

/// First arity in `1..=bound` at which the presentation and the original
/// class define different sets, if any.
pub fn verify_presentation(
    a: &Structure,
    spec: &FormulaClassSpec,
    presentation: &CanonicalPresentation,
    bound: usize,
    limits: &Limits,
) -> Result<Option<usize>> {
    // the atoms have arity m, which the presentation's own cap must admit
    let mut limits = limits.clone();
    let m = limits.comparison_arity(a.k());
    limits.max_generator_arity = Some(limits.generator_arity_cap(a.k()).max(m));
    for n in 1..=bound {
        let original = def_family(a, spec, n, &limits)?;
        let canonical = def_family(presentation.structure(), presentation.spec(), n, &limits)?;
        if !compare_families(&original, &canonical)?.is_equivalent() {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
