use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::relation::Relation;
use crate::spec::{ClosureMode, FormulaClassSpec};
use crate::structure::Structure;

use super::family::{def_family, DefFamily};

/// Canonical form of a family at the comparison arity: two fingerprints are
/// equal iff the families are.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint {
    mode: ClosureMode,
    k: u32,
    m: usize,
    empty: bool,
    top: Relation,
    closures: Vec<Relation>,
}

impl Fingerprint {
    pub fn of(family: &DefFamily) -> Fingerprint {
        Fingerprint {
            mode: family.mode(),
            k: family.k(),
            m: family.arity(),
            empty: family.has_empty(),
            top: family.top().clone(),
            closures: family.distinct_closures(),
        }
    }

    pub fn mode(&self) -> ClosureMode {
        self.mode
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn arity(&self) -> usize {
        self.m
    }

    pub fn has_empty(&self) -> bool {
        self.empty
    }

    pub fn top(&self) -> &Relation {
        &self.top
    }

    /// The distinct point closures, ascending.
    pub fn closures(&self) -> &[Relation] {
        &self.closures
    }

    /// The serialized form, one item per line with a trailing newline.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// First 64 bits of the SHA-256 of [`Self::to_text`], as 16 hex digits.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_text().as_bytes());
        hash[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Parses [`Self::to_text`] output.
    pub fn parse(text: &str) -> Result<Fingerprint> {
        let bad = |line: usize, msg: &str| Error::syntax(line, 1, format!("fingerprint: {msg}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad(1, "empty input"))?;
        let mut mode = None;
        let mut k = None;
        let mut m = None;
        let mut empty = None;
        let mut words = header.split_whitespace();
        if words.next() != Some("fingerprint") {
            return Err(bad(1, "expected `fingerprint` header"));
        }
        for w in words {
            let (key, value) = w.split_once('=').ok_or_else(|| bad(1, "expected key=value"))?;
            match key {
                "mode" => mode = Some(value.parse::<ClosureMode>()?),
                "k" => k = value.parse::<u32>().ok(),
                "m" => m = value.parse::<usize>().ok(),
                "empty" => empty = Some(value == "1"),
                _ => return Err(bad(1, "unknown header field")),
            }
        }
        let top_line = lines.next().ok_or_else(|| bad(2, "missing top line"))?;
        let top = Relation::parse_canonical(
            top_line.strip_prefix("top=").ok_or_else(|| bad(2, "expected `top=`"))?,
        )?;
        let closures = lines
            .filter(|l| !l.trim().is_empty())
            .map(Relation::parse_canonical)
            .collect::<Result<Vec<_>>>()?;
        Ok(Fingerprint {
            mode: mode.ok_or_else(|| bad(1, "missing mode"))?,
            k: k.ok_or_else(|| bad(1, "missing k"))?,
            m: m.ok_or_else(|| bad(1, "missing m"))?,
            empty: empty.ok_or_else(|| bad(1, "missing empty"))?,
            top,
            closures,
        })
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "fingerprint mode={} k={} m={} empty={}",
            self.mode,
            self.k,
            self.m,
            u8::from(self.empty)
        )?;
        writeln!(f, "top={}", self.top)?;
        for c in &self.closures {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Fingerprint of the definable family at the comparison arity (`k^2` by default).
pub fn fingerprint(a: &Structure, spec: &FormulaClassSpec, limits: &Limits) -> Result<Fingerprint> {
    let m = limits.comparison_arity(a.k());
    Ok(Fingerprint::of(&def_family(a, spec, m, limits)?))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    /// `witness` lies in exactly one of the two families: the first when
    /// `in_first` holds, the second otherwise.
    Inequivalent { witness: Relation, in_first: bool },
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }
}

/// Compares two families of the same universe, arity and mode.
pub fn compare_families(f1: &DefFamily, f2: &DefFamily) -> Result<Equivalence> {
    if f1.k() != f2.k() {
        return Err(Error::UniverseMismatch(f1.k(), f2.k()));
    }
    if f1.mode() != f2.mode() {
        return Err(Error::ModeMismatch(f1.mode().to_string(), f2.mode().to_string()));
    }
    if f1.arity() != f2.arity() {
        return Err(Error::Arity(format!(
            "families of arity {} and {} are not comparable",
            f1.arity(),
            f2.arity()
        )));
    }
    for v in f1.distinct_closures() {
        if !f2.member(&v)? {
            return Ok(Equivalence::Inequivalent {
                witness: v,
                in_first: true,
            });
        }
    }
    for v in f2.distinct_closures() {
        if !f1.member(&v)? {
            return Ok(Equivalence::Inequivalent {
                witness: v,
                in_first: false,
            });
        }
    }
    // both are unions of the same point closures, so only ∅ can differ
    if f1.has_empty() != f2.has_empty() {
        return Ok(Equivalence::Inequivalent {
            witness: Relation::empty(f1.k(), f1.arity()),
            in_first: f1.has_empty(),
        });
    }
    Ok(Equivalence::Equivalent)
}

/// Decides whether two structures define the same sets under their classes,
/// by comparing the families at the comparison arity.
pub fn decide_equivalence(
    a1: &Structure,
    spec1: &FormulaClassSpec,
    a2: &Structure,
    spec2: &FormulaClassSpec,
    limits: &Limits,
) -> Result<Equivalence> {
    if a1.k() != a2.k() {
        return Err(Error::UniverseMismatch(a1.k(), a2.k()));
    }
    if spec1.mode() != spec2.mode() {
        return Err(Error::ModeMismatch(spec1.mode().to_string(), spec2.mode().to_string()));
    }
    let m = limits.comparison_arity(a1.k());
    compare_families(&def_family(a1, spec1, m, limits)?, &def_family(a2, spec2, m, limits)?)
}
