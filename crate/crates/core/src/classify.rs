//! Batch classification of finite algebras by their definable families.
//!
//! In algebraic mode the class of an algebra is the lattice closure of its
//! algebraic sets; the equational-domain check decides whether equal
//! fingerprints may be reported as equivalent. In L0 mode it is the Boolean
//! closure of the solution sets of atomic formulas.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use rustc_hash::FxHashSet;

use crate::closure::{compare_families, oracle_close, DefFamily, Equivalence, Fingerprint};
use crate::error::{Error, Result};
use crate::geometry::{algebraic_family, algebraic_family_bounded, ed_check_reusing, AlgebraicFamily, EdVerdict};
use crate::limits::Limits;
use crate::relation::{tuple_count, tuple_of_index, Elem, Relation};
use crate::spec::ClosureMode;
use crate::structure::Structure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifyMode {
    Algebraic,
    L0,
}

impl ClassifyMode {
    /// Closure mode of the formula class behind this classification.
    pub fn closure_mode(self) -> ClosureMode {
        match self {
            ClassifyMode::Algebraic => ClosureMode::Lattice,
            ClassifyMode::L0 => ClosureMode::Boolean,
        }
    }
}

impl fmt::Display for ClassifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifyMode::Algebraic => "algebraic",
            ClassifyMode::L0 => "l0",
        })
    }
}

impl FromStr for ClassifyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "algebraic" => Ok(ClassifyMode::Algebraic),
            "l0" => Ok(ClassifyMode::L0),
            _ => Err(Error::Invalid(format!("unknown classification mode `{s}` (expected algebraic or l0)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifyOptions {
    pub mode: ClassifyMode,
    /// Largest arity of the equational-domain check; `None` means the comparison arity.
    pub ed_bound: Option<usize>,
    /// Generate term clones only to this depth. Required at `k >= 3`.
    pub approximate_depth: Option<usize>,
}

impl ClassifyOptions {
    pub fn new(mode: ClassifyMode) -> Self {
        ClassifyOptions {
            mode,
            ed_bound: None,
            approximate_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportItem {
    pub name: String,
    /// Equational-domain verdict; `None` in L0 mode and under approximation.
    pub ed: Option<EdVerdict>,
    pub fingerprint: Fingerprint,
}

/// Items with byte-equal fingerprints, named after the least item name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportClass {
    pub name: String,
    pub members: Vec<String>,
    pub digest: String,
}

/// A relation in exactly one of two groups' families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupWitness {
    pub first: String,
    pub second: String,
    pub witness: Relation,
    pub in_first: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationReport {
    pub mode: ClassifyMode,
    pub k: u32,
    pub m: usize,
    pub ed_bound: Option<usize>,
    pub approximate_depth: Option<usize>,
    /// Sorted by name.
    pub items: Vec<ReportItem>,
    /// Groups reported as equivalence classes.
    pub classes: Vec<ReportClass>,
    /// Fingerprint-equal groups whose equivalence is not established.
    pub undetermined: Vec<ReportClass>,
    /// One witness for every pair of groups, classes first.
    pub witnesses: Vec<GroupWitness>,
}

impl ClassificationReport {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// `2^(2^(k^(k^2)))`, the bound on the number of classes.
    pub fn bound_text(&self) -> String {
        format!("2^(2^({}^{}))", self.k, self.k * self.k)
    }

    /// Every item grouped by fingerprint, classes and undetermined groups alike,
    /// with groups and members sorted by name.
    pub fn fingerprint_partition(&self) -> Vec<Vec<String>> {
        let mut out: Vec<Vec<String>> = self
            .classes
            .iter()
            .chain(&self.undetermined)
            .map(|c| c.members.clone())
            .collect();
        out.sort();
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("defgeo-report v1\n");
        let opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
        out.push_str(&format!(
            "mode={} k={} m={} ed-bound={} approximate={}\n",
            self.mode,
            self.k,
            self.m,
            opt(self.ed_bound),
            self.approximate_depth.map_or_else(|| "no".to_string(), |d| format!("depth-{d}")),
        ));
        if self.approximate_depth.is_some() {
            out.push_str("claims=inequivalence-only\n");
        }
        out.push_str(&format!("theoretical-bound={}\n", self.bound_text()));
        out.push_str(&format!("items={}\n", self.items.len()));
        for item in &self.items {
            let ed = item.ed.map_or_else(|| "-".to_string(), |v| v.to_string());
            out.push_str(&format!(
                "item {} ed={} digest={}\n",
                item.name,
                ed,
                item.fingerprint.digest()
            ));
        }
        out.push_str(&format!("classes={}\n", self.classes.len()));
        for c in &self.classes {
            push_group(&mut out, "class", c);
        }
        out.push_str(&format!("undetermined={}\n", self.undetermined.len()));
        for c in &self.undetermined {
            push_group(&mut out, "fingerprint-equal", c);
        }
        out.push_str(&format!("witnesses={}\n", self.witnesses.len()));
        for w in &self.witnesses {
            let holder = if w.in_first { &w.first } else { &w.second };
            out.push_str(&format!(
                "witness {} {} in={} {}\n",
                w.first, w.second, holder, w.witness
            ));
        }
        out
    }

    /// Full fingerprints, one block per item: a `# name` line, then the fingerprint.
    pub fn sidecar_text(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            out.push_str(&format!("# {}\n", item.name));
            out.push_str(&item.fingerprint.to_text());
        }
        out
    }
}

fn push_group(out: &mut String, label: &str, c: &ReportClass) {
    out.push_str(&format!("{label} {} size={} digest={}\n", c.name, c.members.len(), c.digest));
    for m in &c.members {
        out.push_str(&format!("  member {m}\n"));
    }
}

/// Reads every `*.str` file in `dir`, sorted by file name.
pub fn load_dir(dir: &Path) -> Result<Vec<Structure>> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "str"));
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p)?;
            Structure::parse(&text)
        })
        .collect()
}

struct Analysis {
    family: DefFamily,
    ed: Option<EdVerdict>,
}

/// The family of an item at arity `m` under the classification's formula class.
///
/// Equations in `x1..xm` are exactly the equalizers of `m`-ary term
/// operations, and that set is closed under `m`-ary minors, so the algebraic
/// family at `m` (with the relation atoms in L0 mode) already contains every
/// seed the closure engine would produce.
fn analyse(a: &Structure, opts: &ClassifyOptions, m: usize, limits: &Limits) -> Result<Analysis> {
    let base = match opts.mode {
        ClassifyMode::Algebraic => a.algebra_reduct(),
        ClassifyMode::L0 => a.clone(),
    };
    let algebraic: AlgebraicFamily = match opts.approximate_depth {
        Some(d) => algebraic_family_bounded(&base, m, d, limits)?,
        None => algebraic_family(&base, m, limits)?,
    };
    let mut seeds = algebraic.generators();
    if opts.mode == ClassifyMode::L0 {
        seeds.extend(relation_atoms(&base, &algebraic, limits)?);
    }
    let family = DefFamily::from_seeds(a.k(), m, opts.mode.closure_mode(), &seeds, limits)?;
    let ed = match (opts.mode, opts.approximate_depth) {
        (ClassifyMode::Algebraic, None) => {
            let bound = opts.ed_bound.unwrap_or(m);
            Some(ed_check_reusing(&base, bound, Some(&algebraic), limits)?.verdict)
        }
        _ => None,
    };
    Ok(Analysis { family, ed })
}

/// `{x : (f1(x), ..., fr(x)) in R}` for every relation `R` and every tuple of
/// term operations.
fn relation_atoms(a: &Structure, algebraic: &AlgebraicFamily, limits: &Limits) -> Result<Vec<Relation>> {
    let clone = algebraic.term_clone();
    let tables: Vec<Vec<Elem>> = (0..clone.len()).map(|i| clone.table(i)).collect();
    let mut out = FxHashSet::default();
    for rel in a.rels() {
        let r = rel.arity();
        let count = (tables.len() as u64).checked_pow(r as u32).unwrap_or(u64::MAX);
        if count > limits.max_seed_maps {
            return Err(Error::guard(
                "seed-maps",
                format!("relation `{}` needs {count} term tuples, cap is {}", rel.name(), limits.max_seed_maps),
            ));
        }
        let mut choice = vec![0usize; r];
        let mut image = vec![0; r];
        loop {
            let set = Relation::from_indices(
                a.k(),
                clone.arity(),
                (0..clone.points()).filter(|&p| {
                    for (slot, &f) in image.iter_mut().zip(&choice) {
                        *slot = tables[f][p];
                    }
                    rel.relation().contains(&image)
                }),
            );
            out.insert(set);
            let Some(pos) = (0..r).rev().find(|&j| choice[j] + 1 < tables.len()) else {
                break;
            };
            choice[pos] += 1;
            choice[pos + 1..].fill(0);
        }
    }
    let mut out: Vec<Relation> = out.into_iter().collect();
    out.sort();
    Ok(out)
}

fn check_inputs(structures: &[Structure], opts: &ClassifyOptions) -> Result<u32> {
    let first = structures
        .first()
        .ok_or_else(|| Error::Invalid("nothing to classify".into()))?;
    let k = first.k();
    if let Some(s) = structures.iter().find(|s| s.k() != k) {
        return Err(Error::UniverseMismatch(k, s.k()));
    }
    let mut names = FxHashSet::default();
    if let Some(s) = structures.iter().find(|s| !names.insert(s.name())) {
        return Err(Error::Invalid(format!("two structures are named `{}`", s.name())));
    }
    if k >= 3 && opts.approximate_depth.is_none() {
        return Err(Error::Invalid(format!(
            "exact classification at universe size {k} needs term clones of arity {}; \
             pass an approximate depth to get inequivalence-only verdicts",
            k * k
        )));
    }
    Ok(k)
}

/// Classifies `structures` (all on the same universe) by fingerprint.
pub fn classify(structures: &[Structure], opts: &ClassifyOptions, limits: &Limits) -> Result<ClassificationReport> {
    let k = check_inputs(structures, opts)?;
    let m = limits.comparison_arity(k);
    let mut sorted: Vec<&Structure> = structures.iter().collect();
    sorted.sort_by(|a, b| a.name().cmp(b.name()));
    let analyses: Vec<Analysis> = sorted
        .par_iter()
        .map(|a| analyse(a, opts, m, limits))
        .collect::<Result<_>>()?;

    let items: Vec<ReportItem> = sorted
        .iter()
        .zip(&analyses)
        .map(|(a, x)| ReportItem {
            name: a.name().to_string(),
            ed: x.ed,
            fingerprint: Fingerprint::of(&x.family),
        })
        .collect();

    // bucket by fingerprint text; items are in name order, so the first
    // member of a bucket is its least name
    let mut buckets: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        buckets.entry(item.fingerprint.to_text()).or_default().push(i);
    }
    let mut classes = Vec::new();
    let mut undetermined = Vec::new();
    let mut representatives: Vec<(bool, usize)> = Vec::new();
    for members in buckets.values() {
        let determined = match (opts.mode, opts.approximate_depth) {
            (_, Some(_)) => false,
            (ClassifyMode::Algebraic, None) => members.iter().all(|&i| items[i].ed == Some(EdVerdict::PassesAtBound)),
            (ClassifyMode::L0, None) => true,
        };
        let group = ReportClass {
            name: items[members[0]].name.clone(),
            members: members.iter().map(|&i| items[i].name.clone()).collect(),
            digest: items[members[0]].fingerprint.digest(),
        };
        representatives.push((determined, members[0]));
        if determined {
            classes.push(group);
        } else {
            undetermined.push(group);
        }
    }
    classes.sort_by(|a, b| a.name.cmp(&b.name));
    undetermined.sort_by(|a, b| a.name.cmp(&b.name));
    representatives.sort_by(|a, b| (!a.0, &items[a.1].name).cmp(&(!b.0, &items[b.1].name)));

    let mut witnesses = Vec::new();
    for (x, &(_, i)) in representatives.iter().enumerate() {
        for &(_, j) in &representatives[x + 1..] {
            if let Equivalence::Inequivalent { witness, in_first } =
                compare_families(&analyses[i].family, &analyses[j].family)?
            {
                witnesses.push(GroupWitness {
                    first: items[i].name.clone(),
                    second: items[j].name.clone(),
                    witness,
                    in_first,
                });
            }
        }
    }

    Ok(ClassificationReport {
        mode: opts.mode,
        k,
        m,
        ed_bound: match (opts.mode, opts.approximate_depth) {
            (ClassifyMode::Algebraic, None) => Some(opts.ed_bound.unwrap_or(m)),
            _ => None,
        },
        approximate_depth: opts.approximate_depth,
        items,
        classes,
        undetermined,
        witnesses,
    })
}

/// Pairs of the subalgebra of `A x A` generated by `pairs`, as a `k * k` bitmap
/// indexed by `a * k + b`.
fn generated_pairs(s: &Structure, pairs: impl IntoIterator<Item = (Elem, Elem)>) -> Vec<bool> {
    let k = s.k() as usize;
    let mut present = vec![false; k * k];
    let mut list: Vec<(Elem, Elem)> = Vec::new();
    let add = |p: (Elem, Elem), present: &mut Vec<bool>, list: &mut Vec<(Elem, Elem)>| {
        let i = p.0 as usize * k + p.1 as usize;
        if !present[i] {
            present[i] = true;
            list.push(p);
        }
    };
    for p in pairs {
        add(p, &mut present, &mut list);
    }
    for op in s.ops().iter().filter(|op| op.arity() == 0) {
        let c = op.table()[0];
        add((c, c), &mut present, &mut list);
    }
    loop {
        let before = list.len();
        for op in s.ops().iter().filter(|op| op.arity() > 0) {
            let r = op.arity();
            let snapshot = list.clone();
            let mut choice = vec![0usize; r];
            loop {
                let left: Vec<Elem> = choice.iter().map(|&c| snapshot[c].0).collect();
                let right: Vec<Elem> = choice.iter().map(|&c| snapshot[c].1).collect();
                add(
                    (op.apply(s.k(), &left), op.apply(s.k(), &right)),
                    &mut present,
                    &mut list,
                );
                let Some(pos) = (0..r).rev().find(|&j| choice[j] + 1 < snapshot.len()) else {
                    break;
                };
                choice[pos] += 1;
                choice[pos + 1..].fill(0);
            }
        }
        if list.len() == before {
            return present;
        }
    }
}

/// Whether `t -> x` extends to a homomorphism from the subalgebra generated by
/// `t` (`injective`: to an isomorphism that also preserves and reflects every
/// relation).
fn extends(s: &Structure, t: &[Elem], x: &[Elem], injective: bool) -> bool {
    let k = s.k() as usize;
    let pairs = generated_pairs(s, t.iter().copied().zip(x.iter().copied()));
    if (0..k).any(|a| (0..k).filter(|&b| pairs[a * k + b]).count() > 1) {
        return false;
    }
    if !injective {
        return true;
    }
    if (0..k).any(|b| (0..k).filter(|&a| pairs[a * k + b]).count() > 1) {
        return false;
    }
    let graph: Vec<(Elem, Elem)> = (0..k * k)
        .filter(|&i| pairs[i])
        .map(|i| ((i / k) as Elem, (i % k) as Elem))
        .collect();
    for rel in s.rels() {
        let r = rel.arity();
        if graph.is_empty() {
            break;
        }
        let mut choice = vec![0usize; r];
        loop {
            let left: Vec<Elem> = choice.iter().map(|&c| graph[c].0).collect();
            let right: Vec<Elem> = choice.iter().map(|&c| graph[c].1).collect();
            if rel.relation().contains(&left) != rel.relation().contains(&right) {
                return false;
            }
            let Some(pos) = (0..r).rev().find(|&j| choice[j] + 1 < graph.len()) else {
                break;
            };
            choice[pos] += 1;
            choice[pos + 1..].fill(0);
        }
    }
    true
}

/// The explicit `n`-ary family of `a` under the classification's formula
/// class, computed without term clones: the least algebraic set above `t`
/// is the set of `x` such that `t -> x` extends to a homomorphism, and the
/// atoms of the L0 Boolean algebra are the `x` reachable by an isomorphism of
/// generated substructures.
pub fn oracle_family(a: &Structure, mode: ClassifyMode, n: usize, limits: &Limits) -> Result<Vec<Relation>> {
    let base = match mode {
        ClassifyMode::Algebraic => a.algebra_reduct(),
        ClassifyMode::L0 => a.clone(),
    };
    let k = a.k();
    let points = tuple_count(k, n).ok_or_else(|| Error::guard("arity", "k^n overflows"))?;
    limits.check_memory(points, points as u64)?;
    let tuples: Vec<Vec<Elem>> = (0..points).map(|p| tuple_of_index(k, n, p)).collect();
    let injective = mode == ClassifyMode::L0;
    let seeds: Vec<Relation> = tuples
        .iter()
        .map(|t| {
            Relation::from_indices(
                k,
                n,
                (0..points).filter(|&x| extends(&base, t, &tuples[x], injective)),
            )
        })
        .collect();
    oracle_close(seeds, mode.closure_mode(), limits)
}

/// Names grouped by equality of their oracle families at arity `n`, in the
/// shape of [`ClassificationReport::fingerprint_partition`].
pub fn oracle_partition(
    structures: &[Structure],
    mode: ClassifyMode,
    n: usize,
    limits: &Limits,
) -> Result<Vec<Vec<String>>> {
    let families: Vec<(String, Vec<Relation>)> = structures
        .par_iter()
        .map(|a| Ok((a.name().to_string(), oracle_family(a, mode, n, limits)?)))
        .collect::<Result<_>>()?;
    let mut groups: BTreeMap<&[Relation], Vec<String>> = BTreeMap::new();
    for (name, family) in &families {
        groups.entry(family.as_slice()).or_default().push(name.clone());
    }
    let mut out: Vec<Vec<String>> = groups
        .into_values()
        .map(|mut v| {
            v.sort();
            v
        })
        .collect();
    out.sort();
    Ok(out)
}
