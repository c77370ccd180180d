use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::eval::solution_set;
use crate::limits::Limits;
use crate::relation::{tuple_count, MinorMap, Relation};
use crate::spec::{ClosureMode, FormulaClassSpec, Generator};
use crate::structure::Structure;

/// The definable sets of one arity, kept as a point-closure basis.
///
/// `V_t` is the least member containing the tuple `t`. In lattice mode it is
/// the intersection of the seeds containing `t` and is undefined when no seed
/// does; in Boolean mode it is the block of `t` in the partition cut out by the
/// seeds. A set `T` is a member iff it is the union of the `V_t` for `t in T`
/// (plus the empty-set flag for `T = ∅`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefFamily {
    k: u32,
    arity: usize,
    mode: ClosureMode,
    basis: Vec<Option<Relation>>,
    top: Relation,
    empty: bool,
}

impl DefFamily {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn mode(&self) -> ClosureMode {
        self.mode
    }

    /// `V_t` for the tuple with index `t`.
    pub fn point_closure(&self, t: usize) -> Option<&Relation> {
        self.basis[t].as_ref()
    }

    /// The largest member.
    pub fn top(&self) -> &Relation {
        &self.top
    }

    /// Whether `∅` is a member.
    pub fn has_empty(&self) -> bool {
        self.empty
    }

    /// The distinct point closures in ascending order.
    pub fn distinct_closures(&self) -> Vec<Relation> {
        let mut out: Vec<Relation> = self.basis.iter().flatten().cloned().collect();
        out.sort();
        out.dedup();
        out
    }

    /// Whether `t` is a member of the family.
    pub fn member(&self, t: &Relation) -> Result<bool> {
        if t.k() != self.k {
            return Err(Error::UniverseMismatch(t.k(), self.k));
        }
        if t.arity() != self.arity {
            return Err(Error::Arity(format!(
                "query of arity {} against a family of arity {}",
                t.arity(),
                self.arity
            )));
        }
        if t.is_empty() {
            return Ok(self.empty);
        }
        if !t.is_subset(&self.top) {
            return Ok(false);
        }
        Ok(t.iter().all(|i| match &self.basis[i] {
            Some(v) => v.is_subset(t),
            None => false,
        }))
    }

    /// Builds the family generated by `seeds` under the connectives of `mode`.
    pub fn from_seeds(k: u32, arity: usize, mode: ClosureMode, seeds: &[Relation], limits: &Limits) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::EmptyGenerators);
        }
        let points = tuple_count(k, arity).ok_or_else(|| Error::guard("arity", "k^n overflows"))?;
        limits.check_memory(points, points as u64)?;
        for s in seeds {
            if s.k() != k || s.arity() != arity {
                return Err(Error::Arity("seeds must share the family's universe and arity".into()));
            }
        }
        // signature of a tuple: which seeds contain it
        let sig_words = seeds.len().div_ceil(64);
        let mut sigs = vec![0u64; points * sig_words];
        for (j, s) in seeds.iter().enumerate() {
            for t in s.iter() {
                sigs[t * sig_words + j / 64] |= 1 << (j % 64);
            }
        }
        let sig = |t: usize| &sigs[t * sig_words..(t + 1) * sig_words];

        let mut groups: FxHashMap<&[u64], Vec<usize>> = FxHashMap::default();
        for t in 0..points {
            groups.entry(sig(t)).or_default().push(t);
        }
        let mut basis: Vec<Option<Relation>> = vec![None; points];
        let (top, empty) = match mode {
            ClosureMode::Lattice => {
                for (signature, members) in &groups {
                    if signature.iter().all(|&w| w == 0) {
                        continue;
                    }
                    let mut v = Relation::full(k, arity);
                    for (j, s) in seeds.iter().enumerate() {
                        if signature[j / 64] >> (j % 64) & 1 == 1 {
                            v.and_assign(s);
                        }
                    }
                    for &t in members {
                        basis[t] = Some(v.clone());
                    }
                }
                let mut top = Relation::empty(k, arity);
                let mut meet = Relation::full(k, arity);
                for s in seeds {
                    top.or_assign(s);
                    meet.and_assign(s);
                }
                (top, meet.is_empty())
            }
            ClosureMode::Boolean => {
                for members in groups.values() {
                    let block = Relation::from_indices(k, arity, members.iter().copied());
                    for &t in members {
                        basis[t] = Some(block.clone());
                    }
                }
                // the complement of any seed meets the seed in ∅
                (Relation::full(k, arity), true)
            }
        };
        Ok(DefFamily {
            k,
            arity,
            mode,
            basis,
            top,
            empty,
        })
    }
}

/// The relation a generator denotes over its own arity.
pub(crate) fn generator_relation(a: &Structure, g: &Generator, limits: &Limits) -> Result<Relation> {
    match g {
        Generator::Formula(phi) => solution_set(phi, g.arity(), a, limits),
        Generator::Relation(r) => {
            if r.k() != a.k() {
                return Err(Error::UniverseMismatch(r.k(), a.k()));
            }
            Ok(r.clone())
        }
    }
}

/// Every `n`-ary minor of every generator, deduplicated and sorted.
pub fn seeds(a: &Structure, spec: &FormulaClassSpec, n: usize, limits: &Limits) -> Result<Vec<Relation>> {
    if n == 0 {
        return Err(Error::Arity("definable families need arity n >= 1".into()));
    }
    limits.check_arity(a.k(), n)?;
    spec.validate(a, limits)?;
    let maps: u64 = spec
        .generators()
        .iter()
        .map(|g| (n as u64).checked_pow(g.arity() as u32).unwrap_or(u64::MAX))
        .fold(0u64, u64::saturating_add);
    if maps > limits.max_seed_maps {
        return Err(Error::guard(
            "seed-maps",
            format!("seeding arity {n} needs {maps} minor maps, cap is {}", limits.max_seed_maps),
        ));
    }
    let mut seen = FxHashSet::default();
    for g in spec.generators() {
        let base = generator_relation(a, g, limits)?;
        for map in MinorMap::all(base.arity(), n) {
            seen.insert(base.minor(&map)?);
        }
    }
    let mut out: Vec<Relation> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// The family of `n`-ary sets definable in `a` by the class `spec`.
pub fn def_family(a: &Structure, spec: &FormulaClassSpec, n: usize, limits: &Limits) -> Result<DefFamily> {
    let seeds = seeds(a, spec, n, limits)?;
    DefFamily::from_seeds(a.k(), n, spec.mode(), &seeds, limits)
}
