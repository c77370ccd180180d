//! A naive verifier for the closure engine.
//!
//! Nothing here goes through [`super::family`]: formula generators are seeded
//! by syntactic substitution followed by evaluation, relation generators by a
//! direct tuple scan, and families are closed explicitly.

use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::eval::solution_set;
use crate::limits::Limits;
use crate::relation::{tuple_count, tuple_of_index, Relation};
use crate::spec::{ClosureMode, FormulaClassSpec, Generator};
use crate::structure::Structure;
use crate::syntax::{substitute, Var};

/// Every `n`-ary minor of every generator, sorted and deduplicated.
pub fn oracle_seeds(a: &Structure, spec: &FormulaClassSpec, n: usize, limits: &Limits) -> Result<Vec<Relation>> {
    if n == 0 {
        return Err(Error::Arity("definable families need arity n >= 1".into()));
    }
    limits.check_arity(a.k(), n)?;
    spec.validate(a, limits)?;
    let k = a.k();
    let points = tuple_count(k, n).ok_or_else(|| Error::guard("arity", "k^n overflows"))?;
    let tuples: Vec<Vec<u32>> = (0..points).map(|i| tuple_of_index(k, n, i)).collect();
    let mut out = FxHashSet::default();
    for g in spec.generators() {
        let r = g.arity();
        let mut sigma: Vec<Var> = vec![1; r];
        loop {
            let seed = match g {
                Generator::Formula(phi) => solution_set(&substitute(phi, &sigma)?, n, a, limits)?,
                Generator::Relation(rel) => {
                    let mut s = Relation::empty(k, n);
                    let mut image = vec![0; r];
                    for (i, t) in tuples.iter().enumerate() {
                        for (slot, &j) in image.iter_mut().zip(&sigma) {
                            *slot = t[j as usize - 1];
                        }
                        if rel.contains(&image) {
                            s.insert(i);
                        }
                    }
                    s
                }
            };
            out.insert(seed);
            // next sigma in lexicographic order
            let Some(pos) = sigma.iter().rposition(|&j| (j as usize) < n) else {
                break;
            };
            sigma[pos] += 1;
            for j in &mut sigma[pos + 1..] {
                *j = 1;
            }
        }
    }
    let mut out: Vec<Relation> = out.into_iter().collect();
    out.sort();
    Ok(out)
}

fn close(
    family: &mut Vec<Relation>,
    present: &mut FxHashSet<Relation>,
    incoming: Vec<Relation>,
    op: impl Fn(&Relation, &Relation) -> Relation,
    limits: &Limits,
) -> Result<()> {
    for g in incoming {
        if present.contains(&g) {
            continue;
        }
        let mut fresh = vec![g.clone()];
        for f in family.iter() {
            let h = op(&g, f);
            if !present.contains(&h) {
                fresh.push(h);
            }
        }
        for h in fresh {
            if present.insert(h.clone()) {
                family.push(h);
            }
        }
        if family.len() > limits.max_oracle_family {
            return Err(Error::guard(
                "oracle-family",
                format!("explicit family exceeds {} members", limits.max_oracle_family),
            ));
        }
    }
    Ok(())
}

/// The explicit family of `n`-ary definable sets, ascending.
pub fn oracle_def(a: &Structure, spec: &FormulaClassSpec, n: usize, limits: &Limits) -> Result<Vec<Relation>> {
    let seeds = oracle_seeds(a, spec, n, limits)?;
    oracle_close(seeds, spec.mode(), limits)
}

/// Closes `seeds` explicitly under the connectives of `mode`, ascending.
///
/// Seeds (and their complements in Boolean mode) are closed under `∩`, then
/// the result under `∪`. Union distributes over intersection, so the second
/// pass keeps the first pass's closure.
pub fn oracle_close(mut seeds: Vec<Relation>, mode: ClosureMode, limits: &Limits) -> Result<Vec<Relation>> {
    if mode == ClosureMode::Boolean {
        let complements: Vec<Relation> = seeds.iter().map(Relation::complement).collect();
        seeds.extend(complements);
    }
    seeds.sort_by(|x, y| y.len().cmp(&x.len()).then_with(|| y.cmp(x)));
    let mut meets = Vec::new();
    let mut present = FxHashSet::default();
    close(&mut meets, &mut present, seeds, |x, y| x.intersect(y).unwrap(), limits)?;

    meets.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    let mut family = Vec::new();
    let mut present = FxHashSet::default();
    close(&mut family, &mut present, meets, |x, y| x.union(y).unwrap(), limits)?;
    family.sort();
    Ok(family)
}

/// A family given by the least member above each tuple, computed by comparing
/// seed signatures tuple against tuple. Used where explicit enumeration is
/// out of reach.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleBasis {
    k: u32,
    arity: usize,
    closures: Vec<Option<Relation>>,
    covered: Relation,
    empty: bool,
}

impl OracleBasis {
    pub fn new(a: &Structure, spec: &FormulaClassSpec, n: usize, limits: &Limits) -> Result<OracleBasis> {
        let seeds = oracle_seeds(a, spec, n, limits)?;
        let k = a.k();
        let points = tuple_count(k, n).ok_or_else(|| Error::guard("arity", "k^n overflows"))?;
        let sigs: Vec<Vec<bool>> = (0..points)
            .map(|t| seeds.iter().map(|s| s.contains_index(t)).collect())
            .collect();
        let boolean = spec.mode() == ClosureMode::Boolean;
        let closures = (0..points)
            .map(|t| {
                if !boolean && !sigs[t].iter().any(|&b| b) {
                    return None;
                }
                let above = (0..points).filter(|&x| {
                    sigs[t].iter().zip(&sigs[x]).all(|(&in_t, &in_x)| {
                        if boolean {
                            in_t == in_x
                        } else {
                            !in_t || in_x
                        }
                    })
                });
                Some(Relation::from_indices(k, n, above))
            })
            .collect::<Vec<_>>();
        let covered = Relation::from_indices(k, n, (0..points).filter(|&t| closures[t].is_some()));
        let empty = boolean || (0..points).all(|t| !sigs[t].iter().all(|&b| b));
        Ok(OracleBasis {
            k,
            arity: n,
            closures,
            covered,
            empty,
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// The least member containing tuple `t`, if any member does.
    pub fn closure(&self, t: usize) -> Option<&Relation> {
        self.closures[t].as_ref()
    }

    /// The union of all members.
    pub fn covered(&self) -> &Relation {
        &self.covered
    }

    pub fn has_empty(&self) -> bool {
        self.empty
    }

    /// Whether `t` is the union of the least members above its tuples.
    pub fn member(&self, t: &Relation) -> bool {
        if t.is_empty() {
            return self.empty;
        }
        t.is_subset(&self.covered)
            && t.iter().all(|i| self.closures[i].as_ref().is_some_and(|v| v.is_subset(t)))
    }

    /// Whether both describe the same family.
    pub fn same_family(&self, other: &OracleBasis) -> bool {
        self == other
    }
}
