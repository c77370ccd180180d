use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::relation::{tuple_count, tuple_of_index, Elem};
use crate::structure::Structure;
use crate::syntax::Term;

/// How a clone member was first produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// The projection onto `x_i` (1-based).
    Projection(usize),
    /// A basic operation applied to earlier members.
    Apply { op: usize, args: Vec<u32> },
}

/// The `n`-ary term operations of an algebra, with one witnessing term each.
///
/// A member is stored as `k` one-hot value planes of `k^n` bits each: bit `p`
/// of plane `v` is set when the operation takes value `v` at point `p`. This
/// makes composition and equalizers word-parallel.
#[derive(Debug, Clone)]
pub struct TermClone {
    k: u32,
    arity: usize,
    points: usize,
    words: usize,
    exact: bool,
    planes: Vec<u64>,
    witnesses: Vec<Witness>,
    index: Index,
}

/// Members keyed by planes `1..k`; plane 0 is implied by the others.
#[derive(Debug, Clone)]
enum Index {
    /// Keys below `2^20`, looked up directly; `u32::MAX` marks a free slot.
    Dense(Vec<u32>),
    Word(FxHashMap<u64, u32>),
    Words(FxHashMap<Box<[u64]>, u32>),
}

impl Index {
    fn get(&self, key: &[u64]) -> Option<u32> {
        match self {
            Index::Dense(v) => Some(v[key[0] as usize]).filter(|&i| i != u32::MAX),
            Index::Word(m) => m.get(&key[0]).copied(),
            Index::Words(m) => m.get(key).copied(),
        }
    }

    fn insert(&mut self, key: &[u64], id: u32) {
        match self {
            Index::Dense(v) => v[key[0] as usize] = id,
            Index::Word(m) => {
                m.insert(key[0], id);
            }
            Index::Words(m) => {
                m.insert(key.into(), id);
            }
        }
    }
}

impl TermClone {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// False when the clone came from depth-bounded generation and may be missing members.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn len(&self) -> usize {
        self.witnesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.witnesses.is_empty()
    }

    /// Number of points of `A^n`, the length of every table.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Words per value plane.
    pub(crate) fn words(&self) -> usize {
        self.words
    }

    /// The `k` value planes of member `i`, plane after plane.
    pub(crate) fn planes(&self, i: usize) -> &[u64] {
        let stride = self.k as usize * self.words;
        &self.planes[i * stride..(i + 1) * stride]
    }

    /// Table of member `i` (row-major, argument 1 most significant).
    pub fn table(&self, i: usize) -> Vec<Elem> {
        let planes = self.planes(i);
        (0..self.points)
            .map(|p| {
                (0..self.k)
                    .find(|&v| planes[v as usize * self.words + p / 64] >> (p % 64) & 1 == 1)
                    .expect("every point has a value")
            })
            .collect()
    }

    pub fn witness(&self, i: usize) -> &Witness {
        &self.witnesses[i]
    }

    fn planes_of(&self, table: &[Elem]) -> Vec<u64> {
        let mut out = vec![0u64; self.k as usize * self.words];
        for (p, &v) in table.iter().enumerate() {
            out[v as usize * self.words + p / 64] |= 1 << (p % 64);
        }
        out
    }

    /// Index of the member with this table, if any.
    pub fn position(&self, table: &[Elem]) -> Option<usize> {
        if table.len() != self.points || table.iter().any(|&v| v >= self.k) {
            return None;
        }
        let planes = self.planes_of(table);
        self.index.get(&planes[self.words..]).map(|i| i as usize)
    }

    pub fn contains(&self, table: &[Elem]) -> bool {
        self.position(table).is_some()
    }

    /// A term inducing member `i`.
    pub fn term(&self, i: usize) -> Term {
        match &self.witnesses[i] {
            Witness::Projection(j) => Term::Var(*j as u32),
            Witness::Apply { op, args } => {
                Term::App(*op, args.iter().map(|&a| self.term(a as usize)).collect())
            }
        }
    }

    fn new(s: &Structure, n: usize) -> Result<Self> {
        let k = s.k();
        if n == 0 {
            return Err(Error::Arity("term clones need arity n >= 1".into()));
        }
        let points = tuple_count(k, n)
            .ok_or_else(|| Error::guard("arity", format!("{k}^{n} overflows")))?;
        let words = points.div_ceil(64);
        let key_bits = (k as usize - 1) * points;
        let index = if key_bits <= 20 && (k as usize - 1) * words == 1 {
            Index::Dense(vec![u32::MAX; 1 << key_bits])
        } else if (k as usize - 1) * words == 1 {
            Index::Word(FxHashMap::default())
        } else {
            Index::Words(FxHashMap::default())
        };
        Ok(TermClone {
            k,
            arity: n,
            points,
            words,
            exact: true,
            planes: Vec::new(),
            witnesses: Vec::new(),
            index,
        })
    }

    fn insert(&mut self, planes: &[u64], witness: Witness, limits: &Limits) -> Result<bool> {
        self.insert_with(planes, || witness, limits)
    }

    /// Inserts unless present; `witness` is only built for new members.
    fn insert_with(
        &mut self,
        planes: &[u64],
        witness: impl FnOnce() -> Witness,
        limits: &Limits,
    ) -> Result<bool> {
        let key = &planes[self.words..];
        if self.index.get(key).is_some() {
            return Ok(false);
        }
        if self.witnesses.len() >= limits.max_clone_size {
            return Err(Error::guard(
                "clone-size",
                format!(
                    "the {}-ary term clone has more than {} members",
                    self.arity, limits.max_clone_size
                ),
            ));
        }
        let id = self.witnesses.len() as u32;
        self.planes.extend_from_slice(planes);
        self.witnesses.push(witness());
        self.index.insert(key, id);
        Ok(true)
    }

    fn seed(&mut self, s: &Structure, limits: &Limits) -> Result<()> {
        let n = self.arity;
        for j in 0..n {
            let table: Vec<Elem> = (0..self.points)
                .map(|p| tuple_of_index(self.k, n, p)[j])
                .collect();
            let planes = self.planes_of(&table);
            self.insert(&planes, Witness::Projection(j + 1), limits)?;
        }
        for (op, t) in s.ops().iter().enumerate() {
            if t.arity() == 0 {
                let planes = self.planes_of(&vec![t.table()[0]; self.points]);
                self.insert(&planes, Witness::Apply { op, args: Vec::new() }, limits)?;
            }
        }
        Ok(())
    }

    /// Composes member `i` with every `j <= i` (both orders unless the
    /// operation is commutative) through a binary operation on a universe of
    /// size `K` whose planes fit in one word. Returns true once the clone
    /// reaches `target` members.
    fn binary_word_pass<const K: usize>(
        &mut self,
        plan: &OpPlan,
        op: usize,
        i: u32,
        target: usize,
        limits: &Limits,
    ) -> Result<bool> {
        let member = |planes: &[u64], m: u32| -> [u64; K] {
            planes[m as usize * K..(m as usize + 1) * K].try_into().unwrap()
        };
        let pa = member(&self.planes, i);
        // first[v][y]: points where op(i, y) = v, spread over y's plane;
        // second[v][x]: the same with i as the second argument
        let mut first = [[0u64; K]; K];
        let mut second = [[0u64; K]; K];
        for &(x, y, v) in &plan.binary {
            first[v as usize][y as usize] |= pa[x as usize];
            second[v as usize][x as usize] |= pa[y as usize];
        }
        for j in 0..=i {
            for (spread, flip) in [(&first, false), (&second, true)] {
                if flip && (plan.commutative || j == i) {
                    break;
                }
                let pb = member(&self.planes, j);
                let mut out = [0u64; K];
                for v in 0..K {
                    for y in 0..K {
                        out[v] |= spread[v][y] & pb[y];
                    }
                }
                let known = match &self.index {
                    Index::Dense(slots) => slots[out[1] as usize] != u32::MAX,
                    index => index.get(&out[1..]).is_some(),
                };
                if known {
                    continue;
                }
                let args = if flip { vec![j, i] } else { vec![i, j] };
                self.insert_with(&out, || Witness::Apply { op, args }, limits)?;
                if self.witnesses.len() == target {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Writes `op(args...)` into `out` as value planes.
    fn compose(&self, op: &OpPlan, args: &[u32], out: &mut [u64], scratch: &mut [u64]) {
        out.fill(0);
        let w = self.words;
        if w == 1 {
            let stride = self.k as usize;
            for (digits, v) in &op.entries {
                let mut acc = u64::MAX;
                for (&arg, &d) in args.iter().zip(digits) {
                    acc &= self.planes[arg as usize * stride + d as usize];
                }
                out[*v as usize] |= acc;
            }
            return;
        }
        for (digits, v) in &op.entries {
            scratch.fill(u64::MAX);
            for (&arg, &d) in args.iter().zip(digits) {
                let plane = &self.planes(arg as usize)[d as usize * w..(d as usize + 1) * w];
                for (s, &p) in scratch.iter_mut().zip(plane) {
                    *s &= p;
                }
            }
            let target = &mut out[*v as usize * w..(*v as usize + 1) * w];
            for (t, &s) in target.iter_mut().zip(scratch.iter()) {
                *t |= s;
            }
        }
    }
}

/// An operation table unrolled into `(argument digits, value)` entries.
struct OpPlan {
    arity: usize,
    entries: Vec<(Vec<Elem>, Elem)>,
    /// `(x, y, op(x, y))` for binary operations.
    binary: Vec<(u32, u32, u32)>,
    /// Binary and unchanged by swapping its arguments.
    commutative: bool,
}

impl OpPlan {
    fn new(k: u32, op: &crate::structure::OpTable) -> Self {
        let r = op.arity();
        let entries = op
            .table()
            .iter()
            .enumerate()
            .map(|(i, &v)| (tuple_of_index(k, r, i), v))
            .collect();
        let commutative = r == 2
            && (0..k).all(|a| (0..k).all(|b| op.apply(k, &[a, b]) == op.apply(k, &[b, a])));
        let binary = if r == 2 {
            (0..k)
                .flat_map(|x| (0..k).map(move |y| (x, y)))
                .map(|(x, y)| (x, y, op.apply(k, &[x, y])))
                .collect()
        } else {
            Vec::new()
        };
        OpPlan {
            arity: r,
            entries,
            binary,
            commutative,
        }
    }
}

/// Product over all points `x` of `|Sg(x)|`, where `Sg(x)` is the subuniverse
/// generated by the entries of `x`. Every term operation maps `x` into
/// `Sg(x)`, so a clone of this size is complete. `None` when not computable
/// or beyond `u128`.
fn completeness_bound(s: &Structure, n: usize) -> Option<u128> {
    let k = s.k();
    if k > 64 {
        return None;
    }
    let mut sg_size: FxHashMap<u64, u128> = FxHashMap::default();
    let points = tuple_count(k, n)?;
    let mut product: u128 = 1;
    for p in 0..points {
        let mask = tuple_of_index(k, n, p)
            .iter()
            .fold(0u64, |m, &a| m | (1u64 << a));
        let size = *sg_size
            .entry(mask)
            .or_insert_with(|| subuniverse(s, mask).count_ones() as u128);
        product = product.checked_mul(size)?;
    }
    Some(product)
}

/// The subuniverse generated by the elements in `mask`.
pub(crate) fn subuniverse(s: &Structure, mut mask: u64) -> u64 {
    let k = s.k();
    loop {
        let before = mask;
        for op in s.ops() {
            let r = op.arity();
            let elems: Vec<Elem> = (0..k).filter(|&a| mask >> a & 1 == 1).collect();
            let mut args = vec![0usize; r];
            loop {
                let tuple: Vec<Elem> = args.iter().map(|&i| elems[i]).collect();
                mask |= 1u64 << op.apply(k, &tuple);
                let Some(pos) = (0..r).rev().find(|&j| args[j] + 1 < elems.len()) else {
                    break;
                };
                args[pos] += 1;
                args[pos + 1..].fill(0);
            }
        }
        if mask == before {
            return mask;
        }
    }
}

/// The `n`-ary term clone of `s`, by a semi-naive fixpoint: each member is
/// composed, through every basic operation, with all members found before it.
///
/// Fails with the `clone-size` or `compositions` guard when the clone is too
/// large to generate exactly.
pub fn term_clone(s: &Structure, n: usize, limits: &Limits) -> Result<TermClone> {
    let mut clone = TermClone::new(s, n)?;
    clone.seed(s, limits)?;
    let plans: Vec<OpPlan> = s.ops().iter().map(|op| OpPlan::new(s.k(), op)).collect();
    let complete_at = completeness_bound(s, n)
        .filter(|&b| b <= limits.max_clone_size as u128)
        .map(|b| b as usize);
    let mut buf = vec![0u64; s.k() as usize * clone.words];
    let mut scratch = vec![0u64; clone.words];
    let mut compositions = 0u64;
    let mut next = 0usize;
    while next < clone.len() {
        if Some(clone.len()) == complete_at {
            break;
        }
        let i = next as u32;
        for (op, plan) in plans.iter().enumerate() {
            let r = plan.arity;
            if r == 0 {
                continue;
            }
            if r == 2 {
                // (i, j) for j <= i, then (j, i) for j < i unless commutative
                let mirrored = if plan.commutative { 0 } else { i };
                compositions += (i + 1 + mirrored) as u64;
                if compositions > limits.max_compositions {
                    return Err(compositions_guard(n, limits));
                }
                if clone.words == 1 && matches!(clone.k, 2..=4) {
                    let target = complete_at.unwrap_or(usize::MAX);
                    let done = match clone.k {
                        2 => clone.binary_word_pass::<2>(plan, op, i, target, limits)?,
                        3 => clone.binary_word_pass::<3>(plan, op, i, target, limits)?,
                        _ => clone.binary_word_pass::<4>(plan, op, i, target, limits)?,
                    };
                    if done {
                        return Ok(clone);
                    }
                    continue;
                }
                for j in 0..=i {
                    for args in [[i, j], [j, i]] {
                        if args[0] != i && (plan.commutative || j == i) {
                            continue;
                        }
                        clone.compose(plan, &args, &mut buf, &mut scratch);
                        clone.insert_with(&buf, || Witness::Apply { op, args: args.to_vec() }, limits)?;
                        if Some(clone.len()) == complete_at {
                            return Ok(clone);
                        }
                    }
                }
                continue;
            }
            // tuples over 0..=i containing i: the first i sits at position
            // `first`, earlier positions range over 0..i and later ones over 0..=i
            for first in 0..r {
                if first > 0 && (i == 0 || plan.commutative) {
                    break;
                }
                let mut args = vec![0u32; r];
                args[first] = i;
                loop {
                    compositions += 1;
                    if compositions > limits.max_compositions {
                        return Err(compositions_guard(n, limits));
                    }
                    clone.compose(plan, &args, &mut buf, &mut scratch);
                    clone.insert_with(
                        &buf,
                        || Witness::Apply {
                            op,
                            args: args.clone(),
                        },
                        limits,
                    )?;
                    let bound = |j: usize| if j < first { i } else { i + 1 };
                    let Some(pos) = (0..r).rev().find(|&j| j != first && args[j] + 1 < bound(j))
                    else {
                        break;
                    };
                    args[pos] += 1;
                    for (j, a) in args.iter_mut().enumerate().skip(pos + 1) {
                        if j != first {
                            *a = 0;
                        }
                    }
                }
            }
        }
        next += 1;
    }
    Ok(clone)
}

fn compositions_guard(n: usize, limits: &Limits) -> Error {
    Error::guard(
        "compositions",
        format!(
            "generating the {n}-ary term clone took more than {} compositions",
            limits.max_compositions
        ),
    )
}

/// The term operations given by terms of depth at most `depth`. A subset of the
/// clone, marked inexact unless it happens to reach the fixpoint.
pub fn term_clone_bounded(s: &Structure, n: usize, depth: usize, limits: &Limits) -> Result<TermClone> {
    let mut clone = TermClone::new(s, n)?;
    clone.seed(s, limits)?;
    let plans: Vec<OpPlan> = s.ops().iter().map(|op| OpPlan::new(s.k(), op)).collect();
    let mut buf = vec![0u64; s.k() as usize * clone.words];
    let mut scratch = vec![0u64; clone.words];
    let mut compositions = 0u64;
    let mut closed = false;
    for _ in 0..depth {
        let level = clone.len() as u32;
        let before = clone.len();
        for (op, plan) in plans.iter().enumerate() {
            let r = plan.arity;
            if r == 0 {
                continue;
            }
            let mut args = vec![0u32; r];
            loop {
                compositions += 1;
                if compositions > limits.max_compositions {
                    return Err(Error::guard(
                        "compositions",
                        format!("depth-bounded generation exceeded {} compositions", limits.max_compositions),
                    ));
                }
                clone.compose(plan, &args, &mut buf, &mut scratch);
                clone.insert_with(&buf, || Witness::Apply { op, args: args.clone() }, limits)?;
                let Some(pos) = (0..r).rev().find(|&j| args[j] + 1 < level) else {
                    break;
                };
                args[pos] += 1;
                args[pos + 1..].fill(0);
            }
        }
        if clone.len() == before {
            closed = true;
            break;
        }
    }
    clone.exact = closed;
    Ok(clone)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval_term, Assignment};
    use std::collections::BTreeSet;

    fn meet() -> Structure {
        Structure::parse("structure M { universe 2; op meet/2 = [0,0,0,1]; }").unwrap()
    }

    fn gf2() -> Structure {
        Structure::parse("structure GF2 { universe 2; op plus/2 = [0,1,1,0]; op times/2 = [0,0,0,1]; }")
            .unwrap()
    }

    fn tables(c: &TermClone) -> BTreeSet<Vec<Elem>> {
        (0..c.len()).map(|i| c.table(i)).collect()
    }

    /// Independent enumerator: all syntactic terms up to `depth`, evaluated pointwise.
    fn oracle_tables(s: &Structure, n: usize, depth: usize) -> BTreeSet<Vec<Elem>> {
        let k = s.k();
        let mut terms: Vec<Term> = (1..=n as u32).map(Term::Var).collect();
        for (op, t) in s.ops().iter().enumerate() {
            if t.arity() == 0 {
                terms.push(Term::App(op, vec![]));
            }
        }
        let eval = |t: &Term| -> Vec<Elem> {
            (0..tuple_count(k, n).unwrap())
                .map(|p| eval_term(t, &Assignment::new(tuple_of_index(k, n, p), k).unwrap(), s))
                .collect()
        };
        let mut seen: BTreeSet<Vec<Elem>> = terms.iter().map(eval).collect();
        for _ in 0..depth {
            let mut reps: Vec<Term> = Vec::new();
            let mut rep_tables = BTreeSet::new();
            for t in &terms {
                if rep_tables.insert(eval(t)) {
                    reps.push(t.clone());
                }
            }
            let mut next = reps.clone();
            for (op, table) in s.ops().iter().enumerate() {
                if table.arity() != 2 {
                    continue;
                }
                for a in &reps {
                    for b in &reps {
                        next.push(Term::App(op, vec![a.clone(), b.clone()]));
                    }
                }
            }
            seen.extend(next.iter().map(eval));
            terms = next;
        }
        seen
    }

    #[test]
    fn meet_clone_examples() {
        let m = meet();
        let c1 = term_clone(&m, 1, &Limits::default()).unwrap();
        assert_eq!(tables(&c1), BTreeSet::from([vec![0, 1]]));
        let c2 = term_clone(&m, 2, &Limits::default()).unwrap();
        assert_eq!(
            tables(&c2),
            BTreeSet::from([vec![0, 0, 1, 1], vec![0, 1, 0, 1], vec![0, 0, 0, 1]])
        );
        // nonempty subsets of 4 variables
        assert_eq!(term_clone(&m, 4, &Limits::default()).unwrap().len(), 15);
    }

    #[test]
    fn gf2_clone_matches_term_enumeration() {
        let g = gf2();
        for n in 1..=2 {
            let c = term_clone(&g, n, &Limits::default()).unwrap();
            assert_eq!(tables(&c), oracle_tables(&g, n, 4), "arity {n}");
        }
        // every 0-preserving unary function: 0 and id
        assert_eq!(term_clone(&g, 1, &Limits::default()).unwrap().len(), 2);
        // 0-preserving functions at arity 3: 2^7
        assert_eq!(term_clone(&g, 3, &Limits::default()).unwrap().len(), 128);
    }

    #[test]
    fn witnesses_induce_their_tables() {
        let g = gf2();
        let c = term_clone(&g, 3, &Limits::default()).unwrap();
        for i in (0..c.len()).step_by(7) {
            let t = c.term(i);
            let got: Vec<Elem> = (0..8)
                .map(|p| eval_term(&t, &Assignment::new(tuple_of_index(2, 3, p), 2).unwrap(), &g))
                .collect();
            assert_eq!(got, c.table(i));
        }
    }

    #[test]
    fn nullary_operations_are_members() {
        let s = Structure::parse("structure C { universe 3; op one/0 = [1]; op f/1 = [1,2,0]; }").unwrap();
        let c = term_clone(&s, 1, &Limits::default()).unwrap();
        // x, x+1, x+2 and the constants 1, 2, 0
        assert_eq!(c.len(), 6);
        assert!(c.contains(&[1, 1, 1]));
    }

    #[test]
    fn one_element_universe() {
        let t = Structure::parse("structure T { universe 1; op f/2 = [0]; }").unwrap();
        let c = term_clone(&t, 3, &Limits::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.table(0), vec![0]);
    }

    #[test]
    fn larger_universe_tables_round_trip() {
        let s = Structure::parse("structure Z3 { universe 3; op plus/2 = [0,1,2,1,2,0,2,0,1]; }").unwrap();
        // x, y and all a*x + b*y with (a,b) != (0,0) plus the zero map: 9 linear maps
        let c = term_clone(&s, 2, &Limits::default()).unwrap();
        assert_eq!(c.len(), 9);
        for i in 0..c.len() {
            assert_eq!(c.position(&c.table(i)), Some(i));
        }
        assert_eq!(tables(&c), oracle_tables(&s, 2, 4));
    }

    #[test]
    fn guards_trip() {
        let nand = Structure::parse("structure N { universe 2; op nand/2 = [1,1,1,0]; }").unwrap();
        let small = Limits {
            max_clone_size: 100,
            ..Limits::default()
        };
        assert!(matches!(
            term_clone(&nand, 3, &small),
            Err(Error::Guard { guard: "clone-size", .. })
        ));
        let few = Limits {
            max_compositions: 10,
            ..Limits::default()
        };
        assert!(matches!(
            term_clone(&nand, 3, &few),
            Err(Error::Guard { guard: "compositions", .. })
        ));
    }

    #[test]
    fn bounded_generation_is_a_subset() {
        let nand = Structure::parse("structure N { universe 2; op nand/2 = [1,1,1,0]; }").unwrap();
        let exact = term_clone(&nand, 2, &Limits::default()).unwrap();
        assert_eq!(exact.len(), 16);
        let shallow = term_clone_bounded(&nand, 2, 1, &Limits::default()).unwrap();
        assert!(!shallow.is_exact());
        assert!(shallow.len() < 16);
        assert!((0..shallow.len()).all(|i| exact.contains(&shallow.table(i))));
        let deep = term_clone_bounded(&nand, 2, 10, &Limits::default()).unwrap();
        assert!(deep.is_exact());
        assert_eq!(tables(&deep), tables(&exact));
    }
}
