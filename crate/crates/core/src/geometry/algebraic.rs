use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::relation::{tuple_count, tuple_of_index, Elem, Relation};
use crate::structure::Structure;
use crate::syntax::Term;

use super::clone::{term_clone, term_clone_bounded, TermClone};

/// Where a member of an algebraic family came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// `A^n`, the solution set of `x1 = x1`.
    Top,
    /// `{x : f(x) = g(x)}` for clone members `f`, `g`.
    Equalizer(u32, u32),
    /// The intersection of two earlier members.
    Meet(u32, u32),
}

/// The algebraic sets of one arity: all intersections of equalizers of term
/// operations, closed under finite intersection and containing `A^n`.
#[derive(Debug, Clone)]
pub struct AlgebraicFamily {
    clone: TermClone,
    members: Vec<Relation>,
    provenance: Vec<Provenance>,
    index: FxHashMap<Relation, u32>,
    /// Members that are not intersections of strictly larger members, `A^n` excluded.
    irreducible: Vec<u32>,
}

impl AlgebraicFamily {
    pub fn k(&self) -> u32 {
        self.clone.k()
    }

    pub fn arity(&self) -> usize {
        self.clone.arity()
    }

    /// False when built from a depth-bounded clone.
    pub fn is_exact(&self) -> bool {
        self.clone.is_exact()
    }

    pub fn term_clone(&self) -> &TermClone {
        &self.clone
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Relation] {
        &self.members
    }

    pub fn contains(&self, r: &Relation) -> bool {
        self.index.contains_key(r)
    }

    pub fn position(&self, r: &Relation) -> Option<usize> {
        self.index.get(r).map(|&i| i as usize)
    }

    pub fn provenance(&self, i: usize) -> Provenance {
        self.provenance[i]
    }

    /// Clone-member pairs `(f, g)` whose equations `f = g` jointly define member `i`.
    /// Empty for `A^n`.
    pub fn defining_equations(&self, i: usize) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        let mut stack = vec![i as u32];
        while let Some(j) = stack.pop() {
            match self.provenance[j as usize] {
                Provenance::Top => {}
                Provenance::Equalizer(f, g) => out.push((f, g)),
                Provenance::Meet(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The defining equations of member `i` as term pairs.
    pub fn defining_terms(&self, i: usize) -> Vec<(Term, Term)> {
        self.defining_equations(i)
            .into_iter()
            .map(|(f, g)| (self.clone.term(f as usize), self.clone.term(g as usize)))
            .collect()
    }

    /// The meet-irreducible members.
    pub fn irreducible(&self) -> impl Iterator<Item = &Relation> {
        self.irreducible.iter().map(|&i| &self.members[i as usize])
    }

    /// `A^n` followed by the meet-irreducible members: a generating set under
    /// intersection, largest first.
    pub fn generators(&self) -> Vec<Relation> {
        std::iter::once(self.members[0].clone())
            .chain(self.irreducible().cloned())
            .collect()
    }

    /// The least member containing the tuple with index `t`.
    pub fn point_closure(&self, t: usize) -> Relation {
        let mut v = self.members[0].clone();
        for g in self.irreducible() {
            if g.contains_index(t) {
                v.and_assign(g);
            }
        }
        v
    }
}

/// Table of the term operation `t` at arity `n`.
fn term_table(t: &Term, n: usize, s: &Structure) -> Result<Vec<Elem>> {
    let k = s.k();
    let points = tuple_count(k, n).ok_or_else(|| Error::guard("arity", format!("{k}^{n} overflows")))?;
    Ok(match t {
        Term::Var(v) => {
            let v = *v as usize;
            if v == 0 || v > n {
                return Err(Error::Arity(format!("term variable x{v} exceeds arity {n}")));
            }
            (0..points).map(|p| tuple_of_index(k, n, p)[v - 1]).collect()
        }
        Term::Const(c) => vec![*c; points],
        Term::App(op, args) => {
            let args = args
                .iter()
                .map(|a| term_table(a, n, s))
                .collect::<Result<Vec<_>>>()?;
            let table = s.op(*op).table();
            (0..points)
                .map(|p| table[args.iter().fold(0usize, |acc, a| acc * k as usize + a[p] as usize)])
                .collect()
        }
    })
}

/// `{x in A^n : s(x) = t(x)}`, computed from the two term tables.
pub fn equation_solution(s: &Term, t: &Term, n: usize, a: &Structure, limits: &Limits) -> Result<Relation> {
    limits.check_arity(a.k(), n)?;
    let ls = term_table(s, n, a)?;
    let rs = term_table(t, n, a)?;
    Ok(Relation::from_indices(
        a.k(),
        n,
        (0..ls.len()).filter(|&p| ls[p] == rs[p]),
    ))
}

/// The exact algebraic family of `a` at arity `n`.
pub fn algebraic_family(a: &Structure, n: usize, limits: &Limits) -> Result<AlgebraicFamily> {
    limits.check_arity(a.k(), n)?;
    family_from_clone(term_clone(a, n, limits)?, limits)
}

/// The family generated by equalizers of terms of depth at most `depth`.
/// Inexact unless the bounded clone reached the fixpoint.
pub fn algebraic_family_bounded(
    a: &Structure,
    n: usize,
    depth: usize,
    limits: &Limits,
) -> Result<AlgebraicFamily> {
    limits.check_arity(a.k(), n)?;
    family_from_clone(term_clone_bounded(a, n, depth, limits)?, limits)
}

/// Equalizer of members `i` and `j` written into `out`.
fn equalizer(clone: &TermClone, i: usize, j: usize, out: &mut [u64]) {
    out.fill(0);
    let w = clone.words();
    let (a, b) = (clone.planes(i), clone.planes(j));
    for v in 0..clone.k() as usize {
        for (o, (x, y)) in out.iter_mut().zip(a[v * w..(v + 1) * w].iter().zip(&b[v * w..(v + 1) * w])) {
            *o |= x & y;
        }
    }
}

/// An equalizer's bit words and the clone pair it came from.
type Equalizer = (Vec<u64>, (u32, u32));

/// All distinct equalizers of clone pairs, `A^n` included.
fn equalizers(clone: &TermClone, limits: &Limits) -> Result<Vec<Equalizer>> {
    let points = clone.points();
    let words = points.div_ceil(64);
    // points where every member agrees lie in every equalizer, so at most
    // 2^(free points) distinct equalizers exist
    let mut buf = vec![0u64; words];
    let mut agree = Relation::full(clone.k(), clone.arity()).words().to_vec();
    for i in 1..clone.len() {
        equalizer(clone, 0, i, &mut buf);
        agree.iter_mut().zip(&buf).for_each(|(a, b)| *a &= b);
    }
    let free = points - agree.iter().map(|w| w.count_ones() as usize).sum::<usize>();
    let ceiling = if free < 63 { Some(1usize << free) } else { None };
    let mut seen: FxHashSet<Vec<u64>> = FxHashSet::default();
    let mut out = Vec::new();
    let mut pairs = 0u64;
    equalizer(clone, 0, 0, &mut buf);
    seen.insert(buf.clone());
    out.push((buf.clone(), (0, 0)));
    'outer: for i in 0..clone.len() {
        for j in i + 1..clone.len() {
            if Some(out.len()) == ceiling {
                break 'outer;
            }
            pairs += 1;
            if pairs > limits.max_compositions {
                return Err(Error::guard(
                    "compositions",
                    format!("more than {} equalizer pairs", limits.max_compositions),
                ));
            }
            equalizer(clone, i, j, &mut buf);
            if !seen.contains(buf.as_slice()) {
                if out.len() >= limits.max_family_size {
                    return Err(Error::guard(
                        "family-size",
                        format!("more than {} distinct equalizers", limits.max_family_size),
                    ));
                }
                seen.insert(buf.clone());
                out.push((buf.clone(), (i as u32, j as u32)));
            }
        }
    }
    Ok(out)
}

/// Closes the equalizers under intersection, keeping a provenance DAG.
///
/// Generators are processed from largest to smallest and skipped when already
/// present; a generator that is not skipped is not an intersection of strictly
/// larger members, so it is meet-irreducible.
fn family_from_clone(clone: TermClone, limits: &Limits) -> Result<AlgebraicFamily> {
    let k = clone.k();
    let n = clone.arity();
    let points = clone.points() as u64;
    let raw = equalizers(&clone, limits)?;
    let mut eqs: Vec<(Relation, (u32, u32))> = raw
        .into_iter()
        .map(|(w, pair)| (Relation::from_words(k, n, w), pair))
        .collect();
    eqs.sort_by(|(a, _), (b, _)| b.len().cmp(&a.len()).then_with(|| b.cmp(a)));

    let mut members: Vec<Relation> = Vec::new();
    let mut provenance = Vec::new();
    let mut index: FxHashMap<Relation, u32> = FxHashMap::default();
    let mut irreducible = Vec::new();
    let top = Relation::full(k, n);
    index.insert(top.clone(), 0);
    members.push(top);
    provenance.push(Provenance::Top);

    for (g, pair) in eqs {
        if index.contains_key(&g) {
            continue;
        }
        limits.check_memory(members.len() * 2 + 1, points)?;
        let gid = members.len() as u32;
        index.insert(g.clone(), gid);
        members.push(g.clone());
        provenance.push(Provenance::Equalizer(pair.0, pair.1));
        irreducible.push(gid);
        let existing = members.len() - 1;
        for u in 0..existing {
            let mut meet = members[u].clone();
            meet.and_assign(&g);
            if index.contains_key(&meet) {
                continue;
            }
            if members.len() >= limits.max_family_size {
                return Err(Error::guard(
                    "family-size",
                    format!("the algebraic family at arity {n} exceeds {} members", limits.max_family_size),
                ));
            }
            index.insert(meet.clone(), members.len() as u32);
            members.push(meet);
            provenance.push(Provenance::Meet(u as u32, gid));
        }
    }
    Ok(AlgebraicFamily {
        clone,
        members,
        provenance,
        index,
        irreducible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::solution_set;
    use crate::syntax::Formula;

    fn meet() -> Structure {
        Structure::parse("structure M { universe 2; op meet/2 = [0,0,0,1]; }").unwrap()
    }

    fn gf2() -> Structure {
        Structure::parse("structure GF2 { universe 2; op plus/2 = [0,1,1,0]; op times/2 = [0,0,0,1]; }")
            .unwrap()
    }

    fn terms(text: &str, s: &Structure) -> (Term, Term) {
        match Formula::parse(text, s).unwrap() {
            Formula::Equal(a, b) => (a, b),
            _ => unreachable!(),
        }
    }

    #[test]
    fn equation_solution_examples() {
        let l = Limits::default();
        let m = meet();
        let (a, b) = terms("x1 = x2", &m);
        assert_eq!(equation_solution(&a, &b, 2, &m, &l).unwrap(), Relation::from_indices(2, 2, [0, 3]));
        let (a, b) = terms("meet(x1,x2) = x1", &m);
        // the order 0 <= 1
        assert_eq!(
            equation_solution(&a, &b, 2, &m, &l).unwrap(),
            Relation::from_indices(2, 2, [0, 1, 3])
        );
        let g = gf2();
        let text = "times(plus(x1,x2),plus(x3,x4)) = plus(x1,x1)";
        let (a, b) = terms(text, &g);
        let fused = equation_solution(&a, &b, 4, &g, &l).unwrap();
        assert_eq!(fused, solution_set(&Formula::parse(text, &g).unwrap(), 4, &g, &l).unwrap());
        assert_eq!(fused.len(), 12);
        assert_eq!(equation_solution(&b, &a, 4, &g, &l).unwrap(), fused);
        assert!(equation_solution(&a, &a, 4, &g, &l).unwrap().is_full());
    }

    #[test]
    fn family_examples() {
        let l = Limits::default();
        let f = algebraic_family(&meet(), 1, &l).unwrap();
        assert_eq!(f.members(), &[Relation::full(2, 1)]);
        let g = algebraic_family(&gf2(), 2, &l).unwrap();
        assert!(g.contains(&Relation::from_indices(2, 2, [0, 3])));
        assert!(g.contains(&Relation::full(2, 2)));
    }

    #[test]
    fn family_is_intersection_closed_with_valid_provenance() {
        let l = Limits::default();
        for s in [meet(), gf2()] {
            for n in 1..=3 {
                let f = algebraic_family(&s, n, &l).unwrap();
                for a in f.members() {
                    for b in f.members() {
                        assert!(f.contains(&a.intersect(b).unwrap()));
                    }
                }
                for i in 0..f.len() {
                    let mut r = Relation::full(2, n);
                    for (s_t, t_t) in f.defining_terms(i) {
                        r.and_assign(&equation_solution(&s_t, &t_t, n, &s, &l).unwrap());
                    }
                    assert_eq!(&r, &f.members()[i]);
                }
            }
        }
    }

    #[test]
    fn irreducibles_generate_and_are_irreducible() {
        let f = algebraic_family(&meet(), 3, &Limits::default()).unwrap();
        // closing the generators under intersection gives back the family
        let mut closed: FxHashSet<Relation> = f.generators().into_iter().collect();
        loop {
            let snapshot: Vec<Relation> = closed.iter().cloned().collect();
            let before = closed.len();
            for a in &snapshot {
                for b in &snapshot {
                    closed.insert(a.intersect(b).unwrap());
                }
            }
            if closed.len() == before {
                break;
            }
        }
        assert_eq!(closed.len(), f.len());
        for g in f.irreducible() {
            let above: Vec<&Relation> = f
                .members()
                .iter()
                .filter(|m| g.is_subset(m) && *m != g)
                .collect();
            let mut meet = Relation::full(2, 3);
            above.iter().for_each(|m| meet.and_assign(m));
            assert_ne!(&meet, g);
        }
    }

    #[test]
    fn point_closure_is_least_member() {
        let f = algebraic_family(&gf2(), 3, &Limits::default()).unwrap();
        for t in 0..8 {
            let v = f.point_closure(t);
            assert!(v.contains_index(t));
            assert!(f.contains(&v));
            for m in f.members().iter().filter(|m| m.contains_index(t)) {
                assert!(v.is_subset(m));
            }
        }
    }
}
