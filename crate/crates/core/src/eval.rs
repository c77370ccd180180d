//! Tarskian evaluation of terms and formulas over a finite structure.
//!
//! Solution sets are computed by enumerating all `k^n` assignments; quantifiers
//! iterate the universe in order `0..k` and stop at the first witness.

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::relation::{tuple_count, Elem, Relation};
use crate::structure::Structure;
use crate::syntax::{Formula, Term, Var};

/// Values for `x1..xn`; position `i` holds the value of `x_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment(Vec<Elem>);

impl Assignment {
    pub fn new(values: Vec<Elem>, k: u32) -> Result<Self> {
        if let Some(&a) = values.iter().find(|&&a| a >= k) {
            return Err(Error::OutOfRange(format!("assignment value {a} in universe of size {k}")));
        }
        Ok(Assignment(values))
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[Elem] {
        &self.0
    }
}

/// Variable environment indexed by variable number; slot 0 is unused.
fn environment(a: &[Elem], extra: Var) -> Vec<Elem> {
    let mut env = vec![0; a.len().max(extra as usize) + 1];
    env[1..=a.len()].copy_from_slice(a);
    env
}

fn term_value(t: &Term, env: &[Elem], s: &Structure) -> Elem {
    match t {
        Term::Var(v) => env[*v as usize],
        Term::Const(c) => *c,
        Term::App(op, args) => {
            let k = s.k() as usize;
            let idx = args
                .iter()
                .fold(0usize, |acc, a| acc * k + term_value(a, env, s) as usize);
            s.op(*op).table()[idx]
        }
    }
}

fn holds(phi: &Formula, env: &mut [Elem], s: &Structure) -> bool {
    match phi {
        Formula::Equal(l, r) => term_value(l, env, s) == term_value(r, env, s),
        Formula::Atom(rel, args) => {
            let k = s.k() as usize;
            let idx = args
                .iter()
                .fold(0usize, |acc, a| acc * k + term_value(a, env, s) as usize);
            s.rel(*rel).relation().contains_index(idx)
        }
        Formula::And(fs) => fs.iter().all(|f| holds(f, env, s)),
        Formula::Or(fs) => fs.iter().any(|f| holds(f, env, s)),
        Formula::Not(f) => !holds(f, env, s),
        Formula::Exists(v, f) => quantify(*v, f, env, s, true),
        Formula::Forall(v, f) => quantify(*v, f, env, s, false),
    }
}

fn quantify(v: Var, body: &Formula, env: &mut [Elem], s: &Structure, exists: bool) -> bool {
    let slot = v as usize;
    let saved = env[slot];
    let mut result = !exists;
    for a in 0..s.k() {
        env[slot] = a;
        if holds(body, env, s) == exists {
            result = exists;
            break;
        }
    }
    env[slot] = saved;
    result
}

/// Value of the term operation induced by `t` at `a`.
///
/// Panics if `t` mentions a variable beyond `a.arity()`.
pub fn eval_term(t: &Term, a: &Assignment, s: &Structure) -> Elem {
    assert!(
        t.max_var() as usize <= a.arity(),
        "term variable x{} is not assigned",
        t.max_var()
    );
    term_value(t, &environment(a.values(), 0), s)
}

/// Whether `s |= phi(a)`.
///
/// Panics if a free variable of `phi` lies beyond `a.arity()`.
pub fn satisfies(phi: &Formula, a: &Assignment, s: &Structure) -> bool {
    let free = phi.free_arity();
    assert!(free <= a.arity(), "free variable x{free} is not assigned");
    let mut env = environment(a.values(), phi.max_var());
    holds(phi, &mut env, s)
}

/// `{ a in A^n | s |= phi(a) }`.
pub fn solution_set(phi: &Formula, n: usize, s: &Structure, limits: &Limits) -> Result<Relation> {
    solution_set_counted(phi, n, s, limits).map(|(r, _)| r)
}

/// [`solution_set`] together with the number of assignments visited.
pub fn solution_set_counted(
    phi: &Formula,
    n: usize,
    s: &Structure,
    limits: &Limits,
) -> Result<(Relation, u64)> {
    let k = s.k();
    if n == 0 {
        return Err(Error::Arity("solution sets need arity n >= 1".into()));
    }
    limits.check_arity(k, n)?;
    let free = phi.free_arity();
    if free > n {
        return Err(Error::Arity(format!(
            "formula has free variable x{free} but the requested arity is {n}"
        )));
    }
    let total = tuple_count(k, n).ok_or_else(|| Error::guard("arity", "k^n overflows"))?;
    let mut env = environment(&vec![0; n], phi.max_var());
    let mut out = Relation::empty(k, n);
    let mut visited = 0u64;
    for idx in 0..total {
        visited += 1;
        if holds(phi, &mut env, s) {
            out.insert(idx);
        }
        // advance x1..xn as an odometer with xn fastest
        for v in (1..=n).rev() {
            if env[v] + 1 < k {
                env[v] += 1;
                break;
            }
            env[v] = 0;
        }
    }
    Ok((out, visited))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::tuple_of_index;

    fn gf2() -> Structure {
        Structure::parse(
            "structure GF2 { universe 2; op plus/2 = [0,1,1,0]; op times/2 = [0,0,0,1]; }",
        )
        .unwrap()
    }

    fn asg(v: &[Elem]) -> Assignment {
        Assignment::new(v.to_vec(), 2).unwrap()
    }

    fn term(text: &str, s: &Structure) -> Term {
        match Formula::parse(&format!("{text} = x1"), s).unwrap() {
            Formula::Equal(t, _) => t,
            _ => unreachable!(),
        }
    }

    #[test]
    fn eval_term_examples() {
        let g = gf2();
        assert_eq!(eval_term(&term("x1", &g), &asg(&[1, 0]), &g), 1);
        assert_eq!(eval_term(&term("plus(x1,x2)", &g), &asg(&[1, 1]), &g), 0);
        // (1 xor 0) and 1 = 1
        assert_eq!(
            eval_term(&term("times(plus(x1,x2),x3)", &g), &asg(&[1, 0, 1]), &g),
            1
        );
    }

    #[test]
    fn satisfies_examples() {
        let g = gf2();
        let f = |t: &str| Formula::parse(t, &g).unwrap();
        assert!(satisfies(&f("x1 = x1"), &asg(&[0]), &g));
        assert!(!satisfies(&f("x1 = x2"), &asg(&[0, 1]), &g));
        assert!(satisfies(&f("exists x2 (times(x2,x2) = x1)"), &asg(&[1]), &g));
        assert!(!satisfies(&f("forall x2 (times(x2,x2) = x1)"), &asg(&[1]), &g));
    }

    #[test]
    fn solution_set_examples() {
        let g = gf2();
        let l = Limits::default();
        let f = |t: &str| Formula::parse(t, &g).unwrap();
        let eq = Relation::from_indices(2, 2, [0, 3]);
        assert_eq!(solution_set(&f("x1 = x2"), 2, &g, &l).unwrap(), eq);
        assert_eq!(solution_set(&f("plus(x1,x2) = 0"), 2, &g, &l).unwrap(), eq);

        // oracle: brute force over all 16 tuples
        let got = solution_set(&f("x1 = x2 \\/ x3 = x4"), 4, &g, &l).unwrap();
        let expected = Relation::from_indices(
            2,
            4,
            (0..16).filter(|&i| {
                let t = tuple_of_index(2, 4, i);
                t[0] == t[1] || t[2] == t[3]
            }),
        );
        assert_eq!(got, expected);
        // 8 with a=b, 8 with c=d, 4 with both
        assert_eq!(got.len(), 12);
    }

    #[test]
    fn solution_set_guards() {
        let g = gf2();
        let l = Limits::default();
        let phi = Formula::parse("x1 = x3", &g).unwrap();
        assert!(matches!(solution_set(&phi, 2, &g, &l), Err(Error::Arity(_))));
        assert!(matches!(solution_set(&phi, 0, &g, &l), Err(Error::Arity(_))));
        let capped = Limits {
            max_arity: Some(3),
            ..Limits::default()
        };
        assert!(matches!(
            solution_set(&phi, 4, &g, &capped),
            Err(Error::Guard { guard: "arity", .. })
        ));
    }

    #[test]
    fn visits_each_assignment_once() {
        let g = gf2();
        let phi = Formula::parse("exists x9 (plus(x1,x9) = x2)", &g).unwrap();
        for n in 2..=6 {
            let (_, visited) = solution_set_counted(&phi, n, &g, &Limits::default()).unwrap();
            assert_eq!(visited, 1 << n);
        }
    }
}
