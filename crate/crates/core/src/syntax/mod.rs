//! Terms and first-order formulas over the variables `x1, x2, ...`.
//!
//! Symbols are resolved against a [`Structure`] at parse time and stored as
//! indices into its operation and relation lists.

mod lexer;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::relation::Elem;
use crate::structure::Structure;

pub use parser::{parse_formula, parse_structure};

/// A variable index, `>= 1` (`x1` is `1`).
pub type Var = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    /// A universe element written as a literal.
    Const(Elem),
    /// An operation symbol (index into the structure's ops) applied to arguments.
    App(usize, Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Equal(Term, Term),
    /// A relation symbol (index into the structure's rels) applied to arguments.
    Atom(usize, Vec<Term>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

impl Term {
    pub fn var(i: Var) -> Term {
        Term::Var(i)
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn rename(&self, map: &BTreeMap<Var, Var>) -> Term {
        match self {
            Term::Var(v) => Term::Var(*map.get(v).unwrap_or(v)),
            Term::Const(c) => Term::Const(*c),
            Term::App(op, args) => Term::App(*op, args.iter().map(|a| a.rename(map)).collect()),
        }
    }

    /// Largest variable index occurring in the term, 0 if none.
    pub fn max_var(&self) -> Var {
        self.vars().last().copied().unwrap_or(0)
    }

    pub fn display<'a>(&'a self, ctx: &'a Structure) -> TermDisplay<'a> {
        TermDisplay { term: self, ctx }
    }
}

impl Formula {
    pub fn equal(s: Term, t: Term) -> Formula {
        Formula::Equal(s, t)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(phi: Formula) -> Formula {
        Formula::Not(Box::new(phi))
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Forall(v, Box::new(body))
    }

    pub fn parse(text: &str, ctx: &Structure) -> Result<Formula> {
        parse_formula(text, ctx)
    }

    /// The set of free variables.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let add_term = |t: &Term, out: &mut BTreeSet<Var>| {
            for v in t.vars() {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Formula::Equal(s, t) => {
                add_term(s, out);
                add_term(t, out);
            }
            Formula::Atom(_, args) => args.iter().for_each(|a| add_term(a, out)),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().for_each(|f| f.collect_free(bound, out))
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(*v);
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable occurring in the formula, free or bound.
    pub fn occurring_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_all(&mut out);
        out
    }

    fn collect_all(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::Equal(s, t) => {
                s.collect_vars(out);
                t.collect_vars(out);
            }
            Formula::Atom(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_all(out)),
            Formula::Not(f) => f.collect_all(out),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                out.insert(*v);
                f.collect_all(out);
            }
        }
    }

    /// Largest free variable index, 0 for sentences.
    pub fn free_arity(&self) -> usize {
        self.free_vars().last().copied().unwrap_or(0) as usize
    }

    /// Largest variable index occurring anywhere, 0 if none.
    pub fn max_var(&self) -> Var {
        self.occurring_vars().last().copied().unwrap_or(0)
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Equal(..) | Formula::Atom(..) => true,
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    pub fn display<'a>(&'a self, ctx: &'a Structure) -> FormulaDisplay<'a> {
        FormulaDisplay { formula: self, ctx }
    }
}

/// The minor `phi(x_sigma(1), ..., x_sigma(n))`: simultaneous substitution of
/// `x_i` by `x_sigma(i)`, where `sigma[i - 1] = sigma(i)`.
///
/// A bound variable whose index lies in the range of `sigma` is renamed to the
/// smallest index occurring neither in `phi` nor in that range (nor already
/// chosen for an enclosing binder).
pub fn substitute(phi: &Formula, sigma: &[Var]) -> Result<Formula> {
    let n = sigma.len();
    if let Some(&v) = phi.free_vars().iter().find(|&&v| v as usize > n || v == 0) {
        return Err(Error::Substitution { var: v, domain: n });
    }
    if let Some(&bad) = sigma.iter().find(|&&j| j == 0) {
        return Err(Error::Invalid(format!("substitution target x{bad} is not a variable")));
    }
    let range: BTreeSet<Var> = sigma.iter().copied().collect();
    let mut used: BTreeSet<Var> = phi.occurring_vars();
    used.extend(range.iter().copied());
    let map: BTreeMap<Var, Var> = sigma
        .iter()
        .enumerate()
        .map(|(i, &j)| (i as Var + 1, j))
        .collect();
    Ok(subst_rec(phi, &map, &range, &mut used))
}

fn subst_rec(
    phi: &Formula,
    map: &BTreeMap<Var, Var>,
    range: &BTreeSet<Var>,
    used: &mut BTreeSet<Var>,
) -> Formula {
    match phi {
        Formula::Equal(s, t) => Formula::Equal(s.rename(map), t.rename(map)),
        Formula::Atom(r, args) => Formula::Atom(*r, args.iter().map(|a| a.rename(map)).collect()),
        Formula::And(fs) => Formula::And(fs.iter().map(|f| subst_rec(f, map, range, used)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|f| subst_rec(f, map, range, used)).collect()),
        Formula::Not(f) => Formula::not(subst_rec(f, map, range, used)),
        Formula::Exists(v, f) | Formula::Forall(v, f) => {
            let target = if range.contains(v) {
                let fresh = (1..).find(|c| !used.contains(c)).unwrap();
                used.insert(fresh);
                fresh
            } else {
                *v
            };
            let mut inner = map.clone();
            inner.insert(*v, target);
            let body = subst_rec(f, &inner, range, used);
            match phi {
                Formula::Exists(..) => Formula::exists(target, body),
                _ => Formula::forall(target, body),
            }
        }
    }
}

/// Structural equality up to consistent renaming of bound variables.
pub fn alpha_equivalent(a: &Formula, b: &Formula) -> bool {
    fn term_eq(s: &Term, t: &Term, env: &[(Var, Var)]) -> bool {
        match (s, t) {
            (Term::Var(x), Term::Var(y)) => {
                match (
                    env.iter().rev().find(|p| p.0 == *x),
                    env.iter().rev().find(|p| p.1 == *y),
                ) {
                    (Some(p), Some(q)) => p == q,
                    (None, None) => x == y,
                    _ => false,
                }
            }
            (Term::Const(c), Term::Const(d)) => c == d,
            (Term::App(f, xs), Term::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| term_eq(x, y, env))
            }
            _ => false,
        }
    }
    fn go(a: &Formula, b: &Formula, env: &mut Vec<(Var, Var)>) -> bool {
        match (a, b) {
            (Formula::Equal(s1, t1), Formula::Equal(s2, t2)) => {
                term_eq(s1, s2, env) && term_eq(t1, t2, env)
            }
            (Formula::Atom(r1, a1), Formula::Atom(r2, a2)) => {
                r1 == r2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| term_eq(x, y, env))
            }
            (Formula::And(f1), Formula::And(f2)) | (Formula::Or(f1), Formula::Or(f2)) => {
                f1.len() == f2.len() && f1.iter().zip(f2).all(|(x, y)| go(x, y, env))
            }
            (Formula::Not(x), Formula::Not(y)) => go(x, y, env),
            (Formula::Exists(v, x), Formula::Exists(w, y))
            | (Formula::Forall(v, x), Formula::Forall(w, y)) => {
                env.push((*v, *w));
                let r = go(x, y, env);
                env.pop();
                r
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    ctx: &'a Structure,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(v) => write!(f, "x{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::App(op, args) => {
                write!(f, "{}(", self.ctx.op(*op).name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", a.display(self.ctx))?;
                }
                f.write_str(")")
            }
        }
    }
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    ctx: &'a Structure,
}

impl FormulaDisplay<'_> {
    fn child(&self, phi: &Formula, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({})", phi.display(self.ctx))
        } else {
            write!(f, "{}", phi.display(self.ctx))
        }
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    /// Prints in the formula grammar; reparsing yields a structurally equal AST.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let quant = |p: &Formula| matches!(p, Formula::Exists(..) | Formula::Forall(..));
        match self.formula {
            Formula::Equal(s, t) => write!(f, "{} = {}", s.display(self.ctx), t.display(self.ctx)),
            Formula::Atom(r, args) => {
                write!(f, "{}(", self.ctx.rel(*r).name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", a.display(self.ctx))?;
                }
                f.write_str(")")
            }
            // Empty connectives have no surface syntax; print their truth value.
            Formula::And(fs) if fs.is_empty() => f.write_str("x1 = x1"),
            Formula::Or(fs) if fs.is_empty() => f.write_str("~(x1 = x1)"),
            Formula::And(fs) => {
                for (i, c) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" /\\ ")?;
                    }
                    let p = matches!(c, Formula::And(_) | Formula::Or(_)) || quant(c);
                    self.child(c, f, p)?;
                }
                Ok(())
            }
            Formula::Or(fs) => {
                for (i, c) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" \\/ ")?;
                    }
                    let p = matches!(c, Formula::Or(_)) || quant(c);
                    self.child(c, f, p)?;
                }
                Ok(())
            }
            Formula::Not(c) => {
                f.write_str("~")?;
                let p = !matches!(**c, Formula::Equal(..) | Formula::Atom(..) | Formula::Not(_));
                self.child(c, f, p)
            }
            Formula::Exists(v, c) => {
                write!(f, "exists x{v} ")?;
                self.child(c, f, true)
            }
            Formula::Forall(v, c) => {
                write!(f, "forall x{v} ")?;
                self.child(c, f, true)
            }
        }
    }
}
