//! Random structures, formulas and specs shared by the integration tests.
#![allow(dead_code)]

use defgeo::relation::tuple_count;
use defgeo::structure::{OpTable, RelTable, Universe};
use defgeo::syntax::Var;
use defgeo::{ClosureMode, Formula, FormulaClassSpec, Generator, Relation, Structure, Term};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A structure on `k` elements with up to two operations of arity at most 2
/// and at most one relation of arity at most 2.
pub fn structure(rng: &mut TestRng, k: u32, name: &str) -> Structure {
    let mut ops = Vec::new();
    for i in 0..rng.gen_range(1..=2) {
        let arity = *[0usize, 1, 2, 2, 2].choose(rng).unwrap();
        let len = tuple_count(k, arity).unwrap();
        let table = (0..len).map(|_| rng.gen_range(0..k)).collect();
        ops.push(OpTable::new(format!("f{i}"), arity, table, k).unwrap());
    }
    let mut rels = Vec::new();
    if rng.gen_bool(0.5) {
        let arity = rng.gen_range(1..=2);
        rels.push(RelTable::new("r", relation(rng, k, arity)));
    }
    Structure::new(name, Universe::new(k).unwrap(), ops, rels).unwrap()
}

pub fn relation(rng: &mut TestRng, k: u32, arity: usize) -> Relation {
    let points = tuple_count(k, arity).unwrap();
    Relation::from_indices(k, arity, (0..points).filter(|_| rng.gen_bool(0.5)))
}

pub fn term(rng: &mut TestRng, a: &Structure, vars: Var, depth: usize) -> Term {
    let leaves = a.ops().iter().any(|o| o.arity() == 0);
    if depth == 0 || a.ops().is_empty() || rng.gen_bool(0.4) {
        if rng.gen_bool(0.03) {
            return Term::Const(rng.gen_range(0..a.k()));
        }
        if leaves && rng.gen_bool(0.2) {
            let i = a.ops().iter().position(|o| o.arity() == 0).unwrap();
            return Term::App(i, vec![]);
        }
        return Term::Var(rng.gen_range(1..=vars));
    }
    let i = rng.gen_range(0..a.ops().len());
    let args = (0..a.op(i).arity()).map(|_| term(rng, a, vars, depth - 1)).collect();
    Term::App(i, args)
}

/// A formula whose free variables lie among `x1..x_vars`.
pub fn formula(rng: &mut TestRng, a: &Structure, vars: Var, depth: usize) -> Formula {
    let roll = if depth == 0 { 0 } else { rng.gen_range(0..10) };
    match roll {
        0..=3 => {
            if !a.rels().is_empty() && rng.gen_bool(0.3) {
                let args = (0..a.rel(0).arity()).map(|_| term(rng, a, vars, 1)).collect();
                Formula::Atom(0, args)
            } else {
                Formula::Equal(term(rng, a, vars, 2), term(rng, a, vars, 2))
            }
        }
        4 | 5 => Formula::And(vec![formula(rng, a, vars, depth - 1), formula(rng, a, vars, depth - 1)]),
        6 => Formula::Or(vec![formula(rng, a, vars, depth - 1), formula(rng, a, vars, depth - 1)]),
        7 => Formula::not(formula(rng, a, vars, depth - 1)),
        _ => {
            // binds either a fresh variable or shadows a free one
            let v = rng.gen_range(1..=vars + 1);
            let body = formula(rng, a, vars.max(v), depth - 1);
            if rng.gen_bool(0.5) {
                Formula::exists(v, body)
            } else {
                Formula::forall(v, body)
            }
        }
    }
}

pub fn generator(rng: &mut TestRng, a: &Structure, max_arity: usize) -> Generator {
    let r = rng.gen_range(1..=max_arity);
    if rng.gen_bool(0.1) {
        return Generator::Relation(relation(rng, a.k(), r.min(3)));
    }
    Generator::Formula(formula(rng, a, r as Var, 3))
}

pub fn spec(rng: &mut TestRng, a: &Structure, mode: ClosureMode, max_arity: usize) -> FormulaClassSpec {
    let count = rng.gen_range(1..=3);
    let gens = (0..count).map(|_| generator(rng, a, max_arity)).collect();
    FormulaClassSpec::new(gens, mode).unwrap()
}

/// `spec` plus a generator built from its formula generators by the mode's
/// connectives and a variable substitution, so the family is unchanged.
pub fn redundant_extension(rng: &mut TestRng, spec: &FormulaClassSpec, max_arity: usize) -> FormulaClassSpec {
    let formulas: Vec<&Formula> = spec
        .generators()
        .iter()
        .filter_map(|g| match g {
            Generator::Formula(phi) => Some(phi),
            Generator::Relation(_) => None,
        })
        .collect();
    if formulas.is_empty() {
        return spec.clone();
    }
    let pick = |rng: &mut TestRng| {
        let phi = *formulas.choose(rng).unwrap();
        let r = phi.free_arity().max(1);
        let sigma: Vec<Var> = (0..r).map(|_| rng.gen_range(1..=max_arity as Var)).collect();
        defgeo::syntax::substitute(phi, &sigma).unwrap()
    };
    let (x, y) = (pick(rng), pick(rng));
    let extra = match rng.gen_range(0..3) {
        0 => Formula::And(vec![x, y]),
        1 => Formula::Or(vec![x, y]),
        _ if spec.mode() == ClosureMode::Boolean => Formula::not(x),
        _ => x,
    };
    spec.with_generator(Generator::Formula(extra))
}

/// Every relation of arity `n`, by bit pattern.
pub fn all_relations(k: u32, n: usize) -> impl Iterator<Item = Relation> {
    let points = tuple_count(k, n).unwrap();
    assert!(points < 32);
    (0u64..1 << points).map(move |code| Relation::from_indices(k, n, (0..points).filter(|&i| code >> i & 1 == 1)))
}

pub mod cli {
    use std::path::{Path, PathBuf};
    use std::process::Command;

    pub fn fixtures() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
    }

    /// One invocation per subcommand (and per notable flag), with the files
    /// it writes relative to `out`.
    pub fn cases(out: &Path) -> Vec<(&'static str, Vec<String>, Vec<PathBuf>)> {
        let f = fixtures();
        let p = |rel: &str| f.join(rel).display().to_string();
        let o = |name: &str| out.join(name);
        let s = |x: &str| x.to_string();
        vec![
            ("eval", vec![s("eval"), p("misc/gf2.str"), s("plus(x1,x2) = times(x1,x2)"), s("--arity"), s("3")], vec![]),
            ("eval-quantified", vec![s("eval"), p("misc/meet.str"), s("exists x3 (le(x1,x3) /\\ le(x3,x2))"), s("--arity"), s("2")], vec![]),
            (
                "defset",
                vec![s("defset"), p("misc/meet.str"), s("--spec"), p("misc/order.spec"), s("--arity"), s("2"), s("--query"), s("{(0,0),(1,1)}")],
                vec![],
            ),
            ("fingerprint", vec![s("fingerprint"), p("misc/gf2.str"), s("--spec"), p("misc/atomic.spec")], vec![]),
            ("fingerprint-digest", vec![s("fingerprint"), p("misc/meet.str"), s("--auto-atomic"), s("--digest")], vec![]),
            (
                "fingerprint-boolean",
                vec![s("fingerprint"), p("ops2/b14_nand.str"), s("--auto-atomic"), s("--closure"), s("BOOLEAN")],
                vec![],
            ),
            (
                "equiv",
                vec![s("equiv"), p("misc/gf2.str"), p("misc/atomic.spec"), p("misc/meet.str"), p("misc/order.spec")],
                vec![],
            ),
            ("edcheck", vec![s("edcheck"), p("misc/gf2.str"), s("--bound"), s("3")], vec![]),
            ("edcheck-fails", vec![s("edcheck"), p("misc/meet.str"), s("--bound"), s("3")], vec![]),
            (
                "canonicalize",
                vec![
                    s("canonicalize"),
                    p("misc/meet.str"),
                    s("--spec"),
                    p("misc/order.spec"),
                    s("--out"),
                    o("canon.str").display().to_string(),
                    s("--spec-out"),
                    o("canon.spec").display().to_string(),
                    s("--check-bound"),
                    s("3"),
                ],
                vec![o("canon.str"), o("canon.spec")],
            ),
            (
                "classify-l0",
                vec![s("classify"), p("ops2"), s("--mode"), s("l0"), s("--out"), o("l0.txt").display().to_string()],
                vec![o("l0.txt"), o("l0.txt.fingerprints")],
            ),
            ("classify-algebraic", vec![s("classify"), p("ops2"), s("--mode"), s("algebraic"), s("--ed-bound"), s("3")], vec![]),
            ("oracle", vec![s("oracle"), p("misc/meet.str"), s("--spec"), p("misc/order.spec"), s("--max-arity"), s("5")], vec![]),
            ("error", vec![s("eval"), p("misc/gf2.str"), s("plus(x1"), s("--arity"), s("1")], vec![]),
        ]
    }

    #[derive(Debug, PartialEq, Eq)]
    pub struct Run {
        pub code: Option<i32>,
        pub stdout: Vec<u8>,
        pub stderr: Vec<u8>,
        pub files: Vec<Vec<u8>>,
    }

    pub fn run(args: &[String], files: &[PathBuf]) -> Run {
        for f in files {
            let _ = std::fs::remove_file(f);
        }
        let out = Command::new(env!("CARGO_BIN_EXE_defgeo")).args(args).output().unwrap();
        Run {
            code: out.status.code(),
            stdout: out.stdout,
            stderr: out.stderr,
            files: files.iter().map(|f| std::fs::read(f).unwrap_or_default()).collect(),
        }
    }
}
