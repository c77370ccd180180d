//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any failed.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use common::cli;
use defgeo::classify::{classify, load_dir, oracle_partition, ClassifyMode, ClassifyOptions};
use defgeo::closure::{
    canonicalize, decide_equivalence, def_family, fingerprint, oracle_def, Equivalence, OracleBasis,
};
use defgeo::eval::solution_set;
use defgeo::geometry::{algebraic_family, ed_check, EdVerdict};
use defgeo::syntax::{substitute, Var};
use defgeo::{ClosureMode, FormulaClassSpec, Limits, MinorMap, Relation, Structure};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn substitution_lemma() -> Outcome {
    let l = Limits::default();
    let mut rng = common::rng(0x5b57);
    let mut checked = 0;
    for (k, count, max_arity) in [(2u32, 500, 4usize), (3, 100, 3)] {
        for case in 0..count {
            let a = common::structure(&mut rng, k, "A");
            let r = rng.gen_range(1..=max_arity);
            let phi = common::formula(&mut rng, &a, r as Var, 3);
            let n = rng.gen_range(1..=max_arity);
            let sigma: Vec<usize> = (0..r).map(|_| rng.gen_range(1..=n)).collect();
            let vars: Vec<Var> = sigma.iter().map(|&j| j as Var).collect();
            let lhs = solution_set(&substitute(&phi, &vars).map_err(|e| e.to_string())?, n, &a, &l)
                .map_err(|e| e.to_string())?;
            let rhs = solution_set(&phi, r, &a, &l)
                .and_then(|s| s.minor(&MinorMap::new(n, sigma.clone())?))
                .map_err(|e| e.to_string())?;
            ensure(lhs == rhs, || {
                format!("k={k} case {case}: sigma={sigma:?} phi={} gives {lhs} vs {rhs}", phi.display(&a))
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} substitutions agree"))
}

fn closure_engine_vs_oracle() -> Outcome {
    let l = Limits::default();
    let mut rng = common::rng(0xc105e);
    let mut candidates = 0u64;
    for case in 0..300 {
        let mode = if case < 200 { ClosureMode::Lattice } else { ClosureMode::Boolean };
        let a = common::structure(&mut rng, 2, "A");
        let spec = common::spec(&mut rng, &a, mode, 4);
        for n in 1..=4 {
            let family = def_family(&a, &spec, n, &l).map_err(|e| e.to_string())?;
            let oracle: BTreeSet<Relation> =
                oracle_def(&a, &spec, n, &l).map_err(|e| e.to_string())?.into_iter().collect();
            for t in common::all_relations(2, n) {
                let got = family.member(&t).map_err(|e| e.to_string())?;
                ensure(got == oracle.contains(&t), || {
                    format!("{mode} case {case} n={n}: member({t}) = {got}\n{}", spec.to_text(&a))
                })?;
                candidates += 1;
            }
        }
    }
    Ok(format!("300 specs, {candidates} candidate relations agree"))
}

/// Whether the oracle families of two specs agree at every arity up to 6.
fn oracle_agree_through_6(
    a1: &Structure,
    s1: &FormulaClassSpec,
    a2: &Structure,
    s2: &FormulaClassSpec,
    l: &Limits,
) -> Result<Option<usize>, String> {
    for n in 1..=4 {
        let f1 = oracle_def(a1, s1, n, l).map_err(|e| e.to_string())?;
        let f2 = oracle_def(a2, s2, n, l).map_err(|e| e.to_string())?;
        if f1 != f2 {
            return Ok(Some(n));
        }
    }
    for n in 5..=6 {
        let b1 = OracleBasis::new(a1, s1, n, l).map_err(|e| e.to_string())?;
        let b2 = OracleBasis::new(a2, s2, n, l).map_err(|e| e.to_string())?;
        if !b1.same_family(&b2) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

fn fingerprint_completeness() -> Outcome {
    let l = Limits::default();
    let mut rng = common::rng(0xf1a9);
    let (mut equal, mut different) = (0, 0);
    for case in 0..200 {
        let mode = if rng.gen_bool(0.5) { ClosureMode::Lattice } else { ClosureMode::Boolean };
        let a1 = common::structure(&mut rng, 2, "A");
        let s1 = common::spec(&mut rng, &a1, mode, 4);
        let (a2, s2) = match case % 4 {
            0 => {
                let a2 = common::structure(&mut rng, 2, "B");
                let s2 = common::spec(&mut rng, &a2, mode, 4);
                (a2, s2)
            }
            1 => {
                let s2 = common::spec(&mut rng, &a1, mode, 4);
                (a1.clone(), s2)
            }
            2 => (a1.clone(), common::redundant_extension(&mut rng, &s1, 4)),
            _ => {
                let mut gens = s1.generators().to_vec();
                if gens.len() > 1 {
                    gens.remove(rng.gen_range(0..gens.len()));
                } else {
                    gens.push(common::generator(&mut rng, &a1, 4));
                }
                (a1.clone(), FormulaClassSpec::new(gens, mode).map_err(|e| e.to_string())?)
            }
        };
        let fp1 = fingerprint(&a1, &s1, &l).map_err(|e| e.to_string())?;
        let fp2 = fingerprint(&a2, &s2, &l).map_err(|e| e.to_string())?;
        let context = || format!("case {case}\n{}---\n{}", s1.to_text(&a1), s2.to_text(&a2));
        if fp1.to_text() == fp2.to_text() {
            equal += 1;
            if let Some(n) = oracle_agree_through_6(&a1, &s1, &a2, &s2, &l)? {
                return Err(format!("equal fingerprints, oracle families differ at n={n}: {}", context()));
            }
        } else {
            different += 1;
            let verdict = decide_equivalence(&a1, &s1, &a2, &s2, &l).map_err(|e| e.to_string())?;
            let Equivalence::Inequivalent { witness, in_first } = verdict else {
                return Err(format!("different fingerprints but no witness: {}", context()));
            };
            let n = witness.arity();
            let in1 = oracle_def(&a1, &s1, n, &l).map_err(|e| e.to_string())?.contains(&witness);
            let in2 = oracle_def(&a2, &s2, n, &l).map_err(|e| e.to_string())?.contains(&witness);
            ensure(in1 != in2 && in1 == in_first, || {
                format!("witness {witness} in first={in1} second={in2} claimed first={in_first}: {}", context())
            })?;
        }
    }
    ensure(equal > 0 && different > 0, || format!("degenerate sample: {equal} equal, {different} different"))?;
    Ok(format!("{equal} fingerprint-equal pairs agree through n=6, {different} witnesses confirmed"))
}

fn gf2_equational_domain() -> Outcome {
    let l = Limits::default();
    let gf2 = Structure::parse(include_str!("../../../fixtures/misc/gf2.str")).map_err(|e| e.to_string())?;
    let report = ed_check(&gf2, 4, &l).map_err(|e| e.to_string())?;
    ensure(report.verdict == EdVerdict::PassesAtBound, || report.to_text())?;
    let target = Relation::from_indices(
        2,
        4,
        (0..16usize).filter(|&i| {
            let (a, b, c, d) = (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1);
            a == b || c == d
        }),
    );
    let family = algebraic_family(&gf2, 4, &l).map_err(|e| e.to_string())?;
    ensure(family.contains(&target), || format!("{target} is not algebraic"))?;
    Ok(format!("passes at bound 4; {} ({} tuples) is algebraic", target, target.len()))
}

fn canonical_round_trip() -> Outcome {
    let l = Limits::default();
    let mut rng = common::rng(0xca90);
    for case in 0..20 {
        let mode = if case % 2 == 0 { ClosureMode::Lattice } else { ClosureMode::Boolean };
        let a = common::structure(&mut rng, 2, "A");
        let spec = common::spec(&mut rng, &a, mode, 4);
        let p = canonicalize(&a, &spec, &l).map_err(|e| e.to_string())?;
        let original = fingerprint(&a, &spec, &l).map_err(|e| e.to_string())?.to_text();
        let rebuilt = fingerprint(p.structure(), p.spec(), &l).map_err(|e| e.to_string())?.to_text();
        ensure(original == rebuilt, || format!("case {case}: fingerprints differ\n{original}---\n{rebuilt}"))?;
        if let Some(n) = oracle_agree_through_6(&a, &spec, p.structure(), p.spec(), &l)? {
            return Err(format!("case {case}: oracle families differ at n={n}\n{}", spec.to_text(&a)));
        }
    }
    Ok("20 presentations reproduce the fingerprint and agree through n=6".into())
}

fn golden(mode: ClassifyMode) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/golden/classify_{mode}.txt"));
    std::fs::read_to_string(path).unwrap_or_default()
}

fn finiteness() -> Outcome {
    let l = Limits::default();
    let items = load_dir(&cli::fixtures().join("ops2")).map_err(|e| e.to_string())?;
    ensure(items.len() == 16, || format!("{} fixtures", items.len()))?;
    let mut counts = Vec::new();
    for mode in [ClassifyMode::Algebraic, ClassifyMode::L0] {
        let opts = ClassifyOptions::new(mode);
        let first = classify(&items, &opts, &l).map_err(|e| e.to_string())?;
        let second = classify(&items, &opts, &l).map_err(|e| e.to_string())?;
        ensure(first.to_text() == second.to_text(), || format!("{mode}: reports differ between runs"))?;
        let oracle = oracle_partition(&items, mode, 4, &l).map_err(|e| e.to_string())?;
        ensure(first.fingerprint_partition() == oracle, || {
            format!("{mode}: partition {:?} vs oracle {oracle:?}", first.fingerprint_partition())
        })?;
        ensure(first.class_count() <= 16, || format!("{mode}: {} classes", first.class_count()))?;
        ensure(first.bound_text() == "2^(2^(2^4))", || first.bound_text())?;
        ensure(first.to_text() == golden(mode), || format!("{mode}: report differs from the golden file"))?;
        counts.push(format!(
            "{mode}: {} classes, {} undetermined groups",
            first.class_count(),
            first.undetermined.len()
        ));
    }
    Ok(counts.join("; "))
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cases = cli::cases(dir.path());
    for (name, args, files) in &cases {
        let first = cli::run(args, files);
        let second = cli::run(args, files);
        ensure(first == second, || format!("`{name}` differs between runs"))?;
        ensure(!first.stdout.is_empty() || !first.stderr.is_empty(), || format!("`{name}` printed nothing"))?;
    }
    Ok(format!("{} invocations byte-identical", cases.len()))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("substitution lemma", substitution_lemma),
        ("closure engine matches explicit oracle", closure_engine_vs_oracle),
        ("fingerprint decides equality of definable families", fingerprint_completeness),
        ("GF(2) is an equational domain", gf2_equational_domain),
        ("canonical presentation round trip", canonical_round_trip),
        ("classification of binary operations on {0,1}", finiteness),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
