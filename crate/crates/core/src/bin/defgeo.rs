use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use defgeo::classify::{classify, load_dir, ClassifyMode, ClassifyOptions};
use defgeo::closure::{
    canonicalize, decide_equivalence, def_family, fingerprint, oracle_def, verify_presentation, Equivalence,
    OracleBasis,
};
use defgeo::eval::solution_set;
use defgeo::geometry::{ed_check, EdVerdict};
use defgeo::relation::tuple_count;
use defgeo::{ClosureMode, Error, FormulaClassSpec, Limits, Relation, Structure};

const GRAMMAR: &str = "\
structure file:
  structure NAME { universe K; op NAME/ARITY = [v0,v1,...]; rel NAME/ARITY = {(a,b),...}; }
  operation tables are row-major with argument 1 most significant
formula:
  term = term | rel(term,...) | phi /\\ phi | phi \\/ phi | ~phi | exists xN phi | forall xN phi
  terms are variables x1, x2, ..., element literals 0..K-1, or op(term,...)
spec file:
  mode: LATTICE | BOOLEAN      (first line)
  one generator per line: a formula, a relation rel/K/N:{(..),..}, or `atomic [ARITY]`
relation argument:
  rel/K/N:{(a,b,..),..}  or  {(a,b,..),..}";

#[derive(Parser)]
#[command(name = "defgeo", version, about = "Definable relation families over finite structures")]
struct Cli {
    /// Compare families at this arity instead of k^2.
    #[arg(long, global = true)]
    comparison_arity: Option<usize>,
    /// Cap on generator arity (default: the comparison arity).
    #[arg(long, global = true)]
    max_generator_arity: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecSource {
    /// Spec file: a `mode:` header and one generator per line.
    #[arg(long, required_unless_present = "auto_atomic")]
    spec: Option<PathBuf>,
    /// Use the structure's atomic term equations instead of a spec file.
    #[arg(long, conflicts_with = "spec")]
    auto_atomic: bool,
    /// Term arity for --auto-atomic (default: the comparison arity).
    #[arg(long, requires = "auto_atomic")]
    max_term_arity: Option<usize>,
    /// Closure mode for --auto-atomic.
    #[arg(long, default_value = "LATTICE", requires = "auto_atomic")]
    closure: ClosureMode,
}

#[derive(Subcommand)]
enum Command {
    /// Print the solution set of a formula.
    Eval {
        structure: PathBuf,
        formula: String,
        #[arg(long)]
        arity: usize,
    },
    /// Decide membership of a relation in a definable family.
    Defset {
        structure: PathBuf,
        #[command(flatten)]
        spec: SpecSource,
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        query: String,
    },
    /// Print the canonical fingerprint.
    Fingerprint {
        structure: PathBuf,
        #[command(flatten)]
        spec: SpecSource,
        /// Print only the 64-bit digest.
        #[arg(long)]
        digest: bool,
    },
    /// Decide whether two structures define the same sets.
    Equiv {
        structure1: PathBuf,
        spec1: PathBuf,
        structure2: PathBuf,
        spec2: PathBuf,
    },
    /// Check that unions of algebraic sets stay algebraic.
    Edcheck {
        structure: PathBuf,
        #[arg(long)]
        bound: usize,
    },
    /// Write a relational structure whose atoms define the same sets.
    Canonicalize {
        structure: PathBuf,
        #[command(flatten)]
        spec: SpecSource,
        #[arg(long)]
        out: PathBuf,
        /// Also write the atoms as a spec file.
        #[arg(long)]
        spec_out: Option<PathBuf>,
        /// Verify agreement at every arity up to this bound.
        #[arg(long, default_value_t = 4)]
        check_bound: usize,
    },
    /// Classify every `*.str` file in a directory.
    Classify {
        dir: PathBuf,
        #[arg(long)]
        mode: ClassifyMode,
        /// Write the report here and full fingerprints to `<out>.fingerprints`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        ed_bound: Option<usize>,
        /// Depth-bounded term generation; verdicts become inequivalence-only.
        #[arg(long)]
        approximate_depth: Option<usize>,
    },
    /// Recompute families naively and diff against the engine.
    Oracle {
        structure: PathBuf,
        #[command(flatten)]
        spec: SpecSource,
        #[arg(long)]
        max_arity: usize,
    },
}

/// Outcome of a command that ran to completion.
enum Verdict {
    Yes,
    No,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Yes) => ExitCode::SUCCESS,
        Ok(Verdict::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Syntax { .. }) {
                eprintln!("\n{GRAMMAR}");
            }
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn load_structure(path: &Path) -> Result<Structure, Error> {
    Structure::parse(&read(path)?)
}

fn load_spec(path: &Path, a: &Structure, limits: &Limits) -> Result<FormulaClassSpec, Error> {
    FormulaClassSpec::parse(&read(path)?, a, limits)
}

fn resolve_spec(src: &SpecSource, a: &Structure, limits: &Limits) -> Result<FormulaClassSpec, Error> {
    match &src.spec {
        Some(path) => load_spec(path, a, limits),
        None => {
            let arity = src.max_term_arity.unwrap_or_else(|| limits.comparison_arity(a.k()));
            FormulaClassSpec::parse(&format!("mode: {}\natomic {arity}\n", src.closure), a, limits)
        }
    }
}

fn parse_relation(text: &str, k: u32, n: usize) -> Result<Relation, Error> {
    let text = text.trim();
    if text.starts_with("rel/") {
        let r = Relation::parse_canonical(text)?;
        if r.k() != k || r.arity() != n {
            return Err(Error::Arity(format!(
                "query {text} does not match universe {k} and arity {n}"
            )));
        }
        Ok(r)
    } else {
        Relation::parse_tuple_set(k, n, text)
    }
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn run(cli: Cli) -> Result<Verdict, Error> {
    let mut limits = Limits::from_env()?;
    limits.comparison_arity = cli.comparison_arity;
    limits.max_generator_arity = cli.max_generator_arity;
    match cli.command {
        Command::Eval {
            structure,
            formula,
            arity,
        } => {
            let a = load_structure(&structure)?;
            let phi = defgeo::Formula::parse(&formula, &a)?;
            println!("{}", solution_set(&phi, arity, &a, &limits)?);
            Ok(Verdict::Yes)
        }
        Command::Defset {
            structure,
            spec,
            arity,
            query,
        } => {
            let a = load_structure(&structure)?;
            let spec = resolve_spec(&spec, &a, &limits)?;
            let t = parse_relation(&query, a.k(), arity)?;
            let family = def_family(&a, &spec, arity, &limits)?;
            if family.member(&t)? {
                println!("member");
                Ok(Verdict::Yes)
            } else {
                println!("not-member");
                Ok(Verdict::No)
            }
        }
        Command::Fingerprint {
            structure,
            spec,
            digest,
        } => {
            let a = load_structure(&structure)?;
            let spec = resolve_spec(&spec, &a, &limits)?;
            let fp = fingerprint(&a, &spec, &limits)?;
            if digest {
                println!("{}", fp.digest());
            } else {
                print!("{}", fp.to_text());
            }
            Ok(Verdict::Yes)
        }
        Command::Equiv {
            structure1,
            spec1,
            structure2,
            spec2,
        } => {
            let a1 = load_structure(&structure1)?;
            let a2 = load_structure(&structure2)?;
            let s1 = load_spec(&spec1, &a1, &limits)?;
            let s2 = load_spec(&spec2, &a2, &limits)?;
            match decide_equivalence(&a1, &s1, &a2, &s2, &limits)? {
                Equivalence::Equivalent => {
                    println!("equivalent");
                    Ok(Verdict::Yes)
                }
                Equivalence::Inequivalent { witness, in_first } => {
                    println!("inequivalent");
                    println!("witness={witness}");
                    println!("in={}", if in_first { "first" } else { "second" });
                    Ok(Verdict::No)
                }
            }
        }
        Command::Edcheck { structure, bound } => {
            let a = load_structure(&structure)?;
            let report = ed_check(&a.algebra_reduct(), bound, &limits)?;
            print!("{}", report.to_text());
            Ok(match report.verdict {
                EdVerdict::PassesAtBound => Verdict::Yes,
                EdVerdict::Fails => Verdict::No,
            })
        }
        Command::Canonicalize {
            structure,
            spec,
            out,
            spec_out,
            check_bound,
        } => {
            let a = load_structure(&structure)?;
            let spec = resolve_spec(&spec, &a, &limits)?;
            let p = canonicalize(&a, &spec, &limits)?;
            write(&out, &p.structure().to_string())?;
            if let Some(path) = spec_out {
                write(&path, &p.spec().to_text(p.structure()))?;
            }
            println!("structure={}", p.structure().name());
            println!("relations={}", p.structure().rels().len());
            println!("digest={}", p.fingerprint().digest());
            match verify_presentation(&a, &spec, &p, check_bound, &limits)? {
                None => {
                    println!("verified-through={check_bound}");
                    Ok(Verdict::Yes)
                }
                Some(n) => {
                    println!("disagrees-at={n}");
                    Ok(Verdict::No)
                }
            }
        }
        Command::Classify {
            dir,
            mode,
            out,
            ed_bound,
            approximate_depth,
        } => {
            let structures = load_dir(&dir)?;
            let opts = ClassifyOptions {
                mode,
                ed_bound,
                approximate_depth,
            };
            let report = classify(&structures, &opts, &limits)?;
            match out {
                Some(path) => {
                    write(&path, &report.to_text())?;
                    let mut sidecar = path.into_os_string();
                    sidecar.push(".fingerprints");
                    write(Path::new(&sidecar), &report.sidecar_text())?;
                    println!("classes={}", report.class_count());
                    println!("undetermined={}", report.undetermined.len());
                }
                None => print!("{}", report.to_text()),
            }
            Ok(Verdict::Yes)
        }
        Command::Oracle {
            structure,
            spec,
            max_arity,
        } => {
            let a = load_structure(&structure)?;
            let spec = resolve_spec(&spec, &a, &limits)?;
            let mut agree = true;
            for n in 1..=max_arity {
                let (method, ok) = oracle_diff(&a, &spec, n, &limits)?;
                println!("arity={n} method={method} {}", if ok { "agree" } else { "DISAGREE" });
                agree &= ok;
            }
            Ok(if agree { Verdict::Yes } else { Verdict::No })
        }
    }
}

/// Compares the engine with the naive verifier at arity `n`: over every
/// candidate relation when there are at most 2^16, member by member when the
/// explicit family fits its guard, and basis against basis otherwise.
fn oracle_diff(
    a: &Structure,
    spec: &FormulaClassSpec,
    n: usize,
    limits: &Limits,
) -> Result<(&'static str, bool), Error> {
    let family = def_family(a, spec, n, limits)?;
    let points = tuple_count(a.k(), n).unwrap_or(usize::MAX);
    if points <= 16 {
        let explicit = oracle_def(a, spec, n, limits)?;
        let mut engine = Vec::new();
        for code in 0u64..1 << points {
            let t = Relation::from_indices(a.k(), n, (0..points).filter(|&i| code >> i & 1 == 1));
            if family.member(&t)? {
                engine.push(t);
            }
        }
        engine.sort();
        return Ok(("exhaustive", engine == explicit));
    }
    match oracle_def(a, spec, n, limits) {
        Ok(explicit) => {
            let mut ok = true;
            for t in &explicit {
                ok &= family.member(t)?;
            }
            for v in family.distinct_closures() {
                ok &= explicit.binary_search(&v).is_ok();
            }
            Ok(("explicit", ok))
        }
        Err(Error::Guard { .. }) => {
            let basis = OracleBasis::new(a, spec, n, limits)?;
            let ok = basis.covered() == family.top()
                && basis.has_empty() == family.has_empty()
                && (0..points).all(|t| basis.closure(t) == family.point_closure(t));
            Ok(("basis", ok))
        }
        Err(e) => Err(e),
    }
}
