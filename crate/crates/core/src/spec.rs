//! Formula classes: a generator list plus the connectives it is closed under.
//!
//! Spec file format, one item per line, `#` starting a comment:
//!
//! ```text
//! mode: LATTICE          # or BOOLEAN; must come first
//! x1 = x2                # a generator formula
//! rel/2/2:{(0,0),(1,1)}  # a generator given directly as a relation
//! atomic 4               # the atomic term equations of the structure at arity 4
//! ```
//!
//! `atomic` without an arity uses the comparison arity `k^2`. It expands to the
//! meet-irreducible algebraic sets at that arity, which generate the same
//! closure as every equation `s = t` between terms in that many variables.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Pos, Result};
use crate::limits::Limits;
use crate::relation::Relation;
use crate::structure::Structure;
use crate::syntax::Formula;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClosureMode {
    /// Closed under `∧`, `∨` and minors.
    Lattice,
    /// Closed under `∧`, `∨`, `¬` and minors.
    Boolean,
}

impl fmt::Display for ClosureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClosureMode::Lattice => "LATTICE",
            ClosureMode::Boolean => "BOOLEAN",
        })
    }
}

impl FromStr for ClosureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LATTICE" => Ok(ClosureMode::Lattice),
            "BOOLEAN" => Ok(ClosureMode::Boolean),
            other => Err(Error::Invalid(format!(
                "unknown closure mode `{other}` (expected LATTICE or BOOLEAN)"
            ))),
        }
    }
}

/// One generator of a formula class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Generator {
    Formula(Formula),
    /// A set taken as definable outright, standing for an atom `R(x1, ..., xr)`.
    Relation(Relation),
}

impl Generator {
    /// Number of leading variables the generator is read over: the largest
    /// free variable index, or 1 for sentences.
    pub fn arity(&self) -> usize {
        match self {
            Generator::Formula(phi) => phi.free_arity().max(1),
            Generator::Relation(r) => r.arity(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormulaClassSpec {
    generators: Vec<Generator>,
    mode: ClosureMode,
}

impl FormulaClassSpec {
    pub fn new(generators: Vec<Generator>, mode: ClosureMode) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::EmptyGenerators);
        }
        Ok(FormulaClassSpec { generators, mode })
    }

    pub fn from_formulas(formulas: Vec<Formula>, mode: ClosureMode) -> Result<Self> {
        Self::new(formulas.into_iter().map(Generator::Formula).collect(), mode)
    }

    pub fn from_relations(relations: Vec<Relation>, mode: ClosureMode) -> Result<Self> {
        Self::new(relations.into_iter().map(Generator::Relation).collect(), mode)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn mode(&self) -> ClosureMode {
        self.mode
    }

    /// The same generators with one more appended.
    pub fn with_generator(&self, g: Generator) -> FormulaClassSpec {
        let mut generators = self.generators.clone();
        generators.push(g);
        FormulaClassSpec {
            generators,
            mode: self.mode,
        }
    }

    /// Largest generator arity.
    pub fn max_generator_arity(&self) -> usize {
        self.generators.iter().map(Generator::arity).max().unwrap_or(1)
    }

    /// Checks that every generator fits `ctx` and the generator arity cap.
    pub fn validate(&self, ctx: &Structure, limits: &Limits) -> Result<()> {
        let k = ctx.k();
        let cap = limits.generator_arity_cap(k);
        for g in &self.generators {
            if let Generator::Relation(r) = g {
                if r.k() != k {
                    return Err(Error::UniverseMismatch(r.k(), k));
                }
            }
            if g.arity() > cap {
                return Err(Error::guard(
                    "generator-arity",
                    format!(
                        "a generator has arity {} but the cap is {cap}; raise it to admit the generator",
                        g.arity()
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Parses a spec file against `ctx`.
    pub fn parse(text: &str, ctx: &Structure, limits: &Limits) -> Result<Self> {
        let mut mode = None;
        let mut generators = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("mode:") {
                if mode.is_some() {
                    return Err(Error::syntax(line_no, 1, "duplicate `mode:` header"));
                }
                mode = Some(rest.parse::<ClosureMode>().map_err(|e| {
                    Error::syntax(line_no, 1, e.to_string())
                })?);
                continue;
            }
            if mode.is_none() {
                return Err(Error::syntax(
                    line_no,
                    1,
                    "a spec file starts with `mode: LATTICE` or `mode: BOOLEAN`",
                ));
            }
            let first = line.split_whitespace().next().unwrap_or("");
            if first == "atomic" {
                let arg = line["atomic".len()..].trim();
                let arity = if arg.is_empty() {
                    limits.comparison_arity(ctx.k())
                } else {
                    arg.parse::<usize>()
                        .ok()
                        .filter(|&r| r >= 1)
                        .ok_or_else(|| {
                            Error::syntax(line_no, 8, format!("bad arity `{arg}` for `atomic`"))
                        })?
                };
                let family = crate::geometry::algebraic_family(ctx, arity, limits)?;
                generators.extend(family.generators().into_iter().map(Generator::Relation));
            } else if line.starts_with("rel/") {
                let r = Relation::parse_canonical(line)
                    .map_err(|e| relocate(e, line_no, raw, line))?;
                generators.push(Generator::Relation(r));
            } else {
                let phi = Formula::parse(line, ctx).map_err(|e| relocate(e, line_no, raw, line))?;
                generators.push(Generator::Formula(phi));
            }
        }
        let mode = mode.ok_or_else(|| Error::syntax(1, 1, "missing `mode:` header"))?;
        FormulaClassSpec::new(generators, mode)
    }

    /// Spec file text; reparses to an equal spec when every generator is a
    /// formula over `ctx` or a relation.
    pub fn to_text(&self, ctx: &Structure) -> String {
        let mut out = format!("mode: {}\n", self.mode);
        for g in &self.generators {
            match g {
                Generator::Formula(phi) => out.push_str(&phi.display(ctx).to_string()),
                Generator::Relation(r) => out.push_str(&r.canonical_text()),
            }
            out.push('\n');
        }
        out
    }
}

/// Moves a single-line syntax error to its place in the spec file.
fn relocate(e: Error, line_no: usize, raw: &str, trimmed: &str) -> Error {
    match e {
        Error::Syntax { pos, msg } => {
            let offset = raw.find(trimmed).unwrap_or(0);
            Error::Syntax {
                pos: Pos {
                    line: line_no,
                    col: pos.col + offset,
                },
                msg,
            }
        }
        other => other,
    }
}
