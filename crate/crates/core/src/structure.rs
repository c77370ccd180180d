//! Finite first-order structures: a universe `{0..k-1}` with operation
//! tables and relation tables.

use std::fmt;

use crate::error::{Error, Result};
use crate::relation::{tuple_count, tuple_index, Elem, Relation};

/// Universe `{0..size-1}`, `size >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Universe(u32);

impl Universe {
    pub fn new(size: u32) -> Result<Self> {
        if size == 0 {
            return Err(Error::Invalid("universe size must be at least 1".into()));
        }
        Ok(Universe(size))
    }

    pub fn size(self) -> u32 {
        self.0
    }
}

/// An `r`-ary operation given by its row-major table (argument 1 most significant).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpTable {
    name: String,
    arity: usize,
    table: Vec<Elem>,
}

impl OpTable {
    pub fn new(name: impl Into<String>, arity: usize, table: Vec<Elem>, k: u32) -> Result<Self> {
        let name = name.into();
        let expected = tuple_count(k, arity)
            .ok_or_else(|| Error::guard("arity", format!("{k}^{arity} overflows")))?;
        if table.len() != expected {
            return Err(Error::Arity(format!(
                "operation `{name}/{arity}` has a table of length {} but {k}^{arity} = {expected}",
                table.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= k) {
            return Err(Error::OutOfRange(format!(
                "operation `{name}` maps to {bad} in a universe of size {k}"
            )));
        }
        Ok(OpTable { name, arity, table })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[Elem] {
        &self.table
    }

    pub fn apply(&self, k: u32, args: &[Elem]) -> Elem {
        self.table[tuple_index(k, args)]
    }
}

/// A named `r`-ary relation, `r >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelTable {
    name: String,
    relation: Relation,
}

impl RelTable {
    pub fn new(name: impl Into<String>, relation: Relation) -> Self {
        RelTable {
            name: name.into(),
            relation,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.relation.arity()
    }

    pub fn relation(&self) -> &Relation {
        &self.relation
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Structure {
    name: String,
    universe: Universe,
    ops: Vec<OpTable>,
    rels: Vec<RelTable>,
}

impl Structure {
    pub fn new(
        name: impl Into<String>,
        universe: Universe,
        ops: Vec<OpTable>,
        rels: Vec<RelTable>,
    ) -> Result<Self> {
        let k = universe.size();
        let mut seen = std::collections::HashSet::new();
        for n in ops.iter().map(|o| o.name()).chain(rels.iter().map(|r| r.name())) {
            if !seen.insert(n) {
                return Err(Error::DuplicateSymbol(n.to_string()));
            }
        }
        for op in &ops {
            if op.table.len() != tuple_count(k, op.arity).unwrap_or(usize::MAX)
                || op.table.iter().any(|&v| v >= k)
            {
                return Err(Error::Arity(format!(
                    "operation `{}` does not fit universe size {k}",
                    op.name
                )));
            }
        }
        for r in &rels {
            if r.relation.k() != k {
                return Err(Error::UniverseMismatch(r.relation.k(), k));
            }
        }
        Ok(Structure {
            name: name.into(),
            universe,
            ops,
            rels,
        })
    }

    /// An algebra with only operations.
    pub fn algebra(name: impl Into<String>, k: u32, ops: Vec<OpTable>) -> Result<Self> {
        Structure::new(name, Universe::new(k)?, ops, Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    /// Universe size `k`.
    pub fn k(&self) -> u32 {
        self.universe.size()
    }

    pub fn ops(&self) -> &[OpTable] {
        &self.ops
    }

    pub fn rels(&self) -> &[RelTable] {
        &self.rels
    }

    pub fn op(&self, i: usize) -> &OpTable {
        &self.ops[i]
    }

    pub fn rel(&self, i: usize) -> &RelTable {
        &self.rels[i]
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name == name)
    }

    pub fn rel_index(&self, name: &str) -> Option<usize> {
        self.rels.iter().position(|r| r.name == name)
    }

    /// The same structure under another name.
    pub fn renamed(&self, name: impl Into<String>) -> Structure {
        Structure {
            name: name.into(),
            ..self.clone()
        }
    }

    /// The reduct keeping only the operations.
    pub fn algebra_reduct(&self) -> Structure {
        Structure {
            rels: Vec::new(),
            ..self.clone()
        }
    }

    pub fn parse(text: &str) -> Result<Structure> {
        crate::syntax::parse_structure(text)
    }
}

impl fmt::Display for Structure {
    /// Prints in the structure file grammar; the output reparses to an equal value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "structure {} {{", self.name)?;
        writeln!(f, "  universe {};", self.k())?;
        for op in &self.ops {
            write!(f, "  op {}/{} = [", op.name, op.arity)?;
            for (i, v) in op.table.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
            writeln!(f, "];")?;
        }
        for r in &self.rels {
            write!(f, "  rel {}/{} = {{", r.name, r.arity())?;
            for (i, t) in r.relation.tuples().iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                f.write_str("(")?;
                for (j, a) in t.iter().enumerate() {
                    if j > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")?;
            }
            writeln!(f, "}};")?;
        }
        writeln!(f, "}}")
    }
}
