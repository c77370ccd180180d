use super::lexer::{tokenize, Tok, Token};
use super::{Formula, Term, Var};
use crate::error::{Error, Result};
use crate::relation::{Elem, Relation};
use crate::structure::{OpTable, RelTable, Structure, Universe};

struct Cursor {
    toks: Vec<Token>,
    at: usize,
}

impl Cursor {
    fn new(text: &str) -> Result<Self> {
        Ok(Cursor {
            toks: tokenize(text)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.at];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::syntax(line, col, msg)
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!(
                "expected {}, found {}",
                want.describe(),
                self.peek().describe()
            )))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.bump() {
            Tok::Ident(s) => Ok(s),
            other => {
                self.at -= 1;
                Err(self.error(format!("expected an identifier, found {}", other.describe())))
            }
        }
    }

    fn int(&mut self) -> Result<u64> {
        match self.bump() {
            Tok::Int(n) => Ok(n),
            other => {
                self.at -= 1;
                Err(self.error(format!("expected an integer, found {}", other.describe())))
            }
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            other => Err(self.error(format!("expected `{kw}`, found {}", other.describe()))),
        }
    }
}

fn positioned(e: Error, (line, col): (usize, usize)) -> Error {
    match e {
        Error::Arity(m) => Error::syntax(line, col, format!("arity mismatch: {m}")),
        Error::OutOfRange(m) => Error::syntax(line, col, format!("element out of range: {m}")),
        other => other,
    }
}

enum Decl {
    Op {
        name: String,
        arity: usize,
        table: Vec<(u64, (usize, usize))>,
        pos: (usize, usize),
    },
    Rel {
        name: String,
        arity: usize,
        tuples: Vec<(Vec<u64>, (usize, usize))>,
    },
}

/// Parses a structure file:
///
/// ```text
/// structure NAME { universe K; op f/R = [..]; rel r/R = {(..),..}; }
/// ```
pub fn parse_structure(text: &str) -> Result<Structure> {
    let mut c = Cursor::new(text)?;
    c.keyword("structure")?;
    let name = c.ident()?;
    c.expect(Tok::LBrace)?;
    let mut universe: Option<(u64, (usize, usize))> = None;
    let mut decls = Vec::new();
    loop {
        let pos = c.here();
        match c.peek().clone() {
            Tok::RBrace => {
                c.bump();
                break;
            }
            Tok::Ident(kw) if kw == "universe" => {
                c.bump();
                let k = c.int()?;
                if universe.is_some() {
                    return Err(Error::syntax(pos.0, pos.1, "universe declared twice"));
                }
                universe = Some((k, pos));
                c.expect(Tok::Semi)?;
            }
            Tok::Ident(kw) if kw == "op" => {
                c.bump();
                let name = c.ident()?;
                c.expect(Tok::Slash)?;
                let arity = c.int()? as usize;
                c.expect(Tok::Equals)?;
                c.expect(Tok::LBracket)?;
                let mut table = Vec::new();
                loop {
                    let at = c.here();
                    table.push((c.int()?, at));
                    if *c.peek() == Tok::Comma {
                        c.bump();
                    } else {
                        break;
                    }
                }
                c.expect(Tok::RBracket)?;
                c.expect(Tok::Semi)?;
                decls.push(Decl::Op {
                    name,
                    arity,
                    table,
                    pos,
                });
            }
            Tok::Ident(kw) if kw == "rel" => {
                c.bump();
                let name = c.ident()?;
                c.expect(Tok::Slash)?;
                let arity_pos = c.here();
                let arity = c.int()? as usize;
                if arity == 0 {
                    return Err(Error::syntax(arity_pos.0, arity_pos.1, "relations must have positive arity"));
                }
                c.expect(Tok::Equals)?;
                c.expect(Tok::LBrace)?;
                let mut tuples = Vec::new();
                if *c.peek() != Tok::RBrace {
                    loop {
                        let at = c.here();
                        c.expect(Tok::LParen)?;
                        let mut t = vec![c.int()?];
                        while *c.peek() == Tok::Comma {
                            c.bump();
                            t.push(c.int()?);
                        }
                        c.expect(Tok::RParen)?;
                        tuples.push((t, at));
                        if *c.peek() == Tok::Comma {
                            c.bump();
                        } else {
                            break;
                        }
                    }
                }
                c.expect(Tok::RBrace)?;
                c.expect(Tok::Semi)?;
                decls.push(Decl::Rel {
                    name,
                    arity,
                    tuples,
                });
            }
            other => {
                return Err(c.error(format!(
                    "expected `universe`, `op`, `rel` or `}}`, found {}",
                    other.describe()
                )))
            }
        }
    }
    if *c.peek() != Tok::Eof {
        return Err(c.error(format!("unexpected {} after the structure", c.peek().describe())));
    }
    let (k, kpos) = universe.ok_or_else(|| Error::syntax(1, 1, "missing `universe` declaration"))?;
    let k = u32::try_from(k)
        .ok()
        .filter(|&k| k >= 1)
        .ok_or_else(|| Error::syntax(kpos.0, kpos.1, "universe size must be a positive 32-bit integer"))?;
    let universe = Universe::new(k)?;

    let mut ops = Vec::new();
    let mut rels = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for d in decls {
        let name = match &d {
            Decl::Op { name, .. } | Decl::Rel { name, .. } => name.clone(),
        };
        if !seen.insert(name.clone()) {
            return Err(Error::DuplicateSymbol(name));
        }
        match d {
            Decl::Op {
                name,
                arity,
                table,
                pos,
            } => {
                if let Some((v, at)) = table.iter().find(|(v, _)| *v >= k as u64) {
                    return Err(Error::syntax(
                        at.0,
                        at.1,
                        format!("element out of range: {v} in operation `{name}` over universe size {k}"),
                    ));
                }
                let values = table.iter().map(|(v, _)| *v as Elem).collect();
                ops.push(OpTable::new(name, arity, values, k).map_err(|e| positioned(e, pos))?);
            }
            Decl::Rel {
                name,
                arity,
                tuples,
            } => {
                let mut r = Relation::empty(k, arity);
                for (t, at) in tuples {
                    if t.len() != arity {
                        return Err(Error::syntax(
                            at.0,
                            at.1,
                            format!("arity mismatch: tuple of length {} in `{name}/{arity}`", t.len()),
                        ));
                    }
                    if let Some(v) = t.iter().find(|&&v| v >= k as u64) {
                        return Err(Error::syntax(
                            at.0,
                            at.1,
                            format!("element out of range: {v} in relation `{name}` over universe size {k}"),
                        ));
                    }
                    let t: Vec<Elem> = t.iter().map(|&v| v as Elem).collect();
                    r.insert(crate::relation::tuple_index(k, &t));
                }
                rels.push(RelTable::new(name, r));
            }
        }
    }
    Structure::new(name, universe, ops, rels)
}

/// Parses a formula, resolving symbols in `ctx`.
///
/// Precedence is `~` over `/\` over `\/`; a quantifier's scope runs to the end
/// of the enclosing group.
pub fn parse_formula(text: &str, ctx: &Structure) -> Result<Formula> {
    let mut p = FormulaParser {
        c: Cursor::new(text)?,
        ctx,
    };
    let f = p.or()?;
    if *p.c.peek() != Tok::Eof {
        return Err(p.c.error(format!("unexpected {}", p.c.peek().describe())));
    }
    Ok(f)
}

struct FormulaParser<'a> {
    c: Cursor,
    ctx: &'a Structure,
}

fn as_var(s: &str) -> Option<std::result::Result<Var, ()>> {
    let digits = s.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(digits.parse::<Var>().ok().filter(|&v| v >= 1).ok_or(()))
}

impl FormulaParser<'_> {
    fn or(&mut self) -> Result<Formula> {
        let mut parts = vec![self.and()?];
        while *self.c.peek() == Tok::Or {
            self.c.bump();
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn and(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while *self.c.peek() == Tok::And {
            self.c.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.c.peek().clone() {
            Tok::Not => {
                self.c.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.c.bump();
                let f = self.or()?;
                self.c.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(q) if q == "exists" || q == "forall" => {
                self.c.bump();
                let v = self.var()?;
                let body = self.or()?;
                Ok(if q == "exists" { Formula::exists(v, body) } else { Formula::forall(v, body) })
            }
            _ => self.atom(),
        }
    }

    fn var(&mut self) -> Result<Var> {
        let pos = self.c.here();
        let name = self.c.ident()?;
        match as_var(&name) {
            Some(Ok(v)) => Ok(v),
            _ => Err(Error::syntax(pos.0, pos.1, format!("expected a variable x1, x2, ..., found `{name}`"))),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        if let (Tok::Ident(name), Tok::LParen) = (self.c.peek().clone(), self.c.peek2().clone()) {
            if let Some(r) = self.ctx.rel_index(&name) {
                let pos = self.c.here();
                self.c.bump();
                let args = self.args()?;
                let arity = self.ctx.rel(r).arity();
                if args.len() != arity {
                    return Err(Error::syntax(
                        pos.0,
                        pos.1,
                        format!("arity mismatch: relation `{name}` has arity {arity}, given {} arguments", args.len()),
                    ));
                }
                return Ok(Formula::Atom(r, args));
            }
        }
        let lhs = self.term()?;
        self.c.expect(Tok::Equals)?;
        let rhs = self.term()?;
        Ok(Formula::Equal(lhs, rhs))
    }

    fn args(&mut self) -> Result<Vec<Term>> {
        self.c.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.c.peek() != Tok::RParen {
            args.push(self.term()?);
            while *self.c.peek() == Tok::Comma {
                self.c.bump();
                args.push(self.term()?);
            }
        }
        self.c.expect(Tok::RParen)?;
        Ok(args)
    }

    fn term(&mut self) -> Result<Term> {
        let pos = self.c.here();
        match self.c.bump() {
            Tok::Int(n) => {
                let k = self.ctx.k();
                if n >= k as u64 {
                    return Err(Error::syntax(pos.0, pos.1, format!("element out of range: {n} in universe of size {k}")));
                }
                Ok(Term::Const(n as Elem))
            }
            Tok::Ident(name) => {
                match as_var(&name) {
                    Some(Ok(v)) => return Ok(Term::Var(v)),
                    Some(Err(())) => {
                        return Err(Error::syntax(pos.0, pos.1, format!("`{name}` is not a valid variable")))
                    }
                    None => {}
                }
                let op = self.ctx.op_index(&name).ok_or_else(|| {
                    if self.ctx.rel_index(&name).is_some() {
                        Error::syntax(pos.0, pos.1, format!("relation `{name}` used as a term"))
                    } else {
                        Error::UnknownSymbol(name.clone())
                    }
                })?;
                let args = self.args()?;
                let arity = self.ctx.op(op).arity();
                if args.len() != arity {
                    return Err(Error::syntax(
                        pos.0,
                        pos.1,
                        format!("arity mismatch: operation `{name}` has arity {arity}, given {} arguments", args.len()),
                    ));
                }
                Ok(Term::App(op, args))
            }
            other => {
                self.c.at -= 1;
                Err(self.c.error(format!("expected a term, found {}", other.describe())))
            }
        }
    }
}
