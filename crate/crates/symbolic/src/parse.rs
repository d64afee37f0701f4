//! Reader for ansatz files.
//!
//! ```text
//! # comment
//! ansatz a4                  target registry label
//! variation chiral           chiral | gauge
//! unknowns f1 f2             coefficient functions of θ
//! boundary dphi b[i] F[j,k] eps[i,j,k] f1
//! boundary dphi F[i,j] D[k](f3) eps[i,j,k]
//! bulk -1/32 dphi eps4[a,b,c,d] F[a,b] F[c,d]
//! ```
//!
//! Atoms are `theta`, `b`, `A`, `F`, `dphi`, `dA`, `dF` (a trailing digit labels a variation,
//! none marks the open slot), written `F[n,i:i]` for `F^{ni}_{:i}`. `n` is the normal index.
//! `D[k](…)` differentiates its argument by the Leibniz rule. A leading rational scales a term.

use std::collections::BTreeSet;

use num_rational::Rational64;
use num_traits::One;

use crate::error::{Error, Result};
use crate::term::{Domain, Field, FieldSymbol, Func, Index, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Item {
    Coeff(Rational64),
    Eps(Vec<Index>),
    Atom(FieldSymbol),
    Func(Func),
    Deriv(Vec<Index>, Vec<Item>),
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
    line: usize,
    unknowns: &'a BTreeSet<String>,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, message: format!("{} (column {})", msg.into(), self.pos + 1) }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos] == b' ' || self.s[self.pos] == b'\t' || self.s[self.pos] == b'*') {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn index_list(&mut self, stop: &[u8]) -> Result<Vec<Index>> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            if let Some(c) = self.peek() {
                if stop.contains(&c) {
                    return Ok(out);
                }
            }
            let id = self.ident();
            if id.is_empty() {
                return Err(self.err("expected an index"));
            }
            out.push(if id == "n" { Index::Normal } else { Index::Named(id) });
            self.skip_ws();
            if self.peek() == Some(b',') {
                self.pos += 1;
            }
        }
    }

    fn rational(&mut self) -> Result<Rational64> {
        let start = self.pos;
        if matches!(self.peek(), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'/') {
            self.pos += 1;
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        let (num, den) = match txt.split_once('/') {
            Some((a, b)) => (a, b),
            None => (txt, "1"),
        };
        let num: i64 = num.parse().map_err(|_| self.err(format!("bad number '{txt}'")))?;
        let den: i64 = den.parse().map_err(|_| self.err(format!("bad number '{txt}'")))?;
        if den == 0 {
            return Err(self.err("zero denominator"));
        }
        Ok(Rational64::new(num, den))
    }

    fn product(&mut self, close: Option<u8>) -> Result<Vec<Item>> {
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => {
                    if close.is_some() {
                        return Err(self.err("unclosed parenthesis"));
                    }
                    return Ok(items);
                }
                Some(c) if Some(c) == close => {
                    self.pos += 1;
                    return Ok(items);
                }
                Some(c) if c.is_ascii_digit() || c == b'-' || c == b'+' => items.push(Item::Coeff(self.rational()?)),
                Some(c) if c.is_ascii_alphabetic() => items.push(self.word()?),
                Some(_) => return Err(self.err("unexpected character")),
            }
        }
    }

    fn word(&mut self) -> Result<Item> {
        let id = self.ident();
        match id.as_str() {
            "eps" | "eps4" => {
                self.expect(b'[')?;
                let idx = self.index_list(b"]")?;
                self.expect(b']')?;
                let want = if id == "eps" { 3 } else { 4 };
                if idx.len() != want {
                    return Err(self.err(format!("{id} takes {want} indices")));
                }
                Ok(Item::Eps(idx))
            }
            "D" => {
                self.expect(b'[')?;
                let idx = self.index_list(b"]")?;
                self.expect(b']')?;
                self.skip_ws();
                self.expect(b'(')?;
                Ok(Item::Deriv(idx, self.product(Some(b')'))?))
            }
            _ => {
                if let Some(field) = field_named(&id) {
                    let (mut indices, mut derivs) = (Vec::new(), Vec::new());
                    if self.peek() == Some(b'[') {
                        self.pos += 1;
                        indices = self.index_list(b":]")?;
                        if self.peek() == Some(b':') {
                            self.pos += 1;
                            derivs = self.index_list(b"]")?;
                        }
                        self.expect(b']')?;
                    }
                    if indices.len() != field.rank() {
                        return Err(self.err(format!("{id} takes {} tensor indices", field.rank())));
                    }
                    Ok(Item::Atom(FieldSymbol::new(field, indices, derivs)))
                } else if self.unknowns.contains(&id) {
                    let mut order = 0;
                    while self.peek() == Some(b'\'') {
                        self.pos += 1;
                        order += 1;
                    }
                    Ok(Item::Func(Func::new(&id, order)))
                } else {
                    Err(Error::Schema(format!("line {}: unknown symbol '{id}'", self.line)))
                }
            }
        }
    }
}

fn field_named(id: &str) -> Option<Field> {
    let label = |prefix: &str| -> Option<u8> {
        let rest = id.strip_prefix(prefix)?;
        if rest.is_empty() {
            Some(0)
        } else {
            rest.parse().ok().filter(|l| *l > 0)
        }
    };
    match id {
        "theta" => Some(Field::Theta),
        "b" => Some(Field::B),
        "A" => Some(Field::A),
        "F" => Some(Field::F),
        _ => label("dphi").map(Field::DeltaPhi).or_else(|| label("dA").map(Field::DeltaA)).or_else(|| label("dF").map(Field::DeltaF)),
    }
}

/// Expands a parsed product into a sum of monomial terms.
fn expand(items: &[Item], domain: Domain, line: usize) -> Result<Vec<Term>> {
    let unit = Term { coeff: Rational64::one(), func: None, factors: vec![], eps: None, domain };
    let mut acc = vec![unit];
    for it in items {
        let rhs: Vec<Term> = match it {
            Item::Coeff(c) => vec![Term { coeff: *c, ..unit_like(domain) }],
            Item::Eps(e) => vec![Term { eps: Some(e.clone()), ..unit_like(domain) }],
            Item::Atom(a) => vec![Term { factors: vec![a.clone()], ..unit_like(domain) }],
            Item::Func(f) => vec![Term { func: Some(f.clone()), ..unit_like(domain) }],
            Item::Deriv(idx, inner) => {
                let mut terms = expand(inner, domain, line)?;
                for k in idx {
                    terms = terms.iter().flat_map(|t| t.derivative(k)).collect();
                }
                terms
            }
        };
        let mut next = Vec::new();
        for a in &acc {
            for b in &rhs {
                next.push(multiply(a, b, line)?);
            }
        }
        acc = next;
    }
    for t in &acc {
        if t.factors.iter().any(|s| s.field == Field::Theta && s.derivs.is_empty()) {
            return Err(Error::Parse { line, message: "bare theta must be absorbed into a coefficient function".into() });
        }
    }
    Ok(acc)
}

fn unit_like(domain: Domain) -> Term {
    Term { coeff: Rational64::one(), func: None, factors: vec![], eps: None, domain }
}

fn multiply(a: &Term, b: &Term, line: usize) -> Result<Term> {
    let err = |m: &str| Error::Parse { line, message: m.into() };
    let func = match (&a.func, &b.func) {
        (Some(_), Some(_)) => return Err(err("at most one coefficient function per term")),
        (f, None) | (None, f) => f.clone(),
    };
    let eps = match (&a.eps, &b.eps) {
        (Some(_), Some(_)) => return Err(err("at most one Levi-Civita symbol per term")),
        (e, None) | (None, e) => e.clone(),
    };
    let mut factors = a.factors.clone();
    factors.extend(b.factors.iter().cloned());
    Ok(Term { coeff: a.coeff * b.coeff, func, factors, eps, domain: a.domain })
}

/// One ansatz line in source form together with its expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub source: String,
    pub terms: Vec<Term>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariationKind {
    Chiral,
    Gauge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedAnsatz {
    pub target: String,
    pub variation: VariationKind,
    pub unknowns: Vec<String>,
    pub entries: Vec<Entry>,
}

pub fn parse_ansatz(text: &str) -> Result<ParsedAnsatz> {
    let mut target = None;
    let mut variation = None;
    let mut unknowns: BTreeSet<String> = BTreeSet::new();
    let mut order = Vec::new();
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        let (head, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let rest = rest.trim();
        match head {
            "ansatz" => target = Some(rest.to_string()),
            "variation" => {
                variation = Some(match rest {
                    "chiral" => VariationKind::Chiral,
                    "gauge" => VariationKind::Gauge,
                    _ => return Err(Error::Parse { line, message: format!("unknown variation '{rest}'") }),
                })
            }
            "unknowns" => {
                for u in rest.split_whitespace() {
                    if field_named(u).is_some() || ["eps", "eps4", "D", "n"].contains(&u) {
                        return Err(Error::Parse { line, message: format!("'{u}' is reserved") });
                    }
                    if unknowns.insert(u.to_string()) {
                        order.push(u.to_string());
                    }
                }
            }
            "bulk" | "boundary" => {
                let domain = if head == "bulk" { Domain::Bulk } else { Domain::Boundary };
                let mut cur = Cursor { s: rest.as_bytes(), pos: 0, line, unknowns: &unknowns };
                let items = cur.product(None)?;
                entries.push(Entry { source: body.to_string(), terms: expand(&items, domain, line)? });
            }
            _ => return Err(Error::Parse { line, message: format!("unknown directive '{head}'") }),
        }
    }
    Ok(ParsedAnsatz {
        target: target.ok_or(Error::Parse { line: 0, message: "missing 'ansatz' line".into() })?,
        variation: variation.ok_or(Error::Parse { line: 0, message: "missing 'variation' line".into() })?,
        unknowns: order,
        entries,
    })
}

/// Parses a single term line (`boundary …` or `bulk …`) against the given unknowns.
pub fn parse_terms(line: &str, unknowns: &[&str]) -> Result<Vec<Term>> {
    let set: BTreeSet<String> = unknowns.iter().map(|s| s.to_string()).collect();
    let body = line.trim();
    let (head, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
    let domain = match head {
        "bulk" => Domain::Bulk,
        "boundary" => Domain::Boundary,
        _ => return Err(Error::Parse { line: 1, message: format!("expected 'bulk' or 'boundary', got '{head}'") }),
    };
    let mut cur = Cursor { s: rest.trim().as_bytes(), pos: 0, line: 1, unknowns: &set };
    let items = cur.product(None)?;
    expand(&items, domain, 1)
}
