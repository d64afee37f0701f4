//! Linear relations among the unknown functions, read off from a normalized integrand, and
//! their reduction to a minimal set modulo θ-derivatives.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::poly::{Coefficient, Poly};
use crate::term::Func;

/// `Σ c·f^{(k)}(θ) = 0` for all θ; `None` stands for the constant 1.
pub type Relation = BTreeMap<Option<Func>, Rational64>;

/// Column order: constants first, then by derivative order, then by name.
fn column_key(f: &Option<Func>) -> (u32, u32, String) {
    match f {
        None => (0, 0, String::new()),
        Some(f) => (1, f.order, f.name.clone()),
    }
}

fn differentiate(r: &Relation) -> Relation {
    r.iter().filter_map(|(f, c)| f.as_ref().map(|f| (Some(f.derivative()), *c))).collect()
}

fn max_order(r: &Relation) -> u32 {
    r.keys().filter_map(|f| f.as_ref().map(|f| f.order)).max().unwrap_or(0)
}

/// Reduced row echelon form over the rationals, rows sorted by pivot column.
fn rref(rows: &[Relation]) -> Vec<Relation> {
    let mut cols: Vec<Option<Func>> = rows.iter().flat_map(|r| r.keys().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    cols.sort_by_key(column_key);
    let mut m: Vec<Relation> = rows.iter().filter(|r| !r.is_empty()).cloned().collect();
    let mut out: Vec<Relation> = Vec::new();
    for col in &cols {
        let Some(p) = m.iter().position(|r| r.get(col).is_some_and(|c| !c.is_zero())) else {
            continue;
        };
        let mut pivot = m.swap_remove(p);
        let inv = Rational64::one() / pivot[col];
        for c in pivot.values_mut() {
            *c *= inv;
        }
        let eliminate = |r: &mut Relation, pivot: &Relation| {
            if let Some(f) = r.get(col).copied() {
                for (k, v) in pivot {
                    let e = r.entry(k.clone()).or_insert_with(Rational64::zero);
                    *e -= f * *v;
                }
                r.retain(|_, v| !v.is_zero());
            }
        };
        for r in m.iter_mut() {
            eliminate(r, &pivot);
        }
        for r in out.iter_mut() {
            eliminate(r, &pivot);
        }
        m.retain(|r| !r.is_empty());
        out.push(pivot);
    }
    out
}

fn in_span(r: &Relation, basis: &[Relation]) -> bool {
    let mut rows = basis.to_vec();
    let before = rref(&rows).len();
    rows.push(r.clone());
    rref(&rows).len() == before
}

/// A normalized relation, leading coefficient 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub terms: Vec<ConstraintTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConstraintTerm {
    /// `None` for a constant term.
    pub function: Option<String>,
    pub derivative_order: u32,
    /// Exact rational, e.g. `-2` or `1/3`.
    pub coefficient: String,
    #[serde(skip)]
    pub value: Rational64,
}

impl Constraint {
    fn from_relation(r: &Relation) -> Self {
        let mut keys: Vec<&Option<Func>> = r.keys().collect();
        keys.sort_by_key(|f| column_key(f));
        let lead = r[keys[0]];
        let terms = keys
            .into_iter()
            .map(|f| {
                let v = r[f] / lead;
                ConstraintTerm {
                    function: f.as_ref().map(|f| f.name.clone()),
                    derivative_order: f.as_ref().map_or(0, |f| f.order),
                    coefficient: v.to_string(),
                    value: v,
                }
            })
            .collect();
        Constraint { terms }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            let sym = match &t.function {
                Some(name) => format!("{name}{}", "'".repeat(t.derivative_order as usize)),
                None => String::new(),
            };
            let v = t.value;
            let mag = v.abs();
            let sign = if v.is_negative() { "-" } else { "+" };
            let body = match (mag.is_one(), sym.is_empty()) {
                (true, false) => sym,
                (_, true) => mag.to_string(),
                (false, false) => format!("{mag} {sym}"),
            };
            if i == 0 {
                write!(f, "{}{body}", if v.is_negative() { "-" } else { "" })?;
            } else {
                write!(f, " {sign} {body}")?;
            }
        }
        write!(f, " = 0")
    }
}

/// Every nonzero monomial coefficient of a normalized integrand must vanish.
pub fn relations(p: &Poly) -> Vec<Relation> {
    p.terms.values().map(|c: &Coefficient| c.clone()).collect()
}

/// Minimal generating set: row-reduce, then drop rows that follow from θ-derivatives of rows
/// already kept.
pub fn reduce(rels: &[Relation]) -> Vec<Constraint> {
    let mut rows = rref(rels);
    rows.sort_by(|a, b| {
        let ka = (max_order(a), a.keys().map(column_key).min());
        let kb = (max_order(b), b.keys().map(column_key).min());
        ka.cmp(&kb)
    });
    let top = rows.iter().map(max_order).max().unwrap_or(0);
    let mut kept: Vec<Relation> = Vec::new();
    for r in rows {
        let mut consequences = Vec::new();
        for k in &kept {
            let mut d = k.clone();
            while !d.is_empty() && max_order(&d) <= top {
                consequences.push(d.clone());
                d = differentiate(&d);
            }
        }
        if !in_span(&r, &consequences) {
            kept.push(r);
        }
    }
    kept.iter().map(Constraint::from_relation).collect()
}
