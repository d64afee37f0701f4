//! Component form. Every contracted term is written out in explicit components
//! (tangential 0, 1, 2 and normal 3) as a polynomial in boundary jets `∂^α A_μ`, `∂^α θ`, …,
//! which are independent functions on a flat, totally geodesic boundary. `F` is expanded
//! through `A`, so Bianchi identities hold identically.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::term::{Domain, Field, Func, Index, Term};

pub const NORMAL: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum JetField {
    Theta,
    B,
    A,
    DeltaPhi(u8),
    DeltaA(u8),
}

impl JetField {
    fn variation_label(self) -> Option<u8> {
        match self {
            JetField::DeltaPhi(l) | JetField::DeltaA(l) => Some(l),
            _ => None,
        }
    }
}

/// `∂^d` of component `comp` of a field; `d[3]` counts normal derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Jet {
    pub field: JetField,
    pub comp: u8,
    pub d: [u8; 4],
}

impl Jet {
    fn bumped(mut self, dir: usize) -> Jet {
        self.d[dir] += 1;
        self
    }
}

const AXES: [&str; 4] = ["x", "y", "z", "n"];

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (ax, k) in AXES.iter().zip(self.d) {
            for _ in 0..k {
                write!(f, "∂{ax}")?;
            }
        }
        match self.field {
            JetField::Theta => write!(f, "θ"),
            JetField::B => write!(f, "b_{}", AXES[self.comp as usize]),
            JetField::A => write!(f, "A_{}", AXES[self.comp as usize]),
            JetField::DeltaPhi(l) => write!(f, "δφ{l}"),
            JetField::DeltaA(l) => write!(f, "δA{l}_{}", AXES[self.comp as usize]),
        }
    }
}

pub type Monomial = Vec<Jet>;

/// Linear combination of coefficient functions; `None` is the constant 1.
pub type Coefficient = BTreeMap<Option<Func>, Rational64>;

/// Sum of `coefficient(θ) · monomial`, keyed by domain and sorted monomial.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    pub terms: BTreeMap<(Domain, Monomial), Coefficient>,
}

impl Poly {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, domain: Domain, mut m: Monomial, func: Option<Func>, c: Rational64) {
        if c.is_zero() {
            return;
        }
        m.sort();
        let key = (domain, m);
        let coeff = self.terms.entry(key.clone()).or_default();
        let v = coeff.entry(func.clone()).or_insert_with(Rational64::zero);
        *v += c;
        if v.is_zero() {
            coeff.remove(&func);
            if coeff.is_empty() {
                self.terms.remove(&key);
            }
        }
    }

    pub fn add(&mut self, other: &Poly) {
        for ((dom, m), coeff) in &other.terms {
            for (f, c) in coeff {
                self.add_term(*dom, m.clone(), f.clone(), *c);
            }
        }
    }

    pub fn scaled(&self, s: Rational64) -> Poly {
        let mut out = Poly::default();
        for ((dom, m), coeff) in &self.terms {
            for (f, c) in coeff {
                out.add_term(*dom, m.clone(), f.clone(), *c * s);
            }
        }
        out
    }

    /// Iterates `(domain, monomial, function, coefficient)`.
    pub fn entries(&self) -> impl Iterator<Item = (Domain, &Monomial, &Option<Func>, Rational64)> {
        self.terms.iter().flat_map(|((d, m), coeff)| coeff.iter().map(move |(f, c)| (*d, m, f, *c)))
    }

    /// `c` with `self = c · other`, if any.
    pub fn ratio_to(&self, other: &Poly) -> Option<Rational64> {
        if self.terms.len() != other.terms.len() || self.is_zero() {
            return None;
        }
        let (k, coeff) = self.terms.iter().next()?;
        let (f, c) = coeff.iter().next()?;
        let o = other.terms.get(k)?.get(f)?;
        let ratio = *c / *o;
        (other.scaled(ratio) == *self).then_some(ratio)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((dom, m), coeff) in &self.terms {
            let cs: Vec<String> = coeff
                .iter()
                .map(|(func, c)| match func {
                    Some(func) => format!("{c}·{func}"),
                    None => c.to_string(),
                })
                .collect();
            let mono: Vec<String> = m.iter().map(|j| j.to_string()).collect();
            let tag = if *dom == Domain::Bulk { "[bulk] " } else { "" };
            if !first {
                writeln!(f)?;
            }
            first = false;
            write!(f, "{tag}({}) {}", cs.join(" + "), mono.join(" "))?;
        }
        Ok(())
    }
}

fn levi_civita(c: &[usize]) -> i64 {
    let mut sign = 1;
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            if c[i] == c[j] {
                return 0;
            }
            if c[i] > c[j] {
                sign = -sign;
            }
        }
    }
    sign
}

fn jet_field(f: Field) -> JetField {
    match f {
        Field::Theta => JetField::Theta,
        Field::B => JetField::B,
        Field::A | Field::F => JetField::A,
        Field::DeltaPhi(l) => JetField::DeltaPhi(l),
        Field::DeltaA(l) | Field::DeltaF(l) => JetField::DeltaA(l),
    }
}

/// Writes a contracted term out in components.
pub fn expand_term(term: &Term) -> Result<Poly> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let all = term.factors.iter().flat_map(|s| s.indices.iter().chain(&s.derivs)).chain(term.eps.iter().flatten());
    for i in all {
        if let Index::Named(n) = i {
            *counts.entry(n.as_str()).or_default() += 1;
        }
    }
    if let Some((name, c)) = counts.iter().find(|(_, c)| **c != 2) {
        return Err(Error::Structural(vec![format!("index '{name}' occurs {c} times in `{term}`")]));
    }
    let range: usize = match term.domain {
        Domain::Boundary => 3,
        Domain::Bulk => 4,
    };
    if let Some(e) = &term.eps {
        let want = if term.domain == Domain::Bulk { 4 } else { 3 };
        if e.len() != want || (term.domain == Domain::Boundary && e.contains(&Index::Normal)) {
            return Err(Error::Structural(vec![format!("Levi-Civita symbol does not fit the domain in `{term}`")]));
        }
    }
    let names: Vec<&str> = counts.keys().copied().collect();
    let mut poly = Poly::default();
    let total = range.pow(names.len() as u32);
    for code in 0..total {
        let mut val = BTreeMap::new();
        let mut c = code;
        for n in &names {
            val.insert(*n, c % range);
            c /= range;
        }
        let comp = |i: &Index| match i {
            Index::Normal => NORMAL,
            Index::Named(n) => val[n.as_str()],
        };
        let mut sign = 1i64;
        if let Some(e) = &term.eps {
            let comps: Vec<usize> = e.iter().map(comp).collect();
            sign = levi_civita(&comps);
            if sign == 0 {
                continue;
            }
        }
        // Each factor becomes a short signed sum of jets.
        let mut product: Vec<(i64, Monomial)> = vec![(sign, vec![])];
        for s in &term.factors {
            let mut d = [0u8; 4];
            for k in &s.derivs {
                d[comp(k)] += 1;
            }
            let jf = jet_field(s.field);
            let options: Vec<(i64, Jet)> = match s.field {
                Field::F | Field::DeltaF(_) => {
                    let (a, b) = (comp(&s.indices[0]), comp(&s.indices[1]));
                    if a == b {
                        vec![]
                    } else {
                        let ja = Jet { field: jf, comp: b as u8, d }.bumped(a);
                        let jb = Jet { field: jf, comp: a as u8, d }.bumped(b);
                        vec![(1, ja), (-1, jb)]
                    }
                }
                _ => {
                    let c = s.indices.first().map(comp).unwrap_or(0);
                    vec![(1, Jet { field: jf, comp: c as u8, d })]
                }
            };
            let mut next = Vec::new();
            for (sg, m) in &product {
                for (so, j) in &options {
                    let mut m2 = m.clone();
                    m2.push(*j);
                    next.push((sg * so, m2));
                }
            }
            product = next;
        }
        for (sg, m) in product {
            poly.add_term(term.domain, m, term.func.clone(), term.coeff * Rational64::from_integer(sg));
        }
    }
    Ok(poly)
}

pub fn expand_terms(terms: &[Term]) -> Result<Poly> {
    let mut poly = Poly::default();
    let mut offenders = Vec::new();
    for t in terms {
        match expand_term(t) {
            Ok(p) => poly.add(&p),
            Err(Error::Structural(v)) => offenders.extend(v),
            Err(e) => return Err(e),
        }
    }
    if offenders.is_empty() {
        Ok(poly)
    } else {
        Err(Error::Structural(offenders))
    }
}

/// `∂_dir(func(θ) · m)` as a list of `(monomial, function, multiplicity)`.
fn differentiate(m: &[Jet], func: &Option<Func>, dir: usize) -> Vec<(Monomial, Option<Func>)> {
    let mut out = Vec::new();
    for i in 0..m.len() {
        let mut m2 = m.to_vec();
        m2[i] = m2[i].bumped(dir);
        out.push((m2, func.clone()));
    }
    if let Some(f) = func {
        let mut m2 = m.to_vec();
        let mut d = [0u8; 4];
        d[dir] = 1;
        m2.push(Jet { field: JetField::Theta, comp: 0, d });
        out.push((m2, Some(f.derivative())));
    }
    out
}

/// Tangential derivative of a whole polynomial.
pub fn derivative(p: &Poly, dir: usize) -> Poly {
    let mut out = Poly::default();
    for (dom, m, f, c) in p.entries() {
        for (m2, f2) in differentiate(m, f, dir) {
            out.add_term(dom, m2, f2, c);
        }
    }
    out
}

/// The variation field integrated against: the lowest variation label in the monomial.
fn test_jet(m: &[Jet]) -> Result<Option<usize>> {
    let Some(label) = m.iter().filter_map(|j| j.field.variation_label()).min() else {
        return Ok(None);
    };
    let idx: Vec<usize> = (0..m.len()).filter(|i| m[*i].field.variation_label() == Some(label)).collect();
    if idx.len() != 1 {
        return Err(Error::Structural(vec![format!(
            "monomial is not linear in variation {label}: {}",
            m.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(" ")
        )]));
    }
    Ok(Some(idx[0]))
}

/// Integrates by parts along the boundary until the lowest-labelled variation field in each
/// monomial carries no tangential derivatives. Normal derivatives are inert data; bulk
/// monomials admit no integration by parts, so derivatives on their test field are an error.
pub fn ibp_normalize(p: &Poly) -> Result<Poly> {
    let mut out = Poly::default();
    let mut work: VecDeque<(Domain, Monomial, Option<Func>, Rational64)> =
        p.entries().map(|(d, m, f, c)| (d, m.clone(), f.clone(), c)).collect();
    let mut offenders = Vec::new();
    while let Some((dom, m, f, c)) = work.pop_front() {
        let Some(ti) = test_jet(&m)? else {
            out.add_term(dom, m, f, c);
            continue;
        };
        let t = m[ti];
        let Some(dir) = (0..3).find(|k| t.d[*k] > 0) else {
            out.add_term(dom, m, f, c);
            continue;
        };
        if dom == Domain::Bulk {
            offenders.push(format!("bulk monomial with a differentiated test field: {t}"));
            continue;
        }
        let mut lowered = t;
        lowered.d[dir] -= 1;
        let rest: Vec<Jet> = m.iter().enumerate().filter(|(i, _)| *i != ti).map(|(_, j)| *j).collect();
        for (mut m2, f2) in differentiate(&rest, &f, dir) {
            m2.push(lowered);
            m2.sort();
            work.push_back((dom, m2, f2, -c));
        }
    }
    if offenders.is_empty() {
        Ok(out)
    } else {
        offenders.sort();
        offenders.dedup();
        Err(Error::Structural(offenders))
    }
}

/// Moves one tangential derivative `∂_k` off variation field `label` in every term where it
/// sits; a normal direction is refused since no bulk integration is available.
pub fn integrate_by_parts(p: &Poly, label: u8, dir: usize) -> Result<Poly> {
    if dir == NORMAL {
        return Err(Error::Structural(vec!["normal derivatives of a variation are never moved".into()]));
    }
    let mut out = Poly::default();
    for (dom, m, f, c) in p.entries() {
        let pos = m.iter().position(|j| j.field.variation_label() == Some(label) && j.d[dir] > 0);
        match pos {
            Some(ti) if dom == Domain::Boundary => {
                let mut lowered = m[ti];
                lowered.d[dir] -= 1;
                let rest: Vec<Jet> = m.iter().enumerate().filter(|(i, _)| *i != ti).map(|(_, j)| *j).collect();
                for (mut m2, f2) in differentiate(&rest, f, dir) {
                    m2.push(lowered);
                    out.add_term(dom, m2, f2, -c);
                }
            }
            Some(_) => return Err(Error::Structural(vec!["no integration by parts in the bulk".into()])),
            None => out.add_term(dom, m.clone(), f.clone(), c),
        }
    }
    Ok(out)
}
