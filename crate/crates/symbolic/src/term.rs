//! Abstract boundary and bulk invariants: field symbols with index structure, unknown
//! coefficient functions of θ, and the chiral and gauge variations acting on them.

use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;

/// Field content. Label 0 on a variation field marks the open slot of an ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Field {
    Theta,
    B,
    A,
    F,
    DeltaPhi(u8),
    DeltaA(u8),
    DeltaF(u8),
}

impl Field {
    /// Scaling dimension with `[b] = [A] = 1`, `[θ] = [δφ] = 0`.
    pub fn dimension(self) -> i32 {
        match self {
            Field::Theta | Field::DeltaPhi(_) => 0,
            Field::B | Field::A | Field::DeltaA(_) => 1,
            Field::F | Field::DeltaF(_) => 2,
        }
    }

    pub fn rank(self) -> usize {
        match self {
            Field::Theta | Field::DeltaPhi(_) => 0,
            Field::B | Field::A | Field::DeltaA(_) => 1,
            Field::F | Field::DeltaF(_) => 2,
        }
    }

    fn with_slot(self, label: u8) -> Field {
        match self {
            Field::DeltaPhi(0) => Field::DeltaPhi(label),
            Field::DeltaA(0) => Field::DeltaA(label),
            Field::DeltaF(0) => Field::DeltaF(label),
            f => f,
        }
    }

    pub fn name(self) -> String {
        let lab = |l: u8| if l == 0 { String::new() } else { l.to_string() };
        match self {
            Field::Theta => "theta".into(),
            Field::B => "b".into(),
            Field::A => "A".into(),
            Field::F => "F".into(),
            Field::DeltaPhi(l) => format!("dphi{}", lab(l)),
            Field::DeltaA(l) => format!("dA{}", lab(l)),
            Field::DeltaF(l) => format!("dF{}", lab(l)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Index {
    /// The inward normal direction, never summed.
    Normal,
    Named(String),
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Normal => write!(f, "n"),
            Index::Named(s) => write!(f, "{s}"),
        }
    }
}

/// A field with tensor indices and a list of derivative indices (flat, so their order is
/// immaterial).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FieldSymbol {
    pub field: Field,
    pub indices: Vec<Index>,
    pub derivs: Vec<Index>,
}

impl FieldSymbol {
    pub fn new(field: Field, indices: Vec<Index>, derivs: Vec<Index>) -> Self {
        FieldSymbol { field, indices, derivs }
    }

    pub fn dimension(&self) -> i32 {
        self.field.dimension() + self.derivs.len() as i32
    }
}

impl fmt::Display for FieldSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.name())?;
        if self.indices.is_empty() && self.derivs.is_empty() {
            return Ok(());
        }
        let join = |v: &[Index]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "[{}", join(&self.indices))?;
        if !self.derivs.is_empty() {
            write!(f, ":{}", join(&self.derivs))?;
        }
        write!(f, "]")
    }
}

/// Unknown coefficient function `name^{(order)}(θ)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Func {
    pub name: String,
    pub order: u32,
}

impl Func {
    pub fn new(name: &str, order: u32) -> Self {
        Func { name: name.to_string(), order }
    }

    pub fn derivative(&self) -> Func {
        Func { name: self.name.clone(), order: self.order + 1 }
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name, "'".repeat(self.order as usize))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Domain {
    Bulk,
    Boundary,
}

/// `coeff · func(θ) · ε · Π factors`, all indices contracted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: Rational64,
    pub func: Option<Func>,
    pub factors: Vec<FieldSymbol>,
    pub eps: Option<Vec<Index>>,
    pub domain: Domain,
}

impl Term {
    pub fn dimension(&self) -> i32 {
        self.factors.iter().map(FieldSymbol::dimension).sum()
    }

    pub fn scaled(mut self, c: Rational64) -> Term {
        self.coeff *= c;
        self
    }

    /// Puts the open slot of an ansatz term on variation label `label`.
    pub fn with_slot(&self, label: u8) -> Term {
        let mut t = self.clone();
        for s in &mut t.factors {
            s.field = s.field.with_slot(label);
        }
        t
    }

    /// Tangential (or normal) derivative `∂_k` by the Leibniz rule; coefficient functions
    /// pick up `f′(θ)θ_{:k}`.
    pub fn derivative(&self, k: &Index) -> Vec<Term> {
        let mut out = Vec::new();
        for i in 0..self.factors.len() {
            let mut t = self.clone();
            t.factors[i].derivs.push(k.clone());
            out.push(t);
        }
        if let Some(f) = &self.func {
            let mut t = self.clone();
            t.func = Some(f.derivative());
            t.factors.push(FieldSymbol::new(Field::Theta, vec![], vec![k.clone()]));
            out.push(t);
        }
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.coeff.is_one() {
            parts.push(self.coeff.to_string());
        }
        for s in &self.factors {
            parts.push(s.to_string());
        }
        if let Some(e) = &self.eps {
            let name = if e.len() == 4 { "eps4" } else { "eps" };
            parts.push(format!("{name}[{}]", e.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")));
        }
        if let Some(func) = &self.func {
            parts.push(func.to_string());
        }
        if parts.is_empty() {
            parts.push("1".into());
        }
        let dom = match self.domain {
            Domain::Bulk => "bulk",
            Domain::Boundary => "boundary",
        };
        write!(f, "{dom} {}", parts.join(" "))
    }
}

/// Scaling-dimension targets: bulk integrands carry `n + [Q]`, boundary integrands `n − 1 + [Q]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Target {
    pub label: String,
    pub n: i32,
    pub q_dimension: i32,
}

impl Target {
    /// `a₄(γ₅δφ)`: `n = 4`, `[Q] = [δφ] = 0`.
    pub fn a4() -> Self {
        Target { label: "a4".into(), n: 4, q_dimension: 0 }
    }

    /// `a₃(δD̸)`: `n = 3`, `[Q] = [δA] = 1`.
    pub fn a3() -> Self {
        Target { label: "a3".into(), n: 3, q_dimension: 1 }
    }

    pub fn by_label(label: &str) -> Option<Self> {
        match label {
            "a4" => Some(Self::a4()),
            "a3" => Some(Self::a3()),
            _ => None,
        }
    }

    pub fn dimension(&self, domain: Domain) -> i32 {
        match domain {
            Domain::Bulk => self.n + self.q_dimension,
            Domain::Boundary => self.n - 1 + self.q_dimension,
        }
    }
}

pub fn dimension_check(term: &Term, target: &Target) -> bool {
    term.dimension() == target.dimension(term.domain)
}

/// `δ_φ` with `δθ = −2δφ`, `δb_μ = ∂_μδφ`; `A`, `F` and variation fields are inert.
pub fn chiral_variation(term: &Term, label: u8) -> Vec<Term> {
    let dphi = |derivs: Vec<Index>| FieldSymbol::new(Field::DeltaPhi(label), vec![], derivs);
    let mut out = Vec::new();
    for (i, s) in term.factors.iter().enumerate() {
        let replaced = match s.field {
            Field::Theta => Some((Rational64::from_integer(-2), dphi(s.derivs.clone()))),
            Field::B => {
                let mut d = vec![s.indices[0].clone()];
                d.extend(s.derivs.iter().cloned());
                Some((Rational64::one(), dphi(d)))
            }
            _ => None,
        };
        if let Some((c, new)) = replaced {
            let mut t = term.clone().scaled(c);
            t.factors[i] = new;
            out.push(t);
        }
    }
    if let Some(f) = &term.func {
        let mut t = term.clone().scaled(Rational64::from_integer(-2));
        t.func = Some(f.derivative());
        t.factors.insert(0, dphi(vec![]));
        out.push(t);
    }
    out.retain(|t| !t.coeff.is_zero());
    out
}

/// `δ_A` in direction `δA^{(label)}`: `A → δA`, `F → δF`; everything else inert.
pub fn gauge_variation(term: &Term, label: u8) -> Vec<Term> {
    let mut out = Vec::new();
    for (i, s) in term.factors.iter().enumerate() {
        let new = match s.field {
            Field::A => Field::DeltaA(label),
            Field::F => Field::DeltaF(label),
            _ => continue,
        };
        let mut t = term.clone();
        t.factors[i].field = new;
        out.push(t);
    }
    out
}
