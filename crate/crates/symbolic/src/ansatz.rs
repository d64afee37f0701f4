//! Ansätze and the consistency conditions imposed on them.

use num_rational::Rational64;

use crate::constraints::{reduce, relations, Constraint};
use crate::error::{Error, Result};
use crate::parse::{parse_ansatz, Entry, VariationKind};
use crate::poly::{expand_terms, ibp_normalize, Poly};
use crate::term::{chiral_variation, dimension_check, gauge_variation, Target, Term};

pub const A45: &str = include_str!("../ansatz/a45.wz");
pub const A3STRU: &str = include_str!("../ansatz/a3stru.wz");

#[derive(Clone, Debug, PartialEq)]
pub struct Ansatz {
    pub target: Target,
    pub variation: VariationKind,
    pub unknowns: Vec<String>,
    pub entries: Vec<Entry>,
    /// Entries that vanish identically (e.g. an ε contracted with a symmetric product).
    pub dropped: Vec<String>,
}

impl Ansatz {
    /// Parses, checks dimensions, drops identically vanishing entries and rejects
    /// proportional pairs.
    pub fn parse(text: &str) -> Result<Self> {
        let parsed = parse_ansatz(text)?;
        let target = Target::by_label(&parsed.target).ok_or_else(|| Error::Schema(format!("unknown target '{}'", parsed.target)))?;
        let mut entries = Vec::new();
        let mut dropped = Vec::new();
        let mut polys: Vec<Poly> = Vec::new();
        for e in parsed.entries {
            for t in &e.terms {
                if !dimension_check(t, &target) {
                    return Err(Error::Dimension(format!(
                        "`{}` has dimension {}, expected {}",
                        e.source,
                        t.dimension(),
                        target.dimension(t.domain)
                    )));
                }
            }
            let p = expand_terms(&e.terms)?;
            if p.is_zero() {
                dropped.push(e.source);
                continue;
            }
            if let Some(j) = polys.iter().position(|q| p.ratio_to(q).is_some()) {
                return Err(Error::Structural(vec![format!("`{}` is proportional to `{}`", e.source, entries_source(&entries, j))]));
            }
            polys.push(p);
            entries.push(e);
        }
        Ok(Ansatz { target, variation: parsed.variation, unknowns: parsed.unknowns, entries, dropped })
    }

    pub fn a45() -> Self {
        Self::parse(A45).expect("shipped ansatz parses")
    }

    pub fn a3stru() -> Self {
        Self::parse(A3STRU).expect("shipped ansatz parses")
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.entries.iter().flat_map(|e| e.terms.iter())
    }

    /// Raw commutator `δ₁ Q(slot = 2) − δ₂ Q(slot = 1)` before normalization.
    pub fn commutator_terms(&self) -> Vec<Term> {
        let vary = |t: &Term, l: u8| match self.variation {
            VariationKind::Chiral => chiral_variation(t, l),
            VariationKind::Gauge => gauge_variation(t, l),
        };
        let mut out = Vec::new();
        for t in self.terms() {
            out.extend(vary(&t.with_slot(2), 1));
            out.extend(vary(&t.with_slot(1), 2).into_iter().map(|x| x.scaled(Rational64::from_integer(-1))));
        }
        out
    }

    /// The commutator modulo total tangential derivatives.
    pub fn normalized_commutator(&self) -> Result<Poly> {
        ibp_normalize(&expand_terms(&self.commutator_terms())?)
    }

    fn constraints(&self, want: VariationKind) -> Result<Vec<Constraint>> {
        if self.variation != want {
            return Err(Error::Schema(format!("ansatz is set up for {:?} variations", self.variation)));
        }
        Ok(reduce(&relations(&self.normalized_commutator()?)))
    }
}

fn entries_source(entries: &[Entry], j: usize) -> &str {
    &entries[j].source
}

/// Wess–Zumino consistency: `δ_{φ₁}a(δφ₂) − δ_{φ₂}a(δφ₁) = 0`.
pub fn wz_constraints(ansatz: &Ansatz) -> Result<Vec<Constraint>> {
    ansatz.constraints(VariationKind::Chiral)
}

/// Symmetry of the second variation in `(δA⁽¹⁾, δA⁽²⁾)`.
pub fn symmetry_constraint(ansatz: &Ansatz) -> Result<Vec<Constraint>> {
    ansatz.constraints(VariationKind::Gauge)
}
