//! Symbolic bookkeeping for boundary invariants: scaling dimensions, chiral and gauge
//! variations, tangential integration by parts, and the consistency constraints that
//! Wess–Zumino and second-variation symmetry impose on unknown coefficient functions.

pub mod ansatz;
pub mod constraints;
pub mod error;
pub mod parse;
pub mod poly;
pub mod term;

pub use ansatz::{symmetry_constraint, wz_constraints, Ansatz, A3STRU, A45};
pub use constraints::Constraint;
pub use error::{Error, Result};
pub use parse::{parse_terms, VariationKind};
pub use poly::{expand_terms, ibp_normalize, integrate_by_parts, Poly};
pub use term::{chiral_variation, dimension_check, gauge_variation, Domain, Field, FieldSymbol, Func, Index, Target, Term};
