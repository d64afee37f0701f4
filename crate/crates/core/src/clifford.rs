//! Euclidean Clifford algebra in four dimensions.
//!
//! Frozen representation (index 3 is the inward normal, i.e. the `x⁴` axis):
//!
//! ```text
//! γ^k = [[0, -iσ_k], [iσ_k, 0]]   k = 1, 2, 3
//! γ^4 = [[0, 1], [1, 0]]
//! γ_5 = γ^1 γ^2 γ^3 γ^4            ε^{1234} = +1
//! ```
//!
//! All four `γ^μ` are Hermitian and unitary, and `γ_5 = diag(1, 1, -1, -1)`.

use std::sync::OnceLock;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type SpinorMatrix = Matrix4<Complex64>;

/// Axis index of the normal direction in the half-space `ℝ³ × ℝ₊`.
pub const NORMAL: usize = 3;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Sign `ε = ±1` entering the boundary projector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl TryFrom<i32> for Sign {
    type Error = String;
    fn try_from(v: i32) -> Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("sign must be +1 or -1, got {other}")),
        }
    }
}

impl From<Sign> for i32 {
    fn from(s: Sign) -> i32 {
        if s == Sign::Plus {
            1
        } else {
            -1
        }
    }
}

#[derive(Clone, Debug)]
pub struct GammaRep {
    pub gamma: [SpinorMatrix; 4],
    pub gamma5: SpinorMatrix,
    pub id: SpinorMatrix,
}

/// Boundary component: orientation of the inward normal along the normal axis
/// (`+1` for `xⁿ = 0` of the half-space, `-1` for the far end of an interval) and `ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryFrame {
    pub normal_sign: f64,
    pub epsilon: Sign,
}

impl BoundaryFrame {
    pub fn half_space(epsilon: Sign) -> Self {
        BoundaryFrame { normal_sign: 1.0, epsilon }
    }

    pub fn reversed(epsilon: Sign) -> Self {
        BoundaryFrame { normal_sign: -1.0, epsilon }
    }

    /// `γⁿ` contracted with the inward unit normal.
    pub fn gamma_normal(&self) -> SpinorMatrix {
        gammas().gamma[NORMAL] * c(self.normal_sign)
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn pauli(k: usize) -> [[Complex64; 2]; 2] {
    let (o, l) = (c(0.0), c(1.0));
    match k {
        0 => [[o, l], [l, o]],
        1 => [[o, -I], [I, o]],
        _ => [[l, o], [o, -l]],
    }
}

fn block(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2], cc: [[Complex64; 2]; 2], d: [[Complex64; 2]; 2]) -> SpinorMatrix {
    let mut m = SpinorMatrix::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = a[i][j];
            m[(i, j + 2)] = b[i][j];
            m[(i + 2, j)] = cc[i][j];
            m[(i + 2, j + 2)] = d[i][j];
        }
    }
    m
}

pub fn build_gamma_rep() -> GammaRep {
    let z = [[c(0.0); 2]; 2];
    let e = [[c(1.0), c(0.0)], [c(0.0), c(1.0)]];
    let scale = |s: [[Complex64; 2]; 2], f: Complex64| {
        let mut out = s;
        for row in out.iter_mut() {
            for v in row.iter_mut() {
                *v *= f;
            }
        }
        out
    };
    let mut gamma = [SpinorMatrix::zeros(); 4];
    for (k, g) in gamma.iter_mut().take(3).enumerate() {
        *g = block(z, scale(pauli(k), -I), scale(pauli(k), I), z);
    }
    gamma[3] = block(z, e, e, z);
    let gamma5 = gamma[0] * gamma[1] * gamma[2] * gamma[3];
    GammaRep { gamma, gamma5, id: SpinorMatrix::identity() }
}

/// Shared instance of the frozen representation.
pub fn gammas() -> &'static GammaRep {
    static REP: OnceLock<GammaRep> = OnceLock::new();
    REP.get_or_init(build_gamma_rep)
}

/// `ε^{μνρσ}` with `ε^{0123} = +1` in zero-based indices.
pub fn levi_civita(idx: &[usize]) -> i32 {
    let n = idx.len();
    let mut sign = 1;
    for a in 0..n {
        for b in a + 1..n {
            if idx[a] == idx[b] {
                return 0;
            }
            if idx[a] > idx[b] {
                sign = -sign;
            }
        }
    }
    sign
}

pub fn anticommutator(a: &SpinorMatrix, b: &SpinorMatrix) -> SpinorMatrix {
    a * b + b * a
}

/// `e^{γ₅θ} = cosh θ + sinh θ γ₅`.
pub fn chiral_exp(theta: f64) -> SpinorMatrix {
    let g = gammas();
    g.id * c(theta.cosh()) + g.gamma5 * c(theta.sinh())
}

/// `Π₋(θ) = ½(1 − iε γ₅ e^{γ₅θ} γⁿ)`.
pub fn boundary_projector(theta: f64, frame: &BoundaryFrame) -> SpinorMatrix {
    let g = gammas();
    let eps = frame.epsilon.value();
    (g.id - g.gamma5 * chiral_exp(theta) * frame.gamma_normal() * (I * eps)) * c(0.5)
}

/// `Π₊(θ) = 1 − Π₋(θ)`.
pub fn plus_projector(theta: f64, frame: &BoundaryFrame) -> SpinorMatrix {
    gammas().id - boundary_projector(theta, frame)
}

/// `(𝒫₊, 𝒫₋)` with `𝒫₊ = Π₊Π₊†/cosh²θ` and `𝒫₋ = Π₋†Π₋/cosh²θ`.
pub fn hermitian_projectors(theta: f64, frame: &BoundaryFrame) -> (SpinorMatrix, SpinorMatrix) {
    let pm = boundary_projector(theta, frame);
    let pp = plus_projector(theta, frame);
    let ch2 = c(1.0 / theta.cosh().powi(2));
    (pp * pp.adjoint() * ch2, pm.adjoint() * pm * ch2)
}

/// Trace of the ordered product.
pub fn spinor_trace(factors: &[SpinorMatrix]) -> Complex64 {
    assert!(!factors.is_empty(), "spinor_trace needs at least one factor");
    let mut acc = factors[0];
    for f in &factors[1..] {
        acc *= f;
    }
    acc.trace()
}

/// Redefined generator `γ̃^μ = iγ^μ` (anti-Hermitian, squares to −1).
pub fn tilde_gamma(mu: usize) -> SpinorMatrix {
    gammas().gamma[mu] * I
}

/// Product `γ̃^{a₁}⋯γ̃^{a_k}` over the set bits of `blade` in increasing order.
pub fn tilde_blade(blade: usize) -> SpinorMatrix {
    let mut m = SpinorMatrix::identity();
    for mu in 0..4 {
        if blade & (1 << mu) != 0 {
            m *= tilde_gamma(mu);
        }
    }
    m
}

/// Coefficients of `m` in the basis of the sixteen `γ̃` blades.
///
/// The blades are unitary and trace-orthogonal, so `c_A = tr(Γ̃_A† m)/4`.
pub fn clifford_coefficients(m: &SpinorMatrix) -> [Complex64; 16] {
    let mut out = [Complex64::new(0.0, 0.0); 16];
    for (a, o) in out.iter_mut().enumerate() {
        *o = (tilde_blade(a).adjoint() * m).trace() / 4.0;
    }
    out
}

/// Entrywise Frobenius norm.
pub fn frob(m: &SpinorMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clifford_relations_are_integer_exact() {
        let g = gammas();
        for mu in 0..4 {
            for nu in 0..4 {
                let ac = anticommutator(&g.gamma[mu], &g.gamma[nu]);
                let expect = if mu == nu { g.id * c(2.0) } else { SpinorMatrix::zeros() };
                assert_eq!(ac, expect, "mu={mu} nu={nu}");
            }
            assert_eq!(g.gamma[mu].adjoint(), g.gamma[mu]);
            assert_eq!(anticommutator(&g.gamma5, &g.gamma[mu]), SpinorMatrix::zeros());
        }
        assert_eq!(g.gamma5 * g.gamma5, g.id);
        assert_eq!(g.gamma5.adjoint(), g.gamma5);
    }

    #[test]
    fn gamma5_from_epsilon_contraction() {
        let g = gammas();
        let mut sum = SpinorMatrix::zeros();
        for a in 0..4 {
            for b in 0..4 {
                for cc in 0..4 {
                    for d in 0..4 {
                        let e = levi_civita(&[a, b, cc, d]);
                        if e != 0 {
                            sum += g.gamma[a] * g.gamma[b] * g.gamma[cc] * g.gamma[d] * c(e as f64);
                        }
                    }
                }
            }
        }
        assert!(frob(&(sum * c(1.0 / 24.0) - g.gamma5)) < 1e-15);
    }

    #[test]
    fn orientation_trace() {
        let g = gammas();
        let t = spinor_trace(&[g.gamma5, g.gamma[0], g.gamma[1], g.gamma[2], g.gamma[3]]);
        assert_eq!(t, c(4.0));
    }

    #[test]
    fn projector_at_zero_angle() {
        let g = gammas();
        let f = BoundaryFrame::half_space(Sign::Plus);
        let expect = (g.id - g.gamma5 * g.gamma[NORMAL] * I) * c(0.5);
        assert!(frob(&(boundary_projector(0.0, &f) - expect)) < 1e-15);
        let (pp, _) = hermitian_projectors(0.0, &f);
        assert!(frob(&(pp - plus_projector(0.0, &f))) < 1e-15);
    }

    #[test]
    fn chiral_trace_of_hermitian_projector() {
        let g = gammas();
        let f = BoundaryFrame::half_space(Sign::Plus);
        let (pp, _) = hermitian_projectors(1.0, &f);
        let t = spinor_trace(&[g.gamma5, pp]);
        assert!((t - c(2.0 * 1f64.tanh())).norm() < 1e-14);
        assert!((t.re - 1.52318).abs() < 1e-5);
    }

    #[test]
    fn blade_decomposition_reconstructs() {
        let g = gammas();
        let m = g.gamma[0] * g.gamma[2] * c(0.3) + g.gamma5 * I + g.id * c(2.0);
        let co = clifford_coefficients(&m);
        let mut back = SpinorMatrix::zeros();
        for (a, v) in co.iter().enumerate() {
            back += tilde_blade(a) * *v;
        }
        assert!(frob(&(back - m)) < 1e-14);
    }

    #[test]
    fn levi_civita_signs() {
        assert_eq!(levi_civita(&[0, 1, 2, 3]), 1);
        assert_eq!(levi_civita(&[1, 0, 2, 3]), -1);
        assert_eq!(levi_civita(&[3, 0, 1, 2]), -1);
        assert_eq!(levi_civita(&[0, 0, 2, 3]), 0);
    }
}
