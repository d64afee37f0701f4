//! Real Clifford algebra generated by `γ̃^μ = iγ^μ`, with `γ̃^μγ̃^ν + γ̃^νγ̃^μ = −2δ^{μν}`.
//!
//! Elements are stored as sixteen real coefficients on the blades `γ̃^A` (bitmask `A`,
//! factors in increasing order). Anything assembled here is real by construction; the map
//! to complex 4×4 matrices is [`Multivector::to_matrix`].

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::clifford::{tilde_blade, SpinorMatrix};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Multivector(pub [f64; 16]);

fn blade_sign(a: usize, b: usize) -> f64 {
    let mut swaps = 0u32;
    for k in 0..4 {
        if b & (1 << k) != 0 {
            swaps += (a >> (k + 1)).count_ones();
        }
    }
    swaps += (a & b).count_ones();
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Multivector {
    pub const ZERO: Multivector = Multivector([0.0; 16]);

    pub fn scalar(s: f64) -> Self {
        let mut c = [0.0; 16];
        c[0] = s;
        Multivector(c)
    }

    pub fn blade(a: usize, coef: f64) -> Self {
        let mut c = [0.0; 16];
        c[a] = coef;
        Multivector(c)
    }

    /// `γ̃^μ`.
    pub fn gamma(mu: usize) -> Self {
        Self::blade(1 << mu, 1.0)
    }

    /// `γ₅ = γ^1γ^2γ^3γ^4 = γ̃^1γ̃^2γ̃^3γ̃^4`.
    pub fn gamma5() -> Self {
        Self::blade(0b1111, 1.0)
    }

    pub fn scale(self, s: f64) -> Self {
        let mut c = self.0;
        c.iter_mut().for_each(|v| *v *= s);
        Multivector(c)
    }

    /// Hermitian conjugate of the matrix image: reverses factors and flips each `γ̃`.
    pub fn adjoint(self) -> Self {
        let mut c = self.0;
        for (a, v) in c.iter_mut().enumerate() {
            let k = a.count_ones() as i32;
            let rev = if (k * (k - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let flip = if k % 2 == 0 { 1.0 } else { -1.0 };
            *v *= rev * flip;
        }
        Multivector(c)
    }

    /// `tr(m)/4`, the identity coefficient.
    pub fn scalar_part(&self) -> f64 {
        self.0[0]
    }

    pub fn to_matrix(&self) -> SpinorMatrix {
        let mut m = SpinorMatrix::zeros();
        for (a, v) in self.0.iter().enumerate() {
            if *v != 0.0 {
                m += tilde_blade(a) * Complex64::new(*v, 0.0);
            }
        }
        m
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl Mul for Multivector {
    type Output = Multivector;
    fn mul(self, rhs: Multivector) -> Multivector {
        let mut out = [0.0; 16];
        for a in 0..16 {
            if self.0[a] == 0.0 {
                continue;
            }
            for b in 0..16 {
                if rhs.0[b] == 0.0 {
                    continue;
                }
                out[a ^ b] += blade_sign(a, b) * self.0[a] * rhs.0[b];
            }
        }
        Multivector(out)
    }
}

impl Mul<f64> for Multivector {
    type Output = Multivector;
    fn mul(self, s: f64) -> Multivector {
        self.scale(s)
    }
}

impl Add for Multivector {
    type Output = Multivector;
    fn add(self, rhs: Multivector) -> Multivector {
        let mut c = self.0;
        for (v, r) in c.iter_mut().zip(rhs.0) {
            *v += r;
        }
        Multivector(c)
    }
}

impl AddAssign for Multivector {
    fn add_assign(&mut self, rhs: Multivector) {
        *self = *self + rhs;
    }
}

impl Sub for Multivector {
    type Output = Multivector;
    fn sub(self, rhs: Multivector) -> Multivector {
        self + rhs.scale(-1.0)
    }
}

impl Neg for Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}
