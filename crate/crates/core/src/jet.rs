//! Second-order jets in two variables, used for chain-rule derivatives of the boundary kernel
//! with respect to `(η, ρ) = (xⁿ + yⁿ, |x∥ − y∥|²)`.

use std::ops::{Add, Mul, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d: [f64; 2],
    pub h: [[f64; 2]; 2],
}

impl Jet2 {
    pub fn constant(v: f64) -> Self {
        Jet2 { v, ..Default::default() }
    }

    pub fn variable(v: f64, k: usize) -> Self {
        let mut j = Jet2::constant(v);
        j.d[k] = 1.0;
        j
    }

    pub fn scale(self, s: f64) -> Self {
        Jet2 {
            v: self.v * s,
            d: [self.d[0] * s, self.d[1] * s],
            h: [[self.h[0][0] * s, self.h[0][1] * s], [self.h[1][0] * s, self.h[1][1] * s]],
        }
    }

    /// Composition `f ∘ self` from `f, f', f''` at `self.v`.
    pub fn compose(self, f: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet2 { v: f, ..Default::default() };
        for a in 0..2 {
            out.d[a] = f1 * self.d[a];
            for b in 0..2 {
                out.h[a][b] = f1 * self.h[a][b] + f2 * self.d[a] * self.d[b];
            }
        }
        out
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        let mut r = self;
        r.v += o.v;
        for a in 0..2 {
            r.d[a] += o.d[a];
            for b in 0..2 {
                r.h[a][b] += o.h[a][b];
            }
        }
        r
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + o.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut r = Jet2 { v: self.v * o.v, ..Default::default() };
        for a in 0..2 {
            r.d[a] = self.d[a] * o.v + self.v * o.d[a];
            for b in 0..2 {
                r.h[a][b] = self.h[a][b] * o.v + self.d[a] * o.d[b] + self.d[b] * o.d[a] + self.v * o.h[a][b];
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_exp() {
        let x = Jet2::variable(0.3, 0);
        let y = Jet2::variable(-0.7, 1);
        let f = (x * x * y).exp();
        let v = (0.09f64 * -0.7).exp();
        assert!((f.v - v).abs() < 1e-15);
        assert!((f.d[0] - v * 2.0 * 0.3 * -0.7).abs() < 1e-15);
        assert!((f.d[1] - v * 0.09).abs() < 1e-15);
        let fxy = v * (2.0 * 0.3) + v * (2.0 * 0.3 * -0.7) * 0.09;
        assert!((f.h[0][1] - fxy).abs() < 1e-14);
        assert_eq!(f.h[0][1], f.h[1][0]);
    }
}
