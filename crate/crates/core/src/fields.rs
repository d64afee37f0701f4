//! Smooth test fields on `ℝ³ × ℝ₊` with analytic gradients and Hessians.
//!
//! Points are 4-vectors with index 3 the normal coordinate. Boundary fields (`δθ`) are sampled
//! at `xⁿ = 0`.

use serde::{Deserialize, Serialize};

/// Gaussian bump `a·(xⁿ)^p·Π_μ exp(−(x^μ − c^μ)²/2w_μ²)`; a `None` width means the field is
/// constant along that axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub center: [f64; 4],
    pub widths: [Option<f64>; 4],
    pub amplitude: f64,
    #[serde(default)]
    pub normal_power: u32,
}

/// Tails of a Gaussian beyond this many widths are below `e^{−36}`.
pub const GAUSSIAN_REACH: f64 = 8.5;

impl GaussianSpec {
    pub fn isotropic(center: [f64; 4], width: f64, amplitude: f64) -> Self {
        GaussianSpec { center, widths: [Some(width); 4], amplitude, normal_power: 0 }
    }

    fn value_grad_hess(&self, x: &[f64; 4]) -> (f64, [f64; 4], [[f64; 4]; 4]) {
        let mut g = [0.0; 4];
        let mut inv = [0.0; 4];
        let mut arg = 0.0;
        for mu in 0..4 {
            if let Some(w) = self.widths[mu] {
                let d = x[mu] - self.center[mu];
                inv[mu] = 1.0 / (w * w);
                g[mu] = -d * inv[mu];
                arg += 0.5 * d * d * inv[mu];
            }
        }
        let e = self.amplitude * (-arg).exp();
        let p = self.normal_power as i32;
        let xn = x[3];
        let (pv, p1, p2) = match p {
            0 => (1.0, 0.0, 0.0),
            1 => (xn, 1.0, 0.0),
            _ => (xn.powi(p), p as f64 * xn.powi(p - 1), (p * (p - 1)) as f64 * xn.powi(p - 2)),
        };
        let mut grad = [0.0; 4];
        let mut hess = [[0.0; 4]; 4];
        for mu in 0..4 {
            let dmu = if mu == 3 { p1 } else { 0.0 };
            grad[mu] = e * (pv * g[mu] + dmu);
            for nu in 0..4 {
                let dnu = if nu == 3 { p1 } else { 0.0 };
                let diag = if mu == nu { inv[mu] } else { 0.0 };
                let both = if mu == 3 && nu == 3 { p2 } else { 0.0 };
                hess[mu][nu] = e * (pv * (g[mu] * g[nu] - diag) + dmu * g[nu] + dnu * g[mu] + both);
            }
        }
        (e * pv, grad, hess)
    }
}

/// Axis-aligned box `[lo, hi]`; infinite entries mean no restriction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportBox {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl SupportBox {
    pub fn everything() -> Self {
        SupportBox { lo: [f64::NEG_INFINITY; 4], hi: [f64::INFINITY; 4] }
    }

    pub fn hull(&self, o: &SupportBox) -> SupportBox {
        SupportBox { lo: std::array::from_fn(|i| self.lo[i].min(o.lo[i])), hi: std::array::from_fn(|i| self.hi[i].max(o.hi[i])) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScalarField {
    Zero,
    Constant(f64),
    Gaussian(GaussianSpec),
    /// Product of smooth steps `½[tanh((x−c+h)/e) − tanh((x−c−h)/e)]` along axes with a
    /// half-width; other axes are unrestricted.
    Plateau {
        center: [f64; 4],
        half_widths: [Option<f64>; 4],
        edge: f64,
        amplitude: f64,
    },
    Sum(Vec<ScalarField>),
    Scaled(f64, Box<ScalarField>),
}

fn step(x: f64, h: f64, e: f64) -> (f64, f64, f64) {
    let (a, b) = (((x + h) / e).tanh(), ((x - h) / e).tanh());
    let (sa, sb) = (1.0 - a * a, 1.0 - b * b);
    (0.5 * (a - b), 0.5 * (sa - sb) / e, -(a * sa - b * sb) / (e * e))
}

impl ScalarField {
    pub fn value(&self, x: &[f64; 4]) -> f64 {
        self.jet(x).0
    }

    pub fn gradient(&self, x: &[f64; 4]) -> [f64; 4] {
        self.jet(x).1
    }

    pub fn hessian(&self, x: &[f64; 4]) -> [[f64; 4]; 4] {
        self.jet(x).2
    }

    pub fn jet(&self, x: &[f64; 4]) -> (f64, [f64; 4], [[f64; 4]; 4]) {
        match self {
            ScalarField::Zero => (0.0, [0.0; 4], [[0.0; 4]; 4]),
            ScalarField::Constant(c) => (*c, [0.0; 4], [[0.0; 4]; 4]),
            ScalarField::Gaussian(g) => g.value_grad_hess(x),
            ScalarField::Plateau { center, half_widths, edge, amplitude } => {
                let mut f = [(1.0, 0.0, 0.0); 4];
                for mu in 0..4 {
                    if let Some(h) = half_widths[mu] {
                        f[mu] = step(x[mu] - center[mu], h, *edge);
                    }
                }
                let prod = |skip: &[usize]| -> f64 { (0..4).filter(|m| !skip.contains(m)).map(|m| f[m].0).product() };
                let v = amplitude * prod(&[]);
                let grad = std::array::from_fn(|mu| amplitude * f[mu].1 * prod(&[mu]));
                let hess = std::array::from_fn(|mu| {
                    std::array::from_fn(|nu| {
                        if mu == nu {
                            amplitude * f[mu].2 * prod(&[mu])
                        } else {
                            amplitude * f[mu].1 * f[nu].1 * prod(&[mu, nu])
                        }
                    })
                });
                (v, grad, hess)
            }
            ScalarField::Sum(parts) => {
                let mut out = (0.0, [0.0; 4], [[0.0; 4]; 4]);
                for p in parts {
                    let (v, g, h) = p.jet(x);
                    out.0 += v;
                    for mu in 0..4 {
                        out.1[mu] += g[mu];
                        for nu in 0..4 {
                            out.2[mu][nu] += h[mu][nu];
                        }
                    }
                }
                out
            }
            ScalarField::Scaled(s, f) => {
                let (v, g, h) = f.jet(x);
                (s * v, g.map(|a| s * a), h.map(|r| r.map(|a| s * a)))
            }
        }
    }

    /// Box outside which the field is negligible (below `e^{−36}` of its peak for Gaussians).
    pub fn support(&self) -> Option<SupportBox> {
        match self {
            ScalarField::Zero => None,
            ScalarField::Constant(_) => Some(SupportBox::everything()),
            ScalarField::Gaussian(g) => Some(SupportBox {
                lo: std::array::from_fn(|m| g.widths[m].map_or(f64::NEG_INFINITY, |w| g.center[m] - GAUSSIAN_REACH * w)),
                hi: std::array::from_fn(|m| g.widths[m].map_or(f64::INFINITY, |w| g.center[m] + GAUSSIAN_REACH * w)),
            }),
            ScalarField::Plateau { center, half_widths, edge, .. } => Some(SupportBox {
                lo: std::array::from_fn(|m| half_widths[m].map_or(f64::NEG_INFINITY, |h| center[m] - h - 20.0 * edge)),
                hi: std::array::from_fn(|m| half_widths[m].map_or(f64::INFINITY, |h| center[m] + h + 20.0 * edge)),
            }),
            ScalarField::Sum(parts) => parts.iter().filter_map(|p| p.support()).reduce(|a, b| a.hull(&b)),
            ScalarField::Scaled(s, f) => {
                if *s == 0.0 {
                    None
                } else {
                    f.support()
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum VectorField {
    Zero,
    Constant([f64; 4]),
    Components(Box<[ScalarField; 4]>),
    /// `V_μ = ∂_μχ`.
    Gradient(ScalarField),
    Sum(Vec<VectorField>),
    Scaled(f64, Box<VectorField>),
}

impl VectorField {
    pub fn value(&self, x: &[f64; 4]) -> [f64; 4] {
        match self {
            VectorField::Zero => [0.0; 4],
            VectorField::Constant(c) => *c,
            VectorField::Components(c) => std::array::from_fn(|m| c[m].value(x)),
            VectorField::Gradient(chi) => chi.gradient(x),
            VectorField::Sum(parts) => parts.iter().fold([0.0; 4], |acc, p| {
                let v = p.value(x);
                std::array::from_fn(|m| acc[m] + v[m])
            }),
            VectorField::Scaled(s, f) => f.value(x).map(|a| s * a),
        }
    }

    /// `J[μ][ν] = ∂_ν V_μ`.
    pub fn jacobian(&self, x: &[f64; 4]) -> [[f64; 4]; 4] {
        match self {
            VectorField::Zero | VectorField::Constant(_) => [[0.0; 4]; 4],
            VectorField::Components(c) => std::array::from_fn(|m| c[m].gradient(x)),
            VectorField::Gradient(chi) => chi.hessian(x),
            VectorField::Sum(parts) => parts.iter().fold([[0.0; 4]; 4], |acc, p| {
                let j = p.jacobian(x);
                std::array::from_fn(|m| std::array::from_fn(|n| acc[m][n] + j[m][n]))
            }),
            VectorField::Scaled(s, f) => f.jacobian(x).map(|r| r.map(|a| s * a)),
        }
    }

    pub fn support(&self) -> Option<SupportBox> {
        match self {
            VectorField::Zero => None,
            VectorField::Constant(c) => {
                if c.iter().all(|v| *v == 0.0) {
                    None
                } else {
                    Some(SupportBox::everything())
                }
            }
            VectorField::Components(c) => c.iter().filter_map(|f| f.support()).reduce(|a, b| a.hull(&b)),
            VectorField::Gradient(chi) => chi.support(),
            VectorField::Sum(parts) => parts.iter().filter_map(|p| p.support()).reduce(|a, b| a.hull(&b)),
            VectorField::Scaled(s, f) => {
                if *s == 0.0 {
                    None
                } else {
                    f.support()
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_none()
    }

    pub fn scaled(&self, s: f64) -> VectorField {
        VectorField::Scaled(s, Box::new(self.clone()))
    }
}

/// Perturbation data for the Dyson expansion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub a: VectorField,
    pub b: VectorField,
    /// Boundary angle perturbation, read at `xⁿ = 0`.
    pub delta_theta: ScalarField,
    pub delta_phi: ScalarField,
}

impl FieldConfig {
    pub fn none() -> Self {
        FieldConfig { a: VectorField::Zero, b: VectorField::Zero, delta_theta: ScalarField::Zero, delta_phi: ScalarField::Zero }
    }

    pub fn support(&self) -> Option<SupportBox> {
        [self.a.support(), self.b.support(), self.delta_theta.support(), self.delta_phi.support()]
            .into_iter()
            .flatten()
            .reduce(|a, b| a.hull(&b))
    }
}

/// A vector field whose components are independent Gaussians with the given spec, rotated
/// through the components so that all four are distinct.
pub fn gaussian_vector(spec: &GaussianSpec, weights: [f64; 4]) -> VectorField {
    VectorField::Components(Box::new(std::array::from_fn(|m| {
        let mut s = spec.clone();
        s.amplitude *= weights[m];
        s.center[m] += 0.1 * (m as f64 - 1.5);
        ScalarField::Gaussian(s)
    })))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: &ScalarField, x: [f64; 4]) {
        let h = 1e-5;
        let (_, g, hs) = f.jet(&x);
        for mu in 0..4 {
            let mut xp = x;
            let mut xm = x;
            xp[mu] += h;
            xm[mu] -= h;
            let d = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
            assert!((d - g[mu]).abs() < 1e-6 * (1.0 + g[mu].abs()), "grad {mu}: {d} vs {}", g[mu]);
            let gp = f.gradient(&xp);
            let gm = f.gradient(&xm);
            for nu in 0..4 {
                let d2 = (gp[nu] - gm[nu]) / (2.0 * h);
                assert!((d2 - hs[nu][mu]).abs() < 1e-5 * (1.0 + hs[nu][mu].abs()), "hess {mu}{nu}");
            }
        }
    }

    #[test]
    fn gaussian_derivatives() {
        let mut s = GaussianSpec::isotropic([0.1, -0.2, 0.3, 0.5], 0.7, 1.3);
        fd_check(&ScalarField::Gaussian(s.clone()), [0.2, 0.1, -0.3, 0.4]);
        s.normal_power = 3;
        s.widths[1] = None;
        fd_check(&ScalarField::Gaussian(s), [0.2, 0.1, -0.3, 0.4]);
    }

    #[test]
    fn plateau_derivatives_and_flatness() {
        let p = ScalarField::Plateau { center: [0.0; 4], half_widths: [Some(3.0), Some(3.0), None, Some(2.0)], edge: 0.1, amplitude: 2.0 };
        fd_check(&p, [2.8, -0.4, 7.0, 1.9]);
        assert!((p.value(&[0.0, 0.5, 100.0, 0.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_field_jacobian_is_symmetric() {
        let chi = ScalarField::Gaussian(GaussianSpec::isotropic([0.0, 0.0, 0.0, 1.0], 0.5, 1.0));
        let a = VectorField::Gradient(chi);
        let j = a.jacobian(&[0.1, 0.2, 0.3, 0.9]);
        for m in 0..4 {
            for n in 0..4 {
                assert!((j[m][n] - j[n][m]).abs() < 1e-15);
            }
        }
        assert!(VectorField::Zero.is_zero());
        assert!(!a.is_zero());
    }
}
