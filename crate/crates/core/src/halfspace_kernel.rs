//! Heat kernel of `D̸²` on `ℝ³ × ℝ₊` for `A = b = 0`, constant boundary angle `θ` and the
//! chiral bag condition `Π₋(θ)ψ|_{xⁿ=0} = 0`:
//!
//! ```text
//! K₀ = 𝒦·1 − (1/τ)∂ₙℬ·𝒫₊ + ∂_jℬ·γ₅γⁿγ^j𝒫₊
//! ```
//!
//! `ℬ` is carried as `β = ℬ/τ`, which is regular at `θ = 0`:
//!
//! ```text
//! β = c²√π/(8π²t^{3/2}) e^{−(η²+σ²)/4t} [c R − (s²η/2√t) Q],
//! R = Re w(x+iy), Q = Im w(x+iy)/x,  x = −σs/2√t,  y = ηc/2√t
//! ```
//!
//! with `c = cosh θ`, `s = sinh θ`, `τ = tanh θ`. For `ε = −1` the kernel is `γ₅K₀γ₅`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::clifford::{gammas, hermitian_projectors, BoundaryFrame, Sign, SpinorMatrix, I, NORMAL};
use crate::error::{Error, Result};
use crate::faddeeva::{rq_partials, w, w_power_series};
use crate::jet::Jet2;
use crate::multivector::Multivector;
use crate::quadrature::adaptive;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub theta: f64,
    pub epsilon: Sign,
}

impl KernelConfig {
    pub fn new(theta: f64, epsilon: Sign) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::Domain(format!("theta must be finite, got {theta}")));
        }
        Ok(KernelConfig { theta, epsilon })
    }

    pub fn flipped(&self) -> Self {
        KernelConfig { theta: self.theta, epsilon: self.epsilon.flip() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpacePoint {
    pub tangential: [f64; 3],
    pub normal: f64,
}

impl HalfSpacePoint {
    pub fn new(tangential: [f64; 3], normal: f64) -> Result<Self> {
        if normal < 0.0 || !normal.is_finite() {
            return Err(Error::Domain(format!("normal coordinate must be >= 0, got {normal}")));
        }
        Ok(HalfSpacePoint { tangential, normal })
    }

    pub fn coords(&self) -> [f64; 4] {
        [self.tangential[0], self.tangential[1], self.tangential[2], self.normal]
    }

    pub fn from_coords(x: [f64; 4]) -> Self {
        HalfSpacePoint { tangential: [x[0], x[1], x[2]], normal: x[3] }
    }
}

#[derive(Clone, Debug)]
pub struct KernelValue {
    pub value: SpinorMatrix,
    pub x: HalfSpacePoint,
    pub y: HalfSpacePoint,
    pub t: f64,
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("proper time must be > 0, got {t}")))
    }
}

fn voigt_z(u: f64, t: f64) -> Complex64 {
    Complex64::new(-u, 1.0) / (2.0 * t.sqrt())
}

/// `U(u,t) = (4πt)^{−1/2} ∫ e^{−(u−y)²/4t} /(y²+1) dy`.
pub fn voigt_u(u: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok((PI / (4.0 * t)).sqrt() * w(voigt_z(u, t)).re)
}

/// `V(u,t) = (4πt)^{−1/2} ∫ e^{−(u−y)²/4t} y/(y²+1) dy`.
pub fn voigt_v(u: f64, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(-(PI / (4.0 * t)).sqrt() * w(voigt_z(u, t)).im)
}

/// Independent evaluation of `(U, V)`: adaptive quadrature of the defining integrals, or for
/// `t > 10³` the small-argument power series of the smeared Lorentzian.
pub fn voigt_uv_oracle(u: f64, t: f64, rel_tol: f64) -> Result<(f64, f64)> {
    check_t(t)?;
    let z = voigt_z(u, t);
    if t > 1e3 && z.norm() < 1.0 {
        let s = w_power_series(z);
        let pre = (PI / (4.0 * t)).sqrt();
        return Ok((pre * s.re, -pre * s.im));
    }
    let half = 12.0 * t.sqrt();
    let mut breaks = vec![u - half, u + half];
    for b in [-1.0, 0.0, 1.0, u] {
        if b > u - half && b < u + half {
            breaks.push(b);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let norm = 1.0 / (4.0 * PI * t).sqrt();
    let g = |y: f64| norm * (-(u - y) * (u - y) / (4.0 * t)).exp() / (y * y + 1.0);
    let uu = adaptive(g, &breaks, 1e-300, rel_tol, 4000)?;
    let vv = adaptive(|y| g(y) * y, &breaks, rel_tol * uu.value.abs(), rel_tol, 4000)?;
    Ok((uu.value, vv.value))
}

/// `𝒦 = (4πt)^{−2}(e^{−(ξ²+σ²)/4t} − e^{−(η²+σ²)/4t})`.
pub fn scalar_kernel(x: &HalfSpacePoint, y: &HalfSpacePoint, t: f64) -> Result<f64> {
    check_t(t)?;
    let (xi, eta, rho) = separations(&x.coords(), &y.coords());
    Ok(scalar_kernel_raw(xi, eta, rho, t))
}

fn scalar_kernel_raw(xi: f64, eta: f64, rho: f64, t: f64) -> f64 {
    let n = 1.0 / (4.0 * PI * t).powi(2);
    n * ((-(xi * xi + rho) / (4.0 * t)).exp() - (-(eta * eta + rho) / (4.0 * t)).exp())
}

fn separations(x: &[f64; 4], y: &[f64; 4]) -> (f64, f64, f64) {
    let rho = (0..3).map(|k| (x[k] - y[k]).powi(2)).sum();
    (x[NORMAL] - y[NORMAL], x[NORMAL] + y[NORMAL], rho)
}

/// `β = ℬ/τ` as a second-order jet in `(η, ρ)`.
pub fn beta_jet(eta: f64, rho: f64, t: f64, theta: f64) -> Jet2 {
    let (c, s) = (theta.cosh(), theta.sinh());
    let st = t.sqrt();
    let x = -rho.sqrt() * s / (2.0 * st);
    let y = eta * c / (2.0 * st);
    let p = rq_partials(x, y);
    let a = s * s / (4.0 * t); // dX/dρ
    let b = c / (2.0 * st); // dy/dη
    let lift = |v: f64, vx: f64, vy: f64, vxx: f64, vxy: f64, vyy: f64| Jet2 {
        v,
        d: [b * vy, a * vx],
        h: [[b * b * vyy, a * b * vxy], [a * b * vxy, a * a * vxx]],
    };
    let r = lift(p.r, p.r_x, p.r_y, p.r_xx, p.r_xy, p.r_yy);
    let q = lift(p.q, p.q_x, p.q_y, p.q_xx, p.q_xy, p.q_yy);
    let kappa = s * s / (2.0 * st);
    let f = r.scale(c) - (Jet2::variable(eta, 0) * q).scale(kappa);
    let e = (Jet2::variable(eta, 0) * Jet2::variable(eta, 0) + Jet2::variable(rho, 1)).scale(-1.0 / (4.0 * t)).exp();
    let pre = c * c * PI.sqrt() / (8.0 * PI * PI * t * st);
    (e * f).scale(pre)
}

/// `ℬ(x, y, t)` from its Voigt-profile form.
pub fn b_kernel(x: &HalfSpacePoint, y: &HalfSpacePoint, t: f64, cfg: &KernelConfig) -> Result<f64> {
    Ok(cfg.theta.tanh() * b_over_tau(x, y, t, cfg)?)
}

/// `ℬ/τ`, finite at `θ = 0`.
pub fn b_over_tau(x: &HalfSpacePoint, y: &HalfSpacePoint, t: f64, cfg: &KernelConfig) -> Result<f64> {
    check_t(t)?;
    let (_, eta, rho) = separations(&x.coords(), &y.coords());
    if eta <= 0.0 {
        return Err(Error::Domain("both points on the boundary (η = 0)".into()));
    }
    Ok(beta_jet(eta, rho, t, cfg.theta).v)
}

/// `𝒞(xⁿ, t) = ℬ(x, x, t)`.
pub fn c_profile(xn: f64, t: f64, cfg: &KernelConfig) -> Result<f64> {
    let p = HalfSpacePoint::new([0.0; 3], xn)?;
    b_kernel(&p, &p, t, cfg)
}

/// `ℬ` written literally through `U` and `V`; valid away from `σ = 0` and `θ = 0`.
pub fn b_kernel_voigt_form(x: &HalfSpacePoint, y: &HalfSpacePoint, t: f64, cfg: &KernelConfig) -> Result<f64> {
    check_t(t)?;
    let (_, eta, rho) = separations(&x.coords(), &y.coords());
    let sigma = rho.sqrt();
    let (c, tau) = (cfg.theta.cosh(), cfg.theta.tanh());
    let u = sigma * tau / eta;
    let tt = t / (eta * eta * c * c);
    let (uu, vv) = (voigt_u(u, tt)?, voigt_v(u, tt)?);
    let e = (-(eta * eta + rho) / (4.0 * t)).exp();
    Ok(-tau * c * c * e / (4.0 * PI * PI * t) * (-uu / eta + tau / sigma * vv))
}

/// Scalar coefficients of `K₀` on the basis `{1, 𝒫₊, γ₅γⁿγ^j𝒫₊}` and their gradients in both
/// arguments (index 3 normal).
#[derive(Clone, Copy, Debug, Default)]
pub struct KernelParts {
    pub k: f64,
    pub p: f64,
    pub v: [f64; 3],
    pub k_x: [f64; 4],
    pub k_y: [f64; 4],
    pub p_x: [f64; 4],
    pub p_y: [f64; 4],
    pub v_x: [[f64; 4]; 3],
    pub v_y: [[f64; 4]; 3],
}

#[derive(Clone, Debug)]
pub struct KernelGrad {
    pub k: SpinorMatrix,
    pub dx: [SpinorMatrix; 4],
    pub dy: [SpinorMatrix; 4],
}

#[derive(Clone, Debug, Default)]
pub struct KernelGradMv {
    pub k: Multivector,
    pub dx: [Multivector; 4],
    pub dy: [Multivector; 4],
}

/// Kernel with the spinor structure precomputed for one `(θ, ε)`.
#[derive(Clone, Debug)]
pub struct HalfSpaceKernel {
    pub cfg: KernelConfig,
    pplus: SpinorMatrix,
    npp: [SpinorMatrix; 3],
    pplus_mv: Multivector,
    npp_mv: [Multivector; 3],
}

impl HalfSpaceKernel {
    pub fn new(cfg: KernelConfig) -> Self {
        let g = gammas();
        let frame = BoundaryFrame::half_space(Sign::Plus);
        let (pp, _) = hermitian_projectors(cfg.theta, &frame);
        let mut npp = [SpinorMatrix::zeros(); 3];
        for (j, m) in npp.iter_mut().enumerate() {
            *m = g.gamma5 * g.gamma[NORMAL] * g.gamma[j] * pp;
        }
        // Same objects in the real algebra: Π₊ = ½(1 + γ₅e^{γ₅θ}γ̃ⁿ), γ₅γⁿγ^j = −γ₅γ̃ⁿγ̃^j.
        let g5 = Multivector::gamma5();
        let ex = Multivector::scalar(cfg.theta.cosh()) + g5 * cfg.theta.sinh();
        let pi_plus = (Multivector::scalar(1.0) + g5 * ex * Multivector::gamma(NORMAL)) * 0.5;
        let pplus_mv = pi_plus * pi_plus.adjoint() * (1.0 / cfg.theta.cosh().powi(2));
        let mut npp_mv = [Multivector::ZERO; 3];
        for (j, m) in npp_mv.iter_mut().enumerate() {
            *m = -(g5 * Multivector::gamma(NORMAL) * Multivector::gamma(j)) * pplus_mv;
        }
        let mut k = HalfSpaceKernel { cfg, pplus: pp, npp, pplus_mv, npp_mv };
        if cfg.epsilon == Sign::Minus {
            let c5 = |m: &SpinorMatrix| g.gamma5 * m * g.gamma5;
            k.pplus = c5(&k.pplus);
            for m in k.npp.iter_mut() {
                *m = c5(m);
            }
            k.pplus_mv = g5 * k.pplus_mv * g5;
            for m in k.npp_mv.iter_mut() {
                *m = g5 * *m * g5;
            }
        }
        k
    }

    pub fn pplus(&self) -> &SpinorMatrix {
        &self.pplus
    }

    pub fn parts(&self, x: &[f64; 4], y: &[f64; 4], t: f64) -> KernelParts {
        let (xi, eta, rho) = separations(x, y);
        let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
        let tau = self.cfg.theta.tanh();
        let b = beta_jet(eta, rho, t, self.cfg.theta);
        let (b_e, b_r) = (b.d[0], b.d[1]);
        let (b_ee, b_er, b_rr) = (b.h[0][0], b.h[0][1], b.h[1][1]);
        let n = 1.0 / (4.0 * PI * t).powi(2);
        let e1 = (-(xi * xi + rho) / (4.0 * t)).exp();
        let e2 = (-(eta * eta + rho) / (4.0 * t)).exp();
        let k = n * (e1 - e2);
        let mut out = KernelParts { k, p: -b_e, ..Default::default() };
        for kk in 0..3 {
            out.k_x[kk] = -d[kk] / (2.0 * t) * k;
            out.k_y[kk] = -out.k_x[kk];
            out.p_x[kk] = -2.0 * d[kk] * b_er;
            out.p_y[kk] = -out.p_x[kk];
        }
        out.k_x[3] = n * (-xi / (2.0 * t) * e1 + eta / (2.0 * t) * e2);
        out.k_y[3] = n * (xi / (2.0 * t) * e1 + eta / (2.0 * t) * e2);
        out.p_x[3] = -b_ee;
        out.p_y[3] = -b_ee;
        for j in 0..3 {
            out.v[j] = 2.0 * tau * b_r * d[j];
            for kk in 0..3 {
                let delta = if j == kk { 1.0 } else { 0.0 };
                out.v_x[j][kk] = 2.0 * tau * (delta * b_r + 2.0 * d[j] * d[kk] * b_rr);
                out.v_y[j][kk] = -out.v_x[j][kk];
            }
            out.v_x[j][3] = 2.0 * tau * d[j] * b_er;
            out.v_y[j][3] = out.v_x[j][3];
        }
        out
    }

    fn combine(&self, k: f64, p: f64, v: [f64; 3]) -> SpinorMatrix {
        let mut m = self.pplus * Complex64::new(p, 0.0);
        for j in 0..3 {
            m += self.npp[j] * Complex64::new(v[j], 0.0);
        }
        for i in 0..4 {
            m[(i, i)] += k;
        }
        m
    }

    fn combine_mv(&self, k: f64, p: f64, v: [f64; 3]) -> Multivector {
        let mut m = Multivector::scalar(k) + self.pplus_mv * p;
        for j in 0..3 {
            m += self.npp_mv[j] * v[j];
        }
        m
    }

    pub fn eval(&self, x: &[f64; 4], y: &[f64; 4], t: f64) -> SpinorMatrix {
        let p = self.parts(x, y, t);
        self.combine(p.k, p.p, p.v)
    }

    pub fn eval_grad(&self, x: &[f64; 4], y: &[f64; 4], t: f64) -> KernelGrad {
        let p = self.parts(x, y, t);
        let col = |a: &[[f64; 4]; 3], mu: usize| [a[0][mu], a[1][mu], a[2][mu]];
        KernelGrad {
            k: self.combine(p.k, p.p, p.v),
            dx: std::array::from_fn(|mu| self.combine(p.k_x[mu], p.p_x[mu], col(&p.v_x, mu))),
            dy: std::array::from_fn(|mu| self.combine(p.k_y[mu], p.p_y[mu], col(&p.v_y, mu))),
        }
    }

    pub fn eval_grad_mv(&self, x: &[f64; 4], y: &[f64; 4], t: f64) -> KernelGradMv {
        let p = self.parts(x, y, t);
        let col = |a: &[[f64; 4]; 3], mu: usize| [a[0][mu], a[1][mu], a[2][mu]];
        KernelGradMv {
            k: self.combine_mv(p.k, p.p, p.v),
            dx: std::array::from_fn(|mu| self.combine_mv(p.k_x[mu], p.p_x[mu], col(&p.v_x, mu))),
            dy: std::array::from_fn(|mu| self.combine_mv(p.k_y[mu], p.p_y[mu], col(&p.v_y, mu))),
        }
    }
}

impl KernelGrad {
    /// `D̸₀(x)K = iγ^μ ∂_{x^μ}K`.
    pub fn dirac_left(&self) -> SpinorMatrix {
        let g = gammas();
        (0..4).fold(SpinorMatrix::zeros(), |acc, mu| acc + g.gamma[mu] * self.dx[mu] * I)
    }

    /// `K ←D̸₀(y) = −i (∂_{y^μ}K) γ^μ`, the conjugated left action on the second argument.
    pub fn dirac_right(&self) -> SpinorMatrix {
        let g = gammas();
        (0..4).fold(SpinorMatrix::zeros(), |acc, mu| acc - self.dy[mu] * g.gamma[mu] * I)
    }
}

impl KernelGradMv {
    /// `D̸₀ = γ̃^μ∂_μ`.
    pub fn dirac_left(&self) -> Multivector {
        (0..4).fold(Multivector::ZERO, |acc, mu| acc + Multivector::gamma(mu) * self.dx[mu])
    }

    /// `K ←D̸₀ = −(∂K)γ̃^μ`.
    pub fn dirac_right(&self) -> Multivector {
        (0..4).fold(Multivector::ZERO, |acc, mu| acc - self.dy[mu] * Multivector::gamma(mu))
    }
}

/// `K₀(x, y; t)` for the given boundary data.
pub fn eval_k0(x: &HalfSpacePoint, y: &HalfSpacePoint, t: f64, cfg: &KernelConfig) -> Result<KernelValue> {
    check_t(t)?;
    if x.normal + y.normal <= 0.0 {
        return Err(Error::Domain("both points on the boundary (η = 0)".into()));
    }
    let k = HalfSpaceKernel::new(*cfg);
    Ok(KernelValue { value: k.eval(&x.coords(), &y.coords(), t), x: *x, y: *y, t })
}

/// `tr(γ₅ K₀(x, x; t))` at normal distance `xn`; equals `−∂ₙ𝒞(xⁿ, t)`.
pub fn chiral_diagonal_trace(kernel: &HalfSpaceKernel, xn: f64, t: f64) -> f64 {
    let p = [0.0, 0.0, 0.0, xn];
    (gammas().gamma5 * kernel.eval(&p, &p, t)).trace().re
}

/// `‖(∂_t − Δ_x)K₀(x, y; t)‖` by central differences with steps `s·t` in time and `s·√t` in
/// each coordinate. `x` must sit at least `2s√t` inside the half-space.
pub fn heat_residual(kernel: &HalfSpaceKernel, x: &[f64; 4], y: &[f64; 4], t: f64, s: f64) -> Result<f64> {
    let (ht, hx) = (s * t, s * t.sqrt());
    if !(s > 0.0 && t > ht) || x[NORMAL] < 2.0 * hx {
        return Err(Error::Domain(format!("step {s} too large at t = {t}, xn = {}", x[NORMAL])));
    }
    let dt = (kernel.eval(x, y, t + ht) - kernel.eval(x, y, t - ht)) / Complex64::from(2.0 * ht);
    let k0 = kernel.eval(x, y, t);
    let mut lap = SpinorMatrix::zeros();
    for mu in 0..4 {
        let shifted = |d: f64| {
            let mut z = *x;
            z[mu] += d;
            kernel.eval(&z, y, t)
        };
        lap += (shifted(hx) + shifted(-hx) - k0 * Complex64::from(2.0)) / Complex64::from(hx * hx);
    }
    Ok(crate::clifford::frob(&(dt - lap)))
}
