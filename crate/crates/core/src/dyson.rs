//! Dyson-type perturbation theory around `K₀`.
//!
//! A boundary insertion of `δθ` at `z ∈ ∂ℳ` contributes
//! `½ K(x,z)[←D̸ iγⁿγ₅δθ + iγⁿγ₅δθ D̸]K(z,y)`; a bulk insertion of `ΔD̸ = −γ^μΔA_μ + iγ^μγ₅Δb_μ`
//! contributes `−K(x,z)[←D̸ ΔD̸ + ΔD̸ D̸]K(z,y)`. `←D̸` acts on the kernel to its left through its
//! second argument as `K←D̸ = −i(∂K)γ^μ`.
//!
//! Every insertion and every kernel is carried twice: as complex 4×4 matrices in the physical
//! representation and as real multivectors over `γ̃^μ = iγ^μ`, where each operator is
//! `phase · (real multivector)`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::clifford::{clifford_coefficients, frob, gammas, SpinorMatrix, I, NORMAL};
use crate::config::QuadratureSpec;
use crate::error::{Error, Result};
use crate::fields::{FieldConfig, ScalarField, SupportBox};
use crate::halfspace_kernel::{HalfSpaceKernel, KernelConfig, KernelGrad, KernelGradMv};
use crate::multivector::Multivector;
use crate::quadrature::{GaussHermite, GaussLegendre};

/// A spinor operator `m = phase · mv.to_matrix()` with `mv` real.
#[derive(Clone, Copy, Debug)]
pub struct Op {
    pub m: SpinorMatrix,
    pub mv: Multivector,
    pub phase: Complex64,
}

fn slash(v: &[f64; 4]) -> (SpinorMatrix, Multivector) {
    let g = gammas();
    let mut m = SpinorMatrix::zeros();
    let mut mv = Multivector::ZERO;
    for mu in 0..4 {
        m += g.gamma[mu] * Complex64::new(v[mu], 0.0);
        mv += Multivector::gamma(mu) * v[mu];
    }
    (m, mv)
}

impl Op {
    pub fn identity(s: f64) -> Self {
        Op { m: SpinorMatrix::identity() * Complex64::new(s, 0.0), mv: Multivector::scalar(s), phase: Complex64::new(1.0, 0.0) }
    }

    /// `γ₅·s`; in the real algebra `γ₅ = γ̃¹γ̃²γ̃³γ̃⁴`.
    pub fn chirality(s: f64) -> Self {
        Op { m: gammas().gamma5 * Complex64::new(s, 0.0), mv: Multivector::gamma5() * s, phase: Complex64::new(1.0, 0.0) }
    }

    /// `γ^μv_μ = −i γ̃^μv_μ`.
    pub fn gamma_vector(v: &[f64; 4]) -> Self {
        let (m, mv) = slash(v);
        Op { m, mv, phase: -I }
    }

    /// Gauge insertion `−γ^μA_μ = γ̃^μ(iA_μ)`.
    pub fn gauge(a: &[f64; 4]) -> Self {
        let (m, mv) = slash(a);
        Op { m: -m, mv, phase: I }
    }

    /// Axial insertion `iγ^μγ₅b_μ = −iγ₅γ^μb_μ = γ̃^μγ₅b_μ`.
    pub fn axial(b: &[f64; 4]) -> Self {
        let (m, mv) = slash(b);
        Op { m: m * gammas().gamma5 * I, mv: mv * Multivector::gamma5(), phase: Complex64::new(1.0, 0.0) }
    }

    /// Boundary angle insertion `iγⁿγ₅δθ = γ̃ⁿγ₅δθ`.
    pub fn boundary_theta(dtheta: f64) -> Self {
        let g = gammas();
        Op {
            m: g.gamma[NORMAL] * g.gamma5 * Complex64::new(0.0, dtheta),
            mv: Multivector::gamma(NORMAL) * Multivector::gamma5() * dtheta,
            phase: Complex64::new(1.0, 0.0),
        }
    }

    pub fn add(&self, o: &Op) -> Result<Op> {
        if self.mv.norm() == 0.0 {
            return Ok(*o);
        }
        if o.mv.norm() == 0.0 {
            return Ok(*self);
        }
        if (self.phase - o.phase).norm() > 0.0 {
            return Err(Error::Domain("cannot add operators with different phases".into()));
        }
        Ok(Op { m: self.m + o.m, mv: self.mv + o.mv, phase: self.phase })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertionKind {
    BoundaryTheta,
    BulkA,
    BulkB,
}

#[derive(Clone, Copy, Debug)]
pub struct Insertion {
    pub kind: InsertionKind,
    pub op: Op,
}

impl Insertion {
    pub fn theta(dtheta: f64) -> Self {
        Insertion { kind: InsertionKind::BoundaryTheta, op: Op::boundary_theta(dtheta) }
    }

    pub fn gauge(a: &[f64; 4]) -> Self {
        Insertion { kind: InsertionKind::BulkA, op: Op::gauge(a) }
    }

    pub fn axial(b: &[f64; 4]) -> Self {
        Insertion { kind: InsertionKind::BulkB, op: Op::axial(b) }
    }

    pub fn prefactor(&self) -> f64 {
        match self.kind {
            InsertionKind::BoundaryTheta => 0.5,
            InsertionKind::BulkA | InsertionKind::BulkB => -1.0,
        }
    }
}

/// `K`, `D̸K`, `K←D̸` and `D̸K←D̸` of one kernel in both routes.
struct Actions {
    plain: (SpinorMatrix, Multivector),
    left: (SpinorMatrix, Multivector),
    right: (SpinorMatrix, Multivector),
    both: Option<(SpinorMatrix, Multivector)>,
}

fn actions(k: &HalfSpaceKernel, x: &[f64; 4], y: &[f64; 4], t: f64, need_both: bool, step: f64, with_mv: bool) -> Actions {
    let g = k.eval_grad(x, y, t);
    let gm = if with_mv { k.eval_grad_mv(x, y, t) } else { KernelGradMv::default() };
    let both = need_both.then(|| mixed(k, x, y, t, step, with_mv));
    Actions { plain: (g.k, gm.k), left: (g.dirac_left(), gm.dirac_left()), right: (g.dirac_right(), gm.dirac_right()), both }
}

/// `D̸_x K(x,y) ←D̸_y` by central differences of the analytic `D̸_x K` in `y`.
fn mixed(k: &HalfSpaceKernel, x: &[f64; 4], y: &[f64; 4], t: f64, step: f64, with_mv: bool) -> (SpinorMatrix, Multivector) {
    let h = step * t.sqrt();
    let gam = gammas();
    let mut m = SpinorMatrix::zeros();
    let mut mv = Multivector::ZERO;
    for nu in 0..4 {
        let mut yp = *y;
        let mut ym = *y;
        yp[nu] += h;
        ym[nu] -= h;
        let (gp, gm) = (k.eval_grad(x, &yp, t), k.eval_grad(x, &ym, t));
        let d = (gp.dirac_left() - gm.dirac_left()) / Complex64::new(2.0 * h, 0.0);
        m -= d * gam.gamma[nu] * I;
        if with_mv {
            let (vp, vm) = (k.eval_grad_mv(x, &yp, t), k.eval_grad_mv(x, &ym, t));
            let dv = (vp.dirac_left() - vm.dirac_left()) * (1.0 / (2.0 * h));
            mv = mv - dv * Multivector::gamma(nu);
        }
    }
    (m, mv)
}

/// Chain integrand `K(x,z₁;τ₀) P₁ K(z₁,z₂;τ₁) ⋯ P_n K(z_n,y;τ_n)` for arbitrary order `n`.
/// Returns the matrix value, the real multivector value and the accumulated phase.
pub fn chain_integrand(
    kernel: &HalfSpaceKernel,
    x: &[f64; 4],
    y: &[f64; 4],
    points: &[[f64; 4]],
    insertions: &[Insertion],
    durations: &[f64],
    step: f64,
) -> (SpinorMatrix, Multivector, Complex64) {
    chain(kernel, x, y, points, insertions, durations, step, true)
}

/// Matrix route of [`chain_integrand`] only.
pub fn chain_matrix(
    kernel: &HalfSpaceKernel,
    x: &[f64; 4],
    y: &[f64; 4],
    points: &[[f64; 4]],
    insertions: &[Insertion],
    durations: &[f64],
    step: f64,
) -> SpinorMatrix {
    chain(kernel, x, y, points, insertions, durations, step, false).0
}

#[allow(clippy::too_many_arguments)]
fn chain(
    kernel: &HalfSpaceKernel,
    x: &[f64; 4],
    y: &[f64; 4],
    points: &[[f64; 4]],
    insertions: &[Insertion],
    durations: &[f64],
    step: f64,
    with_mv: bool,
) -> (SpinorMatrix, Multivector, Complex64) {
    let n = insertions.len();
    assert_eq!(points.len(), n);
    assert_eq!(durations.len(), n + 1);
    let mut ends = Vec::with_capacity(n + 2);
    ends.push(*x);
    ends.extend_from_slice(points);
    ends.push(*y);
    let acts: Vec<Actions> =
        (0..=n).map(|j| actions(kernel, &ends[j], &ends[j + 1], durations[j], j > 0 && j < n, step, with_mv)).collect();
    let mut phase = Complex64::new(1.0, 0.0);
    for ins in insertions {
        phase *= ins.op.phase;
    }
    let mut total = SpinorMatrix::zeros();
    let mut total_mv = Multivector::ZERO;
    // Bit k of `choice` set: insertion k differentiates the kernel on its right.
    for choice in 0u32..(1 << n) {
        let mut m = SpinorMatrix::identity();
        let mut mv = Multivector::scalar(1.0);
        for (j, a) in acts.iter().enumerate() {
            let first = j > 0 && choice & (1 << (j - 1)) != 0;
            let second = j < n && choice & (1 << j) == 0;
            let (km, kv) = match (first, second) {
                (false, false) => a.plain,
                (true, false) => a.left,
                (false, true) => a.right,
                (true, true) => a.both.expect("mixed derivative computed for interior kernels"),
            };
            m *= km;
            if with_mv {
                mv = mv * kv;
            }
            if j < n {
                let ins = &insertions[j];
                m *= ins.op.m * Complex64::new(ins.prefactor(), 0.0);
                if with_mv {
                    mv = mv * ins.op.mv * ins.prefactor();
                }
            }
        }
        total += m;
        total_mv += mv;
    }
    (total, total_mv, phase)
}

/// Rule for the nested proper-time and position quadratures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DysonRule {
    pub time_nodes: usize,
    pub tangential_nodes: usize,
    pub normal_panel_nodes: usize,
    /// Gaussian reach in standard deviations for position integrals.
    pub reach: f64,
    pub mixed_step: f64,
}

impl DysonRule {
    pub fn from_spec(q: &QuadratureSpec) -> Self {
        DysonRule {
            time_nodes: q.time_nodes,
            tangential_nodes: q.tangential_nodes,
            normal_panel_nodes: q.normal_nodes,
            reach: 7.5,
            mixed_step: q.mixed_derivative_step,
        }
    }

    pub fn coarser(&self) -> Self {
        DysonRule {
            time_nodes: (self.time_nodes * 3 / 4).max(2),
            tangential_nodes: (self.tangential_nodes * 3 / 4).max(2),
            normal_panel_nodes: (self.normal_panel_nodes * 3 / 4).max(2),
            ..*self
        }
    }
}

/// `w = t sin²α` on two halves of `α ∈ [0, π/2]`.
pub fn proper_time_nodes(t: f64, n: usize) -> Vec<(f64, f64)> {
    proper_time_nodes_trimmed(t, n, 0.0, 0.0)
}

/// As [`proper_time_nodes`], restricted to the `α`-range where the normal Gaussian factor
/// `exp(−a/(t−w) − b/w)` is within `e^{−46}` of its peak.
pub fn proper_time_nodes_trimmed(t: f64, n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = std::f64::consts::FRAC_PI_2;
    let f = |al: f64| {
        let w = t * al.sin().powi(2);
        let mut v = 0.0;
        if a > 0.0 {
            v += a / (t - w);
        }
        if b > 0.0 {
            v += b / w;
        }
        v
    };
    // Peak of the exponent: w* = t√b/(√a+√b).
    let (sa, sb) = (a.sqrt(), b.sqrt());
    let wstar = if sa + sb > 0.0 { t * sb / (sa + sb) } else { 0.5 * t };
    let astar = (wstar / t).sqrt().asin();
    let fmin = f(astar.clamp(1e-300, half - 1e-16));
    let edge = |lo: f64, hi: f64, rising_to_hi: bool| -> f64 {
        // f − fmin is monotone on [lo, hi]; find where it crosses 46.
        let (mut l, mut h) = (lo, hi);
        for _ in 0..80 {
            let m = 0.5 * (l + h);
            let big = f(m) - fmin > 46.0;
            if big == rising_to_hi {
                h = m
            } else {
                l = m
            }
        }
        0.5 * (l + h)
    };
    let lo = if b > 0.0 { edge(0.0, astar, false) } else { 0.0 };
    let hi = if a > 0.0 { edge(astar, half, true) } else { half };
    let gl = GaussLegendre::new(n.div_ceil(2).max(1));
    gl.composite(lo, hi, 2)
        .into_iter()
        .map(|(al, wa)| (t * al.sin().powi(2), wa * 2.0 * t * al.sin() * al.cos()))
        .filter(|(w, _)| *w > 0.0 && *w < t)
        .collect()
}

fn tangential_nodes(center: &[f64; 3], s: f64, gh: &GaussHermite) -> Vec<([f64; 3], f64)> {
    let axis: Vec<Vec<(f64, f64)>> = (0..3).map(|k| gh.for_gaussian(center[k], s)).collect();
    let mut out = Vec::with_capacity(axis[0].len().pow(3));
    for a in &axis[0] {
        for b in &axis[1] {
            for c in &axis[2] {
                out.push(([a.0, b.0, c.0], a.1 * b.1 * c.1));
            }
        }
    }
    out
}

/// Normal nodes on `[0, ∞)` covering Gaussians of width `s` about each of `centers`.
fn normal_nodes(centers: &[f64], s: f64, reach: f64, gl: &GaussLegendre) -> Vec<(f64, f64)> {
    let mut iv: Vec<(f64, f64)> =
        centers.iter().filter(|c| **c + reach * s > 0.0).map(|c| ((c - reach * s).max(0.0), c + reach * s)).collect();
    iv.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (a, b) in iv {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    let panel = 3.0 * s;
    merged
        .into_iter()
        .flat_map(|(a, b)| {
            let k = ((b - a) / panel).ceil().max(1.0) as usize;
            gl.composite(a, b, k)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct DysonEstimate {
    pub value: SpinorMatrix,
    pub abs_err: f64,
    pub evals: usize,
}

fn finish(fine: (SpinorMatrix, usize), coarse: (SpinorMatrix, usize), rel_tol: f64, scale: f64) -> Result<DysonEstimate> {
    let err = frob(&(fine.0 - coarse.0));
    let requested = rel_tol * scale.max(frob(&fine.0));
    if err > requested {
        return Err(Error::Accuracy { achieved: err, requested });
    }
    Ok(DysonEstimate { value: fine.0, abs_err: err, evals: fine.1 + coarse.1 })
}

fn theta_pass(
    kernel: &HalfSpaceKernel,
    dtheta: &ScalarField,
    x: &[f64; 4],
    y: &[f64; 4],
    t: f64,
    rule: &DysonRule,
) -> (SpinorMatrix, usize) {
    let gh = GaussHermite::new(rule.tangential_nodes);
    let times = proper_time_nodes_trimmed(t, rule.time_nodes, x[NORMAL].powi(2) / 4.0, y[NORMAL].powi(2) / 4.0);
    let parts: Vec<(SpinorMatrix, usize)> = times
        .par_iter()
        .map(|&(w, ww)| {
            let s = (2.0 * w * (t - w) / t).sqrt();
            let c: [f64; 3] = std::array::from_fn(|k| (w * x[k] + (t - w) * y[k]) / t);
            let mut acc = SpinorMatrix::zeros();
            let mut n = 0;
            for (zt, wz) in tangential_nodes(&c, s, &gh) {
                let z = [zt[0], zt[1], zt[2], 0.0];
                let d = dtheta.value(&z);
                if d == 0.0 {
                    continue;
                }
                let m = chain_matrix(kernel, x, y, &[z], &[Insertion::theta(d)], &[t - w, w], rule.mixed_step);
                acc += m * Complex64::new(ww * wz, 0.0);
                n += 1;
            }
            (acc, n)
        })
        .collect();
    parts.into_iter().fold((SpinorMatrix::zeros(), 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// First-order change of `K(x,y;t)` under `θ → θ + δθ(z∥)`.
pub fn delta_theta_first_order(
    cfg: &KernelConfig,
    dtheta: &ScalarField,
    x: &[f64; 4],
    y: &[f64; 4],
    t: f64,
    rule: &DysonRule,
    rel_tol: f64,
) -> Result<DysonEstimate> {
    check_points(x, y, t)?;
    let kernel = HalfSpaceKernel::new(*cfg);
    let scale = frob(&kernel.eval(x, y, t));
    let fine = theta_pass(&kernel, dtheta, x, y, t, rule);
    let coarse = theta_pass(&kernel, dtheta, x, y, t, &rule.coarser());
    finish(fine, coarse, rel_tol, scale)
}

fn check_points(x: &[f64; 4], y: &[f64; 4], t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("proper time must be > 0, got {t}")));
    }
    if x[NORMAL] < 0.0 || y[NORMAL] < 0.0 || x[NORMAL] + y[NORMAL] <= 0.0 {
        return Err(Error::Domain("points must lie in the half-space with xⁿ + yⁿ > 0".into()));
    }
    Ok(())
}

fn bulk_insertion(fields: &FieldConfig, z: &[f64; 4]) -> Option<Insertion> {
    let a = fields.a.value(z);
    let b = fields.b.value(z);
    let has_a = a.iter().any(|v| *v != 0.0);
    let has_b = b.iter().any(|v| *v != 0.0);
    match (has_a, has_b) {
        (false, false) => None,
        (true, false) => Some(Insertion::gauge(&a)),
        (false, true) => Some(Insertion::axial(&b)),
        (true, true) => {
            // Different phases in the real algebra; the matrix route carries the sum.
            let mut ins = Insertion::gauge(&a);
            ins.op.m += Op::axial(&b).m;
            Some(ins)
        }
    }
}

fn bulk_pass(
    kernel: &HalfSpaceKernel,
    fields: &FieldConfig,
    x: &[f64; 4],
    y: &[f64; 4],
    t: f64,
    rule: &DysonRule,
) -> (SpinorMatrix, usize) {
    let gh = GaussHermite::new(rule.tangential_nodes);
    let gl = GaussLegendre::new(rule.normal_panel_nodes);
    let times = proper_time_nodes(t, rule.time_nodes);
    let parts: Vec<(SpinorMatrix, usize)> = times
        .par_iter()
        .map(|&(w, ww)| {
            let s = (2.0 * w * (t - w) / t).sqrt();
            let c: [f64; 3] = std::array::from_fn(|k| (w * x[k] + (t - w) * y[k]) / t);
            let (xn, yn) = (x[NORMAL], y[NORMAL]);
            let centers: Vec<f64> = [(xn, yn), (-xn, yn), (xn, -yn), (-xn, -yn)].iter().map(|(a, b)| (a * w + b * (t - w)) / t).collect();
            let tang = tangential_nodes(&c, s, &gh);
            let mut acc = SpinorMatrix::zeros();
            let mut n = 0;
            for (zn, wn) in normal_nodes(&centers, s, rule.reach, &gl) {
                for (zt, wz) in &tang {
                    let z = [zt[0], zt[1], zt[2], zn];
                    let Some(ins) = bulk_insertion(fields, &z) else { continue };
                    let m = chain_matrix(kernel, x, y, &[z], &[ins], &[t - w, w], rule.mixed_step);
                    acc += m * Complex64::new(ww * wn * wz, 0.0);
                    n += 1;
                }
            }
            (acc, n)
        })
        .collect();
    parts.into_iter().fold((SpinorMatrix::zeros(), 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// First-order change of `K(x,y;t)` under `D̸ → D̸ + ΔD̸` with `ΔD̸ = −γ^μΔA_μ + iγ^μγ₅Δb_μ`.
/// The `(ΔD̸)²` term is second order and not included.
pub fn delta_d_first_order(
    cfg: &KernelConfig,
    fields: &FieldConfig,
    x: &[f64; 4],
    y: &[f64; 4],
    t: f64,
    rule: &DysonRule,
    rel_tol: f64,
) -> Result<DysonEstimate> {
    check_points(x, y, t)?;
    if fields.a.is_zero() && fields.b.is_zero() {
        return Ok(DysonEstimate { value: SpinorMatrix::zeros(), abs_err: 0.0, evals: 0 });
    }
    let kernel = HalfSpaceKernel::new(*cfg);
    let scale = frob(&kernel.eval(x, y, t));
    let fine = bulk_pass(&kernel, fields, x, y, t, rule);
    let coarse = bulk_pass(&kernel, fields, x, y, t, &rule.coarser());
    finish(fine, coarse, rel_tol, scale)
}

/// `∂_θ K₀` by a fourth-order central difference; oracle for constant `δθ`.
pub fn theta_derivative_oracle(cfg: &KernelConfig, x: &[f64; 4], y: &[f64; 4], t: f64, h: f64) -> SpinorMatrix {
    let at = |d: f64| HalfSpaceKernel::new(KernelConfig { theta: cfg.theta + d, epsilon: cfg.epsilon }).eval(x, y, t);
    ((at(h) - at(-h)) * Complex64::new(8.0, 0.0) - (at(2.0 * h) - at(-2.0 * h))) / Complex64::new(12.0 * h, 0.0)
}

/// Errors `‖K₀(θ+Δ) − K₀(θ) − Δ·D‖` for `Δ = delta/2^k`, where `D` is the first-order
/// correction for unit constant `δθ`, and the successive ratios.
pub fn constant_shift_ratios(
    cfg: &KernelConfig,
    d: &SpinorMatrix,
    x: &[f64; 4],
    y: &[f64; 4],
    t: f64,
    delta: f64,
    halvings: usize,
) -> (Vec<f64>, Vec<f64>) {
    let k0 = HalfSpaceKernel::new(*cfg).eval(x, y, t);
    let errs: Vec<f64> = (0..=halvings)
        .map(|k| {
            let dl = delta / 2f64.powi(k as i32);
            let kd = HalfSpaceKernel::new(KernelConfig { theta: cfg.theta + dl, epsilon: cfg.epsilon }).eval(x, y, t);
            frob(&(kd - k0 - d * Complex64::new(dl, 0.0)))
        })
        .collect();
    let ratios = errs.windows(2).map(|w| w[0] / w[1]).collect();
    (errs, ratios)
}

/// Tensor Gauss–Legendre rule over the tangential part of a box.
fn tangential_box_nodes(bx: &SupportBox, panels: usize, n: usize) -> Result<Vec<([f64; 3], f64)>> {
    let gl = GaussLegendre::new(n);
    let mut axes = Vec::new();
    for k in 0..3 {
        if !(bx.lo[k].is_finite() && bx.hi[k].is_finite()) {
            return Err(Error::Domain("test field must have bounded tangential support".into()));
        }
        axes.push(gl.composite(bx.lo[k], bx.hi[k], panels));
    }
    let mut out = Vec::new();
    for a in &axes[0] {
        for b in &axes[1] {
            for c in &axes[2] {
                out.push(([a.0, b.0, c.0], a.1 * b.1 * c.1));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarTrCheck {
    /// `δ_φ Tr e^{−tD̸²}` from the θ insertion (`δθ = −2δφ|∂`).
    pub lhs_theta: f64,
    /// `δ_φ Tr e^{−tD̸²}` from the b insertion (`δb = ∂δφ`).
    pub lhs_b: f64,
    /// `4t∂_t Tr(δφγ₅e^{−tD̸²})` from the `𝒞` profile.
    pub rhs: f64,
    pub residual: f64,
}

/// Diagonal quantity `S(zⁿ) = (D̸K + K←D̸)(z,z;t)`, which depends on `zⁿ` only.
fn diagonal_dirac_sum(kernel: &HalfSpaceKernel, zn: f64, t: f64) -> SpinorMatrix {
    let z = [0.0, 0.0, 0.0, zn];
    let g: KernelGrad = kernel.eval_grad(&z, &z, t);
    g.dirac_left() + g.dirac_right()
}

/// Checks `δ_φ Tr e^{−tD̸²} = 4t∂_t Tr(δφγ₅e^{−tD̸²})`.
///
/// Both traced first-order corrections are collapsed with cyclicity and the semigroup law
/// `∫K(z,x;w)K(x,z′;t−w)dx = K(z,z′;t)`, so the proper-time integral gives a factor `t`:
/// `Tr δK_θ = (t/2)∫d³z δθ tr[iγⁿγ₅ S(0)]` and `Tr δK_b = −t∫d⁴z tr[ΔD̸ S(zⁿ)]`.
/// The right side uses `∂_t∂ₙ𝒞 = −(2/t)𝒞′ − (xⁿ/2t)𝒞″` from the scaling `𝒞(xⁿ,t) = t^{−3/2}𝒞(xⁿ/√t,1)`.
pub fn chiral_variation_identity_check(cfg: &KernelConfig, delta_phi: &ScalarField, t: f64, q: &QuadratureSpec) -> Result<VarTrCheck> {
    if !(t > 0.0) {
        return Err(Error::Domain("t must be positive".into()));
    }
    let bx = delta_phi.support().ok_or_else(|| Error::Domain("δφ vanishes identically".into()))?;
    let kernel = HalfSpaceKernel::new(*cfg);
    let g = gammas();
    let tang = tangential_box_nodes(&bx, 4, 16)?;

    // θ part: δθ = −2δφ on the boundary.
    let m_theta = g.gamma[NORMAL] * g.gamma5 * I;
    let t_theta = (m_theta * diagonal_dirac_sum(&kernel, 0.0, t)).trace();
    let int_dphi0: f64 = tang.iter().map(|(z, w)| w * delta_phi.value(&[z[0], z[1], z[2], 0.0])).sum();
    let lhs_theta = (0.5 * t * -2.0 * int_dphi0 * t_theta).re;

    // Bulk part: normal integral over [0, margin√t]; beyond it every diagonal kernel term is
    // below e^{−margin²}.
    let zmax = (q.margin_sqrt_t * t.sqrt()).min(bx.hi[NORMAL].max(0.0));
    let gl = GaussLegendre::new(16);
    let normal = gl.composite(0.0, zmax, 8);
    let c_prime = |zn: f64| 2.0 * cfg.theta.tanh() * crate::halfspace_kernel::beta_jet(2.0 * zn, 0.0, t, cfg.theta).d[0];
    let c_second = |zn: f64| 4.0 * cfg.theta.tanh() * crate::halfspace_kernel::beta_jet(2.0 * zn, 0.0, t, cfg.theta).h[0][0];
    let rows: Vec<(f64, f64)> = normal
        .par_iter()
        .map(|&(zn, wn)| {
            let s = diagonal_dirac_sum(&kernel, zn, t);
            let mut grad_int = [0.0; 4];
            let mut val_int = 0.0;
            for (zt, wz) in &tang {
                let (v, gr, _) = delta_phi.jet(&[zt[0], zt[1], zt[2], zn]);
                val_int += wz * v;
                for mu in 0..4 {
                    grad_int[mu] += wz * gr[mu];
                }
            }
            let op = Op::axial(&grad_int);
            let lhs_b = -t * (op.m * s).trace().re;
            let rhs = 4.0 * val_int * (2.0 * c_prime(zn) + 0.5 * zn * c_second(zn));
            (wn * lhs_b, wn * rhs)
        })
        .collect();
    let lhs_b: f64 = rows.iter().map(|r| r.0).sum();
    let rhs: f64 = rows.iter().map(|r| r.1).sum();
    let lhs = lhs_theta + lhs_b;
    let residual = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    Ok(VarTrCheck { lhs_theta, lhs_b, rhs, residual })
}

/// One sampled integrand of a trace whose vanishing follows from pure imaginarity.
#[derive(Clone, Copy, Debug)]
pub struct ImaginarityReport {
    /// Physical-route trace.
    pub trace: Complex64,
    /// Same trace assembled from the real-multivector route: `phase · 4 · scalar part`.
    pub trace_real_route: Complex64,
    /// Largest imaginary Clifford coefficient of `m / phase` relative to its norm.
    pub max_imag_coefficient: f64,
    /// `|Re tr| / |tr|`.
    pub real_fraction: f64,
}

fn report(q: &Op, chain: (SpinorMatrix, Multivector, Complex64)) -> ImaginarityReport {
    let (m, mv, phase) = chain;
    let full = q.m * m;
    let full_mv = q.mv * mv;
    let ph = q.phase * phase;
    let trace = full.trace();
    let trace_real_route = ph * 4.0 * full_mv.scalar_part();
    let coeffs = clifford_coefficients(&(full / ph));
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let max_imag = coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max) / norm;
    ImaginarityReport {
        trace,
        trace_real_route,
        max_imag_coefficient: max_imag,
        real_fraction: trace.re.abs() / trace.norm().max(f64::MIN_POSITIVE),
    }
}

/// `tr[γ^μδA_μ(x) K(x,z;t−w)(←D̸X + XD̸)K(z,x;w)]` with `X = −iγ₅γ^νb_ν(z)` (G₁, G₂ structure).
pub fn g12_integrand(
    kernel: &HalfSpaceKernel,
    x: &[f64; 4],
    z: &[f64; 4],
    t: f64,
    w: f64,
    delta_a: &[f64; 4],
    b: &[f64; 4],
    step: f64,
) -> ImaginarityReport {
    let ins = Insertion::axial(b);
    // The bulk prefactor −1 is immaterial for the phase; keep the insertion bare.
    let mut c = chain_integrand(kernel, x, x, &[*z], &[ins], &[t - w, w], step);
    c.0 = -c.0;
    c.1 = -c.1;
    report(&Op::gamma_vector(delta_a), c)
}

/// `−½ δθ(z) tr[γ^μδA_μ(x) K(x,z;t−w)(←D̸iγⁿγ₅ + iγⁿγ₅D̸)K(z,x;w)]` with `z ∈ ∂ℳ` (G₃ structure).
pub fn g3_integrand(
    kernel: &HalfSpaceKernel,
    x: &[f64; 4],
    z: &[f64; 4],
    t: f64,
    w: f64,
    delta_a: &[f64; 4],
    dtheta: f64,
    step: f64,
) -> ImaginarityReport {
    let zb = [z[0], z[1], z[2], 0.0];
    let mut c = chain_integrand(kernel, x, x, &[zb], &[Insertion::theta(dtheta)], &[t - w, w], step);
    c.0 = -c.0;
    c.1 = -c.1;
    report(&Op::gamma_vector(delta_a), c)
}

/// `tr[γ₅δφ(x) K(x,z)P_A(z)K(z,x)]`, the A-linear chiral structure.
pub fn chiral_a_integrand(
    kernel: &HalfSpaceKernel,
    x: &[f64; 4],
    z: &[f64; 4],
    t: f64,
    w: f64,
    dphi: f64,
    a: &[f64; 4],
    step: f64,
) -> ImaginarityReport {
    let c = chain_integrand(kernel, x, x, &[*z], &[Insertion::gauge(a)], &[t - w, w], step);
    report(&Op::chirality(dphi), c)
}

/// Second-order A–b cross terms `tr[γ₅δφ K P_A K P_b K] + tr[γ₅δφ K P_b K P_A K]` at fixed
/// points and times `0 < q < w < t`.
#[allow(clippy::too_many_arguments)]
pub fn cross_integrand(
    kernel: &HalfSpaceKernel,
    x: &[f64; 4],
    z1: &[f64; 4],
    z2: &[f64; 4],
    t: f64,
    w: f64,
    q: f64,
    dphi: f64,
    fields: &FieldConfig,
    step: f64,
) -> ImaginarityReport {
    let (a1, b1) = (fields.a.value(z1), fields.b.value(z1));
    let (a2, b2) = (fields.a.value(z2), fields.b.value(z2));
    let d = [t - w, w - q, q];
    let ab = chain_integrand(kernel, x, x, &[*z1, *z2], &[Insertion::gauge(&a1), Insertion::axial(&b2)], &d, step);
    let ba = chain_integrand(kernel, x, x, &[*z1, *z2], &[Insertion::axial(&b1), Insertion::gauge(&a2)], &d, step);
    debug_assert!((ab.2 - ba.2).norm() < 1e-15);
    report(&Op::chirality(dphi), (ab.0 + ba.0, ab.1 + ba.1, ab.2))
}

#[derive(Clone, Copy, Debug)]
pub struct MonteCarloEstimate {
    pub value: Complex64,
    pub std_err: f64,
    pub samples: usize,
    /// Largest `|Re|/|·|` seen in any single sample.
    pub max_real_fraction: f64,
}

/// Seeded Monte Carlo estimate of the A–b cross terms of
/// `Tr[γ₅δφ ∫∫ K₀ P K₀ P K₀]` over `x, z₁, z₂ ∈ ℝ³×ℝ₊` and `0 < q < w < t`.
///
/// `x` is drawn from a Gaussian matched to the support of `δφ`; `z₁`, `z₂` from Gaussians of
/// variance `2τ` around the preceding point (reflected into `zⁿ > 0`). The sampler does not
/// depend on field amplitudes, so results scale exactly with them at fixed seed.
pub fn second_order_cross(
    cfg: &KernelConfig,
    fields: &FieldConfig,
    smear: &ScalarField,
    t: f64,
    samples: usize,
    seed: u64,
    step: f64,
) -> Result<MonteCarloEstimate> {
    if !(t > 0.0) {
        return Err(Error::Domain("t must be positive".into()));
    }
    if fields.a.is_zero() || fields.b.is_zero() || smear.is_zero() {
        return Ok(MonteCarloEstimate { value: Complex64::new(0.0, 0.0), std_err: 0.0, samples: 0, max_real_fraction: 0.0 });
    }
    let bx = smear.support().expect("nonzero field has support");
    let centre: [f64; 4] =
        std::array::from_fn(|m| if bx.lo[m].is_finite() && bx.hi[m].is_finite() { 0.5 * (bx.lo[m] + bx.hi[m]) } else { 0.0 });
    let spread: [f64; 4] =
        std::array::from_fn(|m| if bx.lo[m].is_finite() && bx.hi[m].is_finite() { (bx.hi[m] - bx.lo[m]) / 6.0 } else { 1.0 });
    let kernel = HalfSpaceKernel::new(*cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |rng: &mut ChaCha8Rng| -> f64 {
        // Box–Muller.
        let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let gauss_pdf = |d: f64, s: f64| (-(d * d) / (2.0 * s * s)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * s);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_sq = 0.0;
    let mut max_real: f64 = 0.0;
    for _ in 0..samples {
        let mut x = [0.0; 4];
        for m in 0..4 {
            x[m] = centre[m] + spread[m] * normal(&mut rng);
        }
        // Reflected into xⁿ > 0, so the normal density picks up the mirror term.
        x[NORMAL] = x[NORMAL].abs();
        let px: f64 = (0..4)
            .map(|m| {
                let p = gauss_pdf(x[m] - centre[m], spread[m]);
                if m == NORMAL {
                    p + gauss_pdf(-x[m] - centre[m], spread[m])
                } else {
                    p
                }
            })
            .product();
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let (w, q) = if u > v { (t * u, t * v) } else { (t * v, t * u) };
        let pt = 2.0 / (t * t);
        let step_to = |from: &[f64; 4], tau: f64, rng: &mut ChaCha8Rng| -> ([f64; 4], f64) {
            let s = (2.0 * tau).sqrt();
            let mut z = [0.0; 4];
            for m in 0..4 {
                z[m] = from[m] + s * normal(rng);
            }
            z[NORMAL] = z[NORMAL].abs();
            let p =
                (0..4)
                    .map(|m| {
                        if m == NORMAL {
                            gauss_pdf(z[m] - from[m], s) + gauss_pdf(-z[m] - from[m], s)
                        } else {
                            gauss_pdf(z[m] - from[m], s)
                        }
                    })
                    .product::<f64>();
            (z, p)
        };
        let (z1, p1) = step_to(&x, t - w, &mut rng);
        let (z2, p2) = step_to(&z1, w - q, &mut rng);
        let dphi = smear.value(&x);
        if dphi == 0.0 || px == 0.0 || p1 == 0.0 || p2 == 0.0 {
            continue;
        }
        let r = cross_integrand(&kernel, &x, &z1, &z2, t, w, q, dphi, fields, step);
        max_real = max_real.max(r.real_fraction);
        let val = r.trace / (px * pt * p1 * p2);
        sum += val;
        sum_sq += val.norm_sqr();
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean.norm_sqr()).max(0.0);
    Ok(MonteCarloEstimate { value: mean, std_err: (var / n).sqrt(), samples, max_real_fraction: max_real })
}

/// Random configuration generator for the imaginarity suite.
pub struct ImaginaritySampler {
    rng: ChaCha8Rng,
}

#[derive(Clone, Copy, Debug)]
pub struct ImaginaritySample {
    pub cfg: KernelConfig,
    pub x: [f64; 4],
    pub z1: [f64; 4],
    pub z2: [f64; 4],
    pub t: f64,
    pub w: f64,
    pub q: f64,
    pub a: [f64; 4],
    pub b: [f64; 4],
    pub scalar: f64,
}

impl ImaginaritySampler {
    pub fn new(seed: u64) -> Self {
        ImaginaritySampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn sample(&mut self) -> ImaginaritySample {
        let r = &mut self.rng;
        let theta = r.random_range(-2.0..2.0);
        let eps = if r.random::<bool>() { crate::clifford::Sign::Plus } else { crate::clifford::Sign::Minus };
        let t: f64 = r.random_range(0.05..1.0);
        let pt = |r: &mut ChaCha8Rng| -> [f64; 4] {
            [r.random_range(-0.5..0.5), r.random_range(-0.5..0.5), r.random_range(-0.5..0.5), r.random_range(0.05..1.0)]
        };
        let x = pt(r);
        let z1 = pt(r);
        let z2 = pt(r);
        let u: f64 = r.random_range(0.05..0.95);
        let v: f64 = r.random_range(0.05..0.95);
        let (w, q) = if u > v { (t * u, t * v) } else { (t * v, t * u) };
        let a = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        let b = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        ImaginaritySample { cfg: KernelConfig { theta, epsilon: eps }, x, z1, z2, t, w, q, a, b, scalar: r.random_range(0.2..1.5) }
    }
}

/// Multivector kernel accessor kept public for route comparisons in tests.
pub fn kernel_grad_mv(kernel: &HalfSpaceKernel, x: &[f64; 4], y: &[f64; 4], t: f64) -> KernelGradMv {
    kernel.eval_grad_mv(x, y, t)
}
