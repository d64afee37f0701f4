//! Dirac spectrum on the fiber `[0, L]` with chiral bag conditions at both ends.
//!
//! With transverse plane waves `e^{ik·x∥}` and `A = 0`, `D̸ψ = λψ` becomes
//! `ψ′ = M(λ)ψ`, `M(λ) = −iγⁿ(λ + γ^jk_j + γ^μγ₅b_μ)`, so `ψ(L) = e^{LM(λ)}ψ(0)`. Eigenvalues
//! are zeros of the entire function `D(λ) = det[R₀; R_L e^{LM(λ)}]`, where the rows `R₀`, `R_L`
//! span the row spaces of `Π₋(θ₀, ε₀)` (inward normal `+n`) and `Π₋(θ_L, ε_L)` (inward normal `−n`).

use std::f64::consts::PI;

use nalgebra::{Matrix4, SMatrix};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{boundary_projector, gammas, BoundaryFrame, Sign, SpinorMatrix, I, NORMAL};
use crate::config::FiberSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberProblem {
    pub length: f64,
    pub k: [f64; 3],
    pub b: [f64; 4],
    pub theta0: f64,
    pub theta_l: f64,
    pub eps0: Sign,
    pub eps_l: Sign,
}

impl FiberProblem {
    pub fn new(length: f64, k: [f64; 3], b: [f64; 4], theta0: f64, theta_l: f64, eps0: Sign, eps_l: Sign) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain(format!("fiber length must be positive, got {length}")));
        }
        if k.iter().chain(&b).chain([&theta0, &theta_l]).any(|v| !v.is_finite()) {
            return Err(Error::Domain("fiber parameters must be finite".into()));
        }
        Ok(FiberProblem { length, k, b, theta0, theta_l, eps0, eps_l })
    }

    pub fn from_spec(s: &FiberSpec) -> Result<Self> {
        Self::new(s.length, s.k, s.b, s.theta0, s.theta_l, s.eps0, s.eps_l)
    }

    /// Both boundary signs reversed.
    pub fn flipped(&self) -> Self {
        FiberProblem { eps0: self.eps0.flip(), eps_l: self.eps_l.flip(), ..*self }
    }

    fn generator(&self, lambda: Complex64) -> SpinorMatrix {
        let g = gammas();
        let mut x = g.id * lambda;
        for j in 0..3 {
            x += g.gamma[j] * Complex64::new(self.k[j], 0.0);
        }
        for mu in 0..4 {
            x += g.gamma[mu] * g.gamma5 * Complex64::new(self.b[mu], 0.0);
        }
        -(g.gamma[NORMAL] * x) * I
    }
}

/// Orthonormal rows spanning the row space of a rank-2 projector.
fn row_space(p: &SpinorMatrix) -> SMatrix<Complex64, 2, 4> {
    let svd = p.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut idx: Vec<usize> = (0..4).collect();
    idx.sort_by(|a, b| svd.singular_values[*b].partial_cmp(&svd.singular_values[*a]).unwrap());
    SMatrix::<Complex64, 2, 4>::from_fn(|r, c| vt[(idx[r], c)])
}

/// Boundary-condition matrix `A(λ)`; `D(λ) = det A(λ)`.
pub struct FiberDeterminant {
    problem: FiberProblem,
    r0: SMatrix<Complex64, 2, 4>,
    rl: SMatrix<Complex64, 2, 4>,
}

impl FiberDeterminant {
    pub fn new(problem: FiberProblem) -> Self {
        let p0 = boundary_projector(problem.theta0, &BoundaryFrame::half_space(problem.eps0));
        let pl = boundary_projector(problem.theta_l, &BoundaryFrame::reversed(problem.eps_l));
        FiberDeterminant { problem, r0: row_space(&p0), rl: row_space(&pl) }
    }

    pub fn matrix(&self, lambda: Complex64) -> Matrix4<Complex64> {
        let e = (self.problem.generator(lambda) * Complex64::new(self.problem.length, 0.0)).exp();
        let bottom = self.rl * e;
        Matrix4::from_fn(|r, c| if r < 2 { self.r0[(r, c)] } else { bottom[(r - 2, c)] })
    }

    pub fn det(&self, lambda: Complex64) -> Complex64 {
        self.matrix(lambda).determinant()
    }

    /// Singular values, ascending.
    pub fn singular_values(&self, lambda: f64) -> [f64; 4] {
        let sv = self.matrix(Complex64::new(lambda, 0.0)).singular_values();
        let mut v = [sv[0], sv[1], sv[2], sv[3]];
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Sorted, repeated according to multiplicity.
    pub eigenvalues: Vec<f64>,
    pub window: f64,
    /// Winding-number count over the window equals the number of roots found.
    pub certified: bool,
    pub winding_count: i64,
}

const MULTIPLICITY_REL: f64 = 1e-7;
const RESOLUTION: f64 = 1e-10;

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Zeros of `D` inside the rectangle `[a, b] × [−h, h]` by the argument principle, with the
/// path refined until every phase step is below `π/4`.
pub fn winding_count(d: &FiberDeterminant, a: f64, b: f64, h: f64) -> Result<i64> {
    let corners = [Complex64::new(a, -h), Complex64::new(b, -h), Complex64::new(b, h), Complex64::new(a, h)];
    // The phase of D turns about 2L per unit length along the edges, so a coarse start
    // tied to L keeps whole turns from hiding between accepted samples.
    let step = 0.05 / d.problem.length.max(1.0);
    let mut total = 0.0;
    for s in 0..4 {
        let (z0, z1) = (corners[s], corners[(s + 1) % 4]);
        let pieces = (((z1 - z0).norm() / step).ceil() as usize).max(1);
        for i in 0..pieces {
            let za = z0 + (z1 - z0) * (i as f64 / pieces as f64);
            let zb = z0 + (z1 - z0) * ((i + 1) as f64 / pieces as f64);
            total += phase_change(d, za, zb, 0)?;
        }
    }
    let n = total / (2.0 * PI);
    let r = n.round();
    if (n - r).abs() > 1e-3 {
        return Err(Error::Uncertified(format!("non-integer winding number {n}")));
    }
    Ok(r as i64)
}

fn phase_change(d: &FiberDeterminant, z0: Complex64, z1: Complex64, depth: usize) -> Result<f64> {
    let (f0, f1) = (d.det(z0), d.det(z1));
    if f0.norm() == 0.0 || f1.norm() == 0.0 {
        return Err(Error::Uncertified("determinant vanishes on the contour".into()));
    }
    let dphi = (f1 / f0).arg();
    if dphi.abs() < PI / 4.0 {
        // Accept only where D is close to linear on the segment; then no turn can hide.
        let fm = d.det(0.5 * (z0 + z1));
        if (fm - 0.5 * (f0 + f1)).norm() < 0.1 * f0.norm().min(f1.norm()) {
            return Ok(dphi);
        }
    }
    if depth > 60 {
        return Err(Error::Uncertified("contour refinement did not converge".into()));
    }
    let m = 0.5 * (z0 + z1);
    Ok(phase_change(d, z0, m, depth + 1)? + phase_change(d, m, z1, depth + 1)?)
}

/// Newton on `D` from `z`, kept inside `[a, b] × [−h, h]`.
fn newton(d: &FiberDeterminant, mut z: Complex64, a: f64, b: f64, h: f64) -> Option<Complex64> {
    for _ in 0..100 {
        let f = d.det(z);
        let dz = 1e-6 * (1.0 + z.norm());
        let df = (d.det(z + dz) - d.det(z - dz)) / (2.0 * dz);
        if df.norm() == 0.0 {
            return None;
        }
        let step = f / df;
        z -= step;
        if z.re < a || z.re > b || z.im.abs() > h {
            return None;
        }
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    None
}

struct Localized {
    roots: Vec<f64>,
    unresolved: Vec<f64>,
}

/// Splits `[a, b]` until every piece holds one simple root or an exactly degenerate one.
fn localize(d: &FiberDeterminant, a: f64, b: f64, h: f64, count: i64, out: &mut Localized) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let sv0 = |l: f64| d.singular_values(l)[0];
    if count == 1 {
        let start = Complex64::new(golden_min(sv0, a, b), 0.0);
        let z = newton(d, start, a, b, h).ok_or_else(|| Error::Uncertified(format!("Newton failed for the root in [{a}, {b}]")))?;
        if z.im.abs() > 1e-9 * (1.0 + z.re.abs()) {
            return Err(Error::Uncertified(format!("non-real root {z}")));
        }
        out.roots.push(z.re);
        return Ok(());
    }
    // Several roots: either one point with a `count`-dimensional null space, or keep splitting.
    let x = golden_min(sv0, a, b);
    let sv = d.singular_values(x);
    let mult = sv.iter().filter(|s| **s < MULTIPLICITY_REL * sv[3]).count() as i64;
    if mult == count {
        out.roots.extend(std::iter::repeat(x).take(count as usize));
        return Ok(());
    }
    if b - a < RESOLUTION * (1.0 + x.abs()) {
        out.unresolved.push(x);
        return Ok(());
    }
    // Off-centre split so symmetric spectra never put a root on the cut.
    let m = a + 0.4812 * (b - a);
    let hc = h.min(b - a);
    let (c1, c2) = (winding_count(d, a, m, hc)?, winding_count(d, m, b, hc)?);
    if c1 + c2 != count {
        return Err(Error::Uncertified(format!("roots off the real axis near [{a}, {b}]: {count} vs {c1} + {c2}")));
    }
    localize(d, a, m, hc, c1, out)?;
    localize(d, m, b, hc, c2, out)
}

/// Real eigenvalues of the fiber problem in `[−Λ, Λ]`, located and certified by winding counts.
pub fn fiber_spectrum(p: &FiberProblem, window: f64) -> Result<Spectrum> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::Domain(format!("window must be positive, got {window}")));
    }
    let d = FiberDeterminant::new(*p);
    let h = 0.5 * PI / p.length;
    // Independent pieces about one level spacing wide; shared edges cancel in the total.
    let pieces = ((2.0 * window / h).ceil() as usize).max(1);
    let edges: Vec<f64> = (0..=pieces).map(|i| -window + 2.0 * window * i as f64 / pieces as f64).collect();
    let parts: Vec<Result<(i64, Localized)>> = edges
        .par_windows(2)
        .map(|w| {
            let c = winding_count(&d, w[0], w[1], h)?;
            let mut out = Localized { roots: Vec::new(), unresolved: Vec::new() };
            localize(&d, w[0], w[1], h, c, &mut out)?;
            Ok((c, out))
        })
        .collect();
    let mut count = 0;
    let mut roots = Vec::new();
    let mut unresolved = Vec::new();
    for part in parts {
        let (c, out) = part?;
        count += c;
        roots.extend(out.roots);
        unresolved.extend(out.unresolved);
    }
    if !unresolved.is_empty() {
        return Err(Error::Uncertified(format!("near-degenerate roots below resolution at {unresolved:?}")));
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if roots.iter().any(|r| r.abs() < 1e-6 / p.length) {
        return Err(Error::Domain("zero mode in the fiber spectrum".into()));
    }
    Ok(Spectrum { eigenvalues: roots, window, certified: true, winding_count: count })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedSum<T> {
    pub value: T,
    pub tail_bound: f64,
}

/// Bound on `Σ_{|λ|>Λ}|λ|^{−s}` from the window's own eigenvalue density (at least the Weyl
/// density `2L/π` per sign), padded by a factor 2.
fn tail_bound(spec: &Spectrum, s: f64, length: f64) -> Result<f64> {
    if !spec.certified {
        return Err(Error::Uncertified("refusing to sum an uncertified spectrum".into()));
    }
    if s <= 1.0 {
        return Err(Error::Domain("truncated sums need s > 1 for a tail bound".into()));
    }
    let lam = spec.window;
    let upper = spec.eigenvalues.iter().filter(|l| l.abs() > 0.5 * lam).count() as f64 / lam;
    let rho = 2.0 * upper.max(4.0 * length / PI);
    let start = (lam - PI / length).max(0.5 * lam);
    Ok(rho * start.powf(1.0 - s) / (s - 1.0))
}

pub fn eta_truncated(s: f64, spec: &Spectrum, length: f64) -> Result<TruncatedSum<f64>> {
    let tail = tail_bound(spec, s, length)?;
    let v = spec.eigenvalues.iter().map(|l| l.signum() * l.abs().powf(-s)).sum();
    Ok(TruncatedSum { value: v, tail_bound: tail })
}

/// `ζ(s, D̸) = Σ_{λ>0}λ^{−s} + e^{−iπs}Σ_{λ<0}(−λ)^{−s}`.
pub fn zeta_truncated(s: f64, spec: &Spectrum, length: f64) -> Result<TruncatedSum<Complex64>> {
    let tail = tail_bound(spec, s, length)?;
    let pos: f64 = spec.eigenvalues.iter().filter(|l| **l > 0.0).map(|l| l.powf(-s)).sum();
    let neg: f64 = spec.eigenvalues.iter().filter(|l| **l < 0.0).map(|l| (-l).powf(-s)).sum();
    Ok(TruncatedSum { value: pos + Complex64::from_polar(1.0, -PI * s) * neg, tail_bound: 2.0 * tail })
}

/// `Σ|λ|^{−2s}`, the even sum for `D̸²`.
pub fn zeta_squared_truncated(s: f64, spec: &Spectrum, length: f64) -> Result<TruncatedSum<f64>> {
    let tail = tail_bound(spec, 2.0 * s, length)?;
    Ok(TruncatedSum { value: spec.eigenvalues.iter().map(|l| l.abs().powf(-2.0 * s)).sum(), tail_bound: 2.0 * tail })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowScan {
    pub thetas: Vec<f64>,
    /// `branches[j][i]`: branch `j` at step `i`.
    pub branches: Vec<Vec<f64>>,
    /// `(step, branch)` where a branch changed sign or came within `10⁻⁶/L` of zero.
    pub zero_crossings: Vec<(usize, usize)>,
    /// Steps where matching was ambiguous (a branch moved by more than half the local gap).
    pub ambiguous: Vec<usize>,
}

/// Tracks eigenvalue branches along `θ₀ = θ_L = θ` for `θ` in `path`.
pub fn spectral_flow_scan(p: &FiberProblem, path: &[f64], window: f64) -> Result<FlowScan> {
    if path.is_empty() {
        return Err(Error::Domain("empty θ path".into()));
    }
    let spectra: Vec<Spectrum> =
        path.iter().map(|&th| fiber_spectrum(&FiberProblem { theta0: th, theta_l: th, ..*p }, window)).collect::<Result<_>>()?;
    // Only eigenvalues well inside the window are tracked, so branches cannot leave it.
    let inner = 0.75 * window;
    let first: Vec<f64> = spectra[0].eigenvalues.iter().copied().filter(|l| l.abs() < inner).collect();
    let mut branches: Vec<Vec<f64>> = first.iter().map(|l| vec![*l]).collect();
    let mut ambiguous = Vec::new();
    for (i, sp) in spectra.iter().enumerate().skip(1) {
        // Degenerate copies are one candidate level.
        let mut levels = sp.eigenvalues.clone();
        levels.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
        for br in branches.iter_mut() {
            let prev = *br.last().unwrap();
            let mut best = (f64::INFINITY, 0.0);
            let mut second = f64::INFINITY;
            for &l in &levels {
                let dist = (l - prev).abs();
                if dist < best.0 {
                    second = best.0;
                    best = (dist, l);
                } else if dist < second {
                    second = dist;
                }
            }
            if best.0 > 0.5 * second {
                ambiguous.push(i);
            }
            br.push(best.1);
        }
    }
    ambiguous.dedup();
    let tiny = 1e-6 / p.length;
    let mut zero_crossings = Vec::new();
    for (j, br) in branches.iter().enumerate() {
        for i in 0..br.len() {
            let flips = i > 0 && br[i].signum() != br[i - 1].signum();
            if br[i].abs() < tiny || flips {
                zero_crossings.push((i, j));
            }
        }
    }
    Ok(FlowScan { thetas: path.to_vec(), branches, zero_crossings, ambiguous })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free(l: f64) -> FiberProblem {
        FiberProblem::new(l, [0.0; 3], [0.0; 4], 0.0, 0.0, Sign::Plus, Sign::Plus).unwrap()
    }

    fn generic() -> FiberProblem {
        FiberProblem::new(1.3, [0.4, -0.7, 0.2], [0.0; 4], 0.8, -0.3, Sign::Plus, Sign::Minus).unwrap()
    }

    #[test]
    fn bag_spectrum_at_zero_angle() {
        let l = 1.0;
        let s = fiber_spectrum(&free(l), 20.0).unwrap();
        let mut expect = Vec::new();
        for m in -10i32..10 {
            let v = (m as f64 + 0.5) * PI / l;
            if v.abs() < 20.0 {
                expect.push(v);
                expect.push(v);
            }
        }
        assert_eq!(s.eigenvalues.len(), expect.len());
        for (a, b) in s.eigenvalues.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn halving_length_doubles_eigenvalues() {
        let a = fiber_spectrum(&free(1.0), 10.0).unwrap();
        let b = fiber_spectrum(&free(0.5), 20.0).unwrap();
        assert_eq!(a.eigenvalues.len(), b.eigenvalues.len());
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((2.0 * x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn epsilon_flip_negates_generic_spectrum() {
        let p = generic();
        let a = fiber_spectrum(&p, 15.0).unwrap();
        let b = fiber_spectrum(&p.flipped(), 15.0).unwrap();
        let mut neg: Vec<f64> = b.eigenvalues.iter().map(|l| -l).collect();
        neg.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(a.eigenvalues.len(), neg.len());
        for (x, y) in a.eigenvalues.iter().zip(&neg) {
            assert!((x - y).abs() < 1e-9 * 15.0);
        }
        let ea = eta_truncated(4.0, &a, p.length).unwrap();
        let eb = eta_truncated(4.0, &b, p.length).unwrap();
        assert!(ea.value.abs() > 1e-6);
        assert!((ea.value + eb.value).abs() < 1e-10);
        let za = zeta_squared_truncated(2.0, &a, p.length).unwrap();
        let zb = zeta_squared_truncated(2.0, &b, p.length).unwrap();
        assert!((za.value - zb.value).abs() < 1e-12);
    }

    #[test]
    fn symmetric_spectrum_has_zero_eta() {
        let s = fiber_spectrum(&free(1.0), 20.0).unwrap();
        for sv in [2.0, 3.0, 4.5] {
            assert!(eta_truncated(sv, &s, 1.0).unwrap().value.abs() < 1e-12);
        }
    }

    #[test]
    fn window_doubling_within_tail_bound() {
        let p = generic();
        let a = fiber_spectrum(&p, 10.0).unwrap();
        let b = fiber_spectrum(&p, 20.0).unwrap();
        let ea = eta_truncated(4.0, &a, p.length).unwrap();
        let eb = eta_truncated(4.0, &b, p.length).unwrap();
        assert!((ea.value - eb.value).abs() <= ea.tail_bound, "{ea:?} {eb:?}");
        let z = zeta_truncated(4.0, &a, p.length).unwrap();
        assert!(z.value.im.abs() > 0.0 || z.value.re > 0.0);
    }

    #[test]
    fn weyl_growth() {
        let l = 1.7;
        let s = fiber_spectrum(&free(l), 30.0).unwrap();
        let mut distinct = s.eigenvalues.clone();
        distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let positive = distinct.iter().filter(|x| **x > 0.0).count() as f64;
        assert!((positive / 30.0 - l / PI).abs() < 2.0 / 30.0);
    }

    #[test]
    fn flow_scan_defaults() {
        let p = free(1.0);
        let path: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let scan = spectral_flow_scan(&p, &path, 12.0).unwrap();
        assert!(scan.zero_crossings.is_empty());
        assert!(scan.ambiguous.is_empty());
        for br in &scan.branches {
            for w in br.windows(2) {
                assert!((w[1] - w[0]).abs() < 0.5);
            }
        }
        let constant = spectral_flow_scan(&p, &[0.3, 0.3, 0.3], 12.0).unwrap();
        for br in &constant.branches {
            assert!(br.iter().all(|v| *v == br[0]));
        }
    }

    #[test]
    fn no_complex_roots_near_axis() {
        let d = FiberDeterminant::new(generic());
        let a = fiber_spectrum(&generic(), 8.0).unwrap();
        // A wider strip contains exactly the same roots.
        assert_eq!(winding_count(&d, -8.0, 8.0, 3.0).unwrap(), a.eigenvalues.len() as i64);
    }

    #[test]
    fn axial_field_with_transverse_momentum_is_refused() {
        // γ^μγ₅ is anti-Hermitian, so with k ≠ 0 a real b pushes the roots off the axis;
        // the winding count then disagrees with the real roots and the solve must refuse.
        let p = FiberProblem::new(1.3, [0.4, -0.7, 0.2], [0.3, 0.1, -0.5, 0.6], 0.8, -0.3, Sign::Plus, Sign::Minus).unwrap();
        assert!(matches!(fiber_spectrum(&p, 6.0), Err(Error::Uncertified(_))));
    }

    #[test]
    fn axial_field_alone_keeps_real_spectrum() {
        let p = FiberProblem::new(1.0, [0.0; 3], [0.3, 0.1, -0.5, 0.6], 0.0, 0.0, Sign::Plus, Sign::Plus).unwrap();
        let s = fiber_spectrum(&p, 8.0).unwrap();
        assert!(s.certified && !s.eigenvalues.is_empty());
    }

    #[test]
    fn equal_angles_shift_levels_by_gudermannian() {
        // With θ₀ = θ_L = θ the boundary phase is gd θ = 2 atan(tanh(θ/2)) at each level.
        for l in [1.0, 1.7] {
            for th in [0.25, 0.7, 1.0] {
                let p = FiberProblem { theta0: th, theta_l: th, ..free(l) };
                let s = fiber_spectrum(&p, 9.0).unwrap();
                let gd = 2.0 * (0.5 * th).tanh().atan();
                let mut expect = Vec::new();
                for m in -10i32..10 {
                    let v = ((m as f64 + 0.5) * PI + gd) / l;
                    if v.abs() < 9.0 {
                        expect.extend([v, v]);
                    }
                }
                assert_eq!(s.eigenvalues.len(), expect.len(), "L={l} θ={th}");
                for (a, b) in s.eigenvalues.iter().zip(&expect) {
                    assert!((a - b).abs() < 1e-9, "L={l} θ={th}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn generic_roots_are_rank_deficient() {
        let p = generic();
        let d = FiberDeterminant::new(p);
        let s = fiber_spectrum(&p, 8.0).unwrap();
        for l in &s.eigenvalues {
            let sv = d.singular_values(*l);
            assert!(sv[0] < 1e-9 * sv[3], "{l}: {sv:?}");
        }
    }
}
