//! Anomaly coefficient functions, the bulk and boundary anomaly integrals, and small-`t`
//! extraction of heat-kernel coefficients from smeared traces.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{levi_civita, Sign, NORMAL};
use crate::config::ExtractionSpec;
use crate::error::{Error, Result};
use crate::fields::{ScalarField, SupportBox, VectorField};
use crate::halfspace_kernel::{beta_jet, KernelConfig};
use crate::quadrature::{adaptive, compensated_sum, Estimate, GaussLegendre};

/// Below this `|θ|` the closed forms switch to their Taylor series.
const SMALL_THETA: f64 = 1e-2;

/// `𝒞(u, 1)/τ`, even and smooth in `θ`.
fn c_over_tau(u: f64, theta: f64) -> f64 {
    beta_jet(2.0 * u, 0.0, 1.0, theta).v
}

/// `|𝒞(u,1)/τ| ≤ c²√π/(8π²)·e^{−u²}(c + 2s²u/√π)` from `0 < erfcx ≤ 1` and
/// `0 < Im w′(iy) ≤ 2/√π`.
fn envelope_tail(k: usize, theta: f64, big_u: f64) -> f64 {
    let (c, s) = (theta.cosh(), theta.sinh());
    let pre = c * c * PI.sqrt() / (8.0 * PI * PI);
    // ∫_U^∞ u^m e^{−u²} du ≤ U^{m−1}e^{−U²} / (2(1 − (m−1)/(2U²))) for 2U² > m − 1.
    let tail = |m: f64| {
        let r = 1.0 - (m - 1.0) / (2.0 * big_u * big_u);
        big_u.powf(m - 1.0) * (-big_u * big_u).exp() / (2.0 * r.max(1e-3))
    };
    let m = (k - 2) as f64;
    pre * (c * tail(m) + 2.0 * s * s / PI.sqrt() * tail(m + 1.0)) / factorial(k - 2)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `c_k(θ)/τ = (1/(k−2)!)∫₀^∞ u^{k−2}𝒞(u,1)/τ du` with the certified tail included in the error.
pub fn moment_over_tau(theta: f64, k: usize, rel_tol: f64) -> Result<Estimate> {
    if k < 2 {
        return Err(Error::Domain(format!("moment order must be ≥ 2, got {k}")));
    }
    if !theta.is_finite() {
        return Err(Error::Domain("θ must be finite".into()));
    }
    let big_u = 9.0 + (k as f64).sqrt();
    let breaks: Vec<f64> = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.5, 7.0, big_u].to_vec();
    let kf = factorial(k - 2);
    let est = adaptive(|u| u.powi(k as i32 - 2) * c_over_tau(u, theta) / kf, &breaks, 0.0, rel_tol, 2000)?;
    let tail = envelope_tail(k, theta, big_u);
    if tail > rel_tol * est.value.abs() {
        return Err(Error::Accuracy { achieved: tail, requested: rel_tol * est.value.abs() });
    }
    Ok(Estimate { value: est.value, abs_err: est.abs_err + tail, evals: est.evals })
}

/// `c_k(θ)`; `c_k = τ·(c_k/τ)` with `c_k/τ` even in `θ`, so `θ = 0` gives the exact limit `0`.
pub fn moment_ck(theta: f64, k: usize, rel_tol: f64) -> Result<Estimate> {
    let e = moment_over_tau(theta, k, rel_tol)?;
    let tau = theta.tanh();
    Ok(Estimate { value: tau * e.value, abs_err: tau.abs() * e.abs_err, evals: e.evals })
}

/// `f₆(θ) = coth θ(θ coth θ − 1)/(16π²)`, odd in `θ`.
pub fn f6(theta: f64) -> f64 {
    let core = if theta.abs() < SMALL_THETA {
        let t2 = theta * theta;
        theta * (1.0 / 3.0 + t2 * (4.0 / 45.0 - t2 * 4.0 / 315.0))
    } else {
        let coth = 1.0 / theta.tanh();
        coth * (theta * coth - 1.0)
    };
    core / (16.0 * PI * PI)
}

/// `G₄(θ, ε) = −ε cosh θ/(16π^{3/2}(1 + cosh θ))`.
pub fn g4(theta: f64, epsilon: Sign) -> f64 {
    let c = theta.cosh();
    -epsilon.value() * c / (16.0 * PI.powf(1.5) * (1.0 + c))
}

/// `G₀(ε) = ε/(8π^{3/2})`.
pub fn g0(epsilon: Sign) -> f64 {
    epsilon.value() / (8.0 * PI.powf(1.5))
}

fn tensor_rule(bx: &SupportBox, dims: &[usize], panels: usize, n: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let gl = GaussLegendre::new(n);
    let mut pts: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
    for &d in dims {
        if !(bx.lo[d].is_finite() && bx.hi[d].is_finite()) {
            return Err(Error::Domain("integration domain must be bounded".into()));
        }
        let axis = gl.composite(bx.lo[d], bx.hi[d], panels);
        pts = pts
            .into_iter()
            .flat_map(|(p, w)| {
                axis.iter().map(move |(x, wx)| {
                    let mut q = p.clone();
                    q.push(*x);
                    (q, w * wx)
                })
            })
            .collect();
    }
    Ok(pts)
}

/// Field strength `F_{μν}` at a point.
pub type FieldStrength<'a> = &'a (dyn Fn(&[f64; 4]) -> [[f64; 4]; 4] + Sync);

fn epsilon_ff(f: &[[f64; 4]; 4]) -> f64 {
    let mut s = 0.0;
    for mu in 0..4 {
        for nu in 0..4 {
            for rho in 0..4 {
                for sigma in 0..4 {
                    let e = levi_civita(&[mu, nu, rho, sigma]);
                    if e != 0 {
                        s += e as f64 * f[mu][nu] * f[rho][sigma];
                    }
                }
            }
        }
    }
    s
}

/// `F_{μν} = ∂_μA_ν − ∂_νA_μ` from a vector field.
pub fn field_strength(a: &VectorField, x: &[f64; 4]) -> [[f64; 4]; 4] {
    let j = a.jacobian(x);
    std::array::from_fn(|mu| std::array::from_fn(|nu| j[nu][mu] - j[mu][nu]))
}

/// Bulk Adler–Bell–Jackiw integral `(1/16π²)∫δφ ε^{μνρσ}F_{μν}F_{ρσ}` over `domain`.
/// `orientation = Minus` reverses `ε^{1234}`. Never reads a boundary configuration.
pub fn abj_bulk(delta_phi: &ScalarField, f: FieldStrength, domain: &SupportBox, orientation: Sign, rel_tol: f64) -> Result<Estimate> {
    let dims = [0, 1, 2, 3];
    let run = |panels: usize| -> Result<(f64, usize)> {
        let pts = tensor_rule(domain, &dims, panels, 8)?;
        let v = compensated_sum(
            &pts.par_iter()
                .map(|(p, w)| {
                    let x = [p[0], p[1], p[2], p[3]];
                    let d = delta_phi.value(&x);
                    if d == 0.0 {
                        0.0
                    } else {
                        w * d * epsilon_ff(&f(&x))
                    }
                })
                .collect::<Vec<f64>>(),
        );
        Ok((v, pts.len()))
    };
    let (fine, n1) = run(4)?;
    let (coarse, n2) = run(3)?;
    let norm = orientation.value() / (16.0 * PI * PI);
    let err = (fine - coarse).abs() * norm.abs();
    let value = fine * norm;
    if err > rel_tol * value.abs() && err > f64::EPSILON {
        return Err(Error::Accuracy { achieved: err, requested: rel_tol * value.abs() });
    }
    Ok(Estimate { value, abs_err: err, evals: n1 + n2 })
}

/// Boundary parity-odd term `W = −(i/16π) ε_α ∫d³x ε^{nijk}A_i ∂_jA_k` on `xⁿ = 0`.
/// Tangential indices are `0, 1, 2`; `ε^{nijk}` is the four-index symbol with the normal first.
pub fn parity_boundary(a: &VectorField, epsilon: Sign, domain: &SupportBox, rel_tol: f64) -> Result<(Complex64, f64)> {
    let dims = [0, 1, 2];
    let run = |panels: usize| -> Result<f64> {
        let pts = tensor_rule(domain, &dims, panels, 8)?;
        Ok(compensated_sum(
            &pts.par_iter()
                .map(|(p, w)| {
                    let x = [p[0], p[1], p[2], 0.0];
                    let v = a.value(&x);
                    let j = a.jacobian(&x);
                    let mut s = 0.0;
                    for i in 0..3 {
                        for jj in 0..3 {
                            for k in 0..3 {
                                let e = levi_civita(&[NORMAL, i, jj, k]);
                                if e != 0 {
                                    s += e as f64 * v[i] * j[k][jj];
                                }
                            }
                        }
                    }
                    w * s
                })
                .collect::<Vec<f64>>(),
        ))
    };
    let fine = run(12)?;
    let coarse = run(9)?;
    let pre = -epsilon.value() / (16.0 * PI);
    let err = (fine - coarse).abs() * pre.abs();
    let scale = (fine * pre).abs();
    if err > rel_tol * scale && err > 1e-300 {
        return Err(Error::Accuracy { achieved: err, requested: rel_tol * scale });
    }
    Ok((Complex64::new(0.0, pre * fine), err))
}

/// Smearing `Q = γ₅·δφ` with `δφ = g(x∥)·(xⁿ)^p·exp(−(xⁿ − x₀)²/2w²)` and `g` an isotropic
/// unit-height Gaussian of width `σ∥`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalSmearing {
    pub power: u32,
    pub center: f64,
    pub width: f64,
    pub tangential_width: f64,
}

impl NormalSmearing {
    pub fn from_spec(s: &ExtractionSpec) -> Self {
        NormalSmearing { power: 3, center: s.normal_center, width: s.normal_width, tangential_width: s.tangential_width }
    }

    pub fn profile(&self, xn: f64) -> f64 {
        xn.powi(self.power as i32) * (-(xn - self.center).powi(2) / (2.0 * self.width * self.width)).exp()
    }

    /// `∫d³x∥ g = (2π)^{3/2}σ∥³`.
    pub fn tangential_integral(&self) -> f64 {
        (2.0 * PI).powf(1.5) * self.tangential_width.powi(3)
    }

    /// `∂ₙ^m h(0)` of the normal profile.
    pub fn normal_derivative_at_zero(&self, m: usize) -> f64 {
        // h = x^p·exp(−(x−x₀)²/2w²); Taylor coefficients of the Gaussian factor by recurrence
        // e′ = −((x − x₀)/w²)e, so e_{n+1} = (x₀e_n − e_{n−1})/(w²(n+1)) at x = 0.
        let p = self.power as usize;
        if m < p {
            return 0.0;
        }
        let w2 = self.width * self.width;
        let mut e = vec![(-self.center * self.center / (2.0 * w2)).exp()];
        for n in 0..(m - p) {
            let prev = if n > 0 { e[n - 1] } else { 0.0 };
            e.push((self.center * e[n] - prev) / (w2 * (n + 1) as f64));
        }
        factorial(m) * e[m - p]
    }
}

/// Number of window halvings below `t_max` used by the drift protocol.
pub const EXTRACTION_HALVINGS: i32 = 7;

/// Small-`t` samples of a smeared heat trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmearedTrace {
    /// Strictly decreasing toward 0.
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub abs_err: Vec<f64>,
    pub smearing: NormalSmearing,
}

/// `Tr(γ₅δφ e^{−tD̸²}) = ∫d⁴x δφ tr γ₅K₀(x,x) = −∫d⁴x δφ ∂ₙ𝒞(xⁿ, t)` on the free half-space.
///
/// The normal integral runs over `u = xⁿ/√t ∈ [0, 8]` with a fixed composite Gauss–Legendre
/// rule; `∂ₙ𝒞` is below `e^{−64}` of its peak beyond. Fixed nodes in `u` keep the quadrature
/// error an exact power series in `√t`, so it shifts coefficients instead of adding noise.
pub fn smeared_chiral_trace(cfg: &KernelConfig, q: &NormalSmearing, t: f64, rel_tol: f64) -> Result<Estimate> {
    if !(t > 0.0) {
        return Err(Error::Domain("t must be positive".into()));
    }
    let st = t.sqrt();
    let tau = cfg.theta.tanh();
    // ∂ₙ𝒞 = 2τβ_η(2xⁿ, 0, t).
    let f = |u: f64| -q.profile(u * st) * 2.0 * tau * beta_jet(2.0 * u * st, 0.0, t, cfg.theta).d[0] * st;
    let run = |n: usize| GaussLegendre::new(n).composite(0.0, 8.0, 16).into_iter().map(|(u, w)| w * f(u)).sum::<f64>();
    let fine = run(20);
    let coarse = run(14);
    let g = q.tangential_integral();
    let err = (fine - coarse).abs();
    if err > rel_tol * fine.abs() {
        return Err(Error::Accuracy { achieved: err, requested: rel_tol * fine.abs() });
    }
    Ok(Estimate { value: g * fine, abs_err: g * err, evals: 16 * 34 })
}

impl SmearedTrace {
    pub fn compute(cfg: &KernelConfig, q: &NormalSmearing, t_max: f64, t_min: f64, points: usize, rel_tol: f64) -> Result<Self> {
        if !(t_max > t_min && t_min > 0.0) || points < 2 {
            return Err(Error::Domain("need 0 < t_min < t_max and at least two points".into()));
        }
        let t_grid: Vec<f64> = (0..points).map(|i| t_max * (t_min / t_max).powf(i as f64 / (points - 1) as f64)).collect();
        Self::on_grid(cfg, q, t_grid, rel_tol)
    }

    /// Grid `t_max·2^{−i/m}` down to `t_max·t_min_ratio/2^{EXTRACTION_HALVINGS}`, with `m` chosen
    /// from `points` per decade. Halving `T` then shifts every window `[T·r, T]` by exactly `m`
    /// nodes, so all windows of the drift protocol sample the same relative positions.
    pub fn for_extraction(cfg: &KernelConfig, q: &NormalSmearing, e: &ExtractionSpec, rel_tol: f64) -> Result<Self> {
        let m = ((e.points as f64) * 2f64.log10()).round().max(1.0);
        let octaves = -e.t_min_ratio.log2() + EXTRACTION_HALVINGS as f64;
        let n = (octaves * m).floor() as usize + 1;
        let t_grid: Vec<f64> = (0..n).map(|i| e.t_max * 2f64.powf(-(i as f64) / m)).collect();
        Self::on_grid(cfg, q, t_grid, rel_tol)
    }

    pub fn on_grid(cfg: &KernelConfig, q: &NormalSmearing, t_grid: Vec<f64>, rel_tol: f64) -> Result<Self> {
        let est: Vec<Estimate> = t_grid.par_iter().map(|&t| smeared_chiral_trace(cfg, q, t, rel_tol)).collect::<Result<_>>()?;
        let tr = SmearedTrace {
            t_grid,
            values: est.iter().map(|e| e.value).collect(),
            abs_err: est.iter().map(|e| e.abs_err).collect(),
            smearing: *q,
        };
        tr.validate()?;
        Ok(tr)
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_grid.len() != self.values.len() || self.t_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Domain("t grid must be strictly decreasing and match values".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite trace value".into()));
        }
        Ok(())
    }

    fn window(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        self.t_grid
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= lo * (1.0 - 1e-12) && **t <= hi * (1.0 + 1e-12))
            .map(|(t, v)| (*t, *v))
            .unzip()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedCoefficient {
    pub order: usize,
    pub value: f64,
    /// Bootstrap spread combined with the window-drift systematic.
    pub std_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub coefficients: Vec<FittedCoefficient>,
    pub condition: f64,
    /// Log-log slope of the leading-coefficient drift between self-similar windows.
    pub residual_slope: f64,
    /// Expected slope `(n_max + 1 − 4)/2`.
    pub expected_slope: f64,
    /// Ratio of the first neglected term to the smallest fitted one at `t_min`.
    pub truncation_ratio: f64,
}

struct Fit {
    coeffs: Vec<f64>,
    condition: f64,
    residuals: Vec<f64>,
}

fn ls_fit(ts: &[f64], ys: &[f64], orders: &[usize]) -> Result<Fit> {
    let (m, n) = (ts.len(), orders.len());
    if m < n {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    let mut a = DMatrix::from_fn(m, n, |i, j| ts[i].powf((orders[j] as f64 - 4.0) / 2.0));
    // Column equilibration; the reported condition number is of the scaled system.
    let scales: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    for j in 0..n {
        a.column_mut(j).scale_mut(1.0 / scales[j]);
    }
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    let y = DVector::from_column_slice(ys);
    let x = svd.solve(&y, 0.0).map_err(|e| Error::Domain(e.to_string()))?;
    let residuals = (&y - &a * &x).iter().copied().collect();
    let coeffs = (0..n).map(|j| x[j] / scales[j]).collect();
    Ok(Fit { coeffs, condition, residuals })
}

/// Least-squares fit of `Σ_n t^{(n−4)/2} a_n` over `orders` (at most four), with residual
/// bootstrap errors and the window-drift protocol described on [`Extraction`].
pub fn extract_coefficients(
    trace: &SmearedTrace,
    orders: &[usize],
    t_min_ratio: f64,
    bootstrap: usize,
    seed: u64,
    max_condition: f64,
) -> Result<Extraction> {
    trace.validate()?;
    if orders.is_empty() || orders.len() > 4 {
        return Err(Error::Domain("fit between one and four orders".into()));
    }
    let t_max = trace.t_grid[0];
    let t_min = t_max * t_min_ratio;
    let (ts, ys) = trace.window(t_min, t_max);
    let fit = ls_fit(&ts, &ys, orders)?;
    if !(fit.condition <= max_condition) {
        return Err(Error::IllConditioned(fit.condition));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model: Vec<f64> =
        ts.iter().map(|t| orders.iter().zip(&fit.coeffs).map(|(n, a)| a * t.powf((*n as f64 - 4.0) / 2.0)).sum()).collect();
    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(bootstrap); orders.len()];
    for _ in 0..bootstrap {
        let yb: Vec<f64> = model.iter().map(|m| m + resample(&fit.residuals, &mut rng)).collect();
        let fb = ls_fit(&ts, &yb, orders)?;
        for (s, c) in samples.iter_mut().zip(fb.coeffs) {
            s.push(c);
        }
    }

    // Self-similar windows [T·r, T] for T = t_max/2^j give leading-coefficient drifts that
    // scale as T^{(n_max+1−4)/2} when the first neglected order dominates. The slope is read
    // off the smallest windows, where the order after that contaminates least.
    let lead = 0;
    let t_floor = *trace.t_grid.last().unwrap() * (1.0 - 1e-12);
    let windows: Vec<f64> = (0..8).map(|j| t_max / 2f64.powi(j)).filter(|t| t * t_min_ratio >= t_floor).collect();
    let mut leads = Vec::new();
    for &tw in &windows {
        let (a, b) = trace.window(tw * t_min_ratio, tw);
        leads.push((tw, ls_fit(&a, &b, orders)?.coeffs[lead]));
    }
    let drifts: Vec<(f64, f64)> = leads.windows(2).map(|w| (w[0].0, (w[0].1 - w[1].1).abs())).collect();
    let n_max = *orders.iter().max().unwrap();
    let expected_slope = (n_max as f64 + 1.0 - 4.0) / 2.0;
    let residual_slope = if drifts.len() >= 2 {
        let tail = &drifts[drifts.len().saturating_sub(3)..];
        log_log_slope(tail)
    } else {
        f64::NAN
    };
    // Bias at t_max from the geometric sum of drifts, Σ_j d·2^{−jp} = d/(1 − 2^{−p}).
    let systematic = drifts.first().map(|d| d.1 / (1.0 - 2f64.powf(-expected_slope))).unwrap_or(0.0);

    // First neglected order estimated from an auxiliary fit that includes it.
    let mut aux_orders = orders.to_vec();
    aux_orders.push(n_max + 1);
    let aux = ls_fit(&ts, &ys, &aux_orders)?;
    let pw = |n: usize| t_min.powf((n as f64 - 4.0) / 2.0);
    let neglected = (aux.coeffs[orders.len()] * pw(n_max + 1)).abs();
    let smallest = orders.iter().zip(&fit.coeffs).map(|(n, a)| (a * pw(*n)).abs()).fold(f64::INFINITY, f64::min);

    let coefficients = orders
        .iter()
        .zip(&fit.coeffs)
        .zip(&samples)
        .enumerate()
        .map(|(j, ((n, a), s))| {
            let mean = s.iter().sum::<f64>() / s.len().max(1) as f64;
            let var = s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (s.len().max(2) - 1) as f64;
            let sys = if j == lead { systematic } else { 0.0 };
            FittedCoefficient { order: *n, value: *a, std_err: (var + sys * sys).sqrt() }
        })
        .collect();
    Ok(Extraction { coefficients, condition: fit.condition, residual_slope, expected_slope, truncation_ratio: neglected / smallest })
}

fn log_log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|(t, d)| (t.ln(), d.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn resample(r: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    r[rng.random_range(0..r.len())]
}

/// `a_k(γ₅δφ) = c_k(θ)·∫_∂ ∂ₙ^{k−1}δφ` for the free half-space.
pub fn moment_prediction(cfg: &KernelConfig, q: &NormalSmearing, k: usize, rel_tol: f64) -> Result<f64> {
    Ok(moment_ck(cfg.theta, k, rel_tol)?.value * q.tangential_integral() * q.normal_derivative_at_zero(k - 1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub theta: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub f6: f64,
    #[serde(rename = "G4_over_eps")]
    pub g4_over_eps: f64,
    pub err_c2: f64,
    pub err_c3: f64,
    pub err_c4: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub rows: Vec<CoefficientRow>,
    #[serde(rename = "G0_over_eps")]
    pub g0_over_eps: f64,
}

impl CoefficientTable {
    pub fn compute(theta_grid: &[f64], rel_tol: f64) -> Result<Self> {
        if theta_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("θ grid must be sorted".into()));
        }
        let rows = theta_grid
            .par_iter()
            .map(|&theta| {
                let c: Vec<Estimate> = (2..=4).map(|k| moment_ck(theta, k, rel_tol)).collect::<Result<_>>()?;
                Ok(CoefficientRow {
                    theta,
                    c2: c[0].value,
                    c3: c[1].value,
                    c4: c[2].value,
                    f6: f6(theta),
                    g4_over_eps: g4(theta, Sign::Plus),
                    err_c2: c[0].abs_err,
                    err_c3: c[1].abs_err,
                    err_c4: c[2].abs_err,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CoefficientTable { rows, g0_over_eps: g0(Sign::Plus) })
    }

    /// Largest relative mismatches `|c₄ − f₆|/|f₆|` and `|−c₃/sinh θ − G₄/ε|/|G₄/ε|`.
    pub fn closed_form_mismatch(&self) -> (f64, f64) {
        let mut m6: f64 = 0.0;
        let mut m4: f64 = 0.0;
        for r in &self.rows {
            if r.theta != 0.0 {
                m6 = m6.max((r.c4 - r.f6).abs() / r.f6.abs());
                m4 = m4.max((-r.c3 / r.theta.sinh() - r.g4_over_eps).abs() / r.g4_over_eps.abs());
            }
        }
        (m6, m4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::GaussianSpec;

    #[test]
    fn c4_matches_f6() {
        for theta in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let c4 = moment_ck(theta, 4, 1e-12).unwrap();
            assert!((c4.value - f6(theta)).abs() < 1e-9 * f6(theta), "θ={theta}: {} vs {}", c4.value, f6(theta));
        }
        let expect = (1.0 / 1f64.tanh()) * (1.0 / 1f64.tanh() - 1.0) / (16.0 * PI * PI);
        assert!((f6(1.0) - expect).abs() < 1e-15);
        assert!((f6(1.0) - 2.603e-3).abs() < 5e-7);
    }

    #[test]
    fn c3_matches_g4() {
        for theta in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let c3 = moment_ck(theta, 3, 1e-12).unwrap().value;
            let g = g4(theta, Sign::Plus);
            assert!((-c3 / theta.sinh() - g).abs() < 1e-9 * g.abs(), "θ={theta}");
        }
        assert!((g4(1.0, Sign::Plus) + 6.81e-3).abs() < 5e-6);
        assert!((g4(0.0, Sign::Minus) - 1.0 / (32.0 * PI.powf(1.5))).abs() < 1e-16);
        assert!((g0(Sign::Plus) - 1.0 / (8.0 * PI * PI.sqrt())).abs() < 1e-17);
        assert!((g0(Sign::Plus) - 2.2449e-2).abs() < 1e-6);
        assert_eq!(g0(Sign::Minus), -g0(Sign::Plus));
    }

    #[test]
    fn small_theta_limit_of_c2() {
        // c₂(θ)/θ → c₂/τ at θ = 0; Richardson on θ = 1e-3, 1e-4 (error ∝ θ²).
        let r = |th: f64| moment_ck(th, 2, 1e-13).unwrap().value / th;
        let (a, b) = (r(1e-3), r(1e-4));
        let rich = (100.0 * b - a) / 99.0;
        let limit = moment_over_tau(0.0, 2, 1e-13).unwrap().value;
        assert!((rich - limit).abs() < 1e-10 * limit.abs(), "{rich} vs {limit}");
        assert_eq!(moment_ck(0.0, 2, 1e-12).unwrap().value, 0.0);
    }

    #[test]
    fn f6_series_branch_and_parity() {
        let direct = |t: f64| (1.0 / t.tanh()) * (t / t.tanh() - 1.0) / (16.0 * PI * PI);
        assert!((f6(0.0099) - direct(0.0099)).abs() < 1e-10 * direct(0.0099));
        assert_eq!(f6(0.0), 0.0);
        assert!((f6(1e-6) - 1e-6 / (48.0 * PI * PI)).abs() < 1e-18);
        for t in [0.3, 1.7] {
            assert!((f6(-t) + f6(t)).abs() < 1e-16);
            assert_eq!(g4(-t, Sign::Plus), g4(t, Sign::Plus));
        }
    }

    #[test]
    fn rejects_low_order() {
        assert!(moment_ck(1.0, 1, 1e-10).is_err());
    }

    fn constant_b(b: f64) -> impl Fn(&[f64; 4]) -> [[f64; 4]; 4] + Sync {
        move |_x| {
            let mut f = [[0.0; 4]; 4];
            f[0][1] = b;
            f[1][0] = -b;
            f[2][3] = b;
            f[3][2] = -b;
            f
        }
    }

    #[test]
    fn abj_constant_field() {
        let bx = SupportBox { lo: [0.0, -1.0, 0.5, 0.0], hi: [1.0, 1.0, 1.5, 2.0] };
        let (b, dphi) = (0.7, 0.3);
        let e = abj_bulk(&ScalarField::Constant(dphi), &constant_b(b), &bx, Sign::Plus, 1e-10).unwrap();
        let expect = dphi * 8.0 * b * b * 4.0 / (16.0 * PI * PI);
        assert!((e.value - expect).abs() < 1e-12 * expect);
        let r = abj_bulk(&ScalarField::Constant(dphi), &constant_b(b), &bx, Sign::Minus, 1e-10).unwrap();
        assert_eq!(r.value, -e.value);
        let zero = abj_bulk(&ScalarField::Constant(dphi), &constant_b(0.0), &bx, Sign::Plus, 1e-10).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn epsilon_contraction_by_hand() {
        let b = 0.4;
        assert_eq!(epsilon_ff(&field_strength(&VectorField::Constant([0.3; 4]), &[0.0; 4])), 0.0);
        let f = constant_b(b)(&[0.0; 4]);
        assert!((epsilon_ff(&f) - 8.0 * b * b).abs() < 1e-15);
    }

    fn gaussian_1d_oracle(a: f64, sf: f64, b: f64, sg: f64) -> f64 {
        // ∫(g f′ − f g′) = 2∫g f′ for f = e^{−(x−a)²/2sf²}, g = e^{−(x−b)²/2sg²}.
        let p = 1.0 / (2.0 * sf * sf) + 1.0 / (2.0 * sg * sg);
        let m = (a / (2.0 * sf * sf) + b / (2.0 * sg * sg)) / p;
        let c = (-(a - b).powi(2) / (2.0 * (sf * sf + sg * sg))).exp();
        2.0 * (-(m - a) / (sf * sf)) * (PI / p).sqrt() * c
    }

    #[test]
    fn parity_boundary_one_dimensional_reduction() {
        let e = 0.9;
        let env = |c: [f64; 4], w: [f64; 4]| {
            let mut s = GaussianSpec::isotropic(c, 1.0, 1.0);
            s.widths = [Some(w[0]), Some(w[1]), Some(w[2]), None];
            ScalarField::Gaussian(s)
        };
        let (fa, fs, ga, gs) = (0.3, 0.5, -0.2, 0.6);
        let a = VectorField::Components(Box::new([
            ScalarField::Zero,
            env([ga, 0.0, 0.0, 0.0], [gs, e, e, 0.0]),
            env([fa, 0.0, 0.0, 0.0], [fs, e, e, 0.0]),
            ScalarField::Zero,
        ]));
        let bx = a.support().unwrap();
        let (w, _) = parity_boundary(&a, Sign::Plus, &bx, 1e-9).unwrap();
        // E = e^{−(x²)²/2e²}e^{−(x³)²/2e²}: ∫E² = πe² and ε^{n,1,0,2} = +1, ε^{n,2,0,1} = −1
        // give the integrand E²(g f′ − f g′).
        let expect = -1.0 / (16.0 * PI) * PI * e * e * gaussian_1d_oracle(fa, fs, ga, gs);
        assert!(w.re == 0.0);
        assert!((w.im - expect).abs() < 1e-9 * expect.abs(), "{} vs {expect}", w.im);
        let (wm, _) = parity_boundary(&a, Sign::Minus, &bx, 1e-9).unwrap();
        assert_eq!(wm.im, -w.im);
    }

    #[test]
    fn parity_boundary_pure_gauge() {
        let chi = ScalarField::Gaussian(GaussianSpec::isotropic([0.1, -0.2, 0.3, 0.0], 0.7, 1.3));
        let a = VectorField::Gradient(chi);
        let bx = a.support().unwrap();
        let (w, _) = parity_boundary(&a, Sign::Plus, &bx, 1.0).unwrap();
        assert!(w.norm() < 1e-12);
    }

    #[test]
    fn normal_derivatives_of_profile() {
        let q = NormalSmearing { power: 3, center: 0.5, width: 1.0, tangential_width: 1.0 };
        assert_eq!(q.normal_derivative_at_zero(2), 0.0);
        assert!((q.normal_derivative_at_zero(3) - 6.0 * (-0.125f64).exp()).abs() < 1e-14);
        // Fourth derivative of x³e(x) at 0 is 24e′(0) = 24·(x₀/w²)e(0).
        assert!((q.normal_derivative_at_zero(4) - 24.0 * 0.5 * (-0.125f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn extraction_recovers_a4() {
        let cfg = KernelConfig::new(1.0, Sign::Plus).unwrap();
        let c = crate::config::Config::shipped();
        let q = NormalSmearing::from_spec(&c.extraction);
        let e = &c.extraction;
        let tr = SmearedTrace::for_extraction(&cfg, &q, e, 1e-14).unwrap();
        let ex = extract_coefficients(&tr, &[4, 5, 6, 7], e.t_min_ratio, e.bootstrap, c.samples.seed, e.max_condition).unwrap();
        let a4 = moment_prediction(&cfg, &q, 4, 1e-13).unwrap();
        let got = &ex.coefficients[0];
        println!("{ex:?} oracle {a4}");
        assert!((got.value - a4).abs() < 1e-3 * a4.abs());
        assert!((got.value - a4).abs() < 3.0 * got.std_err.max(1e-300) || (got.value - a4).abs() < 1e-12 * a4.abs());
        assert!((ex.residual_slope - ex.expected_slope).abs() < 0.05, "{ex:?}");
    }

    #[test]
    fn identity_smearing_gives_volume_term() {
        // Deep in the interior tr K₀(x,x;t) = 4(4πt)^{−2} up to e^{−(xⁿ)²/t}.
        let k = crate::halfspace_kernel::HalfSpaceKernel::new(KernelConfig::new(0.9, Sign::Plus).unwrap());
        for t in [1e-3, 1e-2] {
            let x = [0.2, 0.1, -0.3, 2.0];
            let tr = k.eval(&x, &x, t).trace().re;
            let expect = 4.0 / (16.0 * PI * PI * t * t);
            assert!((tr - expect).abs() < 1e-13 * expect);
        }
    }
}
