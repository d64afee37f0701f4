//! Faddeeva function `w(z) = e^{-z²} erfc(-iz)` with first and second derivatives, the
//! two-variable partials needed by the boundary kernel, and an independent small-`|z|`
//! power series.

use std::f64::consts::PI;

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;

const ASYMPTOTIC_RADIUS: f64 = 6.0;
const CAUCHY_POINTS: usize = 64;

pub fn w(z: Complex64) -> Complex64 {
    z.w()
}

#[derive(Clone, Copy, Debug)]
pub struct WJet {
    pub w: Complex64,
    pub w1: Complex64,
    pub w2: Complex64,
}

/// `w`, `w'`, `w''`. Uses the asymptotic series for `|z| ≥ 6` in the closed upper half plane,
/// where the ODE `w' = −2zw + 2i/√π` would cancel catastrophically.
pub fn w_jet(z: Complex64) -> WJet {
    let i = Complex64::new(0.0, 1.0);
    if z.norm() >= ASYMPTOTIC_RADIUS && z.im >= 0.0 {
        let inv = 1.0 / z;
        let q = inv * inv * 0.5;
        let mut t = inv;
        let (mut s0, mut s1, mut s2) = (t, -t * inv, 2.0 * t * inv * inv);
        for k in 1..200 {
            let kf = k as f64;
            let next = t * q * (2.0 * kf - 1.0);
            if next.norm() > t.norm() {
                break;
            }
            t = next;
            s0 += t;
            s1 -= t * inv * (2.0 * kf + 1.0);
            s2 += t * inv * inv * ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
            if t.norm() < 1e-18 * s0.norm() {
                break;
            }
        }
        let pre = i / PI.sqrt();
        return WJet { w: pre * s0, w1: pre * s1, w2: pre * s2 };
    }
    let wz = w(z);
    let w1 = -2.0 * z * wz + i * (2.0 / PI.sqrt());
    let w2 = -2.0 * wz - 2.0 * z * w1;
    WJet { w: wz, w1, w2 }
}

thread_local! {
    static CAUCHY_FFT: std::sync::Arc<dyn rustfft::Fft<f64>> =
        rustfft::FftPlanner::new().plan_fft_forward(CAUCHY_POINTS);
}

/// Taylor coefficients `a_n` of `w` about `z0` from a discretized Cauchy integral on a circle
/// of radius `r`.
pub fn taylor_coefficients(z0: Complex64, r: f64) -> [Complex64; CAUCHY_POINTS] {
    let m = CAUCHY_POINTS;
    let mut vals = [Complex64::new(0.0, 0.0); CAUCHY_POINTS];
    for (k, v) in vals.iter_mut().enumerate() {
        let phi = 2.0 * PI * k as f64 / m as f64;
        *v = w(z0 + Complex64::from_polar(r, phi));
    }
    CAUCHY_FFT.with(|f| f.process(&mut vals));
    let mut scale = 1.0 / m as f64;
    for v in vals.iter_mut() {
        *v *= scale;
        scale /= r;
    }
    vals
}

/// Partials of `R = Re w(x+iy)` and `Q = Im w(x+iy)/x`, both even in `x`, with respect to
/// `X = x²` and `y`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RqPartials {
    pub r: f64,
    pub r_x: f64,
    pub r_y: f64,
    pub r_xx: f64,
    pub r_xy: f64,
    pub r_yy: f64,
    pub q: f64,
    pub q_x: f64,
    pub q_y: f64,
    pub q_xx: f64,
    pub q_xy: f64,
    pub q_yy: f64,
}

pub fn rq_partials(x: f64, y: f64) -> RqPartials {
    let scale = y.abs().max(1.0);
    if x.abs() < 0.25 * scale {
        rq_series(x * x, y, 0.5 * scale)
    } else {
        rq_direct(x, y)
    }
}

fn rq_direct(x: f64, y: f64) -> RqPartials {
    let j = w_jet(Complex64::new(x, y));
    let (w0, w1, w2) = (j.w, j.w1, j.w2);
    let x2 = x * x;
    let x3 = x2 * x;
    RqPartials {
        r: w0.re,
        r_x: w1.re / (2.0 * x),
        r_y: -w1.im,
        r_xx: (x * w2.re - w1.re) / (4.0 * x3),
        r_xy: -w2.im / (2.0 * x),
        r_yy: -w2.re,
        q: w0.im / x,
        q_x: (x * w1.im - w0.im) / (2.0 * x3),
        q_y: w1.re / x,
        q_xx: (x2 * w2.im - 3.0 * x * w1.im + 3.0 * w0.im) / (4.0 * x2 * x3),
        q_xy: (x * w2.re - w1.re) / (2.0 * x3),
        q_yy: -w2.im / x,
    }
}

fn rq_series(xx: f64, y: f64, radius: f64) -> RqPartials {
    let a = taylor_coefficients(Complex64::new(0.0, y), radius);
    let nmax = CAUCHY_POINTS - 4;
    let mut p = RqPartials::default();
    // Even coefficients are real and odd ones imaginary, by w(−z̄) = conj w(z).
    let mut xm = 1.0;
    let mut xm1 = 0.0;
    let mut xm2 = 0.0;
    let mut m = 0;
    while 2 * m + 3 <= nmax {
        let mf = m as f64;
        let e0 = a[2 * m].re;
        let o1 = a[2 * m + 1].im;
        let e2 = a[2 * m + 2].re;
        let o3 = a[2 * m + 3].im;
        let n1 = (2 * m + 1) as f64;
        let n2 = (2 * m + 2) as f64;
        let n3 = (2 * m + 3) as f64;
        // ∂_y a_n = i(n+1)a_{n+1}
        let ry = -n1 * o1;
        let ryy = -n1 * n2 * e2;
        let qy = n2 * e2;
        let qyy = -n2 * n3 * o3;
        p.r += e0 * xm;
        p.r_y += ry * xm;
        p.r_yy += ryy * xm;
        p.q += o1 * xm;
        p.q_y += qy * xm;
        p.q_yy += qyy * xm;
        p.r_x += mf * e0 * xm1;
        p.r_xy += mf * ry * xm1;
        p.q_x += mf * o1 * xm1;
        p.q_xy += mf * qy * xm1;
        p.r_xx += mf * (mf - 1.0) * e0 * xm2;
        p.q_xx += mf * (mf - 1.0) * o1 * xm2;
        xm2 = xm1;
        xm1 = xm;
        xm *= xx;
        m += 1;
        if xm.abs() < 1e-300 && m > 2 {
            break;
        }
    }
    p
}

/// `w(z) = Σ (iz)ⁿ / Γ(n/2 + 1)`; only sensible for moderate `|z|`.
pub fn w_power_series(z: Complex64) -> Complex64 {
    let iz = Complex64::new(-z.im, z.re);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    // Γ(n/2+1) for even and odd n via separate recurrences.
    let mut g_even = 1.0; // Γ(1)
    let mut g_odd = PI.sqrt() / 2.0; // Γ(3/2)
    for n in 0..400 {
        let g = if n % 2 == 0 { g_even } else { g_odd };
        let term = pow / g;
        sum += term;
        if n > 4 && term.norm() < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
        if n % 2 == 0 {
            g_even *= n as f64 / 2.0 + 1.0;
        } else {
            g_odd *= n as f64 / 2.0 + 1.0;
        }
        pow *= iz;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn jet_branches_agree_at_switch() {
        for &(re, im) in &[(4.24, 4.24), (0.5, 5.99), (5.99, 0.1), (-3.0, 5.2)] {
            let z = c(re, im);
            let inner = w_jet(z);
            let outer = w_jet(z * (6.0001 / z.norm()));
            // Compare through the Taylor step across the radius.
            let dz = z * (6.0001 / z.norm()) - z;
            let pred = inner.w + inner.w1 * dz + inner.w2 * dz * dz * 0.5;
            assert!((pred - outer.w).norm() < 1e-6 * outer.w.norm(), "{z}: {}", (pred - outer.w).norm() / outer.w.norm());
        }
    }

    #[test]
    fn asymptotic_derivatives_match_ode() {
        let i = c(0.0, 1.0);
        for &(re, im) in &[(7.0, 1.0), (0.0, 9.0), (20.0, 3.0), (-8.0, 6.0)] {
            let z = c(re, im);
            let j = w_jet(z);
            assert!((j.w - w(z)).norm() < 1e-13 * j.w.norm());
            let ode = -2.0 * z * j.w + i * (2.0 / PI.sqrt());
            assert!((ode - j.w1).norm() < 1e-10 * j.w1.norm());
        }
    }

    #[test]
    fn power_series_matches_faddeeva() {
        for &(re, im) in &[(0.1, 0.2), (-0.5, 0.3), (0.9, 0.05), (0.0, 1.5)] {
            let z = c(re, im);
            assert!((w_power_series(z) - w(z)).norm() < 1e-13);
        }
    }

    #[test]
    fn series_and_direct_partials_agree() {
        for &(x, y) in &[(0.3, 0.2), (0.24, 0.9), (1.2, 4.0), (2.6, 10.0)] {
            let d = rq_direct(x, y);
            let s = rq_series(x * x, y, 0.5 * y.max(1.0));
            let pairs = [
                (d.r, s.r),
                (d.r_x, s.r_x),
                (d.r_y, s.r_y),
                (d.r_xx, s.r_xx),
                (d.r_xy, s.r_xy),
                (d.r_yy, s.r_yy),
                (d.q, s.q),
                (d.q_x, s.q_x),
                (d.q_y, s.q_y),
                (d.q_xx, s.q_xx),
                (d.q_xy, s.q_xy),
                (d.q_yy, s.q_yy),
            ];
            for (k, (a, b)) in pairs.iter().enumerate() {
                assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "x={x} y={y} k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn partials_match_finite_differences() {
        let (x, y) = (0.7, 1.3);
        let h = 1e-5;
        let p = rq_partials(x, y);
        let rq = |xx: f64, yy: f64| {
            let v = w(c(xx.sqrt(), yy));
            (v.re, v.im / xx.sqrt())
        };
        let xx = x * x;
        let dx = (rq(xx + h, y).0 - rq(xx - h, y).0) / (2.0 * h);
        let dy = (rq(xx, y + h).1 - rq(xx, y - h).1) / (2.0 * h);
        assert!((dx - p.r_x).abs() < 1e-8);
        assert!((dy - p.q_y).abs() < 1e-8);
    }
}
