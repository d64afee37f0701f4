use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use chiral_bag::clifford::{anticommutator, boundary_projector, frob, gammas, hermitian_projectors, levi_civita, BoundaryFrame, Sign};
use chiral_bag::coeffs::{f6, g4};
use chiral_bag::halfspace_kernel::{heat_residual, voigt_u, voigt_v, HalfSpaceKernel, KernelConfig};
use chiral_bag::spectral_fiber::{fiber_spectrum, FiberProblem};

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

fn frame() -> impl Strategy<Value = BoundaryFrame> {
    (sign(), prop_oneof![Just(1.0), Just(-1.0)]).prop_map(|(epsilon, normal_sign)| BoundaryFrame { normal_sign, epsilon })
}

fn point(normal: std::ops::Range<f64>) -> impl Strategy<Value = [f64; 4]> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, normal).prop_map(|(a, b, c, n)| [a, b, c, n])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projectors_are_complementary_idempotents(theta in -3.0..3.0f64, f in frame()) {
        let g = gammas();
        let pm = boundary_projector(theta, &f);
        let pp = g.id - pm;
        prop_assert!(frob(&(pm * pm - pm)) < 1e-12 * theta.cosh().powi(2));
        prop_assert!(frob(&(pm * pp)) < 1e-12 * theta.cosh().powi(2));
        let (hp, hm) = hermitian_projectors(theta, &f);
        prop_assert!(frob(&(hp * hp - hp)) < 1e-12);
        prop_assert!(frob(&(hp + hm - g.id)) < 1e-12);
        prop_assert!((hp.trace().re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn clifford_relations(mu in 0usize..4, nu in 0usize..4) {
        let g = gammas();
        let expect = g.id * Complex64::new(if mu == nu { 2.0 } else { 0.0 }, 0.0);
        prop_assert!(frob(&(anticommutator(&g.gamma[mu], &g.gamma[nu]) - expect)) < 1e-15);
        prop_assert!(frob(&anticommutator(&g.gamma[mu], &g.gamma5)) < 1e-15);
    }

    #[test]
    fn levi_civita_is_antisymmetric(p in Just([0usize, 1, 2, 3]).prop_shuffle(), i in 0usize..3) {
        let mut q = p;
        q.swap(i, i + 1);
        prop_assert_eq!(levi_civita(&q), -levi_civita(&p));
        prop_assert_eq!(levi_civita(&p).abs(), 1);
    }

    #[test]
    fn kernel_hermitian_symmetry(theta in -2.0..2.0f64, eps in sign(), x in point(0.0..1.0), y in point(0.0..1.0), t in 0.01..1.0f64) {
        let k = HalfSpaceKernel::new(KernelConfig::new(theta, eps).unwrap());
        let a = k.eval(&x, &y, t);
        let b = k.eval(&y, &x, t).adjoint();
        prop_assert!(frob(&(a - b)) <= 1e-10 * frob(&a));
    }

    #[test]
    fn kernel_satisfies_boundary_condition(theta in -2.0..2.0f64, eps in sign(), x in point(0.0..0.0001), y in point(0.05..1.0), t in 0.01..1.0f64) {
        let x = [x[0], x[1], x[2], 0.0];
        let k = HalfSpaceKernel::new(KernelConfig::new(theta, eps).unwrap());
        let pm = boundary_projector(theta, &BoundaryFrame::half_space(eps));
        let gr = k.eval_grad(&x, &y, t);
        let n = frob(&gr.k);
        prop_assert!(frob(&(pm * gr.k)) <= 1e-8 * n);
        prop_assert!(frob(&(pm * gr.dirac_left())) <= 1e-8 * n);
    }

    #[test]
    fn epsilon_flip_is_gamma5_conjugation(theta in -2.0..2.0f64, x in point(0.0..1.0), y in point(0.0..1.0), t in 0.01..1.0f64) {
        let g5 = gammas().gamma5;
        let kp = HalfSpaceKernel::new(KernelConfig::new(theta, Sign::Plus).unwrap()).eval(&x, &y, t);
        let km = HalfSpaceKernel::new(KernelConfig::new(theta, Sign::Minus).unwrap()).eval(&x, &y, t);
        prop_assert!(frob(&(g5 * kp * g5 - km)) <= 1e-12 * frob(&kp));
    }

    #[test]
    fn heat_residual_shrinks_quadratically(theta in -1.5..1.5f64, x in point(0.2..1.0), y in point(0.1..1.0), t in 0.02..0.5f64) {
        let y = [x[0] + 0.3 * y[0] * t.sqrt(), x[1] + 0.3 * y[1] * t.sqrt(), x[2], y[3]];
        let k = HalfSpaceKernel::new(KernelConfig::new(theta, Sign::Plus).unwrap());
        let r1 = heat_residual(&k, &x, &y, t, 0.04).unwrap();
        let r2 = heat_residual(&k, &x, &y, t, 0.02).unwrap();
        let scale = frob(&k.eval(&x, &y, t)) / t;
        // Either second-order convergence or already at the roundoff floor.
        prop_assert!((r1 / r2).log2() > 1.5 || r1 < 1e-9 * scale, "r1 {r1:e} r2 {r2:e}");
    }

    #[test]
    fn coefficient_parities(theta in 0.001..5.0f64, eps in sign()) {
        prop_assert_eq!(f6(-theta), -f6(theta));
        prop_assert!(f6(theta) > 0.0);
        prop_assert_eq!(g4(-theta, eps), g4(theta, eps));
        prop_assert_eq!(g4(theta, eps.flip()), -g4(theta, eps));
    }

    #[test]
    fn voigt_parity(u in -20.0..20.0f64, t in 0.001..100.0f64) {
        let (a, b) = (voigt_u(u, t).unwrap(), voigt_u(-u, t).unwrap());
        prop_assert!((a - b).abs() <= 1e-13 * a.abs());
        let (c, d) = (voigt_v(u, t).unwrap(), voigt_v(-u, t).unwrap());
        prop_assert!((c + d).abs() <= 1e-13 * a.abs());
        prop_assert!(a > 0.0 && a <= 1.0 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn fiber_epsilon_flip_negates_spectrum(
        l in 0.6..1.6f64,
        k in (-0.8..0.8f64, -0.8..0.8f64, -0.8..0.8f64),
        th0 in -1.0..1.0f64,
        thl in -1.0..1.0f64,
        e0 in sign(),
        el in sign(),
    ) {
        let p = FiberProblem::new(l, [k.0, k.1, k.2], [0.0; 4], th0, thl, e0, el).unwrap();
        let window = 4.0 * PI / l;
        let (a, b) = match (fiber_spectrum(&p, window), fiber_spectrum(&p.flipped(), window)) {
            (Ok(a), Ok(b)) => (a, b),
            // A level sitting on the window edge or at zero is refused; nothing to compare.
            _ => return Ok(()),
        };
        let mut neg: Vec<f64> = b.eigenvalues.iter().map(|v| -v).collect();
        neg.sort_by(f64::total_cmp);
        prop_assert_eq!(a.eigenvalues.len(), neg.len());
        for (x, y) in a.eigenvalues.iter().zip(&neg) {
            prop_assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn fiber_levels_scale_inversely_with_length(l in 0.6..1.6f64, th in -1.0..1.0f64) {
        let p = FiberProblem::new(l, [0.0; 3], [0.0; 4], th, th, Sign::Plus, Sign::Plus).unwrap();
        let q = FiberProblem::new(l / 2.0, [0.0; 3], [0.0; 4], th, th, Sign::Plus, Sign::Plus).unwrap();
        let a = fiber_spectrum(&p, 3.0 * PI / l).unwrap();
        let b = fiber_spectrum(&q, 6.0 * PI / l).unwrap();
        prop_assert_eq!(a.eigenvalues.len(), b.eigenvalues.len());
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((2.0 * x - y).abs() < 1e-9 * (1.0 + y.abs()));
        }
    }
}
