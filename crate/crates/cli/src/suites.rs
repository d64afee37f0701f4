//! Verification suites. Every tolerance comes from the configuration; geometry that only
//! selects where a check is made (sample points, test boxes) is fixed here.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use chiral_bag::clifford::{boundary_projector, frob, BoundaryFrame, Sign};
use chiral_bag::coeffs::{
    abj_bulk, extract_coefficients, f6, g4, moment_prediction, parity_boundary, CoefficientTable, NormalSmearing, SmearedTrace,
};
use chiral_bag::config::Config;
use chiral_bag::dyson::{
    chiral_a_integrand, chiral_variation_identity_check, constant_shift_ratios, cross_integrand, delta_theta_first_order, g12_integrand,
    g3_integrand, theta_derivative_oracle, DysonRule, ImaginaritySampler,
};
use chiral_bag::fields::{FieldConfig, GaussianSpec, ScalarField, SupportBox, VectorField};
use chiral_bag::halfspace_kernel::{c_profile, heat_residual, HalfSpaceKernel, KernelConfig};
use chiral_bag::spectral_fiber::{eta_truncated, fiber_spectrum as solve_fiber, FiberProblem, Spectrum};
use wz_symbolic::{symmetry_constraint, wz_constraints, Ansatz, Constraint, VariationKind};

use crate::envelope::{Point, Report, Table};

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

/// Step factors for the heat-equation refinement, relative to `√t` in space and `t` in time.
const HEAT_STEPS: [f64; 3] = [0.04, 0.02, 0.01];

struct KernelSample {
    x: [f64; 4],
    y: [f64; 4],
    t: f64,
}

fn kernel_samples(cfg: &Config, interior: bool) -> Vec<KernelSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.samples.seed ^ u64::from(interior));
    let (t_lo, t_hi) = (cfg.t_grid[0], cfg.t_grid[cfg.t_grid.len() - 1]);
    (0..cfg.samples.kernel_points)
        .map(|_| {
            let t = t_lo * (t_hi / t_lo).powf(rng.random::<f64>());
            let st = t.sqrt();
            let mut x = [0.0; 4];
            let mut y = [0.0; 4];
            for k in 0..3 {
                x[k] = rng.random_range(-0.5..0.5);
                y[k] = x[k] + st * rng.random_range(-1.5..1.5);
            }
            x[3] = if interior { rng.random_range(0.1..1.0) } else { 0.0 };
            y[3] = rng.random_range(0.05..1.0);
            KernelSample { x, y, t }
        })
        .collect()
}

/// Boundary conditions, Hermitian symmetry and the heat equation for `K₀`.
pub fn verify_kernel(cfg: &Config) -> Report {
    let mut r = Report::default();
    let tol = &cfg.tolerances;
    for eps in [Sign::Plus, Sign::Minus] {
        let kc = KernelConfig { epsilon: eps, ..cfg.kernel };
        let kernel = HalfSpaceKernel::new(kc);
        let pm = boundary_projector(kc.theta, &BoundaryFrame::half_space(eps));
        let tag = if eps == Sign::Plus { "eps+" } else { "eps-" };

        let bc: Vec<(f64, f64, f64)> = kernel_samples(cfg, false)
            .par_iter()
            .map(|s| {
                let g = kernel.eval_grad(&s.x, &s.y, s.t);
                let n = frob(&g.k);
                let sym = frob(&(kernel.eval(&s.y, &s.x, s.t).adjoint() - kernel.eval(&s.x, &s.y, s.t)));
                (frob(&(pm * g.k)) / n, frob(&(pm * g.dirac_left())) / n, sym / n)
            })
            .collect();
        let (k0, dk0, sym) = (max_of(bc.iter().map(|b| b.0)), max_of(bc.iter().map(|b| b.1)), max_of(bc.iter().map(|b| b.2)));
        r.value(format!("{tag}.bc_residual_k"), k0, 0.0);
        r.value(format!("{tag}.bc_residual_dirac_k"), dk0, 0.0);
        r.value(format!("{tag}.hermitian_residual"), sym, 0.0);
        r.check(
            format!("kernel.{tag}.bc_k"),
            k0 < tol.kernel_bc_rel,
            format!("max ‖Π₋K₀‖/‖K₀‖ = {k0:.3e} (bound {:.1e})", tol.kernel_bc_rel),
        );
        r.check(
            format!("kernel.{tag}.bc_dirac_k"),
            dk0 < tol.kernel_bc_rel,
            format!("max ‖Π₋D̸K₀‖/‖K₀‖ = {dk0:.3e} (bound {:.1e})", tol.kernel_bc_rel),
        );
        r.check(
            format!("kernel.{tag}.hermitian"),
            sym < tol.kernel_symmetry_rel,
            format!("max ‖K₀(y,x)† − K₀(x,y)‖/‖K₀‖ = {sym:.3e} (bound {:.1e})", tol.kernel_symmetry_rel),
        );

        let samples = kernel_samples(cfg, true);
        let rows: Vec<Result<Vec<f64>, chiral_bag::Error>> = samples
            .par_iter()
            .map(|s| {
                let scale = frob(&kernel.eval(&s.x, &s.y, s.t)) / s.t;
                HEAT_STEPS.iter().map(|&h| heat_residual(&kernel, &s.x, &s.y, s.t, h).map(|v| v / scale)).collect()
            })
            .collect();
        let Some(rows) = r.guard(&format!("kernel.{tag}.heat"), rows.into_iter().collect::<Result<Vec<_>, _>>()) else {
            continue;
        };
        let totals: Vec<f64> = (0..HEAT_STEPS.len()).map(|k| rows.iter().map(|v| v[k]).sum::<f64>() / rows.len() as f64).collect();
        let orders: Vec<f64> = totals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        let local = rows.iter().filter(|v| ((v[0] / v[1]).log2() - tol.heat_order).abs() < tol.heat_order_slack).count();
        r.value(format!("{tag}.heat_points_at_order_fraction"), local as f64 / rows.len() as f64, 0.0);
        for (k, o) in orders.iter().enumerate() {
            r.value(format!("{tag}.heat_order_{k}"), *o, 0.0);
        }
        r.check(
            format!("kernel.{tag}.heat_order"),
            orders.iter().all(|o| (o - tol.heat_order).abs() < tol.heat_order_slack),
            format!("mean relative residual orders {orders:.3?} under halving (target {} ± {})", tol.heat_order, tol.heat_order_slack),
        );
        r.series(format!("heat_residual_{tag}"), HEAT_STEPS.iter().zip(&totals).map(|(&x, &y)| Point { x, y, yerr: 0.0 }).collect());
    }
    r
}

fn coefficient_table(cfg: &Config, r: &mut Report) -> Option<CoefficientTable> {
    r.guard("coeffs.table", CoefficientTable::compute(&cfg.theta_grid, cfg.quadrature.rel_tol))
}

/// `c₄(θ)` against the closed form `f₆`.
pub fn f6_reproduction(cfg: &Config) -> Report {
    let mut r = Report::default();
    let tol = cfg.tolerances.coeff_rel;
    let Some(table) = coefficient_table(cfg, &mut r) else { return r };
    let (m6, _) = table.closed_form_mismatch();
    r.value("f6.max_rel_mismatch", m6, 0.0);
    r.check("f6.closed_form", m6 < tol, format!("max |c₄ − f₆|/f₆ = {m6:.3e} over θ = {:?} (bound {tol:.1e})", cfg.theta_grid));
    let spot = f6(1.0);
    r.check("f6.spot_theta_1", (spot - 2.603e-3).abs() < 5e-7, format!("f₆(1) = {spot:.6e}, expected 2.603e-3 to four digits"));
    let monotone = table.rows.windows(2).all(|w| w[1].f6 > w[0].f6) && table.rows.iter().all(|row| row.theta <= 0.0 || row.f6 > 0.0);
    r.check("f6.positive_increasing", monotone, "f₆ is positive and increasing on the θ grid");
    for row in &table.rows {
        r.value(format!("c4(theta={})", row.theta), row.c4, row.err_c4);
    }
    r
}

/// `−c₃(θ)/sinh θ` against the closed form `G₄/ε`, and the `θ = 0` value.
pub fn g4_reproduction(cfg: &Config) -> Report {
    let mut r = Report::default();
    let tol = cfg.tolerances.coeff_rel;
    let Some(table) = coefficient_table(cfg, &mut r) else { return r };
    let (_, m4) = table.closed_form_mismatch();
    r.value("g4.max_rel_mismatch", m4, 0.0);
    r.check("g4.closed_form", m4 < tol, format!("max |−c₃/sinh θ − G₄/ε|/|G₄| = {m4:.3e} (bound {tol:.1e})"));
    let at0 = g4(0.0, Sign::Plus);
    let expect = -1.0 / (32.0 * PI.powf(1.5));
    r.check("g4.at_zero", (at0 - expect).abs() < 1e-14 * expect.abs(), format!("G₄(0)/ε = {at0:.9e}, expected {expect:.9e}"));
    for row in &table.rows {
        r.value(format!("c3(theta={})", row.theta), row.c3, row.err_c3);
    }
    r
}

/// Coefficient table with both closed-form checks, CSV output and plot series.
pub fn coeff_table(cfg: &Config) -> Report {
    let mut r = f6_reproduction(cfg);
    r.merge(g4_reproduction(cfg));
    let mut scratch = Report::default();
    let Some(table) = coefficient_table(cfg, &mut scratch) else {
        r.merge(scratch);
        return r;
    };
    r.value("G0_over_eps", table.g0_over_eps, 0.0);
    r.tables.push(Table {
        file: "coeff_table.csv".into(),
        header: ["theta", "c2", "c3", "c4", "f6", "G4_over_eps", "err_c2", "err_c3", "err_c4"].map(String::from).to_vec(),
        rows: table.rows.iter().map(|w| vec![w.theta, w.c2, w.c3, w.c4, w.f6, w.g4_over_eps, w.err_c2, w.err_c3, w.err_c4]).collect(),
    });
    let col = |f: &dyn Fn(&chiral_bag::coeffs::CoefficientRow) -> (f64, f64)| -> Vec<Point> {
        table
            .rows
            .iter()
            .map(|w| {
                let (y, yerr) = f(w);
                Point { x: w.theta, y, yerr }
            })
            .collect()
    };
    r.series("f6", col(&|w| (w.f6, 0.0)));
    r.series("c2", col(&|w| (w.c2, w.err_c2)));
    r.series("c3", col(&|w| (w.c3, w.err_c3)));
    r.series("c4", col(&|w| (w.c4, w.err_c4)));
    r.series("G4", col(&|w| (-w.c3 / w.theta.sinh(), w.err_c3 / w.theta.sinh().abs())));
    // 𝒞(u, 1) away from u = 0, where both arguments sit on the boundary.
    let profile: Result<Vec<Point>, _> = (1..=80)
        .map(|i| {
            let u = i as f64 * 0.05;
            c_profile(u, 1.0, &cfg.kernel).map(|y| Point { x: u, y, yerr: 0.0 })
        })
        .collect();
    if let Some(p) = r.guard("coeffs.c_profile", profile) {
        r.series("C_profile", p);
    }
    r
}

/// Pure imaginarity of the G₁, G₂, G₃ and A-linear chiral integrands on random configurations.
pub fn imaginarity(cfg: &Config) -> Report {
    let mut r = Report::default();
    let tol = cfg.tolerances.imaginary_rel;
    let step = cfg.quadrature.mixed_derivative_step;
    let mut sampler = ImaginaritySampler::new(cfg.samples.seed);
    let samples: Vec<_> = (0..cfg.samples.imaginarity_configs).map(|_| sampler.sample()).collect();
    let reports: Vec<[(f64, f64, f64); 4]> = samples
        .par_iter()
        .map(|c| {
            let k = HalfSpaceKernel::new(c.cfg);
            let fields = FieldConfig { a: VectorField::Constant(c.a), b: VectorField::Constant(c.b), ..FieldConfig::none() };
            [
                g12_integrand(&k, &c.x, &c.z1, c.t, c.w, &c.a, &c.b, step),
                g3_integrand(&k, &c.x, &c.z1, c.t, c.w, &c.a, c.scalar, step),
                chiral_a_integrand(&k, &c.x, &c.z1, c.t, c.w, c.scalar, &c.a, step),
                cross_integrand(&k, &c.x, &c.z1, &c.z2, c.t, c.w, c.q, c.scalar, &fields, step),
            ]
            .map(|x| {
                (x.real_fraction, x.max_imag_coefficient, (x.trace - x.trace_real_route).norm() / x.trace.norm().max(f64::MIN_POSITIVE))
            })
        })
        .collect();
    for (i, name) in ["g12", "g3", "chiral_a", "cross_ab"].iter().enumerate() {
        let re = max_of(reports.iter().map(|x| x[i].0));
        let im = max_of(reports.iter().map(|x| x[i].1));
        let route = max_of(reports.iter().map(|x| x[i].2));
        r.value(format!("{name}.max_real_fraction"), re, 0.0);
        r.value(format!("{name}.max_imag_generator_coefficient"), im, 0.0);
        r.check(
            format!("imaginarity.{name}.real_part"),
            re < tol,
            format!("max |Re tr|/|tr| = {re:.3e} over {} configurations (bound {tol:.1e})", samples.len()),
        );
        r.check(
            format!("imaginarity.{name}.real_generators"),
            im < tol && route < 1e3 * tol,
            format!("real-generator route: max imaginary coefficient {im:.3e}, route mismatch {route:.3e}"),
        );
    }
    r
}

/// Sample geometry for the constant-Δθ check.
const SHIFT_X: [f64; 4] = [0.1, -0.05, 0.2, 0.25];
const SHIFT_Y: [f64; 4] = [-0.1, 0.1, 0.0, 0.35];
const SHIFT_T: f64 = 0.1;
const SHIFT_DELTA: f64 = 0.2;
const SHIFT_HALVINGS: usize = 3;
const VAR_TR_T: f64 = 0.1;

/// First-order Δθ correction and the chiral-variation trace identity.
pub fn dyson_consistency(cfg: &Config) -> Report {
    let mut r = Report::default();
    let tol = &cfg.tolerances;
    let rule = DysonRule::from_spec(&cfg.quadrature);
    let kc = cfg.kernel;
    let one = ScalarField::Constant(1.0);
    if let Some(d) =
        r.guard("dyson.delta_theta", delta_theta_first_order(&kc, &one, &SHIFT_X, &SHIFT_Y, SHIFT_T, &rule, tol.dyson_theta_rel))
    {
        let oracle = theta_derivative_oracle(&kc, &SHIFT_X, &SHIFT_Y, SHIFT_T, 1e-3);
        let rel = frob(&(d.value - oracle)) / frob(&oracle);
        r.value("dyson.delta_theta_rel_dev", rel, d.abs_err / frob(&oracle));
        r.check(
            "dyson.theta_derivative",
            rel < tol.dyson_theta_rel,
            format!("‖δK − ∂_θK₀‖/‖∂_θK₀‖ = {rel:.3e} (bound {:.1e})", tol.dyson_theta_rel),
        );
        let (errs, ratios) = constant_shift_ratios(&kc, &d.value, &SHIFT_X, &SHIFT_Y, SHIFT_T, SHIFT_DELTA, SHIFT_HALVINGS);
        for (k, q) in ratios.iter().enumerate() {
            r.value(format!("dyson.shift_ratio_{k}"), *q, 0.0);
        }
        r.check(
            "dyson.second_order_scaling",
            ratios.iter().all(|q| (q - tol.dyson_ratio).abs() < tol.dyson_ratio_slack),
            format!("error ratios under Δθ halving {ratios:.3?} (target {} ± {})", tol.dyson_ratio, tol.dyson_ratio_slack),
        );
        r.series(
            "dyson_shift_error",
            errs.iter().enumerate().map(|(k, e)| Point { x: SHIFT_DELTA / 2f64.powi(k as i32), y: *e, yerr: 0.0 }).collect(),
        );
    }
    let dphi = ScalarField::Gaussian(cfg.fields.delta_phi.clone());
    for eps in [Sign::Plus, Sign::Minus] {
        let tag = if eps == Sign::Plus { "eps+" } else { "eps-" };
        let c = KernelConfig { epsilon: eps, ..kc };
        if let Some(v) = r.guard(&format!("dyson.var_tr.{tag}"), chiral_variation_identity_check(&c, &dphi, VAR_TR_T, &cfg.quadrature)) {
            r.value(format!("var_tr.{tag}.lhs"), v.lhs_theta + v.lhs_b, 0.0);
            r.value(format!("var_tr.{tag}.rhs"), v.rhs, 0.0);
            r.check(
                format!("dyson.var_tr.{tag}"),
                v.residual < tol.var_tr_rel,
                format!("relative residual {:.3e} at t = {VAR_TR_T}, θ = {} (bound {:.1e})", v.residual, c.theta, tol.var_tr_rel),
            );
        }
    }
    r
}

pub fn dyson_check(cfg: &Config) -> Report {
    let mut r = imaginarity(cfg);
    r.merge(dyson_consistency(cfg));
    r
}

/// Which ansatz `wz-solve` reads.
#[derive(Clone, Debug, PartialEq)]
pub enum AnsatzSource {
    A45,
    A3stru,
    Text { name: String, text: String },
}

impl AnsatzSource {
    /// `a45`, `a3stru`, or a path to an ansatz file.
    pub fn from_arg(arg: &str) -> std::io::Result<Self> {
        Ok(match arg {
            "a45" => AnsatzSource::A45,
            "a3stru" => AnsatzSource::A3stru,
            path => AnsatzSource::Text { name: path.to_string(), text: std::fs::read_to_string(path)? },
        })
    }

    pub fn name(&self) -> &str {
        match self {
            AnsatzSource::A45 => "a45",
            AnsatzSource::A3stru => "a3stru",
            AnsatzSource::Text { name, .. } => name,
        }
    }

    pub fn text(&self) -> &str {
        match self {
            AnsatzSource::A45 => wz_symbolic::A45,
            AnsatzSource::A3stru => wz_symbolic::A3STRU,
            AnsatzSource::Text { text, .. } => text,
        }
    }

    /// Known answer for the shipped ansätze.
    fn expected(&self) -> Option<Vec<&'static str>> {
        match self {
            AnsatzSource::A45 => Some(vec!["f1 - 2 f3' = 0", "f2 - 2 f4' = 0"]),
            AnsatzSource::A3stru => Some(vec!["G0' = 0"]),
            AnsatzSource::Text { .. } => None,
        }
    }
}

/// Constraints from Wess–Zumino consistency (chiral ansätze) or second-variation symmetry
/// (gauge ansätze).
pub fn wz_solve(src: &AnsatzSource) -> Report {
    let mut r = Report::default();
    let name = src.name().to_string();
    let Some(ansatz) = r.guard(&format!("wz.{name}.parse"), Ansatz::parse(src.text())) else { return r };
    let solved = match ansatz.variation {
        VariationKind::Chiral => wz_constraints(&ansatz),
        VariationKind::Gauge => symmetry_constraint(&ansatz),
    };
    let Some(cs) = r.guard(&format!("wz.{name}.solve"), solved) else { return r };
    let shown: Vec<String> = cs.iter().map(Constraint::to_string).collect();
    r.value(format!("wz.{name}.constraint_count"), cs.len() as f64, 0.0);
    r.data.insert(
        "constraints".into(),
        json!({ "ansatz": name, "variation": format!("{:?}", ansatz.variation), "dropped": ansatz.dropped, "constraints": cs, "display": shown }),
    );
    match src.expected() {
        Some(want) => {
            r.check(format!("wz.{name}.constraints"), shown == want, format!("got {shown:?}, expected {want:?}"));
        }
        None => {
            r.check(format!("wz.{name}.solved"), true, format!("{} constraint(s): {shown:?}", cs.len()));
        }
    }
    r
}

/// `λ_m = ((m+½)π + 2 atan(tanh(θ/2)))/L`, doubly degenerate, for `θ₀ = θ_L = θ`, `k = b = 0`.
fn equal_angle_oracle(p: &FiberProblem, window: f64) -> Option<Vec<f64>> {
    let free = p.k == [0.0; 3] && p.b == [0.0; 4] && p.theta0 == p.theta_l && p.eps0 == Sign::Plus && p.eps_l == Sign::Plus;
    if !free {
        return None;
    }
    let shift = 2.0 * (p.theta0 / 2.0).tanh().atan();
    let mut out = Vec::new();
    let m_max = (window * p.length / PI).ceil() as i64 + 1;
    for m in -m_max..=m_max {
        let v = ((m as f64 + 0.5) * PI + shift) / p.length;
        if v.abs() < window {
            out.push(v);
            out.push(v);
        }
    }
    Some(out)
}

fn spectrum_series(s: &Spectrum) -> Vec<Point> {
    s.eigenvalues.iter().enumerate().map(|(i, l)| Point { x: i as f64, y: *l, yerr: 0.0 }).collect()
}

/// Certified fiber spectra, the ε-flip symmetry and the sign of the truncated η.
pub fn fiber_spectrum(cfg: &Config) -> Report {
    let mut r = Report::default();
    let tol = cfg.tolerances.fiber_abs;
    let spec = &cfg.fiber;
    if let Some(p) = r.guard("fiber.problem", FiberProblem::from_spec(spec)) {
        if let Some(s) = r.guard("fiber.spectrum", solve_fiber(&p, spec.window)) {
            r.value("fiber.eigenvalue_count", s.eigenvalues.len() as f64, 0.0);
            r.value("fiber.winding_count", s.winding_count as f64, 0.0);
            if let Some(want) = equal_angle_oracle(&p, spec.window) {
                let ok_len = want.len() == s.eigenvalues.len();
                let dev = if ok_len { max_of(s.eigenvalues.iter().zip(&want).map(|(a, b)| (a - b).abs())) } else { f64::INFINITY };
                r.value("fiber.oracle_max_dev", dev, 0.0);
                r.check(
                    "fiber.closed_form_levels",
                    ok_len && dev < tol,
                    format!("{} levels vs {} expected, max deviation {dev:.3e} (bound {tol:.1e})", s.eigenvalues.len(), want.len()),
                );
            }
            if let Some(e) = r.guard("fiber.eta", eta_truncated(spec.eta_s, &s, p.length)) {
                r.value("fiber.eta", e.value, e.tail_bound);
            }
            r.series("eigenvalues", spectrum_series(&s));
        }
    }

    let g = &cfg.fiber_generic;
    let Some(p) = r.guard("fiber.generic_problem", FiberProblem::from_spec(g)) else { return r };
    let pair = rayon::join(|| solve_fiber(&p, g.window), || solve_fiber(&p.flipped(), g.window));
    let (Some(a), Some(b)) = (r.guard("fiber.generic_spectrum", pair.0), r.guard("fiber.flipped_spectrum", pair.1)) else { return r };
    let mut neg: Vec<f64> = b.eigenvalues.iter().map(|l| -l).collect();
    neg.sort_by(f64::total_cmp);
    let same_len = neg.len() == a.eigenvalues.len();
    let dev = if same_len { max_of(a.eigenvalues.iter().zip(&neg).map(|(x, y)| (x - y).abs() / (1.0 + x.abs()))) } else { f64::INFINITY };
    r.value("fiber.flip_max_rel_dev", dev, 0.0);
    r.check(
        "fiber.epsilon_flip_negates",
        a.certified && b.certified && same_len && dev < tol,
        format!("{} vs {} levels, max |λ + λ_flip|/(1+|λ|) = {dev:.3e} (bound {tol:.1e})", a.eigenvalues.len(), b.eigenvalues.len()),
    );
    let ea = r.guard("fiber.generic_eta", eta_truncated(g.eta_s, &a, p.length));
    let eb = r.guard("fiber.flipped_eta", eta_truncated(g.eta_s, &b, p.length));
    if let (Some(ea), Some(eb)) = (ea, eb) {
        r.value("fiber.generic_eta", ea.value, ea.tail_bound);
        r.value("fiber.flipped_eta", eb.value, eb.tail_bound);
        let resolved = ea.value.abs() > ea.tail_bound + eb.tail_bound;
        r.check(
            "fiber.eta_sign_flip",
            resolved && ea.value.signum() == -eb.value.signum() && (ea.value + eb.value).abs() < tol,
            format!("η(s={}) = {:.6e} → {:.6e} under the flip, tail bound {:.1e}", g.eta_s, ea.value, eb.value, ea.tail_bound),
        );
    }
    r.series("eigenvalues_generic", spectrum_series(&a));
    r.series("eigenvalues_generic_flipped", spectrum_series(&b));
    r
}

/// Constant-field test geometry for the bulk term.
const ABJ_BOX: SupportBox = SupportBox { lo: [0.0, -1.0, 0.5, 0.0], hi: [1.0, 1.0, 1.5, 2.0] };
const ABJ_B: f64 = 0.7;
const ABJ_DPHI: f64 = 0.3;

fn self_dual_constant(b: f64) -> impl Fn(&[f64; 4]) -> [[f64; 4]; 4] + Sync {
    move |_| {
        let mut f = [[0.0; 4]; 4];
        f[0][1] = b;
        f[1][0] = -b;
        f[2][3] = b;
        f[3][2] = -b;
        f
    }
}

/// Bulk ABJ term for constant `F₁₂ = F₃₄ = B`.
pub fn abj(cfg: &Config) -> Report {
    let mut r = Report::default();
    let tol = cfg.tolerances.abj_rel;
    let vol: f64 = (0..4).map(|m| ABJ_BOX.hi[m] - ABJ_BOX.lo[m]).product();
    let expect = ABJ_DPHI * 8.0 * ABJ_B * ABJ_B * vol / (16.0 * PI * PI);
    let f = self_dual_constant(ABJ_B);
    if let Some(e) = r.guard("abj.bulk", abj_bulk(&ScalarField::Constant(ABJ_DPHI), &f, &ABJ_BOX, Sign::Plus, tol)) {
        let rel = (e.value - expect).abs() / expect;
        r.value("abj.bulk", e.value, e.abs_err);
        r.check(
            "abj.constant_field",
            rel < tol,
            format!("{:.12e} vs (1/16π²)δφ·8B²V = {expect:.12e}, rel {rel:.2e} (bound {tol:.1e})", e.value),
        );
    }
    r
}

/// `∫(g f′ − f g′)dx` for `f = e^{−(x−a)²/2sf²}`, `g = e^{−(x−b)²/2sg²}`.
fn gaussian_pair_oracle(a: f64, sf: f64, b: f64, sg: f64) -> f64 {
    let p = 1.0 / (2.0 * sf * sf) + 1.0 / (2.0 * sg * sg);
    let m = (a / (2.0 * sf * sf) + b / (2.0 * sg * sg)) / p;
    let c = (-(a - b).powi(2) / (2.0 * (sf * sf + sg * sg))).exp();
    2.0 * (-(m - a) / (sf * sf)) * (PI / p).sqrt() * c
}

/// Boundary parity-odd term: 1D reduction, ε-odd sign, vanishing on pure gauge.
pub fn parity(cfg: &Config) -> Report {
    let mut r = Report::default();
    let tol = cfg.tolerances.parity_abs;
    // A₁ = g(x⁰)E, A₂ = f(x⁰)E with E a Gaussian in (x¹, x²) of width e; the ε contraction
    // leaves −(1/16π)·πe²·∫(g f′ − f g′).
    let spec = &cfg.fields.a_field;
    let e = spec.widths[1].unwrap_or(1.0);
    let (fa, fs, ga, gs) = (spec.center[0] + 0.3, 0.5, spec.center[0] - 0.2, 0.6);
    let env = |c: f64, w: f64| {
        ScalarField::Gaussian(GaussianSpec {
            center: [c, 0.0, 0.0, 0.0],
            widths: [Some(w), Some(e), Some(e), None],
            amplitude: 1.0,
            normal_power: 0,
        })
    };
    let a = VectorField::Components(Box::new([ScalarField::Zero, env(ga, gs), env(fa, fs), ScalarField::Zero]));
    let expect = -1.0 / (16.0 * PI) * PI * e * e * gaussian_pair_oracle(fa, fs, ga, gs);
    let bx = a.support().expect("Gaussian field has support");
    let plus = r.guard("parity.eps+", parity_boundary(&a, Sign::Plus, &bx, tol));
    let minus = r.guard("parity.eps-", parity_boundary(&a, Sign::Minus, &bx, tol));
    if let (Some((wp, ep)), Some((wm, _))) = (plus, minus) {
        let dev = (wp.im - expect).abs();
        r.value("parity.im_w", wp.im, ep);
        r.check(
            "parity.one_dimensional_reduction",
            wp.re == 0.0 && dev < tol * expect.abs().max(1.0),
            format!("Im W = {:.12e} vs {expect:.12e}, deviation {dev:.2e}", wp.im),
        );
        r.check("parity.epsilon_odd", wm.im == -wp.im && wm.re == 0.0, format!("W(ε=−1) = {:.6e}i, W(ε=+1) = {:.6e}i", wm.im, wp.im));
    }
    let chi = ScalarField::Gaussian(spec.clone());
    let pure = VectorField::Gradient(chi);
    let bx = pure.support().expect("Gaussian field has support");
    if let Some((w, _)) = r.guard("parity.pure_gauge_eval", parity_boundary(&pure, Sign::Plus, &bx, 1.0)) {
        r.value("parity.pure_gauge_abs", w.norm(), 0.0);
        r.check("parity.pure_gauge", w.norm() < tol, format!("|W[∂χ]| = {:.3e} (bound {tol:.1e})", w.norm()));
    }
    r
}

/// Small-`t` fit of the smeared γ₅-trace.
pub fn extraction(cfg: &Config) -> Report {
    let mut r = Report::default();
    let tol = &cfg.tolerances;
    let e = &cfg.extraction;
    let Some(kc) = r.guard("extract.kernel", KernelConfig::new(e.theta, cfg.kernel.epsilon)) else { return r };
    let q = NormalSmearing::from_spec(e);
    let Some(tr) = r.guard("extract.trace", SmearedTrace::for_extraction(&kc, &q, e, cfg.quadrature.rel_tol)) else { return r };
    r.series(
        "smeared_trace",
        tr.t_grid.iter().zip(&tr.values).zip(&tr.abs_err).map(|((t, v), err)| Point { x: *t, y: *v, yerr: *err }).collect(),
    );
    let Some(ex) =
        r.guard("extract.fit", extract_coefficients(&tr, &[4, 5, 6, 7], e.t_min_ratio, e.bootstrap, cfg.samples.seed, e.max_condition))
    else {
        return r;
    };
    let Some(a4) = r.guard("extract.prediction", moment_prediction(&kc, &q, 4, cfg.quadrature.rel_tol)) else { return r };
    let got = &ex.coefficients[0];
    let rel = (got.value - a4).abs() / a4.abs();
    for c in &ex.coefficients {
        r.value(format!("a{}", c.order), c.value, c.std_err);
    }
    r.value("a4_prediction", a4, 0.0);
    r.value("residual_slope", ex.residual_slope, 0.0);
    r.check(
        "extract.a4",
        rel < tol.extract_rel,
        format!("fitted a₄ = {:.9e} vs c₄∫∂ₙ³δφ = {a4:.9e}, rel {rel:.2e} (bound {:.1e})", got.value, tol.extract_rel),
    );
    r.check(
        "extract.a4_within_error",
        (got.value - a4).abs() <= tol.extract_sigma * got.std_err || rel < 1e-12,
        format!("|Δ| = {:.3e}, {}σ = {:.3e}", (got.value - a4).abs(), tol.extract_sigma, tol.extract_sigma * got.std_err),
    );
    r.check(
        "extract.residual_slope",
        (ex.residual_slope - ex.expected_slope).abs() < tol.slope_slack,
        format!("slope {:.4} vs next half-integer power {:.1} (± {})", ex.residual_slope, ex.expected_slope, tol.slope_slack),
    );
    r
}

pub fn anomaly_eval(cfg: &Config) -> Report {
    let mut r = abj(cfg);
    r.merge(parity(cfg));
    r.merge(extraction(cfg));
    r
}
