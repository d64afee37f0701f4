//! Run configuration. Every tolerance, node count and test-field parameter used by the suites
//! lives in `config/default.json`, which is compiled in as the default.

use serde::{Deserialize, Serialize};

use crate::clifford::Sign;
use crate::error::{Error, Result};
use crate::fields::GaussianSpec;
use crate::halfspace_kernel::KernelConfig;

pub const DEFAULT_CONFIG_JSON: &str = include_str!("../../../config/default.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Truncation margin for boundary and bulk integrals, in units of `√t`.
    pub margin_sqrt_t: f64,
    pub time_nodes: usize,
    pub tangential_nodes: usize,
    pub normal_nodes: usize,
    /// Relative step (in units of `√t`) for mixed second derivatives of `K₀`.
    pub mixed_derivative_step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub voigt_rel: f64,
    pub kernel_bc_rel: f64,
    pub kernel_symmetry_rel: f64,
    pub heat_order: f64,
    pub heat_order_slack: f64,
    pub coeff_rel: f64,
    pub abj_rel: f64,
    pub parity_abs: f64,
    pub imaginary_rel: f64,
    pub dyson_ratio: f64,
    pub dyson_ratio_slack: f64,
    pub dyson_theta_rel: f64,
    pub var_tr_rel: f64,
    pub fiber_abs: f64,
    pub extract_rel: f64,
    pub extract_sigma: f64,
    pub slope_slack: f64,
}

impl Tolerances {
    /// Multiplies every absolute/relative accuracy target by `s`; targets that are exact
    /// expectations (orders, ratios) and their slacks are left alone.
    pub fn scaled(&self, s: f64) -> Self {
        Tolerances {
            voigt_rel: self.voigt_rel * s,
            kernel_bc_rel: self.kernel_bc_rel * s,
            kernel_symmetry_rel: self.kernel_symmetry_rel * s,
            coeff_rel: self.coeff_rel * s,
            abj_rel: self.abj_rel * s,
            parity_abs: self.parity_abs * s,
            imaginary_rel: self.imaginary_rel * s,
            dyson_theta_rel: self.dyson_theta_rel * s,
            var_tr_rel: self.var_tr_rel * s,
            fiber_abs: self.fiber_abs * s,
            extract_rel: self.extract_rel * s,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSpecs {
    pub delta_phi: GaussianSpec,
    pub a_field: GaussianSpec,
    pub b_field: GaussianSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub seed: u64,
    pub kernel_points: usize,
    pub imaginarity_configs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSpec {
    pub theta: f64,
    /// `δφ = g(x∥)·(xⁿ)³·exp(−(xⁿ − x₀)²/2w²)` with `x₀ = normal_center`, `w = normal_width`.
    pub normal_center: f64,
    pub normal_width: f64,
    pub tangential_width: f64,
    pub t_max: f64,
    pub t_min_ratio: f64,
    pub points: usize,
    pub bootstrap: usize,
    pub max_condition: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    pub length: f64,
    pub k: [f64; 3],
    pub b: [f64; 4],
    pub theta0: f64,
    pub theta_l: f64,
    pub eps0: Sign,
    pub eps_l: Sign,
    pub window: f64,
    /// Exponent of the truncated η sum; must exceed 1.
    pub eta_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub kernel: KernelConfig,
    pub quadrature: QuadratureSpec,
    pub tolerances: Tolerances,
    pub fields: FieldSpecs,
    pub theta_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub samples: SampleSpec,
    pub extraction: ExtractionSpec,
    pub fiber: FiberSpec,
    /// Asymmetric fiber problem for the ε-flip and η checks.
    pub fiber_generic: FiberSpec,
}

impl Config {
    pub fn shipped() -> Self {
        Self::from_json(DEFAULT_CONFIG_JSON).expect("shipped config is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Config = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let q = &self.quadrature;
        let positive = [
            ("abs_tol", q.abs_tol),
            ("rel_tol", q.rel_tol),
            ("margin_sqrt_t", q.margin_sqrt_t),
            ("mixed_derivative_step", q.mixed_derivative_step),
            ("extraction.t_max", self.extraction.t_max),
            ("fiber.length", self.fiber.length),
            ("fiber.window", self.fiber.window),
            ("fiber_generic.length", self.fiber_generic.length),
            ("fiber_generic.window", self.fiber_generic.window),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if q.time_nodes == 0 || q.tangential_nodes == 0 || q.normal_nodes == 0 || q.max_panels == 0 {
            return Err(Error::Config("node counts must be nonzero".into()));
        }
        let tol = serde_json::to_value(&self.tolerances).map_err(|e| Error::Config(e.to_string()))?;
        for (k, v) in tol.as_object().expect("struct serializes to object") {
            if !(v.as_f64().is_some_and(|x| x > 0.0)) {
                return Err(Error::Config(format!("tolerance {k} must be positive")));
            }
        }
        for (name, g) in [("theta_grid", &self.theta_grid), ("t_grid", &self.t_grid)] {
            if g.is_empty() || g.windows(2).any(|w| w[0] >= w[1]) || g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("{name} must be nonempty, finite and strictly increasing")));
            }
        }
        if self.t_grid[0] <= 0.0 {
            return Err(Error::Config("t_grid must be positive".into()));
        }
        if !(self.extraction.t_min_ratio > 0.0 && self.extraction.t_min_ratio < 1.0) {
            return Err(Error::Config("extraction.t_min_ratio must lie in (0,1)".into()));
        }
        if self.fiber.eta_s <= 1.0 || self.fiber_generic.eta_s <= 1.0 {
            return Err(Error::Config("eta_s must exceed 1".into()));
        }
        KernelConfig::new(self.kernel.theta, self.kernel.epsilon).map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn with_tolerance_scale(mut self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Config(format!("tolerance scale must be positive, got {s}")));
        }
        self.tolerances = self.tolerances.scaled(s);
        self.quadrature.rel_tol *= s;
        self.quadrature.abs_tol *= s;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_parses() {
        let c = Config::shipped();
        assert_eq!(c.theta_grid, vec![0.25, 0.5, 1.0, 2.0, 4.0]);
        assert_eq!(c.kernel.epsilon, Sign::Plus);
    }

    #[test]
    fn rejects_bad_grids_and_tolerances() {
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_CONFIG_JSON).unwrap();
        v["theta_grid"] = serde_json::json!([1.0, 0.5]);
        assert!(Config::from_json(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(DEFAULT_CONFIG_JSON).unwrap();
        v["tolerances"]["coeff_rel"] = serde_json::json!(-1.0);
        assert!(Config::from_json(&v.to_string()).is_err());
        assert!(Config::from_json("{").is_err());
    }

    #[test]
    fn tolerance_scale_keeps_orders() {
        let c = Config::shipped().with_tolerance_scale(10.0).unwrap();
        let d = Config::shipped();
        assert_eq!(c.tolerances.heat_order, d.tolerances.heat_order);
        assert!((c.tolerances.coeff_rel - 10.0 * d.tolerances.coeff_rel).abs() < 1e-20);
        assert!(Config::shipped().with_tolerance_scale(0.0).is_err());
    }
}
