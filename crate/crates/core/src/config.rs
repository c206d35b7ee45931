//! JSON run configuration. Unknown keys are rejected; parse errors carry the path
//! of the offending field.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::certificates::{RadiusConvention, TauVariant};
use crate::error::{Error, Result};
use crate::geometry::MatrixTuple;
use crate::oracles::{validate_stochastic, validate_weights, CocycleSpec, McConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GridConfig {
    pub m: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { m: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ContourConfig {
    /// Contour radius; defaults to the certified r*/2.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_order")]
    pub order: usize,
    /// Zero-sum direction; defaults to e₁ − e_N.
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
}

fn default_nodes() -> usize {
    64
}

fn default_order() -> usize {
    16
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self { radius: None, nodes: default_nodes(), order: default_order(), direction: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BoundaryConfig {
    #[serde(default)]
    pub index: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub c_tau: Option<f64>,
    #[serde(default)]
    pub gamma_tau: Option<f64>,
}

fn default_steps() -> usize {
    8
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self { index: 0, steps: default_steps(), c_tau: None, gamma_tau: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GrassmannConfig {
    #[serde(default)]
    pub k: Vec<usize>,
    /// Level → gap λ_k − λ_{k+1}; levels without an override use the Monte Carlo gap.
    #[serde(default)]
    pub gap_overrides: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Flags {
    #[serde(default)]
    pub rigorous_k: bool,
    #[serde(default)]
    pub radius_convention: RadiusConvention,
    #[serde(default = "default_chain_exponent")]
    pub chain_exponent: f64,
    #[serde(default)]
    pub tau_variant: TauVariant,
    /// Matrix-perturbation radius for the joint and chain radii.
    #[serde(default)]
    pub rho_a: f64,
}

fn default_chain_exponent() -> f64 {
    1.0
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            rigorous_k: false,
            radius_convention: RadiusConvention::default(),
            chain_exponent: default_chain_exponent(),
            tau_variant: TauVariant::default(),
            rho_a: 0.0,
        }
    }
}

fn default_theta() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    /// Row-major entries, one array of d² numbers per matrix.
    pub matrices: Vec<Vec<f64>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub transition: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub gap_override: Option<f64>,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub contour: ContourConfig,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub grassmann: GrassmannConfig,
    #[serde(default)]
    pub flags: Flags,
    /// Complex weight vectors for `extend`, each entry a [re, im] pair.
    #[serde(default)]
    pub extend_points: Vec<Vec<[f64; 2]>>,
}

fn at(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Validation(format!("{path}: {msg}"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            at(if path.is_empty() { "." } else { &path }, e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| at(&path.display().to_string(), e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dimension;
        if d < 2 {
            return Err(at("dimension", "must be >= 2"));
        }
        if self.matrices.is_empty() {
            return Err(at("matrices", "at least one matrix required"));
        }
        for (i, m) in self.matrices.iter().enumerate() {
            if m.len() != d * d {
                return Err(at(&format!("matrices[{i}]"), format!("expected {} entries, got {}", d * d, m.len())));
            }
        }
        self.tuple().map_err(|e| at("matrices", e))?;
        let n = self.matrices.len();
        match (&self.weights, &self.transition) {
            (Some(_), Some(_)) => return Err(at("weights", "give exactly one of weights and transition")),
            (None, None) => return Err(at("weights", "one of weights and transition is required")),
            (Some(w), None) => validate_weights(w, n).map_err(|e| at("weights", e))?,
            (None, Some(p)) => {
                if p.len() != n || p.iter().any(|r| r.len() != n) {
                    return Err(at("transition", format!("must be {n}x{n}")));
                }
                validate_stochastic(&self.transition_matrix().expect("present")).map_err(|e| at("transition", e))?;
            }
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(at("theta", "must lie in (0, 1]"));
        }
        if let Some(g) = self.gap_override {
            if !(g > 0.0 && g.is_finite()) {
                return Err(at("gapOverride", "must be > 0"));
            }
        }
        if self.mc.steps == 0 || self.mc.trials == 0 || self.mc.renorm_interval == 0 {
            return Err(at("mc", "steps, trials and renormInterval must be >= 1"));
        }
        if self.grid.m < 8 {
            return Err(at("grid.m", "must be >= 8"));
        }
        if let Some(r) = self.contour.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(at("contour.radius", "must be > 0"));
            }
        }
        if self.contour.nodes < 4 * self.contour.order.max(1) {
            return Err(at("contour.nodes", "must be >= 4 * order"));
        }
        if let Some(u) = &self.contour.direction {
            if u.len() != n {
                return Err(at("contour.direction", format!("expected {n} entries")));
            }
        }
        if self.boundary.index >= n {
            return Err(at("boundary.index", format!("must be < {n}")));
        }
        if self.boundary.steps < 2 {
            return Err(at("boundary.steps", "must be >= 2"));
        }
        if let Some(c) = self.boundary.c_tau {
            if !(c > 0.0) {
                return Err(at("boundary.cTau", "must be > 0"));
            }
        }
        if let Some(g) = self.boundary.gamma_tau {
            if !(g >= 1.0) {
                return Err(at("boundary.gammaTau", "must be >= 1"));
            }
        }
        for (i, k) in self.grassmann.k.iter().enumerate() {
            if *k == 0 || *k >= d {
                return Err(at(&format!("grassmann.k[{i}]"), format!("must lie in 1..={}", d - 1)));
            }
        }
        if !(self.flags.chain_exponent > 0.0 && self.flags.chain_exponent <= 1.0) {
            return Err(at("flags.chainExponent", "must lie in (0, 1]"));
        }
        if !(self.flags.rho_a >= 0.0) {
            return Err(at("flags.rhoA", "must be >= 0"));
        }
        for (i, z) in self.extend_points.iter().enumerate() {
            if z.len() != n {
                return Err(at(&format!("extendPoints[{i}]"), format!("expected {n} entries")));
            }
        }
        Ok(())
    }

    pub fn tuple(&self) -> Result<MatrixTuple> {
        MatrixTuple::from_row_major(self.dimension, &self.matrices)
    }

    pub fn transition_matrix(&self) -> Option<DMatrix<f64>> {
        self.transition.as_ref().map(|p| {
            let n = p.len();
            DMatrix::from_fn(n, n, |i, j| p[i][j])
        })
    }

    pub fn spec(&self) -> Result<CocycleSpec> {
        let t = self.tuple()?;
        match (&self.weights, self.transition_matrix()) {
            (Some(w), _) => CocycleSpec::iid(t, w.clone()),
            (None, Some(p)) => CocycleSpec::markov(t, p),
            (None, None) => Err(at("weights", "one of weights and transition is required")),
        }
    }

    /// The two-matrix example with contour radius 0.2 and the published gap as override.
    pub fn worked_example() -> Self {
        let t = crate::example::worked_example();
        Self {
            dimension: 2,
            matrices: t.to_row_major(),
            weights: Some(crate::example::WORKED_P0.to_vec()),
            transition: None,
            theta: crate::example::WORKED_THETA,
            gap_override: Some(crate::example::WORKED_GAP),
            mc: McConfig::new(100_000, 16, 2024),
            grid: GridConfig::default(),
            contour: ContourConfig { radius: Some(0.2), ..ContourConfig::default() },
            boundary: BoundaryConfig::default(),
            grassmann: GrassmannConfig::default(),
            flags: Flags::default(),
            extend_points: vec![],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::from_str(&RunConfig::worked_example().to_json()).unwrap()
    }

    fn err(v: serde_json::Value) -> String {
        RunConfig::from_json(&v.to_string()).unwrap_err().to_string()
    }

    #[test]
    fn worked_example_round_trips() {
        let c = RunConfig::worked_example();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn unknown_key_names_its_path() {
        let mut v = base();
        v["mc"]["stepz"] = 5.into();
        let e = err(v);
        assert!(e.contains("mc") && e.contains("stepz"), "{e}");
    }

    #[test]
    fn type_error_names_its_path() {
        let mut v = base();
        v["grid"]["m"] = "many".into();
        assert!(err(v).contains("grid.m"));
    }

    #[test]
    fn semantic_errors() {
        let mut v = base();
        v["matrices"][1] = serde_json::json!([1.0, 2.0, 3.0]);
        assert!(err(v).contains("matrices[1]"));
        let mut v = base();
        v["transition"] = serde_json::json!([[0.5, 0.5], [0.5, 0.5]]);
        assert!(err(v).contains("exactly one"));
        let mut v = base();
        v["weights"] = serde_json::json!([0.7, 0.7]);
        assert!(err(v).contains("weights"));
        let mut v = base();
        v["theta"] = 1.5.into();
        assert!(err(v).contains("theta"));
        let mut v = base();
        v["matrices"][0] = serde_json::json!([1.0, 2.0, 2.0, 4.0]);
        assert!(err(v).contains("matrices"));
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::from_json(r#"{"dimension": 2, "matrices": [[2,0,0,0.5]], "weights": [1]}"#).unwrap();
        assert_eq!(c.theta, 0.5);
        assert_eq!(c.grid.m, 2000);
        assert_eq!(c.flags.chain_exponent, 1.0);
        assert_eq!(c.contour.nodes, 64);
    }

    #[test]
    fn transition_config() {
        let c = RunConfig::from_json(
            r#"{"dimension": 2, "matrices": [[2,0,0,0.5],[1,1,0,1]], "transition": [[0.9,0.1],[0.2,0.8]]}"#,
        )
        .unwrap();
        assert!(c.spec().unwrap().is_markov());
    }
}
