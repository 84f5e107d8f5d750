//! TOML run configuration. Every section has defaults, and the resolved
//! (fully materialized) config is what the run manifest hashes.

use std::path::Path;

use fmflow_core::dynamics::{Lattice, SampleGrid, SimConfig, Stepper, TruncationPolicy};
use fmflow_core::symbols::OriginPolicy;
use fmflow_core::{ModelParams, SteadyState, SteadyStateKind};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Model {
    pub lambda0: f64,
    pub lambda1: f64,
    pub gamma0: f64,
    pub gamma2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
}

impl Default for Model {
    fn default() -> Self {
        Model { lambda0: 1.0, lambda1: 0.0, gamma0: -1.0, gamma2: 1.0, alpha: 0.1875, beta: 1.0, n: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct State {
    /// "disordered" or "ordered".
    pub kind: String,
    pub p0: f64,
    #[serde(rename = "V_direction")]
    pub v_direction: Vec<f64>,
}

impl Default for State {
    fn default() -> Self {
        State { kind: "disordered".into(), p0: 0.0, v_direction: vec![1.0, 0.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sim {
    pub t_end: f64,
    pub dt: f64,
    pub stepper: String,
    /// 0 means the default rule `max(1e6·‖u₀‖, 1e6)`.
    pub blowup_threshold: f64,
    pub nonlinear: bool,
    pub diagnostics_stride: usize,
    pub snapshot_stride: usize,
    pub sample_points: usize,
}

impl Default for Sim {
    fn default() -> Self {
        Sim {
            t_end: 1.0,
            dt: 0.01,
            stepper: "etd2rk".into(),
            blowup_threshold: 0.0,
            nonlinear: true,
            diagnostics_stride: 10,
            snapshot_stride: 0,
            sample_points: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    /// Lattice generators, one row per axis. Empty means the square lattice
    /// with spacing 1/(2√2).
    pub basis: Vec<Vec<f64>>,
    pub k_max: f64,
    pub drop_tol: f64,
    pub atom_cap: usize,
    pub origin_policy: String,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { basis: Vec::new(), k_max: 2.0, drop_tol: 0.0, atom_cap: 200_000, origin_policy: "drop".into() }
    }
}

/// Random initial data: `modes` Hermitian pairs on lattice keys with
/// entries in `[−max_index, max_index]`, scaled to the given FM norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seed {
    pub value: u64,
    pub fm_norm: f64,
    pub modes: usize,
    pub max_index: i32,
}

impl Default for Seed {
    fn default() -> Self {
        Seed { value: 0, fm_norm: 1e-3, modes: 4, max_index: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Init {
    /// JSONL snapshot to start from instead of random data.
    pub file: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            c => (0..c).map(|i| self.min + (self.max - self.min) * i as f64 / (c - 1) as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Classify {
    pub gamma0: Range,
    pub alpha: Range,
    pub gamma2: Vec<f64>,
    pub beta: Vec<f64>,
    pub tie_tol: f64,
}

impl Default for Classify {
    fn default() -> Self {
        Classify {
            gamma0: Range { min: -2.0, max: 2.0, count: 101 },
            alpha: Range { min: -1.0, max: 2.0, count: 101 },
            gamma2: vec![1.0],
            beta: vec![1.0],
            tie_tol: fmflow_core::symbols::DEFAULT_TIE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dispersion {
    pub k: Range,
}

impl Default for Dispersion {
    fn default() -> Self {
        Dispersion { k: Range { min: 0.0, max: 2.0, count: 201 } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Growth {
    pub k_seed: Vec<f64>,
    pub amplitude: f64,
    pub direction: Option<Vec<f64>>,
    pub horizon: f64,
    pub dt: f64,
    pub nonlinear: bool,
    pub k_max_factor: f64,
}

impl Default for Growth {
    fn default() -> Self {
        Growth {
            k_seed: vec![std::f64::consts::FRAC_1_SQRT_2, 0.0],
            amplitude: 1e-6,
            direction: None,
            horizon: 30.0,
            dt: 0.01,
            nonlinear: true,
            k_max_factor: 3.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: Model,
    pub state: State,
    pub sim: Sim,
    pub truncation: Truncation,
    pub seed: Seed,
    pub init: Init,
    pub classify: Classify,
    pub dispersion: Dispersion,
    pub growth: Growth,
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fills data-dependent defaults (lattice basis, direction length).
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let n = self.model.n;
        if n != 2 && n != 3 {
            return Err(cfg_err("model.n must be 2 or 3"));
        }
        if self.truncation.basis.is_empty() {
            let s = 0.5 * std::f64::consts::FRAC_1_SQRT_2;
            self.truncation.basis = (0..n).map(|i| (0..n).map(|j| if i == j { s } else { 0.0 }).collect()).collect();
        }
        self.state.v_direction.resize(n, 0.0);
        self.growth.k_seed.resize(n, 0.0);
        if let Some(d) = self.growth.direction.as_mut() {
            d.resize(n, 0.0);
        }
        self.params()?;
        Ok(self)
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let m = &self.model;
        let mut p = ModelParams::new(m.gamma2, m.gamma0, m.alpha, m.beta, m.n).with_lambda0(m.lambda0);
        p.lambda1 = m.lambda1;
        p.validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(p)
    }

    pub fn state_kind(&self) -> Result<SteadyStateKind, CliError> {
        match self.state.kind.as_str() {
            "disordered" => Ok(SteadyStateKind::Disordered),
            "ordered" => Ok(SteadyStateKind::Ordered),
            k => Err(cfg_err(format!("state.kind must be disordered or ordered, got {k:?}"))),
        }
    }

    pub fn steady_state(&self) -> Result<SteadyState, CliError> {
        let p = self.params()?;
        let mut s =
            fmflow_core::dynamics::steady_state_transform(self.state_kind()?, &p, Some(&self.state.v_direction[..p.n]))
                .map_err(|e| cfg_err(e.to_string()))?;
        s.p0 = self.state.p0;
        Ok(s)
    }

    pub fn lattice(&self) -> Result<Lattice, CliError> {
        let n = self.model.n;
        let b = &self.truncation.basis;
        if b.len() != n || b.iter().any(|r| r.len() != n) {
            return Err(cfg_err("truncation.basis must be n vectors of length n"));
        }
        let rows: Vec<[f64; 3]> = b.iter().map(|r| fmflow_core::math::rvec(r)).collect();
        Lattice::new(&rows, n).map_err(|e| cfg_err(e.to_string()))
    }

    pub fn truncation_policy(&self) -> Result<TruncationPolicy, CliError> {
        let t = &self.truncation;
        let origin_policy = match t.origin_policy.as_str() {
            "drop" => OriginPolicy::Drop,
            "keep" => OriginPolicy::Keep,
            o => return Err(cfg_err(format!("truncation.origin_policy must be drop or keep, got {o:?}"))),
        };
        let p = TruncationPolicy {
            lattice: self.lattice()?,
            k_max: t.k_max,
            drop_tol: t.drop_tol,
            atom_cap: t.atom_cap,
            origin_policy,
        };
        p.validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(p)
    }

    pub fn stepper(&self) -> Result<Stepper, CliError> {
        Stepper::parse(&self.sim.stepper).ok_or_else(|| cfg_err("sim.stepper must be exp_euler or etd2rk"))
    }

    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let s = &self.sim;
        let mut c = SimConfig::new(self.params()?, self.steady_state()?, self.truncation_policy()?, s.dt, s.t_end);
        c.stepper = self.stepper()?;
        c.nonlinear = s.nonlinear;
        c.diagnostics_stride = s.diagnostics_stride;
        c.snapshot_stride = s.snapshot_stride;
        c.blowup_threshold = (s.blowup_threshold > 0.0).then_some(s.blowup_threshold);
        c.sample = SampleGrid { per_axis: s.sample_points, ..SampleGrid::default() };
        c.validate().map_err(|e| cfg_err(e.to_string()))?;
        Ok(c)
    }
}
