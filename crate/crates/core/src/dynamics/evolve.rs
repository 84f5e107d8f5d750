//! Exponential time stepping of `u_t = −A_LF u − H(u) + f` and the evolution
//! driver with diagnostics and blow-up detection.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::etd::{StepFn, StructuredFn};
use crate::math::{self, CVec, RMat, C64};
use crate::measure::SpectralMeasure;
use crate::symbols::{LinearPart, ModelParams, OriginPolicy, SteadyState};
use crate::{Error, Result};

use super::lattice::{Key, Lattice, LatticeField, TruncationPolicy};
use super::nonlinear::nonlinearity_lattice;

/// Time-dependent forcing `f(t)`, already divergence-free.
pub trait Forcing {
    fn at(&self, t: f64) -> Result<SpectralMeasure>;
}

/// Time-independent forcing.
#[derive(Debug, Clone)]
pub struct SteadyForcing(pub SpectralMeasure);

impl Forcing for SteadyForcing {
    fn at(&self, _t: f64) -> Result<SpectralMeasure> {
        Ok(self.0.clone())
    }
}

/// Time-tagged forcing samples, linearly interpolated and held constant
/// outside the tabulated range.
#[derive(Debug, Clone)]
pub struct TabulatedForcing {
    samples: Vec<(f64, SpectralMeasure)>,
}

impl TabulatedForcing {
    pub fn new(mut samples: Vec<(f64, SpectralMeasure)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParams("forcing table is empty"));
        }
        if samples.iter().any(|(t, _)| !t.is_finite()) {
            return Err(Error::NonFinite);
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(TabulatedForcing { samples })
    }
}

impl Forcing for TabulatedForcing {
    fn at(&self, t: f64) -> Result<SpectralMeasure> {
        let s = &self.samples;
        if t <= s[0].0 {
            return Ok(s[0].1.clone());
        }
        if t >= s[s.len() - 1].0 {
            return Ok(s[s.len() - 1].1.clone());
        }
        let i = s.partition_point(|(ti, _)| *ti <= t);
        let (t0, f0) = &s[i - 1];
        let (t1, f1) = &s[i];
        let w = (t - t0) / (t1 - t0);
        let d = f1.axpy(C64::new(-1.0, 0.0), f0)?;
        f0.axpy(C64::new(w, 0.0), &d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stepper {
    /// First-order exponential Euler.
    ExpEuler,
    /// Second-order Cox–Matthews exponential Runge–Kutta.
    #[default]
    Etd2Rk,
}

impl Stepper {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stepper::ExpEuler => "exp_euler",
            Stepper::Etd2Rk => "etd2rk",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exp_euler" => Some(Stepper::ExpEuler),
            "etd2rk" => Some(Stepper::Etd2Rk),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct KeyCoeffs {
    r: RMat,
    e: StructuredFn,
    p1: StructuredFn,
    p2: StructuredFn,
}

fn apply(f: &StructuredFn, r: &RMat, c: &CVec) -> CVec {
    let rc = math::rmat_apply(r, c);
    let mut out = math::cscale(c, f.diag);
    math::axpy(&mut out, f.coupling, &rc);
    out
}

/// Single-step integrator with per-key cached propagator coefficients.
pub struct Integrator {
    params: ModelParams,
    state: SteadyState,
    policy: TruncationPolicy,
    stepper: Stepper,
    nonlinear: bool,
    cache: BTreeMap<(Key, u64), KeyCoeffs>,
}

impl Integrator {
    pub fn new(
        params: ModelParams,
        state: SteadyState,
        policy: TruncationPolicy,
        stepper: Stepper,
        nonlinear: bool,
    ) -> Result<Self> {
        params.validate()?;
        policy.validate()?;
        if policy.lattice.dim() != params.n || state.dim != params.n {
            return Err(Error::DimensionMismatch { expected: params.n, found: policy.lattice.dim() });
        }
        Ok(Integrator { params, state, policy, stepper, nonlinear, cache: BTreeMap::new() })
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    fn coeffs(&mut self, key: &Key, h: f64) -> KeyCoeffs {
        let (params, state, lattice) = (self.params, self.state, self.policy.lattice);
        *self.cache.entry((*key, h.to_bits())).or_insert_with(|| {
            let lp = LinearPart::at(&lattice.wavevector(key), &params, &state);
            KeyCoeffs {
                r: lp.r,
                e: lp.function(StepFn::Exp, h),
                p1: lp.function(StepFn::Phi1, h),
                p2: lp.function(StepFn::Phi2, h),
            }
        })
    }

    /// `f(t) − H(u)`, truncated.
    fn rhs(&self, u: &LatticeField, t: f64, forcing: Option<&dyn Forcing>) -> Result<LatticeField> {
        let lattice = self.policy.lattice;
        let mut out = if self.nonlinear {
            let h = nonlinearity_lattice(u, &self.params, &self.state, &self.policy)?;
            h.map(|_, c| math::cscale_re(c, -1.0))
        } else {
            LatticeField::zero(lattice, u.components())
        };
        if let Some(f) = forcing {
            let mut fl = LatticeField::from_measure(&f.at(t)?, lattice)?;
            fl.truncate(&self.policy)?;
            out = LatticeField::linear_combination(&[(math::ONE, &out), (math::ONE, &fl)]);
        }
        Ok(out)
    }

    /// `Σ_i g_i(σ) x_i` over fields sharing the lattice.
    fn combine(&mut self, h: f64, terms: &[(fn(&KeyCoeffs) -> &StructuredFn, &LatticeField)]) -> LatticeField {
        let lattice = self.policy.lattice;
        let mut pairs = Vec::new();
        for (pick, f) in terms {
            for (k, c) in f.iter() {
                let kc = self.coeffs(k, h);
                pairs.push((*k, apply(pick(&kc), &kc.r, c)));
            }
        }
        LatticeField::from_pairs(lattice, terms[0].1.components(), pairs)
    }

    /// One step of size `h` from time `t`.
    pub fn step(&mut self, u: &LatticeField, t: f64, h: f64, forcing: Option<&dyn Forcing>) -> Result<LatticeField> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParams("step must be positive"));
        }
        let n0 = self.rhs(u, t, forcing)?;
        let mut a = self.combine(h, &[(|k| &k.e, u), (|k| &k.p1, &n0)]);
        a.truncate(&self.policy)?;
        if self.stepper == Stepper::ExpEuler {
            return Ok(a);
        }
        let n1 = self.rhs(&a, t + h, forcing)?;
        let dn = LatticeField::linear_combination(&[(math::ONE, &n1), (C64::new(-1.0, 0.0), &n0)]);
        let corr = self.combine(h, &[(|k| &k.p2, &dn)]);
        let mut out = LatticeField::linear_combination(&[(math::ONE, &a), (math::ONE, &corr)]);
        out.truncate(&self.policy)?;
        Ok(out)
    }
}

/// Sampling grid for the sup-norm diagnostic: `per_axis` equispaced points
/// per axis over `[0, extent)ⁿ`. `per_axis = 0` disables sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub per_axis: usize,
    pub extent: f64,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid { per_axis: 8, extent: 2.0 * math::PI }
    }
}

impl SampleGrid {
    pub fn points(&self, n: usize) -> Vec<[f64; 3]> {
        let m = self.per_axis;
        let total = m.pow(n as u32);
        let mut pts = Vec::with_capacity(total);
        for idx in 0..total {
            let mut p = [0.0; 3];
            let mut r = idx;
            for x in p.iter_mut().take(n) {
                *x = self.extent * (r % m) as f64 / m as f64;
                r /= m;
            }
            pts.push(p);
        }
        pts
    }
}

/// One row of evolution diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagRecord {
    pub t: f64,
    pub fm_norm: f64,
    pub fm4_norm: f64,
    pub atom_count: usize,
    /// Max of `|u(x)|` over the sample grid (NaN when sampling is off).
    pub sup_sample: f64,
    pub max_mode: f64,
    /// FM norm of the deviation from the steady state, i.e. of `u` itself.
    pub perturbation_norm: f64,
    /// `sup_sample ≤ (2π)^{−n/2}‖u‖_{FM}` up to roundoff.
    pub embedding_ok: bool,
}

/// Diagnostics of a single field.
pub fn diagnostics(u: &SpectralMeasure, t: f64, grid: &SampleGrid) -> DiagRecord {
    let n = u.dim();
    let fm = u.fm_norm(0.0);
    let sup = if grid.per_axis == 0 {
        f64::NAN
    } else {
        let pts = grid.points(n);
        let refs: Vec<&[f64]> = pts.iter().map(|p| &p[..n]).collect();
        u.evaluate(&refs).map(|s| s.sup_norm()).unwrap_or(f64::NAN)
    };
    let bound = fm / math::two_pi_half_pow(n);
    DiagRecord {
        t,
        fm_norm: fm,
        fm4_norm: u.fm_norm(4.0),
        atom_count: u.len(),
        sup_sample: sup,
        max_mode: u.max_amplitude(),
        perturbation_norm: fm,
        embedding_ok: sup.is_nan() || sup <= bound * (1.0 + 1e-12) + 1e-300,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Completed,
    /// FM norm crossed the blow-up threshold (or became non-finite) at `t`.
    BlowUp(f64),
    AtomCapExceeded(f64),
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Completed => "completed",
            Outcome::BlowUp(_) => "blow_up",
            Outcome::AtomCapExceeded(_) => "atom_cap_exceeded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    pub state: SteadyState,
    pub truncation: TruncationPolicy,
    pub stepper: Stepper,
    pub dt: f64,
    pub t_end: f64,
    /// When false, `H` is switched off and the linearized flow is integrated.
    pub nonlinear: bool,
    pub diagnostics_stride: usize,
    /// Snapshot every this many steps; 0 keeps only the first and last.
    pub snapshot_stride: usize,
    /// Defaults to `max(1e6·‖u₀‖, 1e6)`.
    pub blowup_threshold: Option<f64>,
    pub sample: SampleGrid,
}

impl SimConfig {
    pub fn new(params: ModelParams, state: SteadyState, truncation: TruncationPolicy, dt: f64, t_end: f64) -> Self {
        SimConfig {
            params,
            state,
            truncation,
            stepper: Stepper::Etd2Rk,
            dt,
            t_end,
            nonlinear: true,
            diagnostics_stride: 1,
            snapshot_stride: 0,
            blowup_threshold: None,
            sample: SampleGrid::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.truncation.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams("dt must be positive"));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParams("t_end must be non-negative"));
        }
        if self.diagnostics_stride == 0 {
            return Err(Error::InvalidParams("diagnostics stride must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<(f64, SpectralMeasure)>,
    pub diagnostics: Vec<DiagRecord>,
    pub outcome: Outcome,
    pub origin_policy: OriginPolicy,
    pub steps: usize,
    pub final_state: SpectralMeasure,
    pub final_time: f64,
}

/// Integrates from `u0` to `t_end` with fixed `dt` (a final shorter step
/// lands exactly on `t_end`).
pub fn evolve(u0: &SpectralMeasure, cfg: &SimConfig, forcing: Option<&dyn Forcing>) -> Result<Trajectory> {
    cfg.validate()?;
    let n = cfg.params.n;
    if u0.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: u0.dim() });
    }
    if u0.components() != n {
        return Err(Error::ComponentMismatch { expected: n, found: u0.components() });
    }
    if u0.max_divergence_ratio() > 1e-10 {
        return Err(Error::InvalidParams("initial data must be divergence-free"));
    }
    let lattice: Lattice = cfg.truncation.lattice;
    let mut u = LatticeField::from_measure(u0, lattice)?;
    u.truncate(&cfg.truncation)?;
    let mut integ = Integrator::new(cfg.params, cfg.state, cfg.truncation, cfg.stepper, cfg.nonlinear)?;

    let first = u.to_measure();
    let fm0 = first.fm_norm(0.0);
    let threshold = cfg.blowup_threshold.unwrap_or((1e6 * fm0).max(1e6));
    let mut traj = Trajectory {
        snapshots: alloc::vec![(0.0, first.clone())],
        diagnostics: alloc::vec![diagnostics(&first, 0.0, &cfg.sample)],
        outcome: Outcome::Completed,
        origin_policy: cfg.truncation.origin_policy,
        steps: 0,
        final_state: first,
        final_time: 0.0,
    };

    let full = libm::floor(cfg.t_end / cfg.dt * (1.0 + 1e-12)) as usize;
    let rest = cfg.t_end - full as f64 * cfg.dt;
    let tail = rest > 1e-12 * cfg.dt;
    let total = full + tail as usize;
    let mut t = 0.0;
    let mut last_diag = 0;
    for step in 1..=total {
        let h = if step > full { rest } else { cfg.dt };
        match integ.step(&u, t, h, forcing) {
            Ok(next) => u = next,
            Err(Error::AtomCap { .. }) => {
                traj.outcome = Outcome::AtomCapExceeded(t + h);
                break;
            }
            Err(e) => return Err(e),
        }
        t = if step == total { cfg.t_end } else { step as f64 * cfg.dt };
        traj.steps = step;
        let norm = u.fm_norm(0.0);
        let blown = !norm.is_finite() || norm >= threshold;
        let diag = blown || step % cfg.diagnostics_stride == 0 || step == total;
        let snap = cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0;
        if diag || snap {
            let m = u.to_measure();
            if diag {
                traj.diagnostics.push(diagnostics(&m, t, &cfg.sample));
                last_diag = step;
            }
            if snap {
                traj.snapshots.push((t, m));
            }
        }
        if blown {
            traj.outcome = Outcome::BlowUp(t);
            break;
        }
    }
    let m = u.to_measure();
    if last_diag != traj.steps {
        traj.diagnostics.push(diagnostics(&m, t, &cfg.sample));
    }
    if traj.snapshots.last().map(|s| s.0) != Some(t) {
        traj.snapshots.push((t, m.clone()));
    }
    traj.final_state = m;
    traj.final_time = t;
    Ok(traj)
}

/// One step on a measure; a thin wrapper over [`Integrator::step`].
pub fn step(
    u: &SpectralMeasure,
    t: f64,
    h: f64,
    cfg: &SimConfig,
    forcing: Option<&dyn Forcing>,
) -> Result<SpectralMeasure> {
    let mut integ = Integrator::new(cfg.params, cfg.state, cfg.truncation, cfg.stepper, cfg.nonlinear)?;
    let mut ul = LatticeField::from_measure(u, cfg.truncation.lattice)?;
    ul.truncate(&cfg.truncation)?;
    Ok(integ.step(&ul, t, h, forcing)?.to_measure())
}

/// Boxed forcing helper for callers that assemble forcing at run time.
pub type DynForcing = Box<dyn Forcing + Send + Sync>;
