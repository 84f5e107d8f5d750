//! Seeded growth-rate experiments for the linear instability.

use alloc::vec::Vec;

use crate::math::{self, RVec, C64};
use crate::measure::{Atom, SpectralMeasure};
use crate::symbols::{ModelParams, SteadyState, SteadyStateKind};
use crate::{Error, Result};

use super::evolve::{evolve, Outcome, SampleGrid, SimConfig, Stepper};
use super::lattice::{Lattice, TruncationPolicy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthSpec {
    pub k_seed: RVec,
    /// Coefficient magnitude ε of each atom of the seed pair.
    pub amplitude: f64,
    /// Seed polarization; must be ⊥ `k_seed`. Chosen automatically if `None`.
    pub direction: Option<RVec>,
    pub horizon: f64,
    pub dt: f64,
    pub nonlinear: bool,
    pub stepper: Stepper,
    /// Galerkin radius as a multiple of `|k_seed|`.
    pub k_max_factor: f64,
}

impl GrowthSpec {
    pub fn new(k_seed: &[f64], amplitude: f64, horizon: f64, dt: f64) -> Self {
        GrowthSpec {
            k_seed: math::rvec(k_seed),
            amplitude,
            direction: None,
            horizon,
            dt,
            nonlinear: true,
            stepper: Stepper::Etd2Rk,
            k_max_factor: 3.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub measured: f64,
    pub predicted: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub series: Vec<(f64, f64)>,
    pub outcome: Outcome,
}

impl GrowthReport {
    pub fn rel_error(&self) -> f64 {
        (self.measured - self.predicted).abs() / self.predicted.abs().max(f64::MIN_POSITIVE)
    }
}

/// Growth rate predicted by the symbol along `k` for a seed polarized
/// orthogonally to `V`.
pub fn predicted_rate(k: f64, params: &ModelParams, state: &SteadyState) -> f64 {
    let k2 = k * k;
    let base = params.gamma2 * k2 * k2 + params.gamma0 * k2;
    match state.kind {
        SteadyStateKind::Disordered => -(base + params.alpha),
        SteadyStateKind::Ordered => -base,
    }
}

fn cross(a: &RVec, b: &RVec) -> RVec {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn default_direction(k: &RVec, state: &SteadyState, n: usize) -> RVec {
    if n == 3 && state.kind == SteadyStateKind::Ordered {
        let c = cross(k, &state.v);
        let cn = math::norm(&c);
        if cn > 1e-12 * math::norm(k) * state.speed() {
            return math::scale(&c, 1.0 / cn);
        }
    }
    math::orthonormal_complement(k, n).0[0]
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let tb = points.iter().map(|p| p.0).sum::<f64>() / m;
    let yb = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - tb) * (p.1 - yb)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - tb) * (p.0 - tb)).sum();
    sxy / sxx
}

/// Seeds the Hermitian pair `(±k, ε d)` and fits `log ‖u(t)‖` on
/// `[0.1·horizon, t₁)`, where `t₁` is the first time the norm exceeds ten
/// times its initial value.
pub fn growth_rate_experiment(params: &ModelParams, state: &SteadyState, spec: &GrowthSpec) -> Result<GrowthReport> {
    params.validate()?;
    let n = params.n;
    let k = spec.k_seed;
    let kn = math::norm(&k);
    if !(kn > 0.0 && kn.is_finite()) {
        return Err(Error::InvalidParams("seed wavevector must be nonzero"));
    }
    if !(spec.amplitude > 0.0 && spec.horizon > 0.0 && spec.dt > 0.0 && spec.k_max_factor >= 1.0) {
        return Err(Error::InvalidParams("amplitude, horizon, dt must be positive"));
    }
    let d = match spec.direction {
        Some(d) => {
            let dn = math::norm(&d);
            if dn == 0.0 || math::dot(&d, &k).abs() > 1e-12 * dn * kn {
                return Err(Error::InvalidParams("seed direction must be nonzero and orthogonal to k"));
            }
            math::scale(&d, 1.0 / dn)
        }
        None => default_direction(&k, state, n),
    };

    let (comp, _) = math::orthonormal_complement(&k, n);
    let mut basis = [k, [0.0; 3], [0.0; 3]];
    for i in 1..n {
        basis[i] = math::scale(&comp[i - 1], kn);
    }
    let lattice = Lattice::new(&basis[..n], n)?;
    let mut policy = TruncationPolicy::new(lattice, spec.k_max_factor * kn);
    policy.atom_cap = 1 << 16;

    let c: Vec<C64> = d[..n].iter().map(|x| C64::new(spec.amplitude * x, 0.0)).collect();
    let neg = math::scale(&k, -1.0);
    let u0 = SpectralMeasure::from_atoms(alloc::vec![Atom::new(&k[..n], &c)?, Atom::new(&neg[..n], &c)?])?;

    let mut cfg = SimConfig::new(*params, *state, policy, spec.dt, spec.horizon);
    cfg.stepper = spec.stepper;
    cfg.nonlinear = spec.nonlinear;
    cfg.sample = SampleGrid { per_axis: 0, extent: 0.0 };
    let traj = evolve(&u0, &cfg, None)?;

    let series: Vec<(f64, f64)> = traj.diagnostics.iter().map(|r| (r.t, r.fm_norm)).collect();
    let norm0 = series[0].1;
    let t_exceed = series.iter().find(|p| p.1 > 10.0 * norm0).map(|p| p.0).unwrap_or(f64::INFINITY);
    let t_start = 0.1 * spec.horizon;
    let fit: Vec<(f64, f64)> =
        series.iter().filter(|p| p.0 >= t_start && p.0 < t_exceed && p.1 > 0.0).map(|p| (p.0, math::ln(p.1))).collect();
    if fit.len() < 2 {
        return Err(Error::ExperimentFailure("fit window is empty; reduce the seed amplitude"));
    }
    let window = (fit[0].0, fit[fit.len() - 1].0);
    Ok(GrowthReport {
        measured: slope(&fit),
        predicted: predicted_rate(kn, params, state),
        window,
        points: fit.len(),
        series,
        outcome: traj.outcome,
    })
}
