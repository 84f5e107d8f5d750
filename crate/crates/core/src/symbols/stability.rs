//! Dispersion relation, critical band and the stability trichotomy for the
//! disordered and ordered steady states.

use crate::math::{self, RVec};
use crate::{Error, Result};

use super::{ModelParams, SteadyState};

/// Relative tolerance used to decide regime boundaries such as `4α = Γ₀²/Γ₂`.
pub const DEFAULT_TIE_TOL: f64 = 1e-12;

/// Growth rate `σ(k) = −(α + Γ₀k² + Γ₂k⁴)` of a plane-wave perturbation of
/// the disordered state.
pub fn dispersion_disordered(k: f64, params: &ModelParams) -> f64 {
    -super::disordered_symbol(k, params)
}

/// Roots of `Γ₂s² + Γ₀s + α = 0` in `s = |ξ|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalBand {
    /// `Γ₀² − 4αΓ₂`.
    pub discriminant: f64,
    /// `(s₋², s₊²)` when the unstable band is nonempty or degenerate: both
    /// roots real and the larger one positive. A negative lower root is
    /// clipped to 0 (the band then reaches down to the long-wave limit).
    pub band: Option<(f64, f64)>,
}

pub fn critical_wavenumbers(params: &ModelParams) -> CriticalBand {
    let (g2, g0, a) = (params.gamma2, params.gamma0, params.alpha);
    let disc = g0 * g0 - 4.0 * a * g2;
    if disc < 0.0 {
        return CriticalBand { discriminant: disc, band: None };
    }
    let sq = math::sqrt(disc);
    // Cancellation-free pair of roots.
    let q = -0.5 * (g0 + if g0 >= 0.0 { sq } else { -sq });
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / g2, a / q) };
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    if hi <= 0.0 {
        return CriticalBand { discriminant: disc, band: None };
    }
    CriticalBand { discriminant: disc, band: Some((lo.max(0.0), hi)) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    ExponentiallyStable,
    AsymptoticallyStable,
    ExponentiallyUnstable,
}

impl StabilityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::ExponentiallyStable => "exp_stable",
            StabilityClass::AsymptoticallyStable => "asym_stable",
            StabilityClass::ExponentiallyUnstable => "exp_unstable",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exp_stable" => Some(StabilityClass::ExponentiallyStable),
            "asym_stable" => Some(StabilityClass::AsymptoticallyStable),
            "exp_unstable" => Some(StabilityClass::ExponentiallyUnstable),
            _ => None,
        }
    }
}

/// An explicit unstable mode: wavevector ξ*, divergence-free direction x
/// (unit, `x ⊥ ξ*`), the real part of `xᵀσ(ξ*)x` and the predicted growth
/// rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub xi: RVec,
    pub direction: RVec,
    pub quadratic_form: f64,
    pub rate: f64,
}

impl Witness {
    pub fn k(&self) -> f64 {
        math::norm(&self.xi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    pub class: StabilityClass,
    /// `sup Re σ(−A)` over ξ ≠ 0 (possibly not attained).
    pub spectral_bound: f64,
    pub witness: Option<Witness>,
    /// Squared-wavenumber band of growing modes.
    pub critical_band: Option<(f64, f64)>,
}

fn tie(a: f64, b: f64, tol: f64) -> core::cmp::Ordering {
    use core::cmp::Ordering;
    let scale = a.abs().max(b.abs());
    if (a - b).abs() <= tol * scale {
        Ordering::Equal
    } else if a < b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

pub fn classify_disordered(params: &ModelParams) -> StabilityVerdict {
    classify_disordered_with_tol(params, DEFAULT_TIE_TOL)
}

/// Stability of the disordered state:
///
/// 1. exponentially stable if Γ₀ < 0 and 4α > Γ₀²/Γ₂, or Γ₀ ≥ 0 and α > 0;
/// 2. asymptotically stable if Γ₀ < 0 and 4α = Γ₀²/Γ₂, or Γ₀ ≥ 0 and α = 0;
/// 3. exponentially unstable if Γ₀ < 0 and 4α < Γ₀²/Γ₂, or Γ₀ ≥ 0 and α < 0.
pub fn classify_disordered_with_tol(params: &ModelParams, tol: f64) -> StabilityVerdict {
    use core::cmp::Ordering::*;
    let (g2, g0, a) = (params.gamma2, params.gamma0, params.alpha);
    let class = if g0 < 0.0 {
        match tie(4.0 * a, g0 * g0 / g2, tol) {
            Greater => StabilityClass::ExponentiallyStable,
            Equal => StabilityClass::AsymptoticallyStable,
            Less => StabilityClass::ExponentiallyUnstable,
        }
    } else {
        // α compared against zero relative to the other terms of the quadratic.
        let scale = g0.abs().max(g0 * g0 / g2);
        if a.abs() <= tol * scale || a == 0.0 {
            StabilityClass::AsymptoticallyStable
        } else if a > 0.0 {
            StabilityClass::ExponentiallyStable
        } else {
            StabilityClass::ExponentiallyUnstable
        }
    };

    let band = critical_wavenumbers(params).band;
    let (k_star, peak) = if g0 < 0.0 {
        let k = math::sqrt(-g0 / (2.0 * g2));
        (Some(k), dispersion_disordered(k, params))
    } else {
        (None, -a)
    };
    let spectral_bound = peak.max(-a);

    let witness = if class == StabilityClass::ExponentiallyUnstable {
        // Γ₀ ≥ 0, α < 0: the supremum −α sits at k → 0; use the midpoint
        // of the band (0, s₊²) as a concrete mode in FM₀.
        let k = k_star.unwrap_or_else(|| math::sqrt(band.map(|b| 0.5 * b.1).unwrap_or(0.0)));
        let mut xi = [0.0; 3];
        xi[0] = k;
        let mut x = [0.0; 3];
        x[1] = 1.0;
        let rate = dispersion_disordered(k, params);
        Some(Witness { xi, direction: x, quadratic_form: -rate, rate })
    } else {
        None
    };
    StabilityVerdict { class, spectral_bound, witness, critical_band: band }
}

pub fn classify_ordered(params: &ModelParams, v: &[f64]) -> Result<StabilityVerdict> {
    classify_ordered_with_tol(params, v, DEFAULT_TIE_TOL)
}

/// Stability of the ordered polar state with velocity `V`: exponentially
/// unstable if Γ₀ < 0, asymptotically stable if Γ₀ ≥ 0.
///
/// The witness has `|ξ*|² = −Γ₀/(2Γ₂)` and a unit direction `x ⊥ V`,
/// `x ⊥ ξ*`, so that `xᵀσ(ξ*)x = Γ₂|ξ*|⁴ + Γ₀|ξ*|²`. In n = 3, `ξ* ⊥ V`.
/// In n = 2 the only divergence-free direction orthogonal to V is reached
/// with `ξ* ∥ V`.
pub fn classify_ordered_with_tol(params: &ModelParams, v: &[f64], tol: f64) -> Result<StabilityVerdict> {
    let state = SteadyState::ordered_with_velocity(params, v)?;
    let (g2, g0) = (params.gamma2, params.gamma0);
    if !(g0 < 0.0) || g0.abs() <= tol * g2 {
        return Ok(StabilityVerdict {
            class: StabilityClass::AsymptoticallyStable,
            spectral_bound: 0.0,
            witness: None,
            critical_band: None,
        });
    }
    let n = params.n;
    let s_star = -g0 / (2.0 * g2);
    let k = math::sqrt(s_star);
    let vhat = math::scale(&state.v, 1.0 / state.speed());
    let (comp, _) = math::orthonormal_complement(&state.v, n);
    let (xi, x) = if n == 3 { (math::scale(&comp[0], k), comp[1]) } else { (math::scale(&vhat, k), comp[0]) };
    let form = g2 * s_star * s_star + g0 * s_star;
    if !(form < 0.0) {
        return Err(Error::NumericFailure("ordered witness has non-negative form"));
    }
    Ok(StabilityVerdict {
        class: StabilityClass::ExponentiallyUnstable,
        spectral_bound: -form,
        witness: Some(Witness { xi, direction: x, quadratic_form: form, rate: -form }),
        critical_band: Some((0.0, -g0 / g2)),
    })
}
