//! Numerical check of the L¹-maximal-regularity constant of `Γ₂Δ²` on a
//! single plane wave.

use crate::math;
use crate::quad;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxRegCheck {
    /// `(∫₀^T (|ξ|⁴ e^{−Γ₂t|ξ|⁴})^p dt)^{1/p}` by adaptive quadrature.
    pub numeric: f64,
    /// `|ξ|^{4−4/p} / (Γ₂p)^{1/p}`.
    pub bound: f64,
}

impl MaxRegCheck {
    pub fn holds(&self) -> bool {
        self.numeric <= self.bound * (1.0 + 1e-10)
    }

    pub fn rel_gap(&self) -> f64 {
        (self.bound - self.numeric) / self.bound
    }
}

/// `t_end = None` integrates over `[0, ∞)`.
pub fn maxreg_constant_check(gamma2: f64, k: f64, p: f64, t_end: Option<f64>) -> Result<MaxRegCheck> {
    if !(gamma2 > 0.0 && k > 0.0 && p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParams("maxreg check needs Γ₂ > 0, |ξ| > 0, p ∈ [1, ∞)"));
    }
    let k4 = k * k * k * k;
    let integrand = |t: f64| math::pow(k4 * math::exp(-gamma2 * t * k4), p);
    let integral = match t_end {
        None => quad::integrate_half_line(integrand, 1e-13)?,
        Some(t) if t > 0.0 => quad::integrate(integrand, 0.0, t, 1e-13)?,
        Some(_) => return Err(Error::InvalidParams("T must be positive")),
    };
    let numeric = math::pow(integral, 1.0 / p);
    let bound = math::pow(k, 4.0 - 4.0 / p) / math::pow(gamma2 * p, 1.0 / p);
    Ok(MaxRegCheck { numeric, bound })
}
