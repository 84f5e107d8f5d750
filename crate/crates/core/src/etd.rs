//! φ-functions of exponential integrators and their application to the
//! structured symbols of the linearized operator.
//!
//! All linear symbols used here have the form `σ = a·I + γ·R` with
//! `R² = τR` (see [`crate::symbols::LinearPart`]). For any entire `g`,
//!
//! ```text
//! g(σ) = g(a)·I + γ·g[a, a + γτ]·R
//! ```
//!
//! where `g[x, y]` is the first divided difference. The divided difference is
//! evaluated directly when the nodes are well separated and by Gauss–Legendre
//! quadrature of `g'` otherwise, so no branch loses precision.

use crate::math::{self, C64, ONE, ZERO};

/// φ_k(w) = Σ_{j≥0} w^j / (j+k)!, for k = 0..=3.
pub fn phi(k: usize, w: C64) -> C64 {
    debug_assert!(k <= 3);
    if math::cabs(w) < 1.0 {
        // 20 terms: truncation error below 1/(20+k)! < 1e-18.
        let mut fact = 1.0;
        for j in 1..=k {
            fact *= j as f64;
        }
        let mut term = C64::new(1.0 / fact, 0.0);
        let mut sum = term;
        for j in 1..20 {
            term = term * w / ((j + k) as f64);
            sum += term;
        }
        return sum;
    }
    let mut p = math::cexp(w);
    let mut fact = 1.0;
    for j in 1..=k {
        // φ_j = (φ_{j-1} − 1/(j−1)!) / w
        p = (p - C64::new(1.0 / fact, 0.0)) / w;
        fact *= j as f64;
    }
    p
}

/// The three propagator functions of a step of size `h`, as functions of a
/// symbol eigenvalue `z`:
///
/// * `Exp`:  `e^{−hz}`
/// * `Phi1`: `(1 − e^{−hz}) / z`         ( = h φ₁(−hz) )
/// * `Phi2`: `(e^{−hz} − 1 + hz) / (h z²)` ( = h φ₂(−hz) )
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepFn {
    Exp,
    Phi1,
    Phi2,
}

impl StepFn {
    fn order(self) -> usize {
        match self {
            StepFn::Exp => 0,
            StepFn::Phi1 => 1,
            StepFn::Phi2 => 2,
        }
    }

    fn prefactor(self, h: f64) -> f64 {
        match self {
            StepFn::Exp => 1.0,
            _ => h,
        }
    }

    pub fn eval(self, h: f64, z: C64) -> C64 {
        phi(self.order(), -z * h) * self.prefactor(h)
    }

    /// d/dz of [`eval`](Self::eval), using φ_k' = φ_k − k φ_{k+1}.
    pub fn derivative(self, h: f64, z: C64) -> C64 {
        let k = self.order();
        let w = -z * h;
        let dphi = phi(k, w) - phi(k + 1, w) * (k as f64);
        -dphi * (h * self.prefactor(h))
    }

    /// First divided difference `(g(a + d) − g(a)) / d`, with the limit
    /// `g'(a)` at `d = 0`.
    pub fn divided_difference(self, h: f64, a: C64, d: C64) -> C64 {
        if math::cabs(d) * h >= 0.1 {
            return (self.eval(h, a + d) - self.eval(h, a)) / d;
        }
        // ∫₀¹ g'(a + s d) ds, 8-point Gauss–Legendre on [0, 1].
        let mut acc = ZERO;
        for (x, w) in GL8 {
            let s = 0.5 * (1.0 + x);
            acc += self.derivative(h, a + d * s) * (0.5 * w);
        }
        acc
    }
}

const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// `g(σ)` for `σ = aI + γR`, `R² = τR`, stored as the pair
/// `(g(a), γ·g[a, a+γτ])` so that `g(σ)c = g(a)c + coupling·(Rc)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuredFn {
    pub diag: C64,
    pub coupling: C64,
}

impl StructuredFn {
    pub fn new(g: StepFn, h: f64, a: C64, gamma: f64, tau: f64) -> Self {
        let diag = g.eval(h, a);
        let coupling = if gamma == 0.0 { ZERO } else { g.divided_difference(h, a, C64::new(gamma * tau, 0.0)) * gamma };
        StructuredFn { diag, coupling }
    }

    pub fn identity() -> Self {
        StructuredFn { diag: ONE, coupling: ZERO }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn phi_matches_closed_forms_away_from_zero() {
        for &w in &[C64::new(2.0, 0.5), C64::new(-30.0, 1.0), C64::new(-1.5, -4.0)] {
            let e = math::cexp(w);
            assert!(close(phi(0, w), e, 1e-14));
            assert!(close(phi(1, w), (e - 1.0) / w, 1e-14));
            assert!(close(phi(2, w), (e - 1.0 - w) / (w * w), 1e-13));
            assert!(close(phi(3, w), (e - 1.0 - w - w * w * 0.5) / (w * w * w), 1e-12));
        }
    }

    #[test]
    fn phi_is_continuous_across_series_switch() {
        for k in 0..=3 {
            let lo = phi(k, C64::new(0.999_999_9, 0.0));
            let hi = phi(k, C64::new(1.000_000_1, 0.0));
            assert!((lo - hi).norm() < 1e-6);
        }
        assert_eq!(phi(1, ZERO), ONE);
        assert_eq!(phi(2, ZERO), C64::new(0.5, 0.0));
    }

    #[test]
    fn step_functions_small_argument() {
        let h = 0.01;
        let z = C64::new(1e-7, 0.0);
        // (1 − e^{−hz})/z ≈ h(1 − hz/2)
        assert!(close(StepFn::Phi1.eval(h, z), C64::new(h * (1.0 - h * 1e-7 / 2.0), 0.0), 1e-15));
        assert!(close(StepFn::Phi2.eval(h, z), C64::new(h * 0.5, 0.0), 1e-8));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 0.3;
        let a = C64::new(0.7, 0.4);
        let e = 1e-6;
        for g in [StepFn::Exp, StepFn::Phi1, StepFn::Phi2] {
            let fd = (g.eval(h, a + e) - g.eval(h, a - e)) / (2.0 * e);
            assert!(close(g.derivative(h, a), fd, 1e-8));
        }
    }

    #[test]
    fn divided_difference_branches_agree() {
        let h = 1.0;
        let a = C64::new(0.3, 0.2);
        for g in [StepFn::Exp, StepFn::Phi1, StepFn::Phi2] {
            let d = C64::new(0.0999, 0.0);
            let quad = g.divided_difference(h, a, d);
            let direct = (g.eval(h, a + d) - g.eval(h, a)) / d;
            assert!(close(quad, direct, 1e-13));
            assert!(close(g.divided_difference(h, a, ZERO), g.derivative(h, a), 1e-14));
        }
    }
}
