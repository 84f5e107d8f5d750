//! Sampled sectoriality certificate for the shifted linearized symbol.

use alloc::vec::Vec;

use crate::math::{self, RVec, C64};

use super::{LinearPart, ModelParams, SteadyState, SteadyStateKind};

/// Sample set and search range for [`sectoriality_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec {
    pub k_min: f64,
    pub k_max: f64,
    /// Log-spaced moduli between `k_min` and `k_max`.
    pub moduli: usize,
    /// Directions per modulus (plus the V-aligned/orthogonal axes for ordered states).
    pub directions: usize,
    pub omega_step: f64,
    pub omega_max: f64,
    /// Required lower bound on `|ω + z|`.
    pub delta: f64,
    /// Accepted sector half-angle; must be below π/2.
    pub max_angle: f64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec {
            k_min: 1e-3,
            k_max: 1e2,
            moduli: 512,
            directions: 32,
            omega_step: 1e-3,
            omega_max: 1e3,
            delta: 1e-3,
            max_angle: core::f64::consts::FRAC_PI_2 - 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorialityReport {
    /// Smallest scanned shift that works, or `None` if none in range does.
    pub omega: Option<f64>,
    /// Largest `|arg(ω + z)|` over the sampled eigenvalues at that shift.
    pub phi0: f64,
    /// Smallest `|ω + z|` at that shift.
    pub margin: f64,
    pub samples: usize,
    /// Most negative sampled real part.
    pub min_real: f64,
}

fn directions(n: usize, count: usize, state: &SteadyState) -> Vec<RVec> {
    let mut dirs = Vec::new();
    if n == 2 {
        for j in 0..count {
            let t = 2.0 * math::PI * j as f64 / count as f64;
            dirs.push([math::cos(t), math::sin(t), 0.0]);
        }
    } else {
        // Fibonacci sphere.
        let golden = math::PI * (3.0 - math::sqrt(5.0));
        for j in 0..count {
            let z = 1.0 - 2.0 * (j as f64 + 0.5) / count as f64;
            let r = math::sqrt(1.0 - z * z);
            let t = golden * j as f64;
            dirs.push([r * math::cos(t), r * math::sin(t), z]);
        }
    }
    if state.kind == SteadyStateKind::Ordered {
        let s = state.speed();
        dirs.push(math::scale(&state.v, 1.0 / s));
        let (c, m) = math::orthonormal_complement(&state.v, n);
        dirs.extend_from_slice(&c[..m]);
    }
    dirs
}

/// Eigenvalues of the symbol restricted to the divergence-free subspace `{ξ}^⊥`.
fn solenoidal_eigenvalues(xi: &RVec, params: &ModelParams, state: &SteadyState, out: &mut Vec<C64>) {
    let n = params.n;
    let lp = LinearPart::at(xi, params, state);
    let (q, m) = math::orthonormal_complement(xi, n);
    // Restricted matrix a·I + γ·QᵀRQ, at most 2×2.
    let mut s = [[math::ZERO; 2]; 2];
    for i in 0..m {
        for j in 0..m {
            let rq: f64 = (0..3).map(|r| q[i][r] * (0..3).map(|c| lp.r[r][c] * q[j][c]).sum::<f64>()).sum();
            s[i][j] = C64::new(lp.gamma * rq, 0.0);
        }
        s[i][i] += lp.a;
    }
    if m == 1 {
        out.push(s[0][0]);
    } else {
        let tr = s[0][0] + s[1][1];
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        let disc = (tr * tr - det * 4.0).sqrt();
        out.push((tr + disc) * 0.5);
        out.push((tr - disc) * 0.5);
    }
}

/// Searches the shift grid `ω ∈ {0, step, 2·step, …, omega_max}` for the
/// smallest ω such that every sampled eigenvalue `z` of `ω + σ(ξ)` on the
/// divergence-free subspace satisfies `|arg z| ≤ max_angle` and `|z| ≥ δ`.
///
/// This is a certificate on the sample set only.
pub fn sectoriality_scan(params: &ModelParams, state: &SteadyState, spec: &SamplingSpec) -> SectorialityReport {
    let n = params.n;
    let dirs = directions(n, spec.directions, state);
    let mut eig = Vec::with_capacity(spec.moduli * dirs.len() * 2);
    let ratio = if spec.moduli > 1 { math::pow(spec.k_max / spec.k_min, 1.0 / (spec.moduli - 1) as f64) } else { 1.0 };
    let mut k = spec.k_min;
    for _ in 0..spec.moduli {
        for d in &dirs {
            solenoidal_eigenvalues(&math::scale(d, k), params, state, &mut eig);
        }
        k *= ratio;
    }
    let min_real = eig.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);

    let check = |omega: f64| -> Option<(f64, f64)> {
        let mut phi: f64 = 0.0;
        let mut margin = f64::INFINITY;
        for z in &eig {
            let w = *z + omega;
            if w.re <= 0.0 {
                return None;
            }
            let ang = math::atan2(w.im, w.re).abs();
            let modulus = math::cabs(w);
            if ang > spec.max_angle || modulus < spec.delta {
                return None;
            }
            phi = phi.max(ang);
            margin = margin.min(modulus);
        }
        Some((phi, margin))
    };

    let steps = libm::floor(spec.omega_max / spec.omega_step) as u64;
    let at = |j: u64| j as f64 * spec.omega_step;
    let samples = eig.len();
    let fail = SectorialityReport { omega: None, phi0: f64::NAN, margin: f64::NAN, samples, min_real };
    if check(at(steps)).is_none() {
        return fail;
    }
    // Feasibility is monotone in ω once Re(ω + z) > 0 for all z.
    let (mut lo, mut hi) = (0u64, steps);
    if check(at(0)).is_some() {
        hi = 0;
    } else {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if check(at(mid)).is_some() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let omega = at(hi);
    let (phi0, margin) = check(omega).unwrap();
    SectorialityReport { omega: Some(omega), phi0, margin, samples, min_real }
}
