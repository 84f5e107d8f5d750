//! Pressure recovery from a velocity field.
//!
//! Taking the gradient part of the momentum equation, every term that is
//! already divergence-free drops out and
//!
//! ```text
//! ∇q = (I − P)[N(u) − λ₀(u·∇)u − Mu − β|u|²u]
//! ```
//!
//! for divergence-free forcing. The original pressure is `p = q + λ₁|u + V|²`.

use alloc::vec::Vec;

use crate::math::{self, CVec, RVec, C64, I, ONE, ZERO};
use crate::measure::{Atom, ProductKind, SpectralMeasure, SymbolMatrix};
use crate::symbols::{ModelParams, SteadyState, SteadyStateKind};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct PressureField {
    /// `∇q`, vector valued.
    pub grad_q: SpectralMeasure,
    /// `q` up to an additive constant (no origin atom).
    pub q: SpectralMeasure,
    /// Mean (ξ = 0) part of the bracket, which no gradient can balance.
    pub origin_residual: CVec,
}

fn row_picker(n: usize, w: RVec) -> impl Fn(&[f64]) -> Option<SymbolMatrix> {
    move |_| {
        let mut data = [[ZERO; 3]; 3];
        for j in 0..n {
            data[0][j] = C64::new(w[j], 0.0);
        }
        Some(SymbolMatrix { rows: 1, cols: n, data })
    }
}

fn column(n: usize, v: RVec) -> impl Fn(&[f64]) -> Option<SymbolMatrix> {
    move |_| {
        let mut data = [[ZERO; 3]; 3];
        for i in 0..n {
            data[i][0] = C64::new(v[i], 0.0);
        }
        Some(SymbolMatrix { rows: n, cols: 1, data })
    }
}

/// `(u·∇)u = Σ_l u_l ∂_l u` through measure products.
fn advection(u: &SpectralMeasure) -> Result<SpectralMeasure> {
    let n = u.dim();
    let mut acc = SpectralMeasure::zero(n, n);
    for l in 0..n {
        let mut e = [0.0; 3];
        e[l] = 1.0;
        let ul = u.restrict(row_picker(n, e))?;
        let dl = u.restrict(|xi| Some(SymbolMatrix::scalar(I * xi[l])))?;
        acc = acc.axpy(ONE, &ul.multiply(&dl, ProductKind::Componentwise, usize::MAX)?)?;
    }
    Ok(acc)
}

/// The bracket `N(u) − λ₀(u·∇)u − Mu − β|u|²u` in full (no truncation).
pub fn momentum_bracket(u: &SpectralMeasure, params: &ModelParams, state: &SteadyState) -> Result<SpectralMeasure> {
    let n = params.n;
    if u.dim() != n || u.components() != n {
        return Err(Error::ComponentMismatch { expected: n, found: u.components() });
    }
    let s = u.multiply(u, ProductKind::Dot, usize::MAX)?;
    let cubic = s.multiply(u, ProductKind::Componentwise, usize::MAX)?;
    let mu = u.restrict(|_| Some(SymbolMatrix::from_real(n, &state.m)))?;
    let mut b = SpectralMeasure::zero(n, n).axpy(C64::new(-params.beta, 0.0), &cubic)?;
    b = b.axpy(C64::new(-1.0, 0.0), &mu)?;
    if params.lambda0 != 0.0 {
        b = b.axpy(C64::new(-params.lambda0, 0.0), &advection(u)?)?;
    }
    if state.kind == SteadyStateKind::Ordered {
        let v = state.v;
        let sv = s.restrict(column(n, v))?;
        let w = u.restrict(row_picker(n, v))?;
        let wu = w.multiply(u, ProductKind::Componentwise, usize::MAX)?;
        b = b.axpy(C64::new(-state.beta, 0.0), &sv)?;
        b = b.axpy(C64::new(-2.0 * state.beta, 0.0), &wu)?;
    }
    Ok(b)
}

/// Recovers `∇q` and `q` from a divergence-free `u`.
pub fn recover_pressure(u: &SpectralMeasure, params: &ModelParams, state: &SteadyState) -> Result<PressureField> {
    let n = params.n;
    let b = momentum_bracket(u, params, state)?;
    let mut grad = Vec::new();
    let mut q = Vec::new();
    let mut origin = math::CZERO3;
    for a in b.atoms() {
        let xi = math::rvec(a.xi());
        let k2 = math::dot(&xi, &xi);
        let c = math::cvec(a.coeff());
        if a.wavenumber() <= b.merge_tol() {
            origin = math::cadd(&origin, &c);
            continue;
        }
        // (I − P)c = ξ(ξ·c)/|ξ|²
        let proj = math::rcdot(&xi, &c) / k2;
        let g: Vec<C64> = (0..n).map(|i| proj * xi[i]).collect();
        if g.iter().all(|z| *z == ZERO) {
            continue;
        }
        grad.push(Atom::new(a.xi(), &g)?);
        // iξ q̂ = g  ⇒  q̂ = −i(ξ·g)/|ξ|² = −i·proj
        q.push(Atom::new(a.xi(), &[-I * proj])?);
    }
    Ok(PressureField {
        grad_q: SpectralMeasure::from_atoms_in(n, n, grad)?,
        q: SpectralMeasure::from_atoms_in(n, 1, q)?,
        origin_residual: origin,
    })
}

/// Original pressure `p = p₀ + q + λ₁|u + V|²`.
pub fn original_pressure(
    pf: &PressureField,
    u: &SpectralMeasure,
    params: &ModelParams,
    state: &SteadyState,
) -> Result<SpectralMeasure> {
    let n = params.n;
    let v = super::original_velocity(u, state)?;
    let v2 = v.multiply(&v, ProductKind::Dot, usize::MAX)?;
    let p0 = SpectralMeasure::from_atoms_in(n, 1, alloc::vec![Atom::real(&[0.0; 3][..n], &[state.p0])?])?;
    pf.q.axpy(ONE, &p0)?.axpy(C64::new(params.lambda1, 0.0), &v2)
}
