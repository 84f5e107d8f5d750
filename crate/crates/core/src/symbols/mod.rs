//! Matrix symbols of the model's operators and everything derived from them
//! pointwise in ξ.

mod maxreg;
mod sector;
mod stability;

pub use maxreg::{maxreg_constant_check, MaxRegCheck};
pub use sector::{sectoriality_scan, SamplingSpec, SectorialityReport};
pub use stability::{
    classify_disordered, classify_disordered_with_tol, classify_ordered, classify_ordered_with_tol,
    critical_wavenumbers, dispersion_disordered, CriticalBand, StabilityClass, StabilityVerdict, Witness,
    DEFAULT_TIE_TOL,
};

use crate::etd::{StepFn, StructuredFn};
use crate::math::{self, RMat, RVec, C64};
use crate::measure::{Atom, SpectralMeasure, SymbolMatrix};
use crate::{Error, Result};

/// Physical constants of the model. All quantities are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Advection strength λ₀.
    pub lambda0: f64,
    /// Active pressure coefficient λ₁ (only enters pressure recovery).
    pub lambda1: f64,
    /// Sign-indefinite viscosity Γ₀.
    pub gamma0: f64,
    /// Hyperviscosity Γ₂ > 0.
    pub gamma2: f64,
    /// Linear friction α.
    pub alpha: f64,
    /// Cubic friction β > 0.
    pub beta: f64,
    /// Space dimension, 2 or 3.
    pub n: usize,
}

impl ModelParams {
    pub fn new(gamma2: f64, gamma0: f64, alpha: f64, beta: f64, n: usize) -> Self {
        ModelParams { lambda0: 0.0, lambda1: 0.0, gamma0, gamma2, alpha, beta, n }
    }

    pub fn with_lambda0(mut self, lambda0: f64) -> Self {
        self.lambda0 = lambda0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != 2 && self.n != 3 {
            return Err(Error::UnsupportedDimension(self.n));
        }
        let all = [self.lambda0, self.lambda1, self.gamma0, self.gamma2, self.alpha, self.beta];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite"));
        }
        if !(self.gamma2 > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidParams("Γ₂,β>0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyStateKind {
    Disordered,
    Ordered,
}

/// Steady state around which the transformed system is written.
///
/// Disordered: `V = 0, M = αI, N ≡ 0`. Ordered: `|V| = √(−α/β)`,
/// `M = 2βVVᵀ`, `N(u) = −β|u|²V − 2β(u·V)u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub kind: SteadyStateKind,
    pub p0: f64,
    pub v: RVec,
    pub m: RMat,
    pub beta: f64,
    pub dim: usize,
}

impl SteadyState {
    pub fn disordered(params: &ModelParams) -> Self {
        let mut m = math::rmat_identity(params.n);
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x *= params.alpha;
            }
        }
        SteadyState { kind: SteadyStateKind::Disordered, p0: 0.0, v: [0.0; 3], m, beta: params.beta, dim: params.n }
    }

    /// Ordered state with swimming velocity `√(−α/β)·direction/|direction|`.
    pub fn ordered(params: &ModelParams, direction: &[f64]) -> Result<Self> {
        if params.alpha >= 0.0 {
            return Err(Error::InvalidSteadyState("ordered states require α < 0"));
        }
        if direction.len() != params.n {
            return Err(Error::DimensionMismatch { expected: params.n, found: direction.len() });
        }
        let d = math::rvec(direction);
        let dn = math::norm(&d);
        if dn == 0.0 || !dn.is_finite() {
            return Err(Error::InvalidSteadyState("swimming direction must be nonzero"));
        }
        let speed = math::sqrt(-params.alpha / params.beta);
        Self::ordered_with_velocity(params, &math::scale(&d, speed / dn))
    }

    /// Ordered state from an explicit velocity, checked against `|V| = √(−α/β)`
    /// to 1e−12 relative.
    pub fn ordered_with_velocity(params: &ModelParams, v: &[f64]) -> Result<Self> {
        if params.alpha >= 0.0 {
            return Err(Error::InvalidSteadyState("ordered states require α < 0"));
        }
        let v = math::rvec(v);
        let speed = math::sqrt(-params.alpha / params.beta);
        if (math::norm(&v) - speed).abs() > 1e-12 * speed {
            return Err(Error::InvalidSteadyState("|V| must equal sqrt(-α/β)"));
        }
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = 2.0 * params.beta * v[i] * v[j];
            }
        }
        Ok(SteadyState { kind: SteadyStateKind::Ordered, p0: 0.0, v, m, beta: params.beta, dim: params.n })
    }

    pub fn speed(&self) -> f64 {
        math::norm(&self.v)
    }

    /// Coefficients `a_{jk} ∈ ℝⁿ` of `N(u) = Σ_{j,k} a_{jk} u^j u^k`,
    /// indexed `[j][k][i]`.
    pub fn quadratic_coefficients(&self) -> [[[f64; 3]; 3]; 3] {
        let mut a = [[[0.0; 3]; 3]; 3];
        if self.kind == SteadyStateKind::Disordered {
            return a;
        }
        let b = self.beta;
        let v = self.v;
        for j in 0..3 {
            for k in 0..3 {
                for i in 0..3 {
                    let djk = if j == k { 1.0 } else { 0.0 };
                    let dik = if i == k { 1.0 } else { 0.0 };
                    let dij = if i == j { 1.0 } else { 0.0 };
                    a[j][k][i] = -b * v[i] * djk - b * (v[j] * dik + v[k] * dij);
                }
            }
        }
        a
    }
}

/// Whether atoms at ξ = 0 survive projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OriginPolicy {
    #[default]
    Drop,
    Keep,
}

/// `σ_P(ξ) = I − ξξᵀ/|ξ|²`.
pub fn helmholtz_symbol(xi: &[f64]) -> Result<RMat> {
    let x = math::rvec(xi);
    let k2 = math::dot(&x, &x);
    if k2 == 0.0 {
        return Err(Error::SingularSymbol { xi: x });
    }
    let mut p = math::rmat_identity(xi.len());
    for i in 0..xi.len() {
        for j in 0..xi.len() {
            p[i][j] -= x[i] * x[j] / k2;
        }
    }
    Ok(p)
}

/// Applies `σ_P(ξ)` to every atom. Origin atoms are removed (`Drop`) or
/// passed through unchanged (`Keep`; constant vectors are divergence-free).
pub fn project_solenoidal(u: &SpectralMeasure, origin: OriginPolicy) -> Result<SpectralMeasure> {
    if u.components() != u.dim() {
        return Err(Error::ComponentMismatch { expected: u.dim(), found: u.components() });
    }
    let n = u.dim();
    let mut raw = alloc::vec::Vec::with_capacity(u.len());
    for a in u.atoms() {
        if a.wavenumber() <= u.merge_tol() {
            if origin == OriginPolicy::Keep {
                raw.push(*a);
            }
            continue;
        }
        let p = helmholtz_symbol(a.xi())?;
        let c = math::rmat_apply(&p, &math::cvec(a.coeff()));
        raw.push(Atom::new(a.xi(), &c[..n])?);
    }
    let mut out = SpectralMeasure::from_atoms_in(n, n, raw)?;
    out.flags.solenoidal = true;
    Ok(out)
}

/// Structured form of the linearized symbol at one wavevector:
/// `σ(ξ) = a·I + γ·R` with `R² = τR`.
///
/// * Disordered: `a = Γ₂|ξ|⁴ + Γ₀|ξ|²`, `γ = α`, `R = σ_P(ξ)`, `τ = 1`.
/// * Ordered: `a = Γ₂|ξ|⁴ + Γ₀|ξ|² + iλ₀V·ξ`, `γ = 2β`,
///   `R = σ_P(ξ)VVᵀ`, `τ = Vᵀσ_P(ξ)V`.
///
/// At ξ = 0 (only reachable with [`OriginPolicy::Keep`]) `σ_P` is taken
/// as the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearPart {
    pub a: C64,
    pub gamma: f64,
    pub tau: f64,
    pub r: RMat,
}

impl LinearPart {
    pub fn at(xi: &RVec, params: &ModelParams, state: &SteadyState) -> Self {
        let n = params.n;
        let k2 = math::dot(xi, xi);
        let p = if k2 == 0.0 { math::rmat_identity(n) } else { helmholtz_symbol(&xi[..n]).unwrap() };
        let re = params.gamma2 * k2 * k2 + params.gamma0 * k2;
        match state.kind {
            SteadyStateKind::Disordered => LinearPart { a: C64::new(re, 0.0), gamma: params.alpha, tau: 1.0, r: p },
            SteadyStateKind::Ordered => {
                let v = state.v;
                let pv = [math::dot(&p[0], &v), math::dot(&p[1], &v), math::dot(&p[2], &v)];
                let mut tau = math::dot(&v, &pv);
                if tau < 1e-14 * math::dot(&v, &v) {
                    tau = 0.0;
                }
                let mut r = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        r[i][j] = pv[i] * v[j];
                    }
                }
                let im = params.lambda0 * math::dot(&v, xi);
                LinearPart { a: C64::new(re, im), gamma: 2.0 * state.beta, tau, r }
            }
        }
    }

    pub fn matrix(&self, n: usize) -> SymbolMatrix {
        let mut m = [[math::ZERO; 3]; 3];
        for i in 0..n {
            for j in 0..n {
                m[i][j] = C64::new(self.gamma * self.r[i][j], 0.0);
            }
            m[i][i] += self.a;
        }
        SymbolMatrix::from_complex(n, &m)
    }

    pub fn function(&self, g: StepFn, h: f64) -> StructuredFn {
        StructuredFn::new(g, h, self.a, self.gamma, self.tau)
    }
}

/// `σ_{A_LF}(ξ) = (Γ₂|ξ|⁴ + Γ₀|ξ|² + iλ₀V·ξ)·I + σ_P(ξ)M`.
pub fn linearized_symbol(xi: &[f64], params: &ModelParams, state: &SteadyState) -> Result<SymbolMatrix> {
    let x = math::rvec(xi);
    if math::dot(&x, &x) == 0.0 {
        return Err(Error::SingularSymbol { xi: x });
    }
    Ok(LinearPart::at(&x, params, state).matrix(params.n))
}

/// Scalar symbol of the disordered operator on divergence-free fields,
/// `σ_{A_d}(ξ) = Γ₂|ξ|⁴ + Γ₀|ξ|² + α`.
pub fn disordered_symbol(k: f64, params: &ModelParams) -> f64 {
    let s = k * k;
    params.alpha + s * (params.gamma0 + s * params.gamma2)
}

/// `exp(−h σ_{A_LF}(ξ))`, in closed form via the `R² = τR` structure.
pub fn propagator(xi: &[f64], h: f64, params: &ModelParams, state: &SteadyState) -> Result<SymbolMatrix> {
    let x = math::rvec(xi);
    if math::dot(&x, &x) == 0.0 {
        return Err(Error::SingularSymbol { xi: x });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParams("step must be positive"));
    }
    let lp = LinearPart::at(&x, params, state);
    Ok(structured_matrix(&lp, &lp.function(StepFn::Exp, h), params.n))
}

/// Dense matrix of `g(σ)` from its structured representation.
pub fn structured_matrix(lp: &LinearPart, f: &StructuredFn, n: usize) -> SymbolMatrix {
    let mut m = [[math::ZERO; 3]; 3];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = f.coupling * lp.r[i][j];
        }
        m[i][i] += f.diag;
    }
    SymbolMatrix::from_complex(n, &m)
}
