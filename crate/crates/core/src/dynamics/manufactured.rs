//! Manufactured solutions: a prescribed modal trajectory `u*(t)` and the
//! forcing `f = ∂_t u* + A_LF u* + H(u*)` that makes it an exact solution of
//! the truncated system.

use alloc::vec::Vec;

use crate::math::{self, CVec, RVec, C64};
use crate::measure::{Atom, SpectralMeasure};
use crate::symbols::{LinearPart, ModelParams, SteadyState};
use crate::{Error, Result};

use super::evolve::Forcing;
use super::lattice::{LatticeField, TruncationPolicy};
use super::nonlinear::nonlinearity_lattice;

/// Real scalar time profile of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Constant,
    /// `e^{rate·t}`
    Exp {
        rate: f64,
    },
    /// `cos(ω t + phase)`
    Cos {
        omega: f64,
        phase: f64,
    },
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant => 1.0,
            Profile::Exp { rate } => math::exp(rate * t),
            Profile::Cos { omega, phase } => math::cos(omega * t + phase),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant => 0.0,
            Profile::Exp { rate } => rate * math::exp(rate * t),
            Profile::Cos { omega, phase } => -omega * math::sin(omega * t + phase),
        }
    }
}

/// `u*(t) = Σ_j c_j θ_j(t) e^{iξ_j·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalTrajectory {
    dim: usize,
    modes: Vec<(RVec, CVec, Profile)>,
}

impl ModalTrajectory {
    pub fn new(dim: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(ModalTrajectory { dim, modes: Vec::new() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds one mode; `c` must be orthogonal to a nonzero `ξ`.
    pub fn add_mode(&mut self, xi: &[f64], c: &[C64], profile: Profile) -> Result<()> {
        if xi.len() != self.dim || c.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: xi.len().max(c.len()) });
        }
        let x = math::rvec(xi);
        let cv = math::cvec(c);
        let k = math::norm(&x);
        if k == 0.0 {
            return Err(Error::InvalidParams("manufactured modes must have ξ ≠ 0"));
        }
        if math::rcdot(&x, &cv).norm() > 1e-12 * k * math::cnorm(&cv) {
            return Err(Error::InvalidParams("manufactured modes must be divergence-free"));
        }
        self.modes.push((x, cv, profile));
        Ok(())
    }

    /// Adds `(ξ, c)` and `(−ξ, c̄)` so the field stays real.
    pub fn add_hermitian_pair(&mut self, xi: &[f64], c: &[C64], profile: Profile) -> Result<()> {
        self.add_mode(xi, c, profile)?;
        let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
        let conj: Vec<C64> = c.iter().map(|z| z.conj()).collect();
        self.add_mode(&neg, &conj, profile)
    }

    fn assemble<F: Fn(&Profile) -> f64>(&self, weight: F) -> Result<SpectralMeasure> {
        let n = self.dim;
        let atoms = self
            .modes
            .iter()
            .map(|(x, c, p)| Atom::new(&x[..n], &math::cscale_re(c, weight(p))[..n]))
            .collect::<Result<Vec<_>>>()?;
        SpectralMeasure::from_atoms_in(n, n, atoms)
    }

    pub fn field(&self, t: f64) -> Result<SpectralMeasure> {
        self.assemble(|p| p.value(t))
    }

    pub fn derivative(&self, t: f64) -> Result<SpectralMeasure> {
        self.assemble(|p| p.derivative(t))
    }
}

/// Forcing that makes a [`ModalTrajectory`] an exact truncated solution.
#[derive(Debug, Clone)]
pub struct ManufacturedForcing {
    pub trajectory: ModalTrajectory,
    params: ModelParams,
    state: SteadyState,
    policy: TruncationPolicy,
    nonlinear: bool,
}

impl ManufacturedForcing {
    /// Drops `H` from the forcing, for linearized runs.
    pub fn linear(mut self) -> Self {
        self.nonlinear = false;
        self
    }
}

pub fn manufactured_forcing(
    trajectory: ModalTrajectory,
    params: &ModelParams,
    state: &SteadyState,
    policy: &TruncationPolicy,
) -> Result<ManufacturedForcing> {
    params.validate()?;
    if trajectory.dim != params.n {
        return Err(Error::DimensionMismatch { expected: params.n, found: trajectory.dim });
    }
    for (x, _, _) in &trajectory.modes {
        policy.lattice.key_of(x)?;
        if !policy.keeps(x) {
            return Err(Error::InvalidParams("manufactured modes must lie inside the Galerkin ball"));
        }
    }
    Ok(ManufacturedForcing { trajectory, params: *params, state: *state, policy: *policy, nonlinear: true })
}

impl Forcing for ManufacturedForcing {
    fn at(&self, t: f64) -> Result<SpectralMeasure> {
        let n = self.params.n;
        let u = self.trajectory.field(t)?;
        let du = self.trajectory.derivative(t)?;
        let (params, state) = (self.params, self.state);
        let au = u.map_atoms(|a| {
            let lp = LinearPart::at(a.xi3(), &params, &state);
            let c = math::cvec(a.coeff());
            let mut out = math::cscale(&c, lp.a);
            math::axpy(&mut out, C64::new(lp.gamma, 0.0), &math::rmat_apply(&lp.r, &c));
            Atom::new(a.xi(), &out[..n]).unwrap()
        });
        let mut f = du.axpy(math::ONE, &au)?;
        if self.nonlinear {
            let ul = LatticeField::from_measure(&u, self.policy.lattice)?;
            let h = nonlinearity_lattice(&ul, &self.params, &self.state, &self.policy)?;
            f = f.axpy(math::ONE, &h.to_measure())?;
        }
        Ok(f)
    }
}
