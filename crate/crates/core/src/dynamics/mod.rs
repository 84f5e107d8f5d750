//! Galerkin-truncated dynamics of the transformed system
//! `u_t + A_LF u + H(u) = f` around a steady state.

mod evolve;
mod experiments;
mod lattice;
mod manufactured;
mod nonlinear;
mod pressure;

pub use evolve::{
    diagnostics, evolve, step, DiagRecord, DynForcing, Forcing, Integrator, Outcome, SampleGrid, SimConfig,
    SteadyForcing, Stepper, TabulatedForcing, Trajectory,
};
pub use experiments::{growth_rate_experiment, predicted_rate, GrowthReport, GrowthSpec};
pub use lattice::{convolve, Key, Lattice, LatticeField, TruncationPolicy};
pub use manufactured::{manufactured_forcing, ManufacturedForcing, ModalTrajectory, Profile};
pub use nonlinear::{advection_term, cubic_term, nonlinearity_lattice, project, square_norm, steady_coupling};
pub use pressure::{momentum_bracket, original_pressure, recover_pressure, PressureField};

use crate::math;
use crate::measure::{Atom, SpectralMeasure};
use crate::symbols::{ModelParams, SteadyState, SteadyStateKind};
use crate::{Error, Result};

/// Steady state for the requested kind; `direction` is only used (and
/// required) for ordered states.
pub fn steady_state_transform(
    kind: SteadyStateKind,
    params: &ModelParams,
    direction: Option<&[f64]>,
) -> Result<SteadyState> {
    params.validate()?;
    match kind {
        SteadyStateKind::Disordered => Ok(SteadyState::disordered(params)),
        SteadyStateKind::Ordered => {
            let d = direction.ok_or(Error::InvalidSteadyState("ordered states need a swimming direction"))?;
            SteadyState::ordered(params, d)
        }
    }
}

/// `v = u + V`, with `V` as an atom at the origin.
pub fn original_velocity(u: &SpectralMeasure, state: &SteadyState) -> Result<SpectralMeasure> {
    let n = u.dim();
    if state.speed() == 0.0 {
        return Ok(u.clone());
    }
    let v = SpectralMeasure::from_atoms_in(n, n, alloc::vec![Atom::real(&[0.0; 3][..n], &state.v[..n])?])?;
    u.axpy(math::ONE, &v)
}

/// `H(u)` for a measure on the policy's lattice.
pub fn nonlinearity(
    u: &SpectralMeasure,
    params: &ModelParams,
    state: &SteadyState,
    policy: &TruncationPolicy,
) -> Result<SpectralMeasure> {
    let ul = LatticeField::from_measure(u, policy.lattice)?;
    Ok(nonlinearity_lattice(&ul, params, state, policy)?.to_measure())
}
