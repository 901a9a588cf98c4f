//! Hamiltonian dynamics on a ball of `R^{2n}`: flow integration, tangent
//! transport, the Calabi invariant, Birkhoff averages and the Monte Carlo
//! quasi-morphism `tau`.

mod birkhoff;
mod calabi;
mod field;
mod integrate;
mod scenario;
mod tau;
#[cfg(test)]
mod tests;

pub use birkhoff::{birkhoff_average, BirkhoffResult};
pub use calabi::{action_along, calabi, BallQuadrature, CalabiEvaluator, PrimitiveOneForm};
pub use field::{Field, FieldSpec, Monomial, Profile, MAX_DIM};
pub use integrate::{
    hamiltonian_vector, integrate_flow, jacobian_path, midpoint_step, relative_drift,
    tangent_update, walk, Event, StepInfo, NEWTON_TOL, TOL_FLOW,
};
pub use scenario::{Scenario, ScenarioJson, Stage, StageJson, DEFAULT_DT};
pub use tau::{
    ball_volume, point_winding, s_restriction_value, sample_ball, tau_ball, SRestriction,
    TauEvaluator, TauResult,
};

use crate::error::{Error, Result};
use std::path::Path;

/// Reads and validates a scenario file.
pub fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let j: ScenarioJson = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Scenario::from_json(&j)
}
