use super::lagrangian::{is_transverse, lagrangian_det2, LagrangianFrame};
use super::winding::winding;
use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransversalityReport {
    pub all_transverse: bool,
    /// `|winding of det^2_W(L_t)|` in turns.
    pub winding_magnitude: f64,
}

/// Transversality of every sample to `W`, and the winding magnitude of
/// `t -> det^2_W(L_t)`. When every sample is transverse the magnitude is
/// at most `n`.
///
/// Fails only when the samples are too sparse for the winding guard or the
/// dimensions disagree.
pub fn transversality_winding_check(
    lag_path: &[LagrangianFrame],
    w: &LagrangianFrame,
) -> Result<TransversalityReport> {
    if lag_path.is_empty() {
        return Err(Error::validation("Lagrangian path is empty"));
    }
    let mut values = Vec::with_capacity(lag_path.len());
    let mut all_transverse = true;
    for l in lag_path {
        values.push(lagrangian_det2(w, l)?);
        all_transverse &= is_transverse(l, w);
    }
    let winding_magnitude = if values.len() < 2 {
        0.0
    } else {
        winding(&values)?.turns.abs()
    };
    Ok(TransversalityReport {
        all_transverse,
        winding_magnitude,
    })
}
