use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

/// Steps at or above this many turns are treated as aliased.
pub const MAX_STEP_TURNS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingValue {
    pub turns: f64,
    pub step_count: usize,
    /// Largest single-step phase change, in turns.
    pub max_step_phase: f64,
}

/// Principal phase change from `a` to `b`, in turns within `(-1/2, 1/2]`.
#[inline]
pub fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b * a.conj()).arg() / TAU
}

/// Total change of argument, in turns, along a sampled circle-valued path.
pub fn winding(values: &[Complex64]) -> Result<WindingValue> {
    if values.len() < 2 {
        return Err(Error::validation("winding needs at least two samples"));
    }
    let mut turns = 0.0;
    let mut max_step: f64 = 0.0;
    for (index, w) in values.windows(2).enumerate() {
        let step = phase_step(w[0], w[1]);
        if step.abs() >= MAX_STEP_TURNS - 1e-12 || !step.is_finite() {
            return Err(Error::RefinePath { index, step });
        }
        max_step = max_step.max(step.abs());
        turns += step;
    }
    Ok(WindingValue {
        turns,
        step_count: values.len() - 1,
        max_step_phase: max_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_full_loop() {
        let c = vec![Complex64::new(0.0, 1.0); 5];
        assert_eq!(winding(&c).unwrap().turns, 0.0);
        let n = 64;
        let lp: Vec<_> = (0..=n)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
            .collect();
        let w = winding(&lp).unwrap();
        assert!((w.turns - 1.0).abs() < 1e-12);
        assert_eq!(w.step_count, 64);
        assert!((w.max_step_phase - 1.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn half_turn_jump_is_rejected() {
        let v = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        assert!(matches!(winding(&v), Err(Error::RefinePath { index: 0, .. })));
        let v = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        assert!(matches!(winding(&v), Err(Error::RefinePath { index: 1, .. })));
        assert!(winding(&v[..1]).is_err());
    }
}
