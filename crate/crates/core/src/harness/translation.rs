use super::QmEvaluator;
use crate::error::{Error, Result};
use std::f64::consts::TAU;

/// One monotone lift `s -> s + shift + amp * sin(2 pi s) / (2 pi)` of a
/// circle diffeomorphism, or its inverse. Requires `|amp| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftStep {
    pub shift: f64,
    pub amp: f64,
    pub inverted: bool,
}

impl LiftStep {
    pub fn new(shift: f64, amp: f64) -> Result<Self> {
        if !(amp.abs() < 1.0) || !shift.is_finite() {
            return Err(Error::validation("lift step needs finite shift and |amp| < 1"));
        }
        Ok(LiftStep {
            shift,
            amp,
            inverted: false,
        })
    }

    pub fn translation(shift: f64) -> Self {
        LiftStep {
            shift,
            amp: 0.0,
            inverted: false,
        }
    }

    fn forward(&self, s: f64) -> f64 {
        s + self.shift + self.amp * (TAU * s).sin() / TAU
    }

    pub fn apply(&self, s: f64) -> f64 {
        if !self.inverted {
            return self.forward(s);
        }
        if self.amp == 0.0 {
            return s - self.shift;
        }
        // forward is increasing and within 1/(2 pi) of s + shift
        let mut lo = s - self.shift - 1.0;
        let mut hi = s - self.shift + 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.forward(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * (1.0 + s.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn inverse(&self) -> Self {
        LiftStep {
            inverted: !self.inverted,
            ..*self
        }
    }
}

/// A lift to the real line of an orientation-preserving circle
/// diffeomorphism, stored as a word of [`LiftStep`]s applied right to left.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CircleLift {
    steps: Vec<LiftStep>,
}

impl CircleLift {
    pub fn identity() -> Self {
        CircleLift { steps: Vec::new() }
    }

    pub fn from_step(step: LiftStep) -> Self {
        CircleLift { steps: vec![step] }
    }

    pub fn apply(&self, s: f64) -> f64 {
        self.steps.iter().rev().fold(s, |acc, st| st.apply(acc))
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &CircleLift) -> CircleLift {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        CircleLift { steps }
    }

    pub fn inverse(&self) -> CircleLift {
        CircleLift {
            steps: self.steps.iter().rev().map(LiftStep::inverse).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// `phi(F) = F(0)`: a quasi-morphism (defect at most 1) whose
/// homogenization is the translation number.
#[derive(Debug, Clone, Copy, Default)]
pub struct TranslationEvaluator;

impl QmEvaluator for TranslationEvaluator {
    type Element = CircleLift;

    fn identity(&self) -> CircleLift {
        CircleLift::identity()
    }

    fn compose(&self, x: &CircleLift, y: &CircleLift) -> Result<CircleLift> {
        Ok(x.compose(y))
    }

    fn evaluate(&self, x: &CircleLift) -> Result<f64> {
        Ok(x.apply(0.0))
    }

    fn power_quotient(&self, x: &CircleLift, p: u64) -> Result<f64> {
        let mut s = 0.0;
        for _ in 0..p {
            s = x.apply(s);
        }
        Ok(s / p as f64)
    }

    fn inverse(&self, x: &CircleLift) -> Option<CircleLift> {
        Some(x.inverse())
    }
}
