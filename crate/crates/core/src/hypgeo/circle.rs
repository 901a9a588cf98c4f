use crate::error::{Error, Result};
use serde::Serialize;
use std::f64::consts::TAU;

/// Largest allowed step between consecutive lifted samples, in turns.
pub const CIRCLE_GUARD: f64 = 0.5;

/// A continuous lift to `R` (in turns) of a path in `R/Z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CirclePath {
    lifted: Vec<f64>,
}

impl CirclePath {
    /// Takes already-lifted values and checks the continuity guard.
    pub fn new(lifted: Vec<f64>) -> Result<CirclePath> {
        if lifted.is_empty() || lifted.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("a circle path needs finite samples"));
        }
        for (i, w) in lifted.windows(2).enumerate() {
            if (w[1] - w[0]).abs() >= CIRCLE_GUARD {
                return Err(Error::RefinePath {
                    index: i,
                    step: w[1] - w[0],
                });
            }
        }
        Ok(CirclePath { lifted })
    }

    /// Lifts boundary angles given in radians.
    pub fn from_radians(angles: &[f64]) -> Result<CirclePath> {
        let mut lift = CircleLifter::new();
        let lifted = angles
            .iter()
            .enumerate()
            .map(|(i, &a)| lift.push(a, i))
            .collect::<Result<Vec<f64>>>()?;
        CirclePath::new(lifted)
    }

    pub fn lifted(&self) -> &[f64] {
        &self.lifted
    }

    /// `gamma * beta`: `beta` shifted to start where `self` ends.
    pub fn concat(&self, other: &CirclePath) -> Result<CirclePath> {
        let shift = self.lifted[self.lifted.len() - 1] - other.lifted[0];
        let frac = shift - shift.round();
        if frac.abs() > 1e-9 {
            return Err(Error::validation("paths do not join in R/Z"));
        }
        let mut out = self.lifted.clone();
        out.extend(other.lifted.iter().skip(1).map(|v| v + shift));
        CirclePath::new(out)
    }
}

/// `floor(last - first)`.
pub fn circle_index(path: &CirclePath) -> i64 {
    let l = path.lifted();
    (l[l.len() - 1] - l[0]).floor() as i64
}

/// Incremental lift of angles in radians to turns.
#[derive(Debug, Clone)]
pub(crate) struct CircleLifter {
    last: Option<(f64, f64)>,
}

impl CircleLifter {
    pub(crate) fn new() -> Self {
        CircleLifter { last: None }
    }

    /// Lifted value (turns) of the next angle; `index` labels guard errors.
    pub(crate) fn push(&mut self, angle: f64, index: usize) -> Result<f64> {
        let turns = angle / TAU;
        let out = match self.last {
            None => turns,
            Some((raw, lifted)) => {
                let mut d = turns - raw;
                d -= d.round();
                if d.abs() >= CIRCLE_GUARD - 1e-12 {
                    return Err(Error::RefinePath { index, step: d });
                }
                lifted + d
            }
        };
        self.last = Some((turns, out));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::stream_rng;
    use rand::Rng;

    #[test]
    fn index_of_simple_paths() {
        assert_eq!(circle_index(&CirclePath::new(vec![0.3; 5]).unwrap()), 0);
        let loop1: Vec<f64> = (0..=16).map(|k| TAU * k as f64 / 16.0).collect();
        assert_eq!(circle_index(&CirclePath::from_radians(&loop1).unwrap()), 1);
        let back: Vec<f64> = loop1.iter().map(|a| -a).collect();
        assert_eq!(circle_index(&CirclePath::from_radians(&back).unwrap()), -1);
        assert!(CirclePath::new(vec![0.0, 0.6]).is_err());
    }

    #[test]
    fn concatenation_defect_is_at_most_two() {
        for i in 0..500 {
            let mut rng = stream_rng(21, i);
            let mut walk = |start: f64| {
                let mut v = vec![start];
                for _ in 0..rng.random_range(1..40) {
                    let last = *v.last().unwrap();
                    v.push(last + rng.random_range(-0.45..0.45));
                }
                CirclePath::new(v).unwrap()
            };
            let g = walk(0.0);
            let end = *g.lifted().last().unwrap();
            let b = walk(end - end.floor());
            let gb = g.concat(&b).unwrap();
            let d = circle_index(&gb) - circle_index(&g) - circle_index(&b);
            assert!(d.abs() <= 2, "defect {d}");
        }
    }
}
