//! Monte Carlo estimate of `(1/p) int_B Phi(Df^p) nu` and the ball
//! restriction value `tau + s Cal`.

use super::calabi::{calabi, BallQuadrature, PrimitiveOneForm};
use super::field::MAX_DIM;
use super::integrate::{relative_drift, tangent_update, walk, Event, TOL_FLOW};
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::harness::QmEvaluator;
use crate::numeric::{mean_and_stderr, stream_rng};
use crate::symplinalg::MAX_STEP_TURNS;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

/// Streaming winding refuses steps above this many turns; the remedy is
/// a smaller `dt`.
const STREAM_STEP_TURNS: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauResult {
    pub value: f64,
    pub std_error: f64,
    /// `2n/p` times the volume of the sampling ball.
    pub deterministic_error: f64,
    pub volume: f64,
    pub p: usize,
    pub n_samples: usize,
    pub n_inside: usize,
    pub seed: u64,
    /// Largest relative symplecticity drift seen at period ends.
    pub max_drift: f64,
}

/// Volume of the ball of radius `r` in `R^{2n}`.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    let n = dim / 2;
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    PI.powi(n as i32) * r.powi(dim as i32) / fact
}

/// Uniform point in the centered ball of radius `r`.
pub fn sample_ball<R: Rng>(rng: &mut R, dim: usize, r: f64) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let u: f64 = rng.random();
        let rad = r * u.powf(1.0 / dim as f64);
        return g.iter().map(|v| v * rad / norm).collect();
    }
}

/// `det(X + iY)^2 / |.|^2` for the first `n` columns of the row-major
/// `2n x 2n` matrix `m`.
fn frame_phase(dim: usize, m: &[f64]) -> Complex64 {
    let n = dim / 2;
    let z = |i: usize, j: usize| Complex64::new(m[i * dim + j], m[(i + n) * dim + j]);
    let det = match n {
        1 => z(0, 0),
        2 => z(0, 0) * z(1, 1) - z(0, 1) * z(1, 0),
        _ => {
            z(0, 0) * (z(1, 1) * z(2, 2) - z(1, 2) * z(2, 1))
                - z(0, 1) * (z(1, 0) * z(2, 2) - z(1, 2) * z(2, 0))
                + z(0, 2) * (z(1, 0) * z(2, 1) - z(1, 1) * z(2, 0))
        }
    };
    let d2 = det * det;
    d2 / d2.norm()
}

/// Winding in turns of `det^2` of `Df_t L0` over `p` periods, with `L0`
/// the span of the `x` coordinates, and the largest relative drift seen
/// at period ends.
pub fn point_winding(sc: &Scenario, x: &[f64], p: usize) -> Result<(f64, f64)> {
    let dim = sc.dim();
    let mut m = [0.0; MAX_DIM * MAX_DIM];
    for i in 0..dim {
        m[i * dim + i] = 1.0;
    }
    let mut phase = Complex64::new(1.0, 0.0);
    let mut turns = 0.0;
    let mut max_drift = 0.0f64;
    let per_period = sc.stages().len() * sc.steps_per_stage();
    walk(sc, x, p, |ev| {
        let end_index = match ev {
            Event::Step(info) => {
                tangent_update(dim, dim, info, &mut m)?;
                let next = frame_phase(dim, &m);
                let step = (next * phase.conj()).arg() / TAU;
                if step.abs() > STREAM_STEP_TURNS.min(MAX_STEP_TURNS) {
                    return Err(Error::RefinePath {
                        index: info.index,
                        step,
                    });
                }
                turns += step;
                phase = next;
                info.index + 1
            }
            Event::SkippedStage { first_index, .. } => first_index + sc.steps_per_stage(),
        };
        if per_period > 0 && end_index % per_period == 0 {
            let drift = relative_drift(dim, &m);
            max_drift = max_drift.max(drift);
            if drift > TOL_FLOW {
                return Err(Error::SymplecticDrift {
                    drift,
                    tol: TOL_FLOW,
                    step: end_index,
                });
            }
        }
        Ok(())
    })?;
    Ok((turns, max_drift))
}

pub fn tau_ball(sc: &Scenario, p: usize, n_samples: usize, seed: u64) -> Result<TauResult> {
    if p == 0 || n_samples == 0 {
        return Err(Error::validation("p and n_samples must be positive"));
    }
    let dim = sc.dim();
    let r = sc.support_radius();
    let volume = ball_volume(dim, r);
    let per: Vec<(f64, f64, bool)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let x = sample_ball(&mut rng, dim, r);
            if sc.outside_support(&x) {
                return Ok((0.0, 0.0, false));
            }
            point_winding(sc, &x, p)
                .map(|(w, d)| (w / p as f64, d, true))
                .map_err(|e| Error::AtSample {
                    index: i,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = per.iter().map(|v| v.0).collect();
    let (mean, se) = mean_and_stderr(&values);
    Ok(TauResult {
        value: volume * mean,
        std_error: volume * se,
        deterministic_error: volume * dim as f64 / p as f64,
        volume,
        p,
        n_samples,
        n_inside: per.iter().filter(|v| v.2).count(),
        seed,
        max_drift: per.iter().map(|v| v.1).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SRestriction {
    pub s: f64,
    pub value: f64,
    pub tau: TauResult,
    pub calabi: f64,
}

impl SRestriction {
    /// The same decomposition at another `s`.
    pub fn at(&self, s: f64) -> SRestriction {
        SRestriction {
            s,
            value: self.tau.value + s * self.calabi,
            ..self.clone()
        }
    }
}

/// `tau_ball(sc).value + s * calabi(sc)`.
#[allow(clippy::too_many_arguments)]
pub fn s_restriction_value(
    sc: &Scenario,
    s: f64,
    p: usize,
    n_samples: usize,
    seed: u64,
    lambda: &PrimitiveOneForm,
    quad: &BallQuadrature,
) -> Result<SRestriction> {
    if s == 0.0 || !s.is_finite() {
        return Err(Error::validation("s must be a nonzero finite number"));
    }
    let tau = tau_ball(sc, p, n_samples, seed)?;
    let cal = calabi(sc, lambda, quad)?;
    Ok(SRestriction {
        s,
        value: tau.value + s * cal,
        tau,
        calabi: cal,
    })
}

/// `tau` as a quasi-morphism on scenarios, estimated with a fixed sample
/// set.
#[derive(Debug, Clone)]
pub struct TauEvaluator {
    pub dim: usize,
    pub support_radius: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl QmEvaluator for TauEvaluator {
    type Element = Scenario;

    fn identity(&self) -> Scenario {
        Scenario::zero(self.dim, self.support_radius).expect("valid zero scenario")
    }

    fn compose(&self, x: &Scenario, y: &Scenario) -> Result<Scenario> {
        x.after(y)
    }

    fn evaluate(&self, x: &Scenario) -> Result<f64> {
        Ok(tau_ball(x, 1, self.n_samples, self.seed)?.value)
    }

    fn power(&self, x: &Scenario, p: u64) -> Result<Scenario> {
        Ok(x.power(p as usize))
    }

    fn power_quotient(&self, x: &Scenario, p: u64) -> Result<f64> {
        Ok(tau_ball(x, p as usize, self.n_samples, self.seed)?.value)
    }

    fn homogenization_bound(&self, p: u64) -> Option<f64> {
        Some(ball_volume(self.dim, self.support_radius) * self.dim as f64 / p as f64)
    }

    fn inverse(&self, x: &Scenario) -> Option<Scenario> {
        Some(x.inverse())
    }
}
