//! Lifting a disk isotopy to oriented directions, the boundary index, the
//! angle function and the Monte Carlo estimate of `Cal_S`.
//!
//! Along `t -> f_t(x)` a direction is parallel-transported and in addition
//! turned by `-2 pi H~_t` radians per unit time, with `H~ = H + c_t`. Its
//! geodesic endpoint traces the boundary path whose index enters the
//! angle. With these conventions `angle(x, f^p) / p` tends to the orbit
//! average of `int (lambda(Z_t) + H~_t) dt`, so the estimate below
//! approaches `+Cal` without any sign flip.

use super::circle::{circle_index, CircleLifter, CirclePath};
use super::disk::{geodesic_endpoint, parallel_transport_rate, DiskPoint, UnitDirection};
use super::isotopy::{chart_to_disk, disk_to_chart, DiskIsotopy};
use crate::error::{Error, Result};
use crate::hamflow::{walk, Event};
use crate::harness::QmEvaluator;
use crate::numeric::{pairwise_sum, stream_rng};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Default number of fiber directions in the sampled infimum.
pub const DEFAULT_FIBERS: usize = 8;
/// Largest fiber rotation (turns) applied in one go while a point sits
/// outside a stage's support.
const FIXED_POINT_SUBSTEP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaLift {
    /// Chart-frame direction angle (radians) after each step.
    pub directions: Vec<f64>,
    /// Base points in the model after each step.
    pub bases: Vec<(f64, f64)>,
    pub boundary: CirclePath,
}

struct FiberRun {
    /// Lifted boundary change (turns) for each starting direction.
    windings: Vec<f64>,
    trace: Option<ThetaLift>,
}

fn run_fibers(
    iso: &DiskIsotopy,
    w0: [f64; 2],
    angles: &[f64],
    p: usize,
    record: bool,
) -> Result<FiberRun> {
    let sc = iso.scenario();
    let r_u = iso.chart_radius();
    let mut z = chart_to_disk(&w0);
    let mut base = DiskPoint::new(z)?;
    let mut lifters: Vec<CircleLifter> = angles.iter().map(|_| CircleLifter::new()).collect();
    let mut start = Vec::with_capacity(angles.len());
    let mut current = vec![0.0; angles.len()];
    let mut counter = 0usize;
    for (k, &a) in angles.iter().enumerate() {
        let e = geodesic_endpoint(&UnitDirection { base, angle: a });
        start.push(lifters[k].push(e, counter)?);
        current[k] = start[k];
    }
    // common rotation of every fiber, in radians
    let mut offset = 0.0;
    let mut trace = record.then(|| ThetaLift {
        directions: vec![angles[0]],
        bases: vec![(z.re, z.im)],
        boundary: CirclePath::new(vec![start[0]]).expect("finite start"),
    });
    let mut boundary = vec![start[0]];
    let mut advance = |base: DiskPoint,
                       offset: f64,
                       lifters: &mut Vec<CircleLifter>,
                       current: &mut Vec<f64>,
                       trace: &mut Option<ThetaLift>,
                       boundary: &mut Vec<f64>|
     -> Result<()> {
        counter += 1;
        for (k, &a) in angles.iter().enumerate() {
            let e = geodesic_endpoint(&UnitDirection {
                base,
                angle: a + offset,
            });
            current[k] = lifters[k].push(e, counter)?;
        }
        if let Some(t) = trace.as_mut() {
            t.directions.push(angles[0] + offset);
            t.bases.push((base.z().re, base.z().im));
            boundary.push(current[0]);
        }
        Ok(())
    };
    walk(sc, &w0, p, |ev| {
        match ev {
            Event::Step(info) => {
                let w1 = [info.x1[0], info.x1[1]];
                if w1[0].hypot(w1[1]) >= r_u {
                    return Err(Error::SupportViolation { step: info.index });
                }
                let z1 = chart_to_disk(&w1);
                let zm = 0.5 * (z + z1);
                let transport = parallel_transport_rate(zm, z1 - z);
                let h = info.h_mid + iso.correction(info.stage, info.t_mid);
                offset += transport - TAU * h * info.dt;
                z = z1;
                base = DiskPoint::new(z)?;
                advance(base, offset, &mut lifters, &mut current, &mut trace, &mut boundary)?;
            }
            Event::SkippedStage { stage, .. } => {
                let turn = -iso.stage_correction_integral(stage);
                let pieces = (turn.abs() / FIXED_POINT_SUBSTEP).ceil().max(1.0) as usize;
                for _ in 0..pieces {
                    offset += TAU * turn / pieces as f64;
                    advance(base, offset, &mut lifters, &mut current, &mut trace, &mut boundary)?;
                }
            }
        }
        Ok(())
    })?;
    if let Some(t) = trace.as_mut() {
        t.boundary = CirclePath::new(boundary)?;
    }
    Ok(FiberRun {
        windings: current.iter().zip(&start).map(|(c, s)| c - s).collect(),
        trace,
    })
}

/// The lifted direction path and its boundary path over `p` periods.
pub fn theta_lift(iso: &DiskIsotopy, v: &UnitDirection, p: usize) -> Result<ThetaLift> {
    if p == 0 {
        return Err(Error::validation("p must be positive"));
    }
    let z = v.base.z();
    if z.norm() >= iso.model_radius() {
        return Err(Error::validation("the direction must be based inside U"));
    }
    let run = run_fibers(iso, disk_to_chart(z), &[v.angle], p, true)?;
    Ok(run.trace.expect("trace was requested"))
}

/// Index of the boundary path of each of `k` equally spaced directions at
/// `x`, over `p` periods.
pub fn fiber_indices(iso: &DiskIsotopy, x: &DiskPoint, p: usize, k: usize) -> Result<Vec<i64>> {
    if p == 0 || k == 0 {
        return Err(Error::validation("p and the fiber count must be positive"));
    }
    let angles: Vec<f64> = (0..k).map(|j| TAU * j as f64 / k as f64).collect();
    let run = run_fibers(iso, disk_to_chart(x.z()), &angles, p, false)?;
    Ok(run.windings.iter().map(|w| w.floor() as i64).collect())
}

/// True when the isotopy fixes `x` with all its directions turning
/// rigidly: `x` outside `U` or outside every stage support.
pub fn is_outside(iso: &DiskIsotopy, x: &DiskPoint) -> bool {
    x.z().norm() >= iso.model_radius() || iso.scenario().outside_support(&disk_to_chart(x.z()))
}

/// `-min` over `k` sampled directions of the boundary index, over `p`
/// periods; outside the support the exact value `p int_0^1 c_t dt`.
pub fn angle_estimate(iso: &DiskIsotopy, x: &DiskPoint, p: usize, k: usize) -> Result<f64> {
    if is_outside(iso, x) {
        if p == 0 {
            return Err(Error::validation("p must be positive"));
        }
        return Ok(p as f64 * iso.mean_correction());
    }
    let n = fiber_indices(iso, x, p, k)?;
    Ok(-(*n.iter().min().expect("k > 0")) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalSEstimate {
    pub value: f64,
    pub statistical_error: f64,
    /// `3 A_U / p`: fiber sampling (within 2 of the infimum) plus floor
    /// rounding, per point.
    pub deterministic_error: f64,
    /// Exact part `c (2g - 2 - A_U)` from the complement of `U`.
    pub outside_contribution: f64,
    pub p: usize,
    pub fibers: usize,
    pub n_points: usize,
    pub seed: u64,
    pub genus: u32,
    pub disk_area: f64,
}

/// `(1/p) int_S angle(-, f^p) omega`: Monte Carlo over `U` stratified into
/// `n_points` annuli of equal area (one point each, uniform inside its
/// annulus), plus the exact complement term.
///
/// The statistical error pairs neighbouring annuli: each pair is a
/// stratum with two independent samples.
pub fn cal_s_estimate(
    iso: &DiskIsotopy,
    p: usize,
    n_points: usize,
    k: usize,
    seed: u64,
) -> Result<CalSEstimate> {
    if p == 0 || n_points == 0 || k == 0 {
        return Err(Error::validation("p, n_points and the fiber count must be positive"));
    }
    let r_u = iso.chart_radius();
    let values: Vec<f64> = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let u: f64 = rng.random();
            let th: f64 = rng.random_range(0.0..TAU);
            let r = r_u * ((i as f64 + u) / n_points as f64).sqrt();
            let z = chart_to_disk(&[r * th.cos(), r * th.sin()]);
            let x = DiskPoint::new(z)?;
            angle_estimate(iso, &x, p, k)
                .map(|a| a / p as f64)
                .map_err(|e| Error::AtSample {
                    index: i,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    let a_u = iso.disk_area();
    let mean = pairwise_sum(&values) / n_points as f64;
    let pairs: Vec<f64> = values
        .chunks_exact(2)
        .map(|c| (c[0] - c[1]) * (c[0] - c[1]))
        .collect();
    let var = pairwise_sum(&pairs) / (n_points as f64 * n_points as f64);
    let outside = iso.mean_correction() * (iso.surface_area() - a_u);
    Ok(CalSEstimate {
        value: a_u * mean + outside,
        statistical_error: a_u * var.sqrt(),
        deterministic_error: 3.0 * a_u / p as f64,
        outside_contribution: outside,
        p,
        fibers: k,
        n_points,
        seed,
        genus: iso.genus(),
        disk_area: a_u,
    })
}

/// The angle integral as a quasi-morphism on disk isotopies.
#[derive(Debug, Clone)]
pub struct AngleEvaluator {
    pub genus: u32,
    pub disk_area: f64,
    pub n_points: usize,
    pub fibers: usize,
    pub seed: u64,
}

impl QmEvaluator for AngleEvaluator {
    type Element = DiskIsotopy;

    fn identity(&self) -> DiskIsotopy {
        DiskIsotopy::identity(self.genus, self.disk_area).expect("valid surface")
    }

    fn compose(&self, x: &DiskIsotopy, y: &DiskIsotopy) -> Result<DiskIsotopy> {
        x.after(y)
    }

    fn evaluate(&self, x: &DiskIsotopy) -> Result<f64> {
        Ok(cal_s_estimate(x, 1, self.n_points, self.fibers, self.seed)?.value)
    }

    fn power(&self, x: &DiskIsotopy, p: u64) -> Result<DiskIsotopy> {
        Ok(x.power(p as usize))
    }

    fn power_quotient(&self, x: &DiskIsotopy, p: u64) -> Result<f64> {
        Ok(cal_s_estimate(x, p as usize, self.n_points, self.fibers, self.seed)?.value)
    }

    fn homogenization_bound(&self, p: u64) -> Option<f64> {
        Some(8.0 * self.disk_area / p as f64)
    }

    fn inverse(&self, x: &DiskIsotopy) -> Option<DiskIsotopy> {
        Some(x.inverse())
    }
}

/// `circle_index` of the boundary path of a lift.
pub fn lift_index(lift: &ThetaLift) -> i64 {
    circle_index(&lift.boundary)
}

/// Rotation (radians) of a direction at the center over one period of a
/// radial isotopy centered at 0: `-2 pi int H~_t(0) dt`.
pub fn center_fiber_rotation(iso: &DiskIsotopy) -> f64 {
    let sc = iso.scenario();
    let mut total = 0.0;
    for (s, stage) in sc.stages().iter().enumerate() {
        let h0 = stage.field().value(&[0.0, 0.0]);
        total += -TAU * (stage.time_integral() * h0 + iso.stage_correction_integral(s));
    }
    total
}
