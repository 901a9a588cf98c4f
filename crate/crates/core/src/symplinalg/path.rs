use super::group::{exp_hamiltonian, SpMatrix, TOL_SP};
use super::lagrangian::{det2_phase, LagrangianFrame};
use super::winding::phase_step;
use crate::error::{Error, Result};
use crate::harness::QmEvaluator;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Steps larger than this (in turns) are subdivided before winding.
/// Stricter than the hard aliasing guard so that a step is never accepted
/// near the ambiguous half turn.
pub const REFINE_TRIGGER: f64 = 0.25;
pub const MAX_REFINE_DEPTH: usize = 20;

/// A sampled path in `Sp(2n, R)` starting at the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct SpPath {
    times: Vec<f64>,
    samples: Vec<SpMatrix>,
    n: usize,
}

impl SpPath {
    pub fn new(times: Vec<f64>, samples: Vec<SpMatrix>) -> Result<Self> {
        if samples.len() < 2 || times.len() != samples.len() {
            return Err(Error::validation(
                "path needs at least two samples and one time per sample",
            ));
        }
        let n = samples[0].n();
        if samples.iter().any(|m| m.n() != n) {
            return Err(Error::validation("path samples have mixed dimensions"));
        }
        if times[0] != 0.0 || (times[times.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::validation("path times must run from 0 to 1"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("path times must be strictly increasing"));
        }
        let start = (samples[0].matrix() - DMatrix::identity(2 * n, 2 * n)).norm();
        if start > TOL_SP {
            return Err(Error::validation(format!(
                "path must start at the identity (distance {start:.3e})"
            )));
        }
        Ok(SpPath { times, samples, n })
    }

    fn uniform_times(samples: usize) -> Vec<f64> {
        (0..samples).map(|k| k as f64 / (samples - 1) as f64).collect()
    }

    /// The constant path at the identity.
    pub fn identity(n: usize, samples: usize) -> Self {
        let samples = samples.max(2);
        SpPath {
            times: Self::uniform_times(samples),
            samples: vec![SpMatrix::identity(n); samples],
            n,
        }
    }

    /// `t -> exp(t A)` for a Hamiltonian generator `A`.
    pub fn from_generator(a: &DMatrix<f64>, samples: usize) -> Result<Self> {
        if a.nrows() != a.ncols() || !a.nrows().is_multiple_of(2) || a.nrows() == 0 {
            return Err(Error::validation("generator must be 2n x 2n"));
        }
        let n = a.nrows() / 2;
        let j = super::group::j0(n);
        if (a.transpose() * &j + &j * a).norm() > 1e-10 * (1.0 + a.norm()) {
            return Err(Error::validation("generator is not Hamiltonian"));
        }
        let samples = samples.max(2);
        let times = Self::uniform_times(samples);
        let mats = times.iter().map(|&t| exp_hamiltonian(&(a * t))).collect();
        Ok(SpPath {
            times,
            samples: mats,
            n,
        })
    }

    /// Rotation by `t * angle` in the first complex coordinate.
    pub fn rotation(n: usize, angle: f64, samples: usize) -> Self {
        let samples = samples.max(2);
        let times = Self::uniform_times(samples);
        let mats = times
            .iter()
            .map(|&t| SpMatrix::rotation(n, t * angle))
            .collect();
        SpPath {
            times,
            samples: mats,
            n,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn samples(&self) -> &[SpMatrix] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn endpoint(&self) -> &SpMatrix {
        self.samples.last().expect("paths have at least two samples")
    }

    /// `self` followed by `other` translated to start at `self`'s endpoint,
    /// representing the product in the universal cover.
    pub fn then(&self, other: &SpPath) -> Result<SpPath> {
        check_same_n(self, other)?;
        let end = self.endpoint();
        let mut times: Vec<f64> = self.times.iter().map(|t| 0.5 * t).collect();
        let mut samples = self.samples.clone();
        for (t, m) in other.times.iter().zip(&other.samples).skip(1) {
            times.push(0.5 + 0.5 * t);
            samples.push(m.mul(end));
        }
        Ok(SpPath {
            times,
            samples,
            n: self.n,
        })
    }

    /// `t -> gamma(1 - t) gamma(1)^{-1}`.
    pub fn inverse(&self) -> SpPath {
        let end_inv = self.endpoint().inverse();
        let times = self.times.iter().rev().map(|t| 1.0 - t).collect();
        let mut samples: Vec<SpMatrix> =
            self.samples.iter().rev().map(|m| m.mul(&end_inv)).collect();
        samples[0] = SpMatrix::identity(self.n);
        SpPath {
            times,
            samples,
            n: self.n,
        }
    }

    /// `t -> C gamma(t) C^{-1}`.
    pub fn conjugated(&self, c: &SpMatrix) -> SpPath {
        let ci = c.inverse();
        SpPath {
            times: self.times.clone(),
            samples: self.samples.iter().map(|m| c.mul(m).mul(&ci)).collect(),
            n: self.n,
        }
    }
}

fn check_same_n(a: &SpPath, b: &SpPath) -> Result<()> {
    if a.n != b.n {
        return Err(Error::validation(format!(
            "paths have different half-dimensions {} and {}",
            a.n, b.n
        )));
    }
    Ok(())
}

/// The p-fold concatenation whose segment `k` is `t -> gamma(t) gamma(1)^k`.
pub fn concat_power(path: &SpPath, p: u64) -> Result<SpPath> {
    if p == 0 {
        return Err(Error::validation("power must be at least 1"));
    }
    let p_f = p as f64;
    let mut times = Vec::with_capacity(p as usize * (path.len() - 1) + 1);
    let mut samples = Vec::with_capacity(times.capacity());
    times.push(0.0);
    samples.push(SpMatrix::identity(path.n));
    let end = path.endpoint();
    let mut power = SpMatrix::identity(path.n);
    for k in 0..p {
        for (t, m) in path.times.iter().zip(&path.samples).skip(1) {
            times.push((k as f64 + t) / p_f);
            samples.push(m.mul(&power));
        }
        power = power.mul(end);
    }
    *times.last_mut().expect("nonempty") = 1.0;
    Ok(SpPath {
        times,
        samples,
        n: path.n,
    })
}

/// Geodesic midpoint `A (A^{-1} B)^{1/2}` of two group elements.
fn midpoint(a: &SpMatrix, b: &SpMatrix) -> Option<SpMatrix> {
    let d = a.inverse().mul(b);
    d.principal_sqrt().map(|s| a.mul(&s))
}

struct Winder<'a> {
    frame: &'a DMatrix<f64>,
    n: usize,
}

impl Winder<'_> {
    fn phase(&self, m: &SpMatrix) -> Complex64 {
        det2_phase(&(m.matrix() * self.frame), self.n)
    }

    fn between(
        &self,
        a: &SpMatrix,
        va: Complex64,
        b: &SpMatrix,
        vb: Complex64,
        index: usize,
        depth: usize,
    ) -> Result<f64> {
        let step = phase_step(va, vb);
        if step.abs() <= REFINE_TRIGGER {
            return Ok(step);
        }
        if depth >= MAX_REFINE_DEPTH {
            return Err(Error::RefinementDepth { index, depth });
        }
        let mid = midpoint(a, b).ok_or(Error::RefinementDepth { index, depth })?;
        let vm = self.phase(&mid);
        Ok(self.between(a, va, &mid, vm, index, depth + 1)?
            + self.between(&mid, vm, b, vb, index, depth + 1)?)
    }

    /// Winding in turns of `t -> det^2(gamma_t L)`.
    fn wind(&self, path: &SpPath) -> Result<f64> {
        let mut total = 0.0;
        let mut prev = &path.samples[0];
        let mut vprev = self.phase(prev);
        for (index, m) in path.samples.iter().enumerate().skip(1) {
            let v = self.phase(m);
            total += self.between(prev, vprev, m, v, index - 1, 0)?;
            prev = m;
            vprev = v;
        }
        Ok(total)
    }
}

fn check_frame(path: &SpPath, l0: &LagrangianFrame) -> Result<()> {
    if path.n != l0.n() {
        return Err(Error::validation(format!(
            "path has n = {} but frame has n = {}",
            path.n,
            l0.n()
        )));
    }
    Ok(())
}

/// Winding in turns of `t -> det^2_{L0}(gamma_t L0)`, with automatic dyadic
/// refinement of large steps.
pub fn phi_lag(path: &SpPath, l0: &LagrangianFrame) -> Result<f64> {
    check_frame(path, l0)?;
    Winder {
        frame: l0.columns(),
        n: path.n,
    }
    .wind(path)
}

/// `phi_{L0}(gamma^p) / p` together with the bound `2n/p` on its distance
/// to the homogenized value.
///
/// The concatenation is never materialized: segment `k` of `gamma^p` moves
/// the Lagrangian `gamma(1)^k L0` along `gamma`, and refinement midpoints
/// commute with right multiplication, so the windings of the segments are
/// computed on the original samples with a re-orthonormalized frame.
pub fn phi_homog(path: &SpPath, p: u64, l0: &LagrangianFrame) -> Result<(f64, f64)> {
    check_frame(path, l0)?;
    if p == 0 {
        return Err(Error::validation("power must be at least 1"));
    }
    let n = path.n;
    let mut frame = l0.orthonormalized();
    let mut total = 0.0;
    for k in 0..p {
        let w = Winder {
            frame: frame.columns(),
            n,
        }
        .wind(path)
        .map_err(|e| match e {
            Error::RefinementDepth { index, depth } => Error::RefinementDepth {
                index: index + k as usize * (path.len() - 1),
                depth,
            },
            other => other,
        })?;
        total += w;
        frame = frame.transformed(path.endpoint()).orthonormalized();
    }
    Ok((total / p as f64, 2.0 * n as f64 / p as f64))
}

/// The quasi-morphism `phi_{L0}` on the universal cover, with `Phi` as its
/// homogenization.
#[derive(Debug, Clone)]
pub struct PhiEvaluator {
    pub l0: LagrangianFrame,
}

impl PhiEvaluator {
    pub fn new(l0: LagrangianFrame) -> Self {
        PhiEvaluator { l0 }
    }
}

impl QmEvaluator for PhiEvaluator {
    type Element = SpPath;

    fn identity(&self) -> SpPath {
        SpPath::identity(self.l0.n(), 2)
    }

    fn compose(&self, x: &SpPath, y: &SpPath) -> Result<SpPath> {
        x.then(y)
    }

    fn evaluate(&self, x: &SpPath) -> Result<f64> {
        phi_lag(x, &self.l0)
    }

    fn power(&self, x: &SpPath, p: u64) -> Result<SpPath> {
        if p == 0 {
            return Ok(self.identity());
        }
        concat_power(x, p)
    }

    fn power_quotient(&self, x: &SpPath, p: u64) -> Result<f64> {
        phi_homog(x, p, &self.l0).map(|r| r.0)
    }

    fn homogenization_bound(&self, p: u64) -> Option<f64> {
        Some(2.0 * self.l0.n() as f64 / p as f64)
    }

    fn inverse(&self, x: &SpPath) -> Option<SpPath> {
        Some(x.inverse())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::stream_rng;
    use crate::symplinalg::group::random_hamiltonian;
    use std::f64::consts::PI;

    #[test]
    fn rotation_path_winds_theta_over_pi() {
        let l0 = LagrangianFrame::real(1);
        for theta in [0.3, PI / 3.0, 1.5] {
            // two samples only: refinement has to do the work
            let path = SpPath::rotation(1, theta, 2);
            let v = phi_lag(&path, &l0).unwrap();
            assert!((v - theta / PI).abs() < 1e-10, "{theta}: {v}");
        }
        for theta in [2.0 * PI, 5.0, -9.0] {
            let path = SpPath::rotation(1, theta, 16);
            let v = phi_lag(&path, &l0).unwrap();
            assert!((v - theta / PI).abs() < 1e-10, "{theta}: {v}");
        }
    }

    #[test]
    fn hyperbolic_path_fixes_real_line() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let path = SpPath::from_generator(&a, 8).unwrap();
        assert!(phi_lag(&path, &LagrangianFrame::real(1)).unwrap().abs() < 1e-9);
    }

    #[test]
    fn concat_power_shape_and_loop_winding() {
        let path = SpPath::rotation(1, 1.0, 3);
        let c1 = concat_power(&path, 1).unwrap();
        assert_eq!(c1, path);
        let c2 = concat_power(&path, 2).unwrap();
        assert_eq!(c2.len(), 5);
        let end2 = path.endpoint().pow(2);
        assert!((c2.endpoint().matrix() - end2.matrix()).norm() < 1e-12);

        let full = SpPath::rotation(1, 2.0 * PI, 16);
        let c3 = concat_power(&full, 3).unwrap();
        assert!((c3.endpoint().matrix() - DMatrix::identity(2, 2)).norm() < 1e-12);
        let w = phi_lag(&c3, &LagrangianFrame::real(1)).unwrap();
        assert!((w - 6.0).abs() < 1e-10);
    }

    #[test]
    fn phi_homog_matches_materialized_power() {
        let mut rng = stream_rng(11, 0);
        let a = random_hamiltonian(2, 0.8, &mut rng);
        let path = SpPath::from_generator(&a, 24).unwrap();
        let l0 = LagrangianFrame::real(2);
        for p in [1, 3, 7] {
            let direct = phi_lag(&concat_power(&path, p).unwrap(), &l0).unwrap() / p as f64;
            let (fast, bound) = phi_homog(&path, p, &l0).unwrap();
            assert!((direct - fast).abs() < 1e-9);
            assert_eq!(bound, 4.0 / p as f64);
        }
    }

    #[test]
    fn full_rotation_has_phi_two() {
        let t = SpPath::rotation(1, 2.0 * PI, 32);
        let l0 = LagrangianFrame::real(1);
        for p in [1, 8, 64] {
            let (v, b) = phi_homog(&t, p, &l0).unwrap();
            assert!((v - 2.0).abs() < 1e-10);
            assert_eq!(b, 2.0 / p as f64);
        }
        let (v, _) = phi_homog(&SpPath::identity(1, 4), 5, &l0).unwrap();
        assert_eq!(v, 0.0);
        let (v, b) = phi_homog(&SpPath::rotation(1, PI / 3.0, 16), 64, &l0).unwrap();
        assert!((v - 1.0 / 3.0).abs() <= b);
    }

    #[test]
    fn inverse_and_composition() {
        let mut rng = stream_rng(12, 0);
        let path = SpPath::from_generator(&random_hamiltonian(1, 1.0, &mut rng), 32).unwrap();
        let ev = PhiEvaluator::new(LagrangianFrame::real(1));
        let inv = path.inverse();
        assert!(
            (inv.endpoint().matrix() - path.endpoint().inverse().matrix()).norm() < 1e-10
        );
        let round = ev.compose(&path, &inv).unwrap();
        assert!((round.endpoint().matrix() - DMatrix::identity(2, 2)).norm() < 1e-10);
        let h = ev.power_quotient(&path, 64).unwrap();
        let hi = ev.power_quotient(&inv, 64).unwrap();
        assert!((h + hi).abs() <= 2.0 * 2.0 / 64.0);
    }

    #[test]
    fn rejects_bad_paths() {
        let r = SpMatrix::rotation(1, 0.5);
        assert!(SpPath::new(vec![0.0, 1.0], vec![r.clone(), r.clone()]).is_err());
        let id = SpMatrix::identity(1);
        assert!(SpPath::new(vec![0.0, 0.0], vec![id.clone(), r.clone()]).is_err());
        assert!(SpPath::new(vec![0.0, 1.0], vec![id, r]).is_ok());
        let l = LagrangianFrame::real(2);
        assert!(phi_lag(&SpPath::identity(1, 3), &l).is_err());
    }
}
