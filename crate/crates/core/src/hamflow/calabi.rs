//! The Calabi invariant `int_B int_0^1 lambda(Z_t)(f_t x) dt nu` by tensor
//! quadrature over the ball and the time grid.

use super::field::{poly_eval, Monomial, MAX_DIM};
use super::integrate::{hamiltonian_vector, walk, Event};
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::harness::QmEvaluator;
use crate::numeric::{gauss_legendre_on, pairwise_sum, stream_rng};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// `lambda = sum (x_i dy_i - y_i dx_i)/2 + dG` for a polynomial `G`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveOneForm {
    #[serde(default)]
    pub exact: Vec<Monomial>,
}

impl PrimitiveOneForm {
    pub fn standard() -> Self {
        Self::default()
    }

    /// `lambda_x(v)`.
    pub fn apply(&self, x: &[f64], v: &[f64]) -> f64 {
        let d = x.len();
        let n = d / 2;
        let mut s = 0.0;
        for i in 0..n {
            s += 0.5 * (x[i] * v[i + n] - x[i + n] * v[i]);
        }
        if !self.exact.is_empty() {
            let mut g = [0.0; MAX_DIM];
            poly_eval(&self.exact, x, &mut g, None);
            s += (0..d).map(|i| g[i] * v[i]).sum::<f64>();
        }
        s
    }

    fn component(&self, x: &[f64], j: usize) -> f64 {
        let mut e = [0.0; MAX_DIM];
        e[j] = 1.0;
        self.apply(x, &e[..x.len()])
    }

    /// Largest `|d lambda(e_i, e_j) - nu(e_i, e_j)|` over `n_points` random
    /// points of the ball of `radius`, by central differences.
    pub fn check_exterior_derivative(
        &self,
        dim: usize,
        radius: f64,
        n_points: usize,
        seed: u64,
    ) -> Result<f64> {
        for m in &self.exact {
            if m.powers.len() != dim {
                return Err(Error::validation(format!(
                    "monomials of the exact part need {dim} exponents"
                )));
            }
        }
        let n = dim / 2;
        let h = 1e-5;
        let mut worst = 0.0f64;
        for k in 0..n_points {
            let mut rng = stream_rng(seed, k as u64);
            let x: Vec<f64> = (0..dim)
                .map(|_| radius * rng.random_range(-1.0..1.0) / (dim as f64).sqrt())
                .collect();
            for i in 0..dim {
                for j in (i + 1)..dim {
                    let partial = |a: usize, comp: usize| {
                        let mut xp = x.clone();
                        let mut xm = x.clone();
                        xp[a] += h;
                        xm[a] -= h;
                        (self.component(&xp, comp) - self.component(&xm, comp)) / (2.0 * h)
                    };
                    let dl = partial(i, j) - partial(j, i);
                    let nu = if j == i + n && i < n { 1.0 } else { 0.0 };
                    worst = worst.max((dl - nu).abs());
                }
            }
        }
        Ok(worst)
    }
}

/// Tensor rule over a ball: nested Gauss-Legendre in the radii of the
/// complex planes and uniform angles in each plane.
///
/// Without an explicit domain, stages sharing one support center get a
/// ball around that center (so the support boundary falls on the radial
/// rule's endpoint); anything else uses the centered ball of the
/// scenario's support radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallQuadrature {
    pub n_radial: usize,
    pub n_angular: usize,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
}

impl Default for BallQuadrature {
    fn default() -> Self {
        BallQuadrature {
            n_radial: 40,
            n_angular: 48,
            radius: None,
            center: None,
        }
    }
}

impl BallQuadrature {
    /// The integration ball for `sc`, checked to contain every stage
    /// support.
    pub fn domain(&self, sc: &Scenario) -> Result<(Vec<f64>, f64)> {
        let dim = sc.dim();
        let balls: Vec<(Vec<f64>, f64)> = sc.stages().iter().map(|s| s.support_ball()).collect();
        let shared = balls.first().map(|b| b.0.clone()).filter(|c0| {
            sc.stages().iter().all(|s| !s.is_conjugated()) && balls.iter().all(|b| &b.0 == c0)
        });
        let center = match (&self.center, shared) {
            (Some(c), _) => c.clone(),
            (None, Some(c)) => c,
            (None, None) => vec![0.0; dim],
        };
        if center.len() != dim {
            return Err(Error::validation(format!("quadrature center needs {dim} coordinates")));
        }
        let need = balls
            .iter()
            .map(|(c, r)| dist(c, &center) + r)
            .fold(0.0, f64::max);
        let radius = match (self.radius, self.center.is_none()) {
            (Some(r), _) => r,
            (None, true) if balls.iter().all(|b| b.0 == center) && !balls.is_empty() => need,
            (None, _) => sc.support_radius(),
        };
        if radius < need * (1.0 - 1e-12) {
            return Err(Error::validation(format!(
                "quadrature radius {radius} does not cover the support (needs {need})"
            )));
        }
        if dist(&center, &vec![0.0; dim]) + radius >= sc.ball_radius() {
            return Err(Error::validation("quadrature domain must stay inside the ball"));
        }
        Ok((center, radius))
    }

    /// Nodes and weights over the ball of `radius` around `center`.
    pub fn nodes(&self, center: &[f64], radius: f64) -> Vec<(Vec<f64>, f64)> {
        let dim = center.len();
        let n = dim / 2;
        let mut radial: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
        for _ in 0..n {
            let mut next = Vec::new();
            for (rs, w) in &radial {
                let used: f64 = rs.iter().map(|r| r * r).sum();
                let rmax = (radius * radius - used).max(0.0).sqrt();
                for (r, wr) in gauss_legendre_on(self.n_radial, 0.0, rmax) {
                    let mut v = rs.clone();
                    v.push(r);
                    next.push((v, w * wr * r));
                }
            }
            radial = next;
        }
        let m = self.n_angular;
        let dth = TAU / m as f64;
        let mut out = Vec::new();
        for (rs, w) in &radial {
            let mut idx = vec![0usize; n];
            loop {
                let mut x = vec![0.0; dim];
                for i in 0..n {
                    let th = (idx[i] as f64 + 0.5) * dth;
                    x[i] = center[i] + rs[i] * th.cos();
                    x[i + n] = center[i + n] + rs[i] * th.sin();
                }
                out.push((x, w * dth.powi(n as i32)));
                let mut k = 0;
                while k < n {
                    idx[k] += 1;
                    if idx[k] < m {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
        }
        out
    }
}

/// `int_0^1 lambda(Z_t)(f_t x) dt` along one trajectory (midpoint rule on
/// the step grid), summed over the stages.
pub fn action_along(sc: &Scenario, lambda: &PrimitiveOneForm, x: &[f64]) -> Result<f64> {
    let dim = sc.dim();
    let mut terms = Vec::new();
    walk(sc, x, 1, |ev| {
        if let Event::Step(info) = ev {
            let mut z = [0.0; MAX_DIM];
            hamiltonian_vector(dim, &info.grad_mid, &mut z);
            terms.push(info.dt * lambda.apply(&info.mid[..dim], &z[..dim]));
        }
        Ok(())
    })?;
    Ok(pairwise_sum(&terms))
}

pub fn calabi(sc: &Scenario, lambda: &PrimitiveOneForm, quad: &BallQuadrature) -> Result<f64> {
    let dim = sc.dim();
    if quad.n_radial == 0 || quad.n_angular == 0 {
        return Err(Error::validation("quadrature needs at least one node per direction"));
    }
    for m in &lambda.exact {
        if m.powers.len() != dim {
            return Err(Error::validation(format!(
                "monomials of the exact part need {dim} exponents"
            )));
        }
    }
    let (center, radius) = quad.domain(sc)?;
    let nodes = quad.nodes(&center, radius);
    let parts: Vec<f64> = nodes
        .par_iter()
        .enumerate()
        .map(|(i, (x, w))| {
            if sc.outside_support(x) {
                return Ok(0.0);
            }
            action_along(sc, lambda, x)
                .map(|a| w * a)
                .map_err(|e| Error::AtSample {
                    index: i,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&parts))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Calabi as a group homomorphism on scenarios of a fixed dimension.
#[derive(Debug, Clone)]
pub struct CalabiEvaluator {
    pub dim: usize,
    pub support_radius: f64,
    pub lambda: PrimitiveOneForm,
    pub quadrature: BallQuadrature,
}

impl QmEvaluator for CalabiEvaluator {
    type Element = Scenario;

    fn identity(&self) -> Scenario {
        Scenario::zero(self.dim, self.support_radius).expect("valid zero scenario")
    }

    fn compose(&self, x: &Scenario, y: &Scenario) -> Result<Scenario> {
        x.after(y)
    }

    fn evaluate(&self, x: &Scenario) -> Result<f64> {
        calabi(x, &self.lambda, &self.quadrature)
    }

    fn power(&self, x: &Scenario, p: u64) -> Result<Scenario> {
        Ok(x.power(p as usize))
    }

    fn homogenization_bound(&self, _p: u64) -> Option<f64> {
        Some(0.0)
    }

    fn inverse(&self, x: &Scenario) -> Option<Scenario> {
        Some(x.inverse())
    }
}
