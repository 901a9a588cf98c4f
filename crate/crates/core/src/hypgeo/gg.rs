//! The integrand `u(eta, f)(x)`: a 1-form integrated along the geodesic
//! from `x` to its image, and the resulting homogenized estimate.

use super::disk::{geodesic_point, DiskPoint};
use super::isotopy::{chart_to_disk, disk_to_chart, DiskIsotopy};
use crate::error::{Error, Result};
use crate::hamflow::{integrate_flow, Monomial};
use crate::numeric::gauss_legendre_on;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Gauss-Legendre nodes on each geodesic segment.
pub const GEODESIC_NODES: usize = 32;

/// `eta = a dx + b dy` with polynomial coefficients in the Poincare disk
/// coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OneFormSpec {
    Poly { a: Vec<Monomial>, b: Vec<Monomial> },
}

fn eval_poly(terms: &[Monomial], x: f64, y: f64) -> f64 {
    terms
        .iter()
        .map(|m| m.coef * x.powi(m.powers[0] as i32) * y.powi(m.powers[1] as i32))
        .sum()
}

impl OneFormSpec {
    pub fn validate(&self) -> Result<()> {
        let OneFormSpec::Poly { a, b } = self;
        for m in a.iter().chain(b) {
            if m.powers.len() != 2 || !m.coef.is_finite() {
                return Err(Error::validation(
                    "1-form monomials need a finite coefficient and two exponents",
                ));
            }
        }
        Ok(())
    }

    /// `(a, b)` at `z`.
    pub fn coefficients(&self, z: Complex64) -> (f64, f64) {
        let OneFormSpec::Poly { a, b } = self;
        (eval_poly(a, z.re, z.im), eval_poly(b, z.re, z.im))
    }

    /// `eta_z(dz)`.
    pub fn apply(&self, z: Complex64, dz: Complex64) -> f64 {
        let (a, b) = self.coefficients(z);
        a * dz.re + b * dz.im
    }

    /// Sup of the hyperbolic norm `|(a, b)| (1 - |z|^2) / 2` on the centered
    /// disk of Euclidean radius `r`, sampled on a polar grid.
    pub fn sup_norm(&self, r: f64) -> f64 {
        let mut best = 0.0f64;
        for i in 0..=64 {
            let rho = r * i as f64 / 64.0;
            for j in 0..128 {
                let z = Complex64::from_polar(rho, TAU * j as f64 / 128.0);
                let (a, b) = self.coefficients(z);
                best = best.max(a.hypot(b) * (1.0 - z.norm_sqr()) / 2.0);
            }
        }
        best
    }
}

/// `int eta` along the geodesic segment `a -> b`.
pub fn geodesic_integral(eta: &OneFormSpec, a: Complex64, b: Complex64) -> f64 {
    gauss_legendre_on(GEODESIC_NODES, 0.0, 1.0)
        .into_iter()
        .map(|(s, w)| {
            let (z, dz) = geodesic_point(a, b, s);
            w * eta.apply(z, dz)
        })
        .sum()
}

/// `int eta` along the geodesic from `x` to `f^p(x)`.
pub fn gg_u(eta: &OneFormSpec, iso: &DiskIsotopy, x: &DiskPoint, p: usize) -> Result<f64> {
    eta.validate()?;
    let z = x.z();
    if z.norm() >= iso.model_radius() {
        return Err(Error::validation("x must lie in U"));
    }
    let w = disk_to_chart(z);
    if iso.scenario().outside_support(&w) {
        return Ok(0.0);
    }
    let wp = integrate_flow(iso.scenario(), &w, p as f64)?;
    Ok(geodesic_integral(eta, z, chart_to_disk(&[wp[0], wp[1]])))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GgResult {
    pub value: f64,
    /// `gg_u / p`.
    pub phi_estimate: f64,
    /// `sup_U |eta| * diam_hyp(U)`, uniform in `p`.
    pub bound: f64,
    pub p: usize,
}

/// `gg_u` at `x` with its uniform bound and the homogenized value.
pub fn gg_estimate(eta: &OneFormSpec, iso: &DiskIsotopy, x: &DiskPoint, p: usize) -> Result<GgResult> {
    if p == 0 {
        return Err(Error::validation("p must be positive"));
    }
    let value = gg_u(eta, iso, x, p)?;
    let rho = iso.model_radius();
    Ok(GgResult {
        value,
        phi_estimate: value / p as f64,
        bound: eta.sup_norm(rho) * 4.0 * rho.atanh(),
        p,
    })
}
