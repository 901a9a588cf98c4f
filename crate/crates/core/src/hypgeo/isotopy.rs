//! Disk-supported isotopies of a genus-`g` surface.
//!
//! The disk `U` is the centered hyperbolic disk of `omega`-area `A_U` in
//! the Poincare model, with `omega = dA_hyp / (2 pi)`. Scenarios are
//! written in Darboux coordinates `w` (standard area form) on the
//! Euclidean disk of area `A_U`, and placed in the model by the radial
//! area-preserving map `psi(w) = w sqrt(pi / (2 + pi |w|^2))`.

use super::disk::radius_of_omega_area;
use crate::error::{Error, Result};
use crate::hamflow::{BallQuadrature, Scenario, ScenarioJson};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskIsotopyJson {
    pub scenario: ScenarioJson,
    pub genus: u32,
    pub disk_area: f64,
}

#[derive(Debug, Clone)]
pub struct DiskIsotopy {
    scenario: Scenario,
    genus: u32,
    disk_area: f64,
    /// `int F nu` for each stage's spatial factor.
    stage_integrals: Vec<f64>,
}

/// `psi`: Darboux coordinates to the Poincare disk.
pub fn chart_to_disk(w: &[f64]) -> Complex64 {
    let s = (PI / (2.0 + PI * (w[0] * w[0] + w[1] * w[1]))).sqrt();
    Complex64::new(w[0] * s, w[1] * s)
}

/// Inverse of [`chart_to_disk`].
pub fn disk_to_chart(z: Complex64) -> [f64; 2] {
    let s = (2.0 / (PI * (1.0 - z.norm_sqr()))).sqrt();
    [z.re * s, z.im * s]
}

impl DiskIsotopy {
    pub fn new(scenario: Scenario, genus: u32, disk_area: f64) -> Result<DiskIsotopy> {
        if genus < 2 {
            return Err(Error::validation(format!("genus must be at least 2, got {genus}")));
        }
        let total = 2.0 * genus as f64 - 2.0;
        if !(disk_area > 0.0 && disk_area < total) {
            return Err(Error::validation(format!(
                "disk area must lie in (0, {total}), got {disk_area}"
            )));
        }
        if scenario.dim() != 2 {
            return Err(Error::validation("disk isotopies are two-dimensional"));
        }
        let r_u = (disk_area / PI).sqrt();
        for (k, s) in scenario.stages().iter().enumerate() {
            if s.support_bound() >= r_u {
                return Err(Error::validation(format!(
                    "stage {k} support reaches radius {} but U has radius {r_u} in chart coordinates",
                    s.support_bound()
                )));
            }
        }
        let quad = BallQuadrature {
            n_radial: 64,
            n_angular: 64,
            radius: None,
            center: None,
        };
        let stage_integrals = scenario
            .stages()
            .iter()
            .map(|s| {
                let f = s.field();
                quad.nodes(f.center(), f.radius())
                    .iter()
                    .map(|(x, w)| w * f.value(x))
                    .sum()
            })
            .collect();
        Ok(DiskIsotopy {
            scenario,
            genus,
            disk_area,
            stage_integrals,
        })
    }

    pub fn from_json(j: &DiskIsotopyJson) -> Result<DiskIsotopy> {
        DiskIsotopy::new(Scenario::from_json(&j.scenario)?, j.genus, j.disk_area)
    }

    pub fn to_json(&self) -> DiskIsotopyJson {
        DiskIsotopyJson {
            scenario: self.scenario.to_json(),
            genus: self.genus,
            disk_area: self.disk_area,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn disk_area(&self) -> f64 {
        self.disk_area
    }

    /// `2g - 2`.
    pub fn surface_area(&self) -> f64 {
        2.0 * self.genus as f64 - 2.0
    }

    /// Radius of `U` in Darboux coordinates.
    pub fn chart_radius(&self) -> f64 {
        (self.disk_area / PI).sqrt()
    }

    /// Euclidean radius of `U` in the Poincare model.
    pub fn model_radius(&self) -> f64 {
        radius_of_omega_area(self.disk_area)
    }

    /// `int_U H_t omega` during `stage` at stage time `t`.
    pub fn mass(&self, stage: usize, t: f64) -> f64 {
        self.scenario.stages()[stage].time_factor(t) * self.stage_integrals[stage]
    }

    /// The constant `c_t = -int_U H_t omega / (2g - 2)` making `H + c_t`
    /// mean-zero on the surface.
    pub fn correction(&self, stage: usize, t: f64) -> f64 {
        -self.mass(stage, t) / self.surface_area()
    }

    /// `int c_t dt` over one stage.
    pub fn stage_correction_integral(&self, stage: usize) -> f64 {
        -self.scenario.stages()[stage].time_integral() * self.stage_integrals[stage]
            / self.surface_area()
    }

    /// `int_0^1 c_t dt` over the whole isotopy.
    pub fn mean_correction(&self) -> f64 {
        (0..self.scenario.stages().len())
            .map(|s| self.stage_correction_integral(s))
            .sum()
    }

    /// `f o g` on the same surface.
    pub fn after(&self, g: &DiskIsotopy) -> Result<DiskIsotopy> {
        if self.genus != g.genus || self.disk_area != g.disk_area {
            return Err(Error::validation("isotopies live on different surfaces"));
        }
        DiskIsotopy::new(self.scenario.after(&g.scenario)?, self.genus, self.disk_area)
    }

    pub fn power(&self, k: usize) -> DiskIsotopy {
        DiskIsotopy {
            scenario: self.scenario.power(k),
            stage_integrals: (0..k).flat_map(|_| self.stage_integrals.iter().copied()).collect(),
            ..self.clone()
        }
    }

    pub fn inverse(&self) -> DiskIsotopy {
        DiskIsotopy {
            scenario: self.scenario.inverse(),
            stage_integrals: self.stage_integrals.iter().rev().copied().collect(),
            ..self.clone()
        }
    }

    pub fn identity(genus: u32, disk_area: f64) -> Result<DiskIsotopy> {
        let r = (disk_area / PI).sqrt();
        DiskIsotopy::new(Scenario::zero(2, 0.5 * r)?, genus, disk_area)
    }
}
