//! Fixtures shared by the benchmarks.

use qmlab_core::hamflow::{FieldSpec, Profile, Scenario, ScenarioJson};
use qmlab_core::hypgeo::{DiskIsotopy, DiskIsotopyJson};

/// Radial bump of the given amplitude, supported in the disk of radius 0.6.
pub fn radial_scenario(amplitude: f64, dt: f64) -> Scenario {
    Scenario::from_json(&radial_json(amplitude, 0.5, 0.6, dt)).expect("valid scenario")
}

fn radial_json(amplitude: f64, radius: f64, support: f64, dt: f64) -> ScenarioJson {
    ScenarioJson {
        dim: 2,
        form: "standard".into(),
        h: Some(FieldSpec::Radial {
            center: vec![0.0, 0.0],
            amplitude,
            radius,
            profile: Profile::Smooth,
        }),
        time: None,
        stages: None,
        support_radius: support,
        ball_radius: Some(0.8),
        dt: Some(dt),
    }
}

/// Genus-2 disk isotopy around a radial bump.
pub fn genus2_isotopy(dt: f64) -> DiskIsotopy {
    DiskIsotopy::from_json(&DiskIsotopyJson {
        scenario: radial_json(2.0, 0.5, 0.55, dt),
        genus: 2,
        disk_area: 1.0,
    })
    .expect("valid isotopy")
}
