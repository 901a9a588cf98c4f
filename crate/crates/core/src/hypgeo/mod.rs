//! Hyperbolic geometry for disk-supported isotopies of a closed surface of
//! genus `g >= 2`: Poincare disk primitives, boundary circle paths, the
//! fiber lift of an isotopy, the angle invariant and its integral.

mod circle;
mod disk;
mod gg;
mod isotopy;
mod lift;

pub use circle::{circle_index, CirclePath, CIRCLE_GUARD};
pub use disk::{
    geodesic_endpoint, geodesic_point, geodesic_transport, hyperbolic_distance,
    omega_area_of_radius, parallel_transport_rate, polygon_holonomy, radius_of_omega_area,
    triangle_area, DiskPoint, Mobius, UnitDirection, BOUNDARY_MARGIN,
};
pub use gg::{geodesic_integral, gg_estimate, gg_u, GgResult, OneFormSpec, GEODESIC_NODES};
pub use isotopy::{chart_to_disk, disk_to_chart, DiskIsotopy, DiskIsotopyJson};
pub use lift::{
    angle_estimate, cal_s_estimate, center_fiber_rotation, fiber_indices, is_outside,
    lift_index, theta_lift, AngleEvaluator, CalSEstimate, ThetaLift, DEFAULT_FIBERS,
};

use crate::error::{Error, Result};
use std::path::Path;

/// Reads and validates a disk isotopy file.
pub fn read_disk_isotopy(path: &Path) -> Result<DiskIsotopy> {
    let text = std::fs::read_to_string(path)?;
    let j: DiskIsotopyJson = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    DiskIsotopy::from_json(&j)
}
