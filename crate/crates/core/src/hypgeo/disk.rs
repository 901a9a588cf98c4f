//! Poincare disk model: metric `4|dz|^2/(1-|z|^2)^2`, curvature -1.

use crate::error::{Error, Result};
use crate::numeric::gauss_legendre_on;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Points closer than this to the boundary circle are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint {
    z: Complex64,
}

impl DiskPoint {
    pub fn new(z: Complex64) -> Result<DiskPoint> {
        if !z.re.is_finite() || !z.im.is_finite() || z.norm() >= 1.0 - BOUNDARY_MARGIN {
            return Err(Error::validation(format!("{z} is not inside the unit disk")));
        }
        Ok(DiskPoint { z })
    }

    pub fn from_xy(x: f64, y: f64) -> Result<DiskPoint> {
        Self::new(Complex64::new(x, y))
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }
}

/// A unit tangent direction; `angle` is measured in the flat chart frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitDirection {
    pub base: DiskPoint,
    pub angle: f64,
}

/// Disk automorphism `z -> e^{i rot} (z - a) / (1 - conj(a) z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub a: Complex64,
    pub rot: f64,
}

impl Mobius {
    pub fn new(a: Complex64, rot: f64) -> Result<Mobius> {
        DiskPoint::new(a)?;
        Ok(Mobius { a, rot })
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        Complex64::from_polar(1.0, self.rot) * (z - self.a) / (1.0 - self.a.conj() * z)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let d = 1.0 - self.a.conj() * z;
        Complex64::from_polar(1.0, self.rot) * (1.0 - self.a.norm_sqr()) / (d * d)
    }

    /// Image of a unit direction; the angle changes by `arg g'(z)`.
    pub fn apply_direction(&self, v: &UnitDirection) -> Result<UnitDirection> {
        let z = v.base.z();
        Ok(UnitDirection {
            base: DiskPoint::new(self.apply(z))?,
            angle: v.angle + self.derivative(z).arg(),
        })
    }

    /// Boundary angle of `g(e^{i t})`.
    pub fn apply_boundary(&self, t: f64) -> f64 {
        self.apply(Complex64::from_polar(1.0, t)).arg()
    }
}

/// Boundary angle (radians in `(-pi, pi]`) of the geodesic ray leaving
/// `v.base` in direction `v.angle`. The map `u -> (u - z)/(1 - conj(z) u)`
/// sends the base to 0 with positive real derivative, so the ray becomes
/// the radius at the same angle.
pub fn geodesic_endpoint(v: &UnitDirection) -> f64 {
    let z = v.base.z();
    let e = Complex64::from_polar(1.0, v.angle);
    ((e + z) / (1.0 + z.conj() * e)).arg()
}

/// Point at parameter `s` in `[0, 1]` on the geodesic from `a` to `b`, and
/// its derivative in `s`.
pub fn geodesic_point(a: Complex64, b: Complex64, s: f64) -> (Complex64, Complex64) {
    let bp = (b - a) / (1.0 - a.conj() * b);
    let u = bp * s;
    let den = 1.0 + a.conj() * u;
    let z = (u + a) / den;
    let dz = bp * (1.0 - a.norm_sqr()) / (den * den);
    (z, dz)
}

pub fn hyperbolic_distance(a: Complex64, b: Complex64) -> f64 {
    let r = ((b - a) / (1.0 - a.conj() * b)).norm();
    2.0 * r.atanh()
}

/// Chart-frame rotation rate (radians per unit time) of a parallel vector
/// field along a curve through `z` with velocity `dz`. For the conformal
/// factor `e^{2 s}` the rate is `s_y x' - s_x y'`.
pub fn parallel_transport_rate(z: Complex64, dz: Complex64) -> f64 {
    2.0 * (z.im * dz.re - z.re * dz.im) / (1.0 - z.norm_sqr())
}

/// Total parallel-transport rotation along the geodesic segment `a -> b`.
pub fn geodesic_transport(a: Complex64, b: Complex64, nodes: usize) -> f64 {
    gauss_legendre_on(nodes, 0.0, 1.0)
        .into_iter()
        .map(|(s, w)| {
            let (z, dz) = geodesic_point(a, b, s);
            w * parallel_transport_rate(z, dz)
        })
        .sum()
}

/// Rotation of a parallel vector carried once around the geodesic polygon
/// through `vertices` (in order).
pub fn polygon_holonomy(vertices: &[DiskPoint], nodes: usize) -> f64 {
    let k = vertices.len();
    (0..k)
        .map(|i| geodesic_transport(vertices[i].z(), vertices[(i + 1) % k].z(), nodes))
        .sum()
}

/// Hyperbolic area of a geodesic triangle from its interior angles.
pub fn triangle_area(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    // direction at p of the geodesic towards q
    let dir = |p: Complex64, q: Complex64| ((q - p) / (1.0 - p.conj() * q)).arg();
    let corner = |p: Complex64, q: Complex64, r: Complex64| {
        let d = (dir(p, q) - dir(p, r)).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    };
    PI - corner(a, b, c) - corner(b, c, a) - corner(c, a, b)
}

/// `omega`-area (hyperbolic area over `2 pi`) of the centered disk of
/// Euclidean radius `r`.
pub fn omega_area_of_radius(r: f64) -> f64 {
    2.0 * r * r / (1.0 - r * r)
}

/// Euclidean radius of the centered disk of `omega`-area `a`.
pub fn radius_of_omega_area(a: f64) -> f64 {
    (a / (2.0 + a)).sqrt()
}
