//! Hand-built test surfaces and random Morse functions on them.

use super::field::MorseField;
use super::mesh::SurfaceMesh;
use crate::error::{Error, Result};
use crate::numeric::stream_rng;
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::HashMap;
use std::f64::consts::TAU;

/// Unit sphere from a subdivided icosahedron.
pub fn icosphere(subdivisions: usize) -> SurfaceMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]);
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(tris.len() * 4);
        for t in &tris {
            let a = mid(t[0], t[1], &mut verts);
            let b = mid(t[1], t[2], &mut verts);
            let c = mid(t[2], t[0], &mut verts);
            next.push([t[0], a, c]);
            next.push([t[1], b, a]);
            next.push([t[2], c, b]);
            next.push([a, b, c]);
        }
        tris = next;
    }
    for v in verts.iter_mut() {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        for x in v.iter_mut() {
            *x /= r;
        }
    }
    SurfaceMesh::new(verts, tris).expect("icosphere is a valid closed surface")
}

/// A torus standing upright: the core circle lies in the `x z` plane, so
/// the height `z` has one minimum, two saddles and one maximum.
pub fn standing_torus(major: f64, minor: f64, n_major: usize, n_minor: usize) -> SurfaceMesh {
    let mut verts = Vec::with_capacity(n_major * n_minor);
    for i in 0..n_major {
        // offset keeps the extreme heights off grid symmetry lines
        let th = TAU * (i as f64 + 0.25) / n_major as f64;
        for j in 0..n_minor {
            let ph = TAU * j as f64 / n_minor as f64;
            let rr = major + minor * ph.cos();
            verts.push([rr * th.cos(), minor * ph.sin(), rr * th.sin()]);
        }
    }
    let id = |i: usize, j: usize| (i % n_major) * n_minor + (j % n_minor);
    let mut tris = Vec::with_capacity(2 * n_major * n_minor);
    for i in 0..n_major {
        for j in 0..n_minor {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    SurfaceMesh::new(verts, tris).expect("torus grid is a valid closed surface")
}

/// Boundary of a one-voxel-thick `nx x ny` plate with the listed voxel
/// columns removed, each face split into `sub x sub` squares. Each hole
/// adds one to the genus. The plate is centred at the origin.
pub fn voxel_plate(nx: usize, ny: usize, holes: &[(usize, usize)], sub: usize) -> Result<SurfaceMesh> {
    if holes.iter().any(|&(i, j)| i == 0 || j == 0 || i + 1 >= nx || j + 1 >= ny) {
        return Err(Error::validation("holes must be interior voxels"));
    }
    let filled = |i: i64, j: i64, k: i64| -> bool {
        k == 0
            && i >= 0
            && j >= 0
            && (i as usize) < nx
            && (j as usize) < ny
            && !holes.contains(&(i as usize, j as usize))
    };
    let s = sub.max(1) as i64;
    let mut index: HashMap<[i64; 3], usize> = HashMap::new();
    let mut verts: Vec<[f64; 3]> = Vec::new();
    let center = [nx as f64 / 2.0, ny as f64 / 2.0, 0.5];
    let mut vid = |p: [i64; 3], verts: &mut Vec<[f64; 3]>| -> usize {
        *index.entry(p).or_insert_with(|| {
            verts.push([
                p[0] as f64 / s as f64 - center[0],
                p[1] as f64 / s as f64 - center[1],
                p[2] as f64 / s as f64 - center[2],
            ]);
            verts.len() - 1
        })
    };
    let mut tris = Vec::new();
    for i in 0..nx as i64 {
        for j in 0..ny as i64 {
            if !filled(i, j, 0) {
                continue;
            }
            let cell = [i, j, 0i64];
            for axis in 0..3 {
                for sign in [-1i64, 1] {
                    let mut nb = cell;
                    nb[axis] += sign;
                    if filled(nb[0], nb[1], nb[2]) {
                        continue;
                    }
                    let u = (axis + 1) % 3;
                    let v = (axis + 2) % 3;
                    let mut base = [cell[0] * s, cell[1] * s, cell[2] * s];
                    if sign > 0 {
                        base[axis] += s;
                    }
                    let at = |p: i64, q: i64| {
                        let mut x = base;
                        x[u] += p;
                        x[v] += q;
                        x
                    };
                    for p in 0..s {
                        for q in 0..s {
                            let a = vid(at(p, q), &mut verts);
                            let b = vid(at(p + 1, q), &mut verts);
                            let c = vid(at(p + 1, q + 1), &mut verts);
                            let d = vid(at(p, q + 1), &mut verts);
                            if sign > 0 {
                                tris.push([a, b, c]);
                                tris.push([a, c, d]);
                            } else {
                                tris.push([a, c, b]);
                                tris.push([a, d, c]);
                            }
                        }
                    }
                }
            }
        }
    }
    SurfaceMesh::new(verts, tris)
}

/// Genus-two plate with its holes in series along `x`.
pub fn genus2_plate() -> SurfaceMesh {
    voxel_plate(7, 3, &[(2, 1), (4, 1)], 2).expect("valid plate")
}

/// Genus-three plate with its holes in series along `x`.
pub fn genus3_plate() -> SurfaceMesh {
    voxel_plate(9, 3, &[(2, 1), (4, 1), (6, 1)], 2).expect("valid plate")
}

/// The linear function `d . p` at every vertex.
pub fn linear_field(mesh: &SurfaceMesh, d: [f64; 3]) -> MorseField {
    let vals = mesh
        .vertices()
        .iter()
        .map(|p| d[0] * p[0] + d[1] * p[1] + d[2] * p[2])
        .collect();
    MorseField::new(vals).expect("finite values")
}

/// Height along `x` with a small generic tilt.
pub fn tilted_height(mesh: &SurfaceMesh) -> MorseField {
    linear_field(mesh, [1.0, 1e-3, 1e-6])
}

/// A random linear function plus Gaussian vertex noise of the given
/// relative size. Draws whose PL critical points include a degenerate
/// saddle are rejected; the attempt index is folded into the random
/// stream so the result depends only on `seed`.
pub fn random_morse_field(mesh: &SurfaceMesh, seed: u64, noise: f64) -> Result<MorseField> {
    for attempt in 0..1000u64 {
        let mut rng = stream_rng(seed, attempt);
        let mut d = [0.0f64; 3];
        for x in d.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let vals: Vec<f64> = mesh
            .vertices()
            .iter()
            .map(|p| {
                let e: f64 = rng.sample(StandardNormal);
                (d[0] * p[0] + d[1] * p[1] + d[2] * p[2]) / norm + noise * e
            })
            .collect();
        let field = MorseField::new(vals)?;
        if field.critical_points(mesh).is_ok() {
            return Ok(field);
        }
    }
    Err(Error::validation(
        "no non-degenerate random field found in 1000 attempts",
    ))
}
