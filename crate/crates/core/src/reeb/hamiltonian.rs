use super::field::MorseField;
use super::graph::{prune, trivalent_vertices, ReebGraph};
use super::mesh::SurfaceMesh;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Relative tolerance for breakpoint coverage and node continuity.
const GRAPH_TOL: f64 = 1e-9;
/// Tolerance of the level-constancy check when importing surface fields.
pub const IMPORT_TOL: f64 = 1e-6;

/// A function on a Reeb graph: on each edge, a piecewise-linear function
/// of the level parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphHamiltonian {
    edges: BTreeMap<usize, Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphHamiltonianJson {
    pub edges: Vec<EdgeFunctionJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeFunctionJson {
    pub id: usize,
    pub breakpoints: Vec<[f64; 2]>,
}

fn interp(bp: &[(f64, f64)], t: f64) -> f64 {
    if t <= bp[0].0 {
        return bp[0].1;
    }
    let last = bp[bp.len() - 1];
    if t >= last.0 {
        return last.1;
    }
    let i = bp.partition_point(|p| p.0 <= t);
    let (a, b) = (bp[i - 1], bp[i]);
    a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
}

impl GraphHamiltonian {
    pub fn new(edges: BTreeMap<usize, Vec<(f64, f64)>>) -> Result<Self> {
        for (id, bp) in &edges {
            if bp.is_empty() {
                return Err(Error::validation(format!("edge {id} has no breakpoints")));
            }
            if bp.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
                return Err(Error::validation(format!("edge {id} has non-finite breakpoints")));
            }
            if bp.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                return Err(Error::validation(format!(
                    "edge {id}: breakpoint levels must be strictly increasing"
                )));
            }
        }
        Ok(GraphHamiltonian { edges })
    }

    pub fn constant(g: &ReebGraph, c: f64) -> Self {
        Self::affine(g, c, 0.0)
    }

    /// `h = a + b t` on every edge.
    pub fn affine(g: &ReebGraph, a: f64, b: f64) -> Self {
        let edges = g
            .edges
            .iter()
            .map(|e| (e.id, vec![(e.t_lo, a + b * e.t_lo), (e.t_hi, a + b * e.t_hi)]))
            .collect();
        GraphHamiltonian { edges }
    }

    /// `h = profile(t)` on every edge, for a piecewise-linear profile given
    /// by breakpoints; constant beyond its first and last breakpoint.
    pub fn from_level_profile(g: &ReebGraph, profile: &[(f64, f64)]) -> Result<Self> {
        if profile.is_empty() || profile.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::validation(
                "profile needs strictly increasing breakpoints",
            ));
        }
        let mut edges = BTreeMap::new();
        for e in &g.edges {
            let mut bp = vec![(e.t_lo, interp(profile, e.t_lo))];
            bp.extend(profile.iter().copied().filter(|p| p.0 > e.t_lo && p.0 < e.t_hi));
            bp.push((e.t_hi, interp(profile, e.t_hi)));
            edges.insert(e.id, bp);
        }
        Ok(GraphHamiltonian { edges })
    }

    /// `alpha * h1 + beta * h2`, on the edges where both are defined.
    pub fn combine(alpha: f64, h1: &Self, beta: f64, h2: &Self) -> Self {
        let mut edges = BTreeMap::new();
        for (id, b1) in &h1.edges {
            let Some(b2) = h2.edges.get(id) else { continue };
            let mut ts: Vec<f64> = b1.iter().chain(b2).map(|p| p.0).collect();
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            let bp = ts
                .into_iter()
                .map(|t| (t, alpha * interp(b1, t) + beta * interp(b2, t)))
                .collect();
            edges.insert(*id, bp);
        }
        GraphHamiltonian { edges }
    }

    pub fn breakpoints(&self, edge: usize) -> Option<&[(f64, f64)]> {
        self.edges.get(&edge).map(Vec::as_slice)
    }

    pub fn eval(&self, edge: usize, t: f64) -> Option<f64> {
        self.edges.get(&edge).map(|bp| interp(bp, t))
    }

    /// Checks that every edge of `g` is covered over its full level range.
    pub fn check_covers(&self, g: &ReebGraph) -> Result<()> {
        for e in &g.edges {
            let bp = self.edges.get(&e.id).ok_or_else(|| {
                Error::validation(format!("Hamiltonian is missing on edge {}", e.id))
            })?;
            let tol = GRAPH_TOL * (1.0 + e.t_lo.abs().max(e.t_hi.abs()));
            if bp[0].0 > e.t_lo + tol || bp[bp.len() - 1].0 < e.t_hi - tol {
                return Err(Error::validation(format!(
                    "Hamiltonian on edge {} does not cover [{}, {}]",
                    e.id, e.t_lo, e.t_hi
                )));
            }
        }
        Ok(())
    }

    /// Value at a node, checking that all incident edges agree.
    pub fn node_value(&self, g: &ReebGraph, node: usize) -> Result<f64> {
        let mut value: Option<f64> = None;
        for e in &g.edges {
            let t = if e.lower == node {
                e.t_lo
            } else if e.upper == node {
                e.t_hi
            } else {
                continue;
            };
            let v = self.eval(e.id, t).ok_or_else(|| {
                Error::validation(format!("Hamiltonian is missing on edge {}", e.id))
            })?;
            match value {
                None => value = Some(v),
                Some(w) if (v - w).abs() <= GRAPH_TOL * (1.0 + v.abs().max(w.abs())) => {}
                Some(w) => {
                    return Err(Error::validation(format!(
                        "Hamiltonian is discontinuous at node {node}: {w} vs {v}"
                    )))
                }
            }
        }
        value.ok_or_else(|| Error::validation(format!("node {node} has no incident edge")))
    }

    pub fn to_json(&self) -> GraphHamiltonianJson {
        GraphHamiltonianJson {
            edges: self
                .edges
                .iter()
                .map(|(id, bp)| EdgeFunctionJson {
                    id: *id,
                    breakpoints: bp.iter().map(|p| [p.0, p.1]).collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: GraphHamiltonianJson) -> Result<Self> {
        let mut edges = BTreeMap::new();
        for e in j.edges {
            let bp = e.breakpoints.iter().map(|p| (p[0], p[1])).collect();
            if edges.insert(e.id, bp).is_some() {
                return Err(Error::validation(format!("edge {} listed twice", e.id)));
            }
        }
        Self::new(edges)
    }
}

/// `sum over edges of the integral of h(t) * density(t) dt`, exact for
/// piecewise-linear data (Simpson's rule on every piece where both
/// factors are linear).
pub fn graph_integral(g: &ReebGraph, h: &GraphHamiltonian) -> Result<f64> {
    h.check_covers(g)?;
    let mut parts = Vec::with_capacity(g.edges.len());
    for e in &g.edges {
        let bp = &h.edges[&e.id];
        let mut acc = Vec::new();
        for w in e.density.windows(2) {
            let ((ta, da), (tb, db)) = (w[0], w[1]);
            if tb <= ta {
                continue;
            }
            let slope = (db - da) / (tb - ta);
            let mut cuts = vec![ta];
            let i0 = bp.partition_point(|p| p.0 <= ta);
            cuts.extend(bp[i0..].iter().map(|p| p.0).take_while(|&t| t < tb));
            cuts.push(tb);
            for c in cuts.windows(2) {
                let (u, v) = (c[0], c[1]);
                let m = 0.5 * (u + v);
                let p = |t: f64| interp(bp, t) * (da + slope * (t - ta));
                acc.push((v - u) / 6.0 * (p(u) + 4.0 * p(m) + p(v)));
            }
        }
        parts.push(crate::numeric::pairwise_sum(&acc));
    }
    Ok(crate::numeric::pairwise_sum(&parts))
}

/// `integral of H - sum of H over the trivalent nodes of the pruned
/// graph`. Requires total area `2g - 2`.
pub fn theorem2_value(g: &ReebGraph, h: &GraphHamiltonian) -> Result<f64> {
    if g.genus < 2 {
        return Err(Error::validation(format!(
            "the trivalent formula needs genus >= 2, got {}",
            g.genus
        )));
    }
    let target = 2.0 * g.genus as f64 - 2.0;
    let total = g.total_measure();
    if (total - target).abs() > GRAPH_TOL * target {
        return Err(Error::validation(format!(
            "total area is {total}, expected 2g - 2 = {target}; normalize the mesh first"
        )));
    }
    let integral = graph_integral(g, h)?;
    let pruned = prune(g)?;
    let nodes = trivalent_vertices(&pruned)?;
    let vals = nodes
        .iter()
        .map(|&v| h.node_value(g, v))
        .collect::<Result<Vec<f64>>>()?;
    Ok(integral - crate::numeric::pairwise_sum(&vals))
}

/// Converts a per-vertex surface field that is constant on level sets of
/// `field` into a function on the Reeb graph.
///
/// Level-constancy is checked triangle by triangle: the three points
/// `(f, H)` at the corners must be collinear within [`IMPORT_TOL`].
pub fn import_surface_field(
    mesh: &SurfaceMesh,
    field: &MorseField,
    g: &ReebGraph,
    values: &[f64],
) -> Result<GraphHamiltonian> {
    if values.len() != mesh.vertices().len() {
        return Err(Error::validation("one surface value per vertex is required"));
    }
    let f = field.effective();
    let scale = 1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (k, t) in mesh.triangles().iter().enumerate() {
        let mut c: Vec<(f64, f64)> = t.iter().map(|&v| (f[v], values[v])).collect();
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
        let lam = (c[1].0 - c[0].0) / (c[2].0 - c[0].0);
        let predicted = c[0].1 + lam * (c[2].1 - c[0].1);
        if (predicted - c[1].1).abs() > IMPORT_TOL * scale {
            return Err(Error::validation(format!(
                "surface field is not constant on level sets (triangle {k})"
            )));
        }
    }
    let mut edges = BTreeMap::new();
    for e in &g.edges {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for &k in &e.triangles {
            for &v in &mesh.triangles()[k] {
                if f[v] >= e.t_lo && f[v] <= e.t_hi && seen.insert(v) {
                    pts.push((f[v], values[v]));
                }
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|b, a| b.0 == a.0);
        edges.insert(e.id, pts);
    }
    let h = GraphHamiltonian::new(edges)?;
    h.check_covers(g)?;
    Ok(h)
}
