use super::field::{MorseField, VertexKind};
use super::mesh::{SurfaceMesh, UnionFind};
use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReebNode {
    pub id: usize,
    /// Mesh vertex realizing the node.
    pub vertex: usize,
    /// Tie-broken value; equals the raw value unless ties were broken.
    pub value: f64,
    pub kind: VertexKind,
    pub degree: usize,
}

/// An edge `a- -> a+` with `value(a-) < value(a+)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReebEdge {
    pub id: usize,
    pub lower: usize,
    pub upper: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    /// Area per unit level as a piecewise-linear function: `(t, density)`
    /// breakpoints in increasing `t`. Repeated `t` marks a jump.
    pub density: Vec<(f64, f64)>,
    pub measure: f64,
    /// Triangles whose area contributes to this edge.
    pub triangles: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReebGraph {
    pub genus: usize,
    pub nodes: Vec<ReebNode>,
    pub edges: Vec<ReebEdge>,
    /// Ids of nodes removed by pruning.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub removed_nodes: Vec<usize>,
}

impl ReebGraph {
    /// `sum over live nodes of (2 - degree)`.
    pub fn euler_sum(&self) -> i64 {
        self.live_nodes().map(|n| 2 - n.degree as i64).sum()
    }

    pub fn live_nodes(&self) -> impl Iterator<Item = &ReebNode> {
        self.nodes
            .iter()
            .filter(move |n| !self.removed_nodes.contains(&n.id))
    }

    pub fn node(&self, id: usize) -> Option<&ReebNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn edge(&self, id: usize) -> Option<&ReebEdge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn total_measure(&self) -> f64 {
        let m: Vec<f64> = self.edges.iter().map(|e| e.measure).collect();
        crate::numeric::pairwise_sum(&m)
    }

    pub fn count_kind(&self, kind: VertexKind) -> usize {
        self.live_nodes().filter(|n| n.kind == kind).count()
    }

    fn recompute_degrees(&mut self) {
        for n in self.nodes.iter_mut() {
            n.degree = 0;
        }
        for e in &self.edges {
            for id in [e.lower, e.upper] {
                if let Some(n) = self.nodes.iter_mut().find(|n| n.id == id) {
                    n.degree += 1;
                }
            }
        }
    }
}

/// Pushforward of the area of one triangle to the level line: a hat
/// function with peak `2A / (f2 - f0)` at `f1`.
#[derive(Debug, Clone, Copy)]
struct Hat {
    f: [f64; 3],
    peak: f64,
}

impl Hat {
    fn new(mut f: [f64; 3], area: f64) -> Hat {
        f.sort_by(f64::total_cmp);
        Hat {
            f,
            peak: 2.0 * area / (f[2] - f[0]),
        }
    }

    fn at(&self, t: f64) -> f64 {
        let [f0, f1, f2] = self.f;
        if t <= f0 || t >= f2 {
            0.0
        } else if t <= f1 {
            self.peak * (t - f0) / (f1 - f0)
        } else {
            self.peak * (f2 - t) / (f2 - f1)
        }
    }
}

/// A connected component of `f^{-1}(c_k, c_{k+1})`.
#[derive(Debug, Clone)]
struct Arc {
    interval: usize,
    triangles: Vec<usize>,
    down: Link,
    up: Link,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Link {
    Unset,
    Node(usize),
    Arc(usize),
}

struct Sweep<'a> {
    mesh: &'a SurfaceMesh,
    f: &'a [f64],
    tri_range: Vec<(f64, f64)>,
}

impl Sweep<'_> {
    /// Components of the part of the surface with `lo < f < hi`, as a
    /// component label per triangle.
    fn slab_components(&self, lo: f64, hi: f64) -> Vec<Option<usize>> {
        let nt = self.tri_range.len();
        let meets = |r: (f64, f64)| r.0 < hi && r.1 > lo;
        let mut uf = UnionFind::new(nt);
        for e in self.mesh.edges() {
            let (fa, fb) = (self.f[e.a], self.f[e.b]);
            if meets((fa.min(fb), fa.max(fb))) {
                uf.union(e.triangles[0], e.triangles[1]);
            }
        }
        let mut label = vec![None; nt];
        let mut root_label: Vec<Option<usize>> = vec![None; nt];
        let mut next = 0;
        for t in 0..nt {
            if !meets(self.tri_range[t]) {
                continue;
            }
            let r = uf.find(t);
            let l = *root_label[r].get_or_insert_with(|| {
                next += 1;
                next - 1
            });
            label[t] = Some(l);
        }
        label
    }
}

/// Reeb graph of a PL function by a sweep over critical values.
///
/// Between consecutive critical values the level components are the
/// connected components of the open slab, found by union-find on
/// triangles glued along edges that meet the slab. Across each critical
/// value the slab reaching to both neighbouring critical values contains
/// one singular component (attached to the new node) and regular
/// cylinders that continue an arc from below to one above.
pub fn build_reeb(mesh: &SurfaceMesh, field: &MorseField) -> Result<ReebGraph> {
    let crit = field.critical_points(mesh)?;
    let f = field.effective();
    let tri_range: Vec<(f64, f64)> = mesh
        .triangles()
        .iter()
        .map(|t| {
            let v = [f[t[0]], f[t[1]], f[t[2]]];
            (v[0].min(v[1]).min(v[2]), v[0].max(v[1]).max(v[2]))
        })
        .collect();
    let sweep = Sweep { mesh, f, tri_range };
    let levels: Vec<f64> = crit.iter().map(|&(v, _)| f[v]).collect();
    let nc = crit.len();
    if nc < 2 {
        return Err(Error::Invariant(
            "a function on a closed surface has at least two critical points".into(),
        ));
    }

    // arcs per interval (c_k, c_{k+1})
    let mut arcs: Vec<Arc> = Vec::new();
    let mut arcs_in: Vec<Vec<usize>> = vec![Vec::new(); nc - 1];
    for k in 0..nc - 1 {
        let label = sweep.slab_components(levels[k], levels[k + 1]);
        let count = label.iter().flatten().max().map_or(0, |m| m + 1);
        let first = arcs.len();
        for _ in 0..count {
            arcs_in[k].push(arcs.len());
            arcs.push(Arc {
                interval: k,
                triangles: Vec::new(),
                down: Link::Unset,
                up: Link::Unset,
            });
        }
        for (t, l) in label.iter().enumerate() {
            if let Some(l) = l {
                arcs[first + l].triangles.push(t);
            }
        }
    }

    let mut nodes = Vec::with_capacity(nc);
    for (i, &(v, kind)) in crit.iter().enumerate() {
        let lo = if i == 0 { f64::NEG_INFINITY } else { levels[i - 1] };
        let hi = if i + 1 == nc { f64::INFINITY } else { levels[i + 1] };
        let label = sweep.slab_components(lo, hi);
        let singular = label[mesh.star(v)[0]].expect("star of a vertex meets its slab");
        let below: &[usize] = if i == 0 { &[] } else { &arcs_in[i - 1] };
        let above: &[usize] = if i + 1 == nc { &[] } else { &arcs_in[i] };
        let mut pending_below: Vec<(usize, usize)> = Vec::new();
        let mut degree = 0;
        for &a in below {
            let c = label[arcs[a].triangles[0]].expect("arc meets the wider slab");
            if c == singular {
                arcs[a].up = Link::Node(i);
                degree += 1;
            } else {
                pending_below.push((c, a));
            }
        }
        for &a in above {
            let c = label[arcs[a].triangles[0]].expect("arc meets the wider slab");
            if c == singular {
                arcs[a].down = Link::Node(i);
                degree += 1;
            } else {
                let pos = pending_below.iter().position(|&(cb, _)| cb == c).ok_or_else(|| {
                    Error::Invariant(format!("regular cylinder at level {i} has no lower arc"))
                })?;
                let (_, b) = pending_below.swap_remove(pos);
                arcs[b].up = Link::Arc(a);
                arcs[a].down = Link::Arc(b);
            }
        }
        if !pending_below.is_empty() {
            return Err(Error::Invariant(format!(
                "regular cylinder at level {i} has no upper arc"
            )));
        }
        let expected = match kind {
            VertexKind::Saddle => 3,
            _ => 1,
        };
        if degree != expected {
            return Err(Error::Invariant(format!(
                "critical vertex {v} ({kind:?}) has {degree} incident level components"
            )));
        }
        nodes.push(ReebNode {
            id: i,
            vertex: v,
            value: f[v],
            kind,
            degree,
        });
    }

    let areas = mesh.area_weights();
    let hats: Vec<Hat> = mesh
        .triangles()
        .iter()
        .zip(areas)
        .map(|(t, &a)| Hat::new([f[t[0]], f[t[1]], f[t[2]]], a))
        .collect();

    let mut edges = Vec::new();
    for start in 0..arcs.len() {
        let lower = match arcs[start].down {
            Link::Node(n) => n,
            _ => continue,
        };
        let mut chain = vec![start];
        let upper = loop {
            match arcs[*chain.last().expect("nonempty")].up {
                Link::Node(n) => break n,
                Link::Arc(a) => chain.push(a),
                Link::Unset => {
                    return Err(Error::Invariant("arc with a dangling upper end".into()))
                }
            }
        };
        let mut density: Vec<(f64, f64)> = Vec::new();
        let mut triangles: Vec<usize> = Vec::new();
        for &a in &chain {
            let k = arcs[a].interval;
            density.extend(arc_density(&arcs[a].triangles, &hats, levels[k], levels[k + 1]));
            triangles.extend_from_slice(&arcs[a].triangles);
        }
        triangles.sort_unstable();
        triangles.dedup();
        let measure = density_integral(&density);
        edges.push(ReebEdge {
            id: 0,
            lower,
            upper,
            t_lo: nodes[lower].value,
            t_hi: nodes[upper].value,
            density,
            measure,
            triangles,
        });
    }
    edges.sort_by(|a, b| {
        (a.lower, a.upper, a.triangles.first()).cmp(&(b.lower, b.upper, b.triangles.first()))
    });
    for (i, e) in edges.iter_mut().enumerate() {
        e.id = i;
    }
    let mut g = ReebGraph {
        genus: mesh.genus(),
        nodes,
        edges,
        removed_nodes: Vec::new(),
    };
    g.recompute_degrees();
    if g.euler_sum() != mesh.euler_characteristic() {
        return Err(Error::Invariant(format!(
            "Reeb graph Euler sum {} differs from the surface's {}",
            g.euler_sum(),
            mesh.euler_characteristic()
        )));
    }
    Ok(g)
}

/// Sum of the hats of `tris` on `[lo, hi]`, as breakpoints.
fn arc_density(tris: &[usize], hats: &[Hat], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut ts: Vec<f64> = vec![lo, hi];
    for &t in tris {
        for x in hats[t].f {
            if x > lo && x < hi {
                ts.push(x);
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut d = vec![0.0; ts.len()];
    for &t in tris {
        let h = &hats[t];
        let a = ts.partition_point(|&x| x < h.f[0]);
        let b = ts.partition_point(|&x| x <= h.f[2]);
        for i in a..b {
            d[i] += h.at(ts[i]);
        }
    }
    ts.into_iter().zip(d).collect()
}

/// Exact integral of a piecewise-linear density.
pub(crate) fn density_integral(density: &[(f64, f64)]) -> f64 {
    let parts: Vec<f64> = density
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .collect();
    crate::numeric::pairwise_sum(&parts)
}

/// Euler sums recorded after every pruning step, starting with the input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PruneTrace {
    pub euler_sums: Vec<i64>,
    pub removed: Vec<usize>,
}

/// Iterated removal of degree-one nodes (lowest id first) with their edges.
pub fn prune(g: &ReebGraph) -> Result<ReebGraph> {
    prune_traced(g).map(|r| r.0)
}

pub fn prune_traced(g: &ReebGraph) -> Result<(ReebGraph, PruneTrace)> {
    prune_with(g, |leaves| leaves[0])
}

/// Pruning with a caller-chosen leaf at each step; `pick` receives the
/// current leaves in increasing id order and returns one of them.
pub fn prune_with<P>(g: &ReebGraph, mut pick: P) -> Result<(ReebGraph, PruneTrace)>
where
    P: FnMut(&[usize]) -> usize,
{
    let mut h = g.clone();
    h.recompute_degrees();
    let mut trace = PruneTrace {
        euler_sums: vec![h.euler_sum()],
        removed: Vec::new(),
    };
    loop {
        let leaves: Vec<usize> = h
            .live_nodes()
            .filter(|n| n.degree == 1)
            .map(|n| n.id)
            .collect();
        if leaves.is_empty() {
            break;
        }
        let leaf = pick(&leaves);
        if !leaves.contains(&leaf) {
            return Err(Error::validation(format!("node {leaf} is not a leaf")));
        }
        let e = h
            .edges
            .iter()
            .position(|e| e.lower == leaf || e.upper == leaf)
            .expect("leaf has an edge");
        h.edges.remove(e);
        h.removed_nodes.push(leaf);
        h.recompute_degrees();
        trace.euler_sums.push(h.euler_sum());
        trace.removed.push(leaf);
    }
    if h.edges.is_empty() && g.genus >= 2 {
        return Err(Error::Invariant(
            "pruning emptied the graph of a surface of genus >= 2".into(),
        ));
    }
    h.removed_nodes.sort_unstable();
    Ok((h, trace))
}

/// The degree-three nodes of a pruned graph; there must be `2g - 2`.
pub fn trivalent_vertices(pruned: &ReebGraph) -> Result<Vec<usize>> {
    if pruned.live_nodes().any(|n| n.degree == 1) {
        return Err(Error::validation("graph is not pruned"));
    }
    let set: Vec<usize> = pruned
        .live_nodes()
        .filter(|n| n.degree == 3)
        .map(|n| n.id)
        .collect();
    let expected = (2 * pruned.genus).saturating_sub(2);
    if set.len() != expected {
        return Err(Error::Invariant(format!(
            "pruned graph has {} trivalent nodes, expected 2g - 2 = {expected}",
            set.len()
        )));
    }
    Ok(set)
}
