use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

/// A closed, connected, orientable triangulated surface.
///
/// Construction checks that every edge lies in exactly two triangles, that
/// every vertex link is a single cycle and that the triangles can be
/// oriented coherently (reorienting them if needed).
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
    area_weights: Vec<f64>,
    /// Undirected edges `(a, b)` with `a < b` and their two triangles.
    edges: Vec<MeshEdge>,
    /// Neighbors of each vertex in cyclic order.
    links: Vec<Vec<usize>>,
    /// Triangles incident to each vertex.
    stars: Vec<Vec<usize>>,
    genus: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshEdge {
    pub a: usize,
    pub b: usize,
    pub triangles: [usize; 2],
}

fn triangle_area(p: [f64; 3], q: [f64; 3], r: [f64; 3]) -> f64 {
    let u = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
    let v = [r[0] - p[0], r[1] - p[1], r[2] - p[2]];
    let c = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
}

impl SurfaceMesh {
    /// Builds a mesh with area weights taken from the embedding.
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let weights = triangles
            .iter()
            .map(|t| triangle_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]))
            .collect::<Vec<_>>();
        Self::with_area_weights(vertices, triangles, weights)
    }

    pub fn with_area_weights(
        vertices: Vec<[f64; 3]>,
        mut triangles: Vec<[usize; 3]>,
        area_weights: Vec<f64>,
    ) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(Error::validation("mesh has no triangles"));
        }
        if area_weights.len() != triangles.len() {
            return Err(Error::validation("one area weight per triangle is required"));
        }
        if let Some(k) = area_weights.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::validation(format!(
                "triangle {k} has non-positive area weight"
            )));
        }
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::validation(format!(
                    "triangle {k} references a missing vertex"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::validation(format!("triangle {k} is degenerate")));
            }
        }

        // edge -> incident triangles
        let mut edge_map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (k, t) in triangles.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                edge_map.entry((a.min(b), a.max(b))).or_default().push(k);
            }
        }
        let mut edges: Vec<MeshEdge> = Vec::with_capacity(edge_map.len());
        for (&(a, b), tris) in &edge_map {
            if tris.len() != 2 {
                return Err(Error::validation(format!(
                    "edge ({a}, {b}) lies in {} triangles; the surface must be closed and manifold",
                    tris.len()
                )));
            }
            edges.push(MeshEdge {
                a,
                b,
                triangles: [tris[0], tris[1]],
            });
        }
        edges.sort_by_key(|e| (e.a, e.b));

        orient_coherently(&mut triangles, &edges)?;

        let mut stars: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for (k, t) in triangles.iter().enumerate() {
            for &v in t {
                stars[v].push(k);
            }
        }
        if let Some(v) = stars.iter().position(|s| s.is_empty()) {
            return Err(Error::validation(format!("vertex {v} is not used by any triangle")));
        }
        let mut links = Vec::with_capacity(nv);
        for v in 0..nv {
            links.push(vertex_link(v, &stars[v], &triangles)?);
        }

        check_connected(nv, &edges)?;
        let chi = nv as i64 - edges.len() as i64 + triangles.len() as i64;
        if chi > 2 || chi % 2 != 0 {
            return Err(Error::validation(format!(
                "Euler characteristic {chi} is not that of a closed orientable surface"
            )));
        }
        let genus = ((2 - chi) / 2) as usize;
        Ok(SurfaceMesh {
            vertices,
            triangles,
            area_weights,
            edges,
            links,
            stars,
            genus,
        })
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn area_weights(&self) -> &[f64] {
        &self.area_weights
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    pub fn link(&self, v: usize) -> &[usize] {
        &self.links[v]
    }

    pub fn star(&self, v: usize) -> &[usize] {
        &self.stars[v]
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64
    }

    pub fn total_area(&self) -> f64 {
        crate::numeric::pairwise_sum(&self.area_weights)
    }

    /// Rescales the area weights so the total area is `2g - 2`. Only
    /// surfaces of genus at least two admit this normalization.
    pub fn normalized(&self) -> Result<SurfaceMesh> {
        if self.genus < 2 {
            return Err(Error::validation(format!(
                "area normalization to 2g - 2 needs genus >= 2, got {}",
                self.genus
            )));
        }
        let target = 2.0 * self.genus as f64 - 2.0;
        let scale = target / self.total_area();
        let mut m = self.clone();
        for w in m.area_weights.iter_mut() {
            *w *= scale;
        }
        Ok(m)
    }
}

fn orient_coherently(triangles: &mut [[usize; 3]], edges: &[MeshEdge]) -> Result<()> {
    let nt = triangles.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nt];
    for e in edges {
        adj[e.triangles[0]].push(e.triangles[1]);
        adj[e.triangles[1]].push(e.triangles[0]);
    }
    let mut fixed = vec![false; nt];
    for start in 0..nt {
        if fixed[start] {
            continue;
        }
        fixed[start] = true;
        let mut stack = vec![start];
        while let Some(t) = stack.pop() {
            for &u in &adj[t] {
                let consistent = orientation_agrees(&triangles[t], &triangles[u]);
                if fixed[u] {
                    if !consistent {
                        return Err(Error::validation("mesh is not orientable"));
                    }
                    continue;
                }
                if !consistent {
                    triangles[u].swap(1, 2);
                }
                fixed[u] = true;
                stack.push(u);
            }
        }
    }
    Ok(())
}

/// Two triangles sharing an edge are coherently oriented when they traverse
/// it in opposite directions.
fn orientation_agrees(t: &[usize; 3], u: &[usize; 3]) -> bool {
    for i in 0..3 {
        let (a, b) = (t[i], t[(i + 1) % 3]);
        for j in 0..3 {
            let (c, d) = (u[j], u[(j + 1) % 3]);
            if a == c && b == d {
                return false;
            }
        }
    }
    true
}

fn vertex_link(v: usize, star: &[usize], triangles: &[[usize; 3]]) -> Result<Vec<usize>> {
    // each triangle (v, a, b) in orientation order contributes a -> b
    let mut next: HashMap<usize, usize> = HashMap::with_capacity(star.len());
    for &k in star {
        let t = triangles[k];
        let i = t.iter().position(|&x| x == v).expect("vertex in its star");
        let a = t[(i + 1) % 3];
        let b = t[(i + 2) % 3];
        if next.insert(a, b).is_some() {
            return Err(Error::validation(format!("vertex {v} has a non-manifold star")));
        }
    }
    let start = *next.keys().min().expect("nonempty star");
    let mut cycle = vec![start];
    let mut cur = next[&start];
    while cur != start {
        cycle.push(cur);
        cur = *next.get(&cur).ok_or_else(|| {
            Error::validation(format!("link of vertex {v} is not a closed cycle"))
        })?;
        if cycle.len() > star.len() {
            break;
        }
    }
    if cycle.len() != star.len() {
        return Err(Error::validation(format!(
            "link of vertex {v} is not a single cycle"
        )));
    }
    Ok(cycle)
}

fn check_connected(nv: usize, edges: &[MeshEdge]) -> Result<()> {
    let mut uf = UnionFind::new(nv);
    for e in edges {
        uf.union(e.a, e.b);
    }
    let root = uf.find(0);
    if (1..nv).any(|v| uf.find(v) != root) {
        return Err(Error::validation("mesh is not connected"));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Parses an ASCII OFF file. Polygons with more than three corners are
/// split into triangle fans.
pub fn parse_off(text: &str) -> Result<SurfaceMesh> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace);
    let bad = |m: &str| Error::validation(format!("OFF: {m}"));
    match tokens.next() {
        Some("OFF") => {}
        _ => return Err(bad("missing OFF header")),
    }
    let mut count = |what: &str| -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(&format!("expected {what}")))
    };
    let nv = count("vertex count")?;
    let nf = count("face count")?;
    let _ne = count("edge count")?;
    let mut next_f64 = |what: &str| -> Result<f64> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(&format!("expected {what}")))
    };
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let what = format!("coordinate of vertex {i}");
        vertices.push([next_f64(&what)?, next_f64(&what)?, next_f64(&what)?]);
    }
    let mut triangles = Vec::with_capacity(nf);
    for f in 0..nf {
        let what = format!("index in face {f}");
        let k = next_f64(&format!("corner count of face {f}"))? as usize;
        if k < 3 {
            return Err(bad(&format!("face {f} has fewer than 3 corners")));
        }
        let mut idx = Vec::with_capacity(k);
        for _ in 0..k {
            let v = next_f64(&what)?;
            if v < 0.0 || v.fract() != 0.0 {
                return Err(bad(&format!("face {f} has an invalid vertex index")));
            }
            idx.push(v as usize);
        }
        for j in 1..k - 1 {
            triangles.push([idx[0], idx[j], idx[j + 1]]);
        }
    }
    SurfaceMesh::new(vertices, triangles)
}

pub fn read_off(path: &Path) -> Result<SurfaceMesh> {
    let text = std::fs::read_to_string(path)?;
    parse_off(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn to_off(mesh: &SurfaceMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "OFF\n{} {} {}",
        mesh.vertices.len(),
        mesh.triangles.len(),
        mesh.edges.len()
    );
    for p in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const TETRA: &str = "OFF\n4 4 6\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 1 2 3\n3 0 3 2\n";

    #[test]
    fn tetrahedron_is_a_sphere() {
        let m = parse_off(TETRA).unwrap();
        assert_eq!(m.genus(), 0);
        assert_eq!(m.edges().len(), 6);
        assert!(m.link(0).len() == 3);
        assert!(m.normalized().is_err());
    }

    #[test]
    fn reorients_flipped_faces() {
        let flipped = TETRA.replace("3 0 1 3", "3 0 3 1");
        let m = parse_off(&flipped).unwrap();
        assert_eq!(m.genus(), 0);
    }

    #[test]
    fn rejects_open_surfaces() {
        let open = "OFF\n4 3 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 1 2 3\n";
        assert!(parse_off(open).is_err());
        assert!(parse_off("PLY\n").is_err());
    }

    #[test]
    fn off_round_trip() {
        let m = parse_off(TETRA).unwrap();
        let m2 = parse_off(&to_off(&m)).unwrap();
        assert_eq!(m.triangles(), m2.triangles());
        assert!((m.total_area() - m2.total_area()).abs() < 1e-15);
    }
}
