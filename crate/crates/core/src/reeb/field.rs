use super::mesh::SurfaceMesh;
use crate::error::{Error, Result};
use std::path::Path;

/// Per-vertex values of a piecewise-linear function on a mesh.
///
/// Ties are broken by vertex id: `(value, id)` is compared
/// lexicographically, and the working values are nudged upward by the
/// smallest amounts that make them strictly increasing in that order.
#[derive(Debug, Clone, PartialEq)]
pub struct MorseField {
    values: Vec<f64>,
    effective: Vec<f64>,
    rank: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Min,
    Max,
    Saddle,
    Regular,
}

impl MorseField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("field has no values"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!("value at vertex {i} is not finite")));
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut rank = vec![0; values.len()];
        for (r, &v) in order.iter().enumerate() {
            rank[v] = r;
        }
        let lo = values[order[0]];
        let hi = values[order[order.len() - 1]];
        let eps = 1e-12 * (hi - lo).abs().max(lo.abs()).max(hi.abs()).max(1.0);
        let mut effective = values.clone();
        for w in order.windows(2) {
            let prev = effective[w[0]];
            if effective[w[1]] <= prev {
                effective[w[1]] = prev + eps;
            }
        }
        Ok(MorseField {
            values,
            effective,
            rank,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Strictly ordered working values.
    pub fn effective(&self) -> &[f64] {
        &self.effective
    }

    pub fn rank(&self, v: usize) -> usize {
        self.rank[v]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of sign changes of `f(u) - f(v)` around the link of `v`.
    pub fn link_sign_changes(&self, mesh: &SurfaceMesh, v: usize) -> usize {
        let link = mesh.link(v);
        let upper: Vec<bool> = link.iter().map(|&u| self.rank[u] > self.rank[v]).collect();
        (0..upper.len())
            .filter(|&i| upper[i] != upper[(i + 1) % upper.len()])
            .count()
    }

    /// PL classification by link analysis. Saddles of multiplicity higher
    /// than one are rejected.
    pub fn classify(&self, mesh: &SurfaceMesh, v: usize) -> Result<VertexKind> {
        match self.link_sign_changes(mesh, v) {
            0 => Ok(if self.rank[mesh.link(v)[0]] > self.rank[v] {
                VertexKind::Min
            } else {
                VertexKind::Max
            }),
            2 => Ok(VertexKind::Regular),
            4 => Ok(VertexKind::Saddle),
            k => Err(Error::validation(format!(
                "vertex {v} is a degenerate saddle ({k} sign changes in its link)"
            ))),
        }
    }

    fn check_mesh(&self, mesh: &SurfaceMesh) -> Result<()> {
        if self.len() != mesh.vertices().len() {
            return Err(Error::validation(format!(
                "field has {} values but mesh has {} vertices",
                self.len(),
                mesh.vertices().len()
            )));
        }
        Ok(())
    }

    /// Critical vertices with their kinds, in increasing order.
    pub fn critical_points(&self, mesh: &SurfaceMesh) -> Result<Vec<(usize, VertexKind)>> {
        self.check_mesh(mesh)?;
        let mut out = Vec::new();
        for v in 0..self.len() {
            let k = self.classify(mesh, v)?;
            if k != VertexKind::Regular {
                out.push((v, k));
            }
        }
        out.sort_by_key(|&(v, _)| self.rank[v]);
        Ok(out)
    }
}

/// Parses `vertex_id,value` rows (an optional header line is skipped).
pub fn parse_field_csv(text: &str, n_vertices: usize) -> Result<MorseField> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut values = vec![f64::NAN; n_vertices];
    let mut seen = vec![false; n_vertices];
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::validation(format!("CSV: {e}")))?;
        if rec.len() != 2 {
            return Err(Error::validation(format!(
                "CSV line {}: expected vertex_id,value",
                line + 1
            )));
        }
        let id = rec[0].parse::<usize>();
        let val = rec[1].parse::<f64>();
        let (id, val) = match (id, val) {
            (Ok(i), Ok(v)) => (i, v),
            _ if line == 0 => continue,
            _ => {
                return Err(Error::validation(format!(
                    "CSV line {}: cannot parse '{},{}'",
                    line + 1,
                    &rec[0],
                    &rec[1]
                )))
            }
        };
        if id >= n_vertices {
            return Err(Error::validation(format!(
                "CSV line {}: vertex {id} out of range",
                line + 1
            )));
        }
        if seen[id] {
            return Err(Error::validation(format!("vertex {id} listed twice")));
        }
        seen[id] = true;
        values[id] = val;
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(Error::validation(format!("no value for vertex {v}")));
    }
    MorseField::new(values)
}

pub fn read_field_csv(path: &Path, n_vertices: usize) -> Result<MorseField> {
    let text = std::fs::read_to_string(path)?;
    parse_field_csv(&text, n_vertices).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn field_to_csv(field: &MorseField) -> String {
    let mut s = String::from("vertex_id,value\n");
    for (i, v) in field.values().iter().enumerate() {
        s.push_str(&format!("{i},{v}\n"));
    }
    s
}
