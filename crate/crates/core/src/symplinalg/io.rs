//! JSON forms: a path is `{"n", "times", "matrices"}` with each matrix a
//! row-major list of `4n^2` numbers; a frame is `{"n", "columns"}` with the
//! `2n x n` column block stored row-major.

use super::group::SpMatrix;
use super::lagrangian::LagrangianFrame;
use super::path::SpPath;
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpPathJson {
    pub n: usize,
    pub times: Vec<f64>,
    pub matrices: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LagrangianFrameJson {
    pub n: usize,
    pub columns: Vec<f64>,
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

impl TryFrom<SpPathJson> for SpPath {
    type Error = Error;

    fn try_from(j: SpPathJson) -> Result<SpPath> {
        if j.n == 0 {
            return Err(Error::validation("path n must be positive"));
        }
        let dim = 2 * j.n;
        let mut samples = Vec::with_capacity(j.matrices.len());
        for (k, m) in j.matrices.into_iter().enumerate() {
            if m.len() != dim * dim {
                return Err(Error::validation(format!(
                    "matrix {k} has {} entries, expected {}",
                    m.len(),
                    dim * dim
                )));
            }
            let mat = DMatrix::from_row_slice(dim, dim, &m);
            samples.push(SpMatrix::new(mat).map_err(|e| Error::AtSample {
                index: k,
                source: Box::new(e),
            })?);
        }
        SpPath::new(j.times, samples)
    }
}

impl From<&SpPath> for SpPathJson {
    fn from(p: &SpPath) -> Self {
        SpPathJson {
            n: p.n(),
            times: p.times().to_vec(),
            matrices: p.samples().iter().map(|m| row_major(m.matrix())).collect(),
        }
    }
}

impl TryFrom<LagrangianFrameJson> for LagrangianFrame {
    type Error = Error;

    fn try_from(j: LagrangianFrameJson) -> Result<LagrangianFrame> {
        if j.n == 0 || j.columns.len() != 2 * j.n * j.n {
            return Err(Error::validation(format!(
                "frame with n = {} needs {} entries, got {}",
                j.n,
                2 * j.n * j.n,
                j.columns.len()
            )));
        }
        LagrangianFrame::new(DMatrix::from_row_slice(2 * j.n, j.n, &j.columns))
    }
}

impl From<&LagrangianFrame> for LagrangianFrameJson {
    fn from(l: &LagrangianFrame) -> Self {
        LagrangianFrameJson {
            n: l.n(),
            columns: row_major(l.columns()),
        }
    }
}

pub fn sp_path_from_json(text: &str) -> Result<SpPath> {
    let j: SpPathJson =
        serde_json::from_str(text).map_err(|e| Error::validation(format!("path JSON: {e}")))?;
    j.try_into()
}

pub fn frame_from_json(text: &str) -> Result<LagrangianFrame> {
    let j: LagrangianFrameJson =
        serde_json::from_str(text).map_err(|e| Error::validation(format!("frame JSON: {e}")))?;
    j.try_into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_round_trip() {
        let p = SpPath::rotation(2, 1.3, 5);
        let text = serde_json::to_string(&SpPathJson::from(&p)).unwrap();
        let q = sp_path_from_json(&text).unwrap();
        assert_eq!(p.times(), q.times());
        for (a, b) in p.samples().iter().zip(q.samples()) {
            assert_eq!(a.matrix(), b.matrix());
        }
    }

    #[test]
    fn frame_round_trip_and_rejection() {
        let l = LagrangianFrame::real(2);
        let text = serde_json::to_string(&LagrangianFrameJson::from(&l)).unwrap();
        assert_eq!(frame_from_json(&text).unwrap(), l);
        assert!(frame_from_json(r#"{"n":1,"columns":[1.0]}"#).is_err());
        let bad = r#"{"n":1,"times":[0,1],"matrices":[[1,0,0,1],[2,0,0,1]]}"#;
        assert!(sp_path_from_json(bad).unwrap_err().is_validation());
    }
}
