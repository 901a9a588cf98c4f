//! Experiment spec files. Every file names its `kind`; relative paths inside
//! a spec resolve against the spec file's directory.

use qmlab_core::hamflow::{BallQuadrature, PrimitiveOneForm};
use qmlab_core::hypgeo::OneFormSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentSpec {
    Phi(PhiSpec),
    Tau(TauSpec),
    Calabi(CalabiSpec),
    Reeb(ReebSpec),
    CalS(CalSSpec),
    Defect(DefectSpec),
    Gg(GgSpec),
}

impl ExperimentSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentSpec::Phi(_) => "phi",
            ExperimentSpec::Tau(_) => "tau",
            ExperimentSpec::Calabi(_) => "calabi",
            ExperimentSpec::Reeb(_) => "reeb",
            ExperimentSpec::CalS(_) => "cal_s",
            ExperimentSpec::Defect(_) => "defect",
            ExperimentSpec::Gg(_) => "gg",
        }
    }

    /// The seed slot of stochastic kinds.
    pub fn seed_mut(&mut self) -> Option<&mut Option<u64>> {
        match self {
            ExperimentSpec::Tau(s) => Some(&mut s.seed),
            ExperimentSpec::CalS(s) => Some(&mut s.seed),
            ExperimentSpec::Defect(s) => Some(&mut s.seed),
            _ => None,
        }
    }
}

fn default_powers() -> Vec<u64> {
    vec![64]
}

fn default_fibers() -> usize {
    qmlab_core::hypgeo::DEFAULT_FIBERS
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiSpec {
    /// Path file (`{"n", "times", "matrices"}`).
    pub path: String,
    /// Reference Lagrangian frame file; the real subspace by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<String>,
    #[serde(default = "default_powers")]
    pub p: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauSpec {
    pub scenario: String,
    pub p: usize,
    pub n_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalabiSpec {
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub quadrature: BallQuadrature,
    #[serde(default)]
    pub primitive: PrimitiveOneForm,
}

/// A function on the Reeb graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    Constant(f64),
    /// `a + b t` in the level parameter.
    Affine([f64; 2]),
    /// Piecewise-linear profile of the level, `[[t, value], ...]`.
    Profile(Vec<[f64; 2]>),
    /// Graph Hamiltonian JSON file.
    File(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReebSpec {
    /// OFF file, or `builtin:genus2_plate` / `builtin:genus3_plate`.
    pub mesh: String,
    /// `vertex_id,value` CSV, or `builtin:tilted_height`.
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianSpec>,
    /// Rescale the area to `2g - 2` before evaluating the trivalent formula.
    #[serde(default = "default_true")]
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalSSpec {
    /// Disk isotopy file (`{"scenario", "genus", "disk_area"}`).
    pub isotopy: String,
    pub p: usize,
    pub n_points: usize,
    #[serde(default = "default_fibers")]
    pub fibers: usize,
    /// Also report the Calabi invariant of the same scenario.
    #[serde(default)]
    pub compare_calabi: bool,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectTarget {
    /// Winding quasi-morphism on random paths `exp(t A)` in `Sp(2n)`.
    Phi,
    /// `F -> F(0)` on random circle lifts.
    Translation,
}

fn default_n() -> usize {
    1
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectSpec {
    pub evaluator: DefectTarget,
    pub n_pairs: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Size of the random generators.
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GgSpec {
    pub isotopy: String,
    pub eta: OneFormSpec,
    /// Base points in the Poincare disk.
    pub points: Vec<[f64; 2]>,
    #[serde(default = "default_powers")]
    pub p: Vec<u64>,
}
