//! Numerical laboratory for quasi-morphisms on symplectic and Hamiltonian
//! groups: the winding quasi-morphism on `Sp(2n, R)`, translation numbers
//! of Hamiltonian flows on balls, the Calabi invariant, Reeb graphs of
//! Morse functions on surfaces and the hyperbolic angle invariant of disk
//! isotopies.

// NaN inputs must fail validation, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hamflow;
pub mod harness;
pub mod hypgeo;
pub mod numeric;
pub mod reeb;
pub mod symplinalg;

pub use error::{Error, Result};
pub use harness::{
    estimate_defect, homogenize, homogenize_doubling, DefectEstimate, HomogenizationResult,
    QmEvaluator, StopRule,
};
pub use symplinalg::{LagrangianFrame, SpMatrix, SpPath, WindingValue};
pub use hamflow::{Scenario, ScenarioJson};
pub use hypgeo::{DiskIsotopy, DiskPoint};
pub use reeb::{GraphHamiltonian, ReebGraph, SurfaceMesh};
