//! Linear symplectic algebra on `R^{2n}` with the standard structure
//! `J0 = [[0, -I], [I, 0]]`: Lagrangian frames, the `det^2` map, phase
//! winding, and the winding quasi-morphism on paths in `Sp(2n, R)`.
//!
//! `R^{2n}` is identified with `C^n` through `z = x + iy`, so a Lagrangian
//! frame `[X; Y]` becomes the complex matrix `X + iY`.

mod group;
mod io;
mod lagrangian;
mod path;
mod transversality;
mod winding;

pub use group::{
    exp_hamiltonian, j0, random_hamiltonian, random_symplectic, symplectic_defect, SpMatrix,
    TOL_SP,
};
pub use io::{frame_from_json, sp_path_from_json, LagrangianFrameJson, SpPathJson};
pub use lagrangian::{is_transverse, lagrangian_det2, LagrangianFrame, RANK_TOL, TOL_LAG};
pub use path::{
    concat_power, phi_homog, phi_lag, PhiEvaluator, SpPath, MAX_REFINE_DEPTH, REFINE_TRIGGER,
};
pub use transversality::{transversality_winding_check, TransversalityReport};
pub use winding::{phase_step, winding, WindingValue, MAX_STEP_TURNS};
