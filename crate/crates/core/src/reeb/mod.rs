//! Reeb graphs of piecewise-linear Morse functions on closed orientable
//! triangulated surfaces, their pruning to the trivalent core, and the
//! evaluation of `integral of H - sum of H over trivalent nodes` for
//! Hamiltonians that are functions on the graph.

mod field;
mod graph;
mod hamiltonian;
mod mesh;
pub mod shapes;

#[cfg(test)]
mod tests;

pub use field::{field_to_csv, parse_field_csv, read_field_csv, MorseField, VertexKind};
pub use graph::{
    build_reeb, prune, prune_traced, prune_with, trivalent_vertices, PruneTrace, ReebEdge,
    ReebGraph, ReebNode,
};
pub use hamiltonian::{
    graph_integral, import_surface_field, theorem2_value, EdgeFunctionJson, GraphHamiltonian,
    GraphHamiltonianJson, IMPORT_TOL,
};
pub use mesh::{parse_off, read_off, to_off, MeshEdge, SurfaceMesh};
