use super::shapes::*;
use super::*;
use std::collections::BTreeMap;

fn kinds(g: &ReebGraph) -> (usize, usize, usize) {
    (
        g.count_kind(VertexKind::Min),
        g.count_kind(VertexKind::Saddle),
        g.count_kind(VertexKind::Max),
    )
}

#[test]
fn sphere_graph_is_one_edge() {
    let m = icosphere(2);
    let f = tilted_height(&m);
    let g = build_reeb(&m, &f).unwrap();
    assert_eq!(g.nodes.len(), 2);
    assert_eq!(g.edges.len(), 1);
    assert_eq!(g.euler_sum(), 2);
    let p = prune(&g).unwrap();
    // documented degenerate result: a single isolated node
    assert_eq!(p.live_nodes().count(), 1);
    assert!(p.edges.is_empty());
    assert_eq!(p.euler_sum(), 2);
}

#[test]
fn torus_graph_is_cycle_with_two_pendants() {
    let m = standing_torus(2.0, 0.8, 48, 24);
    assert_eq!(m.genus(), 1);
    let g = build_reeb(&m, &tilted_height(&m)).unwrap();
    assert_eq!(kinds(&g), (1, 2, 1));
    assert_eq!(g.edges.len(), 4);
    let between: Vec<_> = g.edges.iter().filter(|e| e.lower == 1 && e.upper == 2).collect();
    assert_eq!(between.len(), 2);
    assert_eq!(g.euler_sum(), 0);
    let p = prune(&g).unwrap();
    assert_eq!(p.edges.len(), 2);
    assert!(p.live_nodes().all(|n| n.degree == 2));
    assert!(trivalent_vertices(&p).unwrap().is_empty());
}

#[test]
fn genus_two_plate_has_two_cycles_in_series() {
    let m = genus2_plate();
    assert_eq!(m.genus(), 2);
    let g = build_reeb(&m, &tilted_height(&m)).unwrap();
    assert_eq!(kinds(&g), (1, 4, 1));
    let pairs: Vec<(usize, usize)> = g.edges.iter().map(|e| (e.lower, e.upper)).collect();
    assert_eq!(pairs, vec![(0, 1), (1, 2), (1, 2), (2, 3), (3, 4), (3, 4), (4, 5)]);
    let (p, trace) = prune_traced(&g).unwrap();
    assert!(trace.euler_sums.iter().all(|&s| s == -2));
    assert_eq!(trivalent_vertices(&p).unwrap(), vec![2, 3]);
    assert!((g.total_measure() - m.total_area()).abs() < 1e-12 * m.total_area());
}

#[test]
fn genus_three_plate_has_four_trivalent_nodes() {
    let m = genus3_plate();
    assert_eq!(m.genus(), 3);
    let g = build_reeb(&m, &tilted_height(&m)).unwrap();
    assert_eq!(kinds(&g), (1, 6, 1));
    let p = prune(&g).unwrap();
    assert_eq!(trivalent_vertices(&p).unwrap().len(), 4);
}

#[test]
fn pruning_is_idempotent_and_order_independent() {
    let m = genus2_plate();
    let f = random_morse_field(&m, 4, 0.05).unwrap();
    let g = build_reeb(&m, &f).unwrap();
    let p = prune(&g).unwrap();
    let pp = prune(&p).unwrap();
    assert_eq!(p.edges, pp.edges);
    let mut state = 12345u64;
    let (q, trace) = prune_with(&g, |leaves| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        leaves[(state >> 33) as usize % leaves.len()]
    })
    .unwrap();
    assert!(trace.euler_sums.iter().all(|&s| s == -2));
    assert_eq!(p.edges, q.edges);
    assert_eq!(p.removed_nodes, q.removed_nodes);
}

#[test]
fn random_fields_satisfy_morse_relation() {
    let m = genus2_plate();
    for seed in 0..5 {
        let f = random_morse_field(&m, seed, 0.05).unwrap();
        let g = build_reeb(&m, &f).unwrap();
        let (mins, saddles, maxs) = kinds(&g);
        assert_eq!(saddles as i64 - mins as i64 - maxs as i64, 2);
        assert_eq!(g.euler_sum(), -2);
        assert_eq!(trivalent_vertices(&prune(&g).unwrap()).unwrap().len(), 2);
    }
}

#[test]
fn integrals_on_normalized_genus_two() {
    let m = genus2_plate().normalized().unwrap();
    let f = tilted_height(&m);
    let g = build_reeb(&m, &f).unwrap();
    let one = GraphHamiltonian::constant(&g, 1.0);
    assert!((graph_integral(&g, &one).unwrap() - 2.0).abs() < 1e-13);
    assert!(theorem2_value(&g, &GraphHamiltonian::constant(&g, 3.5)).unwrap().abs() < 1e-13);

    // the plate is symmetric under p -> -p, which negates the height
    let lin = GraphHamiltonian::affine(&g, 0.0, 1.0);
    assert!(graph_integral(&g, &lin).unwrap().abs() < 1e-12);

    // h supported on one pendant edge
    let pendant = g.edges.iter().find(|e| e.lower == 0).unwrap();
    let mut only = BTreeMap::new();
    only.insert(pendant.id, vec![(pendant.t_lo, 1.0), (pendant.t_hi, 1.0)]);
    for e in &g.edges {
        only.entry(e.id).or_insert(vec![(e.t_lo, 0.0), (e.t_hi, 0.0)]);
    }
    let h = GraphHamiltonian::new(only).unwrap();
    assert!((graph_integral(&g, &h).unwrap() - pendant.measure).abs() < 1e-14);
    // the jump sits at a node that pruning removes, so only the integral remains
    assert!((theorem2_value(&g, &h).unwrap() - pendant.measure).abs() < 1e-14);
}

#[test]
fn trivalent_formula_is_linear_and_constant_blind() {
    let m = genus2_plate().normalized().unwrap();
    let g = build_reeb(&m, &tilted_height(&m)).unwrap();
    let h1 = GraphHamiltonian::from_level_profile(&g, &[(-3.0, 1.0), (-0.2, -2.0), (1.0, 0.5)])
        .unwrap();
    let h2 = GraphHamiltonian::affine(&g, 0.3, -1.7);
    let (a, b) = (2.5, -0.75);
    let combo = GraphHamiltonian::combine(a, &h1, b, &h2);
    let lhs = theorem2_value(&g, &combo).unwrap();
    let rhs = a * theorem2_value(&g, &h1).unwrap() + b * theorem2_value(&g, &h2).unwrap();
    assert!((lhs - rhs).abs() < 1e-12);
    let shifted = GraphHamiltonian::combine(1.0, &h1, 1.0, &GraphHamiltonian::constant(&g, 4.0));
    let d = theorem2_value(&g, &shifted).unwrap() - theorem2_value(&g, &h1).unwrap();
    assert!(d.abs() < 1e-12);
}

#[test]
fn trivalent_formula_rejects_unnormalized_area() {
    let m = genus2_plate();
    let g = build_reeb(&m, &tilted_height(&m)).unwrap();
    let err = theorem2_value(&g, &GraphHamiltonian::constant(&g, 1.0)).unwrap_err();
    assert!(err.is_validation());
}

#[test]
fn importer_accepts_level_functions_only() {
    let m = genus2_plate().normalized().unwrap();
    let f = tilted_height(&m);
    let g = build_reeb(&m, &f).unwrap();
    let lin: Vec<f64> = f.effective().iter().map(|t| 2.0 * t + 1.0).collect();
    let h = import_surface_field(&m, &f, &g, &lin).unwrap();
    let direct = GraphHamiltonian::affine(&g, 1.0, 2.0);
    let a = graph_integral(&g, &h).unwrap();
    let b = graph_integral(&g, &direct).unwrap();
    assert!((a - b).abs() < 1e-12);
    let sq: Vec<f64> = f.effective().iter().map(|t| t * t).collect();
    assert!(import_surface_field(&m, &f, &g, &sq).is_err());
}

#[test]
fn hamiltonian_json_round_trip() {
    let m = genus2_plate();
    let g = build_reeb(&m, &tilted_height(&m)).unwrap();
    let h = GraphHamiltonian::affine(&g, 0.5, 2.0);
    let text = serde_json::to_string(&h.to_json()).unwrap();
    let back = GraphHamiltonian::from_json(serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(h, back);
    let missing = GraphHamiltonian::from_json(serde_json::from_str(r#"{"edges":[]}"#).unwrap())
        .unwrap();
    assert!(graph_integral(&g, &missing).is_err());
}
