use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qmlab_core::hamflow::{integrate_flow, FieldSpec, Profile, Scenario, ScenarioJson};
use qmlab_core::hypgeo::{circle_index, geodesic_endpoint, CirclePath, DiskPoint, Mobius, UnitDirection};
use qmlab_core::numeric::stream_rng;
use qmlab_core::reeb::shapes::{genus2_plate, random_morse_field};
use qmlab_core::reeb::{build_reeb, prune_traced};
use qmlab_core::symplinalg::{
    lagrangian_det2, phi_homog, random_hamiltonian, random_symplectic, LagrangianFrame, SpPath,
};
use std::f64::consts::PI;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn det2_is_unimodular_and_basis_free(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = stream_rng(seed, 0);
        let base = LagrangianFrame::real(n);
        let l0 = base.transformed(&random_symplectic(n, 1.0, &mut rng));
        let l1 = base.transformed(&random_symplectic(n, 1.0, &mut rng));
        let d = lagrangian_det2(&l0, &l1).unwrap();
        prop_assert!((d.norm() - 1.0).abs() < 1e-12);
        // a change of basis inside L1 does not move the value
        let g = DMatrix::from_fn(n, n, |i, j| if i == j { 2.0 } else { 0.3 * (i + 2 * j) as f64 });
        let rebased = LagrangianFrame::new(l1.columns() * g).unwrap();
        prop_assert!((lagrangian_det2(&l0, &rebased).unwrap() - d).norm() < 1e-10);
    }

    #[test]
    fn phi_is_conjugation_invariant_and_odd(seed in any::<u64>(), n in 1usize..3) {
        let mut rng = stream_rng(seed, 1);
        let path = SpPath::from_generator(&random_hamiltonian(n, 1.5, &mut rng), 24).unwrap();
        let c = random_symplectic(n, 0.7, &mut rng);
        let l0 = LagrangianFrame::real(n);
        let p = 32;
        let (v, b) = phi_homog(&path, p, &l0).unwrap();
        let (vc, bc) = phi_homog(&path.conjugated(&c), p, &l0).unwrap();
        prop_assert!((v - vc).abs() <= b + bc);
        let (vi, bi) = phi_homog(&path.inverse(), p, &l0).unwrap();
        prop_assert!((v + vi).abs() <= b + bi);
    }

    #[test]
    fn circle_index_defect_is_bounded(steps in prop::collection::vec(-0.45f64..0.45, 2..60), split in 1usize..59) {
        let split = split.min(steps.len() - 1);
        let mut lifted = vec![0.0];
        for s in &steps {
            let last = *lifted.last().unwrap();
            lifted.push(last + s);
        }
        let whole = CirclePath::new(lifted.clone()).unwrap();
        let a = CirclePath::new(lifted[..=split].to_vec()).unwrap();
        let b = CirclePath::new(lifted[split..].to_vec()).unwrap();
        prop_assert_eq!(a.concat(&b).unwrap(), whole.clone());
        let d = circle_index(&whole) - circle_index(&a) - circle_index(&b);
        prop_assert!(d.abs() <= 2);
    }

    #[test]
    fn geodesic_endpoints_commute_with_automorphisms(
        ar in 0.0f64..0.9, at in -PI..PI, rot in -PI..PI,
        zr in 0.0f64..0.9, zt in -PI..PI, angle in -PI..PI,
    ) {
        let g = Mobius::new(Complex64::from_polar(ar, at), rot).unwrap();
        let v = UnitDirection { base: DiskPoint::new(Complex64::from_polar(zr, zt)).unwrap(), angle };
        let lhs = geodesic_endpoint(&g.apply_direction(&v).unwrap());
        let rhs = g.apply_boundary(geodesic_endpoint(&v));
        let d = (lhs - rhs + PI).rem_euclid(2.0 * PI) - PI;
        prop_assert!(d.abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn reversed_isotopy_undoes_the_flow(amp in -2.0f64..2.0, cx in -0.2f64..0.2, x in -0.5f64..0.5, y in -0.5f64..0.5) {
        let sc = Scenario::from_json(&ScenarioJson {
            dim: 2,
            form: "standard".into(),
            h: Some(FieldSpec::Radial { center: vec![cx, 0.1], amplitude: amp, radius: 0.6, profile: Profile::Smooth }),
            time: Some(vec![0.5, 1.0, -0.3]),
            stages: None,
            support_radius: 0.9,
            ball_radius: None,
            dt: Some(1e-2),
        })
        .unwrap();
        let round = sc.inverse().after(&sc).unwrap();
        let back = integrate_flow(&round, &[x, y], 1.0).unwrap();
        prop_assert!((back[0] - x).abs() < 1e-10 && (back[1] - y).abs() < 1e-10);
    }

    #[test]
    fn euler_sum_survives_every_pruning_step(seed in any::<u64>()) {
        let m = genus2_plate();
        let f = random_morse_field(&m, seed, 0.05).unwrap();
        let g = build_reeb(&m, &f).unwrap();
        let (_, trace) = prune_traced(&g).unwrap();
        prop_assert_eq!(g.euler_sum(), -2);
        prop_assert!(trace.euler_sums.iter().all(|&s| s == -2));
    }
}
