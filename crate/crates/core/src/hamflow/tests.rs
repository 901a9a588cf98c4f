use super::*;
use crate::numeric::gauss_legendre_on;
use crate::symplinalg::SpMatrix;
use nalgebra::DMatrix;
use std::f64::consts::PI;

fn radial(center: [f64; 2], amplitude: f64, radius: f64, k: u32) -> FieldSpec {
    FieldSpec::Radial {
        center: center.to_vec(),
        amplitude,
        radius,
        profile: Profile::Power(k),
    }
}

fn scenario(h: FieldSpec, time: Option<Vec<f64>>, support: f64, dt: f64) -> Scenario {
    Scenario::from_json(&ScenarioJson {
        dim: 2,
        form: "standard".into(),
        h: Some(h),
        time,
        stages: None,
        support_radius: support,
        ball_radius: Some(1.5 * support),
        dt: Some(dt),
    })
    .unwrap()
}

fn off_center_poly() -> FieldSpec {
    FieldSpec::Poly {
        center: vec![0.2, -0.1],
        radius: 0.6,
        power: 3,
        terms: vec![
            Monomial { coef: 0.5, powers: vec![0, 0] },
            Monomial { coef: 0.6, powers: vec![1, 0] },
            Monomial { coef: -0.3, powers: vec![1, 1] },
        ],
    }
}

/// `int_0^1 (-u h'(u)) pi du` for `h(u) = A (1 - u/rho^2)^k`, by 1D
/// Gauss-Legendre in `r`.
fn radial_calabi_oracle(a: f64, rho: f64, k: u32) -> f64 {
    gauss_legendre_on(40, 0.0, rho)
        .into_iter()
        .map(|(r, w)| {
            let u = r * r;
            let hp = -a * k as f64 / (rho * rho) * (1.0 - u / (rho * rho)).powi(k as i32 - 1);
            w * (-u * hp) * 2.0 * PI * r
        })
        .sum()
}

#[test]
fn zero_hamiltonian_is_identity() {
    let sc = Scenario::zero(2, 1.0).unwrap();
    assert_eq!(integrate_flow(&sc, &[0.3, 0.4], 1.0).unwrap(), vec![0.3, 0.4]);
    let path = jacobian_path(&sc, &[0.3, 0.4], 3).unwrap();
    assert!((path.endpoint().matrix() - DMatrix::<f64>::identity(2, 2)).norm() == 0.0);
    let cal = calabi(&sc, &PrimitiveOneForm::standard(), &BallQuadrature::default()).unwrap();
    assert_eq!(cal, 0.0);
    let t = tau_ball(&sc, 4, 50, 1).unwrap();
    assert_eq!((t.value, t.std_error), (0.0, 0.0));
}

#[test]
fn radial_orbits_stay_on_circles_with_closed_form_angle() {
    let (a, rho, k) = (0.8, 1.0, 3);
    let sc = scenario(radial([0.0, 0.0], a, rho, k), None, 1.0, 1e-3);
    for &r in &[0.1, 0.4, 0.7] {
        let x0 = [r, 0.0];
        let x1 = integrate_flow(&sc, &x0, 1.0).unwrap();
        let r1 = x1[0].hypot(x1[1]);
        assert!((r1 - r).abs() < 1e-12);
        // counterclockwise rate -2 h'(u); one midpoint step turns by theta
        // with tan(theta/2) = dt/2 * rate(r^2 cos^2(theta/2))
        let rate = |u: f64| 2.0 * a * k as f64 * (1.0 - u).powi(k as i32 - 1);
        let dt = sc.dt();
        let mut theta = dt * rate(r * r);
        for _ in 0..50 {
            let c = (theta / 2.0).cos();
            theta = 2.0 * (0.5 * dt * rate(r * r * c * c)).atan();
        }
        let total = theta * sc.steps_per_stage() as f64;
        let expected = (total + PI).rem_euclid(2.0 * PI) - PI;
        let angle = x1[1].atan2(x1[0]);
        assert!((angle - expected).abs() < 1e-10, "r={r}: {angle} vs {expected}");
        // the continuous-time angle is within O(dt^2)
        assert!((total - rate(r * r)).abs() < 1e-4);
        // energy is conserved exactly for radial fields
        let f = Field::from_spec(&radial([0.0, 0.0], a, rho, k), 2).unwrap();
        assert!((f.value(&x1) - f.value(&x0)).abs() < 1e-8);
    }
    // points outside the support do not move
    assert_eq!(integrate_flow(&sc, &[1.1, 0.2], 1.0).unwrap(), vec![1.1, 0.2]);
}

#[test]
fn energy_is_nearly_conserved_for_polynomial_fields() {
    let sc = scenario(off_center_poly(), None, 1.0, 1e-3);
    let f = Field::from_spec(&off_center_poly(), 2).unwrap();
    let x0 = [0.3, 0.0];
    let mut worst = 0.0f64;
    for k in 1..=10 {
        let x = integrate_flow(&sc, &x0, k as f64 / 10.0).unwrap();
        worst = worst.max((f.value(&x) - f.value(&x0)).abs());
    }
    assert!(worst < 1e-6, "energy error {worst}");
}

#[test]
fn center_of_a_bump_rotates_linearly() {
    // near the center H = A (1 - k r^2/rho^2) + O(r^4): a linear rotation
    let (a, rho, k) = (0.5, 0.8, 2);
    let sc = scenario(radial([0.0, 0.0], a, rho, k), None, 0.8, 1e-3);
    let path = jacobian_path(&sc, &[0.0, 0.0], 1).unwrap();
    let rate = 2.0 * a * k as f64 / (rho * rho);
    // each Cayley step turns by exactly 2 atan(rate dt / 2)
    let per_step = 2.0 * (0.5 * rate * sc.dt()).atan();
    for (i, m) in path.samples().iter().enumerate().step_by(100) {
        let ang = per_step * i as f64;
        let (c, s) = (ang.cos(), ang.sin());
        let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        assert!((m.matrix() - r).norm() < 1e-12);
    }
}

#[test]
fn jacobian_obeys_chain_rule_and_unit_determinant() {
    let f = scenario(off_center_poly(), Some(vec![1.0, -0.5]), 1.0, 1e-3);
    let g = scenario(radial([0.0, 0.1], 1.2, 0.7, 3), None, 1.0, 1e-3);
    let fg = f.after(&g).unwrap();
    let x = [0.25, 0.05];
    let gx = integrate_flow(&g, &x, 1.0).unwrap();
    let dg = jacobian_path(&g, &x, 1).unwrap();
    let df = jacobian_path(&f, &gx, 1).unwrap();
    let dfg = jacobian_path(&fg, &x, 1).unwrap();
    let prod = df.endpoint().matrix() * dg.endpoint().matrix();
    assert!((dfg.endpoint().matrix() - prod).norm() < 1e-6);
    let det = dfg.endpoint().matrix().determinant();
    assert!((det - 1.0).abs() < 1e-8, "det {det} {}", dfg.endpoint().matrix());
    // the composite endpoint is f(g(x))
    let direct = integrate_flow(&f, &gx, 1.0).unwrap();
    let both = integrate_flow(&fg, &x, 1.0).unwrap();
    assert!((direct[0] - both[0]).abs() < 1e-14 && (direct[1] - both[1]).abs() < 1e-14);
}

#[test]
fn calabi_of_radial_bump_matches_radial_oracle() {
    let sc = scenario(radial([0.0, 0.0], 1.0, 1.0, 2), None, 1.0, 1e-3);
    let cal = calabi(&sc, &PrimitiveOneForm::standard(), &BallQuadrature::default()).unwrap();
    let oracle = radial_calabi_oracle(1.0, 1.0, 2);
    assert!((oracle - PI / 3.0).abs() < 1e-12);
    assert!((cal - oracle).abs() < 1e-4, "{cal} vs {oracle}");
}

#[test]
fn calabi_is_additive_and_odd() {
    // a shared domain for the additivity check
    let common = BallQuadrature {
        n_radial: 32,
        n_angular: 40,
        radius: None,
        center: Some(vec![0.0, 0.0]),
    };
    let lam = PrimitiveOneForm::standard();
    let f = scenario(radial([0.5, 0.0], 1.0, 0.4, 3), None, 1.0, 1e-3);
    let g = scenario(off_center_poly_at([-0.45, 0.1]), Some(vec![0.5, 1.0]), 1.0, 1e-3);
    let cf = calabi(&f, &lam, &common).unwrap();
    let cg = calabi(&g, &lam, &common).unwrap();
    let cfg = calabi(&f.after(&g).unwrap(), &lam, &common).unwrap();
    assert!((cfg - cf - cg).abs() < 1e-6);
    // per-support domains for reversal and the closed form
    let quad = BallQuadrature { n_radial: 64, n_angular: 64, ..Default::default() };
    let cf = calabi(&f, &lam, &quad).unwrap();
    let cg = calabi(&g, &lam, &quad).unwrap();
    let inv = calabi(&f.inverse(), &lam, &quad).unwrap();
    assert!((inv + cf).abs() < 1e-6);
    let ginv = calabi(&g.inverse(), &lam, &quad).unwrap();
    assert!((ginv + cg).abs() < 1e-6, "{ginv} {cg}");
    // int_0^1 int H_t: the polynomial's odd part integrates to zero; the
    // midpoint rule in time is second order
    let oracle = PI * 0.45f64.powi(2) / 4.0;
    assert!((cg - oracle).abs() < 1e-5, "{cg} vs {oracle}");
}

fn off_center_poly_at(c: [f64; 2]) -> FieldSpec {
    FieldSpec::Poly {
        center: c.to_vec(),
        radius: 0.45,
        power: 3,
        terms: vec![
            Monomial { coef: 1.0, powers: vec![0, 0] },
            Monomial { coef: 1.5, powers: vec![0, 1] },
        ],
    }
}

#[test]
fn calabi_ignores_exact_changes_of_primitive() {
    let sc = scenario(radial([0.0, 0.0], 0.7, 0.9, 3), Some(vec![1.0, 1.0]), 1.0, 1e-3);
    let quad = BallQuadrature::default();
    let std = calabi(&sc, &PrimitiveOneForm::standard(), &quad).unwrap();
    let lam = PrimitiveOneForm {
        exact: vec![
            Monomial { coef: 0.3, powers: vec![1, 2] },
            Monomial { coef: -1.1, powers: vec![2, 0] },
        ],
    };
    assert!(lam.check_exterior_derivative(2, 1.0, 20, 3).unwrap() < 1e-8);
    let shifted = calabi(&sc, &lam, &quad).unwrap();
    assert!((shifted - std).abs() < 1e-6, "{shifted} vs {std}");
}

#[test]
fn calabi_rejects_small_quadrature_domain() {
    let sc = scenario(radial([0.0, 0.0], 1.0, 1.0, 2), None, 1.0, 1e-2);
    let quad = BallQuadrature { radius: Some(0.5), ..Default::default() };
    assert!(calabi(&sc, &PrimitiveOneForm::standard(), &quad).unwrap_err().is_validation());
}

#[test]
fn birkhoff_averages() {
    let sc = scenario(radial([0.0, 0.0], 0.6, 1.0, 3), None, 1.0, 1e-2);
    let c = birkhoff_average(&sc, |_| 2.5, &[0.3, 0.1], 10).unwrap();
    assert_eq!(c.value, 2.5);
    let fixed = birkhoff_average(&sc, |x| x[0] + 3.0 * x[1], &[0.0, 0.0], 10).unwrap();
    assert_eq!(fixed.value, 0.0);
    // rotation by a fixed angle on the circle of radius 0.5
    let x0 = [0.5, 0.0];
    let x1 = integrate_flow(&sc, &x0, 1.0).unwrap();
    let alpha = x1[1].atan2(x1[0]);
    let n = 400;
    let cos = birkhoff_average(&sc, |x| x[0] / x[0].hypot(x[1]), &x0, n).unwrap();
    assert!(cos.value.abs() <= 1.0 / (n as f64 * (alpha / 2.0).sin().abs()));
    assert!(cos.oscillation < 0.05);
}

#[test]
fn tau_of_radial_twist_matches_winding_oracle() {
    let a = 0.75;
    let sc = scenario(radial([0.0, 0.0], a, 1.0, 3), None, 1.0, 5e-3);
    let p = 16;
    let t = tau_ball(&sc, p, 400, 7).unwrap();
    // int of (-2 h'(r^2)/pi) over the disk is 2 h(0)
    let oracle = 2.0 * a;
    assert!(
        (t.value - oracle).abs() <= 3.0 * t.std_error + t.deterministic_error,
        "{t:?}"
    );
    assert!(t.max_drift < 1e-10);
    let again = tau_ball(&sc, p, 400, 7).unwrap();
    assert_eq!(t, again);
}

#[test]
fn tau_is_conjugation_invariant_and_homogeneous() {
    let sc = scenario(radial([0.0, 0.0], 0.5, 0.6, 3), None, 0.6, 1e-2);
    let g = SpMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.0, 1.0])).unwrap();
    let conj = sc.conjugated(&g).unwrap();
    let (p, n) = (8, 300);
    let a = tau_ball(&sc, p, n, 11).unwrap();
    let b = tau_ball(&conj, p, n, 11).unwrap();
    let tol = |x: &TauResult, y: &TauResult| {
        3.0 * x.std_error.hypot(y.std_error) + x.deterministic_error + y.deterministic_error
    };
    assert!((a.value - b.value).abs() <= tol(&a, &b), "{a:?} {b:?}");
    let sq = tau_ball(&sc.power(2), p, n, 11).unwrap();
    let two = TauResult {
        value: 2.0 * a.value,
        std_error: 2.0 * a.std_error,
        deterministic_error: 2.0 * a.deterministic_error,
        ..a.clone()
    };
    assert!((sq.value - two.value).abs() <= tol(&sq, &two));
}

#[test]
fn s_restriction_is_affine_in_s() {
    let sc = scenario(radial([0.0, 0.0], 0.5, 0.9, 3), None, 1.0, 1e-2);
    let lam = PrimitiveOneForm::standard();
    let quad = BallQuadrature { n_radial: 16, n_angular: 16, ..Default::default() };
    let v1 = s_restriction_value(&sc, 1.0, 4, 100, 5, &lam, &quad).unwrap();
    let v2 = v1.at(-2.0);
    assert!((v2.value - v1.value - (-3.0) * v1.calabi).abs() < 1e-9);
    assert!(s_restriction_value(&sc, 0.0, 4, 100, 5, &lam, &quad).is_err());
    let zero = Scenario::zero(2, 1.0).unwrap();
    assert_eq!(s_restriction_value(&zero, 3.0, 4, 10, 5, &lam, &quad).unwrap().value, 0.0);
}

#[test]
fn four_dimensional_flow_is_symplectic() {
    let h = FieldSpec::Radial {
        center: vec![0.1, 0.0, 0.0, -0.1],
        amplitude: 0.6,
        radius: 0.7,
        profile: Profile::Smooth,
    };
    let sc = Scenario::from_json(&ScenarioJson {
        dim: 4,
        form: "standard".into(),
        h: Some(h),
        time: Some(vec![1.0, 2.0]),
        stages: None,
        support_radius: 0.9,
        ball_radius: None,
        dt: Some(2e-3),
    })
    .unwrap();
    let path = jacobian_path(&sc, &[0.2, 0.1, -0.1, 0.0], 2).unwrap();
    let m = path.endpoint();
    assert!(crate::symplinalg::symplectic_defect(m.matrix()) < 1e-10);
    assert!((m.matrix().determinant() - 1.0).abs() < 1e-8);
}

#[test]
fn scenario_json_validation() {
    let ok = r#"{"dim":2,"form":"standard","H":{"kind":"radial","center":[0,0],"amplitude":1,"radius":1,"profile":{"power":2}},"support_radius":1.0,"dt":0.001}"#;
    let j: ScenarioJson = serde_json::from_str(ok).unwrap();
    let sc = Scenario::from_json(&j).unwrap();
    let back: ScenarioJson = serde_json::from_str(&serde_json::to_string(&sc.to_json()).unwrap()).unwrap();
    assert_eq!(Scenario::from_json(&back).unwrap().stages().len(), 1);
    let mut bad = j.clone();
    bad.form = "density".into();
    assert!(Scenario::from_json(&bad).unwrap_err().is_validation());
    let mut bad = j.clone();
    bad.support_radius = 0.5;
    bad.ball_radius = Some(2.0);
    assert!(Scenario::from_json(&bad).is_err());
    let mut bad = j;
    bad.dt = Some(0.3);
    assert!(Scenario::from_json(&bad).is_err());
}
