use std::f64::consts::PI;

use prandtl_core::euler::{euler_sobolev_norm, pressure_gradient};
use prandtl_core::initial::{
    make_initial_data, validate_compatibility, InitialData, InitialDataSpec, Perturbation, WallProfile,
};
use prandtl_core::{EulerData, Error, Field, Grid, Shape, Wall};

const L: f64 = 2.0 * PI;

#[test]
fn constant_outer_flow_has_no_pressure_gradient() {
    let e = EulerData::constant_decaying(0.7, 0.0, L).unwrap();
    let g = Grid::new(8, 9, L, 1.0).unwrap();
    assert_eq!(pressure_gradient(&e, 0.3, &g).max_abs(), 0.0);
}

#[test]
fn decaying_constant_pressure_gradient() {
    let (eps, gamma) = (0.01, 0.8);
    let e = EulerData::constant_decaying(eps, gamma, L).unwrap();
    for t in [0.0, 0.5, 1.0] {
        let expected = gamma * eps * (-gamma * t).exp();
        assert!((e.px(t, 1.3) - expected).abs() < 1e-17);
    }
}

#[test]
fn sinusoidal_pressure_gradient_against_differences() {
    let e = EulerData::new(0.01, 1.0, 0.5, Shape::Sine { mode: 1 }, 1.0, L).unwrap();
    let err = |h: f64| {
        let mut worst: f64 = 0.0;
        for k in 0..16 {
            let (t, x) = (0.4, k as f64 * L / 16.0);
            let ut = (e.value(t + h, x) - e.value(t - h, x)) / (2.0 * h);
            let ux = (e.value(t, x + h) - e.value(t, x - h)) / (2.0 * h);
            worst = worst.max((e.px(t, x) + ut + e.value(t, x) * ux).abs());
        }
        worst
    };
    let (e1, e2) = (err(1e-2), err(5e-3));
    assert!(e1 < 1e-6);
    assert!(((e1 / e2).log2() - 2.0).abs() < 0.1);
}

#[test]
fn derivatives_match_differences_for_gaussian() {
    let e = EulerData::gaussian(1.0, 0.3, 2.0, 0.6, 0.2, L).unwrap();
    let h = 1e-4;
    for k in 0..12 {
        let x = k as f64 * L / 12.0;
        for ax in 0..3 {
            let fd = (e.derivative(0, ax, 0.1, x + h) - e.derivative(0, ax, 0.1, x - h)) / (2.0 * h);
            assert!((fd - e.derivative(0, ax + 1, 0.1, x)).abs() < 1e-5, "ax {ax} x {x}");
        }
    }
    assert!((e.value(0.0, 2.0) - e.value(0.0, 2.0 + L)).abs() < 1e-14);
}

#[test]
fn sobolev_norms() {
    let g = Grid::new(64, 9, L, 1.0).unwrap();
    assert_eq!(euler_sobolev_norm(&EulerData::zero(L), 0.0, 3, &g), 0.0);
    let eps = 0.01;
    let e = EulerData::new(eps, 0.0, 1.0, Shape::Sine { mode: 1 }, 0.0, L).unwrap();
    assert!((euler_sobolev_norm(&e, 0.0, 0, &g) - eps * PI.sqrt()).abs() < 1e-14);
    // the rectangle rule is exact for these trigonometric polynomials
    assert!((euler_sobolev_norm(&e, 0.0, 1, &g) - eps * (2.0 * PI).sqrt()).abs() < 1e-14);
}

#[test]
fn outer_flow_validation() {
    assert!(EulerData::new(f64::NAN, 1.0, 0.0, Shape::Flat, 0.0, L).is_err());
    assert!(EulerData::gaussian(1.0, 0.1, 0.0, 0.0, 0.0, L).is_err());
    assert!(EulerData::sinusoidal(1.0, 0.5, 1, 0.0, L).unwrap().is_positive());
    assert!(!EulerData::sinusoidal(1.0, 1.5, 1, 0.0, L).unwrap().is_positive());
}

#[test]
fn dirichlet_profile_closed_form() {
    let p = WallProfile::half_line(3.0, Wall::Dirichlet);
    assert_eq!(p.a, 2.0);
    for y in [0.0, 0.5, 2.0, 10.0] {
        assert!((p.g(y) - (1.0 - (1.0 + y).powi(-2))).abs() < 1e-15);
        assert!((p.dg(y) - 2.0 * (1.0 + y).powi(-3)).abs() < 1e-15);
    }
    assert_eq!(p.g(0.0), 0.0);
}

#[test]
fn robin_profile_closed_form() {
    let p = WallProfile::half_line(3.0, Wall::Robin(2.0));
    assert!((p.a - 1.0).abs() < 1e-15);
    assert!((p.g(0.0) - 0.5).abs() < 1e-15);
    assert!((p.dg(0.0) - 2.0 * p.g(0.0)).abs() < 1e-15);
    assert!((p.g(1e9) - 1.0).abs() < 1e-9);
}

#[test]
fn robin_constant_approaches_dirichlet_monotonically() {
    let mut prev = 0.0;
    for beta in [1.0, 4.0, 16.0, 64.0, 256.0, 1024.0] {
        let a = WallProfile::half_line(3.0, Wall::Robin(beta)).a;
        assert!(a > prev && a < 2.0);
        prev = a;
    }
    assert!((2.0 - prev) < 4.0 / 1024.0);
}

fn setup(wall: Wall) -> (InitialDataSpec, EulerData, Grid) {
    let e = EulerData::sinusoidal(1e-2, 0.5, 1, 0.5, L).unwrap();
    let g = Grid::new(16, 257, L, 32.0).unwrap();
    (InitialDataSpec::new(3.0, 1e-2, wall, 2.0).unwrap(), e, g)
}

#[test]
fn robin_data_compatibility() {
    let (spec, e, g) = setup(Wall::Robin(2.0));
    let data = make_initial_data(&spec, &e, &g).unwrap();
    let r = validate_compatibility(&data, &spec, &e, &g);
    assert!(r.oleinik_ok && r.min_omega > 0.0);
    // the closed-form vorticity is used, so the wall relation is exact
    assert!(r.wall_residual < 1e-12, "{}", r.wall_residual);
    assert!(r.far_field_mismatch < 1e-12);
    let fit = r.decay.unwrap();
    assert!((fit.theta_hat - 3.0).abs() < 1e-6, "{}", fit.theta_hat);
    let umax = (0..g.nx()).map(|i| e.value(0.0, g.x(i))).fold(0.0, f64::max);
    let umin = (0..g.nx()).map(|i| e.value(0.0, g.x(i))).fold(f64::INFINITY, f64::min);
    assert!(r.sandwich.0 > 0.0);
    assert!(r.sandwich.1 / r.sandwich.0 <= umax / umin * (1.0 + 1e-6));
    assert!(r.wall_trace_term > 0.0);
}

#[test]
fn dirichlet_data_vanish_on_the_wall() {
    let (spec, e, g) = setup(Wall::Dirichlet);
    let data = make_initial_data(&spec, &e, &g).unwrap();
    for i in 0..g.nx() {
        assert!(data.u0.at(i, 0).abs() < 1e-17);
    }
    let r = validate_compatibility(&data, &spec, &e, &g);
    assert_eq!(r.wall_trace_term, 0.0);

    let mut u0 = data.u0.clone();
    for i in 0..g.nx() {
        u0.set(i, 0, 1e-3);
    }
    let bad = InitialData { u0, omega0: data.omega0.clone() };
    let r = validate_compatibility(&bad, &spec, &e, &g);
    assert!((r.wall_residual - 1e-3).abs() < 1e-18);
}

#[test]
fn zero_outer_flow_is_rejected() {
    let (spec, _, g) = setup(Wall::Dirichlet);
    let e = EulerData::zero(L);
    assert!(matches!(make_initial_data(&spec, &e, &g), Err(Error::Infeasible(_))));
}

#[test]
fn sign_changing_vorticity_is_flagged() {
    let (spec, e, g) = setup(Wall::Robin(10.0));
    let u0 = Field::from_fn(&g, |_, y| (y - 2.0).powi(2));
    let data = InitialData::from_u0(u0, &g);
    let r = validate_compatibility(&data, &spec, &e, &g);
    assert!(!r.oleinik_ok);
    assert!(r.decay.is_none());
    assert!(r.warnings.iter().any(|w| w.contains("Oleinik")));
}

#[test]
fn spec_validation() {
    assert!(InitialDataSpec::new(1.4, 1e-2, Wall::Dirichlet, 2.0).is_err());
    assert!(InitialDataSpec::new(3.0, 1e-2, Wall::Dirichlet, 1.0).is_err());
    assert!(InitialDataSpec::new(3.0, 0.0, Wall::Dirichlet, 2.0).is_err());
    assert!(InitialDataSpec::new(3.0, 1e-2, Wall::Robin(0.0), 2.0).is_err());
    let mut s = InitialDataSpec::new(3.0, 1e-2, Wall::Dirichlet, 2.0).unwrap();
    s.perturbation = Some(Perturbation { amplitude: 1.0, mode: 1, phase: 0.0 });
    assert!(s.validate().is_err());
}

#[test]
fn robin_data_converge_to_dirichlet_like_inverse_beta() {
    let (spec_d, e, g) = setup(Wall::Dirichlet);
    let ud = make_initial_data(&spec_d, &e, &g).unwrap().u0;
    let mut scaled = Vec::new();
    for beta in [10.0, 100.0, 1000.0] {
        let (spec, _, _) = setup(Wall::Robin(beta));
        let ub = make_initial_data(&spec, &e, &g).unwrap().u0;
        scaled.push(beta * ub.sub(&ud).max_abs());
    }
    let ratio = scaled[2] / scaled[0];
    assert!(ratio > 0.8 && ratio < 1.25, "{scaled:?}");
}

#[test]
fn perturbation_is_affine_and_keeps_positivity() {
    let (base, e, g) = setup(Wall::Robin(50.0));
    let with = |eta: f64| {
        let mut s = base.clone();
        s.perturbation = Some(Perturbation { amplitude: eta, mode: 2, phase: 0.3 });
        make_initial_data(&s, &e, &g).unwrap()
    };
    let d0 = make_initial_data(&base, &e, &g).unwrap();
    let d1 = with(0.2);
    let d2 = with(0.4);
    let lhs = d2.omega0.sub(&d0.omega0);
    let rhs = d1.omega0.sub(&d0.omega0).scale(2.0);
    assert!(lhs.sub(&rhs).max_abs() <= 1e-15 * d0.omega0.max_abs());
    assert!(with(0.9).omega0.min() > 0.0);
    let r = validate_compatibility(&d2, &base, &e, &g);
    assert!(r.wall_residual < 1e-12 && r.far_field_mismatch < 1e-12);
}
