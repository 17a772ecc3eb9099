use std::f64::consts::PI;

use proptest::prelude::*;

use prandtl_core::calculus::{dx, dy, reconstruct_v};
use prandtl_core::diagnostics::norms::weighted_norm;
use prandtl_core::grid::{quadrature_2d, weight};
use prandtl_core::initial::{make_initial_data, validate_compatibility, InitialDataSpec, Perturbation, WallProfile};
use prandtl_core::linear_step::{robin_wall_row, thomas};
use prandtl_core::{EulerData, Field, Grid, MultiIndex, Wall};

const L: f64 = 2.0 * PI;

fn trig_field(g: &Grid, c: &[f64; 4]) -> Field {
    Field::from_fn(g, |x, y| {
        c[0] + c[1] * x.sin() * (-y).exp() + c[2] * (2.0 * x).cos() / (1.0 + y) + c[3] * y
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_is_positive_and_monotone(y in 0.0f64..100.0, dy_ in 0.0f64..10.0, p in 0.0f64..6.0) {
        prop_assert!(weight(y, p) >= 1.0);
        prop_assert!(weight(y + dy_, p) >= weight(y, p));
        prop_assert!(weight(y, -p) <= 1.0);
    }

    #[test]
    fn x_derivatives_have_zero_mean(c in prop::array::uniform4(-2.0f64..2.0), order in 1usize..4) {
        let g = Grid::new(16, 17, L, 4.0).unwrap();
        let d = dx(&trig_field(&g, &c), &g, order);
        for j in 0..g.ny() {
            let s: f64 = d.row(j).iter().sum();
            prop_assert!(s.abs() < 1e-10);
        }
    }

    #[test]
    fn y_derivative_exact_on_linear(a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let g = Grid::new(8, 33, L, 4.0).unwrap();
        let f = Field::from_fn(&g, |_, y| a + b * y);
        let d = dy(&f, &g, 1);
        prop_assert!(d.sub(&Field::filled(&g, b)).max_abs() < 1e-11 * (1.0 + a.abs() + b.abs()));
    }

    #[test]
    fn quadrature_is_linear(c in prop::array::uniform4(-2.0f64..2.0), d in prop::array::uniform4(-2.0f64..2.0), s in -3.0f64..3.0) {
        let g = Grid::new(8, 17, L, 4.0).unwrap();
        let (f, h) = (trig_field(&g, &c), trig_field(&g, &d));
        let lhs = quadrature_2d(&f.scale(s).add(&h), &g).unwrap();
        let rhs = s * quadrature_2d(&f, &g).unwrap() + quadrature_2d(&h, &g).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn vertical_velocity_vanishes_on_the_wall(c in prop::array::uniform4(-2.0f64..2.0)) {
        let g = Grid::new(16, 33, L, 4.0).unwrap();
        let v = reconstruct_v(&trig_field(&g, &c), &g);
        for i in 0..g.nx() {
            prop_assert_eq!(v.at(i, 0), 0.0);
        }
    }

    #[test]
    fn weighted_norm_is_homogeneous(c in prop::array::uniform4(-2.0f64..2.0), s in -5.0f64..5.0, ell in 0.0f64..3.0) {
        let g = Grid::new(8, 17, L, 4.0).unwrap();
        let f = trig_field(&g, &c);
        let a = weighted_norm(&f.scale(s), &g, ell);
        let b = s.abs() * weighted_norm(&f, &g, ell);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }

    #[test]
    fn robin_row_is_diagonally_dominant(beta in 1e-3f64..1e6, hy in 1e-3f64..1.0, dt in 1e-4f64..1.0) {
        let (a, b, c) = robin_wall_row(beta, hy, dt).unwrap();
        prop_assert!(b > a.abs() + c.abs());
    }

    #[test]
    fn thomas_solves_dominant_systems(
        diag in prop::collection::vec(2.5f64..5.0, 3..20),
        seed in prop::array::uniform3(-1.0f64..1.0),
    ) {
        let n = diag.len();
        let rows: Vec<(f64, f64, f64)> = (0..n)
            .map(|k| {
                let a = if k == 0 { 0.0 } else { seed[0] };
                let c = if k == n - 1 { 0.0 } else { seed[1] };
                (a, diag[k], c)
            })
            .collect();
        let rhs: Vec<f64> = (0..n).map(|k| seed[2] + k as f64).collect();
        let x = thomas(&rows, &rhs).unwrap();
        for k in 0..n {
            let mut r = rows[k].1 * x[k];
            if k > 0 { r += rows[k].0 * x[k - 1]; }
            if k + 1 < n { r += rows[k].2 * x[k + 1]; }
            prop_assert!((r - rhs[k]).abs() < 1e-10 * (1.0 + rhs[k].abs()));
        }
    }

    #[test]
    fn generated_data_are_compatible(
        theta in 1.6f64..5.0,
        beta in prop::option::of(0.5f64..1000.0),
        amp in 1e-3f64..1.0,
        bump in 0.0f64..0.9,
        eta in prop::option::of(-0.9f64..0.9),
    ) {
        let ell = 1.5f64.min(2.0 * theta - 1.0 - 1e-3).max(1.01);
        prop_assume!(theta > (ell + 1.0) / 2.0);
        let wall = beta.map_or(Wall::Dirichlet, Wall::Robin);
        let e = EulerData::sinusoidal(amp, bump, 1, 0.3, L).unwrap();
        let g = Grid::new(16, 65, L, 8.0).unwrap();
        let mut spec = InitialDataSpec::new(theta, 1e-2, wall, ell).unwrap();
        spec.perturbation = eta.map(|a| Perturbation { amplitude: a, mode: 2, phase: 0.1 });
        let data = make_initial_data(&spec, &e, &g).unwrap();
        let r = validate_compatibility(&data, &spec, &e, &g);
        prop_assert!(r.oleinik_ok);
        prop_assert!(data.omega0.min() > 0.0);
        let scale = data.u0.max_abs() + data.omega0.max_abs() * beta.unwrap_or(1.0);
        prop_assert!(r.wall_residual <= 1e-12 * scale);
        prop_assert!(r.far_field_mismatch <= 1e-12 * data.u0.max_abs());
        if eta.is_none() {
            let umax = (0..g.nx()).map(|i| e.value(0.0, g.x(i))).fold(0.0, f64::max);
            let umin = (0..g.nx()).map(|i| e.value(0.0, g.x(i))).fold(f64::INFINITY, f64::min);
            prop_assert!(r.sandwich.1 / r.sandwich.0 <= umax / umin * (1.0 + 1e-6));
        } else {
            prop_assert!(r.sandwich.0 > 0.0);
        }
    }

    #[test]
    fn profile_is_increasing_to_one(theta in 1.6f64..5.0, beta in 0.1f64..1e4, y in 0.0f64..50.0) {
        let p = WallProfile::half_line(theta, Wall::Robin(beta));
        prop_assert!(p.dg(y) > 0.0);
        prop_assert!(p.g(y) > 0.0 && p.g(y) < 1.0 + 1e-12);
        prop_assert!((p.dg(0.0) - beta * p.g(0.0)).abs() < 1e-12 * p.dg(0.0).max(1.0));
        let d = WallProfile::half_line(theta, Wall::Dirichlet);
        prop_assert!(p.a < d.a);
    }

    #[test]
    fn wall_selector(beta in -10.0f64..1e6) {
        let w = Wall::from_beta(beta);
        prop_assert_eq!(w.is_ok(), beta > 0.0);
    }

    #[test]
    fn proper_parts_count(a_t in 0usize..3, a_x in 0usize..3, s in 0usize..3) {
        let m = MultiIndex::new(a_t, a_x, s);
        prop_assert_eq!(m.proper_parts().len(), (a_t + 1) * (a_x + 1) * (s + 1) - 1);
        for (b, c) in m.proper_parts() {
            prop_assert!(m.checked_sub(b).is_some());
            prop_assert!(c >= 1.0);
        }
    }
}
