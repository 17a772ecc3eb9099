use std::f64::consts::PI;

use prandtl_core::calculus::{
    backward_weights, dt_stencil, dx, dy, mixed_derivative, reconstruct_v, vertical_velocity_bound, FlowHistory, Target,
};
use prandtl_core::grid::{build_grid, quadrature_2d, weight};
use prandtl_core::{EulerData, Error, Field, Grid, MultiIndex};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn grid_spacings() {
    let g = build_grid(8, 9, 2.0 * PI, 8.0).unwrap();
    assert!(close(g.hx(), PI / 4.0, 1e-15));
    assert_eq!(g.hy(), 1.0);
    assert_eq!(g.y(0), 0.0);
    assert_eq!(g.y(8), 8.0);

    let g = build_grid(16, 17, 1.0, 4.0).unwrap();
    assert_eq!(g.hx(), 1.0 / 16.0);
    assert_eq!(g.hy(), 0.25);
}

#[test]
fn grid_rejects_too_few_nodes() {
    assert!(matches!(build_grid(7, 9, 1.0, 1.0), Err(Error::InvalidParameter { .. })));
    assert!(build_grid(8, 7, 1.0, 1.0).is_err());
    assert!(build_grid(8, 9, -1.0, 1.0).is_err());
    assert!(build_grid(8, 9, 1.0, f64::NAN).is_err());
}

#[test]
fn weight_values() {
    assert_eq!(weight(0.0, 3.0), 1.0);
    assert_eq!(weight(1.0, 2.0), 4.0);
    assert_eq!(weight(3.0, -1.0), 0.25);
}

#[test]
fn quadrature_area_and_linear() {
    let g = Grid::new(8, 9, 2.0, 3.0).unwrap();
    assert!(close(quadrature_2d(&Field::filled(&g, 1.0), &g).unwrap(), 6.0, 1e-13));

    let g = Grid::new(8, 9, 1.0, 2.0).unwrap();
    let f = Field::from_fn(&g, |_, y| y);
    assert!(close(quadrature_2d(&f, &g).unwrap(), 2.0, 1e-14));
}

#[test]
fn quadrature_exponential_second_order() {
    let exact = 1.0 - (-20.0f64).exp();
    let err = |ny: usize| {
        let g = Grid::new(8, ny, 1.0, 20.0).unwrap();
        let f = Field::from_fn(&g, |_, y| (-y).exp());
        (quadrature_2d(&f, &g).unwrap() - exact).abs()
    };
    let (e1, e2) = (err(201), err(401));
    // trapezoid error hy^2/12 (f'(Y) - f'(0)) ~ hy^2 / 12
    assert!(e1 < 0.1 * 0.1 / 12.0 * 1.01);
    assert!(close((e1 / e2).log2(), 2.0, 0.05));
}

#[test]
fn quadrature_rejects_nan() {
    let g = Grid::new(8, 9, 1.0, 1.0).unwrap();
    let mut f = Field::zeros(&g);
    f.set(3, 4, f64::NAN);
    assert!(quadrature_2d(&f, &g).is_err());
}

fn dx_error(n: usize, order: usize) -> f64 {
    let l = 3.0;
    let k = 2.0 * PI / l;
    let g = Grid::new(n, 9, l, 1.0).unwrap();
    let f = Field::from_fn(&g, |x, _| (k * x).sin());
    let d = dx(&f, &g, order);
    let exact = Field::from_fn(&g, |x, _| match order {
        1 => k * (k * x).cos(),
        _ => -k * k * (k * x).sin(),
    });
    d.sub(&exact).max_abs()
}

#[test]
fn dx_second_order() {
    for order in [1, 2] {
        let rate = (dx_error(32, order) / dx_error(64, order)).log2();
        assert!(close(rate, 2.0, 0.2), "order {order}: rate {rate}");
    }
    assert!(dx_error(64, 1) < 0.01);
}

#[test]
fn derivatives_annihilate_constants() {
    let g = Grid::new(16, 33, 2.0, 4.0).unwrap();
    let c = Field::filled(&g, 2.5);
    for order in 1..=4 {
        assert_eq!(dx(&c, &g, order).max_abs(), 0.0);
        assert!(dy(&c, &g, order).max_abs() < 1e-9, "dy order {order}");
    }
}

#[test]
fn dy_exact_on_quadratics() {
    let g = Grid::new(8, 17, 1.0, 4.0).unwrap();
    let f = Field::from_fn(&g, |_, y| y * y);
    let d = dy(&f, &g, 1);
    let exact = Field::from_fn(&g, |_, y| 2.0 * y);
    assert!(d.sub(&exact).max_abs() < 1e-12);
    let d2 = dy(&f, &g, 2);
    assert!(d2.sub(&Field::filled(&g, 2.0)).max_abs() < 1e-10);
}

fn dy_error(ny: usize, order: usize) -> f64 {
    let g = Grid::new(8, ny, 1.0, 4.0).unwrap();
    let f = Field::from_fn(&g, |_, y| (-y).exp());
    let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
    let exact = Field::from_fn(&g, |_, y| sign * (-y).exp());
    dy(&f, &g, order).sub(&exact).max_abs()
}

#[test]
fn dy_second_order_for_every_derivative_order() {
    for order in 1..=4 {
        let rate = (dy_error(65, order) / dy_error(129, order)).log2();
        assert!(close(rate, 2.0, 0.2), "order {order}: rate {rate}");
    }
}

fn history_of(g: &Grid, dt: f64, n: usize, f: impl Fn(f64) -> f64) -> (Vec<Field>, f64) {
    let t_last = 1.0;
    let levels = (0..n)
        .map(|k| Field::filled(g, f(t_last - (n - 1 - k) as f64 * dt)))
        .collect();
    (levels, t_last)
}

#[test]
fn dt_stencil_examples() {
    let g = Grid::new(8, 9, 1.0, 1.0).unwrap();
    let (lv, t) = history_of(&g, 0.1, 3, |_| 4.0);
    let h = FlowHistory::new(&lv, t, 0.1).unwrap();
    assert!(dt_stencil(&h, 1).unwrap().max_abs() < 1e-12);

    let (lv, t) = history_of(&g, 0.1, 3, |s| s);
    let h = FlowHistory::new(&lv, t, 0.1).unwrap();
    assert!(dt_stencil(&h, 1).unwrap().sub(&Field::filled(&g, 1.0)).max_abs() < 1e-12);

    let err = |dt: f64| {
        let (lv, t) = history_of(&g, dt, 3, f64::exp);
        let h = FlowHistory::new(&lv, t, dt).unwrap();
        (dt_stencil(&h, 1).unwrap().at(0, 0) - t.exp()).abs()
    };
    let rate = (err(0.02) / err(0.01)).log2();
    assert!(close(rate, 2.0, 0.1), "rate {rate}");
}

#[test]
fn dt_stencil_short_history_names_window() {
    let g = Grid::new(8, 9, 1.0, 1.0).unwrap();
    let lv = vec![Field::zeros(&g)];
    let h = FlowHistory::new(&lv, 0.0, 0.1).unwrap();
    match dt_stencil(&h, 1) {
        Err(Error::HistoryTooShort { required, available }) => {
            assert_eq!((required, available), (2, 1));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn backward_weights_sum_to_zero() {
    for order in 1..=3 {
        let w = backward_weights(order, order + 2, 0.1);
        assert!(w.iter().sum::<f64>().abs() < 1e-6);
    }
}

#[test]
fn v_vanishes_for_x_independent_flow() {
    let g = Grid::new(16, 33, 2.0, 4.0).unwrap();
    let u = Field::from_fn(&g, |_, y| 1.0 - (-y).exp());
    assert_eq!(reconstruct_v(&u, &g).max_abs(), 0.0);
}

fn v_case(n: usize) -> (f64, f64, Field, Grid) {
    let l = 2.0;
    let k = 2.0 * PI / l;
    let g = Grid::new(n, 2 * n + 1, l, 4.0).unwrap();
    let u = Field::from_fn(&g, |x, y| (k * x).sin() * (1.0 - (-y).exp()));
    let v = reconstruct_v(&u, &g);
    let exact = Field::from_fn(&g, |x, y| -k * (k * x).cos() * (y - 1.0 + (-y).exp()));
    let err = v.sub(&exact).max_abs();
    let div = dy(&v, &g, 1).add(&dx(&u, &g, 1)).max_abs();
    (err, div, v, g)
}

#[test]
fn v_matches_closed_form_and_is_divergence_free() {
    let (e1, d1, v, g) = v_case(32);
    let (e2, d2, _, _) = v_case(64);
    for i in 0..g.nx() {
        assert_eq!(v.at(i, 0), 0.0);
    }
    assert!(close((e1 / e2).log2(), 2.0, 0.2), "v rate {}", (e1 / e2).log2());
    assert!(close((d1 / d2).log2(), 2.0, 0.3), "div rate {}", (d1 / d2).log2());
}

#[test]
fn mixed_derivative_examples() {
    let l = 2.0 * PI;
    let none = EulerData::zero(l);
    let err = |n: usize| {
        let g = Grid::new(n, 2 * n + 1, l, 4.0).unwrap();
        let u = Field::from_fn(&g, |x, y| x.sin() * (-y).exp());
        let lv = vec![u.clone()];
        let h = FlowHistory::new(&lv, 0.0, 0.1).unwrap();
        let same = mixed_derivative(&h, &none, &g, MultiIndex::ZERO, Target::U).unwrap();
        assert_eq!(same, u);
        let w = mixed_derivative(&h, &none, &g, MultiIndex::new(0, 0, 1), Target::U).unwrap();
        assert_eq!(w, dy(&u, &g, 1));
        let d = mixed_derivative(&h, &none, &g, MultiIndex::new(0, 1, 1), Target::U).unwrap();
        d.sub(&Field::from_fn(&g, |x, y| -x.cos() * (-y).exp())).max_abs()
    };
    let rate = (err(32) / err(64)).log2();
    assert!(close(rate, 2.0, 0.2), "rate {rate}");
}

#[test]
fn deviation_target_subtracts_outer_flow() {
    let l = 2.0 * PI;
    let euler = EulerData::sinusoidal(0.3, 0.5, 1, 0.2, l).unwrap();
    let g = Grid::new(16, 17, l, 4.0).unwrap();
    let lv = vec![euler.field(0, 0, 0.5, &g)];
    let h = FlowHistory::new(&lv, 0.5, 0.1).unwrap();
    let d = mixed_derivative(&h, &euler, &g, MultiIndex::ZERO, Target::Deviation).unwrap();
    assert!(d.max_abs() < 1e-15);
}

#[test]
fn velocity_bound_reports_finite_ratio() {
    let l = 2.0 * PI;
    let euler = EulerData::sinusoidal(0.1, 0.5, 1, 0.0, l).unwrap();
    let g = Grid::new(32, 129, l, 16.0).unwrap();
    let u = Field::from_fn(&g, |x, y| euler.value(0.0, x) * (1.0 - (1.0 + y).powi(-2)));
    let b = vertical_velocity_bound(&u, &euler, 0.0, &g, 2.0);
    assert!(b.deviation_norm > 0.0 && b.ratio.is_finite());
    assert!(b.weighted_v <= b.ratio * b.deviation_norm + b.outer_slope + 1e-14);
    // v = -U_x y^2/(1+y), so the weighted maximum approaches max|U_x|
    assert!(b.weighted_v < b.outer_slope);
}

#[test]
fn multi_index_enumeration() {
    let all = MultiIndex::all_up_to(2);
    assert_eq!(all.len(), 10);
    assert_eq!(all[0], MultiIndex::ZERO);
    assert_eq!(MultiIndex::tangential_up_to(2).len(), 6);
    let parts = MultiIndex::new(1, 1, 0).proper_parts();
    assert_eq!(parts.len(), 3);
}
