use proptest::prelude::*;
use trdiff::reconstruction::one_d::{central, high_order};
use trdiff::reconstruction::two_d::{gauss_points, OFFSETS};
use trdiff::reconstruction::{
    path_chi, reconstruct_boundary_dirichlet, reconstruct_boundary_neumann, reconstruct_face_1d, reconstruct_face_2d,
    smoothness_1d, PathParams, Scheme, Side, Stencil1D,
};

fn scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::Geno), Just(Scheme::Linear), Just(Scheme::Central)]
}

#[test]
fn centered_step_keeps_midpoint_value() {
    let f = reconstruct_face_1d(&Stencil1D::new([1.0, 1.0, 5.0, 5.0], 2.0), Scheme::Geno);
    assert_eq!(f.value, 3.0);
    assert!(f.gradient > 0.0);
}

#[test]
fn offset_step_uses_adjacent_cells() {
    let f = reconstruct_face_1d(&Stencil1D::new([0.0, 1.0, 1.0, 1.0], 1.0), Scheme::Geno);
    assert!(f.chi < 1e-20);
    assert!((f.value - 1.0).abs() < 1e-15 && f.gradient.abs() < 1e-15, "{f:?}");
}

#[test]
fn boundary_closures_exact_for_quadratics() {
    // cell averages of 1 + 2x + 3x^2 on [0,h] and [h,2h] with the wall at x = 0
    let h = 0.25;
    let avg = |a: f64, b: f64| ((b + b * b + b * b * b) - (a + a * a + a * a * a)) / (b - a);
    let (q1, q2) = (avg(0.0, h), avg(h, 2.0 * h));
    let d = reconstruct_boundary_dirichlet(1.0, q1, q2, h, Side::Low);
    assert!((d.gradient - 2.0).abs() < 1e-12, "{d:?}");
    let n = reconstruct_boundary_neumann(2.0, q1, q2, h, Side::Low);
    assert!((n.value - 1.0).abs() < 1e-12, "{n:?}");
}

proptest! {
    #[test]
    fn blend_lies_between_linear_and_central(q in prop::array::uniform4(-1e3f64..1e3), h in 0.01f64..10.0) {
        let s = Stencil1D::new(q, h);
        let f = reconstruct_face_1d(&s, Scheme::Geno);
        let (v3, g3) = high_order(&s);
        let (v1, g1) = central(&s);
        prop_assert!((0.0..=1.0).contains(&f.chi));
        let tol = 1e-12 * (1.0 + v3.abs() + v1.abs());
        prop_assert!(f.value >= v3.min(v1) - tol && f.value <= v3.max(v1) + tol);
        let tol = 1e-12 * (1.0 + g3.abs() + g1.abs());
        prop_assert!(f.gradient >= g3.min(g1) - tol && f.gradient <= g3.max(g1) + tol);
    }

    #[test]
    fn reversal_is_exactly_antisymmetric(q in prop::array::uniform4(-1e6f64..1e6), h in 1e-3f64..1e3, s in scheme()) {
        let st = Stencil1D::new(q, h);
        let a = reconstruct_face_1d(&st, s);
        let b = reconstruct_face_1d(&st.reversed(), s);
        prop_assert_eq!(a.value, b.value);
        prop_assert_eq!(a.gradient, -b.gradient);
    }

    #[test]
    fn shift_and_scale_covariance(q in prop::array::uniform4(0.0f64..1.0), shift in -10.0f64..10.0, k in 0..4i32) {
        // scaling by a power of two keeps the arithmetic exact apart from the epsilon floor
        let scale = 2f64.powi(k);
        let a = reconstruct_face_1d(&Stencil1D::new(q, 1.0), Scheme::Linear);
        let b = reconstruct_face_1d(&Stencil1D::new(q.map(|v| scale * v + shift), 1.0), Scheme::Linear);
        prop_assert!((b.value - (scale * a.value + shift)).abs() <= 1e-12 * (1.0 + shift.abs() + scale));
        prop_assert!((b.gradient - scale * a.gradient).abs() <= 1e-12 * scale * (1.0 + a.gradient.abs()));
    }

    #[test]
    fn chi_equals_one_on_linear_data(a in -1e3f64..1e3, b in -10.0f64..10.0) {
        prop_assume!(b.abs() > 1e-6);
        let q = [0.0, 1.0, 2.0, 3.0].map(|k| a + b * k);
        let ind = smoothness_1d(&q);
        prop_assert!(ind.tau.abs() <= 1e-9 * ind.high);
        let chi = reconstruct_face_1d(&Stencil1D::new(q, 1.0), Scheme::Geno).chi;
        prop_assert!((chi - 1.0).abs() < 1e-12, "{}", chi);
    }

    #[test]
    fn path_chi_in_unit_interval(low in 0.0f64..1e3, extra in 0.0f64..1e3, tau in 0.0f64..1e3) {
        let chi = path_chi(low, low + extra, tau, &PathParams::TANGENTIAL);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&chi));
    }

    #[test]
    fn tangential_mean_and_bounds(b in prop::array::uniform13(1e-4f64..1e3), s in scheme()) {
        let r = reconstruct_face_2d(&b, s);
        let mean = r.points.iter().sum::<f64>() / 4.0;
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!((mean - b[0]).abs() <= 1e-13 * scale);
        prop_assert!((0.0..=1.0).contains(&r.chi));
    }

    #[test]
    fn tangential_plane_exact(c0 in -10.0f64..10.0, cx in -5.0f64..5.0, cy in -5.0f64..5.0, s in scheme()) {
        let b = OFFSETS.map(|(p, q)| c0 + cx * p as f64 + cy * q as f64);
        let r = reconstruct_face_2d(&b, s);
        for (k, (x, y)) in gauss_points().iter().enumerate() {
            prop_assert!((r.points[k] - (c0 + cx * x + cy * y)).abs() < 1e-11);
        }
    }
}
