use super::*;
use crate::numerics::GridLayout;
use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn gaussian_diag(entries: &[f64]) -> LogConcaveFunction {
    LogConcaveFunction::gaussian(SpdMatrix::from_diag(entries).unwrap()).unwrap()
}

fn square_gauge(q: f64) -> LogConcaveFunction {
    LogConcaveFunction::gauge_power(ConvexBody::unit_cube(2).unwrap(), q).unwrap()
}

#[test]
fn support_function_of_standard_gaussian() {
    let f = LogConcaveFunction::standard_gaussian(2).unwrap();
    for y in [[0.3, -1.2], [2.0, 0.5], [0.0, 0.0]] {
        let expected = (y[0] * y[0] + y[1] * y[1]) / 2.0;
        assert_abs_diff_eq!(f.support_function(&y).unwrap(), expected, epsilon = 1e-14);
    }
}

#[test]
fn support_function_of_anisotropic_gaussian() {
    let f = gaussian_diag(&[4.0, 1.0]);
    assert_abs_diff_eq!(f.support_function(&[1.0, 0.0]).unwrap(), 0.125, epsilon = 1e-14);
}

#[test]
fn support_function_of_square_gauge_power() {
    // h_K((1,1)) = 2 for the unit square; with q = 2 the support of f is
    // h_K^2 / 2 = 2 at that point.
    let f = square_gauge(2.0);
    assert_abs_diff_eq!(f.support_function(&[1.0, 1.0]).unwrap(), 2.0, epsilon = 1e-12);
}

#[test]
fn grid_potential_support_matches_closed_form() {
    let layout = GridLayout::new(2, 8.6, 129).unwrap();
    let grid = Grid::from_fn(layout, |x| (x[0] * x[0] + x[1] * x[1]) / 2.0).unwrap();
    let f = LogConcaveFunction::from_potential_grid(grid).unwrap();
    for y in [[0.5, 0.25], [1.5, -2.0]] {
        let expected = (y[0] * y[0] + y[1] * y[1]) / 2.0;
        let got = f.support_function(&y).unwrap();
        assert!((got - expected).abs() < 5e-3, "{got} vs {expected}");
    }
}

#[test]
fn loader_rejects_class_violations() {
    // u(o) != 0
    let layout = GridLayout::new(1, 9.0, 65).unwrap();
    let shifted = Grid::from_fn(layout, |x| x[0] * x[0] / 2.0 + 0.5).unwrap();
    assert!(matches!(
        LogConcaveFunction::from_potential_grid(shifted),
        Err(Error::NotInClass(_))
    ));

    // not convex
    let bumpy =
        Grid::from_fn(layout, |x| x[0] * x[0] / 2.0 - 0.4 * (3.0 * x[0]).cos() + 0.4).unwrap();
    assert!(LogConcaveFunction::from_potential_grid(bumpy).is_err());

    // insufficient decay
    let slow = Grid::from_fn(GridLayout::new(1, 2.0, 65).unwrap(), |x| x[0] * x[0] / 2.0).unwrap();
    assert!(matches!(
        LogConcaveFunction::from_potential_grid(slow),
        Err(Error::DecayCheckFailed { .. })
    ));
}

// ---------------------------------------------------------------------
// gl_image
// ---------------------------------------------------------------------

#[test]
fn gl_image_of_gaussian_is_congruence() {
    let f = LogConcaveFunction::standard_gaussian(2).unwrap();
    let t = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
    let g = f.gl_image(&t).unwrap();
    match g.potential() {
        Potential::Quadratic { q, .. } => {
            assert!(q.operator_distance(&SpdMatrix::from_diag(&[4.0, 1.0]).unwrap()) < 1e-12);
        }
        other => panic!("expected quadratic, got {other:?}"),
    }
}

#[test]
fn gl_image_identity_is_noop() {
    let f = square_gauge(2.0);
    let g = f.gl_image(&DMatrix::identity(2, 2)).unwrap();
    for y in [[0.4, 0.2], [-1.0, 0.7]] {
        assert_abs_diff_eq!(
            f.support_function(&y).unwrap(),
            g.support_function(&y).unwrap(),
            epsilon = 1e-12
        );
    }
}

#[test]
fn gl_image_support_covariance() {
    // h_{Tf}(y) = h_f(T^{-t} y) at 100 seeded points.
    let f = square_gauge(1.5);
    let t = DMatrix::from_row_slice(2, 2, &[1.3, 0.4, -0.2, 0.9]);
    let tf = f.gl_image(&t).unwrap();
    let t_inv_t = t.transpose().try_inverse().unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    for _ in 0..100 {
        let y = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let mapped = [
            t_inv_t[(0, 0)] * y[0] + t_inv_t[(0, 1)] * y[1],
            t_inv_t[(1, 0)] * y[0] + t_inv_t[(1, 1)] * y[1],
        ];
        assert_abs_diff_eq!(
            tf.support_function(&y).unwrap(),
            f.support_function(&mapped).unwrap(),
            epsilon = 1e-10
        );
    }
}

#[test]
fn gl_image_composes() {
    let f = square_gauge(2.0);
    let s = DMatrix::from_row_slice(2, 2, &[1.1, 0.3, 0.0, 0.8]);
    let t = DMatrix::from_row_slice(2, 2, &[0.9, -0.2, 0.4, 1.2]);
    let lhs = f.gl_image(&s).unwrap().gl_image(&t).unwrap();
    let rhs = f.gl_image(&(&s * &t)).unwrap();
    for y in [[0.5, 0.1], [-0.3, 0.8]] {
        assert_abs_diff_eq!(
            lhs.support_function(&y).unwrap(),
            rhs.support_function(&y).unwrap(),
            epsilon = 1e-9
        );
    }
}

#[test]
fn gl_image_rejects_near_singular() {
    let f = LogConcaveFunction::standard_gaussian(2).unwrap();
    let t = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-12]);
    assert!(matches!(f.gl_image(&t), Err(Error::NearSingular(_))));
}

#[test]
fn mass_changes_by_inverse_determinant() {
    let t = DMatrix::from_row_slice(2, 2, &[1.4, 0.3, -0.1, 0.8]);
    let det = (1.4f64 * 0.8 - 0.3 * (-0.1)).abs();
    for f in [gaussian_diag(&[1.0, 1.0]), square_gauge(2.0)] {
        let tf = f.gl_image(&t).unwrap();
        let ratio = tf.total_mass().unwrap() / f.total_mass().unwrap();
        assert!((ratio - 1.0 / det).abs() < 1e-4 / det, "ratio {ratio}");
        let eratio = tf.entropy_mass().unwrap() / f.entropy_mass().unwrap();
        assert!(
            (eratio - 1.0 / det).abs() < 1e-4 / det,
            "entropy ratio {eratio}"
        );
    }
}

// ---------------------------------------------------------------------
// polar
// ---------------------------------------------------------------------

#[test]
fn standard_gaussian_is_self_polar() {
    let f = LogConcaveFunction::standard_gaussian(3).unwrap();
    let p = f.polar().unwrap();
    match p.potential() {
        Potential::Quadratic { q, .. } => {
            assert!(q.operator_distance(&SpdMatrix::identity(3)) < 1e-12)
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn polar_of_gaussian_inverts_matrix_and_is_involutive() {
    let q = SpdMatrix::from_diag(&[4.0, 1.0]).unwrap();
    let f = LogConcaveFunction::gaussian(q.clone()).unwrap();
    let p = f.polar().unwrap();
    match p.potential() {
        Potential::Quadratic { q: qp, .. } => {
            assert!(qp.operator_distance(&SpdMatrix::from_diag(&[0.25, 1.0]).unwrap()) < 1e-12);
        }
        other => panic!("{other:?}"),
    }
    let back = p.polar().unwrap();
    match back.potential() {
        Potential::Quadratic { q: qb, .. } => {
            assert!(qb.operator_distance(&q) < 1e-12);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn polar_commutes_with_gl_images() {
    // (T f) polar = T^{-t} (f polar), checked through support functions.
    let f = square_gauge(2.0);
    let t = DMatrix::from_row_slice(2, 2, &[1.2, 0.5, -0.3, 0.9]);
    let lhs = f.gl_image(&t).unwrap().polar().unwrap();
    let t_inv_t = t.transpose().try_inverse().unwrap();
    let rhs = f.polar().unwrap().gl_image(&t_inv_t).unwrap();
    for y in [[0.4, 0.3], [-0.6, 0.2], [1.0, -1.0]] {
        assert_abs_diff_eq!(
            lhs.support_function(&y).unwrap(),
            rhs.support_function(&y).unwrap(),
            epsilon = 1e-9
        );
    }
}

#[test]
fn polar_of_grid_potential_matches_conjugate() {
    let layout = GridLayout::new(2, 8.6, 129).unwrap();
    let grid = Grid::from_fn(layout, |x| (x[0] * x[0] + x[1] * x[1]) / 2.0).unwrap();
    let f = LogConcaveFunction::from_potential_grid(grid).unwrap();
    let p = f.polar().unwrap();
    // The standard Gaussian potential is self-conjugate.
    for x in [[0.5, 0.5], [1.0, -1.5]] {
        let expected = (x[0] * x[0] + x[1] * x[1]) / 2.0;
        assert!((p.potential_value(&x) - expected).abs() < 5e-3);
    }
    let mass = p.total_mass().unwrap();
    assert!((mass - TWO_PI).abs() < 2e-2, "polar mass {mass}");
}

#[test]
fn santalo_product_on_test_family() {
    // J(f) J(f polar) <= (2 pi)^n, equality on Gaussians.
    let bound = TWO_PI * TWO_PI;
    for (f, slack) in [
        (LogConcaveFunction::standard_gaussian(2).unwrap(), 1e-9),
        (gaussian_diag(&[4.0, 1.0]), 1e-9),
        (square_gauge(2.0), 1e-6),
        (square_gauge(1.5), 1e-6),
    ] {
        let product = f.total_mass().unwrap() * f.polar().unwrap().total_mass().unwrap();
        assert!(product <= bound + slack, "product {product} vs {bound}");
    }
}

// ---------------------------------------------------------------------
// scalar multiplication and Asplund sums
// ---------------------------------------------------------------------

#[test]
fn scalar_mult_identity() {
    let f = square_gauge(2.0);
    let g = lp_scalar_mult(1.0, &f, 2.0).unwrap();
    assert_abs_diff_eq!(
        g.support_function(&[0.7, 0.2]).unwrap(),
        f.support_function(&[0.7, 0.2]).unwrap(),
        epsilon = 1e-14
    );
}

#[test]
fn scalar_mult_gaussian_scaling_law() {
    // lambda^p ._p gamma_Q = gamma_{Q / lambda}.
    let q = SpdMatrix::identity(2);
    let f = LogConcaveFunction::gaussian(q).unwrap();
    let lambda: f64 = 3.0;
    let p = 2.0;
    let g = lp_scalar_mult(lambda.powf(p), &f, p).unwrap();
    match g.potential() {
        Potential::Quadratic { q, .. } => {
            let expected = SpdMatrix::from_diag(&[1.0 / lambda, 1.0 / lambda]).unwrap();
            assert!(q.operator_distance(&expected) < 1e-12);
        }
        other => panic!("{other:?}"),
    }
    // J(lambda^p ._p gamma_Q) = lambda^{n/2} J(gamma_Q) with n = 2.
    assert_abs_diff_eq!(
        g.total_mass().unwrap(),
        lambda * f.total_mass().unwrap(),
        epsilon = 1e-10
    );
}

#[test]
fn scalar_mult_scales_support_function() {
    let f = square_gauge(1.5);
    let lambda = 2.3;
    let p = 3.0;
    let g = lp_scalar_mult(lambda, &f, p).unwrap();
    let factor = lambda.powf(1.0 / p);
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    for _ in 0..100 {
        let y = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        assert_abs_diff_eq!(
            g.support_function(&y).unwrap(),
            factor * f.support_function(&y).unwrap(),
            epsilon = 1e-10
        );
    }
}

#[test]
fn asplund_sum_of_gaussians_closed_form() {
    // 1 ._p gamma (+)_p 1 ._p gamma has exponent ||x||^2 / (2 * 2^{1/p}).
    let f = LogConcaveFunction::standard_gaussian(2).unwrap();
    for p in [1.0, 2.0, 4.0] {
        let s = lp_asplund_sum(&f, &f, 1.0, 1.0, p).unwrap();
        let c = 2.0f64.powf(1.0 / p);
        match s.potential() {
            Potential::Quadratic { q, .. } => {
                let expected = SpdMatrix::from_diag(&[1.0 / c, 1.0 / c]).unwrap();
                assert!(q.operator_distance(&expected) < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert_abs_diff_eq!(s.total_mass().unwrap(), TWO_PI * c, epsilon = 1e-9);
    }
}

#[test]
fn asplund_sum_grid_route_matches_gaussian_closed_form() {
    let f = LogConcaveFunction::standard_gaussian(2).unwrap();
    let p = 2.0;
    let (s, _) = lp_asplund_sum_grid(&f, &f, 1.0, 1.0, p, None).unwrap();
    let c = 2.0f64.powf(1.0 / p);
    for x in [[0.5, 0.0], [1.0, 1.0], [-2.0, 0.5]] {
        let expected = (x[0] * x[0] + x[1] * x[1]) / (2.0 * c);
        let got = s.potential_value(&x);
        assert!((got - expected).abs() < 5e-3, "{got} vs {expected}");
    }
    let mass = s.total_mass().unwrap();
    assert!((mass - TWO_PI * c).abs() / (TWO_PI * c) < 5e-3, "mass {mass}");
}

#[test]
fn asplund_p1_self_sum_is_right_scalar_double() {
    // At p = 1 with alpha = beta = 1 and f = g the sum's potential is the
    // right scalar multiple (u 2)(x) = 2 u(x/2).
    // Probe points stay off the gauge's sector boundaries, where pointwise
    // interpolation of the resampled potential is first-order.
    let f = square_gauge(2.0);
    let (s, _) = lp_asplund_sum_grid(&f, &f, 1.0, 1.0, 1.0, None).unwrap();
    for x in [[0.6, 0.2], [1.5, -1.0], [2.5, 1.7]] {
        let expected = 2.0 * f.potential_value(&[x[0] / 2.0, x[1] / 2.0]);
        let got = s.potential_value(&x);
        assert!((got - expected).abs() < 2e-2, "{got} vs {expected}");
    }
}

#[test]
fn asplund_degenerate_coefficients() {
    let f = LogConcaveFunction::standard_gaussian(2).unwrap();
    let s = lp_asplund_sum(&f, &f, 0.0, 0.0, 2.0).unwrap();
    assert!(s.is_point_mass());
    assert_eq!(s.total_mass().unwrap(), 0.0);

    // One-sided coefficients reduce to scalar multiplication.
    let left = lp_asplund_sum(&f, &f, 2.0, 0.0, 2.0).unwrap();
    let expect = lp_scalar_mult(2.0, &f, 2.0).unwrap();
    assert_abs_diff_eq!(
        left.support_function(&[0.5, 0.5]).unwrap(),
        expect.support_function(&[0.5, 0.5]).unwrap(),
        epsilon = 1e-13
    );
}

#[test]
fn indicator_sum_is_indicator_of_lp_combination() {
    // chi_K (+)_p chi_L = chi_{K +_p L}: for p = 1 against the exact
    // Minkowski sum, for p = 2 against the support-function body area.
    let k = ConvexBody::unit_cube(2).unwrap();
    let rot: Vec<Vec<f64>> = k
        .vertices()
        .iter()
        .map(|v| {
            let c = std::f64::consts::FRAC_1_SQRT_2;
            vec![c * (v[0] - v[1]) * 1.3, c * (v[0] + v[1]) * 1.3]
        })
        .collect();
    let l = ConvexBody::from_vertices(2, &rot).unwrap();
    let chi_k = LogConcaveFunction::indicator(k.clone()).unwrap();
    let chi_l = LogConcaveFunction::indicator(l.clone()).unwrap();

    for p in [1.0, 2.0] {
        let (s, _) = lp_asplund_sum_grid(&chi_k, &chi_l, 1.0, 1.0, p, None).unwrap();
        let mass = s.total_mass().unwrap();
        let area = if p == 1.0 {
            k.minkowski_sum(&l).unwrap().volume()
        } else {
            crate::oracle::support_body_area(
                |w| {
                    let hk = k.support(w).max(0.0);
                    let hl = l.support(w).max(0.0);
                    (hk * hk + hl * hl).sqrt()
                },
                2048,
            )
        };
        let rel = (mass - area).abs() / area;
        assert!(rel < 0.05, "p={p}: mass {mass} vs area {area} (rel {rel})");

        // Inside the body the density is 1, far outside it vanishes.
        let gauge_of_sum = |x: &[f64]| -> f64 {
            let mut g: f64 = 0.0;
            for j in 0..512 {
                let a = 2.0 * std::f64::consts::PI * j as f64 / 512.0;
                let w = [a.cos(), a.sin()];
                let hk = k.support(&w).max(0.0);
                let hl = l.support(&w).max(0.0);
                let h = (hk.powf(p) + hl.powf(p)).powf(1.0 / p);
                g = g.max((x[0] * w[0] + x[1] * w[1]) / h);
            }
            g
        };
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..50 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let gauge = gauge_of_sum(&x);
            if gauge < 0.9 {
                assert!(s.density(&x) > 0.999, "inside point {x:?}");
            } else if gauge > 1.2 {
                assert!(s.density(&x) < 0.05, "outside point {x:?}");
            }
        }
    }
}

// ---------------------------------------------------------------------
// masses
// ---------------------------------------------------------------------

#[test]
fn gaussian_masses() {
    assert_abs_diff_eq!(
        LogConcaveFunction::standard_gaussian(2)
            .unwrap()
            .total_mass()
            .unwrap(),
        TWO_PI,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(
        gaussian_diag(&[4.0, 1.0]).total_mass().unwrap(),
        std::f64::consts::PI,
        epsilon = 1e-12
    );
}

#[test]
fn gaussian_mass_quadrature_cross_check() {
    for f in [
        LogConcaveFunction::standard_gaussian(2).unwrap(),
        gaussian_diag(&[9.0, 1.0]),
    ] {
        let closed = f.total_mass().unwrap();
        let quad = f.total_mass_quadrature().unwrap();
        assert!((closed - quad).abs() / closed < 1e-10, "{closed} vs {quad}");
    }
}

#[test]
fn gauge_power_mass_closed_form_matches_quadrature() {
    for q in [1.5, 2.0, 4.0] {
        let f = square_gauge(q);
        let closed = f.total_mass().unwrap();
        let quad = f.total_mass_quadrature().unwrap();
        let rel = (closed - quad).abs() / closed;
        assert!(rel < 5e-3, "q={q}: closed {closed} quad {quad} rel {rel}");
    }
}

#[test]
fn indicator_mass_is_volume() {
    let f = LogConcaveFunction::indicator(ConvexBody::unit_cube(2).unwrap()).unwrap();
    assert_abs_diff_eq!(f.total_mass().unwrap(), 4.0, epsilon = 1e-12);
}

#[test]
fn entropy_mass_of_gaussians() {
    // n J / 2: for n = 2 that is 2 pi; general n gives (n/2)(2 pi)^{n/2}.
    for n in 1..=3usize {
        let f = LogConcaveFunction::standard_gaussian(n).unwrap();
        let expected = (n as f64 / 2.0) * TWO_PI.powf(n as f64 / 2.0);
        assert_abs_diff_eq!(f.entropy_mass().unwrap(), expected, epsilon = 1e-10);
    }
}

#[test]
fn entropy_mass_gauge_power_closed_form_matches_quadrature() {
    // n (1 - 1/q) J, cross-checked against the grid integral of u e^{-u}.
    for q in [1.5, 2.0, 4.0] {
        let f = square_gauge(q);
        let closed = f.entropy_mass().unwrap();
        let n = 2.0;
        let jq = f.total_mass_quadrature().unwrap();
        let weighted = Grid::from_fn(f.domain(), |x| {
            let u = f.potential_value(x);
            if u.is_finite() {
                u * (-u).exp()
            } else {
                0.0
            }
        })
        .unwrap();
        let quad = n * jq - weighted.integrate().unwrap();
        let rel = (closed - quad).abs() / closed;
        assert!(rel < 1e-2, "q={q}: closed {closed} quad {quad} rel {rel}");
    }
}

#[test]
fn evenness_spot_check() {
    assert!(gaussian_diag(&[4.0, 1.0]).is_even(64, 3));
    assert!(square_gauge(2.0).is_even(64, 3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // h of the scalar multiple scales by lambda^{1/p} for random inputs.
    #[test]
    fn prop_scalar_mult_support(lambda in 0.2f64..5.0, p in 1.0f64..6.0,
                                y0 in -2.0f64..2.0, y1 in -2.0f64..2.0) {
        let f = square_gauge(2.0);
        let g = lp_scalar_mult(lambda, &f, p).unwrap();
        let lhs = g.support_function(&[y0, y1]).unwrap();
        let rhs = lambda.powf(1.0 / p) * f.support_function(&[y0, y1]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }

    // Gaussian masses transform with det(T)^{-1} under GL images.
    #[test]
    fn prop_gl_mass_covariance(a in 0.5f64..2.0, b in -0.5f64..0.5, d in 0.5f64..2.0) {
        let f = LogConcaveFunction::standard_gaussian(2).unwrap();
        let t = DMatrix::from_row_slice(2, 2, &[a, b, 0.0, d]);
        let tf = f.gl_image(&t).unwrap();
        let expected = f.total_mass().unwrap() / (a * d).abs();
        let got = tf.total_mass().unwrap();
        prop_assert!((got - expected).abs() <= 1e-9 * expected);
    }
}
