use std::f64::consts::PI;

use conelab::geometry::{median_angle, sample_points, stable_norm, ConeSpec, SampleRegion, SpaceTimePoint};
use conelab::positivity::{
    a2_scan, alpha_star, default_scan_region, hessian_psd_scan, m, shifted_hessian_min_eigenvalue,
};
use conelab::verify::{make_bump, BumpDomain, BumpKind, BumpSpec, Modulation};
use conelab::weights::{lambda_ratio_scan, lambda_sum_scan, op_l, phi_total, SpaceTimeFunction, WeightParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, n)
}

proptest! {
    #[test]
    fn distance_is_positively_homogeneous(theta in 0.1..PI, x in point(3), lambda in 1e-3..1e3f64) {
        let cone = ConeSpec::new(3, theta).unwrap();
        let y: Vec<f64> = x.iter().map(|v| lambda * v).collect();
        let (d, dl) = (cone.distance_to_boundary(&x).unwrap(), cone.distance_to_boundary(&y).unwrap());
        prop_assert!((dl - lambda * d).abs() <= 1e-12 * lambda * stable_norm(&x));
    }

    #[test]
    fn membership_matches_distance_sign(theta in 0.1..PI, x in point(2)) {
        let cone = ConeSpec::new(2, theta).unwrap();
        let d = cone.distance_to_boundary(&x).unwrap();
        // skip the rounding band around the boundary itself
        prop_assume!(d.abs() > 1e-12 * stable_norm(&x));
        prop_assert_eq!(cone.contains(&x).unwrap(), d > 0.0);
    }

    #[test]
    fn half_space_distance_is_first_coordinate(x in point(4)) {
        let cone = ConeSpec::new(4, PI).unwrap();
        prop_assert_eq!(cone.distance_to_boundary(&x).unwrap(), x[0]);
    }

    #[test]
    fn psd_margin_is_rotation_invariant_in_transverse_plane(
        x1 in 1.0..10.0f64, x2 in -3.0..3.0f64, x3 in -3.0..3.0f64, angle in 0.0..(2.0 * PI),
        alpha in 1.5..2.0f64, eps in 0.05..0.55f64,
    ) {
        let x = [x1, x2, x3];
        let (c, s) = (angle.cos(), angle.sin());
        let y = [x1, c * x2 - s * x3, s * x2 + c * x3];
        let a = shifted_hessian_min_eigenvalue(&x, alpha, eps).unwrap();
        let b = shifted_hessian_min_eigenvalue(&y, alpha, eps).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }
}

#[test]
fn distance_bound_on_the_median_cone() {
    let theta = 2.4;
    let delta = median_angle(theta).unwrap();
    let outer = ConeSpec::new(3, theta).unwrap();
    let inner = ConeSpec::new(3, delta).unwrap();
    let region = SampleRegion::new((0.1, 20.0), (0.1, 0.9));
    let pts = sample_points(&inner, &region, 10_000, 11).unwrap();
    let s = ((theta - delta) / 2.0).sin();
    for p in &pts {
        let d = outer.distance_to_boundary(&p.x).unwrap();
        assert!(d >= stable_norm(&p.x) * s * (1.0 - 1e-12), "{:?}", p.x);
    }
}

#[test]
fn certificate_is_monotone_on_a_grid() {
    let (k, e_max) = (50, 1.0 / 3f64.sqrt());
    let h = 1e-6;
    for i in 0..k {
        let alpha = 1.0 + (i as f64 + 0.5) / k as f64;
        for j in 0..k {
            let eps = e_max * (j as f64 + 0.5) / k as f64;
            let da = (m(alpha + h, eps) - m(alpha - h, eps)) / (2.0 * h);
            let de = (m(alpha, eps + h) - m(alpha, eps - h)) / (2.0 * h);
            assert!(da > 0.0, "∂m/∂α at ({alpha}, {eps}) = {da}");
            assert!(de < 0.0, "∂m/∂ε at ({alpha}, {eps}) = {de}");
        }
    }
}

#[test]
fn alpha_star_is_the_infimum() {
    for i in 1..20 {
        let eps = 0.55 * i as f64 / 20.0;
        let a = alpha_star(eps, 1e-12).unwrap().alpha_star;
        assert!(m(a + 1e-9, eps) >= 0.0);
        if a - 1e-4 > 1.0 {
            assert!(m(a - 1e-4, eps) < 0.0, "eps={eps}");
        }
        assert!(m(a + 1e-4, eps) > 0.0, "eps={eps}");
    }
}

#[test]
fn psd_scan_holds_on_the_admissible_curve() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..5 {
        let eps = rng.gen_range(0.05..0.57);
        let alpha = (alpha_star(eps, 1e-12).unwrap().alpha_star + rng.gen_range(0.0..0.1)).min(1.999);
        let w = WeightParams::new(1.0, alpha, eps, 2 + k % 3).unwrap();
        let scan = hessian_psd_scan(&w, 2000, k as u64).unwrap();
        assert!(scan.pass, "{scan:?}");
    }
}

#[test]
fn lambda_time_inequalities() {
    // both margins close up at α = 2, so the strict forms are checked below it
    for alpha in [1.1, 1.5, 1.9, 1.99] {
        let ratio = lambda_ratio_scan(alpha, 999).unwrap();
        let sum = lambda_sum_scan(alpha, 999).unwrap();
        assert!(ratio.pass, "{ratio:?}");
        assert!(sum.pass, "{sum:?}");
    }
}

#[test]
fn a2_estimate_holds_where_sampled() {
    for (alpha, eps) in [(1.85, 0.5), (1.6, 0.3), (1.95, 0.55)] {
        let w = WeightParams::new(10.0, alpha, eps, 2).unwrap();
        let scan = a2_scan(&w, 5000, 3).unwrap();
        assert_eq!(scan.violations, 0, "{scan:?}");
    }
}

fn bump(cone: &ConeSpec) -> conelab::verify::TestFunction {
    let spec = BumpSpec {
        kind: BumpKind::Product,
        center: SpaceTimePoint::new(vec![3.0, 0.2], 0.5),
        radii: vec![0.5, 0.4, 0.2],
        modulation: Some(Modulation {
            amplitude: 0.5,
            wave: vec![2.0, -1.0],
            omega: 3.0,
            phase: 0.4,
        }),
        scale: 1.0,
    };
    make_bump(spec, &BumpDomain::QTheta(*cone)).unwrap()
}

#[test]
fn conjugated_operator_matches_heat_operator_of_unweighted_function() {
    // L v = e^Φ (∂ₜ + Δ)(e^{−Φ} v), with the right side by finite differences
    let w = WeightParams::new(2.0, 1.85, 0.5, 2).unwrap();
    let cone = ConeSpec::from_eps(2, 0.5).unwrap();
    let v = bump(&cone);
    let u = |x: &[f64], t: f64| {
        let p = SpaceTimePoint::new(x.to_vec(), t);
        (-phi_total(&p, &w).unwrap().value).exp() * v.jet(x, t).value
    };
    let h = 1e-4;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let x = vec![rng.gen_range(2.6..3.4), rng.gen_range(-0.1..0.5)];
        let t = rng.gen_range(0.35..0.65);
        let p = SpaceTimePoint::new(x.clone(), t);
        let ut = (u(&x, t + h) - u(&x, t - h)) / (2.0 * h);
        let mut lap = 0.0;
        for k in 0..2 {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[k] += h;
            xm[k] -= h;
            lap += (u(&xp, t) - 2.0 * u(&x, t) + u(&xm, t)) / (h * h);
        }
        let phi = phi_total(&p, &w).unwrap().value;
        let fd = phi.exp() * (ut + lap);
        let exact = op_l(&v, &p, &w).unwrap();
        let scale = 1.0 + exact.abs();
        assert!((fd - exact).abs() <= 1e-4 * scale, "{fd} vs {exact} at {x:?}, {t}");
    }
}

#[test]
fn scan_region_sits_inside_the_truncated_cone() {
    let cone = ConeSpec::from_eps(3, 0.4).unwrap();
    for p in sample_points(&cone, &default_scan_region(), 1000, 2).unwrap() {
        assert!(cone.q_theta_contains(&p).unwrap());
    }
}
