use conelab::geometry::{ConeSpec, SpaceTimePoint};
use conelab::verify::{
    check_energy_identity, check_prop21, check_prop23, check_prop23_shifted, default_suite, integrate,
    integrate_adaptive, prop23_log_shift, AdaptiveSettings, TestFunction,
};
use conelab::weights::{commutator_integrand, op_a, op_l, op_s, SpaceTimeFunction, WeightParams};

fn suite(n: usize) -> Vec<TestFunction> {
    let cone = ConeSpec::from_eps(n, 0.5).unwrap();
    default_suite(&cone, 3, 3, 21).unwrap()
}

fn quick() -> AdaptiveSettings {
    AdaptiveSettings {
        rel_tol: 1e-7,
        ..Default::default()
    }
}

/// Central-difference errors of the jet entries `[∂₁…∂ₙ, Δ, ∂ₜ]` at step `h`.
fn jet_errors(u: &TestFunction, x: &[f64], t: f64, h: f64) -> Vec<f64> {
    let n = x.len();
    let jet = u.jet(x, t);
    let val = |x: &[f64], t: f64| u.jet(x, t).value;
    let mut out = Vec::with_capacity(n + 2);
    let mut lap = 0.0;
    for k in 0..n {
        let (mut p, mut m) = (x.to_vec(), x.to_vec());
        p[k] += h;
        m[k] -= h;
        out.push((val(&p, t) - val(&m, t)) / (2.0 * h) - jet.grad[k]);
        lap += (val(&p, t) - 2.0 * jet.value + val(&m, t)) / (h * h);
    }
    out.push(lap - jet.laplacian);
    out.push((val(x, t + h) - val(x, t - h)) / (2.0 * h) - jet.dt);
    out
}

#[test]
fn bump_jets_match_finite_differences() {
    // the bumps are steep near their edges, so check the order, not a fixed gap
    let h = 1e-3;
    for u in suite(3) {
        let (lo, hi) = u.support_box();
        for i in 1..8 {
            let f = i as f64 / 8.0;
            let x: Vec<f64> = (0..3).map(|k| lo[k] + (hi[k] - lo[k]) * (0.3 + 0.4 * f)).collect();
            let t = lo[3] + (hi[3] - lo[3]) * f;
            let (e1, e2) = (jet_errors(&u, &x, t, h), jet_errors(&u, &x, t, h / 2.0));
            for (a, b) in e1.iter().zip(&e2) {
                if b.abs() > 1e-7 {
                    let ratio = a / b;
                    assert!((3.5..4.5).contains(&ratio), "{e1:?} {e2:?}");
                }
            }
        }
    }
}

#[test]
fn adaptive_quadrature_agrees_with_itself_under_refinement() {
    let f = |p: &[f64], out: &mut [f64]| {
        out[0] = (-(p[0] - 0.3).powi(2) * 40.0).exp() * (3.0 * p[1]).cos();
        out[1] = (p[0] * p[1]).sqrt();
        Ok(())
    };
    let s = AdaptiveSettings::default();
    let a = integrate_adaptive(f, &[0.0, 0.0], &[1.0, 1.0], 2, &s).unwrap();
    let b = integrate_adaptive(f, &[0.0, 0.0], &[1.0, 1.0], 2, &s.refined()).unwrap();
    assert!(a.converged && b.converged);
    for c in 0..2 {
        let diff = (a.values[c] - b.values[c]).abs();
        assert!(
            diff <= a.error_estimates[c] + b.error_estimates[c] + 1e-14,
            "component {c}"
        );
    }
    // √(xy) integrates to 4/9
    assert!((b.values[1] - 4.0 / 9.0).abs() < 1e-6);
}

#[test]
fn ratios_do_not_depend_on_the_amplitude() {
    let w = WeightParams::new(5.0, 1.85, 0.5, 2).unwrap();
    let s = quick();
    for u in suite(2).iter().take(3) {
        let base23 = check_prop23(u, &w, &s).unwrap().ratio;
        let base21 = check_prop21(u, 5.0, &s).unwrap().ratio;
        for c in [2.0, -3.0] {
            let v = u.scaled(c);
            let r23 = check_prop23(&v, &w, &s).unwrap().ratio;
            let r21 = check_prop21(&v, 5.0, &s).unwrap().ratio;
            assert!((r23 - base23).abs() <= 1e-12 * base23, "{r23} vs {base23}");
            assert!((r21 - base21).abs() <= 1e-12 * base21, "{r21} vs {base21}");
        }
    }
}

#[test]
fn ratio_does_not_depend_on_the_factored_exponent() {
    let w = WeightParams::new(10.0, 1.85, 0.5, 2).unwrap();
    let s = quick();
    for u in suite(2).iter().take(3) {
        let shift = prop23_log_shift(u, &w).unwrap();
        let a = check_prop23_shifted(u, &w, &s, shift).unwrap();
        let b = check_prop23_shifted(u, &w, &s, shift - 5.0).unwrap();
        assert!(
            (a.ratio - b.ratio).abs() <= 1e-9 * a.ratio,
            "{} vs {}",
            a.ratio,
            b.ratio
        );
        assert!((b.lhs / a.lhs - 5f64.exp()).abs() < 1e-9 * 5f64.exp());
    }
}

#[test]
fn zero_strength_identity_reduces_to_twice_the_mass() {
    // with Φ = t² the commutator density is ∂ₜ²Φ·v² = 2v²
    let w = WeightParams::new(0.0, 1.85, 0.5, 2).unwrap();
    let s = quick();
    for u in suite(2).into_iter().step_by(2) {
        let r = check_energy_identity(&u, &w, &s).unwrap();
        let (lo, hi) = u.support_box();
        let tight = AdaptiveSettings {
            rel_tol: 1e-11,
            ..Default::default()
        };
        let mass = integrate_adaptive(
            |p, out| {
                let v = u.jet(&p[..2], p[2]).value;
                out[0] = v * v;
                Ok(())
            },
            &lo,
            &hi,
            1,
            &tight,
        )
        .unwrap()
        .values[0];
        assert!((r.commutator_integral - 2.0 * mass).abs() <= 1e-8 * mass);
        assert!(r.discrepancy <= 1e-8 * r.lhs_l2, "{r:?}");
    }
}

#[test]
fn identity_discrepancy_shrinks_under_uniform_refinement() {
    let w = WeightParams::new(3.0, 1.85, 0.5, 2).unwrap();
    let u = &suite(2)[0];
    let (lo, hi) = u.support_box();
    let integrand = |p: &[f64]| {
        let q = SpaceTimePoint::new(p[..2].to_vec(), p[2]);
        let (l, s, a) = (
            op_l(u, &q, &w).unwrap(),
            op_s(u, &q, &w).unwrap(),
            op_a(u, &q, &w).unwrap(),
        );
        l * l - s * s - a * a - commutator_integrand(u, &q, &w).unwrap()
    };
    let scale = integrate(
        |p: &[f64]| {
            let q = SpaceTimePoint::new(p[..2].to_vec(), p[2]);
            op_l(u, &q, &w).unwrap().powi(2)
        },
        &lo,
        &hi,
        5,
    )
    .unwrap()
    .value;
    let gaps: Vec<f64> = (2..=5)
        .map(|l| integrate(integrand, &lo, &hi, l).unwrap().value.abs() / scale)
        .collect();
    for pair in gaps.windows(2) {
        assert!(pair[1] <= pair[0], "{gaps:?}");
    }
    assert!(*gaps.last().unwrap() < 1e-6, "{gaps:?}");
}

#[test]
fn energy_identity_holds_for_modulated_bumps() {
    let w = WeightParams::new(10.0, 1.85, 0.5, 2).unwrap();
    for u in suite(2).iter().skip(3) {
        let r = check_energy_identity(u, &w, &AdaptiveSettings::default()).unwrap();
        assert!(r.converged && r.pass, "{r:?}");
    }
}
