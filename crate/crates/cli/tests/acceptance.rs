//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the binary exits nonzero if any criterion fails.

#[path = "../../core/tests/common/escauriaza.rs"]
mod escauriaza;
#[allow(dead_code)]
#[path = "../../core/tests/common/fd.rs"]
mod fd;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use conelab::counterexample::CounterexampleParams;
use conelab::geometry::{sample_points, ConeSpec, SampleRegion};
use conelab::heatfd::{
    counterexample_crosscheck, decay_fit, fit_decay_series, radial_solve, CrosscheckConfig, TimeScheme,
};
use conelab::positivity::{a3_scan, alpha_curve, alpha_star, critical_angle_degrees, hessian_psd_scan, m, A3Sampling};
use conelab::verify::{
    carleman_sweep, check_energy_identity, check_prop21, default_suite, AdaptiveSettings, TestFunction,
};
use conelab::weights::{lemma22_g_check, prescribed_a, WeightParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Independent copy of the certificate polynomial.
fn m_oracle(alpha: f64, eps: f64) -> f64 {
    let ea = eps.powf(alpha);
    (alpha - 1.0 - 2.0 * ea) * (1.0 - ea).powi(2) - 2.0 * eps.powf(alpha + 2.0) * (1.0 - eps * eps)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c01_certificate_root() -> Outcome {
    let root = m(2.0, 1.0 / 3f64.sqrt());
    let lim = 1.0 / 3f64.sqrt();
    let (mut up_alpha, mut down_eps) = (true, true);
    for i in 1..=50 {
        for j in 1..=50 {
            let alpha = 1.0 + i as f64 / 51.0;
            let eps = lim * j as f64 / 51.0;
            if i < 50 {
                up_alpha &= m(1.0 + (i + 1) as f64 / 51.0, eps) > m(alpha, eps);
            }
            if j < 50 {
                down_eps &= m(alpha, lim * (j + 1) as f64 / 51.0) < m(alpha, eps);
            }
        }
    }
    check(
        root.abs() <= 1e-12 && up_alpha && down_eps,
        format!("m(2,1/√3) = {root:e}, increasing in α: {up_alpha}, decreasing in ε: {down_eps}"),
    )
}

fn c02_critical_angle() -> Outcome {
    let got = critical_angle_degrees();
    let oracle = 2.0 * (1.0 / 3f64.sqrt()).acos().to_degrees();
    check(
        (got - 109.4712206).abs() <= 1e-6 && (got - oracle).abs() <= 1e-12,
        format!("{got:.10}° (printed 109.52° is a rounding)"),
    )
}

fn c03_alpha_curve() -> Outcome {
    let curve = alpha_curve(0.01, 0.57, 50, 1e-13).map_err(|e| e.to_string())?;
    let worst = curve
        .iter()
        .map(|c| m_oracle(c.alpha_star, c.eps).abs())
        .fold(0.0, f64::max);
    let monotone = curve.windows(2).all(|w| w[1].alpha_star >= w[0].alpha_star);
    let limit = alpha_star(1.0 / 3f64.sqrt() - 1e-9, 1e-13)
        .map_err(|e| e.to_string())?
        .alpha_star;
    check(
        curve.len() == 50 && worst <= 1e-10 && monotone && (limit - 2.0).abs() <= 1e-6,
        format!("max |m(α*,ε)| = {worst:e}, nondecreasing: {monotone}, α*(limit) = {limit:.9}"),
    )
}

fn c04_hessian_psd() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::INFINITY;
    for i in 0..10 {
        let eps = rng.gen_range(0.05..0.57);
        let lo = alpha_star(eps, 1e-12).map_err(|e| e.to_string())?.alpha_star;
        let alpha = rng.gen_range(lo..2.0);
        let n = 2 + i % 3;
        let w = WeightParams::new(1.0, alpha, eps, n).map_err(|e| e.to_string())?;
        let scan = hessian_psd_scan(&w, 10_000, i as u64).map_err(|e| e.to_string())?;
        if scan.points_checked != 10_000 {
            return Err(format!("only {} points checked", scan.points_checked));
        }
        worst = worst.min(scan.min_eigenvalue);
    }
    check(
        worst >= -1e-10,
        format!("smallest eigenvalue over 10 pairs × 10⁴ points: {worst:e}"),
    )
}

fn c05_derivatives() -> Outcome {
    let mut worst_err: (f64, &str) = (0.0, "");
    let mut worst_order: (f64, &str) = (2.0, "");
    for &(alpha, eps, n, seed) in &[(1.85, 0.5, 2, 11u64), (1.4, 0.25, 3, 12)] {
        let w = WeightParams::new(5.0, alpha, eps, n).map_err(|e| e.to_string())?;
        let cone = ConeSpec::from_eps(n, eps).map_err(|e| e.to_string())?;
        let pts = sample_points(&cone, &SampleRegion::new((1.0, 10.0), (0.05, 0.95)), 100, seed)
            .map_err(|e| e.to_string())?;
        for s in fd::derivative_checks(&w, &pts, 1e-4, 4e-3) {
            if s.max_rel_error > worst_err.0 {
                worst_err = (s.max_rel_error, s.name);
            }
            if (s.order - 2.0).abs() > (worst_order.0 - 2.0).abs() {
                worst_order = (s.order, s.name);
            }
        }
    }
    check(
        worst_err.0 <= 1e-6 && (worst_order.0 - 2.0).abs() <= 0.3,
        format!(
            "worst rel error {:e} ({}), worst order {:.3} ({})",
            worst_err.0, worst_err.1, worst_order.0, worst_order.1
        ),
    )
}

fn c06_a3() -> Outcome {
    let mut violations = 0;
    for n in [2, 3] {
        let w = WeightParams::new(1.0, 1.85, 0.5, n).map_err(|e| e.to_string())?;
        let s = a3_scan(&w, 10_000, 6, A3Sampling::Uniform).map_err(|e| e.to_string())?;
        violations += s.negative + s.bound_violations;
    }
    let outside = WeightParams::new(1.0, 1.85, 0.6, 2).map_err(|e| e.to_string())?;
    let demo = a3_scan(&outside, 10_000, 6, A3Sampling::NearBoundary).map_err(|e| e.to_string())?;
    check(
        violations == 0 && demo.negative >= 1,
        format!(
            "admissible violations: {violations}; ε = 0.6 negatives: {} (min A₃ = {:e})",
            demo.negative, demo.min_a3
        ),
    )
}

fn suite(eps: f64, plain: usize, modulated: usize) -> Result<Vec<TestFunction>, String> {
    let cone = ConeSpec::from_eps(2, eps).map_err(|e| e.to_string())?;
    default_suite(&cone, plain, modulated, 7).map_err(|e| e.to_string())
}

fn c07_energy_identity() -> Outcome {
    let w = WeightParams::new(10.0, 1.85, 0.5, 2).map_err(|e| e.to_string())?;
    let mut worst = 0.0_f64;
    let mut all = true;
    for u in suite(0.5, 10, 0)? {
        let r = check_energy_identity(&u, &w, &AdaptiveSettings::default()).map_err(|e| e.to_string())?;
        all &= r.discrepancy <= 10.0 * r.error_estimate;
        worst = worst.max(r.discrepancy / r.error_estimate.max(f64::MIN_POSITIVE));
    }
    check(all, format!("max discrepancy / error estimate = {worst:.3} (limit 10)"))
}

fn c08_carleman_constant() -> Outcome {
    let w = WeightParams::new(1.0, 1.85, 0.5, 2).map_err(|e| e.to_string())?;
    let a_values = [5.0, 10.0, 20.0, 50.0, 100.0];
    let sweep =
        carleman_sweep(&suite(0.5, 20, 5)?, &w, &a_values, &AdaptiveSettings::default()).map_err(|e| e.to_string())?;
    let top: Vec<f64> = sweep.rows.iter().rev().take(2).map(|r| r.max_ratio).collect();
    let bound = 4.0 * (1.0 + 1e-4);
    let beyond = sweep
        .rows
        .iter()
        .filter(|r| sweep.a_min.is_some_and(|a| r.a >= a))
        .all(|r| r.max_ratio <= bound);
    check(
        sweep.pass && sweep.a_min.is_some() && beyond && top.iter().all(|r| *r <= 4.0),
        format!("a_min = {:?}, ratios at the two largest a: {top:?}", sweep.a_min),
    )
}

fn c09_prop21() -> Outcome {
    let bumps = suite(0.5, 20, 5)?;
    let sup = |s: &AdaptiveSettings| -> Result<(f64, bool), String> {
        let mut sup = 0.0_f64;
        let mut finite = true;
        for a in [2.0, 5.0, 10.0] {
            for u in &bumps {
                let r = check_prop21(u, a, s).map_err(|e| e.to_string())?;
                finite &= r.ratio.is_finite();
                sup = sup.max(r.ratio);
            }
        }
        Ok((sup, finite))
    };
    let base = AdaptiveSettings::default();
    let (coarse, finite) = sup(&base)?;
    let (fine, finite_fine) = sup(&base.refined())?;
    let change = (fine - coarse).abs() / coarse;
    check(
        finite && finite_fine && change <= 0.1,
        format!("sup ratio {coarse:.6e}, refined {fine:.6e}, relative change {change:.2e}"),
    )
}

fn c10_counterexample() -> Outcome {
    let p = CounterexampleParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let orders: Vec<f64> = escauriaza::sector_points(&p, (1.0, 1.5), 0.3, 100, 10)
        .into_iter()
        .map(|y| escauriaza::residual_order(&p, y, rng.gen_range(0.7..1.0), 2e-3))
        .collect();
    let (lo, hi) = orders
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), o| (a.min(*o), b.max(*o)));

    let mut decay_ok = true;
    let mut floor = 0.0_f64;
    for y in escauriaza::sector_points(&p, (0.5, 1.5), 0.5, 20, 11) {
        let prof = escauriaza::decay_profile(&p, y, 3);
        decay_ok &= prof.windows(2).all(|w| w[1].0 <= w[0].0 && w[1].1 < w[0].1);
        floor = floor.max(prof[2].0);
    }

    let mut cfg = CrosscheckConfig::default();
    let mut errors = Vec::new();
    for _ in 0..3 {
        errors.push(
            counterexample_crosscheck(&p, &cfg)
                .map_err(|e| e.to_string())?
                .max_rel_error,
        );
        cfg = cfg.refined();
    }
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    check(
        (lo - 2.0).abs() <= 0.3
            && (hi - 2.0).abs() <= 0.3
            && decay_ok
            && floor < 1e-8
            && ratios.iter().all(|r| (3.0..=5.0).contains(r)),
        format!("orders in [{lo:.3}, {hi:.3}], |v| at s=1e-3 ≤ {floor:e}, crosscheck ratios {ratios:.3?}"),
    )
}

fn c11_decay() -> Outcome {
    let mut betas = Vec::new();
    let mut envelope_ok = true;
    for (radius, nr, dt) in [(4.0, 400, 2e-3), (8.0, 800, 8e-3)] {
        let r2: f64 = radius * radius;
        let f = radial_solve(1, radius, |_| 1.0, r2 / 16.0, nr, dt, TimeScheme::CrankNicolson)
            .map_err(|e| e.to_string())?;
        let fit = decay_fit(&f, radius, 1.0, (r2 / 80.0, r2 / 16.0)).map_err(|e| e.to_string())?;
        envelope_ok &= !fit.empty && fit.max_violation <= 0.0;
        betas.push(fit.beta_fit);
    }
    let stable = (betas[1] / betas[0] - 1.0).abs() <= 0.2;
    let synthetic: Vec<(f64, f64)> = (1..400)
        .map(|i| {
            let t = i as f64 * 0.01;
            (t, 0.3 * (-0.125 * 16.0 / t).exp())
        })
        .collect();
    let syn = fit_decay_series(&synthetic, 4.0, 1.0, (0.2, 2.0)).map_err(|e| e.to_string())?;
    let syn_err = (syn.beta_fit - 0.125).abs();
    check(
        betas.iter().all(|b| *b > 0.05) && envelope_ok && stable && syn_err <= 1e-6,
        format!(
            "β(4) = {:.4}, β(8) = {:.4}, synthetic error {syn_err:e}",
            betas[0], betas[1]
        ),
    )
}

fn c12_g_check() -> Outcome {
    let good = lemma22_g_check(prescribed_a(0.003, 10.0), 0.003, 10.0, 20_000).map_err(|e| e.to_string())?;
    let bad = lemma22_g_check(prescribed_a(0.01, 10.0), 0.01, 10.0, 20_000).map_err(|e| e.to_string())?;
    check(
        good.pass && good.g_at_2 < 1.0 && good.min_gprime >= -1e-12 && !bad.pass && bad.min_gprime < 0.0,
        format!(
            "β=0.003: min g′ = {:e}; β=0.01: min g′ = {:e}",
            good.min_gprime, bad.min_gprime
        ),
    )
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in walk(dir) {
        let rel = entry.strip_prefix(dir).unwrap().display().to_string();
        files.insert(rel, std::fs::read(&entry).unwrap());
    }
    files
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

fn c13_reproducible() -> Outcome {
    let runs: [&[&str]; 6] = [
        &["alpha-curve"],
        &["psd-scan", "--random-pairs", "3", "--points", "2000", "--dump-points"],
        &[
            "a3-scan",
            "--eps",
            "0.6",
            "--sampling",
            "near-boundary",
            "--expect-violation",
        ],
        &["check-identity", "--bumps", "2", "--modulated", "1"],
        &["counterexample", "--scan-points", "4000"],
        &["decay"],
    ];
    let mut snaps = Vec::new();
    for _ in 0..2 {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        for args in runs {
            let out = tmp.path().to_str().unwrap();
            let argv = ["conelab"].iter().chain(args).copied().chain(["--out", out]);
            let code = conelab_cli::run(argv);
            if code != 0 {
                return Err(format!("{args:?} exited {code}"));
            }
        }
        snaps.push(snapshot(tmp.path()));
    }
    check(
        snaps[0] == snaps[1] && !snaps[0].is_empty(),
        format!("{} files identical across two runs", snaps[0].len()),
    )
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("certificate root and monotonicity", c01_certificate_root),
        ("critical cone angle", c02_critical_angle),
        ("critical exponent curve", c03_alpha_curve),
        ("Hessian positivity", c04_hessian_psd),
        ("closed-form derivatives", c05_derivatives),
        ("A3 sign and necessity", c06_a3),
        ("energy identity", c07_energy_identity),
        ("Carleman constant 4", c08_carleman_constant),
        ("weighted inequality with prescribed a", c09_prop21),
        ("explicit backward solution", c10_counterexample),
        ("ball decay law", c11_decay),
        ("g monotonicity", c12_g_check),
        ("reproducible artifacts", c13_reproducible),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {:>2} {tag} {name} [{secs:.2}s]: {detail}", i + 1);
        failed += outcome.is_err() as usize;
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
