//! Integral-level checks of the two Carleman inequalities and of the
//! `L = S + A` energy identity.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ConeSpec, SpaceTimePoint};
use crate::positivity::m;
use crate::weights::{
    a_part, assemble_phi, commutator_density, h, lam, powf, s_part, varphi_eval, SpaceTimeFunction, WeightParams,
};

use super::bump::TestFunction;
use super::quadrature::{integrate_adaptive, AdaptiveSettings, VectorQuadrature};

/// Points per axis of the grid that locates the maximal log-weight.
pub const SHIFT_GRID: usize = 17;
/// Allowed relative excess over the constant 4.
pub const RATIO_SLACK: f64 = 1e-4;
pub const CARLEMAN_CONSTANT: f64 = 4.0;
/// Energy identity passes when the discrepancy is within this multiple of
/// the largest quadrature error estimate.
pub const IDENTITY_ERROR_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub a: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs/rhs`, or 0 when both sides vanish.
    pub ratio: f64,
    pub lhs_error: f64,
    pub rhs_error: f64,
    /// Log of the common factor divided out of both integrands.
    pub log_shift: f64,
    pub evals: usize,
    pub converged: bool,
}

fn support_grid_max<F: FnMut(&[f64]) -> f64>(u: &TestFunction, mut f: F) -> f64 {
    let (lo, hi) = u.support_box();
    let d = lo.len();
    let mut idx = vec![0usize; d];
    let mut p = vec![0.0; d];
    let mut best = f64::NEG_INFINITY;
    for _ in 0..SHIFT_GRID.pow(d as u32) {
        for k in 0..d {
            p[k] = lo[k] + (hi[k] - lo[k]) * idx[k] as f64 / (SHIFT_GRID - 1) as f64;
        }
        best = best.max(f(&p));
        for k in 0..d {
            idx[k] += 1;
            if idx[k] < SHIFT_GRID {
                break;
            }
            idx[k] = 0;
        }
    }
    best
}

fn ratio_report(a: f64, q: VectorQuadrature, log_shift: f64) -> Result<InequalityReport> {
    let (lhs, rhs) = (q.values[0], q.values[1]);
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        return Err(Error::Singular("right-hand side vanished with nonzero left-hand side"));
    };
    Ok(InequalityReport {
        a,
        lhs,
        rhs,
        ratio,
        lhs_error: q.error_estimates[0],
        rhs_error: q.error_estimates[1],
        log_shift,
        evals: q.evals,
        converged: q.converged,
    })
}

fn prop21_log_weight(x: &[f64], t: f64, a: f64) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    // h(t) > 0 on the support, checked by the caller
    -2.0 * a * h(t).map(f64::ln).unwrap_or(f64::NEG_INFINITY) - r2 / (4.0 * t)
}

/// Both sides of the Gaussian-weighted inequality with weight
/// `h^{−2a}(t)e^{−|x|²/(4t)}`, on the support box of `u`.
pub fn check_prop21(u: &TestFunction, a: f64, settings: &AdaptiveSettings) -> Result<InequalityReport> {
    if !(a > 0.0) {
        return Err(invalid("a", a, "must be positive"));
    }
    let n = u.n();
    let (lo, hi) = u.support_box();
    if !(lo[n] > 0.0 && hi[n] < 2.0) {
        return Err(Error::OutsideDomain("support must lie in 0 < t < 2"));
    }
    let shift = support_grid_max(u, |p| prop21_log_weight(&p[..n], p[n], a));
    let q = integrate_adaptive(
        |p, out| {
            let (x, t) = (&p[..n], p[n]);
            let jet = u.jet(x, t);
            let w = (prop21_log_weight(x, t, a) - shift).exp();
            out[0] = w * (a / t * jet.value * jet.value + jet.grad_sq());
            let heat = jet.backward_heat();
            out[1] = w * heat * heat;
            Ok(())
        },
        &lo,
        &hi,
        2,
        settings,
    )?;
    ratio_report(a, q, shift)
}

fn cone_for(u: &TestFunction, w: &WeightParams) -> Result<ConeSpec> {
    if u.n() != w.n {
        return Err(Error::DimensionMismatch {
            expected: w.n,
            got: u.n(),
        });
    }
    let cone = ConeSpec::from_eps(w.n, w.eps)?;
    let (lo, hi) = u.support_box();
    let n = w.n;
    for mask in 0..(1usize << (n + 1)) {
        let corner: Vec<f64> = (0..=n)
            .map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] })
            .collect();
        if !cone.q_theta_contains(&SpaceTimePoint::new(corner[..n].to_vec(), corner[n]))? {
            return Err(Error::SupportLeak);
        }
    }
    Ok(cone)
}

fn varphi_value(x: &[f64], w: &WeightParams) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    powf(x[0], w.alpha) - powf(w.eps, w.alpha) * powf(r2, 0.5 * w.alpha)
}

fn carleman_log_weight(x: &[f64], t: f64, w: &WeightParams) -> Result<f64> {
    let l = lam(t, w.alpha)?;
    Ok(2.0 * (w.a * l.value * varphi_value(x, w) + t * t))
}

/// Largest `2Φ` over a grid on the support of `u`: the default factor pulled
/// out of both sides of the cone inequality.
pub fn prop23_log_shift(u: &TestFunction, w: &WeightParams) -> Result<f64> {
    cone_for(u, w)?;
    let n = w.n;
    Ok(support_grid_max(u, |p| {
        carleman_log_weight(&p[..n], p[n], w).unwrap_or(f64::NEG_INFINITY)
    }))
}

/// Both sides of the cone Carleman inequality: `∫e^{2Φ}[a(Λ+φ)u² + |∇u|²]`
/// against `∫e^{2Φ}|∂ₜu+Δu|²`.
pub fn check_prop23(u: &TestFunction, w: &WeightParams, settings: &AdaptiveSettings) -> Result<InequalityReport> {
    let shift = prop23_log_shift(u, w)?;
    check_prop23_shifted(u, w, settings, shift)
}

/// As [`check_prop23`] with an explicit factor `e^{shift}` divided out.
pub fn check_prop23_shifted(
    u: &TestFunction,
    w: &WeightParams,
    settings: &AdaptiveSettings,
    shift: f64,
) -> Result<InequalityReport> {
    cone_for(u, w)?;
    if m(w.alpha, w.eps) < 0.0 {
        return Err(invalid("alpha", w.alpha, "certificate m(alpha, eps) is negative"));
    }
    let n = w.n;
    let (lo, hi) = u.support_box();
    let q = integrate_adaptive(
        |p, out| {
            let (x, t) = (&p[..n], p[n]);
            let jet = u.jet(x, t);
            if jet.value == 0.0 && jet.grad_sq() == 0.0 && jet.backward_heat() == 0.0 {
                out[0] = 0.0;
                out[1] = 0.0;
                return Ok(());
            }
            let l = lam(t, w.alpha)?;
            let vphi = varphi_value(x, w);
            let weight = (2.0 * (w.a * l.value * vphi + t * t) - shift).exp();
            out[0] = weight * (w.a * (l.value + vphi) * jet.value * jet.value + jet.grad_sq());
            let heat = jet.backward_heat();
            out[1] = weight * heat * heat;
            Ok(())
        },
        &lo,
        &hi,
        2,
        settings,
    )?;
    ratio_report(w.a, q, shift)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a: f64,
    pub max_ratio: f64,
    pub ratios: Vec<f64>,
    pub all_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanSweep {
    pub rows: Vec<SweepRow>,
    /// Least sampled `a` from which every larger sampled `a` keeps all ratios
    /// within `4·(1 + RATIO_SLACK)`.
    pub a_min: Option<f64>,
    /// The two largest sampled `a` both satisfy the bound.
    pub pass: bool,
}

/// Runs the cone inequality over a bump suite for each `a` (sorted ascending).
pub fn carleman_sweep(
    suite: &[TestFunction],
    w: &WeightParams,
    a_values: &[f64],
    settings: &AdaptiveSettings,
) -> Result<CarlemanSweep> {
    let mut a_sorted = a_values.to_vec();
    a_sorted.sort_by(f64::total_cmp);
    a_sorted.dedup();
    let mut rows = Vec::with_capacity(a_sorted.len());
    for &a in &a_sorted {
        let wa = w.with_a(a);
        let mut ratios = Vec::with_capacity(suite.len());
        let mut all_converged = true;
        for u in suite {
            let r = check_prop23(u, &wa, settings)?;
            all_converged &= r.converged;
            ratios.push(r.ratio);
        }
        let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
        rows.push(SweepRow {
            a,
            max_ratio,
            ratios,
            all_converged,
        });
    }
    Ok(summarize_sweep(rows))
}

pub fn summarize_sweep(rows: Vec<SweepRow>) -> CarlemanSweep {
    let bound = CARLEMAN_CONSTANT * (1.0 + RATIO_SLACK);
    let ok: Vec<bool> = rows.iter().map(|r| r.max_ratio <= bound).collect();
    let mut a_min = None;
    for i in (0..rows.len()).rev() {
        if !ok[i] {
            break;
        }
        a_min = Some(rows[i].a);
    }
    let k = ok.len();
    let pass = k >= 2 && ok[k - 1] && ok[k - 2];
    CarlemanSweep { rows, a_min, pass }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyIdentityReport {
    pub lhs_l2: f64,
    pub s_l2: f64,
    pub a_l2: f64,
    pub commutator_integral: f64,
    pub discrepancy: f64,
    pub error_estimate: f64,
    pub tolerance: f64,
    pub evals: usize,
    pub converged: bool,
    pub pass: bool,
}

/// `∫|Lv|² = ∫|Sv|² + ∫|Av|² + ([S,A]v, v)` with `v = u`, all four integrals
/// from one adaptive pass.
pub fn check_energy_identity(
    u: &TestFunction,
    w: &WeightParams,
    settings: &AdaptiveSettings,
) -> Result<EnergyIdentityReport> {
    if u.n() != w.n {
        return Err(Error::DimensionMismatch {
            expected: w.n,
            got: u.n(),
        });
    }
    let n = w.n;
    let (lo, hi) = u.support_box();
    if !(lo[n] > 0.0 && lo[0] > 0.0) {
        return Err(Error::OutsideDomain(
            "identity check needs x₁ > 0 and t > 0 on the support",
        ));
    }
    let q = integrate_adaptive(
        |p, out| {
            let (x, t) = (&p[..n], p[n]);
            let jet = u.jet(x, t);
            if jet.value == 0.0 && jet.grad_sq() == 0.0 && jet.dt == 0.0 && jet.laplacian == 0.0 {
                out.iter_mut().for_each(|o| *o = 0.0);
                return Ok(());
            }
            let phi = assemble_phi(&varphi_eval(x, w.alpha, w.eps)?, &lam(t, w.alpha)?, t, w.a);
            let s = s_part(&jet, &phi);
            let a = a_part(&jet, &phi);
            out[0] = (s + a) * (s + a);
            out[1] = s * s;
            out[2] = a * a;
            out[3] = commutator_density(&jet, &phi);
            Ok(())
        },
        &lo,
        &hi,
        4,
        settings,
    )?;
    let v = &q.values;
    let discrepancy = (v[0] - v[1] - v[2] - v[3]).abs();
    let error_estimate = q.error_estimates.iter().copied().fold(0.0, f64::max);
    let tolerance = IDENTITY_ERROR_FACTOR * error_estimate;
    Ok(EnergyIdentityReport {
        lhs_l2: v[0],
        s_l2: v[1],
        a_l2: v[2],
        commutator_integral: v[3],
        discrepancy,
        error_estimate,
        tolerance,
        evals: q.evals,
        converged: q.converged,
        pass: discrepancy <= tolerance,
    })
}
