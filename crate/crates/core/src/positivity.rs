//! The convexity certificate `m(α, ε)`, the smallest admissible exponent
//! `α*(ε)`, and seeded scans that certify `D²φ + f·I ≥ 0` and `A₃ ≥ 0`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{critical_angle, sample_near_boundary, sample_points, stable_norm, ConeSpec, SampleRegion};
use crate::linalg::jacobi_eigenvalues;
use crate::weights::{a2_margin, a_terms, f_eval, lam, powf, varphi_eval, WeightParams};

/// `m(α, ε) = (α − 1 − 2ε^α)(1 − ε^α)² − 2ε^{α+2}(1 − ε²)`.
pub fn m(alpha: f64, eps: f64) -> f64 {
    let ea = powf(eps, alpha);
    (alpha - 1.0 - 2.0 * ea) * (1.0 - ea).powi(2) - 2.0 * ea * eps * eps * (1.0 - eps * eps)
}

/// Lower end of the bisection bracket.
pub const ALPHA_BRACKET_LO: f64 = 1.0 + 1e-9;
pub const BISECTION_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaCurvePoint {
    pub eps: f64,
    pub alpha_star: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Root of `m(·, eps)` on `(1, 2]` by bisection.
///
/// `m` increases in `α`, so the sign change bracket is certified once both
/// ends have opposite signs. Stops when `|m| ≤ tol` or the bracket is shorter
/// than `tol`, and returns the bracket midpoint nudged to the admissible side.
pub fn alpha_star(eps: f64, tol: f64) -> Result<AlphaCurvePoint> {
    if !(eps > 0.0 && eps < 1.0 / 3f64.sqrt()) {
        return Err(invalid("eps", eps, "must lie in (0, 1/√3)"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", tol, "must be positive"));
    }
    let (mut lo, mut hi) = (ALPHA_BRACKET_LO, 2.0);
    let (m_lo, m_hi) = (m(lo, eps), m(hi, eps));
    if m_lo >= 0.0 || m_hi < 0.0 {
        return Err(Error::NoSignChange { eps });
    }
    let mut m_at_hi = m_hi;
    let mut iterations = 0;
    while iterations < BISECTION_MAX_ITER {
        if (m_at_hi <= tol && hi - lo <= tol) || hi - lo <= f64::EPSILON * hi {
            break;
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let mm = m(mid, eps);
        if mm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
            m_at_hi = mm;
        }
    }
    // `hi` always satisfies m ≥ 0
    Ok(AlphaCurvePoint {
        eps,
        alpha_star: hi,
        residual: m(hi, eps).abs(),
        iterations,
    })
}

/// `α*` on `steps` equally spaced values of `eps` in `[eps_min, eps_max]`.
pub fn alpha_curve(eps_min: f64, eps_max: f64, steps: usize, tol: f64) -> Result<Vec<AlphaCurvePoint>> {
    if steps < 2 {
        return Err(invalid("steps", steps as f64, "need at least two points"));
    }
    (0..steps)
        .map(|i| {
            let e = eps_min + (eps_max - eps_min) * i as f64 / (steps - 1) as f64;
            alpha_star(e, tol)
        })
        .collect()
}

/// `2·arccos(1/√3)` in degrees.
pub fn critical_angle_degrees() -> f64 {
    critical_angle().to_degrees()
}

/// Value printed for the critical angle in the original statement of the
/// result; kept only for the rounding note in reports.
pub const PRINTED_CRITICAL_ANGLE_DEGREES: f64 = 109.52;

/// Acceptance threshold for the smallest eigenvalue of `D²φ + f·I`.
pub const PSD_TOL: f64 = -1e-10;

/// Violating points kept verbatim in a scan report; the counts are exact.
pub const VIOLATION_LIST_CAP: usize = 100;

fn record(list: &mut Vec<Vec<f64>>, x: &[f64], t: Option<f64>) {
    if list.len() < VIOLATION_LIST_CAP {
        list.push(x.iter().copied().chain(t).collect());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdScan {
    pub points_checked: usize,
    pub min_eigenvalue: f64,
    pub argmin_point: Vec<f64>,
    pub violations: usize,
    /// First violating points `x`, at most [`VIOLATION_LIST_CAP`].
    pub violating_points: Vec<Vec<f64>>,
    pub pass: bool,
}

/// Smallest eigenvalue of `D²φ(x) + f(x)·I`.
pub fn shifted_hessian_min_eigenvalue(x: &[f64], alpha: f64, eps: f64) -> Result<f64> {
    let v = varphi_eval(x, alpha, eps)?;
    let f = f_eval(x, alpha, eps)?;
    let mut rows = v.hess_rows();
    for (k, row) in rows.iter_mut().enumerate() {
        row[k] += f.value;
    }
    Ok(jacobi_eigenvalues(&rows, 1e-13, 100)[0])
}

/// Default sampling box for the spatial scans: `1 < x₁ < 10`.
pub fn default_scan_region() -> SampleRegion {
    SampleRegion::new((1.0, 10.0), (1e-3, 1.0 - 1e-3))
}

pub fn hessian_psd_scan(w: &WeightParams, count: usize, seed: u64) -> Result<PsdScan> {
    let cone = ConeSpec::from_eps(w.n, w.eps)?;
    let points = sample_points(&cone, &default_scan_region(), count, seed)?;
    let mut min_eigenvalue = f64::INFINITY;
    let mut argmin_point = Vec::new();
    let mut violations = 0;
    let mut violating_points = Vec::new();
    for p in &points {
        let e = shifted_hessian_min_eigenvalue(&p.x, w.alpha, w.eps)?;
        if e < PSD_TOL {
            violations += 1;
            record(&mut violating_points, &p.x, None);
        }
        if e < min_eigenvalue {
            min_eigenvalue = e;
            argmin_point = p.x.clone();
        }
    }
    Ok(PsdScan {
        points_checked: points.len(),
        min_eigenvalue,
        argmin_point,
        violations,
        violating_points,
        pass: min_eigenvalue >= PSD_TOL,
    })
}

/// `4a³Λ³α³ r^{3α−4} ε^{2α−2} m(α, ε)`.
pub fn a3_lower_bound(x: &[f64], t: f64, w: &WeightParams) -> Result<f64> {
    let l = lam(t, w.alpha)?;
    let r = stable_norm(x);
    Ok(4.0
        * w.a.powi(3)
        * l.value.powi(3)
        * w.alpha.powi(3)
        * powf(r, 3.0 * w.alpha - 4.0)
        * powf(w.eps, 2.0 * w.alpha - 2.0)
        * m(w.alpha, w.eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum A3Sampling {
    /// Rejection sampling over the default box of `Q_θ`.
    Uniform,
    /// Thin layer `ε < x₁/r < ε + 0.01` along the boundary of the cone.
    NearBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A3Scan {
    pub points_checked: usize,
    /// Points with `A₃ < 0`.
    pub negative: usize,
    /// Points with `A₃` below the displayed lower bound.
    pub bound_violations: usize,
    pub violations: usize,
    pub min_a3: f64,
    pub min_bound_gap: f64,
    pub argmin_point: Vec<f64>,
    pub argmin_t: f64,
    /// First violating points `(x, t)`, at most [`VIOLATION_LIST_CAP`].
    pub violating_points: Vec<Vec<f64>>,
}

pub fn a3_scan(w: &WeightParams, count: usize, seed: u64, sampling: A3Sampling) -> Result<A3Scan> {
    let cone = ConeSpec::from_eps(w.n, w.eps)?;
    let region = default_scan_region();
    let points = match sampling {
        A3Sampling::Uniform => sample_points(&cone, &region, count, seed)?,
        A3Sampling::NearBoundary => sample_near_boundary(&cone, region.x1, region.t, 0.01, count, seed)?,
    };
    let mut scan = A3Scan {
        points_checked: points.len(),
        negative: 0,
        bound_violations: 0,
        violations: 0,
        min_a3: f64::INFINITY,
        min_bound_gap: f64::INFINITY,
        argmin_point: Vec::new(),
        argmin_t: 0.0,
        violating_points: Vec::new(),
    };
    for p in &points {
        let a3 = a_terms(p, w)?.a3;
        let bound = a3_lower_bound(&p.x, p.t, w)?;
        // relative rounding slack on the comparison
        let slack = 1e-12 * a3.abs().max(bound.abs());
        let gap = a3 - bound;
        let negative = a3 < -slack;
        let below = gap < -slack;
        scan.negative += negative as usize;
        scan.bound_violations += below as usize;
        if negative || below {
            scan.violations += 1;
            record(&mut scan.violating_points, &p.x, Some(p.t));
        }
        if a3 < scan.min_a3 {
            scan.min_a3 = a3;
            scan.argmin_point = p.x.clone();
            scan.argmin_t = p.t;
        }
        scan.min_bound_gap = scan.min_bound_gap.min(gap);
    }
    Ok(scan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A2Scan {
    pub points_checked: usize,
    pub violations: usize,
    /// Smallest `A₂ − |∇Φ|² + (a²/2)ΛΛ′x₁^{2α−2}`.
    pub min_margin: f64,
    pub argmin_point: Vec<f64>,
    pub argmin_t: f64,
    pub violating_points: Vec<Vec<f64>>,
}

/// Samples the pointwise `A₂` estimate over the default box of `Q_θ`.
pub fn a2_scan(w: &WeightParams, count: usize, seed: u64) -> Result<A2Scan> {
    let cone = ConeSpec::from_eps(w.n, w.eps)?;
    let points = sample_points(&cone, &default_scan_region(), count, seed)?;
    let mut scan = A2Scan {
        points_checked: points.len(),
        violations: 0,
        min_margin: f64::INFINITY,
        argmin_point: Vec::new(),
        argmin_t: 0.0,
        violating_points: Vec::new(),
    };
    for p in &points {
        let margin = a2_margin(p, w)?;
        let scale = a_terms(p, w)?.a2.abs().max(f64::MIN_POSITIVE);
        if margin < -1e-12 * scale {
            scan.violations += 1;
            record(&mut scan.violating_points, &p.x, Some(p.t));
        }
        if margin < scan.min_margin {
            scan.min_margin = margin;
            scan.argmin_point = p.x.clone();
            scan.argmin_t = p.t;
        }
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn certificate_vanishes_at_the_critical_pair() {
        assert_abs_diff_eq!(m(2.0, 1.0 / 3f64.sqrt()), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn certificate_at_zero_eps() {
        for &a in &[1.1, 1.5, 2.0] {
            assert_eq!(m(a, 0.0), a - 1.0);
        }
    }

    #[test]
    fn certificate_sign_examples() {
        // direct evaluation: m(1.8, 0.5) = 0.0069937…, m(1.7, 0.5) = −0.07491…
        let hi = m(1.8, 0.5);
        let lo = m(1.7, 0.5);
        assert_abs_diff_eq!(hi, 0.007, epsilon = 1e-3);
        assert_abs_diff_eq!(lo, -0.075, epsilon = 1e-3);
    }

    #[test]
    fn alpha_star_examples() {
        let near = alpha_star(1.0 / 3f64.sqrt() - 1e-9, 1e-12).unwrap();
        assert_abs_diff_eq!(near.alpha_star, 2.0, epsilon = 1e-6);
        let mid = alpha_star(0.5, 1e-12).unwrap();
        assert_abs_diff_eq!(mid.alpha_star, 1.79, epsilon = 5e-3);
        assert!(mid.residual <= 1e-10);
        assert!(m(mid.alpha_star + 1e-9, 0.5) >= 0.0);
        assert!(alpha_star(0.6, 1e-12).is_err());
        assert!(alpha_star(0.0, 1e-12).is_err());
    }

    #[test]
    fn critical_angle_value() {
        assert_abs_diff_eq!(critical_angle_degrees(), 109.4712206, epsilon = 1e-6);
        let half = critical_angle_degrees().to_radians() / 2.0;
        assert_abs_diff_eq!(half.cos(), 1.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert!((PRINTED_CRITICAL_ANGLE_DEGREES - critical_angle_degrees()).abs() > 0.04);
    }

    #[test]
    fn shifted_hessian_on_the_axis() {
        // at x = (x₁, 0) the matrix is diag(α x₁^{α−2}[(α−1) + (2−α)ε^α], 0)
        let e = shifted_hessian_min_eigenvalue(&[2.0, 0.0], 2.0, 0.3).unwrap();
        assert_abs_diff_eq!(e, 0.0, epsilon = 1e-14);
        let v = varphi_eval(&[2.0, 0.0], 2.0, 0.3).unwrap();
        let f = f_eval(&[2.0, 0.0], 2.0, 0.3).unwrap();
        assert_abs_diff_eq!(v.hess[0][0] + f.value, 2.0, epsilon = 1e-14);
        let (alpha, eps, x1) = (1.7, 0.4, 3.0);
        let v = varphi_eval(&[x1, 0.0], alpha, eps).unwrap();
        let f = f_eval(&[x1, 0.0], alpha, eps).unwrap();
        let expected = alpha * x1.powf(alpha - 2.0) * ((alpha - 1.0) + (2.0 - alpha) * eps.powf(alpha));
        assert_abs_diff_eq!(v.hess[0][0] + f.value, expected, epsilon = 1e-13);
    }

    #[test]
    fn shifted_hessian_homogeneity() {
        let (alpha, eps) = (1.6, 0.45);
        let x = [2.0, 0.7];
        let base = shifted_hessian_min_eigenvalue(&x, alpha, eps).unwrap();
        for &s in &[0.5, 3.0, 10.0] {
            let scaled = shifted_hessian_min_eigenvalue(&[s * x[0], s * x[1]], alpha, eps).unwrap();
            assert_abs_diff_eq!(
                scaled,
                s.powf(alpha - 2.0) * base,
                epsilon = 1e-12 * base.abs().max(1.0)
            );
        }
    }

    #[test]
    fn psd_scan_passes_at_alpha_two() {
        let w = WeightParams::new(1.0, 2.0, 0.3, 3).unwrap();
        let scan = hessian_psd_scan(&w, 2000, 1).unwrap();
        assert!(scan.pass, "{scan:?}");
    }

    #[test]
    fn a3_scan_admissible_has_no_violations() {
        let w = WeightParams::new(3.0, 1.9, 0.4, 2).unwrap();
        assert!(w.is_admissible());
        let scan = a3_scan(&w, 2000, 3, A3Sampling::Uniform).unwrap();
        assert_eq!(scan.violations, 0, "{scan:?}");
    }

    #[test]
    fn a3_scan_wide_eps_finds_negative_values() {
        let w = WeightParams::new(3.0, 1.99, 0.6, 2).unwrap();
        let scan = a3_scan(&w, 2000, 3, A3Sampling::NearBoundary).unwrap();
        assert!(scan.negative > 0, "{scan:?}");
    }

    #[test]
    fn a3_and_bound_vanish_at_final_time() {
        let w = WeightParams::new(3.0, 1.9, 0.4, 2).unwrap();
        let p = crate::geometry::SpaceTimePoint::new(vec![2.0, 0.4], 1.0);
        assert_eq!(a_terms(&p, &w).unwrap().a3, 0.0);
        assert_eq!(a3_lower_bound(&p.x, 1.0, &w).unwrap(), 0.0);
    }
}
