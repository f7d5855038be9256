//! Central-difference oracle for the closed-form weight derivatives.

use conelab::geometry::SpaceTimePoint;
use conelab::weights::{f_eval, lam, phi_total, varphi_eval, WeightEval, WeightParams};

pub struct FdStats {
    pub name: &'static str,
    /// Largest relative error at the fine step.
    pub max_rel_error: f64,
    /// `log₂` of the summed error ratio between steps `h` and `h/2`.
    pub order: f64,
    /// `(x, t)` where the fine-step error peaks.
    pub worst: Vec<f64>,
}

/// Finite-difference values plus an error scale. Laplacian-type entries are
/// sums of per-axis terms that can cancel (for instance `α + n − 4 ≈ 0`), so
/// they are compared against `Σ|term|` instead of the sum alone.
pub struct Approx {
    values: Vec<f64>,
    scale: f64,
}

fn plain(values: Vec<f64>) -> Approx {
    Approx { values, scale: 0.0 }
}

fn summed(terms: impl Iterator<Item = f64>) -> Approx {
    let terms: Vec<f64> = terms.collect();
    Approx {
        values: vec![terms.iter().sum()],
        scale: terms.iter().map(|v| v.abs()).sum(),
    }
}

struct Quantity {
    name: &'static str,
    exact: fn(&SpaceTimePoint, &WeightParams) -> Vec<f64>,
    approx: fn(&SpaceTimePoint, &WeightParams, f64) -> Approx,
}

/// Spatial steps scale with `max(1, x₁)`, time steps with `t`. Inside the cone
/// `x₁ ≤ |x|` and both weight terms vary on the scale `x₁`.
fn hx(h: f64, p: &SpaceTimePoint) -> f64 {
    h * p.x[0].max(1.0)
}

fn shifted(x: &[f64], k: usize, d: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[k] += d;
    y
}

fn at_time(p: &SpaceTimePoint, d: f64) -> SpaceTimePoint {
    SpaceTimePoint::new(p.x.clone(), p.t + d)
}

fn central(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

/// Second differences lose `ε/h²` to rounding, so they run at twice the
/// first-difference step.
const SECOND_STEP_FACTOR: f64 = 2.0;

fn second(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    let h = SECOND_STEP_FACTOR * h;
    (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h)
}

fn vphi(x: &[f64], w: &WeightParams) -> WeightEval {
    varphi_eval(x, w.alpha, w.eps).unwrap()
}

fn spatial_gradient(p: &SpaceTimePoint, h: f64, f: impl Fn(&[f64]) -> f64) -> Approx {
    let h = hx(h, p);
    plain(
        (0..p.x.len())
            .map(|k| central(|d| f(&shifted(&p.x, k, d)), h))
            .collect(),
    )
}

fn spatial_laplacian(p: &SpaceTimePoint, h: f64, f: impl Fn(&[f64]) -> f64) -> Approx {
    let h = hx(h, p);
    summed((0..p.x.len()).map(|k| second(|d| f(&shifted(&p.x, k, d)), h)))
}

/// Divergence of an already-checked gradient. Nearly harmonic functions lose
/// too many digits to a second difference of values.
fn divergence(p: &SpaceTimePoint, h: f64, g: impl Fn(&[f64], usize) -> f64) -> Approx {
    let h = hx(h, p);
    summed((0..p.x.len()).map(|k| central(|d| g(&shifted(&p.x, k, d), k), h)))
}

fn time_derivative(p: &SpaceTimePoint, h: f64, f: impl Fn(&SpaceTimePoint) -> f64) -> Approx {
    plain(vec![central(|d| f(&at_time(p, d)), h * p.t)])
}

const QUANTITIES: [Quantity; 11] = [
    Quantity {
        name: "grad_phi",
        exact: |p, w| vphi(&p.x, w).grad[..p.x.len()].to_vec(),
        approx: |p, w, h| spatial_gradient(p, h, |x| vphi(x, w).value),
    },
    Quantity {
        name: "hess_phi",
        exact: |p, w| vphi(&p.x, w).hess_rows().concat(),
        approx: |p, w, h| {
            let n = p.x.len();
            let h = hx(h, p);
            plain(
                (0..n)
                    .flat_map(|k| (0..n).map(move |l| (k, l)))
                    .map(|(k, l)| central(|d| vphi(&shifted(&p.x, l, d), w).grad[k], h))
                    .collect(),
            )
        },
    },
    Quantity {
        name: "lap_phi",
        exact: |p, w| vec![vphi(&p.x, w).laplacian],
        approx: |p, w, h| spatial_laplacian(p, h, |x| vphi(x, w).value),
    },
    Quantity {
        name: "bilap_phi",
        exact: |p, w| vec![vphi(&p.x, w).bilaplacian],
        approx: |p, w, h| spatial_laplacian(p, h, |x| vphi(x, w).laplacian),
    },
    Quantity {
        name: "lambda_d1",
        exact: |p, w| vec![lam(p.t, w.alpha).unwrap().d1],
        approx: |p, w, h| time_derivative(p, h, |q| lam(q.t, w.alpha).unwrap().value),
    },
    Quantity {
        name: "lambda_d2",
        exact: |p, w| vec![lam(p.t, w.alpha).unwrap().d2],
        approx: |p, w, h| time_derivative(p, h, |q| lam(q.t, w.alpha).unwrap().d1),
    },
    Quantity {
        name: "dt_phi",
        exact: |p, w| vec![phi_total(p, w).unwrap().dt],
        approx: |p, w, h| time_derivative(p, h, |q| phi_total(q, w).unwrap().value),
    },
    Quantity {
        name: "dtt_phi",
        exact: |p, w| vec![phi_total(p, w).unwrap().dtt],
        approx: |p, w, h| plain(vec![second(|d| phi_total(&at_time(p, d), w).unwrap().value, h * p.t)]),
    },
    Quantity {
        name: "dt_grad_sq",
        exact: |p, w| vec![phi_total(p, w).unwrap().dt_grad_sq],
        approx: |p, w, h| time_derivative(p, h, |q| phi_total(q, w).unwrap().grad_sq()),
    },
    Quantity {
        name: "grad_f",
        exact: |p, w| f_eval(&p.x, w.alpha, w.eps).unwrap().grad[..p.x.len()].to_vec(),
        approx: |p, w, h| spatial_gradient(p, h, |x| f_eval(x, w.alpha, w.eps).unwrap().value),
    },
    Quantity {
        name: "lap_f",
        exact: |p, w| vec![f_eval(&p.x, w.alpha, w.eps).unwrap().laplacian],
        approx: |p, w, h| divergence(p, h, |x, k| f_eval(x, w.alpha, w.eps).unwrap().grad[k]),
    },
];

fn rel_error(exact: &[f64], approx: &Approx) -> f64 {
    let scale = exact
        .iter()
        .fold(approx.scale, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    exact
        .iter()
        .zip(&approx.values)
        .map(|(e, a)| (e - a).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Runs every quantity at every point. `fine` is the relative step for the
/// accuracy check, `coarse` and `coarse/2` give the observed order.
pub fn derivative_checks(w: &WeightParams, points: &[SpaceTimePoint], fine: f64, coarse: f64) -> Vec<FdStats> {
    QUANTITIES
        .iter()
        .map(|q| {
            let mut max_rel_error = 0.0_f64;
            let mut worst = Vec::new();
            let (mut e1, mut e2) = (0.0, 0.0);
            for p in points {
                let exact = (q.exact)(p, w);
                let e = rel_error(&exact, &(q.approx)(p, w, fine));
                if e > max_rel_error {
                    max_rel_error = e;
                    worst = p.x.iter().copied().chain([p.t]).collect();
                }
                e1 += rel_error(&exact, &(q.approx)(p, w, coarse));
                e2 += rel_error(&exact, &(q.approx)(p, w, coarse / 2.0));
            }
            FdStats {
                name: q.name,
                max_rel_error,
                order: (e1 / e2).log2(),
                worst,
            }
        })
        .collect()
}
