//! Shared residual and decay probes for the explicit sector solution.

use conelab::counterexample::{backward_residual, escauriaza_eval, escauriaza_v, CounterexampleParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded points `(y₁, y₂)` with `|z| ∈ radii` and `|arg z|` at most
/// `spread` times the half-angle, where `z = y₁ + shift + i·y₂`.
pub fn sector_points(
    p: &CounterexampleParams,
    radii: (f64, f64),
    spread: f64,
    count: usize,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rho = rng.gen_range(radii.0..radii.1);
            let psi = spread * p.half_angle() * rng.gen_range(-1.0..1.0);
            (rho * psi.cos() - p.shift, rho * psi.sin())
        })
        .collect()
}

/// Observed order `log₂(|r(h)| / |r(h/2)|)` of the finite-difference
/// backward-heat residual at one point.
pub fn residual_order(p: &CounterexampleParams, y: (f64, f64), s: f64, h: f64) -> f64 {
    let v = |y: &[f64], s: f64| escauriaza_v(y[0], y[1], s, p);
    let r1 = backward_residual(v, &[y.0, y.1], s, h).unwrap();
    let r2 = backward_residual(v, &[y.0, y.1], s, h / 2.0).unwrap();
    (r1.abs() / r2.abs()).log2()
}

/// `(|v|, unclamped exponent)` at `s = 10^{−k}`, `k = 1..=levels`.
pub fn decay_profile(p: &CounterexampleParams, y: (f64, f64), levels: i32) -> Vec<(f64, f64)> {
    (1..=levels)
        .map(|k| {
            let e = escauriaza_eval(y.0, y.1, 10f64.powi(-k), p).unwrap();
            (e.value.abs(), e.log_bound)
        })
        .collect()
}
