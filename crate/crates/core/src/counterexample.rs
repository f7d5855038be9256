//! Heat kernel, Appell transformation, and Escauriaza's bounded solution of
//! the backward heat equation in a sector that vanishes at `s = 0`.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Upper clamp on the real part of the exponent before exponentiating; large
/// negative exponents underflow to zero on their own.
pub const EXPONENT_CLAMP: f64 = 700.0;

/// `Γ(x, t) = (4πt)^{−n/2} e^{−|x|²/(4t)}`.
pub fn heat_kernel(x: &[f64], t: f64) -> Result<f64> {
    Ok(log_heat_kernel(x, t)?.exp())
}

pub fn log_heat_kernel(x: &[f64], t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid("t", t, "heat kernel requires t > 0"));
    }
    let n = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok(-0.5 * n * (4.0 * PI * t).ln() - r2 / (4.0 * t))
}

/// Backward-heat solution `v(y, s) = u(y/s, 1/s) / Γ(y/s, 1/s)` built from a
/// forward solution `u`.
pub struct Appell<F> {
    u: F,
    n: usize,
}

pub fn appell<F: Fn(&[f64], f64) -> f64>(u: F, n: usize) -> Appell<F> {
    Appell { u, n }
}

impl<F: Fn(&[f64], f64) -> f64> Appell<F> {
    pub fn eval(&self, y: &[f64], s: f64) -> Result<f64> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: y.len(),
            });
        }
        if !(s > 0.0) {
            return Err(invalid("s", s, "Appell transform requires s > 0"));
        }
        let x: Vec<f64> = y.iter().map(|c| c / s).collect();
        let t = 1.0 / s;
        Ok((self.u)(&x, t) * (-log_heat_kernel(&x, t)?).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleParams {
    /// Amplitude `A` in `exp(−A z^α / s^α)`.
    pub amplitude: f64,
    pub alpha: f64,
    /// Translation along `y₁` that moves the sector vertex away from the
    /// singular origin.
    pub shift: f64,
}

impl CounterexampleParams {
    pub fn new(amplitude: f64, alpha: f64, shift: f64) -> Result<Self> {
        if !(amplitude > 0.0) {
            return Err(invalid("amplitude", amplitude, "must be positive"));
        }
        if !(alpha > 2.0) {
            return Err(invalid("alpha", alpha, "sector exponent must exceed 2"));
        }
        if !(shift >= 0.0) {
            return Err(invalid("shift", shift, "must be nonnegative"));
        }
        Ok(Self {
            amplitude,
            alpha,
            shift,
        })
    }

    /// Half-opening `π/(2α)` of the sector where the solution stays bounded.
    pub fn half_angle(&self) -> f64 {
        PI / (2.0 * self.alpha)
    }
}

impl Default for CounterexampleParams {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            alpha: 4.0,
            shift: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscauriazaEval {
    pub value: f64,
    /// Unclamped real part of the exponent: `|v| ≤ e^{log_bound}`.
    pub log_bound: f64,
    pub saturated: bool,
}

/// Exponent `−A z^α/s^α + |z|²/(4s) − ln s` at `z = (y₁ + shift) + i·y₂`.
fn exponent(y1: f64, y2: f64, s: f64, p: &CounterexampleParams) -> Result<Complex64> {
    if !(s > 0.0) {
        return Err(invalid("s", s, "counterexample requires s > 0"));
    }
    let z = Complex64::new(y1 + p.shift, y2);
    if z.norm() == 0.0 {
        return Err(Error::OutsideDomain("z = 0 is a branch point"));
    }
    // principal branch: arg ∈ (−π, π]
    let log_z = Complex64::new(z.norm().ln(), z.arg());
    let power = (log_z * p.alpha - Complex64::new(p.alpha * s.ln(), 0.0)).exp();
    Ok(-power * p.amplitude + Complex64::new(z.norm_sqr() / (4.0 * s) - s.ln(), 0.0))
}

pub fn escauriaza_eval(y1: f64, y2: f64, s: f64, p: &CounterexampleParams) -> Result<EscauriazaEval> {
    let e = exponent(y1, y2, s, p)?;
    let re = e.re.min(EXPONENT_CLAMP);
    Ok(EscauriazaEval {
        value: re.exp() * e.im.cos(),
        log_bound: e.re,
        saturated: e.re > EXPONENT_CLAMP,
    })
}

/// `v(y, s) = Re (1/s)·exp(−A z^α/s^α + |z|²/(4s))`, `z = (y₁ + shift) + i·y₂`.
pub fn escauriaza_v(y1: f64, y2: f64, s: f64, p: &CounterexampleParams) -> Result<f64> {
    Ok(escauriaza_eval(y1, y2, s, p)?.value)
}

/// Central-difference residual `v_s + Δv` with step `h` in every variable.
pub fn backward_residual<F>(v: F, y: &[f64], s: f64, h: f64) -> Result<f64>
where
    F: Fn(&[f64], f64) -> Result<f64>,
{
    if !(h > 0.0 && s - h > 0.0) {
        return Err(invalid("h", h, "step must be positive and smaller than s"));
    }
    let v_s = (v(y, s + h)? - v(y, s - h)?) / (2.0 * h);
    let centre = v(y, s)?;
    let mut lap = 0.0;
    let mut yy = y.to_vec();
    for k in 0..y.len() {
        yy[k] = y[k] + h;
        let plus = v(&yy, s)?;
        yy[k] = y[k] - h;
        let minus = v(&yy, s)?;
        yy[k] = y[k];
        lap += (plus - 2.0 * centre + minus) / (h * h);
    }
    Ok(v_s + lap)
}

/// Sector membership `|arg z| < π/(2α)` for the shifted variable.
pub fn in_sector(y1: f64, y2: f64, p: &CounterexampleParams) -> bool {
    let z = Complex64::new(y1 + p.shift, y2);
    z.norm() > 0.0 && z.arg().abs() < p.half_angle()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorBoundScan {
    pub margin: f64,
    pub radius_cap: f64,
    pub points: usize,
    pub sup_inside: f64,
    pub log_sup_inside: f64,
    pub sup_outside_sample: f64,
    pub log_sup_outside: f64,
    /// Outside samples whose exponent hit [`EXPONENT_CLAMP`].
    pub saturated_outside: usize,
}

/// Largest `|v|` over seeded samples in an angular range of the unshifted
/// variable `y`, with `|y| ≤ radius_cap` and `s ∈ (0, 1]`.
fn scan_angles(
    p: &CounterexampleParams,
    angles: (f64, f64),
    radius_cap: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64, usize)> {
    let mut sup = 0.0_f64;
    let mut log_sup = f64::NEG_INFINITY;
    let mut saturated = 0;
    for _ in 0..count {
        let psi = angles.0 + (angles.1 - angles.0) * rng.gen::<f64>();
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let rho = radius_cap * rng.gen::<f64>();
        let s = 1.0 - rng.gen::<f64>();
        let e = escauriaza_eval(rho * psi.cos(), sign * rho * psi.sin(), s, p)?;
        sup = sup.max(e.value.abs());
        log_sup = log_sup.max(e.log_bound);
        saturated += e.saturated as usize;
    }
    Ok((sup, log_sup, saturated))
}

pub fn sector_bound_scan(
    p: &CounterexampleParams,
    margin: f64,
    radius_cap: f64,
    count: usize,
    seed: u64,
) -> Result<SectorBoundScan> {
    let half = p.half_angle();
    if !(margin > 0.0 && margin < half) {
        return Err(invalid("margin", margin, "must lie in (0, π/(2α))"));
    }
    if !(radius_cap > 0.0) {
        return Err(invalid("radius_cap", radius_cap, "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sup_inside, log_sup_inside, _) = scan_angles(p, (0.0, half - margin), radius_cap, count, &mut rng)?;
    let outside = (half + margin, (half + 2.0 * margin).min(PI / 2.0));
    let (sup_outside_sample, log_sup_outside, saturated_outside) =
        scan_angles(p, outside, radius_cap, count, &mut rng)?;
    Ok(SectorBoundScan {
        margin,
        radius_cap,
        points: count,
        sup_inside,
        log_sup_inside,
        sup_outside_sample,
        log_sup_outside,
        saturated_outside,
    })
}

/// Seeded scan along the bisector `y₂ = 0` only; returns the largest exponent.
pub fn bisector_scan_log_sup(p: &CounterexampleParams, radius_cap: f64, count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(scan_angles(p, (0.0, 0.0), radius_cap, count, &mut rng)?.1)
}

/// Supremum over `0 ≤ y₁ ≤ radius_cap`, `s ∈ (0, 1]` of the exponent on the
/// bisector, by exact maximization in `y₁` and golden-section search in `ln s`.
///
/// For fixed `s` the exponent `−Aζ^α/s^α + ζ²/(4s) − ln s` is unimodal in `ζ`
/// with stationary point `ζ*^{α−2} = s^{α−1}/(2Aα)`.
pub fn bisector_log_sup(p: &CounterexampleParams, radius_cap: f64) -> f64 {
    let (lo, hi) = (p.shift, p.shift + radius_cap);
    let profile = |log_s: f64| {
        let s = log_s.exp();
        let zeta_star = (s.powf(p.alpha - 1.0) / (2.0 * p.amplitude * p.alpha)).powf(1.0 / (p.alpha - 2.0));
        let zeta = zeta_star.clamp(lo.max(f64::MIN_POSITIVE), hi);
        -p.amplitude * (zeta / s).powf(p.alpha) + zeta * zeta / (4.0 * s) - log_s
    };
    let grid = 4000;
    let (a, b) = (-30.0_f64, 0.0_f64);
    let mut best = (f64::NEG_INFINITY, b);
    for i in 0..=grid {
        let ls = a + (b - a) * i as f64 / grid as f64;
        let val = profile(ls);
        if val > best.0 {
            best = (val, ls);
        }
    }
    let step = (b - a) / grid as f64;
    let (mut l, mut r) = ((best.1 - step).max(a), (best.1 + step).min(b));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let m1 = r - g * (r - l);
        let m2 = l + g * (r - l);
        if profile(m1) < profile(m2) {
            l = m1;
        } else {
            r = m2;
        }
    }
    best.0.max(profile(0.5 * (l + r)))
}
