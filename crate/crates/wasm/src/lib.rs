//! Browser bindings for three small views: the critical-exponent curve over
//! the certificate sign map, a time slice of the explicit backward solution,
//! and the decay of a heat solution at the centre of a ball.
//!
//! The `*_data` functions are plain Rust so they can be tested natively; the
//! exported wrappers only translate errors.

use conelab::counterexample::{escauriaza_eval, in_sector, CounterexampleParams};
use conelab::heatfd::{decay_fit, radial_solve, TimeScheme};
use conelab::positivity::{alpha_curve, m};
use wasm_bindgen::prelude::*;

/// Upper end of the admissible `ε` range, `1/√3`.
pub fn eps_limit() -> f64 {
    1.0 / 3f64.sqrt()
}

/// Flattened `[ε, α*(ε)]` pairs for `steps` equally spaced `ε`.
pub fn alpha_curve_data(eps_min: f64, eps_max: f64, steps: usize) -> conelab::Result<Vec<f64>> {
    Ok(alpha_curve(eps_min, eps_max, steps, 1e-12)?
        .into_iter()
        .flat_map(|c| [c.eps, c.alpha_star])
        .collect())
}

/// Row-major `m(α, ε)` on `α ∈ [1, 2]` (rows, top = 2) by `ε ∈ [0, eps_max]`
/// (columns).
pub fn certificate_grid_data(rows: usize, cols: usize, eps_max: f64) -> Vec<f64> {
    let (rows, cols) = (rows.max(2), cols.max(2));
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let alpha = 2.0 - i as f64 / (rows - 1) as f64;
        for j in 0..cols {
            out.push(m(alpha, eps_max * j as f64 / (cols - 1) as f64));
        }
    }
    out
}

/// Row-major slice of the explicit solution at time `s` on the square of half
/// width `radius` centred at the vertex `y = (−shift, 0)`, rows top to bottom
/// in `y₂`. Entries are `sign(v)·log10(1 + |v|)`; points where the evaluation
/// fails are NaN.
pub fn counterexample_slice_data(
    amplitude: f64,
    alpha: f64,
    shift: f64,
    s: f64,
    n: usize,
    radius: f64,
) -> conelab::Result<Vec<f64>> {
    let p = CounterexampleParams::new(amplitude, alpha, shift)?;
    let n = n.max(2);
    let step = 2.0 * radius / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let y2 = radius - i as f64 * step;
        for j in 0..n {
            let y1 = -shift - radius + j as f64 * step;
            let v = escauriaza_eval(y1, y2, s, &p).map_or(f64::NAN, |e| e.value);
            out.push(v.signum() * v.abs().ln_1p() / std::f64::consts::LN_10);
        }
    }
    Ok(out)
}

/// Row-major `1.0`/`0.0` sector mask matching [`counterexample_slice_data`].
pub fn sector_mask_data(amplitude: f64, alpha: f64, shift: f64, n: usize, radius: f64) -> conelab::Result<Vec<f64>> {
    let p = CounterexampleParams::new(amplitude, alpha, shift)?;
    let n = n.max(2);
    let step = 2.0 * radius / (n - 1) as f64;
    Ok((0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            in_sector(-shift - radius + j as f64 * step, radius - i as f64 * step, &p) as u8 as f64
        })
        .collect())
}

/// Centre value of the ball solution with unit boundary data and its fitted
/// Gaussian envelope.
#[wasm_bindgen]
pub struct DecayProfile {
    times: Vec<f64>,
    values: Vec<f64>,
    envelope: Vec<f64>,
    beta: f64,
}

#[wasm_bindgen]
impl DecayProfile {
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    /// `c·e^{−βR²/t}` at the same times, zero outside the fit window.
    pub fn envelope(&self) -> Vec<f64> {
        self.envelope.clone()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// Solves the `n`-dimensional radial problem on the ball of radius `radius`
/// up to `R²/16` and fits `β` on `[R²/80, R²/16]`.
pub fn decay_profile_data(n: usize, radius: f64, cells_per_unit: usize) -> conelab::Result<DecayProfile> {
    let r2 = radius * radius;
    let nr = (cells_per_unit as f64 * radius).round().max(2.0) as usize;
    // 500 steps regardless of radius keeps the demo responsive
    let t_end = r2 / 16.0;
    let field = radial_solve(n, radius, |_| 1.0, t_end, nr, t_end / 500.0, TimeScheme::CrankNicolson)?;
    let window = (r2 / 80.0, t_end);
    let fit = decay_fit(&field, radius, 1.0, window)?;
    let (times, values): (Vec<f64>, Vec<f64>) = field.center_series().into_iter().unzip();
    let envelope = times
        .iter()
        .map(|&t| {
            if t >= window.0 && !fit.empty {
                fit.c_fit * (-fit.beta_fit * r2 / t).exp()
            } else {
                0.0
            }
        })
        .collect();
    Ok(DecayProfile {
        times,
        values,
        envelope,
        beta: fit.beta_fit,
    })
}

fn js(e: conelab::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = epsLimit)]
pub fn eps_limit_js() -> f64 {
    eps_limit()
}

#[wasm_bindgen(js_name = alphaCurve)]
pub fn alpha_curve_js(eps_min: f64, eps_max: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    alpha_curve_data(eps_min, eps_max, steps).map_err(js)
}

#[wasm_bindgen(js_name = certificateGrid)]
pub fn certificate_grid_js(rows: usize, cols: usize, eps_max: f64) -> Vec<f64> {
    certificate_grid_data(rows, cols, eps_max)
}

#[wasm_bindgen(js_name = counterexampleSlice)]
pub fn counterexample_slice_js(
    amplitude: f64,
    alpha: f64,
    shift: f64,
    s: f64,
    n: usize,
    radius: f64,
) -> Result<Vec<f64>, JsError> {
    counterexample_slice_data(amplitude, alpha, shift, s, n, radius).map_err(js)
}

#[wasm_bindgen(js_name = sectorMask)]
pub fn sector_mask_js(amplitude: f64, alpha: f64, shift: f64, n: usize, radius: f64) -> Result<Vec<f64>, JsError> {
    sector_mask_data(amplitude, alpha, shift, n, radius).map_err(js)
}

#[wasm_bindgen(js_name = decayProfile)]
pub fn decay_profile_js(n: usize, radius: f64, cells_per_unit: usize) -> Result<DecayProfile, JsError> {
    decay_profile_data(n, radius, cells_per_unit).map_err(js)
}
