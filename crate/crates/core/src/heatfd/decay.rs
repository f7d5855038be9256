use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

use super::{Geometry, GridField};

/// Fit of `u(0, t) ≈ c·M·e^{−βR²/t}` on a small-time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub beta_fit: f64,
    /// Envelope constant, raised until `c·M·e^{−βR²/t}` dominates every
    /// window sample.
    pub c_fit: f64,
    /// Constant of the plain least-squares line, before raising.
    pub c_least_squares: f64,
    /// `max log u − log envelope` over the window; ≤ 0 after raising.
    pub max_violation: f64,
    /// Largest residual of the least-squares line itself.
    pub least_squares_max_residual: f64,
    pub points: usize,
    pub window: (f64, f64),
    /// Set when the window holds no positive samples; the other numbers are
    /// then meaningless zeros.
    pub empty: bool,
}

impl DecayFit {
    fn empty(window: (f64, f64)) -> Self {
        Self {
            beta_fit: 0.0,
            c_fit: 0.0,
            c_least_squares: 0.0,
            max_violation: 0.0,
            least_squares_max_residual: 0.0,
            points: 0,
            window,
            empty: true,
        }
    }
}

/// Least-squares fit of `log(u/M)` against `−R²/t` over `t_lo < t < t_hi`.
pub fn fit_decay_series(series: &[(f64, f64)], radius: f64, m: f64, window: (f64, f64)) -> Result<DecayFit> {
    let (t_lo, t_hi) = window;
    if !(t_lo >= 0.0 && t_hi > t_lo) {
        return Err(invalid("t_window", t_hi - t_lo, "need 0 ≤ t_lo < t_hi"));
    }
    if !(m > 0.0 && radius > 0.0) {
        return Err(invalid("M", m, "bound and radius must be positive"));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, u)| *t > t_lo && *t < t_hi && *u > 0.0)
        .map(|(t, u)| (-radius * radius / t, (u / m).ln()))
        .collect();
    if pts.len() < 2 {
        return Ok(DecayFit::empty(window));
    }
    if pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::NonFinite("decay series"));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Singular("decay fit needs distinct times"));
    }
    let beta = sxy / sxx;
    let log_c = my - beta * mx;
    let shifted: Vec<f64> = pts.iter().map(|(x, y)| y - beta * x).collect();
    let log_c_env = shifted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        beta_fit: beta,
        c_fit: log_c_env.exp(),
        c_least_squares: log_c.exp(),
        max_violation: shifted.iter().map(|s| s - log_c_env).fold(f64::NEG_INFINITY, f64::max),
        least_squares_max_residual: shifted.iter().map(|s| s - log_c).fold(f64::NEG_INFINITY, f64::max),
        points: pts.len(),
        window,
        empty: false,
    })
}

/// Decay fit of the center values of a radial field.
pub fn decay_fit(field: &GridField, radius: f64, m: f64, window: (f64, f64)) -> Result<DecayFit> {
    if !matches!(field.geometry, Geometry::Radial { .. }) {
        return Err(invalid("geometry", 0.0, "decay fit needs a radial field"));
    }
    let horizon = *field.times.last().unwrap_or(&0.0);
    if window.1 > horizon * (1.0 + 1e-12) {
        return Err(invalid(
            "t_window",
            window.1,
            "window extends past the simulated horizon",
        ));
    }
    fit_decay_series(&field.center_series(), radius, m, window)
}
