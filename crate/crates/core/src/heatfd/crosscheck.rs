use serde::{Deserialize, Serialize};

use crate::counterexample::{escauriaza_eval, CounterexampleParams};
use crate::error::{invalid, Result};

use super::sector::{sector_solve, SectorGrid};
use super::TimeScheme;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckConfig {
    /// Angular margin kept from each edge of the bounded sector `|arg z| < π/(2α)`.
    pub margin: f64,
    pub r_in: f64,
    pub r_out: f64,
    /// `(s₀, s₁)`; the solve runs forward in `τ = s₁ − s`.
    pub window: (f64, f64),
    pub nr: usize,
    pub nw: usize,
    pub dt: f64,
    pub scheme: TimeScheme,
}

impl Default for CrosscheckConfig {
    fn default() -> Self {
        Self {
            margin: 0.05,
            r_in: 0.2,
            r_out: 1.0,
            window: (0.8, 1.0),
            nr: 16,
            nw: 16,
            dt: 0.2 / 16.0,
            scheme: TimeScheme::CrankNicolson,
        }
    }
}

impl CrosscheckConfig {
    /// Halves the grid spacings and the time step.
    pub fn refined(&self) -> Self {
        Self {
            nr: 2 * self.nr,
            nw: 2 * self.nw,
            dt: self.dt / 2.0,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub grid: SectorGrid,
    pub dt: f64,
    pub window: (f64, f64),
    /// `max |v_h − v| / max |v|` over interior nodes at `s = s₀`.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub reference_max: f64,
    /// Polar position `(r, ω)` of the largest error.
    pub argmax: (f64, f64),
    /// `(r, ω, v_h − v)` at every interior node.
    pub error_field: Vec<[f64; 3]>,
}

/// Solves the backward equation satisfied by the explicit counterexample as a
/// forward problem in reversed time on a polar sector around the shifted
/// vertex, with the analytic values as initial and boundary data.
pub fn counterexample_crosscheck(p: &CounterexampleParams, cfg: &CrosscheckConfig) -> Result<CrosscheckReport> {
    let (s0, s1) = cfg.window;
    if !(s0 > 0.0 && s1 <= 1.0 && s0 <= s1) {
        return Err(invalid("window", s1 - s0, "need 0 < s0 ≤ s1 ≤ 1"));
    }
    let half = p.half_angle();
    if !(cfg.margin > 0.0 && cfg.margin < half) {
        return Err(invalid("margin", cfg.margin, "must lie in (0, π/(2α))"));
    }
    let grid = SectorGrid::new(2.0 * (half - cfg.margin), cfg.r_in, cfg.r_out, cfg.nr, cfg.nw)?;
    // polar coordinates are centred on z = 0, i.e. y = (−shift, 0)
    let exact = |r: f64, w: f64, s: f64| -> f64 {
        escauriaza_eval(r * w.cos() - p.shift, r * w.sin(), s, p).map_or(f64::NAN, |e| e.value)
    };
    let last = if s1 > s0 {
        let field = sector_solve(
            grid,
            |r, w, tau| exact(r, w, s1 - tau),
            |r, w| exact(r, w, s1),
            s1 - s0,
            cfg.dt,
            cfg.scheme,
            usize::MAX,
        )?;
        field.last().to_vec()
    } else {
        let mut u = vec![0.0; grid.node_count()];
        for j in 0..=grid.nr {
            for k in 0..=grid.nw {
                u[grid.index(j, k)] = exact(grid.r(j), grid.omega(k), s1);
            }
        }
        u
    };

    let mut error_field = Vec::with_capacity((grid.nr - 1) * (grid.nw - 1));
    let (mut max_abs, mut reference_max, mut argmax) = (0.0_f64, 0.0_f64, (grid.r_in, 0.0));
    for j in 1..grid.nr {
        for k in 1..grid.nw {
            let (r, w) = (grid.r(j), grid.omega(k));
            let v = exact(r, w, s0);
            let err = last[grid.index(j, k)] - v;
            reference_max = reference_max.max(v.abs());
            if err.abs() > max_abs {
                max_abs = err.abs();
                argmax = (r, w);
            }
            error_field.push([r, w, err]);
        }
    }
    Ok(CrosscheckReport {
        grid,
        dt: cfg.dt,
        window: cfg.window,
        max_rel_error: if reference_max > 0.0 {
            max_abs / reference_max
        } else {
            max_abs
        },
        max_abs_error: max_abs,
        reference_max,
        argmax,
        error_field,
    })
}
