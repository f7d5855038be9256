//! Implicit finite-difference heat solvers on a ball (radial) and on a polar
//! sector, with the decay, cross-check and boundary-control experiments.

mod control;
mod crosscheck;
mod decay;
mod radial;
mod sector;

use serde::{Deserialize, Serialize};

pub use control::{control_experiment, control_sweep, ControlConfig, ControlReport};
pub use crosscheck::{counterexample_crosscheck, CrosscheckConfig, CrosscheckReport};
pub use decay::{decay_fit, fit_decay_series, DecayFit};
pub use radial::radial_solve;
pub use sector::{sector_solve, SectorGrid};

/// Number of implicit-Euler half steps that replace the first Crank–Nicolson
/// step, damping the corner incompatibility between initial and boundary data.
pub const RANNACHER_HALF_STEPS: usize = 4;

/// Growth beyond this multiple of the data bound is reported as instability.
pub const INSTABILITY_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TimeScheme {
    ImplicitEuler,
    /// Crank–Nicolson after a short implicit-Euler start.
    #[default]
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Geometry {
    Radial {
        n: usize,
        radius: f64,
        nr: usize,
    },
    Sector {
        theta: f64,
        r_in: f64,
        r_out: f64,
        nr: usize,
        nw: usize,
    },
}

/// Solution history on a structured grid.
///
/// `values[k]` holds all nodes (boundary included) at `times[k]`; radial nodes
/// are `r_i = i·R/nr`, sector nodes are row-major in `(r, ω)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub geometry: Geometry,
    pub dt: f64,
    pub scheme: TimeScheme,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl GridField {
    pub fn last(&self) -> &[f64] {
        self.values.last().expect("field holds at least the initial level")
    }

    /// `(t, u(0, t))` for a radial field.
    pub fn center_series(&self) -> Vec<(f64, f64)> {
        self.times.iter().zip(&self.values).map(|(t, v)| (*t, v[0])).collect()
    }
}

/// Step sizes for `steps` steps of size `dt`, with the first step split into
/// implicit-Euler half steps when Crank–Nicolson is selected.
pub(crate) fn step_plan(scheme: TimeScheme, dt: f64, steps: usize) -> Vec<(f64, bool)> {
    let mut plan = Vec::with_capacity(steps + RANNACHER_HALF_STEPS);
    match scheme {
        TimeScheme::ImplicitEuler => plan.extend(std::iter::repeat_n((dt, true), steps)),
        TimeScheme::CrankNicolson => {
            // the first two steps become four half steps
            let startup = steps.min(RANNACHER_HALF_STEPS / 2);
            for _ in 0..2 * startup {
                plan.push((dt / 2.0, true));
            }
            plan.extend(std::iter::repeat_n((dt, false), steps - startup));
        }
    }
    plan
}

pub(crate) fn step_count(t_end: f64, dt: f64) -> crate::Result<usize> {
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(crate::error::invalid(
            "dt",
            dt,
            "time step and horizon must be positive",
        ));
    }
    let steps = (t_end / dt).round();
    if ((steps * dt - t_end) / t_end).abs() > 1e-9 {
        return Err(crate::error::invalid(
            "dt",
            dt,
            "horizon must be an integer number of steps",
        ));
    }
    Ok(steps as usize)
}
