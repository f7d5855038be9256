use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::sector::{SectorGrid, SectorStepper};
use super::TimeScheme;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlConfig {
    pub theta: f64,
    pub r_in: f64,
    pub r_out: f64,
    pub nr: usize,
    pub nw: usize,
    pub t_end: f64,
    pub dt: f64,
    /// Finest dyadic level of the control basis; level `j` has
    /// `2·(2^j − 1)·2^j` hat functions.
    pub level: usize,
    /// Box constraint `|c_i| ≤ bound` on every coefficient.
    pub bound: f64,
    pub max_iter: usize,
    pub tikhonov: f64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            theta: std::f64::consts::FRAC_PI_2,
            r_in: 0.5,
            r_out: 1.5,
            nr: 16,
            nw: 16,
            t_end: 0.1,
            dt: 0.002,
            level: 3,
            bound: 1.0,
            max_iter: 20_000,
            tikhonov: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: usize,
    pub n_controls: usize,
    pub terminal_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlReport {
    pub config: ControlConfig,
    pub n_controls: usize,
    /// Terminal norm with all controls off.
    pub free_norm: f64,
    pub terminal_norm: f64,
    pub levels: Vec<LevelResult>,
    /// `(ray, r, t, coefficient)` with `ray = ±1` for `ω = ±θ/2`.
    pub control_profile: Vec<[f64; 4]>,
    pub converged: bool,
}

/// Tensor hat basis on the two rays at one dyadic level.
struct Basis {
    level: usize,
    r_in: f64,
    length: f64,
    t_end: f64,
}

impl Basis {
    fn space_nodes(&self) -> usize {
        (1 << self.level) - 1
    }

    fn time_nodes(&self) -> usize {
        1 << self.level
    }

    fn len(&self) -> usize {
        2 * self.space_nodes() * self.time_nodes()
    }

    /// `(ray, space node, time node)` of coefficient `c`.
    fn split(&self, c: usize) -> (usize, usize, usize) {
        let per_ray = self.space_nodes() * self.time_nodes();
        let (ray, rest) = (c / per_ray, c % per_ray);
        (ray, rest / self.time_nodes(), rest % self.time_nodes())
    }

    fn node(&self, i: usize, q: usize) -> (f64, f64) {
        let scale = (1 << self.level) as f64;
        (
            self.r_in + (i + 1) as f64 * self.length / scale,
            (q + 1) as f64 * self.t_end / scale,
        )
    }

    fn hat(&self, c: usize, r: f64, t: f64) -> f64 {
        let (_, i, q) = self.split(c);
        let (rc, tc) = self.node(i, q);
        let scale = (1 << self.level) as f64;
        let hr = (1.0 - (r - rc).abs() * scale / self.length).max(0.0);
        let ht = (1.0 - (t - tc).abs() * scale / self.t_end).max(0.0);
        hr * ht
    }

    /// Boundary value on `ray` of the combination with coefficients `coef`.
    fn eval(&self, coef: &[f64], ray: usize, r: f64, t: f64) -> f64 {
        let per_ray = self.space_nodes() * self.time_nodes();
        (ray * per_ray..(ray + 1) * per_ray)
            .map(|c| coef[c] * self.hat(c, r, t))
            .sum()
    }
}

struct Problem<'a> {
    stepper: &'a SectorStepper,
    u0: &'a [f64],
    weights: Vec<f64>,
}

impl Problem<'_> {
    /// Weighted interior terminal state for the given ray data.
    fn terminal<B: Fn(usize, f64, f64) -> f64>(&self, ray_data: B, with_init: bool) -> Result<Vec<f64>> {
        let g = *self.stepper.grid();
        let init = if with_init {
            self.u0.to_vec()
        } else {
            vec![0.0; g.node_count()]
        };
        let last = self.stepper.run(
            |j, k, t| {
                if k == 0 && j > 0 && j < g.nr {
                    ray_data(0, g.r(j), t)
                } else if k == g.nw && j > 0 && j < g.nr {
                    ray_data(1, g.r(j), t)
                } else {
                    0.0
                }
            },
            init,
            |_, _| {},
        )?;
        let mut out = Vec::with_capacity(self.weights.len());
        for j in 1..g.nr {
            for k in 1..g.nw {
                out.push(last[g.index(j, k)]);
            }
        }
        Ok(out.iter().zip(&self.weights).map(|(v, w)| v * w).collect())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Projected gradient for `min ‖f + Gc‖² + τ‖c‖²` over `|c_i| ≤ bound`,
/// started at `c`. Returns iterations and whether the step stalled.
fn projected_gradient(
    cols: &[Vec<f64>],
    f: &[f64],
    c: &mut [f64],
    bound: f64,
    tau: f64,
    max_iter: usize,
) -> (usize, bool) {
    let m = cols.len();
    let residual = |c: &[f64]| -> Vec<f64> {
        let mut r = f.to_vec();
        for (col, ci) in cols.iter().zip(c) {
            for (ri, g) in r.iter_mut().zip(col) {
                *ri += ci * g;
            }
        }
        r
    };
    // Lipschitz constant of the gradient from a power iteration on GᵀG
    let mut x = vec![1.0 / (m as f64).sqrt(); m];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let mut gx = vec![0.0; f.len()];
        for (col, xi) in cols.iter().zip(&x) {
            for (g, v) in gx.iter_mut().zip(col) {
                *g += xi * v;
            }
        }
        let y: Vec<f64> = cols
            .iter()
            .map(|col| col.iter().zip(&gx).map(|(a, b)| a * b).sum())
            .collect();
        lambda = norm(&y);
        if lambda == 0.0 {
            break;
        }
        x = y.iter().map(|v| v / lambda).collect();
    }
    let lip = 2.0 * (1.01 * lambda + tau);
    if lip == 0.0 {
        return (0, true);
    }
    let step = 1.0 / lip;
    for it in 0..max_iter {
        let r = residual(c);
        let mut change = 0.0_f64;
        let mut size = 0.0_f64;
        for (i, col) in cols.iter().enumerate() {
            let grad = 2.0 * (col.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() + tau * c[i]);
            let next = (c[i] - step * grad).clamp(-bound, bound);
            change = change.max((next - c[i]).abs());
            size = size.max(next.abs());
            c[i] = next;
        }
        if change <= 1e-12 * size.max(1e-300) || change == 0.0 {
            return (it + 1, true);
        }
    }
    (max_iter, false)
}

/// Drives a fixed initial state towards zero at `t_end` with bounded hat
/// controls on both rays, refining the control basis one dyadic level at a
/// time and warm-starting each level from the previous one.
pub fn control_experiment(cfg: &ControlConfig) -> Result<ControlReport> {
    if !(cfg.bound >= 0.0) {
        return Err(invalid("bound", cfg.bound, "must be nonnegative"));
    }
    if cfg.level == 0 {
        return Err(invalid("level", 0.0, "need at least level 1"));
    }
    if !(cfg.tikhonov >= 0.0) {
        return Err(invalid("tikhonov", cfg.tikhonov, "must be nonnegative"));
    }
    let grid = SectorGrid::new(cfg.theta, cfg.r_in, cfg.r_out, cfg.nr, cfg.nw)?;
    let stepper = SectorStepper::new(grid, cfg.t_end, cfg.dt, TimeScheme::CrankNicolson)?;
    let length = cfg.r_out - cfg.r_in;
    let mut u0 = vec![0.0; grid.node_count()];
    for j in 0..=grid.nr {
        for k in 0..=grid.nw {
            let (r, w) = (grid.r(j), grid.omega(k));
            u0[grid.index(j, k)] =
                (std::f64::consts::PI * (r - cfg.r_in) / length).sin() * (std::f64::consts::PI * w / cfg.theta).cos();
        }
    }
    let mut weights = Vec::new();
    for j in 1..grid.nr {
        for _ in 1..grid.nw {
            weights.push((grid.r(j) * grid.dr() * grid.dw()).sqrt());
        }
    }
    let problem = Problem {
        stepper: &stepper,
        u0: &u0,
        weights,
    };
    let free = problem.terminal(|_, _, _| 0.0, true)?;
    let free_norm = norm(&free);

    let mut levels = Vec::new();
    let mut coef: Vec<f64> = Vec::new();
    let mut prev: Option<Basis> = None;
    let mut best_norm = free_norm;
    let mut all_converged = true;
    for level in 1..=cfg.level {
        let basis = Basis {
            level,
            r_in: cfg.r_in,
            length,
            t_end: cfg.t_end,
        };
        // coarse controls are exactly representable in the finer hat basis
        let mut c: Vec<f64> = (0..basis.len())
            .map(|idx| match &prev {
                Some(pb) => {
                    let (ray, i, q) = basis.split(idx);
                    let (r, t) = basis.node(i, q);
                    pb.eval(&coef, ray, r, t)
                }
                None => 0.0,
            })
            .collect();
        let (iterations, converged, terminal_norm) = if cfg.bound == 0.0 {
            (0, true, free_norm)
        } else {
            let cols = (0..basis.len())
                .map(|idx| {
                    let (ray_c, _, _) = basis.split(idx);
                    problem.terminal(|ray, r, t| if ray == ray_c { basis.hat(idx, r, t) } else { 0.0 }, false)
                })
                .collect::<Result<Vec<_>>>()?;
            let start = c.clone();
            let (it, conv) = projected_gradient(&cols, &free, &mut c, cfg.bound, cfg.tikhonov, cfg.max_iter);
            let achieved = problem.terminal(|ray, r, t| basis.eval(&c, ray, r, t), true)?;
            let mut achieved_norm = norm(&achieved);
            if achieved_norm > best_norm {
                // keep the warm start, which reproduces the coarser level
                c = start;
                achieved_norm = best_norm;
            }
            (it, conv, achieved_norm)
        };
        best_norm = best_norm.min(terminal_norm);
        all_converged &= converged;
        levels.push(LevelResult {
            level,
            n_controls: basis.len(),
            terminal_norm,
            iterations,
            converged,
        });
        coef = c;
        prev = Some(basis);
    }
    let basis = prev.expect("at least one level");
    let control_profile = (0..basis.len())
        .map(|idx| {
            let (ray, i, q) = basis.split(idx);
            let (r, t) = basis.node(i, q);
            [if ray == 0 { -1.0 } else { 1.0 }, r, t, coef[idx]]
        })
        .collect();
    let last = levels.last().expect("at least one level");
    Ok(ControlReport {
        config: *cfg,
        n_controls: last.n_controls,
        free_norm,
        terminal_norm: last.terminal_norm,
        levels,
        control_profile,
        converged: all_converged,
    })
}

/// Runs [`control_experiment`] for each opening angle.
pub fn control_sweep(cfg: &ControlConfig, thetas: &[f64]) -> Result<Vec<ControlReport>> {
    thetas
        .iter()
        .map(|&theta| control_experiment(&ControlConfig { theta, ..*cfg }))
        .collect()
}
