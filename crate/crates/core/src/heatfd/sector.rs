use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{BandLu, BandMatrix};

use super::{step_count, step_plan, Geometry, GridField, TimeScheme, INSTABILITY_FACTOR};

/// Polar grid on `{r_in ≤ r ≤ r_out, |ω| ≤ θ/2}` with `nr × nw` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorGrid {
    pub theta: f64,
    pub r_in: f64,
    pub r_out: f64,
    pub nr: usize,
    pub nw: usize,
}

impl SectorGrid {
    pub fn new(theta: f64, r_in: f64, r_out: f64, nr: usize, nw: usize) -> Result<Self> {
        if !(theta > 0.0 && theta < std::f64::consts::PI) {
            return Err(invalid("theta", theta, "sector angle must lie in (0, π)"));
        }
        if !(r_in > 0.0 && r_out > r_in) {
            return Err(invalid("r_in", r_in, "need 0 < r_in < r_out"));
        }
        if nr < 2 || nw < 2 {
            return Err(invalid(
                "nr",
                nr.min(nw) as f64,
                "need at least two cells per direction",
            ));
        }
        Ok(Self {
            theta,
            r_in,
            r_out,
            nr,
            nw,
        })
    }

    pub fn dr(&self) -> f64 {
        (self.r_out - self.r_in) / self.nr as f64
    }

    pub fn dw(&self) -> f64 {
        self.theta / self.nw as f64
    }

    pub fn r(&self, j: usize) -> f64 {
        self.r_in + j as f64 * self.dr()
    }

    pub fn omega(&self, k: usize) -> f64 {
        -0.5 * self.theta + k as f64 * self.dw()
    }

    pub fn node_count(&self) -> usize {
        (self.nr + 1) * (self.nw + 1)
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * (self.nw + 1) + k
    }

    pub fn is_boundary(&self, j: usize, k: usize) -> bool {
        j == 0 || k == 0 || j == self.nr || k == self.nw
    }

    /// Halves both spacings.
    pub fn refined(&self) -> Self {
        Self {
            nr: 2 * self.nr,
            nw: 2 * self.nw,
            ..*self
        }
    }

    /// Coefficients `(r−, r+, ω±, centre)` of the polar Laplacian at row `j`.
    fn stencil(&self, j: usize) -> (f64, f64, f64, f64) {
        let (dr, dw, r) = (self.dr(), self.dw(), self.r(j));
        let radial = 1.0 / (dr * dr);
        let adv = 1.0 / (2.0 * r * dr);
        let ang = 1.0 / (r * r * dw * dw);
        (radial - adv, radial + adv, ang, -2.0 * radial - 2.0 * ang)
    }

    fn laplacian_at(&self, u: &[f64], j: usize, k: usize) -> f64 {
        let (cm, cp, cw, cc) = self.stencil(j);
        cm * u[self.index(j - 1, k)]
            + cp * u[self.index(j + 1, k)]
            + cw * (u[self.index(j, k - 1)] + u[self.index(j, k + 1)])
            + cc * u[self.index(j, k)]
    }

    /// Trapezoid-weighted `L²` norm over the sector, `(Σ u² r dr dω)^{1/2}`.
    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        let mut s = 0.0;
        for j in 0..=self.nr {
            let wj = if j == 0 || j == self.nr { 0.5 } else { 1.0 };
            for k in 0..=self.nw {
                let wk = if k == 0 || k == self.nw { 0.5 } else { 1.0 };
                let v = u[self.index(j, k)];
                s += wj * wk * v * v * self.r(j);
            }
        }
        (s * self.dr() * self.dw()).sqrt()
    }
}

/// Factored step matrices for one grid and time step, reusable across solves
/// with different data.
pub(crate) struct SectorStepper {
    grid: SectorGrid,
    dt: f64,
    scheme: TimeScheme,
    steps: usize,
    half_implicit: BandLu,
    main: BandLu,
}

impl SectorStepper {
    pub(crate) fn new(grid: SectorGrid, t_end: f64, dt: f64, scheme: TimeScheme) -> Result<Self> {
        let steps = step_count(t_end, dt)?;
        let (main_h, main_theta) = match scheme {
            TimeScheme::ImplicitEuler => (dt, 1.0),
            TimeScheme::CrankNicolson => (dt, 0.5),
        };
        Ok(Self {
            grid,
            dt,
            scheme,
            steps,
            half_implicit: Self::assemble(&grid, dt / 2.0, 1.0).factor()?,
            main: Self::assemble(&grid, main_h, main_theta).factor()?,
        })
    }

    fn assemble(g: &SectorGrid, h: f64, theta: f64) -> BandMatrix {
        let m = g.nw - 1;
        let size = (g.nr - 1) * m;
        let mut a = BandMatrix::zeros(size, m);
        for j in 1..g.nr {
            let (cm, cp, cw, cc) = g.stencil(j);
            for k in 1..g.nw {
                let row = (j - 1) * m + (k - 1);
                a.add(row, row, 1.0 - theta * h * cc);
                if j > 1 {
                    a.add(row, row - m, -theta * h * cm);
                }
                if j + 1 < g.nr {
                    a.add(row, row + m, -theta * h * cp);
                }
                if k > 1 {
                    a.add(row, row - 1, -theta * h * cw);
                }
                if k + 1 < g.nw {
                    a.add(row, row + 1, -theta * h * cw);
                }
            }
        }
        a
    }

    pub(crate) fn grid(&self) -> &SectorGrid {
        &self.grid
    }

    /// Advances `init` (all nodes) to `t_end`, calling `observe` after each
    /// step with the time and the full node array.
    pub(crate) fn run<B, O>(&self, boundary: B, init: Vec<f64>, mut observe: O) -> Result<Vec<f64>>
    where
        B: Fn(usize, usize, f64) -> f64,
        O: FnMut(f64, &[f64]),
    {
        let g = &self.grid;
        let m = g.nw - 1;
        let mut u = init;
        let mut bound = u.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let mut rhs = vec![0.0; (g.nr - 1) * m];
        let mut next = vec![0.0; g.node_count()];
        let mut t = 0.0;
        for (h, implicit) in step_plan(self.scheme, self.dt, self.steps) {
            let theta = if implicit { 1.0 } else { 0.5 };
            let t_new = t + h;
            for j in 0..=g.nr {
                for k in 0..=g.nw {
                    if g.is_boundary(j, k) {
                        let v = boundary(j, k, t_new);
                        if !v.is_finite() {
                            return Err(Error::NonFinite("sector boundary data"));
                        }
                        bound = bound.max(v.abs());
                        next[g.index(j, k)] = v;
                    }
                }
            }
            for j in 1..g.nr {
                let (cm, cp, cw, _) = g.stencil(j);
                for k in 1..g.nw {
                    let row = (j - 1) * m + (k - 1);
                    let mut r = u[g.index(j, k)];
                    if theta < 1.0 {
                        r += (1.0 - theta) * h * g.laplacian_at(&u, j, k);
                    }
                    // implicit couplings to boundary nodes at the new time
                    let mut b = 0.0;
                    if j == 1 {
                        b += cm * next[g.index(0, k)];
                    }
                    if j + 1 == g.nr {
                        b += cp * next[g.index(g.nr, k)];
                    }
                    if k == 1 {
                        b += cw * next[g.index(j, 0)];
                    }
                    if k + 1 == g.nw {
                        b += cw * next[g.index(j, g.nw)];
                    }
                    rhs[row] = r + theta * h * b;
                }
            }
            if implicit && self.scheme == TimeScheme::CrankNicolson {
                self.half_implicit.solve_in_place(&mut rhs);
            } else {
                self.main.solve_in_place(&mut rhs);
            }
            for j in 1..g.nr {
                for k in 1..g.nw {
                    next[g.index(j, k)] = rhs[(j - 1) * m + (k - 1)];
                }
            }
            std::mem::swap(&mut u, &mut next);
            t = t_new;
            let peak = u.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if !peak.is_finite() || peak > INSTABILITY_FACTOR * bound {
                return Err(Error::Unstable {
                    value: peak,
                    limit: INSTABILITY_FACTOR * bound,
                });
            }
            observe(t, &u);
        }
        Ok(u)
    }
}

/// Forward heat equation on a polar sector with Dirichlet data on both rays
/// and both arcs. `boundary(r, ω, t)` and `init(r, ω)` give the data; every
/// `store_every`-th level (and the last) is kept.
#[allow(clippy::too_many_arguments)]
pub fn sector_solve<B, I>(
    grid: SectorGrid,
    boundary: B,
    init: I,
    t_end: f64,
    dt: f64,
    scheme: TimeScheme,
    store_every: usize,
) -> Result<GridField>
where
    B: Fn(f64, f64, f64) -> f64,
    I: Fn(f64, f64) -> f64,
{
    let stepper = SectorStepper::new(grid, t_end, dt, scheme)?;
    let mut u0 = vec![0.0; grid.node_count()];
    for j in 0..=grid.nr {
        for k in 0..=grid.nw {
            u0[grid.index(j, k)] = init(grid.r(j), grid.omega(k));
        }
    }
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sector initial data"));
    }
    let every = store_every.max(1);
    let mut times = vec![0.0];
    let mut values = vec![u0.clone()];
    let mut count = 0usize;
    let mut t_last = 0.0;
    let last = stepper.run(
        |j, k, t| boundary(grid.r(j), grid.omega(k), t),
        u0,
        |t, u| {
            count += 1;
            t_last = t;
            if count.is_multiple_of(every) {
                times.push(t);
                values.push(u.to_vec());
            }
        },
    )?;
    if !count.is_multiple_of(every) {
        times.push(t_last);
        values.push(last);
    }
    Ok(GridField {
        geometry: Geometry::Sector {
            theta: grid.theta,
            r_in: grid.r_in,
            r_out: grid.r_out,
            nr: grid.nr,
            nw: grid.nw,
        },
        dt,
        scheme,
        times,
        values,
    })
}
