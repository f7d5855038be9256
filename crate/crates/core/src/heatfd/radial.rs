use crate::error::{invalid, Error, Result};
use crate::linalg::solve_tridiagonal;

use super::{step_count, step_plan, Geometry, GridField, TimeScheme, INSTABILITY_FACTOR};

/// Radially symmetric heat equation `u_t = u_rr + (n−1)/r·u_r` on `(0, R)`
/// with `u(R, t) = g(t)`, zero initial data and `u_r(0, t) = 0`.
///
/// The origin uses the ghost-node limit `Δu(0) ≈ 2n(u₁ − u₀)/dr²`.
pub fn radial_solve<G: Fn(f64) -> f64>(
    n: usize,
    radius: f64,
    g: G,
    t_end: f64,
    nr: usize,
    dt: f64,
    scheme: TimeScheme,
) -> Result<GridField> {
    if n == 0 {
        return Err(invalid("n", 0.0, "dimension must be positive"));
    }
    if !(radius > 2.0) {
        return Err(invalid("radius", radius, "ball radius must exceed 2"));
    }
    if nr < 2 {
        return Err(invalid("nr", nr as f64, "need at least two radial cells"));
    }
    let steps = step_count(t_end, dt)?;
    let dr = radius / nr as f64;
    let inv = 1.0 / (dr * dr);
    let nf = n as f64;
    // operator coefficients for unknowns 0..nr (node nr carries the data)
    let mut lo = vec![0.0; nr];
    let mut di = vec![0.0; nr];
    let mut up = vec![0.0; nr];
    di[0] = -2.0 * nf * inv;
    up[0] = 2.0 * nf * inv;
    for i in 1..nr {
        let adv = (nf - 1.0) / (2.0 * i as f64 * dr * dr);
        lo[i] = inv - adv;
        di[i] = -2.0 * inv;
        up[i] = inv + adv;
    }
    let boundary_coeff = up[nr - 1];

    let mut u = vec![0.0; nr + 1];
    u[nr] = g(0.0);
    let mut bound = u[nr].abs();
    let mut times = vec![0.0];
    let mut values = vec![u.clone()];
    let mut t = 0.0;
    let mut a_lo = vec![0.0; nr];
    let mut a_di = vec![0.0; nr];
    let mut a_up = vec![0.0; nr];
    let mut rhs = vec![0.0; nr];
    for (h, implicit) in step_plan(scheme, dt, steps) {
        let theta = if implicit { 1.0 } else { 0.5 };
        let g_new = g(t + h);
        if !g_new.is_finite() {
            return Err(Error::NonFinite("radial boundary data"));
        }
        bound = bound.max(g_new.abs());
        for i in 0..nr {
            a_lo[i] = -theta * h * lo[i];
            a_di[i] = 1.0 - theta * h * di[i];
            a_up[i] = -theta * h * up[i];
            let mut lu = di[i] * u[i] + up[i] * u[i + 1];
            if i > 0 {
                lu += lo[i] * u[i - 1];
            }
            // u[nr] still holds the previous boundary value
            rhs[i] = u[i] + (1.0 - theta) * h * lu;
        }
        rhs[nr - 1] += theta * h * boundary_coeff * g_new;
        let interior = solve_tridiagonal(&a_lo, &a_di, &a_up, &rhs)?;
        u[..nr].copy_from_slice(&interior);
        u[nr] = g_new;
        t += h;
        let peak = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !peak.is_finite() || peak > INSTABILITY_FACTOR * bound {
            return Err(Error::Unstable {
                value: peak,
                limit: INSTABILITY_FACTOR * bound,
            });
        }
        times.push(t);
        values.push(u.clone());
    }
    Ok(GridField {
        geometry: Geometry::Radial { n, radius, nr },
        dt,
        scheme,
        times,
        values,
    })
}
