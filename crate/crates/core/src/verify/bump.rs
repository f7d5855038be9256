//! Compactly supported smooth test functions with closed-form jets.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ConeSpec, SpaceTimePoint, MAX_DIM};
use crate::weights::{Jet, SpaceTimeFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BumpKind {
    /// `exp(−1/(1−ρ²))` with `ρ` the scaled space-time distance to the center.
    Radial,
    /// Product over axes of one-dimensional bumps.
    Product,
}

/// Trigonometric factor `1 + amplitude·sin(k·x + ωt + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    pub amplitude: f64,
    pub wave: Vec<f64>,
    pub omega: f64,
    pub phase: f64,
}

/// Where a bump's support must fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BumpDomain {
    QTheta(ConeSpec),
    /// `ℝⁿ × (t_lo, t_hi)`.
    Slab {
        t_lo: f64,
        t_hi: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub kind: BumpKind,
    pub center: SpaceTimePoint,
    /// Support half-widths: one per spatial axis, then time.
    pub radii: Vec<f64>,
    pub modulation: Option<Modulation>,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    spec: BumpSpec,
}

const FACE_SAMPLES: usize = 64;

/// Validates the support box against `domain` and builds the test function.
pub fn make_bump(spec: BumpSpec, domain: &BumpDomain) -> Result<TestFunction> {
    let n = spec.center.x.len();
    if n == 0 || n > MAX_DIM {
        return Err(invalid("n", n as f64, "spatial dimension must be 1..=4"));
    }
    if spec.radii.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: spec.radii.len(),
        });
    }
    if let Some(r) = spec.radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(invalid("radius", *r, "support half-widths must be positive"));
    }
    if let Some(m) = &spec.modulation {
        if m.wave.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: m.wave.len(),
            });
        }
    }
    if !spec.scale.is_finite() {
        return Err(Error::NonFinite("bump scale"));
    }
    let u = TestFunction { spec };
    let (lo, hi) = u.support_box();
    let inside = |p: &[f64]| -> Result<bool> {
        match domain {
            BumpDomain::QTheta(cone) => cone.q_theta_contains(&SpaceTimePoint::new(p[..n].to_vec(), p[n])),
            BumpDomain::Slab { t_lo, t_hi } => Ok(p[n] > *t_lo && p[n] < *t_hi),
        }
    };
    // Corners suffice for the convex domains used here; face samples guard
    // against a future non-convex domain slipping through.
    let d = n + 1;
    let mut p = vec![0.0; d];
    for mask in 0..(1usize << d) {
        for k in 0..d {
            p[k] = if mask >> k & 1 == 1 { hi[k] } else { lo[k] };
        }
        if !inside(&p)? {
            return Err(Error::SupportLeak);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..FACE_SAMPLES {
        let face = rng.gen_range(0..d);
        for k in 0..d {
            p[k] = lo[k] + (hi[k] - lo[k]) * rng.gen::<f64>();
        }
        p[face] = if rng.gen::<bool>() { hi[face] } else { lo[face] };
        if !inside(&p)? {
            return Err(Error::SupportLeak);
        }
    }
    Ok(u)
}

/// `e(s) = exp(−1/(1−s²))` and its first two derivatives.
fn bump_1d(s: f64) -> (f64, f64, f64) {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let e = (-1.0 / q).exp();
    if e == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let q2 = q * q;
    let d1 = -2.0 * s / q2;
    (e, e * d1, e * (d1 * d1 - 2.0 / q2 - 8.0 * s * s / (q2 * q)))
}

impl TestFunction {
    pub fn spec(&self) -> &BumpSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.center.x.len()
    }

    /// Copy with the amplitude multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut spec = self.spec.clone();
        spec.scale *= c;
        Self { spec }
    }

    /// Closed support box `(lo, hi)` in space-time coordinates.
    pub fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        let c = &self.spec.center;
        let mut mid = c.x.clone();
        mid.push(c.t);
        let lo = mid.iter().zip(&self.spec.radii).map(|(m, r)| m - r).collect();
        let hi = mid.iter().zip(&self.spec.radii).map(|(m, r)| m + r).collect();
        (lo, hi)
    }

    fn envelope(&self, x: &[f64], t: f64) -> Jet {
        let n = self.n();
        let c = &self.spec.center;
        let r = &self.spec.radii;
        let mut jet = Jet::zero(n);
        match self.spec.kind {
            BumpKind::Radial => {
                let w: Vec<f64> = (0..n)
                    .map(|k| (x[k] - c.x[k]) / r[k])
                    .chain(std::iter::once((t - c.t) / r[n]))
                    .collect();
                let rho2: f64 = w.iter().map(|v| v * v).sum();
                let q = 1.0 - rho2;
                if q <= 0.0 {
                    return jet;
                }
                let g = (-1.0 / q).exp();
                if g == 0.0 {
                    return jet;
                }
                // derivatives with respect to ρ²
                let g1 = -g / (q * q);
                let g2 = g * (1.0 - 2.0 * q) / (q * q * q * q);
                jet.value = g;
                jet.dt = g1 * 2.0 * w[n] / r[n];
                for k in 0..n {
                    let d = 2.0 * w[k] / r[k];
                    jet.grad[k] = g1 * d;
                    jet.laplacian += g2 * d * d + g1 * 2.0 / (r[k] * r[k]);
                }
            }
            BumpKind::Product => {
                let mut f = [(0.0, 0.0, 0.0); MAX_DIM + 1];
                for k in 0..n {
                    f[k] = bump_1d((x[k] - c.x[k]) / r[k]);
                }
                f[n] = bump_1d((t - c.t) / r[n]);
                let total: f64 = f[..=n].iter().map(|e| e.0).product();
                if total == 0.0 {
                    return jet;
                }
                jet.value = total;
                jet.dt = total / f[n].0 * f[n].1 / r[n];
                for k in 0..n {
                    let rest = total / f[k].0;
                    jet.grad[k] = rest * f[k].1 / r[k];
                    jet.laplacian += rest * f[k].2 / (r[k] * r[k]);
                }
            }
        }
        jet
    }
}

impl SpaceTimeFunction for TestFunction {
    fn dim(&self) -> usize {
        self.n()
    }

    fn jet(&self, x: &[f64], t: f64) -> Jet {
        let n = self.n();
        let mut b = self.envelope(x, t);
        if let Some(m) = &self.spec.modulation {
            if b.value != 0.0 {
                let arg: f64 = (0..n).map(|k| m.wave[k] * x[k]).sum::<f64>() + m.omega * t + m.phase;
                let (sin, cos) = arg.sin_cos();
                let val = 1.0 + m.amplitude * sin;
                let k2: f64 = m.wave.iter().map(|k| k * k).sum();
                let lap_m = -m.amplitude * sin * k2;
                let mut cross = 0.0;
                for k in 0..n {
                    let gm = m.amplitude * cos * m.wave[k];
                    cross += b.grad[k] * gm;
                    b.grad[k] = b.grad[k] * val + b.value * gm;
                }
                b.laplacian = b.laplacian * val + 2.0 * cross + b.value * lap_m;
                b.dt = b.dt * val + b.value * m.amplitude * cos * m.omega;
                b.value *= val;
            }
        }
        let s = self.spec.scale;
        b.value *= s;
        b.dt *= s;
        b.laplacian *= s;
        for g in b.grad[..n].iter_mut() {
            *g *= s;
        }
        b
    }
}

/// Seeded bumps inside `Q_θ`. The first `plain` are unmodulated, the next
/// `modulated` carry a trigonometric factor; kinds alternate.
pub fn default_suite(cone: &ConeSpec, plain: usize, modulated: usize, seed: u64) -> Result<Vec<TestFunction>> {
    let n = cone.n();
    let domain = BumpDomain::QTheta(*cone);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_tan = (cone.theta() / 2.0).tan().min(4.0);
    let mut out = Vec::with_capacity(plain + modulated);
    let mut draws = 0;
    while out.len() < plain + modulated {
        draws += 1;
        if draws > 100_000 {
            return Err(Error::EmptyRegion { draws });
        }
        let x1 = rng.gen_range(2.5..4.0);
        let mut x = vec![x1];
        let mut radii = vec![rng.gen_range(0.2..0.6)];
        for _ in 1..n {
            x.push(rng.gen_range(-0.5..0.5) * x1 * half_tan);
            radii.push(rng.gen_range(0.2..0.6));
        }
        let t = rng.gen_range(0.3..0.7);
        radii.push(rng.gen_range(0.1..0.25));
        let modulation = (out.len() >= plain).then(|| Modulation {
            amplitude: rng.gen_range(0.3..0.8),
            wave: (0..n).map(|_| rng.gen_range(-6.0..6.0)).collect(),
            omega: rng.gen_range(-10.0..10.0),
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
        });
        let kind = if out.len() % 2 == 0 {
            BumpKind::Product
        } else {
            BumpKind::Radial
        };
        let spec = BumpSpec {
            kind,
            center: SpaceTimePoint::new(x, t),
            radii,
            modulation,
            scale: 1.0,
        };
        match make_bump(spec, &domain) {
            Ok(u) => out.push(u),
            Err(Error::SupportLeak) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
