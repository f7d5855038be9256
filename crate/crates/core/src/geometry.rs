//! Cone domains `x₁ > |x|·cos(θ/2)`, the signed distance to their boundary,
//! the truncated space-time set `Q_θ = (cone ∩ {x₁ > 1}) × (0, 1)`, and seeded
//! point sampling inside these sets.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Largest spatial dimension supported by the weight evaluators.
pub const MAX_DIM: usize = 4;

/// Total rejection-sampling draws allowed per request.
pub const SAMPLE_DRAW_CAP: usize = 1_000_000;

/// `2·arccos(1/√3)`, the opening angle at which the convexity certificate
/// degenerates.
pub fn critical_angle() -> f64 {
    2.0 * (1.0 / 3f64.sqrt()).acos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    n: usize,
    theta: f64,
    eps: f64,
}

impl ConeSpec {
    pub fn new(n: usize, theta: f64) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(invalid("n", n as f64, "dimension must be in 2..=4"));
        }
        if !(theta > 0.0 && theta <= PI) {
            return Err(invalid("theta", theta, "opening angle must lie in (0, π]"));
        }
        // cos(π/2) is 6e-17 in floating point; the half-space gets an exact zero.
        let eps = if theta == PI { 0.0 } else { (theta / 2.0).cos() };
        Ok(Self { n, theta, eps })
    }

    /// Cone whose opening satisfies `cos(θ/2) = eps`.
    pub fn from_eps(n: usize, eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) {
            return Err(invalid("eps", eps, "must lie in [0, 1)"));
        }
        let mut cone = Self::new(n, 2.0 * eps.acos())?;
        cone.eps = eps;
        Ok(cone)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x)?;
        Ok(x[0] > stable_norm(x) * self.eps)
    }

    /// Signed distance `x₁·sin(θ/2) − |x′|·cos(θ/2)`; negative outside the cone.
    pub fn distance_to_boundary(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let sin_half = if self.theta == PI {
            1.0
        } else {
            (self.theta / 2.0).sin()
        };
        Ok(x[0] * sin_half - stable_norm(&x[1..]) * self.eps)
    }

    /// Membership in the offset cone `{d_θ(x) > c}`.
    pub fn offset_contains(&self, c: f64, x: &[f64]) -> Result<bool> {
        if c < 0.0 {
            return Err(invalid("c", c, "offset must be nonnegative"));
        }
        Ok(self.distance_to_boundary(x)? > c)
    }

    pub fn q_theta_contains(&self, p: &SpaceTimePoint) -> Result<bool> {
        Ok(self.contains(&p.x)? && p.x[0] > 1.0 && p.t > 0.0 && p.t < 1.0)
    }
}

/// Euclidean norm scaled by the largest component.
pub fn stable_norm(v: &[f64]) -> f64 {
    let m = v.iter().fold(0.0_f64, |acc, c| acc.max(c.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * v.iter().map(|c| (c / m) * (c / m)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: Vec<f64>,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        Self { x, t }
    }
}

/// Midpoint between `theta` and the critical angle.
pub fn median_angle(theta: f64) -> Result<f64> {
    let crit = critical_angle();
    if !(theta > crit && theta < PI) {
        return Err(invalid("theta", theta, "must lie in (2·arccos(1/√3), π)"));
    }
    Ok((theta + crit) / 2.0)
}

/// Decay rate `β·sin²((θ−δ)/2)` inherited by the narrower cone of opening δ.
pub fn beta_prime(beta: f64, theta: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < theta) {
        return Err(invalid("delta", delta, "must lie in (0, theta)"));
    }
    let s = ((theta - delta) / 2.0).sin();
    Ok(beta * s * s)
}

/// Box in `(x₁, t)` together with a minimum boundary distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRegion {
    pub x1: (f64, f64),
    pub t: (f64, f64),
    pub d_min: f64,
    /// Half-width of the box for each transverse coordinate. Defaults to the
    /// cone's lateral extent at `x1.1`, capped at `4·x1.1`.
    pub lateral: Option<f64>,
}

impl SampleRegion {
    pub fn new(x1: (f64, f64), t: (f64, f64)) -> Self {
        Self {
            x1,
            t,
            d_min: 0.0,
            lateral: None,
        }
    }

    fn lateral_for(&self, cone: &ConeSpec) -> f64 {
        self.lateral.unwrap_or_else(|| {
            let tan_half = if cone.eps == 0.0 {
                f64::INFINITY
            } else {
                (1.0 - cone.eps * cone.eps).sqrt() / cone.eps
            };
            self.x1.1 * tan_half.min(4.0)
        })
    }
}

/// Seeded rejection sampling of points in `Q_θ` with `d_θ ≥ d_min`.
///
/// Fails once [`SAMPLE_DRAW_CAP`] draws have been spent without filling the
/// request.
pub fn sample_points(cone: &ConeSpec, region: &SampleRegion, count: usize, seed: u64) -> Result<Vec<SpaceTimePoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lat = region.lateral_for(cone);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        if draws >= SAMPLE_DRAW_CAP {
            return Err(Error::EmptyRegion { draws });
        }
        draws += 1;
        let mut x = vec![0.0; cone.n];
        x[0] = uniform(&mut rng, region.x1);
        for xk in x.iter_mut().skip(1) {
            *xk = uniform(&mut rng, (-lat, lat));
        }
        let p = SpaceTimePoint::new(x, uniform(&mut rng, region.t));
        if cone.q_theta_contains(&p)? && cone.distance_to_boundary(&p.x)? >= region.d_min {
            out.push(p);
        }
    }
    Ok(out)
}

/// Seeded points of `Q_θ` whose direction satisfies `eps < x₁/|x| < eps + band`,
/// i.e. a thin angular layer along the boundary of the cone.
pub fn sample_near_boundary(
    cone: &ConeSpec,
    x1: (f64, f64),
    t: (f64, f64),
    band: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<SpaceTimePoint>> {
    if !(band > 0.0) {
        return Err(invalid("band", band, "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi = (cone.eps + band).min(1.0);
    let mut out = Vec::with_capacity(count);
    let mut draws = 0;
    while out.len() < count {
        if draws >= SAMPLE_DRAW_CAP {
            return Err(Error::EmptyRegion { draws });
        }
        draws += 1;
        let cos_psi = uniform(&mut rng, (cone.eps, hi));
        let x1v = uniform(&mut rng, x1);
        let r = x1v / cos_psi;
        let lateral = r * (1.0 - cos_psi * cos_psi).max(0.0).sqrt();
        let dir = unit_direction(&mut rng, cone.n - 1);
        let mut x = Vec::with_capacity(cone.n);
        x.push(x1v);
        x.extend(dir.iter().map(|d| d * lateral));
        let p = SpaceTimePoint::new(x, uniform(&mut rng, t));
        if cone.q_theta_contains(&p)? {
            out.push(p);
        }
    }
    Ok(out)
}

pub(crate) fn uniform<R: Rng>(rng: &mut R, range: (f64, f64)) -> f64 {
    range.0 + (range.1 - range.0) * rng.gen::<f64>()
}

/// Uniform direction on the unit sphere of dimension `m - 1`.
pub(crate) fn unit_direction<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![if rng.gen::<bool>() { 1.0 } else { -1.0 }];
    }
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = stable_norm(&v);
        if norm > 1e-3 && norm <= 1.0 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}
