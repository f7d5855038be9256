//! Carleman weights and the conjugated heat operator.
//!
//! The space-time weight is `Φ(x, t) = a·Λ(t)·φ(x) + t²` with
//! `Λ(t) = (1 − t)·t^{−α/2}` and `φ(x) = x₁^α − ε^α·|x|^α`. Every derivative
//! below is closed-form; the finite-difference cross-checks live in the tests.
//!
//! Powers of `t`, `x₁` and `r` are taken through `exp(p·ln v)` so that the
//! `t → 0⁺` singular factors never overflow in intermediate products.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{stable_norm, SpaceTimePoint, MAX_DIM};

pub type Vector = [f64; MAX_DIM];
pub type Matrix = [[f64; MAX_DIM]; MAX_DIM];

#[inline]
pub(crate) fn powf(base: f64, exponent: f64) -> f64 {
    if base == 0.0 {
        if exponent == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (exponent * base.ln()).exp()
    }
}

/// `h(t) = t·e^{(1−t)/3}`.
pub fn h(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid("t", t, "h requires t > 0"));
    }
    Ok(t * ((1.0 - t) / 3.0).exp())
}

/// `h′(t) = e^{(1−t)/3}·(1 − t/3)`.
pub fn h_prime(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid("t", t, "h requires t > 0"));
    }
    Ok(((1.0 - t) / 3.0).exp() * (1.0 - t / 3.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub a: f64,
    pub alpha: f64,
    pub eps: f64,
    pub n: usize,
}

impl WeightParams {
    /// `a = 0` is accepted and reduces the weight to `t²`. The exponent range
    /// is closed at 2 so that the borderline certificate can be evaluated.
    pub fn new(a: f64, alpha: f64, eps: f64, n: usize) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(invalid("a", a, "Carleman parameter must be nonnegative"));
        }
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(invalid("alpha", alpha, "exponent must lie in (1, 2]"));
        }
        if !(0.0..1.0).contains(&eps) {
            return Err(invalid("eps", eps, "must lie in [0, 1)"));
        }
        if !(2..=MAX_DIM).contains(&n) {
            return Err(invalid("n", n as f64, "dimension must be in 2..=4"));
        }
        Ok(Self { a, alpha, eps, n })
    }

    /// `ε < 1/√3` and a nonnegative convexity certificate.
    pub fn is_admissible(&self) -> bool {
        self.eps > 0.0 && self.eps < 1.0 / 3f64.sqrt() && crate::positivity::m(self.alpha, self.eps) >= 0.0
    }

    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }
}

/// `Λ` and its first two derivatives at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEval {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

pub fn lam(t: f64, alpha: f64) -> Result<LambdaEval> {
    if !(t > 0.0) {
        return Err(invalid("t", t, "Λ requires t > 0"));
    }
    let half = alpha / 2.0;
    let p = powf(t, -half);
    Ok(LambdaEval {
        value: (1.0 - t) * p,
        d1: -(half + (1.0 - half) * t) * p / t,
        d2: (half * (half + 1.0) / (t * t) + (1.0 - half) * half / t) * p,
    })
}

/// Value and spatial/temporal derivatives of a weight at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightEval {
    pub n: usize,
    pub value: f64,
    pub grad: Vector,
    pub hess: Matrix,
    pub laplacian: f64,
    pub bilaplacian: f64,
    pub dt: f64,
    pub dtt: f64,
    /// `∂ₜ|∇Φ|²`.
    pub dt_grad_sq: f64,
}

impl WeightEval {
    pub fn grad_sq(&self) -> f64 {
        self.grad[..self.n].iter().map(|g| g * g).sum()
    }

    /// `Σ_{kl} H_kl g_k g_l`.
    pub fn hess_quadratic(&self, v: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for k in 0..n {
            for l in 0..n {
                s += self.hess[k][l] * v[k] * v[l];
            }
        }
        s
    }

    pub fn hess_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|k| self.hess[k][..self.n].to_vec()).collect()
    }
}

fn check_x(x: &[f64]) -> Result<()> {
    if !(2..=MAX_DIM).contains(&x.len()) {
        return Err(Error::DimensionMismatch {
            expected: MAX_DIM,
            got: x.len(),
        });
    }
    Ok(())
}

/// `φ(x) = x₁^α − ε^α r^α` with gradient, Hessian, `Δφ` and `Δ²φ`.
///
/// `Δ²φ` uses `Δ r^β = β(β+n−2) r^{β−2}` twice:
/// `α(α−1)(α−2)(α−3) x₁^{α−4} − ε^α α(α+n−2)(α−2)(α+n−4) r^{α−4}`.
pub fn varphi_eval(x: &[f64], alpha: f64, eps: f64) -> Result<WeightEval> {
    check_x(x)?;
    let n = x.len();
    let x1 = x[0];
    if !(x1 > 0.0) {
        return Err(invalid("x1", x1, "φ is evaluated only for x₁ > 0"));
    }
    let nf = n as f64;
    let r = stable_norm(x);
    let ea = powf(eps, alpha);
    let lx1 = x1.ln();
    let lr = r.ln();
    let x1_a = (alpha * lx1).exp();
    let x1_am1 = ((alpha - 1.0) * lx1).exp();
    let x1_am2 = ((alpha - 2.0) * lx1).exp();
    let x1_am4 = ((alpha - 4.0) * lx1).exp();
    let r_a = (alpha * lr).exp();
    let r_am2 = ((alpha - 2.0) * lr).exp();
    let r_am4 = ((alpha - 4.0) * lr).exp();

    let f = alpha * ea * r_am2;
    let mut grad = [0.0; MAX_DIM];
    let mut hess = [[0.0; MAX_DIM]; MAX_DIM];
    for k in 0..n {
        grad[k] = -f * x[k];
    }
    grad[0] += alpha * x1_am1;
    let c = alpha * (2.0 - alpha) * ea * r_am4;
    for k in 0..n {
        for l in k..n {
            hess[k][l] = c * x[k] * x[l];
            hess[l][k] = hess[k][l];
        }
        hess[k][k] -= f;
    }
    hess[0][0] += alpha * (alpha - 1.0) * x1_am2;

    let laplacian = alpha * (alpha - 1.0) * x1_am2 - ea * alpha * (alpha + nf - 2.0) * r_am2;
    let bilaplacian = alpha * (alpha - 1.0) * (alpha - 2.0) * (alpha - 3.0) * x1_am4
        - ea * alpha * (alpha + nf - 2.0) * (alpha - 2.0) * (alpha + nf - 4.0) * r_am4;

    Ok(WeightEval {
        n,
        value: x1_a - ea * r_a,
        grad,
        hess,
        laplacian,
        bilaplacian,
        dt: 0.0,
        dtt: 0.0,
        dt_grad_sq: 0.0,
    })
}

/// `f(x) = α ε^α r^{α−2}`, the shift that makes `D²φ + f·I` nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FEval {
    pub value: f64,
    pub grad: Vector,
    pub laplacian: f64,
}

pub fn f_eval(x: &[f64], alpha: f64, eps: f64) -> Result<FEval> {
    check_x(x)?;
    let n = x.len();
    let r = stable_norm(x);
    if r == 0.0 {
        return Err(invalid("r", r, "f is singular at the origin"));
    }
    let ea = powf(eps, alpha);
    let lr = r.ln();
    let value = alpha * ea * ((alpha - 2.0) * lr).exp();
    let c = alpha * ea * (alpha - 2.0) * ((alpha - 4.0) * lr).exp();
    let mut grad = [0.0; MAX_DIM];
    for k in 0..n {
        grad[k] = c * x[k];
    }
    Ok(FEval {
        value,
        grad,
        laplacian: c * (alpha + n as f64 - 4.0),
    })
}

fn check_point(p: &SpaceTimePoint, w: &WeightParams) -> Result<()> {
    if p.x.len() != w.n {
        return Err(Error::DimensionMismatch {
            expected: w.n,
            got: p.x.len(),
        });
    }
    Ok(())
}

/// `F(x, t) = 4aΛ(t)f(x) + 1`.
pub fn big_f(p: &SpaceTimePoint, w: &WeightParams) -> Result<f64> {
    check_point(p, w)?;
    let l = lam(p.t, w.alpha)?;
    let f = f_eval(&p.x, w.alpha, w.eps)?;
    Ok(4.0 * w.a * l.value * f.value + 1.0)
}

/// Full space-time weight `Φ = aΛφ + t²`.
pub fn phi_total(p: &SpaceTimePoint, w: &WeightParams) -> Result<WeightEval> {
    check_point(p, w)?;
    let l = lam(p.t, w.alpha)?;
    let v = varphi_eval(&p.x, w.alpha, w.eps)?;
    Ok(assemble_phi(&v, &l, p.t, w.a))
}

pub(crate) fn assemble_phi(v: &WeightEval, l: &LambdaEval, t: f64, a: f64) -> WeightEval {
    let s = a * l.value;
    let mut grad = v.grad;
    let mut hess = v.hess;
    for k in 0..v.n {
        grad[k] *= s;
        for l in 0..v.n {
            hess[k][l] *= s;
        }
    }
    WeightEval {
        n: v.n,
        value: s * v.value + t * t,
        grad,
        hess,
        laplacian: s * v.laplacian,
        bilaplacian: s * v.bilaplacian,
        dt: a * l.d1 * v.value + 2.0 * t,
        dtt: a * l.d2 * v.value + 2.0,
        dt_grad_sq: 2.0 * a * l.d1 * s * v.grad_sq(),
    }
}

/// Value, time derivative, gradient and Laplacian of a scalar function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub n: usize,
    pub value: f64,
    pub dt: f64,
    pub grad: Vector,
    pub laplacian: f64,
}

impl Jet {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            value: 0.0,
            dt: 0.0,
            grad: [0.0; MAX_DIM],
            laplacian: 0.0,
        }
    }

    pub fn grad_sq(&self) -> f64 {
        self.grad[..self.n].iter().map(|g| g * g).sum()
    }

    /// Backward heat operator `∂ₜv + Δv`.
    pub fn backward_heat(&self) -> f64 {
        self.dt + self.laplacian
    }
}

/// Anything that can report its exact [`Jet`] at a space-time point.
pub trait SpaceTimeFunction {
    fn dim(&self) -> usize;
    fn jet(&self, x: &[f64], t: f64) -> Jet;
}

/// Symmetric part `Sv = Δv + |∇Φ|²v − ∂ₜΦ·v`.
pub fn s_part(v: &Jet, phi: &WeightEval) -> f64 {
    v.laplacian + phi.grad_sq() * v.value - phi.dt * v.value
}

/// Skew part `Av = ∂ₜv − 2∇Φ·∇v − ΔΦ·v`.
pub fn a_part(v: &Jet, phi: &WeightEval) -> f64 {
    let dot: f64 = (0..v.n).map(|k| phi.grad[k] * v.grad[k]).sum();
    v.dt - 2.0 * dot - phi.laplacian * v.value
}

/// Pointwise density of the commutator form `([S, A]v, v)`:
/// `4Φ_kl v_k v_l + (2∇Φ·∇|∇Φ|² − Δ²Φ + ∂ₜ²Φ − 2∂ₜ|∇Φ|²)v²`.
pub fn commutator_density(v: &Jet, phi: &WeightEval) -> f64 {
    let n = v.n;
    // ∇|∇Φ|² = 2·D²Φ·∇Φ, so 2∇Φ·∇|∇Φ|² = 4·∇Φᵀ D²Φ ∇Φ
    let grad_term = 4.0 * phi.hess_quadratic(&phi.grad[..n]);
    let potential = grad_term - phi.bilaplacian + phi.dtt - 2.0 * phi.dt_grad_sq;
    4.0 * phi.hess_quadratic(&v.grad[..n]) + potential * v.value * v.value
}

fn jet_at<V: SpaceTimeFunction + ?Sized>(v: &V, p: &SpaceTimePoint) -> Result<Jet> {
    if v.dim() != p.x.len() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: p.x.len(),
        });
    }
    Ok(v.jet(&p.x, p.t))
}

pub fn op_s<V: SpaceTimeFunction + ?Sized>(v: &V, p: &SpaceTimePoint, w: &WeightParams) -> Result<f64> {
    Ok(s_part(&jet_at(v, p)?, &phi_total(p, w)?))
}

pub fn op_a<V: SpaceTimeFunction + ?Sized>(v: &V, p: &SpaceTimePoint, w: &WeightParams) -> Result<f64> {
    Ok(a_part(&jet_at(v, p)?, &phi_total(p, w)?))
}

pub fn op_l<V: SpaceTimeFunction + ?Sized>(v: &V, p: &SpaceTimePoint, w: &WeightParams) -> Result<f64> {
    let jet = jet_at(v, p)?;
    let phi = phi_total(p, w)?;
    Ok(s_part(&jet, &phi) + a_part(&jet, &phi))
}

pub fn commutator_integrand<V: SpaceTimeFunction + ?Sized>(v: &V, p: &SpaceTimePoint, w: &WeightParams) -> Result<f64> {
    Ok(commutator_density(&jet_at(v, p)?, &phi_total(p, w)?))
}

/// Coefficients of `v²` grouped by powers of `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ATerms {
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

pub fn a_terms(p: &SpaceTimePoint, w: &WeightParams) -> Result<ATerms> {
    check_point(p, w)?;
    let t = p.t;
    let a = w.a;
    let l = lam(t, w.alpha)?;
    let v = varphi_eval(&p.x, w.alpha, w.eps)?;
    let f = f_eval(&p.x, w.alpha, w.eps)?;
    let (lv, l1, l2) = (l.value, l.d1, l.d2);
    let g2 = v.grad_sq();
    let fv = f.value;

    let a3 = 4.0 * a.powi(3) * lv.powi(3) * (v.hess_quadratic(&v.grad[..v.n]) - fv * g2);
    let a2 = -4.0 * a * a * lv * l1 * g2 + 4.0 * a * a * lv * l1 * v.value * fv
        - 4.0 * a * a * lv * lv * fv * fv
        - a * a * lv * lv * g2;
    let a1 = -a * lv * v.bilaplacian + a * l2 * v.value - 2.0 * a * lv * f.laplacian + a * l1 * v.value
        - 2.0 * a * lv * fv
        + 8.0 * a * t * lv * fv;
    Ok(ATerms {
        a3,
        a2,
        a1,
        a0: 7.0 / 4.0 + 2.0 * t,
    })
}

/// Slack in `A₂ − |∇Φ|² ≥ −(a²/2)ΛΛ′x₁^{2α−2}`; nonnegative where the bound holds.
pub fn a2_margin(p: &SpaceTimePoint, w: &WeightParams) -> Result<f64> {
    let terms = a_terms(p, w)?;
    let phi = phi_total(p, w)?;
    let l = lam(p.t, w.alpha)?;
    let bound = -(w.a * w.a / 2.0) * l.value * l.d1 * powf(p.x[0], 2.0 * w.alpha - 2.0);
    Ok(terms.a2 - phi.grad_sq() - bound)
}

/// Smallest margin of a pointwise inequality in `t` over an interior grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGridScan {
    pub alpha: f64,
    pub points: usize,
    pub min_margin: f64,
    pub argmin_t: f64,
    pub pass: bool,
}

fn time_grid_scan<F: Fn(&LambdaEval, f64) -> f64>(alpha: f64, grid: usize, margin: F) -> Result<TimeGridScan> {
    if grid == 0 {
        return Err(invalid("grid", 0.0, "need at least one point"));
    }
    let mut scan = TimeGridScan {
        alpha,
        points: grid,
        min_margin: f64::INFINITY,
        argmin_t: 0.0,
        pass: true,
    };
    for i in 1..=grid {
        let t = i as f64 / (grid + 1) as f64;
        let m = margin(&lam(t, alpha)?, t);
        if m < scan.min_margin {
            scan.min_margin = m;
            scan.argmin_t = t;
        }
    }
    scan.pass = scan.min_margin > 0.0;
    Ok(scan)
}

/// Margin of `|Λ/Λ′| < 1/(2α)` on `(0, 1)`.
pub fn lambda_ratio_scan(alpha: f64, grid: usize) -> Result<TimeGridScan> {
    time_grid_scan(alpha, grid, |l, _| 1.0 / (2.0 * alpha) - (l.value / l.d1).abs())
}

/// Margin of `Λ″ + Λ′ > α − 1` on `(0, 1)`.
pub fn lambda_sum_scan(alpha: f64, grid: usize) -> Result<TimeGridScan> {
    time_grid_scan(alpha, grid, |l, _| l.d2 + l.d1 - (alpha - 1.0))
}

/// Outcome of the monotonicity check on `g(s) = h^{−2a}(s)·e^{−ρ²/(32s)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GCheck {
    pub a: f64,
    pub g_at_2: f64,
    pub min_gprime: f64,
    pub argmin_s: f64,
    pub grid_points: usize,
    pub pass: bool,
}

/// Tolerance on `min g′` below which the check fails.
pub const G_CHECK_TOL: f64 = 1e-12;

/// `a = βρ²/(2·log h(3/2))`.
pub fn prescribed_a(beta: f64, rho: f64) -> f64 {
    let lh = h(1.5).expect("h(3/2) is defined").ln();
    beta * rho * rho / (2.0 * lh)
}

/// Scans `g` and `g′` on a uniform grid of `(0, 2]` with `grid` intervals.
///
/// `a` must equal [`prescribed_a`]`(beta, rho)` up to relative rounding.
pub fn lemma22_g_check(a: f64, beta: f64, rho: f64, grid: usize) -> Result<GCheck> {
    if !(rho > 2.0) {
        return Err(invalid("rho", rho, "must exceed 2"));
    }
    if !(beta > 0.0) {
        return Err(invalid("beta", beta, "must be positive"));
    }
    let expected = prescribed_a(beta, rho);
    if (a - expected).abs() > 1e-12 * expected.abs() {
        return Err(invalid("a", a, "must equal βρ²/(2·log h(3/2))"));
    }
    let log_g = |s: f64| -2.0 * a * h(s).unwrap().ln() - rho * rho / (32.0 * s);
    let g_prime = |s: f64| log_g(s).exp() * (-2.0 * a * (1.0 / s - 1.0 / 3.0) + rho * rho / (32.0 * s * s));
    let mut min_gprime = f64::INFINITY;
    let mut argmin_s = 0.0;
    for i in 1..=grid {
        let s = 2.0 * i as f64 / grid as f64;
        let gp = g_prime(s);
        if gp < min_gprime {
            min_gprime = gp;
            argmin_s = s;
        }
    }
    let g_at_2 = log_g(2.0).exp();
    Ok(GCheck {
        a,
        g_at_2,
        min_gprime,
        argmin_s,
        grid_points: grid,
        pass: g_at_2 < 1.0 && min_gprime >= -G_CHECK_TOL,
    })
}
