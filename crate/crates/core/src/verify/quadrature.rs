//! Tensor-product Gauss–Legendre quadrature: uniform dyadic refinement and an
//! adaptive, vector-valued variant that bisects one axis at a time.

use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_ORDER: usize = 8;

/// Nodes and weights of the `order`-point rule on `[−1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if order == 0 { 1.0 } else { p1 };
            dp = nf * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evals: usize,
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    /// Applies the tensor rule on one cell, accumulating into `sum` (signed)
    /// and `abs_sum` (absolute values).
    fn apply<F>(
        &self,
        f: &mut F,
        lo: &[f64],
        hi: &[f64],
        buf: &mut [f64],
        sum: &mut [f64],
        abs_sum: &mut [f64],
    ) -> Result<usize>
    where
        F: FnMut(&[f64], &mut [f64]) -> Result<()>,
    {
        let d = lo.len();
        let q = self.nodes.len();
        let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
        let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let jac: f64 = half.iter().product();
        sum.iter_mut().for_each(|s| *s = 0.0);
        abs_sum.iter_mut().for_each(|s| *s = 0.0);
        let mut idx = vec![0usize; d];
        let mut p = vec![0.0; d];
        let total = q.pow(d as u32);
        for _ in 0..total {
            let mut w = jac;
            for k in 0..d {
                p[k] = mid[k] + half[k] * self.nodes[idx[k]];
                w *= self.weights[idx[k]];
            }
            f(&p, buf)?;
            for (c, v) in buf.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite("quadrature integrand"));
                }
                sum[c] += w * v;
                abs_sum[c] += w * v.abs();
            }
            for k in 0..d {
                idx[k] += 1;
                if idx[k] < q {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(total)
    }
}

fn check_box(lo: &[f64], hi: &[f64]) -> Result<()> {
    if lo.len() != hi.len() {
        return Err(Error::DimensionMismatch {
            expected: lo.len(),
            got: hi.len(),
        });
    }
    if lo.is_empty() {
        return Err(invalid("dimension", 0.0, "box must have at least one axis"));
    }
    for (a, b) in lo.iter().zip(hi) {
        if !(b > a) {
            return Err(invalid("box", b - a, "each axis needs hi > lo"));
        }
    }
    Ok(())
}

/// Uniform refinement: level `ℓ` splits every axis into `2^{ℓ−1}` cells. The
/// value comes from level `levels`, the error estimate is its difference from
/// level `levels − 1`.
pub fn integrate<F: FnMut(&[f64]) -> f64>(f: F, lo: &[f64], hi: &[f64], levels: usize) -> Result<QuadratureResult> {
    integrate_with_order(f, lo, hi, levels, DEFAULT_ORDER)
}

pub fn integrate_with_order<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    lo: &[f64],
    hi: &[f64],
    levels: usize,
    order: usize,
) -> Result<QuadratureResult> {
    check_box(lo, hi)?;
    if levels < 2 {
        return Err(invalid("levels", levels as f64, "need at least two levels"));
    }
    let rule = Rule::new(order);
    let d = lo.len();
    let mut g = |p: &[f64], out: &mut [f64]| -> Result<()> {
        out[0] = f(p);
        Ok(())
    };
    let (mut buf, mut s, mut a) = ([0.0], [0.0], [0.0]);
    let mut evals = 0;
    let mut previous = 0.0;
    let mut current = 0.0;
    for level in 1..=levels {
        let per_axis = 1usize << (level - 1);
        let cells = per_axis.pow(d as u32);
        let mut total = 0.0;
        let mut idx = vec![0usize; d];
        let mut clo = vec![0.0; d];
        let mut chi = vec![0.0; d];
        for _ in 0..cells {
            for k in 0..d {
                let h = (hi[k] - lo[k]) / per_axis as f64;
                clo[k] = lo[k] + h * idx[k] as f64;
                chi[k] = clo[k] + h;
            }
            evals += rule.apply(&mut g, &clo, &chi, &mut buf, &mut s, &mut a)?;
            total += s[0];
            for k in 0..d {
                idx[k] += 1;
                if idx[k] < per_axis {
                    break;
                }
                idx[k] = 0;
            }
        }
        previous = current;
        current = total;
    }
    Ok(QuadratureResult {
        value: current,
        error_estimate: (current - previous).abs(),
        evals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveSettings {
    pub order: usize,
    /// Target for each component: error ≤ `rel_tol·∫|f_c|`.
    pub rel_tol: f64,
    pub max_evals: usize,
    /// Uniform splits per axis before adaptation starts.
    pub initial_splits: usize,
}

impl Default for AdaptiveSettings {
    fn default() -> Self {
        Self {
            order: 6,
            rel_tol: 1e-6,
            max_evals: 40_000_000,
            initial_splits: 2,
        }
    }
}

impl AdaptiveSettings {
    /// Same settings with a tolerance ten times tighter.
    pub fn refined(self) -> Self {
        Self {
            rel_tol: self.rel_tol / 10.0,
            max_evals: self.max_evals.saturating_mul(4),
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorQuadrature {
    pub values: Vec<f64>,
    pub error_estimates: Vec<f64>,
    /// `∫|f_c|` over the box, at the same resolution as `values`.
    pub abs_values: Vec<f64>,
    pub evals: usize,
    pub cells: usize,
    pub converged: bool,
}

struct Cell {
    lo: Vec<f64>,
    hi: Vec<f64>,
    // children along the chosen axis: (lo, hi, value, abs_value)
    children: [(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>); 2],
    err: Vec<f64>,
    priority: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.priority.total_cmp(&other.priority).is_eq()
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.priority.total_cmp(&other.priority)
    }
}

struct Adaptive<'a, F> {
    f: F,
    rule: Rule,
    m: usize,
    buf: Vec<f64>,
    evals: usize,
    scale: &'a [f64],
}

impl<F: FnMut(&[f64], &mut [f64]) -> Result<()>> Adaptive<'_, F> {
    fn rule_on(&mut self, lo: &[f64], hi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut s = vec![0.0; self.m];
        let mut a = vec![0.0; self.m];
        self.evals += self.rule.apply(&mut self.f, lo, hi, &mut self.buf, &mut s, &mut a)?;
        Ok((s, a))
    }

    /// Tries a bisection along every axis and keeps the one whose children
    /// disagree most with the parent value.
    fn examine(&mut self, lo: Vec<f64>, hi: Vec<f64>, value: &[f64]) -> Result<Cell> {
        let d = lo.len();
        let mut best: Option<Cell> = None;
        for axis in 0..d {
            let mid = 0.5 * (lo[axis] + hi[axis]);
            let (mut lhi, mut rlo) = (hi.clone(), lo.clone());
            lhi[axis] = mid;
            rlo[axis] = mid;
            let (lv, la) = self.rule_on(&lo, &lhi)?;
            let (rv, ra) = self.rule_on(&rlo, &hi)?;
            let err: Vec<f64> = (0..self.m).map(|c| (lv[c] + rv[c] - value[c]).abs()).collect();
            let priority = (0..self.m).map(|c| err[c] / self.scale[c]).sum::<f64>();
            if best.as_ref().is_none_or(|b| priority > b.priority) {
                best = Some(Cell {
                    lo: lo.clone(),
                    hi: hi.clone(),
                    children: [(lo.clone(), lhi, lv, la), (rlo, hi.clone(), rv, ra)],
                    err,
                    priority,
                });
            }
        }
        Ok(best.expect("box has at least one axis"))
    }
}

/// Integrates an `m`-component integrand over a box. Each cell's estimate is
/// the sum over its two children along the most active axis; its error is
/// the difference between that sum and the parent rule.
pub fn integrate_adaptive<F>(
    f: F,
    lo: &[f64],
    hi: &[f64],
    m: usize,
    settings: &AdaptiveSettings,
) -> Result<VectorQuadrature>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    check_box(lo, hi)?;
    if settings.order == 0 || settings.initial_splits == 0 {
        return Err(invalid(
            "order",
            settings.order as f64,
            "order and initial splits must be positive",
        ));
    }
    let d = lo.len();
    let k = settings.initial_splits;
    let mut initial = Vec::new();
    let mut idx = vec![0usize; d];
    for _ in 0..k.pow(d as u32) {
        let clo: Vec<f64> = (0..d)
            .map(|a| lo[a] + (hi[a] - lo[a]) * idx[a] as f64 / k as f64)
            .collect();
        let chi: Vec<f64> = (0..d)
            .map(|a| lo[a] + (hi[a] - lo[a]) * (idx[a] + 1) as f64 / k as f64)
            .collect();
        initial.push((clo, chi));
        for a in 0..d {
            idx[a] += 1;
            if idx[a] < k {
                break;
            }
            idx[a] = 0;
        }
    }

    // First pass only fixes the priority scale: ∫|f_c| on the initial grid.
    let ones = vec![1.0; m];
    let mut ad = Adaptive {
        f,
        rule: Rule::new(settings.order),
        m,
        buf: vec![0.0; m],
        evals: 0,
        scale: &ones,
    };
    let mut first = Vec::with_capacity(initial.len());
    let mut scale = vec![0.0; m];
    for (clo, chi) in initial {
        let (v, a) = ad.rule_on(&clo, &chi)?;
        for c in 0..m {
            scale[c] += a[c];
        }
        first.push((clo, chi, v));
    }
    let scale: Vec<f64> = scale.iter().map(|s| s.max(f64::MIN_POSITIVE)).collect();
    let mut ad = Adaptive {
        f: ad.f,
        rule: ad.rule,
        m,
        buf: ad.buf,
        evals: ad.evals,
        scale: &scale,
    };

    let mut heap = BinaryHeap::new();
    for (clo, chi, v) in first {
        heap.push(ad.examine(clo, chi, &v)?);
    }

    let totals = |heap: &BinaryHeap<Cell>| {
        let mut val = vec![0.0; m];
        let mut abs = vec![0.0; m];
        let mut err = vec![0.0; m];
        for cell in heap.iter() {
            for c in 0..m {
                val[c] += cell.children[0].2[c] + cell.children[1].2[c];
                abs[c] += cell.children[0].3[c] + cell.children[1].3[c];
                err[c] += cell.err[c];
            }
        }
        (val, abs, err)
    };

    let mut converged = false;
    let mut check_every = 1usize;
    let mut since_check = 0usize;
    loop {
        since_check += 1;
        if since_check >= check_every {
            since_check = 0;
            // recomputing sums from scratch keeps them free of drift
            let (_, abs, err) = totals(&heap);
            if (0..m).all(|c| err[c] <= settings.rel_tol * abs[c]) {
                converged = true;
                break;
            }
            check_every = (heap.len() / 16).max(1);
        }
        if ad.evals >= settings.max_evals {
            break;
        }
        let cell = heap.pop().expect("heap is never empty");
        let width_ok = (0..d).all(|a| cell.hi[a] - cell.lo[a] > 1e-12 * (hi[a] - lo[a]));
        if !width_ok || cell.priority == 0.0 {
            // nothing left to gain here; put it back and stop if everything is like it
            let stuck = cell.priority == 0.0 || heap.peek().map_or(true, |c| c.priority == 0.0);
            heap.push(Cell { priority: 0.0, ..cell });
            if stuck {
                let (_, abs, err) = totals(&heap);
                converged = (0..m).all(|c| err[c] <= settings.rel_tol * abs[c]);
                break;
            }
            continue;
        }
        for (clo, chi, v, _) in cell.children {
            heap.push(ad.examine(clo, chi, &v)?);
        }
    }

    let (values, abs_values, error_estimates) = totals(&heap);
    Ok(VectorQuadrature {
        values,
        error_estimates,
        abs_values,
        evals: ad.evals,
        cells: heap.len(),
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_weights_and_exactness() {
        for order in 1..=12 {
            let (x, w) = gauss_legendre(order);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            // exact for degree 2·order − 1
            let deg = 2 * order - 1;
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((approx - exact).abs() < 1e-13, "order {order}");
        }
    }

    #[test]
    fn uniform_volume() {
        let r = integrate(|_| 1.0, &[0.0, 1.0, -1.0], &[1.0, 3.0, 0.5], 2).unwrap();
        assert!((r.value - 3.0).abs() < 1e-13);
        assert!(r.error_estimate < 1e-13);
    }

    #[test]
    fn uniform_polynomial_exact() {
        // degree 15 in each variable is within an 8-point rule
        let r = integrate(|p| p[0].powi(15) * p[1].powi(14), &[0.0, 0.0], &[1.0, 1.0], 2).unwrap();
        assert!((r.value - 1.0 / (16.0 * 15.0)).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_a_sharp_peak() {
        // ∫₀¹∫₀¹ 1000 e^{−1000 x}·cos y ≈ (1 − e^{−1000})·sin 1
        let settings = AdaptiveSettings {
            rel_tol: 1e-9,
            ..Default::default()
        };
        let r = integrate_adaptive(
            |p, out| {
                out[0] = 1000.0 * (-1000.0 * p[0]).exp() * p[1].cos();
                out[1] = 1.0;
                Ok(())
            },
            &[0.0, 0.0],
            &[1.0, 1.0],
            2,
            &settings,
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.values[0] - 1f64.sin()).abs() < 1e-8);
        assert!((r.values[1] - 1.0).abs() < 1e-13);
        assert!(r.error_estimates[0] <= 1e-9 * r.abs_values[0]);
    }

    #[test]
    fn adaptive_zero_integrand() {
        let r = integrate_adaptive(
            |_, out| {
                out[0] = 0.0;
                Ok(())
            },
            &[0.0],
            &[1.0],
            1,
            &AdaptiveSettings::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert_eq!(r.values[0], 0.0);
    }

    #[test]
    fn non_finite_is_an_error() {
        let r = integrate(|_| f64::NAN, &[0.0], &[1.0], 2);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }
}
