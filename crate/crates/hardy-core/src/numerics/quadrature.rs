use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::{Error, Result};

/// Axis-aligned box, the integration region for compactly supported
/// integrands.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<BoxRegion> {
        if lower.len() != upper.len() {
            return Err(Error::ArityMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidParameter(
                "box lower bounds must be strictly below upper bounds".into(),
            ));
        }
        Ok(BoxRegion { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .product()
    }
}

/// Tensor-product Gauss–Legendre rule: `order` points per axis on each of
/// `subdivisions`^dim congruent cells. The error estimate reported by
/// [`integrate`] is the difference against the same rule at half the order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureRule {
    pub order: usize,
    pub subdivisions: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            order: 24,
            subdivisions: 4,
        }
    }
}

impl QuadratureRule {
    pub fn new(order: usize, subdivisions: usize) -> Result<QuadratureRule> {
        if order < 4 || order % 2 != 0 {
            return Err(Error::InvalidParameter(
                "quadrature order must be even and at least 4".into(),
            ));
        }
        if subdivisions < 1 {
            return Err(Error::InvalidParameter(
                "subdivisions must be at least 1".into(),
            ));
        }
        Ok(QuadratureRule {
            order,
            subdivisions,
        })
    }

    pub fn doubled_order(&self) -> QuadratureRule {
        QuadratureRule {
            order: self.order * 2,
            subdivisions: self.subdivisions,
        }
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1], cached per order.
pub fn gauss_legendre(order: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(hit) = guard.get(&order) {
        return Arc::clone(hit);
    }
    let computed = Arc::new(compute_gauss_legendre(order));
    guard.insert(order, Arc::clone(&computed));
    computed
}

/// Newton iteration on P_n with the three-term recurrence; standard initial
/// guesses x ≈ cos(π(k+3/4)/(n+1/2)).
fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P'_n(x)
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            dp = n as f64 * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Integrate `f` over the region with the given rule. Returns the value and
/// an error estimate |I(order) − I(order/2)|. Cells evaluate in parallel and
/// reduce in fixed cell order, so the result is independent of the thread
/// count. A non-finite sample aborts with the offending point.
pub fn integrate<F>(f: F, region: &BoxRegion, rule: &QuadratureRule) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let full = integrate_fixed_order(&f, region, rule.order, rule.subdivisions)?;
    let half = integrate_fixed_order(&f, region, (rule.order / 2).max(1), rule.subdivisions)?;
    Ok((full, (full - half).abs()))
}

/// Integrate K integrands sharing one evaluation pass (the closure fills a
/// K-slot output per point). Returns per-component values and order-halving
/// error estimates.
pub fn integrate_components<const K: usize, F>(
    f: F,
    region: &BoxRegion,
    rule: &QuadratureRule,
) -> Result<([f64; K], [f64; K])>
where
    F: Fn(&[f64], &mut [f64; K]) + Sync,
{
    let full = integrate_components_fixed_order(&f, region, rule.order, rule.subdivisions)?;
    let half =
        integrate_components_fixed_order(&f, region, (rule.order / 2).max(1), rule.subdivisions)?;
    let mut err = [0.0; K];
    for i in 0..K {
        err[i] = (full[i] - half[i]).abs();
    }
    Ok((full, err))
}

/// Single multi-component pass at a fixed order.
pub fn integrate_components_fixed_order<const K: usize, F>(
    f: &F,
    region: &BoxRegion,
    order: usize,
    subdivisions: usize,
) -> Result<[f64; K]>
where
    F: Fn(&[f64], &mut [f64; K]) + Sync,
{
    let dim = region.dim();
    let gl = gauss_legendre(order);
    let (nodes, weights) = gl.as_ref();
    let cell_width: Vec<f64> = region
        .lower
        .iter()
        .zip(&region.upper)
        .map(|(l, u)| (u - l) / subdivisions as f64)
        .collect();
    let n_cells = subdivisions.pow(dim as u32);

    let cell_sums: Vec<Result<[f64; K]>> = (0..n_cells)
        .into_par_iter()
        .map(|cell| {
            let mut idx = cell;
            let mut lo = vec![0.0; dim];
            for i in 0..dim {
                let c = idx % subdivisions;
                idx /= subdivisions;
                lo[i] = region.lower[i] + c as f64 * cell_width[i];
            }
            let half: Vec<f64> = cell_width.iter().map(|w| 0.5 * w).collect();
            let center: Vec<f64> = lo.iter().zip(&half).map(|(l, h)| l + h).collect();
            let scale: f64 = half.iter().product();

            let mut sum = [0.0; K];
            let mut out = [0.0; K];
            let mut digits = vec![0usize; dim];
            let mut point = vec![0.0; dim];
            let n_points = order.pow(dim as u32);
            for _ in 0..n_points {
                let mut w = scale;
                for i in 0..dim {
                    point[i] = center[i] + half[i] * nodes[digits[i]];
                    w *= weights[digits[i]];
                }
                f(&point, &mut out);
                for (acc, v) in sum.iter_mut().zip(&out) {
                    if !v.is_finite() {
                        return Err(Error::NonFiniteSample {
                            point: point.clone(),
                        });
                    }
                    *acc += w * v;
                }
                for i in 0..dim {
                    digits[i] += 1;
                    if digits[i] < order {
                        break;
                    }
                    digits[i] = 0;
                }
            }
            Ok(sum)
        })
        .collect();

    let mut total = [0.0; K];
    for s in cell_sums {
        let s = s?;
        for (acc, v) in total.iter_mut().zip(&s) {
            *acc += v;
        }
    }
    Ok(total)
}

/// Single pass at a fixed order (no error estimate).
pub fn integrate_fixed_order<F>(
    f: &F,
    region: &BoxRegion,
    order: usize,
    subdivisions: usize,
) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = region.dim();
    let gl = gauss_legendre(order);
    let (nodes, weights) = gl.as_ref();
    let cell_width: Vec<f64> = region
        .lower
        .iter()
        .zip(&region.upper)
        .map(|(l, u)| (u - l) / subdivisions as f64)
        .collect();
    let n_cells = subdivisions.pow(dim as u32);

    let cell_sums: Vec<Result<f64>> = (0..n_cells)
        .into_par_iter()
        .map(|cell| {
            // decode the cell multi-index
            let mut idx = cell;
            let mut lo = vec![0.0; dim];
            for i in 0..dim {
                let c = idx % subdivisions;
                idx /= subdivisions;
                lo[i] = region.lower[i] + c as f64 * cell_width[i];
            }
            let half: Vec<f64> = cell_width.iter().map(|w| 0.5 * w).collect();
            let center: Vec<f64> = lo.iter().zip(&half).map(|(l, h)| l + h).collect();
            let scale: f64 = half.iter().product();

            let mut sum = 0.0;
            let mut digits = vec![0usize; dim];
            let mut point = vec![0.0; dim];
            let n_points = order.pow(dim as u32);
            for _ in 0..n_points {
                let mut w = scale;
                for i in 0..dim {
                    point[i] = center[i] + half[i] * nodes[digits[i]];
                    w *= weights[digits[i]];
                }
                let v = f(&point);
                if !v.is_finite() {
                    return Err(Error::NonFiniteSample {
                        point: point.clone(),
                    });
                }
                sum += w * v;
                // odometer
                for i in 0..dim {
                    digits[i] += 1;
                    if digits[i] < order {
                        break;
                    }
                    digits[i] = 0;
                }
            }
            Ok(sum)
        })
        .collect();

    let mut total = 0.0;
    for s in cell_sums {
        total += s?;
    }
    Ok(total)
}
