//! Rayleigh-quotient probing of the gradient-weight constant: the quotient
//! (∫|∇_X f|^p) / (∫ W1 |f|^p) over admissible test objects is bounded below
//! by ((p−1)/p)^p whenever the L_p term vanishes, and its infimum over rich
//! families probes how much room the constant leaves.

use super::bump::{BumpKind, TestFunction};
use super::nelder::{minimize, NelderMeadOptions};
use super::quadrature::{integrate, BoxRegion, QuadratureRule};
use super::{weight_range_over, ADMISSIBILITY_MARGIN};
use crate::hardy::{compiled_w1, FrameEvaluator, HardySpec, MAX_DEFICIT_DIM};
use crate::{Error, Result};

/// Anything the quotient integrals can consume: a value, an analytic
/// gradient, a covering set of integration boxes, and closed-form bounds of
/// affine functionals over the support (for admissibility).
pub trait ProbeFunction: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn grad(&self, x: &[f64], out: &mut [f64]);
    /// Boxes covering the support; integrals run per box and sum.
    fn partition(&self) -> Vec<BoxRegion>;
    /// (min, max) of c0 + Σ lin_i x_i over the support.
    fn affine_range(&self, c0: f64, lin: &[f64]) -> (f64, f64);
}

impl ProbeFunction for TestFunction {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        TestFunction::value(self, x)
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        TestFunction::grad(self, x, out)
    }

    fn partition(&self) -> Vec<BoxRegion> {
        vec![self.support_box()]
    }

    fn affine_range(&self, c0: f64, lin: &[f64]) -> (f64, f64) {
        let at_center: f64 = c0
            + lin
                .iter()
                .zip(&self.center)
                .map(|(a, c)| a * c)
                .sum::<f64>();
        let spread: f64 = lin
            .iter()
            .zip(&self.radii)
            .map(|(a, r)| (a * r) * (a * r))
            .sum::<f64>()
            .sqrt();
        (at_center - spread, at_center + spread)
    }
}

/// The smooth window exp(1 − 1/(1 − r²)) on (−1, 1) and its derivative.
#[inline]
fn window(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let u = 1.0 - r * r;
    (1.0 - 1.0 / u).exp()
}

#[inline]
fn window_deriv(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let u = 1.0 - r * r;
    -(1.0 - 1.0 / u).exp() * 2.0 * r / (u * u)
}

/// A half-space probe that is wide on the logarithmic scale of the distance
/// coordinate: W((ln x − μ)/h) · x^α along the axis, times flat smooth
/// windows of radius ρ in the tangential coordinates. Compactly supported in
/// [e^{μ−h}, e^{μ+h}] × Π[c_i ± ρ]; C^∞; the extremal profile of the 1D
/// weight 1/x^p corresponds to α = (p−1)/p and h → ∞.
#[derive(Debug, Clone)]
pub struct LogWindowBump {
    dim: usize,
    axis: usize,
    mu: f64,
    h: f64,
    alpha: f64,
    tangential_center: Vec<f64>,
    tangential_radius: f64,
}

impl LogWindowBump {
    pub fn new(
        dim: usize,
        axis: usize,
        log_edges: (f64, f64),
        alpha: f64,
        tangential_center: &[f64],
        tangential_radius: f64,
    ) -> Result<LogWindowBump> {
        let (t_lo, t_hi) = log_edges;
        if axis >= dim || tangential_center.len() != dim {
            return Err(Error::InvalidParameter("probe axis/center mismatch".into()));
        }
        if !(t_hi > t_lo + 0.1) || !t_lo.is_finite() || !t_hi.is_finite() {
            return Err(Error::InvalidParameter(
                "log-window needs edges with t_hi > t_lo + 0.1".into(),
            ));
        }
        if !(tangential_radius > 0.0) || !tangential_radius.is_finite() {
            return Err(Error::InvalidParameter(
                "tangential radius must be positive".into(),
            ));
        }
        Ok(LogWindowBump {
            dim,
            axis,
            mu: 0.5 * (t_lo + t_hi),
            h: 0.5 * (t_hi - t_lo),
            alpha,
            tangential_center: tangential_center.to_vec(),
            tangential_radius,
        })
    }

    /// Support interval of the axis coordinate.
    pub fn axis_support(&self) -> (f64, f64) {
        ((self.mu - self.h).exp(), (self.mu + self.h).exp())
    }
}

impl ProbeFunction for LogWindowBump {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        let xa = x[self.axis];
        if xa <= 0.0 {
            return 0.0;
        }
        let r = (xa.ln() - self.mu) / self.h;
        let mut v = window(r);
        if v == 0.0 {
            return 0.0;
        }
        v *= xa.powf(self.alpha);
        for i in 0..self.dim {
            if i == self.axis {
                continue;
            }
            v *= window((x[i] - self.tangential_center[i]) / self.tangential_radius);
            if v == 0.0 {
                return 0.0;
            }
        }
        v
    }

    fn grad(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let xa = x[self.axis];
        if xa <= 0.0 {
            return;
        }
        let r = (xa.ln() - self.mu) / self.h;
        let w_ax = window(r);
        if w_ax == 0.0 {
            return;
        }
        let mut tang = [0.0f64; MAX_DEFICIT_DIM];
        let mut tang_prod = 1.0;
        for i in 0..self.dim {
            if i == self.axis {
                continue;
            }
            let ri = (x[i] - self.tangential_center[i]) / self.tangential_radius;
            tang[i] = window(ri);
            tang_prod *= tang[i];
        }
        if tang_prod == 0.0 {
            return;
        }
        let power = xa.powf(self.alpha);
        // axis direction: d/dx [W(r)·x^α] = x^{α−1}(W'(r)/h + α·W(r))
        out[self.axis] =
            xa.powf(self.alpha - 1.0) * (window_deriv(r) / self.h + self.alpha * w_ax) * tang_prod;
        // tangential directions
        for i in 0..self.dim {
            if i == self.axis {
                continue;
            }
            let ri = (x[i] - self.tangential_center[i]) / self.tangential_radius;
            let others = tang_prod / tang[i].max(f64::MIN_POSITIVE);
            out[i] = w_ax * power * window_deriv(ri) / self.tangential_radius * others;
        }
    }

    fn partition(&self) -> Vec<BoxRegion> {
        // geometric slices along the axis, at most half a log-unit each, so
        // every box is resolved at its own scale
        let segments = ((2.0 * self.h / 0.5).ceil() as usize).max(1);
        let mut boxes = Vec::with_capacity(segments);
        for j in 0..segments {
            let t0 = self.mu - self.h + 2.0 * self.h * j as f64 / segments as f64;
            let t1 = self.mu - self.h + 2.0 * self.h * (j + 1) as f64 / segments as f64;
            let mut lower: Vec<f64> = self
                .tangential_center
                .iter()
                .map(|c| c - self.tangential_radius)
                .collect();
            let mut upper: Vec<f64> = self
                .tangential_center
                .iter()
                .map(|c| c + self.tangential_radius)
                .collect();
            lower[self.axis] = t0.exp();
            upper[self.axis] = t1.exp();
            boxes.push(BoxRegion::new(lower, upper).expect("edges increase"));
        }
        boxes
    }

    fn affine_range(&self, c0: f64, lin: &[f64]) -> (f64, f64) {
        // interval arithmetic over the support box
        let (a, b) = self.axis_support();
        let mut lo = c0;
        let mut hi = c0;
        for i in 0..self.dim {
            let (xl, xu) = if i == self.axis {
                (a, b)
            } else {
                (
                    self.tangential_center[i] - self.tangential_radius,
                    self.tangential_center[i] + self.tangential_radius,
                )
            };
            let (c1, c2) = (lin[i] * xl, lin[i] * xu);
            lo += c1.min(c2);
            hi += c1.max(c2);
        }
        (lo, hi)
    }
}

fn check_probe_admissible(spec: &HardySpec, probe: &dyn ProbeFunction) -> Result<()> {
    if probe.dim() != spec.dim() {
        return Err(Error::ArityMismatch {
            expected: spec.dim(),
            got: probe.dim(),
        });
    }
    let (lo, hi) = weight_range_over(spec, probe)?;
    if lo > ADMISSIBILITY_MARGIN || hi < -ADMISSIBILITY_MARGIN {
        Ok(())
    } else {
        Err(Error::Inadmissible)
    }
}

/// The quotient (∫|∇_X f|^p) / (∫ W1 |f|^p) for an arbitrary probe object.
/// Requires an admissible probe and a spec whose L_p term vanishes (the
/// quotient is measured against the gradient weight alone).
pub fn rayleigh_quotient_probe(
    spec: &HardySpec,
    probe: &dyn ProbeFunction,
    rule: &QuadratureRule,
) -> Result<f64> {
    check_probe_admissible(spec, probe)?;
    if !spec.lp_term_vanishes()? {
        return Err(Error::SurvivingLpTerm);
    }
    let p = spec.p;
    let fe = FrameEvaluator::new(&spec.frame);
    let w1 = compiled_w1(spec)?;
    let dim = spec.dim();
    let mut num = 0.0;
    let mut den = 0.0;
    for region in probe.partition() {
        let (n, _) = integrate(
            |x| {
                let mut g = [0.0f64; MAX_DEFICIT_DIM];
                probe.grad(x, &mut g[..dim]);
                fe.grad_square(x, &g[..dim]).powf(p / 2.0)
            },
            &region,
            rule,
        )?;
        let (d, _) = integrate(
            |x| {
                let v = probe.value(x);
                if v == 0.0 {
                    0.0
                } else {
                    w1.eval(x) * v.abs().powf(p)
                }
            },
            &region,
            rule,
        )?;
        num += n;
        den += d;
    }
    if den <= 0.0 {
        return Err(Error::Domain("vanishing weighted mass in the quotient".into()));
    }
    Ok(num / den)
}

/// The quotient for a single test function.
pub fn rayleigh_quotient(
    spec: &HardySpec,
    f: &TestFunction,
    rule: &QuadratureRule,
) -> Result<f64> {
    rayleigh_quotient_probe(spec, f, rule)
}

/// A parameterized family of probe objects for the optimizer.
pub trait BumpFamily {
    fn initial_params(&self) -> Vec<f64>;
    fn make(&self, params: &[f64]) -> Result<Box<dyn ProbeFunction>>;
}

/// One bump; parameters are the center coordinates followed by log-radii.
#[derive(Debug, Clone)]
pub struct SingleBumpFamily {
    pub kind: BumpKind,
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
}

impl BumpFamily for SingleBumpFamily {
    fn initial_params(&self) -> Vec<f64> {
        self.center
            .iter()
            .copied()
            .chain(self.radii.iter().map(|r| r.ln()))
            .collect()
    }

    fn make(&self, params: &[f64]) -> Result<Box<dyn ProbeFunction>> {
        let dim = self.center.len();
        if params.len() != 2 * dim {
            return Err(Error::ArityMismatch {
                expected: 2 * dim,
                got: params.len(),
            });
        }
        let center = params[..dim].to_vec();
        let radii: Vec<f64> = params[dim..].iter().map(|lr| lr.exp()).collect();
        Ok(Box::new(TestFunction::new(self.kind, center, radii)?))
    }
}

/// Log-window family for half-space probes whose normal is a coordinate
/// direction. Parameters: (log inner edge, log outer edge, power α, log
/// tangential radius).
#[derive(Debug, Clone)]
pub struct LogWindowFamily {
    pub dim: usize,
    pub axis: usize,
    pub tangential_center: Vec<f64>,
    pub initial_log_edges: (f64, f64),
    pub initial_alpha: f64,
    pub initial_log_tangential: f64,
}

impl LogWindowFamily {
    /// Natural starting family for a coordinate half-space probe at
    /// exponent p: α = (p−1)/p, edges hugging the admissibility margin.
    pub fn for_axis(dim: usize, axis: usize, p: f64) -> LogWindowFamily {
        LogWindowFamily {
            dim,
            axis,
            tangential_center: vec![0.0; dim],
            initial_log_edges: ((20.0 * ADMISSIBILITY_MARGIN).ln(), 5.0),
            initial_alpha: (p - 1.0) / p,
            initial_log_tangential: 9.0,
        }
    }
}

impl BumpFamily for LogWindowFamily {
    fn initial_params(&self) -> Vec<f64> {
        vec![
            self.initial_log_edges.0,
            self.initial_log_edges.1,
            self.initial_alpha,
            self.initial_log_tangential,
        ]
    }

    fn make(&self, params: &[f64]) -> Result<Box<dyn ProbeFunction>> {
        if params.len() != 4 {
            return Err(Error::ArityMismatch {
                expected: 4,
                got: params.len(),
            });
        }
        // keep the optimizer inside comfortable f64 territory; windows of
        // 128 log-units already sit within 1e-4 of the constant
        if params.iter().any(|v| !v.is_finite() || v.abs() > 64.0) {
            return Err(Error::InvalidParameter(
                "log-window parameters out of range".into(),
            ));
        }
        let probe = LogWindowBump::new(
            self.dim,
            self.axis,
            (params[0], params[1]),
            params[2],
            &self.tangential_center,
            params[3].exp(),
        )?;
        Ok(Box::new(probe))
    }
}

/// Outcome of a quotient minimization.
#[derive(Debug, Clone)]
pub struct RayleighResult {
    pub best_params: Vec<f64>,
    pub quotient: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best quotient seen after each iteration.
    pub trace: Vec<f64>,
}

const PENALTY: f64 = 1e6;

/// Minimize the quotient over a family with Nelder–Mead; parameter vectors
/// that produce invalid or inadmissible probes score a large penalty.
/// Requires a spec whose L_p term vanishes.
pub fn minimize_quotient(
    spec: &HardySpec,
    family: &dyn BumpFamily,
    rule: &QuadratureRule,
    opts: &NelderMeadOptions,
) -> Result<RayleighResult> {
    if !spec.lp_term_vanishes()? {
        return Err(Error::SurvivingLpTerm);
    }
    let objective = |params: &[f64]| -> f64 {
        let Ok(probe) = family.make(params) else {
            return PENALTY;
        };
        match rayleigh_quotient_probe(spec, probe.as_ref(), rule) {
            Ok(q) => q,
            Err(_) => PENALTY,
        }
    };
    let start = family.initial_params();
    let res = minimize(objective, &start, opts);
    Ok(RayleighResult {
        best_params: res.best,
        quotient: res.value,
        iterations: res.iterations,
        converged: res.converged && res.value < PENALTY,
        trace: res.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardy::{BuiltinCase, GammaChoice};

    struct Scaled<'a> {
        inner: &'a TestFunction,
        scale: f64,
    }

    impl ProbeFunction for Scaled<'_> {
        fn dim(&self) -> usize {
            self.inner.dim()
        }
        fn value(&self, x: &[f64]) -> f64 {
            self.scale * self.inner.value(x)
        }
        fn grad(&self, x: &[f64], out: &mut [f64]) {
            self.inner.grad(x, out);
            for g in out.iter_mut() {
                *g *= self.scale;
            }
        }
        fn partition(&self) -> Vec<BoxRegion> {
            vec![self.inner.support_box()]
        }
        fn affine_range(&self, c0: f64, lin: &[f64]) -> (f64, f64) {
            self.inner.affine_range(c0, lin)
        }
    }

    #[test]
    fn quotient_is_scale_invariant_and_bounded_below() {
        let spec = BuiltinCase::H1HalfSpace
            .spec(2.0, GammaChoice::Optimal)
            .unwrap();
        let rule = QuadratureRule::new(16, 2).unwrap();
        let f = TestFunction::smooth(vec![0.2, -0.1, 1.0], vec![0.3, 0.4, 0.3]).unwrap();
        let q = rayleigh_quotient(&spec, &f, &rule).unwrap();
        assert!(q >= 0.25 - 1e-6, "quotient {q}");
        for scale in [1e-3, 1e3] {
            let scaled = Scaled { inner: &f, scale };
            let qs = rayleigh_quotient_probe(&spec, &scaled, &rule).unwrap();
            assert!((qs - q).abs() <= 1e-12 * q, "{qs} vs {q}");
        }
    }

    #[test]
    fn surviving_lp_term_is_rejected() {
        let spec = BuiltinCase::EngelHalfSpace
            .spec(2.0, GammaChoice::Fixed(-0.5))
            .unwrap();
        let rule = QuadratureRule::new(8, 1).unwrap();
        let f = TestFunction::smooth(vec![1.0; 4], vec![0.2; 4]).unwrap();
        assert!(matches!(
            rayleigh_quotient(&spec, &f, &rule),
            Err(crate::Error::SurvivingLpTerm)
        ));
        let family = SingleBumpFamily {
            kind: BumpKind::Smooth,
            center: vec![1.0; 4],
            radii: vec![0.2; 4],
        };
        assert!(matches!(
            minimize_quotient(&spec, &family, &rule, &NelderMeadOptions::default()),
            Err(crate::Error::SurvivingLpTerm)
        ));
    }

    #[test]
    fn inadmissible_probe_is_rejected() {
        let spec = BuiltinCase::GrushinHalfSpace
            .spec(2.0, GammaChoice::Optimal)
            .unwrap();
        let rule = QuadratureRule::new(8, 1).unwrap();
        let f = TestFunction::smooth(vec![0.1, 0.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            rayleigh_quotient(&spec, &f, &rule),
            Err(crate::Error::Inadmissible)
        ));
    }

    #[test]
    fn fixed_family_returns_its_quotient_and_converges() {
        struct Fixed(TestFunction);
        impl BumpFamily for Fixed {
            fn initial_params(&self) -> Vec<f64> {
                vec![0.0]
            }
            fn make(&self, _params: &[f64]) -> Result<Box<dyn ProbeFunction>> {
                Ok(Box::new(self.0.clone()))
            }
        }
        let spec = BuiltinCase::H1HalfSpace
            .spec(2.0, GammaChoice::Optimal)
            .unwrap();
        let rule = QuadratureRule::new(12, 1).unwrap();
        let f = TestFunction::smooth(vec![0.0, 0.0, 1.0], vec![0.25; 3]).unwrap();
        let direct = rayleigh_quotient(&spec, &f, &rule).unwrap();
        let res = minimize_quotient(&spec, &Fixed(f), &rule, &NelderMeadOptions::default())
            .unwrap();
        assert!(res.converged);
        assert!((res.quotient - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn log_window_gradient_matches_finite_differences() {
        let probe = LogWindowBump::new(
            2,
            0,
            (-6.0, 2.0),
            0.5,
            &[0.0, 0.0],
            50.0,
        )
        .unwrap();
        for (xa, xt) in [(0.01, 3.0), (0.5, -20.0), (3.0, 0.0), (6.0, 44.0)] {
            let x = [xa, xt];
            let mut g = [0.0f64; 2];
            probe.grad(&x, &mut g);
            let h = 1e-6 * xa.max(1e-3);
            for j in 0..2 {
                let hj = if j == 0 { h } else { 1e-5 };
                let mut up = x;
                up[j] += hj;
                let mut dn = x;
                dn[j] -= hj;
                let fd = (probe.value(&up) - probe.value(&dn)) / (2.0 * hj);
                assert!(
                    (g[j] - fd).abs() <= 1e-5 * fd.abs().max(1e-6),
                    "axis {j} at {x:?}: analytic {} vs fd {fd}",
                    g[j]
                );
            }
        }
    }

    /// Independent 1D oracle: Simpson quadrature of the center-slice profile
    /// for the Grushin x1-weight, quotient ∫(P')² / ∫P²/x².
    fn center_slice_quotient_1d(probe: &dyn ProbeFunction, a: f64, b: f64) -> f64 {
        let n = 40_001;
        // integrate in log-coordinates for scale balance
        let (ta, tb) = (a.ln(), b.ln());
        let h = (tb - ta) / (n - 1) as f64;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let t = ta + i as f64 * h;
            let x = t.exp();
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let mut g = [0.0f64; MAX_DEFICIT_DIM];
            probe.grad(&[x, 0.0], &mut g[..2]);
            let v = probe.value(&[x, 0.0]);
            // dx = x dt
            num += w * g[0] * g[0] * x;
            den += w * v * v / x;
        }
        num / den
    }

    #[test]
    fn grushin_log_window_quotient_decreases_toward_the_constant() {
        let spec = BuiltinCase::GrushinHalfSpace
            .spec(2.0, GammaChoice::Optimal)
            .unwrap();
        let rule = QuadratureRule::new(16, 1).unwrap();
        let mut previous = f64::INFINITY;
        for (t_lo, t_hi) in [(-2.0, 1.0), (-5.0, 2.0), (-10.0, 3.0)] {
            let probe = LogWindowBump::new(
                2,
                0,
                (t_lo, t_hi),
                0.5,
                &[0.0, 0.0],
                2000.0 * t_hi.exp(),
            )
            .unwrap();
            let q = rayleigh_quotient_probe(&spec, &probe, &rule).unwrap();
            assert!(q >= 0.25 - 1e-6, "({t_lo},{t_hi}): quotient {q}");
            assert!(q < previous, "quotient should decrease: {q} vs {previous}");
            previous = q;
            // independent 1D comparison on the center slice
            let oracle = center_slice_quotient_1d(&probe, t_lo.exp(), t_hi.exp());
            assert!(
                (q - oracle).abs() <= 0.02 + 0.05 * oracle,
                "2D quotient {q} vs center-slice oracle {oracle}"
            );
        }
        assert!(previous < 0.40, "widest window should be close to 1/4");
    }
}
