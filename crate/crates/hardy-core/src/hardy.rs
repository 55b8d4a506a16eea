//! Assembly and evaluation of the geometric Hardy functionals
//!
//!   ∫ |∇_X f|^p ≥ c₁(γ,p) ∫ (|∇_X w|^p / |w|^p) |f|^p
//!                + γ ∫ (L_p w / |w|^{p−1}) |f|^p
//!
//! with w either the half-space distance ⟨x, n⟩ − d or the dilation weight
//! ⟨Z(x), n⟩, c₁(γ,p) = −(p−1)(|γ|^{p/(p−1)} + γ), and the optimal
//! γ* = −((p−1)/p)^{p−1} available whenever the L_p term vanishes.

use num_traits::Zero;
use serde::Serialize;

use crate::calculus::{self, FactoredLp};
use crate::groups::{self, Frame, StratifiedDescriptor};
use crate::numerics::{integrate, BumpKind, QuadratureRule, TestFunction};
use crate::symbolic::{
    rat, rat_from_f64, rat_to_f64, CompiledField, CompiledPoly, HardyVars, MultiPoly, PowerExp,
    Rat, ScalarField, VectorField,
};
use crate::{Error, Result};

/// Domain selector: half-space {⟨x, n⟩ > d} with its affine distance, or a
/// starshaped-type weight ⟨Z(x), n⟩ built from the dilation generator.
#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    HalfSpace { d: Rat },
    StarshapedZ,
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::HalfSpace { .. } => "halfspace",
            Mode::StarshapedZ => "starshaped",
        }
    }
}

/// Constant normal vector together with the domain mode. The weights in all
/// built-in inequalities treat n as fixed data, which is why it is constant
/// here; boundary-dependent normals appear only inside the starshapedness
/// sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSpec {
    pub n: Vec<Rat>,
    pub mode: Mode,
}

impl NormalSpec {
    pub fn new(n: Vec<Rat>, mode: Mode) -> Result<NormalSpec> {
        if n.iter().all(|c| c.is_zero()) {
            return Err(Error::InvalidParameter("normal vector must be nonzero".into()));
        }
        Ok(NormalSpec { n, mode })
    }

    pub fn half_space(n: Vec<Rat>, d: Rat) -> Result<NormalSpec> {
        NormalSpec::new(n, Mode::HalfSpace { d })
    }

    pub fn starshaped(n: Vec<Rat>) -> Result<NormalSpec> {
        NormalSpec::new(n, Mode::StarshapedZ)
    }
}

/// γ is either a number or "optimal", which resolves to γ* only when the
/// L_p term of the spec vanishes identically (otherwise the maximization
/// that produces γ* does not apply and the caller must sweep γ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaChoice {
    Optimal,
    Fixed(f64),
}

/// ⟨x, n⟩ − d with n and d symbolic.
pub fn symbolic_distance(hv: &HardyVars) -> MultiPoly {
    let vs = hv.set();
    let mut w = MultiPoly::var(vs, hv.d()).expect("d in range").neg();
    for i in 0..hv.dim() {
        let term = MultiPoly::monomial(vs, rat(1, 1), &[(hv.x(i), 1), (hv.n(i), 1)])
            .expect("indices in range");
        w = w.add(&term).expect("same vars");
    }
    w
}

/// ⟨Z(x), n⟩ = Σ w_i x_i n_i with n symbolic, w_i the dilation weights.
pub fn symbolic_z_weight(hv: &HardyVars, weights: &[u32]) -> MultiPoly {
    let vs = hv.set();
    let mut w = MultiPoly::zero(vs);
    for i in 0..hv.dim() {
        let term = MultiPoly::monomial(
            vs,
            rat(weights[i] as i64, 1),
            &[(hv.x(i), 1), (hv.n(i), 1)],
        )
        .expect("indices in range");
        w = w.add(&term).expect("same vars");
    }
    w
}

/// Distance polynomial Σ x_i n_i − d with the spec's constant n, d bound
/// exactly. Requires half-space mode.
pub fn distance_function(hv: &HardyVars, normal: &NormalSpec) -> Result<MultiPoly> {
    let Mode::HalfSpace { d } = &normal.mode else {
        return Err(Error::InvalidParameter(
            "distance_function requires half-space mode".into(),
        ));
    };
    if normal.n.len() != hv.dim() {
        return Err(Error::ArityMismatch {
            expected: hv.dim(),
            got: normal.n.len(),
        });
    }
    let mut w = symbolic_distance(hv);
    for (i, ni) in normal.n.iter().enumerate() {
        w = w.substitute_rat(hv.n(i), ni)?;
    }
    w = w.substitute_rat(hv.d(), d)?;
    Ok(w)
}

/// Weight polynomial ⟨Z(x), n⟩ with the spec's constant n bound exactly.
/// Requires starshaped mode and dilation weights.
pub fn z_weight_function(
    hv: &HardyVars,
    desc: &StratifiedDescriptor,
    normal: &NormalSpec,
) -> Result<MultiPoly> {
    if normal.mode != Mode::StarshapedZ {
        return Err(Error::InvalidParameter(
            "z_weight_function requires starshaped mode".into(),
        ));
    }
    if normal.n.len() != hv.dim() || desc.dim() != hv.dim() {
        return Err(Error::ArityMismatch {
            expected: hv.dim(),
            got: normal.n.len(),
        });
    }
    let mut w = symbolic_z_weight(hv, desc.weights());
    for (i, ni) in normal.n.iter().enumerate() {
        w = w.substitute_rat(hv.n(i), ni)?;
    }
    Ok(w)
}

/// The two right-hand-side coefficients: c1 = −(p−1)(|γ|^{p/(p−1)} + γ)
/// multiplying the gradient weight, and c2 = γ multiplying the L_p weight.
pub fn gamma_coefficients(gamma: f64, p: f64) -> Result<(f64, f64)> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter("p must exceed 1".into()));
    }
    let c1 = -(p - 1.0) * (gamma.abs().powf(p / (p - 1.0)) + gamma);
    Ok((c1, gamma))
}

/// γ* = −((p−1)/p)^{p−1}, the stationary point of c1 in γ; at γ* the
/// gradient-weight coefficient becomes ((p−1)/p)^p.
pub fn optimal_gamma(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter("p must exceed 1".into()));
    }
    Ok(-((p - 1.0) / p).powf(p - 1.0))
}

/// W1 = |∇_X w|^p / |w|^p and W2 = L_p w / |w|^{p−1} as expression trees
/// (absolute values as square roots of squares, exponents symbolic in p),
/// plus the factored L_p certificate. Works for both the symbolic-n and the
/// bound-n weight polynomial.
pub fn weight_fields_for(
    frame: &Frame,
    w: &MultiPoly,
) -> Result<(ScalarField, ScalarField, FactoredLp)> {
    let p_var = frame.vars().p();
    let fac = calculus::p_sublaplacian_factored(frame, w)?;
    let w_sq = w.mul(w)?;
    let w1 = ScalarField::product(vec![
        ScalarField::power(
            ScalarField::poly(fac.norm_sq.clone()),
            PowerExp::affine_p(rat(1, 2), rat(0, 1), p_var),
        ),
        ScalarField::power(
            ScalarField::poly(w_sq.clone()),
            PowerExp::affine_p(rat(-1, 2), rat(0, 1), p_var),
        ),
    ]);
    let w2 = if fac.is_identically_zero() {
        ScalarField::zero()
    } else {
        ScalarField::product(vec![
            ScalarField::power(
                ScalarField::poly(fac.norm_sq.clone()),
                PowerExp::affine_p(rat(1, 2), rat(-2, 1), p_var),
            ),
            ScalarField::poly(fac.q_poly.clone()),
            ScalarField::power(
                ScalarField::poly(w_sq),
                PowerExp::affine_p(rat(-1, 2), rat(1, 2), p_var),
            ),
        ])
    };
    Ok((w1, w2, fac))
}

/// A fully determined inequality instance.
#[derive(Debug, Clone)]
pub struct HardySpec {
    pub frame: Frame,
    pub descriptor: Option<StratifiedDescriptor>,
    pub normal: NormalSpec,
    pub p: f64,
    pub gamma: GammaChoice,
}

impl HardySpec {
    pub fn new(
        frame: Frame,
        descriptor: Option<StratifiedDescriptor>,
        normal: NormalSpec,
        p: f64,
        gamma: GammaChoice,
    ) -> Result<HardySpec> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter("p must exceed 1".into()));
        }
        if normal.n.len() != frame.dim() {
            return Err(Error::ArityMismatch {
                expected: frame.dim(),
                got: normal.n.len(),
            });
        }
        if normal.mode == Mode::StarshapedZ && descriptor.is_none() {
            return Err(Error::InvalidParameter(
                "starshaped mode needs stratified metadata (dilation weights)".into(),
            ));
        }
        if let Some(desc) = &descriptor {
            if desc.dim() != frame.dim() {
                return Err(Error::ArityMismatch {
                    expected: frame.dim(),
                    got: desc.dim(),
                });
            }
        }
        Ok(HardySpec {
            frame,
            descriptor,
            normal,
            p,
            gamma,
        })
    }

    pub fn group(&self) -> &str {
        self.frame.name()
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    /// The mode's weight function with n (and d) bound exactly; a
    /// polynomial in the coordinates only.
    pub fn weight_poly(&self) -> Result<MultiPoly> {
        let hv = self.frame.vars();
        match &self.normal.mode {
            Mode::HalfSpace { .. } => distance_function(hv, &self.normal),
            Mode::StarshapedZ => z_weight_function(
                hv,
                self.descriptor.as_ref().expect("checked at construction"),
                &self.normal,
            ),
        }
    }

    /// Factored L_p certificate for the bound weight.
    pub fn factored_lp(&self) -> Result<FactoredLp> {
        calculus::p_sublaplacian_factored(&self.frame, &self.weight_poly()?)
    }

    /// Whether the L_p term vanishes identically for this instance.
    pub fn lp_term_vanishes(&self) -> Result<bool> {
        Ok(self.factored_lp()?.is_identically_zero())
    }

    /// Resolve the γ choice; "optimal" requires a vanishing L_p term.
    pub fn resolve_gamma(&self) -> Result<f64> {
        match self.gamma {
            GammaChoice::Fixed(g) => Ok(g),
            GammaChoice::Optimal => {
                if self.lp_term_vanishes()? {
                    optimal_gamma(self.p)
                } else {
                    Err(Error::SurvivingLpTerm)
                }
            }
        }
    }

    /// Evaluable weights W1, W2 for this instance; exponents still symbolic
    /// in p (bind p when compiling).
    pub fn weight_fields(&self) -> Result<(ScalarField, ScalarField)> {
        let (w1, w2, _) = weight_fields_for(&self.frame, &self.weight_poly()?)?;
        Ok((w1, w2))
    }
}

/// Echo of the test-function parameters inside a report.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FParams {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
}

impl FParams {
    fn of(f: &TestFunction) -> FParams {
        let (kind, m) = match f.kind {
            BumpKind::Smooth => ("smooth".to_string(), None),
            BumpKind::Poly { m } => ("poly".to_string(), Some(m)),
        };
        FParams {
            kind,
            m,
            center: f.center.clone(),
            radii: f.radii.clone(),
        }
    }
}

/// One evaluated inequality instance. Field names and order are the wire
/// format of the CLI reports.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct HardyReport {
    pub lhs: f64,
    pub rhs_gradient_term: f64,
    pub rhs_lp_term: f64,
    pub deficit: f64,
    pub gamma: f64,
    pub p: f64,
    pub group: String,
    pub mode: String,
    pub n: Vec<f64>,
    pub d: Option<f64>,
    pub quad_error: f64,
    pub f_params: FParams,
}

fn compiled_x_poly(poly: &MultiPoly, dim: usize) -> CompiledPoly {
    debug_assert!(poly.max_used_var().map_or(true, |v| v < dim));
    CompiledPoly::from_poly(poly)
}

fn compile_weight(field: &ScalarField, p: f64, p_var: usize, dim: usize) -> Result<CompiledField> {
    let bound = field.substitute_rats(&[(p_var, rat_from_f64(p))]);
    debug_assert!({
        fn max_var(f: &ScalarField) -> Option<usize> {
            match f {
                ScalarField::Poly(p) => p.max_used_var(),
                ScalarField::Constant(_) => None,
                ScalarField::Sum(ts) | ScalarField::Product(ts) => {
                    ts.iter().filter_map(max_var).max()
                }
                ScalarField::Power(b, _) => max_var(b),
            }
        }
        max_var(&bound).map_or(true, |v| v < dim)
    });
    bound.compile()
}

pub(crate) const MAX_DEFICIT_DIM: usize = 8;

/// Frame coefficients lowered to fast polynomial evaluation on x-points;
/// shared by the deficit and Rayleigh integrands.
#[derive(Debug, Clone)]
pub struct FrameEvaluator {
    coeffs: Vec<Vec<CompiledPoly>>,
    dim: usize,
}

impl FrameEvaluator {
    pub fn new(frame: &Frame) -> FrameEvaluator {
        let dim = frame.dim();
        FrameEvaluator {
            coeffs: (0..frame.horizontal_count())
                .map(|k| {
                    (0..dim)
                        .map(|j| compiled_x_poly(frame.coefficient(k, j), dim))
                        .collect()
                })
                .collect(),
            dim,
        }
    }

    /// |Σ_j c_kj(x)·grad_j|² summed over the frame fields: the squared
    /// horizontal gradient of a function with Euclidean gradient `grad`.
    #[inline]
    pub fn grad_square(&self, x: &[f64], grad: &[f64]) -> f64 {
        let mut total = 0.0;
        for row in &self.coeffs {
            let mut xk = 0.0;
            for (c, g) in row.iter().zip(grad) {
                if *g != 0.0 {
                    xk += c.eval(x) * g;
                }
            }
            total += xk * xk;
        }
        total
    }

    /// |∇_X f(x)|² using the analytic bump gradient.
    #[inline]
    fn horizontal_grad_sq(&self, f: &TestFunction, x: &[f64]) -> f64 {
        let mut grad = [0.0f64; MAX_DEFICIT_DIM];
        f.grad(x, &mut grad[..self.dim]);
        self.grad_square(x, &grad[..self.dim])
    }
}

/// W1 with n, d and p bound, compiled for evaluation on x-points.
pub fn compiled_w1(spec: &HardySpec) -> Result<CompiledField> {
    let (w1, _) = spec.weight_fields()?;
    compile_weight(&w1, spec.p, spec.frame.vars().p(), spec.dim())
}

/// t^e with half- and quarter-integer exponents routed through sqrt/powi
/// (the deficit integrands only ever see such exponents for rational p).
#[derive(Debug, Clone, Copy)]
enum FastPow {
    Int(i32),
    Half(i32),
    Quarter(i32),
    General(f64),
}

impl FastPow {
    fn new(e: f64) -> FastPow {
        let q = e * 4.0;
        if (q - q.round()).abs() < 1e-12 && q.abs() < 1e6 {
            let k = q.round() as i32;
            if k % 4 == 0 {
                FastPow::Int(k / 4)
            } else if k % 2 == 0 {
                FastPow::Half(k / 2)
            } else {
                FastPow::Quarter(k)
            }
        } else {
            FastPow::General(e)
        }
    }

    #[inline]
    fn apply(&self, t: f64) -> f64 {
        match self {
            FastPow::Int(k) => t.powi(*k),
            FastPow::Half(k) => t.sqrt().powi(*k),
            FastPow::Quarter(k) => t.sqrt().sqrt().powi(*k),
            FastPow::General(e) => t.powf(*e),
        }
    }
}

/// The three integrals a deficit needs; γ enters only through coefficients,
/// so one set serves a whole γ-sweep.
struct DeficitIntegrals {
    lhs: (f64, f64),
    w1: (f64, f64),
    w2: (f64, f64),
}

/// One fused quadrature pass for (|∇_X f|^p, W1·|f|^p, W2·|f|^p): the bump,
/// the frame coefficients and the factored-L_p polynomials are evaluated
/// once per node. W1 = ns^{p/2}(w²)^{−p/2} and
/// W2 = ns^{(p−4)/2}·q·(w²)^{−(p−1)/2} exactly as in the field layer.
fn deficit_integrals(
    spec: &HardySpec,
    f: &TestFunction,
    rule: &QuadratureRule,
) -> Result<DeficitIntegrals> {
    let dim = spec.dim();
    if dim > MAX_DEFICIT_DIM {
        return Err(Error::InvalidParameter(format!(
            "deficit evaluation supports dimension up to {MAX_DEFICIT_DIM}"
        )));
    }
    if !crate::numerics::admissible(f, spec)? {
        return Err(Error::Inadmissible);
    }
    let p = spec.p;
    let region = f.support_box();
    let fe = FrameEvaluator::new(&spec.frame);

    let fac = spec.factored_lp()?;
    let w = spec.weight_poly()?;
    let wsq = w.mul(&w)?;
    let q_bound = fac.q_at_p(&rat_from_f64(p));
    let has_q = !q_bound.is_zero();
    let ns_c = compiled_x_poly(&fac.norm_sq, dim);
    let wsq_c = compiled_x_poly(&wsq, dim);
    let q_c = compiled_x_poly(&q_bound, dim);

    let pow_grad = FastPow::new(p / 2.0);
    let pow_f = FastPow::new(p);
    let pow_ns_w1 = FastPow::new(p / 2.0);
    let pow_wsq_w1 = FastPow::new(-p / 2.0);
    let pow_ns_w2 = FastPow::new((p - 4.0) / 2.0);
    let pow_wsq_w2 = FastPow::new(-(p - 1.0) / 2.0);

    let ([lhs, w1, w2], [e_lhs, e_w1, e_w2]) = crate::numerics::integrate_components::<3, _>(
        |x, out| {
            let mut g = [0.0f64; MAX_DEFICIT_DIM];
            f.grad(x, &mut g[..dim]);
            out[0] = pow_grad.apply(fe.grad_square(x, &g[..dim]));
            let fv = f.value(x);
            if fv == 0.0 {
                out[1] = 0.0;
                out[2] = 0.0;
                return;
            }
            let fp = pow_f.apply(fv);
            let ns = ns_c.eval(x);
            let wsq = wsq_c.eval(x);
            out[1] = pow_ns_w1.apply(ns) * pow_wsq_w1.apply(wsq) * fp;
            out[2] = if has_q {
                pow_ns_w2.apply(ns) * q_c.eval(x) * pow_wsq_w2.apply(wsq) * fp
            } else {
                0.0
            };
        },
        &region,
        rule,
    )?;
    Ok(DeficitIntegrals {
        lhs: (lhs, e_lhs),
        w1: (w1, e_w1),
        w2: (w2, e_w2),
    })
}

fn assemble_report(
    spec: &HardySpec,
    f: &TestFunction,
    ints: &DeficitIntegrals,
    gamma: f64,
) -> Result<HardyReport> {
    let (c1, c2) = gamma_coefficients(gamma, spec.p)?;
    let rhs_gradient_term = c1 * ints.w1.0;
    // keep the exactly-vanishing L_p term a clean +0.0 in reports
    let rhs_lp_term = if ints.w2.0 == 0.0 { 0.0 } else { c2 * ints.w2.0 };
    let deficit = ints.lhs.0 - rhs_gradient_term - rhs_lp_term;
    let quad_error = ints.lhs.1 + c1.abs() * ints.w1.1 + c2.abs() * ints.w2.1;
    Ok(HardyReport {
        lhs: ints.lhs.0,
        rhs_gradient_term,
        rhs_lp_term,
        deficit,
        gamma,
        p: spec.p,
        group: spec.group().to_string(),
        mode: spec.normal.mode.label().to_string(),
        n: spec.normal.n.iter().map(rat_to_f64).collect(),
        d: match &spec.normal.mode {
            Mode::HalfSpace { d } => Some(rat_to_f64(d)),
            Mode::StarshapedZ => None,
        },
        quad_error,
        f_params: FParams::of(f),
    })
}

/// Evaluate both sides of the inequality for one test function:
/// lhs = ∫|∇_X f|^p, rhs = c1∫W1|f|^p + c2∫W2|f|^p, deficit = lhs − rhs.
/// The support of f must sit strictly inside {w > 0} (or {w < 0}).
pub fn evaluate_deficit(
    spec: &HardySpec,
    f: &TestFunction,
    rule: &QuadratureRule,
) -> Result<HardyReport> {
    let gamma = spec.resolve_gamma()?;
    let ints = deficit_integrals(spec, f, rule)?;
    assemble_report(spec, f, &ints, gamma)
}

/// Deficits for several γ values, reusing the three integrals (γ only
/// scales the right-hand side).
pub fn deficit_sweep(
    spec: &HardySpec,
    f: &TestFunction,
    rule: &QuadratureRule,
    gammas: &[f64],
) -> Result<Vec<HardyReport>> {
    let ints = deficit_integrals(spec, f, rule)?;
    gammas
        .iter()
        .map(|&g| assemble_report(spec, f, &ints, g))
        .collect()
}

/// The general divergence-field bound
/// ∫|∇_X f|^p ≥ ∫ (div_X g − (p−1)|g|^{p/(p−1)}) |f|^p
/// for any horizontal field g smooth on the support of f.
/// Returns (lhs, rhs, deficit).
pub fn general_divergence_bound(
    frame: &Frame,
    g: &VectorField,
    p: f64,
    f: &TestFunction,
    rule: &QuadratureRule,
) -> Result<(f64, f64, f64)> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter("p must exceed 1".into()));
    }
    if g.basis != crate::symbolic::Basis::Horizontal {
        return Err(Error::InvalidParameter(
            "the divergence bound takes a horizontal-components field".into(),
        ));
    }
    if g.len() != frame.horizontal_count() {
        return Err(Error::ArityMismatch {
            expected: frame.horizontal_count(),
            got: g.len(),
        });
    }
    let dim = frame.dim();
    if dim > MAX_DEFICIT_DIM {
        return Err(Error::InvalidParameter(format!(
            "divergence bound supports dimension up to {MAX_DEFICIT_DIM}"
        )));
    }
    let p_var = frame.vars().p();
    let region = f.support_box();
    let cf = FrameEvaluator::new(frame);

    let div_g = calculus::horizontal_divergence_expr(frame, &g.components)?;
    let norm_sq = ScalarField::sum(
        g.components
            .iter()
            .map(|c| ScalarField::product(vec![c.clone(), c.clone()]))
            .collect(),
    );
    let div_c = compile_weight(&div_g, p, p_var, dim)?;
    let norm_c = compile_weight(&norm_sq, p, p_var, dim)?;
    let dual_half = p / (2.0 * (p - 1.0));

    let lhs = integrate(
        |x| cf.horizontal_grad_sq(f, x).powf(p / 2.0),
        &region,
        rule,
    )?;
    let rhs = integrate(
        |x| {
            let fv = f.value(x);
            if fv == 0.0 {
                return 0.0;
            }
            (div_c.eval(x) - (p - 1.0) * norm_c.eval(x).powf(dual_half)) * fv.powf(p)
        },
        &region,
        rule,
    )?;
    Ok((lhs.0, rhs.0, lhs.0 - rhs.0))
}

/// The field g = γ|∇_X w|^{p−2}∇_X w / w^{p−1} of the theorem proofs for
/// this spec's bound weight, as a horizontal expression-tree vector.
pub fn theorem_g_field(spec: &HardySpec, gamma: f64) -> Result<VectorField> {
    let w = spec.weight_poly()?;
    let comps = calculus::distance_quotient_field(&spec.frame, &w, gamma)?;
    Ok(VectorField::horizontal(comps))
}

/// Seeded random test functions that are admissible for the spec by
/// construction: centers scatter around the point where the affine weight
/// equals one, radii shrink until the support clears the boundary with room
/// to spare. The seed fully determines the output.
pub fn seeded_bumps(
    spec: &HardySpec,
    kind: BumpKind,
    count: usize,
    seed: u64,
) -> Result<Vec<TestFunction>> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    let dim = spec.dim();
    let w = spec.weight_poly()?;
    let coords: Vec<usize> = (0..dim).collect();
    let Some((c0, lin)) = w.affine_in(&coords) else {
        return Err(Error::InvalidParameter(
            "seeded bump sampling needs an affine weight".into(),
        ));
    };
    let c0 = rat_to_f64(&c0);
    let lin: Vec<f64> = lin.iter().map(rat_to_f64).collect();
    let lin_norm_sq: f64 = lin.iter().map(|a| a * a).sum();
    if lin_norm_sq == 0.0 {
        return Err(Error::InvalidParameter("weight has no linear part".into()));
    }
    // anchor with w(anchor) = 1
    let anchor: Vec<f64> = lin.iter().map(|a| a * (1.0 - c0) / lin_norm_sq).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bumps = Vec::with_capacity(count);
    while bumps.len() < count {
        let center: Vec<f64> = anchor
            .iter()
            .map(|c| c + rng.gen_range(-0.4..0.4))
            .collect();
        let wc = c0
            + lin
                .iter()
                .zip(&center)
                .map(|(a, x)| a * x)
                .sum::<f64>();
        if wc < 0.3 {
            continue;
        }
        let mut radii: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.15..0.35)).collect();
        let spread: f64 = lin
            .iter()
            .zip(&radii)
            .map(|(a, r)| (a * r) * (a * r))
            .sum::<f64>()
            .sqrt();
        let budget = 0.8 * wc;
        if spread > budget {
            let shrink = budget / spread;
            for r in radii.iter_mut() {
                *r *= shrink;
            }
        }
        bumps.push(TestFunction::new(kind, center, radii)?);
    }
    Ok(bumps)
}

/// The five canonical built-in inequality instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinCase {
    H1Starshaped,
    H1HalfSpace,
    EngelStarshaped,
    EngelHalfSpace,
    GrushinHalfSpace,
}

impl BuiltinCase {
    pub fn all() -> [BuiltinCase; 5] {
        [
            BuiltinCase::H1Starshaped,
            BuiltinCase::H1HalfSpace,
            BuiltinCase::EngelStarshaped,
            BuiltinCase::EngelHalfSpace,
            BuiltinCase::GrushinHalfSpace,
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            BuiltinCase::H1Starshaped => "heisenberg.starshaped",
            BuiltinCase::H1HalfSpace => "heisenberg.halfspace",
            BuiltinCase::EngelStarshaped => "engel.starshaped",
            BuiltinCase::EngelHalfSpace => "engel.halfspace",
            BuiltinCase::GrushinHalfSpace => "grushin.halfspace",
        }
    }

    /// Instantiate at the given p and γ choice.
    pub fn spec(&self, p: f64, gamma: GammaChoice) -> Result<HardySpec> {
        match self {
            BuiltinCase::H1Starshaped => {
                let (frame, desc) = groups::make_heisenberg();
                let normal =
                    NormalSpec::starshaped(vec![rat(0, 1), rat(0, 1), rat(1, 1)])?;
                HardySpec::new(frame, Some(desc), normal, p, gamma)
            }
            BuiltinCase::H1HalfSpace => {
                let (frame, desc) = groups::make_heisenberg();
                let normal = NormalSpec::half_space(
                    vec![rat(0, 1), rat(0, 1), rat(1, 1)],
                    rat(0, 1),
                )?;
                HardySpec::new(frame, Some(desc), normal, p, gamma)
            }
            BuiltinCase::EngelStarshaped => {
                let (frame, desc) = groups::make_engel();
                let normal = NormalSpec::starshaped(vec![
                    rat(1, 2),
                    rat(1, 2),
                    rat(1, 2),
                    rat(1, 2),
                ])?;
                HardySpec::new(frame, Some(desc), normal, p, gamma)
            }
            BuiltinCase::EngelHalfSpace => {
                let (frame, desc) = groups::make_engel();
                let normal = NormalSpec::half_space(
                    vec![rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2)],
                    rat(0, 1),
                )?;
                HardySpec::new(frame, Some(desc), normal, p, gamma)
            }
            BuiltinCase::GrushinHalfSpace => {
                let frame = groups::make_grushin();
                let normal =
                    NormalSpec::half_space(vec![rat(1, 1), rat(0, 1)], rat(0, 1))?;
                HardySpec::new(frame, None, normal, p, gamma)
            }
        }
    }
}
