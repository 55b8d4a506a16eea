//! Horizontal calculus along a frame: X_k derivatives, gradient, divergence,
//! and the p-sub-Laplacian L_p w = ∇_X·(|∇_X w|^{p−2} ∇_X w).
//!
//! For polynomial w the operator is kept in the factored form
//! |∇_X w|^{p−4} · Q with Q an exact polynomial, affine in the symbol p, so
//! every closed-form identity (L_p w ≡ 0, L_p w = closed form) is decided by
//! polynomial equality rather than floating point.

use crate::groups::Frame;
use crate::symbolic::{rat, rat_from_f64, MultiPoly, PowerExp, Rat, ScalarField};
use crate::{Error, Result};

fn check_frame_poly(frame: &Frame, w: &MultiPoly) -> Result<()> {
    if w.vars() != frame.vars().set() {
        return Err(Error::VarMismatch(
            "polynomial variables".into(),
            "frame variable layout".into(),
        ));
    }
    Ok(())
}

/// X_k w as an exact polynomial: Σ_j c_kj ∂w/∂x_j.
pub fn apply_field(frame: &Frame, k: usize, w: &MultiPoly) -> Result<MultiPoly> {
    check_frame_poly(frame, w)?;
    if k >= frame.horizontal_count() {
        return Err(Error::IndexOutOfRange(k, frame.horizontal_count()));
    }
    let mut acc = MultiPoly::zero(w.vars());
    for j in 0..frame.dim() {
        acc = acc.add(&frame.coefficient(k, j).mul(&w.partial(j)?)?)?;
    }
    Ok(acc)
}

/// Exact horizontal gradient (X₁w, …, X_N w).
pub fn horizontal_gradient(frame: &Frame, w: &MultiPoly) -> Result<Vec<MultiPoly>> {
    (0..frame.horizontal_count())
        .map(|k| apply_field(frame, k, w))
        .collect()
}

/// Exact horizontal divergence Σ_k X_k F_k of an N-component field.
pub fn horizontal_divergence(frame: &Frame, components: &[MultiPoly]) -> Result<MultiPoly> {
    if components.len() != frame.horizontal_count() {
        return Err(Error::ArityMismatch {
            expected: frame.horizontal_count(),
            got: components.len(),
        });
    }
    let mut acc = MultiPoly::zero(frame.vars().set());
    for (k, f) in components.iter().enumerate() {
        acc = acc.add(&apply_field(frame, k, f)?)?;
    }
    Ok(acc)
}

/// L_p w of a polynomial w, held as |∇_X w|^{p−4} · q_poly with
/// q_poly = |∇_X w|²·Σ_k X_k g_k + ((p−2)/2)·Σ_k g_k X_k(|∇_X w|²) exact
/// and affine in the symbol p. q_poly ≡ 0 certifies L_p w ≡ 0 for all p.
#[derive(Debug, Clone)]
pub struct FactoredLp {
    pub gradient: Vec<MultiPoly>,
    pub norm_sq: MultiPoly,
    pub q_poly: MultiPoly,
    p_var: usize,
}

impl FactoredLp {
    /// True iff L_p w vanishes identically in x, n, d and p.
    pub fn is_identically_zero(&self) -> bool {
        self.q_poly.is_zero()
    }

    /// q_poly with the exponent symbol bound to a rational value.
    pub fn q_at_p(&self, p: &Rat) -> MultiPoly {
        self.q_poly
            .substitute_rat(self.p_var, p)
            .expect("p index in range")
    }

    /// Numeric value of L_p w at a full variable binding (p read from its
    /// slot). Only valid where |∇_X w| > 0.
    pub fn eval(&self, vals: &[f64]) -> Result<f64> {
        let ns = self.norm_sq.eval_f64(vals)?;
        let q = self.q_poly.eval_f64(vals)?;
        if q == 0.0 {
            return Ok(0.0);
        }
        if ns <= 0.0 {
            return Err(Error::Domain(
                "factored p-sub-Laplacian evaluated where the horizontal gradient vanishes"
                    .into(),
            ));
        }
        let p = vals[self.p_var];
        Ok(ns.powf((p - 4.0) / 2.0) * q)
    }
}

/// Exact factored p-sub-Laplacian of a polynomial.
pub fn p_sublaplacian_factored(frame: &Frame, w: &MultiPoly) -> Result<FactoredLp> {
    check_frame_poly(frame, w)?;
    let gradient = horizontal_gradient(frame, w)?;
    let vars = w.vars();
    let mut norm_sq = MultiPoly::zero(vars);
    for g in &gradient {
        norm_sq = norm_sq.add(&g.mul(g)?)?;
    }
    // Σ_k X_k g_k and Σ_k g_k X_k(norm_sq)
    let mut div_grad = MultiPoly::zero(vars);
    let mut grad_dot = MultiPoly::zero(vars);
    for (k, g) in gradient.iter().enumerate() {
        div_grad = div_grad.add(&apply_field(frame, k, g)?)?;
        grad_dot = grad_dot.add(&g.mul(&apply_field(frame, k, &norm_sq)?)?)?;
    }
    let p_var = frame.vars().p();
    let half_p_minus_two = MultiPoly::var(vars, p_var)?
        .scale(&rat(1, 2))
        .add(&MultiPoly::constant(vars, rat(-1, 1)))?;
    let q_poly = norm_sq
        .mul(&div_grad)?
        .add(&half_p_minus_two.mul(&grad_dot)?)?;
    Ok(FactoredLp {
        gradient,
        norm_sq,
        q_poly,
        p_var,
    })
}

/// X_k applied to an expression tree: Σ_j c_kj · ∂_j w.
pub fn apply_field_expr(frame: &Frame, k: usize, w: &ScalarField) -> ScalarField {
    let terms = (0..frame.dim())
        .map(|j| {
            ScalarField::product(vec![
                ScalarField::poly(frame.coefficient(k, j).clone()),
                w.differentiate(j),
            ])
        })
        .collect();
    ScalarField::sum(terms)
}

/// Horizontal gradient of an expression tree.
pub fn horizontal_gradient_expr(frame: &Frame, w: &ScalarField) -> Vec<ScalarField> {
    (0..frame.horizontal_count())
        .map(|k| apply_field_expr(frame, k, w))
        .collect()
}

/// Horizontal divergence of an N-component expression-tree field.
pub fn horizontal_divergence_expr(frame: &Frame, components: &[ScalarField]) -> Result<ScalarField> {
    if components.len() != frame.horizontal_count() {
        return Err(Error::ArityMismatch {
            expected: frame.horizontal_count(),
            got: components.len(),
        });
    }
    Ok(ScalarField::sum(
        components
            .iter()
            .enumerate()
            .map(|(k, f)| apply_field_expr(frame, k, f))
            .collect(),
    ))
}

/// L_p w as an expression tree with the exponent symbolic in p:
/// Σ_k X_k((Σ g²)^{(p−2)/2} · g_k).
pub fn p_sublaplacian_expr(frame: &Frame, w: &ScalarField) -> ScalarField {
    let p_var = frame.vars().p();
    let grad = horizontal_gradient_expr(frame, w);
    let norm_sq = ScalarField::sum(
        grad.iter()
            .map(|g| ScalarField::product(vec![g.clone(), g.clone()]))
            .collect(),
    );
    let weighted: Vec<ScalarField> = grad
        .iter()
        .map(|g| {
            ScalarField::product(vec![
                ScalarField::power(
                    norm_sq.clone(),
                    PowerExp::affine_p(rat(1, 2), rat(-1, 1), p_var),
                ),
                g.clone(),
            ])
        })
        .collect();
    horizontal_divergence_expr(frame, &weighted).expect("component count matches")
}

/// Value of L_p w at a point via exact expression-tree differentiation and
/// evaluation. `vals` binds every variable; the p slot is overwritten with
/// the given p.
pub fn p_sublaplacian_numeric(
    frame: &Frame,
    w: &ScalarField,
    p: f64,
    vals: &[f64],
) -> Result<f64> {
    let mut vals = vals.to_vec();
    vals[frame.vars().p()] = p;
    if p < 2.0 {
        let grad = horizontal_gradient_expr(frame, w);
        let mut norm_sq = 0.0;
        for g in &grad {
            let v = g.evaluate(&vals)?;
            norm_sq += v * v;
        }
        if norm_sq <= 0.0 {
            return Err(Error::Domain(
                "p < 2 with vanishing horizontal gradient at the evaluation point".into(),
            ));
        }
    }
    p_sublaplacian_expr(frame, w).evaluate(&vals)
}

/// The distance-quotient field g = γ |∇_X w|^{p−2} ∇_X w / w^{p−1} as an
/// expression-tree vector (horizontal components). Only evaluable where
/// w > 0.
pub fn distance_quotient_field(
    frame: &Frame,
    w: &MultiPoly,
    gamma: f64,
) -> Result<Vec<ScalarField>> {
    check_frame_poly(frame, w)?;
    let p_var = frame.vars().p();
    let grad = horizontal_gradient(frame, w)?;
    let mut norm_sq = MultiPoly::zero(w.vars());
    for g in &grad {
        norm_sq = norm_sq.add(&g.mul(g)?)?;
    }
    Ok(grad
        .into_iter()
        .map(|g| {
            ScalarField::product(vec![
                ScalarField::constant(rat_from_f64(gamma)),
                ScalarField::power(
                    ScalarField::poly(norm_sq.clone()),
                    PowerExp::affine_p(rat(1, 2), rat(-1, 1), p_var),
                ),
                ScalarField::poly(g),
                ScalarField::power(
                    ScalarField::poly(w.clone()),
                    PowerExp::affine_p(rat(-1, 1), rat(1, 1), p_var),
                ),
            ])
        })
        .collect())
}

/// Check the divergence identity
/// div_X g = γ L_p w / w^{p−1} − γ(p−1)|∇_X w|^p / w^p
/// for g = γ|∇_X w|^{p−2}∇_X w / w^{p−1}, numerically at the given points
/// (each point binds x, n, d; w > 0 and |∇_X w| > 0 required). Returns the
/// maximum absolute residual.
pub fn divergence_identity_check(
    frame: &Frame,
    w: &MultiPoly,
    p: f64,
    gamma: f64,
    points: &[Vec<f64>],
) -> Result<f64> {
    check_frame_poly(frame, w)?;
    let g = distance_quotient_field(frame, w, gamma)?;
    let div_g = horizontal_divergence_expr(frame, &g)?;
    let fac = p_sublaplacian_factored(frame, w)?;
    let p_var = frame.vars().p();
    let mut max_residual: f64 = 0.0;
    for point in points {
        let mut vals = point.clone();
        if vals.len() != frame.vars().set().len() {
            return Err(Error::ArityMismatch {
                expected: frame.vars().set().len(),
                got: vals.len(),
            });
        }
        vals[p_var] = p;
        let w_val = w.eval_f64(&vals)?;
        let ns_val = fac.norm_sq.eval_f64(&vals)?;
        if w_val <= 0.0 || ns_val <= 0.0 {
            return Err(Error::Domain(format!(
                "singular test point: w = {w_val}, |grad|^2 = {ns_val}"
            )));
        }
        let lhs = div_g.evaluate(&vals)?;
        let lp = fac.eval(&vals)?;
        let rhs = gamma * lp / w_val.powf(p - 1.0)
            - gamma * (p - 1.0) * ns_val.powf(p / 2.0) / w_val.powf(p);
        max_residual = max_residual.max((lhs - rhs).abs());
    }
    Ok(max_residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{make_engel, make_grushin, make_heisenberg};
    use crate::symbolic::{rat_int, HardyVars};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn mono(hv: &HardyVars, c: Rat, exps: &[(usize, u32)]) -> MultiPoly {
        MultiPoly::monomial(hv.set(), c, exps).unwrap()
    }

    /// ⟨x, n⟩ − d with symbolic n and d.
    fn sym_dist(hv: &HardyVars) -> MultiPoly {
        let mut w = MultiPoly::var(hv.set(), hv.d()).unwrap().neg();
        for i in 0..hv.dim() {
            w = w
                .add(&mono(hv, rat_int(1), &[(hv.x(i), 1), (hv.n(i), 1)]))
                .unwrap();
        }
        w
    }

    /// Σ w_i x_i n_i with symbolic n, given dilation weights.
    fn sym_zn(hv: &HardyVars, weights: &[u32]) -> MultiPoly {
        let mut w = MultiPoly::zero(hv.set());
        for i in 0..hv.dim() {
            w = w
                .add(&mono(
                    hv,
                    rat_int(weights[i] as i64),
                    &[(hv.x(i), 1), (hv.n(i), 1)],
                ))
                .unwrap();
        }
        w
    }

    #[test]
    fn heisenberg_gradients_match_displayed_formulas() {
        let (frame, desc) = make_heisenberg();
        let hv = frame.vars();
        // starshaped weight ⟨Z, n⟩: gradient (n1 + 4 x2 n3, n2 − 4 x1 n3)
        let zn = sym_zn(hv, desc.weights());
        let grad = horizontal_gradient(&frame, &zn).unwrap();
        let g1 = mono(hv, rat_int(1), &[(hv.n(0), 1)])
            .add(&mono(hv, rat_int(4), &[(hv.x(1), 1), (hv.n(2), 1)]))
            .unwrap();
        let g2 = mono(hv, rat_int(1), &[(hv.n(1), 1)])
            .add(&mono(hv, rat_int(-4), &[(hv.x(0), 1), (hv.n(2), 1)]))
            .unwrap();
        assert_eq!(grad, vec![g1, g2]);
        // half-space distance: gradient (n1 + 2 x2 n3, n2 − 2 x1 n3)
        let dist = sym_dist(hv);
        let grad = horizontal_gradient(&frame, &dist).unwrap();
        let g1 = mono(hv, rat_int(1), &[(hv.n(0), 1)])
            .add(&mono(hv, rat_int(2), &[(hv.x(1), 1), (hv.n(2), 1)]))
            .unwrap();
        let g2 = mono(hv, rat_int(1), &[(hv.n(1), 1)])
            .add(&mono(hv, rat_int(-2), &[(hv.x(0), 1), (hv.n(2), 1)]))
            .unwrap();
        assert_eq!(grad, vec![g1, g2]);
    }

    #[test]
    fn grushin_and_engel_gradients() {
        let grushin = make_grushin();
        let gv = grushin.vars();
        let dist = sym_dist(gv);
        let grad = horizontal_gradient(&grushin, &dist).unwrap();
        assert_eq!(grad[0], mono(gv, rat_int(1), &[(gv.n(0), 1)]));
        assert_eq!(
            grad[1],
            mono(gv, rat_int(1), &[(gv.x(0), 1), (gv.n(1), 1)])
        );

        let (engel, edesc) = make_engel();
        let ev = engel.vars();
        // half-space distance gradient:
        // (n1 − x2 n3/2 − x3 n4/2 − x1 x2 n4/12, n2 + x1 n3/2 + x1² n4/12)
        let dist = sym_dist(ev);
        let grad = horizontal_gradient(&engel, &dist).unwrap();
        let g1 = mono(ev, rat_int(1), &[(ev.n(0), 1)])
            .add(&mono(ev, rat(-1, 2), &[(ev.x(1), 1), (ev.n(2), 1)]))
            .unwrap()
            .add(&mono(ev, rat(-1, 2), &[(ev.x(2), 1), (ev.n(3), 1)]))
            .unwrap()
            .add(&mono(
                ev,
                rat(-1, 12),
                &[(ev.x(0), 1), (ev.x(1), 1), (ev.n(3), 1)],
            ))
            .unwrap();
        let g2 = mono(ev, rat_int(1), &[(ev.n(1), 1)])
            .add(&mono(ev, rat(1, 2), &[(ev.x(0), 1), (ev.n(2), 1)]))
            .unwrap()
            .add(&mono(ev, rat(1, 12), &[(ev.x(0), 2), (ev.n(3), 1)]))
            .unwrap();
        assert_eq!(grad, vec![g1, g2]);
        // starshaped weight gradient:
        // (n1 − x2 n3 − 3 x3 n4/2 − x1 x2 n4/4, n2 + x1 n3 + x1² n4/4)
        let zn = sym_zn(ev, edesc.weights());
        let grad = horizontal_gradient(&engel, &zn).unwrap();
        let g1 = mono(ev, rat_int(1), &[(ev.n(0), 1)])
            .add(&mono(ev, rat_int(-1), &[(ev.x(1), 1), (ev.n(2), 1)]))
            .unwrap()
            .add(&mono(ev, rat(-3, 2), &[(ev.x(2), 1), (ev.n(3), 1)]))
            .unwrap()
            .add(&mono(
                ev,
                rat(-1, 4),
                &[(ev.x(0), 1), (ev.x(1), 1), (ev.n(3), 1)],
            ))
            .unwrap();
        let g2 = mono(ev, rat_int(1), &[(ev.n(1), 1)])
            .add(&mono(ev, rat_int(1), &[(ev.x(0), 1), (ev.n(2), 1)]))
            .unwrap()
            .add(&mono(ev, rat(1, 4), &[(ev.x(0), 2), (ev.n(3), 1)]))
            .unwrap();
        assert_eq!(grad, vec![g1, g2]);
    }

    #[test]
    fn divergence_basics() {
        let (h1, _) = make_heisenberg();
        let hv = h1.vars();
        let x1 = MultiPoly::var(hv.set(), hv.x(0)).unwrap();
        let x2 = MultiPoly::var(hv.set(), hv.x(1)).unwrap();
        assert!(horizontal_divergence(&h1, &[x2.clone(), x1.neg()])
            .unwrap()
            .is_zero());
        assert_eq!(
            horizontal_divergence(&h1, &[x1, x2]).unwrap(),
            MultiPoly::int(hv.set(), 2)
        );
        // Engel: div of ∇_H⟨Z,n⟩ is x2 n4 / 2
        let (engel, edesc) = make_engel();
        let ev = engel.vars();
        let zn = sym_zn(ev, edesc.weights());
        let grad = horizontal_gradient(&engel, &zn).unwrap();
        assert_eq!(
            horizontal_divergence(&engel, &grad).unwrap(),
            mono(ev, rat(1, 2), &[(ev.x(1), 1), (ev.n(3), 1)])
        );
        // arity mismatch
        assert!(horizontal_divergence(&engel, &grad[..1]).is_err());
    }

    #[test]
    fn factored_lp_certificates() {
        let (h1, hdesc) = make_heisenberg();
        let hv = h1.vars();
        // q ≡ 0 for the starshaped weight and for the half-space distance
        let zn = sym_zn(hv, hdesc.weights());
        assert!(p_sublaplacian_factored(&h1, &zn)
            .unwrap()
            .is_identically_zero());
        let dist = sym_dist(hv);
        assert!(p_sublaplacian_factored(&h1, &dist)
            .unwrap()
            .is_identically_zero());
        // Grushin: q = (p − 2) n1 n2² x1 exactly
        let grushin = make_grushin();
        let gv = grushin.vars();
        let fac = p_sublaplacian_factored(&grushin, &sym_dist(gv)).unwrap();
        let p_minus_two = MultiPoly::var(gv.set(), gv.p())
            .unwrap()
            .sub(&MultiPoly::int(gv.set(), 2))
            .unwrap();
        let expected = p_minus_two
            .mul(&mono(
                gv,
                rat_int(1),
                &[(gv.n(0), 1), (gv.n(1), 2), (gv.x(0), 1)],
            ))
            .unwrap();
        assert_eq!(fac.q_poly, expected);
    }

    #[test]
    fn engel_l2_closed_forms_via_cross_multiplication() {
        // At p = 2 the factored form reads norm_sq^{-1}·q, so the closed
        // forms L⟨Z,n⟩ = x2 n4/2 and L dist = x2 n4/6 are the exact
        // identities q|_{p=2} = norm_sq · closed_form.
        let (engel, edesc) = make_engel();
        let ev = engel.vars();
        let cases = [
            (sym_zn(ev, edesc.weights()), rat(1, 2)),
            (sym_dist(ev), rat(1, 6)),
        ];
        for (w, coef) in cases {
            let fac = p_sublaplacian_factored(&engel, &w).unwrap();
            let closed = mono(ev, coef, &[(ev.x(1), 1), (ev.n(3), 1)]);
            assert_eq!(
                fac.q_at_p(&rat_int(2)),
                fac.norm_sq.mul(&closed).unwrap()
            );
        }
    }

    #[test]
    fn q_poly_at_p2_reduces_to_plain_sublaplacian() {
        // q|_{p=2} = norm_sq · Σ X_k g_k for arbitrary polynomial w
        let (h1, _) = make_heisenberg();
        let hv = h1.vars();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut w = MultiPoly::zero(hv.set());
            for _ in 0..6 {
                let exps: Vec<(usize, u32)> = (0..3)
                    .map(|i| (hv.x(i), rng.gen_range(0..3u32)))
                    .collect();
                w = w
                    .add(&mono(hv, rat_int(rng.gen_range(-5i64..=5)), &exps))
                    .unwrap();
            }
            let fac = p_sublaplacian_factored(&h1, &w).unwrap();
            let grad = horizontal_gradient(&h1, &w).unwrap();
            let div_grad = horizontal_divergence(&h1, &grad).unwrap();
            assert_eq!(
                fac.q_at_p(&rat_int(2)),
                fac.norm_sq.mul(&div_grad).unwrap()
            );
        }
    }

    #[test]
    fn product_rule_and_linearity() {
        let frames = [make_heisenberg().0, make_engel().0, make_grushin()];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for frame in &frames {
            let hv = frame.vars();
            let n_fields = frame.horizontal_count();
            let rand_poly = |rng: &mut ChaCha8Rng| {
                let mut w = MultiPoly::zero(hv.set());
                for _ in 0..5 {
                    let exps: Vec<(usize, u32)> = (0..hv.dim())
                        .map(|i| (hv.x(i), rng.gen_range(0..2u32)))
                        .collect();
                    w = w
                        .add(&mono(hv, rat_int(rng.gen_range(-4i64..=4)), &exps))
                        .unwrap();
                }
                w
            };
            for _ in 0..50 {
                let phi = rand_poly(&mut rng);
                let f: Vec<MultiPoly> = (0..n_fields).map(|_| rand_poly(&mut rng)).collect();
                // div(φF) = ⟨∇φ, F⟩ + φ div F
                let scaled: Vec<MultiPoly> =
                    f.iter().map(|c| phi.mul(c).unwrap()).collect();
                let lhs = horizontal_divergence(frame, &scaled).unwrap();
                let grad_phi = horizontal_gradient(frame, &phi).unwrap();
                let mut rhs = phi
                    .mul(&horizontal_divergence(frame, &f).unwrap())
                    .unwrap();
                for (gp, fc) in grad_phi.iter().zip(&f) {
                    rhs = rhs.add(&gp.mul(fc).unwrap()).unwrap();
                }
                assert_eq!(lhs, rhs);
                // linearity over rational scalars
                let a = rat(3, 7);
                let b = rat(-5, 2);
                let psi = rand_poly(&mut rng);
                let combo = phi.scale(&a).add(&psi.scale(&b)).unwrap();
                let lhs_grad = horizontal_gradient(frame, &combo).unwrap();
                for (k, g) in lhs_grad.iter().enumerate() {
                    let expected = apply_field(frame, k, &phi)
                        .unwrap()
                        .scale(&a)
                        .add(&apply_field(frame, k, &psi).unwrap().scale(&b))
                        .unwrap();
                    assert_eq!(g, &expected);
                }
            }
        }
    }

    fn random_vals(
        hv: &HardyVars,
        rng: &mut ChaCha8Rng,
        x_lo: f64,
        x_hi: f64,
    ) -> Vec<f64> {
        let mut vals = vec![0.0; hv.set().len()];
        for i in 0..hv.dim() {
            vals[hv.x(i)] = rng.gen_range(x_lo..x_hi);
            vals[hv.n(i)] = rng.gen_range(-1.0..1.0);
        }
        vals[hv.d()] = rng.gen_range(-0.5..0.5);
        vals
    }

    #[test]
    fn factored_eval_matches_numeric_path() {
        let cases: Vec<(Frame, Vec<u32>)> = vec![
            (make_heisenberg().0, vec![1, 1, 2]),
            (make_engel().0, vec![1, 1, 2, 3]),
            (make_grushin(), vec![1, 1]),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (frame, weights) in &cases {
            let hv = frame.vars();
            for w in [sym_dist(hv), sym_zn(hv, weights)] {
                let fac = p_sublaplacian_factored(frame, &w).unwrap();
                let w_expr = ScalarField::poly(w.clone());
                let mut checked = 0;
                while checked < 100 {
                    let mut vals = random_vals(hv, &mut rng, 0.2, 2.0);
                    let p = [1.5, 2.0, 2.5, 3.0][rng.gen_range(0..4)];
                    vals[hv.p()] = p;
                    if fac.norm_sq.eval_f64(&vals).unwrap() < 1e-6 {
                        continue;
                    }
                    let direct = fac.eval(&vals).unwrap();
                    let numeric =
                        p_sublaplacian_numeric(frame, &w_expr, p, &vals).unwrap();
                    assert!(
                        (direct - numeric).abs() <= 1e-9 * direct.abs().max(1.0),
                        "{} vs {} (frame {})",
                        direct,
                        numeric,
                        frame.name()
                    );
                    checked += 1;
                }
            }
        }
    }

    #[test]
    fn engel_numeric_l2_of_distance() {
        // L dist = x2 n4 / 6 at p = 2, any point
        let (engel, _) = make_engel();
        let ev = engel.vars();
        let dist = ScalarField::poly(sym_dist(ev));
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let vals = random_vals(ev, &mut rng, -2.0, 2.0);
            let got = p_sublaplacian_numeric(&engel, &dist, 2.0, &vals).unwrap();
            let expected = vals[ev.x(1)] * vals[ev.n(3)] / 6.0;
            assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        }
        // constant horizontal gradient ⇒ L_p w = 0
        let (h1, _) = make_heisenberg();
        let hv = h1.vars();
        let w = ScalarField::poly(
            mono(hv, rat_int(3), &[(hv.x(0), 1)])
                .add(&mono(hv, rat_int(-2), &[(hv.x(1), 1)]))
                .unwrap(),
        );
        let mut vals = vec![0.7; hv.set().len()];
        vals[hv.p()] = 2.5;
        assert!(p_sublaplacian_numeric(&h1, &w, 2.5, &vals).unwrap().abs() < 1e-12);
    }

    #[test]
    fn divergence_identity_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        // Heisenberg half-space with n = (0,0,1), d = 0: points in x3 > 0.1
        let (h1, _) = make_heisenberg();
        let hv = h1.vars();
        let dist = sym_dist(hv);
        let mut points = Vec::new();
        for _ in 0..50 {
            let mut vals = vec![0.0; hv.set().len()];
            vals[hv.x(0)] = rng.gen_range(-1.0..1.0);
            vals[hv.x(1)] = rng.gen_range(-1.0..1.0);
            vals[hv.x(2)] = rng.gen_range(0.1..2.0);
            vals[hv.n(2)] = 1.0;
            points.push(vals);
        }
        let res = divergence_identity_check(&h1, &dist, 2.0, -0.5, &points).unwrap();
        assert!(res < 1e-8, "residual {res}");
        // γ = 0 makes both sides vanish
        let res0 = divergence_identity_check(&h1, &dist, 2.0, 0.0, &points).unwrap();
        assert_eq!(res0, 0.0);
        // Grushin, p = 2, points with x1 ≠ 0
        let grushin = make_grushin();
        let gv = grushin.vars();
        let gdist = sym_dist(gv);
        let mut gpoints = Vec::new();
        for _ in 0..50 {
            let mut vals = vec![0.0; gv.set().len()];
            vals[gv.x(0)] = rng.gen_range(0.3..2.0);
            vals[gv.x(1)] = rng.gen_range(-1.0..1.0);
            vals[gv.n(0)] = 1.0;
            vals[gv.n(1)] = 0.5;
            vals[gv.d()] = -0.5;
            gpoints.push(vals);
        }
        let res = divergence_identity_check(&grushin, &gdist, 2.0, -0.5, &gpoints).unwrap();
        assert!(res < 1e-8, "residual {res}");
        // singular points are rejected
        let mut singular = vec![0.0; gv.set().len()];
        singular[gv.n(0)] = 1.0;
        assert!(
            divergence_identity_check(&grushin, &gdist, 2.0, -0.5, &[singular]).is_err()
        );
    }
}
