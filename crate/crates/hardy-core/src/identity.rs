//! The exact identity suite: every closed-form computation behind the
//! built-in inequalities, decided by polynomial equality over ℚ. Each check
//! produces a named pass/fail with the symbolic residual on failure.

use crate::calculus::{horizontal_gradient, p_sublaplacian_factored};
use crate::groups::{commutator, make_engel, make_grushin, make_heisenberg, Frame, StratifiedDescriptor};
use crate::hardy::{symbolic_distance, symbolic_z_weight};
use crate::symbolic::{rat, rat_int, MultiPoly, Rat};
use crate::Result;

/// The frames the suite certifies. Kept as a value so tests can tamper with
/// a coefficient and watch the suite fail (negative control).
#[derive(Debug, Clone)]
pub struct FrameSet {
    pub heisenberg: (Frame, StratifiedDescriptor),
    pub engel: (Frame, StratifiedDescriptor),
    pub grushin: Frame,
}

impl FrameSet {
    pub fn standard() -> FrameSet {
        FrameSet {
            heisenberg: make_heisenberg(),
            engel: make_engel(),
            grushin: make_grushin(),
        }
    }
}

/// One named identity: `residual` is `None` on success, otherwise a printed
/// form of the nonzero residual.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: Option<String>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual.is_none()
    }
}

fn poly_eq(name: &str, got: &MultiPoly, expected: &MultiPoly) -> IdentityCheck {
    let residual = got.sub(expected).expect("same variable lists");
    IdentityCheck {
        name: name.to_string(),
        residual: if residual.is_zero() {
            None
        } else {
            Some(residual.to_string())
        },
    }
}

fn vector_eq(name: &str, got: &[MultiPoly], expected: &[MultiPoly]) -> IdentityCheck {
    for (i, (g, e)) in got.iter().zip(expected).enumerate() {
        let residual = g.sub(e).expect("same variable lists");
        if !residual.is_zero() {
            return IdentityCheck {
                name: name.to_string(),
                residual: Some(format!("component {}: {}", i + 1, residual)),
            };
        }
    }
    IdentityCheck {
        name: name.to_string(),
        residual: None,
    }
}

fn zero_poly(name: &str, got: &MultiPoly) -> IdentityCheck {
    IdentityCheck {
        name: name.to_string(),
        residual: if got.is_zero() {
            None
        } else {
            Some(got.to_string())
        },
    }
}

/// Run the whole suite against the given frames.
pub fn identity_suite(frames: &FrameSet) -> Result<Vec<IdentityCheck>> {
    let mut checks = Vec::new();

    let (h1, h1_desc) = &frames.heisenberg;
    let hv = h1.vars();
    let hvs = hv.set();
    let m = |c: Rat, exps: &[(usize, u32)]| MultiPoly::monomial(hvs, c, exps).expect("in range");

    // brackets
    {
        let got = commutator(h1, 0, 1)?;
        let expected = vec![
            MultiPoly::zero(hvs),
            MultiPoly::zero(hvs),
            MultiPoly::int(hvs, -4),
        ];
        checks.push(vector_eq("heisenberg.bracket_12", &got, &expected));
    }
    let (engel, engel_desc) = &frames.engel;
    let ev = engel.vars();
    let evs = ev.set();
    let me = |c: Rat, exps: &[(usize, u32)]| MultiPoly::monomial(evs, c, exps).expect("in range");
    let x3_field = {
        let got = commutator(engel, 0, 1)?;
        let expected = vec![
            MultiPoly::zero(evs),
            MultiPoly::zero(evs),
            MultiPoly::one(evs),
            me(rat(1, 2), &[(ev.x(0), 1)]),
        ];
        checks.push(vector_eq("engel.bracket_12_is_x3", &got, &expected));
        got
    };
    {
        // [X1, X3] component-wise: Σ_l (c_1l ∂_l X3_m − X3_l ∂_l c_1m)
        let mut got = Vec::new();
        for comp in 0..4 {
            let mut acc = MultiPoly::zero(evs);
            for l in 0..4 {
                acc = acc.add(&engel.coefficient(0, l).mul(&x3_field[comp].partial(l)?)?)?;
                acc = acc.sub(&x3_field[l].mul(&engel.coefficient(0, comp).partial(l)?)?)?;
            }
            got.push(acc);
        }
        let expected = vec![
            MultiPoly::zero(evs),
            MultiPoly::zero(evs),
            MultiPoly::zero(evs),
            MultiPoly::one(evs),
        ];
        checks.push(vector_eq("engel.bracket_13_is_x4", &got, &expected));
    }

    // Heisenberg starshaped weight: gradient and L_p ≡ 0
    {
        let zn = symbolic_z_weight(hv, h1_desc.weights());
        let grad = horizontal_gradient(h1, &zn)?;
        let expected = vec![
            m(rat_int(1), &[(hv.n(0), 1)]).add(&m(rat_int(4), &[(hv.x(1), 1), (hv.n(2), 1)]))?,
            m(rat_int(1), &[(hv.n(1), 1)]).add(&m(rat_int(-4), &[(hv.x(0), 1), (hv.n(2), 1)]))?,
        ];
        checks.push(vector_eq("heisenberg.starshaped.gradient", &grad, &expected));
        let fac = p_sublaplacian_factored(h1, &zn)?;
        checks.push(zero_poly("heisenberg.starshaped.Lp_zero", &fac.q_poly));
    }

    // Heisenberg half-space distance: gradient and L_p ≡ 0
    {
        let dist = symbolic_distance(hv);
        let grad = horizontal_gradient(h1, &dist)?;
        let expected = vec![
            m(rat_int(1), &[(hv.n(0), 1)]).add(&m(rat_int(2), &[(hv.x(1), 1), (hv.n(2), 1)]))?,
            m(rat_int(1), &[(hv.n(1), 1)]).add(&m(rat_int(-2), &[(hv.x(0), 1), (hv.n(2), 1)]))?,
        ];
        checks.push(vector_eq("heisenberg.halfspace.gradient", &grad, &expected));
        let fac = p_sublaplacian_factored(h1, &dist)?;
        checks.push(zero_poly("heisenberg.halfspace.Lp_zero", &fac.q_poly));
    }

    // Engel starshaped weight: gradient and L at p = 2
    {
        let zn = symbolic_z_weight(ev, engel_desc.weights());
        let grad = horizontal_gradient(engel, &zn)?;
        let g1 = me(rat_int(1), &[(ev.n(0), 1)])
            .add(&me(rat_int(-1), &[(ev.x(1), 1), (ev.n(2), 1)]))?
            .add(&me(rat(-3, 2), &[(ev.x(2), 1), (ev.n(3), 1)]))?
            .add(&me(rat(-1, 4), &[(ev.x(0), 1), (ev.x(1), 1), (ev.n(3), 1)]))?;
        let g2 = me(rat_int(1), &[(ev.n(1), 1)])
            .add(&me(rat_int(1), &[(ev.x(0), 1), (ev.n(2), 1)]))?
            .add(&me(rat(1, 4), &[(ev.x(0), 2), (ev.n(3), 1)]))?;
        checks.push(vector_eq("engel.starshaped.gradient", &grad, &[g1, g2]));
        // L⟨Z,n⟩ = x2 n4 / 2 at p = 2, cross-multiplied:
        // q|_{p=2} = |∇⟨Z,n⟩|² · x2 n4 / 2
        let fac = p_sublaplacian_factored(engel, &zn)?;
        let closed = me(rat(1, 2), &[(ev.x(1), 1), (ev.n(3), 1)]);
        checks.push(poly_eq(
            "engel.starshaped.L2_closed_form",
            &fac.q_at_p(&rat_int(2)),
            &fac.norm_sq.mul(&closed)?,
        ));
    }

    // Engel half-space distance: gradient and L at p = 2
    {
        let dist = symbolic_distance(ev);
        let grad = horizontal_gradient(engel, &dist)?;
        let g1 = me(rat_int(1), &[(ev.n(0), 1)])
            .add(&me(rat(-1, 2), &[(ev.x(1), 1), (ev.n(2), 1)]))?
            .add(&me(rat(-1, 2), &[(ev.x(2), 1), (ev.n(3), 1)]))?
            .add(&me(rat(-1, 12), &[(ev.x(0), 1), (ev.x(1), 1), (ev.n(3), 1)]))?;
        let g2 = me(rat_int(1), &[(ev.n(1), 1)])
            .add(&me(rat(1, 2), &[(ev.x(0), 1), (ev.n(2), 1)]))?
            .add(&me(rat(1, 12), &[(ev.x(0), 2), (ev.n(3), 1)]))?;
        checks.push(vector_eq("engel.halfspace.gradient", &grad, &[g1, g2]));
        let fac = p_sublaplacian_factored(engel, &dist)?;
        let closed = me(rat(1, 6), &[(ev.x(1), 1), (ev.n(3), 1)]);
        checks.push(poly_eq(
            "engel.halfspace.L2_closed_form",
            &fac.q_at_p(&rat_int(2)),
            &fac.norm_sq.mul(&closed)?,
        ));
    }

    // Grushin half-space distance: gradient and L_p closed form for all p
    {
        let grushin = &frames.grushin;
        let gv = grushin.vars();
        let gvs = gv.set();
        let mg =
            |c: Rat, exps: &[(usize, u32)]| MultiPoly::monomial(gvs, c, exps).expect("in range");
        let dist = symbolic_distance(gv);
        let grad = horizontal_gradient(grushin, &dist)?;
        let expected = vec![
            mg(rat_int(1), &[(gv.n(0), 1)]),
            mg(rat_int(1), &[(gv.x(0), 1), (gv.n(1), 1)]),
        ];
        checks.push(vector_eq("grushin.halfspace.gradient", &grad, &expected));
        // L_p dist = (p−2)|∇dist|^{p−4} n1 n2² x1: exactly
        // q_poly = (p−2)·n1·n2²·x1
        let fac = p_sublaplacian_factored(grushin, &dist)?;
        let p_minus_two = MultiPoly::var(gvs, gv.p())?.sub(&MultiPoly::int(gvs, 2))?;
        let closed =
            p_minus_two.mul(&mg(rat_int(1), &[(gv.n(0), 1), (gv.n(1), 2), (gv.x(0), 1)]))?;
        checks.push(poly_eq("grushin.halfspace.Lp_closed_form", &fac.q_poly, &closed));
    }

    // group-law sanity
    for (name, desc) in [
        ("heisenberg.grouplaw", h1_desc),
        ("engel.grouplaw", engel_desc),
    ] {
        let law = desc.group_law().expect("built-in groups carry laws");
        let dim = law.dim();
        let lv = law.vars();
        let xs: Vec<MultiPoly> = (0..dim)
            .map(|i| MultiPoly::var(lv, i).expect("in range"))
            .collect();
        // x ∘ (−x) = 0
        {
            let images: Vec<MultiPoly> =
                xs.iter().cloned().chain(xs.iter().map(MultiPoly::neg)).collect();
            let mut residual_name = None;
            for comp in law.components() {
                let composed = comp.compose(&images)?;
                if !composed.is_zero() {
                    residual_name = Some(composed.to_string());
                    break;
                }
            }
            checks.push(IdentityCheck {
                name: format!("{name}.inverse_is_negation"),
                residual: residual_name,
            });
        }
        // x ∘ 0 = x
        {
            let images: Vec<MultiPoly> = xs
                .iter()
                .cloned()
                .chain((0..dim).map(|_| MultiPoly::zero(lv)))
                .collect();
            let mut residual = None;
            for (i, comp) in law.components().iter().enumerate() {
                let composed = comp.compose(&images)?;
                let diff = composed.sub(&xs[i])?;
                if !diff.is_zero() {
                    residual = Some(diff.to_string());
                    break;
                }
            }
            checks.push(IdentityCheck {
                name: format!("{name}.identity_element"),
                residual,
            });
        }
    }

    Ok(checks)
}
