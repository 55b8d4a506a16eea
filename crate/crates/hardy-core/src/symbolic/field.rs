use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::compiled::CompiledField;
use super::poly::{MultiPoly, VarSet};
use super::{rat_to_f64, Rat};
use crate::{Error, Result};

/// Exponent of a [`ScalarField::Power`] node: either an exact rational
/// constant or an affine expression `slope·p + shift` in the distinguished
/// exponent symbol p (identified by its variable index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PowerExp {
    Const(Rat),
    AffineP {
        slope: Rat,
        shift: Rat,
        p_var: usize,
    },
}

impl PowerExp {
    pub fn int(k: i64) -> PowerExp {
        PowerExp::Const(Rat::from_integer(k.into()))
    }

    /// slope·p + shift with p at variable index `p_var`.
    pub fn affine_p(slope: Rat, shift: Rat, p_var: usize) -> PowerExp {
        PowerExp::AffineP {
            slope,
            shift,
            p_var,
        }
    }

    pub fn minus_one(&self) -> PowerExp {
        match self {
            PowerExp::Const(r) => PowerExp::Const(r - Rat::one()),
            PowerExp::AffineP {
                slope,
                shift,
                p_var,
            } => PowerExp::AffineP {
                slope: slope.clone(),
                shift: shift - Rat::one(),
                p_var: *p_var,
            },
        }
    }

    pub fn eval(&self, vals: &[f64]) -> f64 {
        match self {
            PowerExp::Const(r) => rat_to_f64(r),
            PowerExp::AffineP {
                slope,
                shift,
                p_var,
            } => rat_to_f64(slope) * vals[*p_var] + rat_to_f64(shift),
        }
    }

    fn substitute(&self, subs: &[(usize, Rat)]) -> PowerExp {
        match self {
            PowerExp::Const(_) => self.clone(),
            PowerExp::AffineP {
                slope,
                shift,
                p_var,
            } => match subs.iter().find(|(i, _)| i == p_var) {
                Some((_, value)) => PowerExp::Const(slope.clone() * value + shift.clone()),
                None => self.clone(),
            },
        }
    }

    /// The exponent as a polynomial coefficient field (used by the chain rule).
    fn as_field(&self, vars: &Arc<VarSet>) -> ScalarField {
        match self {
            PowerExp::Const(r) => ScalarField::Constant(r.clone()),
            PowerExp::AffineP {
                slope,
                shift,
                p_var,
            } => {
                let p = MultiPoly::var(vars, *p_var).expect("p index in range");
                let poly = p
                    .scale(slope)
                    .add(&MultiPoly::constant(vars, shift.clone()))
                    .expect("same vars");
                ScalarField::Poly(poly)
            }
        }
    }
}

impl fmt::Display for PowerExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PowerExp::Const(r) => write!(f, "{r}"),
            PowerExp::AffineP { slope, shift, .. } => {
                write!(f, "{slope}*p")?;
                if !shift.is_zero() {
                    if shift.is_negative() {
                        write!(f, " - {}", shift.abs())?;
                    } else {
                        write!(f, " + {shift}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Evaluable expression tree over polynomials: closed under sums, products
/// and real powers. Construction lightly canonicalizes (flattens nests,
/// drops exact zeros and ones), so two fields built the same way from equal
/// polynomials compare equal structurally.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarField {
    Poly(MultiPoly),
    Sum(Vec<ScalarField>),
    Product(Vec<ScalarField>),
    Power(Box<ScalarField>, PowerExp),
    Constant(Rat),
}

impl ScalarField {
    pub fn zero() -> ScalarField {
        ScalarField::Constant(Rat::zero())
    }

    pub fn one() -> ScalarField {
        ScalarField::Constant(Rat::one())
    }

    pub fn poly(p: MultiPoly) -> ScalarField {
        ScalarField::Poly(p)
    }

    pub fn constant(r: Rat) -> ScalarField {
        ScalarField::Constant(r)
    }

    pub fn is_exact_zero(&self) -> bool {
        match self {
            ScalarField::Constant(r) => r.is_zero(),
            ScalarField::Poly(p) => p.is_zero(),
            _ => false,
        }
    }

    fn is_exact_one(&self) -> bool {
        matches!(self, ScalarField::Constant(r) if r.is_one())
    }

    pub fn sum(terms: Vec<ScalarField>) -> ScalarField {
        let mut flat = Vec::new();
        for t in terms {
            match t {
                ScalarField::Sum(inner) => flat.extend(inner),
                t if t.is_exact_zero() => {}
                t => flat.push(t),
            }
        }
        match flat.len() {
            0 => ScalarField::zero(),
            1 => flat.pop().unwrap(),
            _ => ScalarField::Sum(flat),
        }
    }

    pub fn product(factors: Vec<ScalarField>) -> ScalarField {
        let mut flat = Vec::new();
        for t in factors {
            match t {
                ScalarField::Product(inner) => flat.extend(inner),
                t if t.is_exact_zero() => return ScalarField::zero(),
                t if t.is_exact_one() => {}
                t => flat.push(t),
            }
        }
        match flat.len() {
            0 => ScalarField::one(),
            1 => flat.pop().unwrap(),
            _ => ScalarField::Product(flat),
        }
    }

    pub fn power(base: ScalarField, exp: PowerExp) -> ScalarField {
        match &exp {
            PowerExp::Const(r) if r.is_zero() => ScalarField::one(),
            PowerExp::Const(r) if r.is_one() => base,
            _ => ScalarField::Power(Box::new(base), exp),
        }
    }

    /// First polynomial leaf's variable list, if any.
    pub fn vars(&self) -> Option<&Arc<VarSet>> {
        match self {
            ScalarField::Poly(p) => Some(p.vars()),
            ScalarField::Constant(_) => None,
            ScalarField::Sum(ts) | ScalarField::Product(ts) => ts.iter().find_map(|t| t.vars()),
            ScalarField::Power(b, _) => b.vars(),
        }
    }

    /// Evaluate at a full variable binding (slice aligned with the variable
    /// list). Fractional powers demand a strictly positive base; integer
    /// powers go through `powi`.
    pub fn evaluate(&self, vals: &[f64]) -> Result<f64> {
        match self {
            ScalarField::Constant(r) => Ok(rat_to_f64(r)),
            ScalarField::Poly(p) => p.eval_f64(vals),
            ScalarField::Sum(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.evaluate(vals)?;
                }
                Ok(acc)
            }
            ScalarField::Product(ts) => {
                let mut acc = 1.0;
                for t in ts {
                    acc *= t.evaluate(vals)?;
                }
                Ok(acc)
            }
            ScalarField::Power(base, exp) => {
                let b = base.evaluate(vals)?;
                let e = exp.eval(vals);
                if e.fract() == 0.0 && e.abs() < 2147483647.0 {
                    if b == 0.0 && e < 0.0 {
                        return Err(Error::Domain(
                            "negative integer power of zero base".into(),
                        ));
                    }
                    Ok(b.powi(e as i32))
                } else if b > 0.0 {
                    Ok(b.powf(e))
                } else {
                    Err(Error::Domain(format!(
                        "fractional power {e} of non-positive base {b}"
                    )))
                }
            }
        }
    }

    /// Exact symbolic derivative with respect to variable index `var`.
    /// Power nodes follow the chain rule with the exponent held constant in
    /// the coordinates: d (b^e) = e · b^(e−1) · db.
    pub fn differentiate(&self, var: usize) -> ScalarField {
        match self {
            ScalarField::Constant(_) => ScalarField::zero(),
            ScalarField::Poly(p) => {
                ScalarField::Poly(p.partial(var).expect("variable index in range"))
            }
            ScalarField::Sum(ts) => {
                ScalarField::sum(ts.iter().map(|t| t.differentiate(var)).collect())
            }
            ScalarField::Product(ts) => {
                let mut terms = Vec::new();
                for (i, _) in ts.iter().enumerate() {
                    let factors: Vec<ScalarField> = ts
                        .iter()
                        .enumerate()
                        .map(|(j, t)| {
                            if i == j {
                                t.differentiate(var)
                            } else {
                                t.clone()
                            }
                        })
                        .collect();
                    terms.push(ScalarField::product(factors));
                }
                ScalarField::sum(terms)
            }
            ScalarField::Power(base, exp) => {
                let db = base.differentiate(var);
                if db.is_exact_zero() {
                    return ScalarField::zero();
                }
                let vars = self
                    .vars()
                    .expect("power base with symbolic exponent has polynomial leaves")
                    .clone();
                ScalarField::product(vec![
                    exp.as_field(&vars),
                    ScalarField::power(base.as_ref().clone(), exp.minus_one()),
                    db,
                ])
            }
        }
    }

    /// Exact substitution of rational values for variables: polynomial
    /// leaves are bound and symbolic exponents mentioning a substituted
    /// variable collapse to rational constants.
    pub fn substitute_rats(&self, subs: &[(usize, Rat)]) -> ScalarField {
        match self {
            ScalarField::Constant(_) => self.clone(),
            ScalarField::Poly(p) => {
                let mut q = p.clone();
                for (idx, value) in subs {
                    q = q.substitute_rat(*idx, value).expect("index in range");
                }
                ScalarField::Poly(q)
            }
            ScalarField::Sum(ts) => {
                ScalarField::sum(ts.iter().map(|t| t.substitute_rats(subs)).collect())
            }
            ScalarField::Product(ts) => {
                ScalarField::product(ts.iter().map(|t| t.substitute_rats(subs)).collect())
            }
            ScalarField::Power(base, exp) => {
                ScalarField::power(base.substitute_rats(subs), exp.substitute(subs))
            }
        }
    }

    /// Lower to the fast evaluation form. Fails if a symbolic exponent is
    /// still unbound (bind p first via [`ScalarField::substitute_rats`]).
    pub fn compile(&self) -> Result<CompiledField> {
        CompiledField::from_field(self)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(r) => write!(f, "{r}"),
            ScalarField::Poly(p) => write!(f, "({p})"),
            ScalarField::Sum(ts) => {
                let parts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                write!(f, "({})", parts.join(" + "))
            }
            ScalarField::Product(ts) => {
                let parts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
                write!(f, "{}", parts.join("*"))
            }
            ScalarField::Power(b, e) => write!(f, "{b}^({e})"),
        }
    }
}

/// Whether a vector field's components are coefficients in the coordinate
/// basis ∂/∂x_j or in the frame (horizontal) basis X_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Coordinate,
    Horizontal,
}

/// A vector of scalar fields, tagged with the basis its components refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub components: Vec<ScalarField>,
    pub basis: Basis,
}

impl VectorField {
    pub fn horizontal(components: Vec<ScalarField>) -> VectorField {
        VectorField {
            components,
            basis: Basis::Horizontal,
        }
    }

    pub fn coordinate(components: Vec<ScalarField>) -> VectorField {
        VectorField {
            components,
            basis: Basis::Coordinate,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}
