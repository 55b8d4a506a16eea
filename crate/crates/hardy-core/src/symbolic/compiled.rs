use num_traits::ToPrimitive;

use super::field::{PowerExp, ScalarField};
use super::poly::MultiPoly;
use super::rat_to_f64;
use crate::{Error, Result};

/// Polynomial lowered to a nested Horner scheme over f64 coefficients:
/// p = Σ_k q_k(rest) · v^k evaluated as ((q_d·v + q_{d−1})·v + …), recursing
/// on the remaining variables. No allocation at evaluation time.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    root: Node,
}

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Horner { var: usize, coeffs: Vec<Node> },
}

impl CompiledPoly {
    pub fn from_poly(p: &MultiPoly) -> CompiledPoly {
        let terms: Vec<(Vec<u32>, f64)> = p
            .terms()
            .map(|(k, v)| (k.to_vec(), rat_to_f64(v)))
            .collect();
        CompiledPoly {
            root: build(&terms),
        }
    }

    #[inline]
    pub fn eval(&self, vals: &[f64]) -> f64 {
        eval_node(&self.root, vals)
    }
}

fn build(terms: &[(Vec<u32>, f64)]) -> Node {
    if terms.is_empty() {
        return Node::Const(0.0);
    }
    let var = match terms
        .iter()
        .flat_map(|(k, _)| k.iter().enumerate())
        .filter(|&(_, &e)| e > 0)
        .map(|(i, _)| i)
        .min()
    {
        Some(v) => v,
        None => return Node::Const(terms.iter().map(|(_, c)| c).sum()),
    };
    let max_deg = terms.iter().map(|(k, _)| k[var]).max().unwrap() as usize;
    let mut buckets: Vec<Vec<(Vec<u32>, f64)>> = vec![Vec::new(); max_deg + 1];
    for (k, c) in terms {
        let e = k[var] as usize;
        let mut rest = k.clone();
        rest[var] = 0;
        buckets[e].push((rest, *c));
    }
    Node::Horner {
        var,
        coeffs: buckets.iter().map(|b| build(b)).collect(),
    }
}

fn eval_node(node: &Node, vals: &[f64]) -> f64 {
    match node {
        Node::Const(c) => *c,
        Node::Horner { var, coeffs } => {
            let x = vals[*var];
            let mut acc = eval_node(coeffs.last().unwrap(), vals);
            for c in coeffs.iter().rev().skip(1) {
                acc = acc * x + eval_node(c, vals);
            }
            acc
        }
    }
}

/// Fast evaluation form of a [`ScalarField`] with all exponents resolved to
/// numbers. Domain violations (fractional powers of negative bases) surface
/// as NaN and are caught by the quadrature layer.
#[derive(Debug, Clone)]
pub enum CompiledField {
    Const(f64),
    Poly(CompiledPoly),
    Sum(Vec<CompiledField>),
    Product(Vec<CompiledField>),
    PowInt(Box<CompiledField>, i32),
    /// base^(k/2), evaluated as sqrt(base)^k
    PowHalf(Box<CompiledField>, i32),
    /// base^(k/4), evaluated as base.sqrt().sqrt().powi(k)
    PowQuarter(Box<CompiledField>, i32),
    Pow(Box<CompiledField>, f64),
}

impl CompiledField {
    pub fn from_field(f: &ScalarField) -> Result<CompiledField> {
        Ok(match f {
            ScalarField::Constant(r) => CompiledField::Const(rat_to_f64(r)),
            ScalarField::Poly(p) => CompiledField::Poly(CompiledPoly::from_poly(p)),
            ScalarField::Sum(ts) => CompiledField::Sum(
                ts.iter()
                    .map(CompiledField::from_field)
                    .collect::<Result<_>>()?,
            ),
            ScalarField::Product(ts) => CompiledField::Product(
                ts.iter()
                    .map(CompiledField::from_field)
                    .collect::<Result<_>>()?,
            ),
            ScalarField::Power(base, exp) => {
                let b = Box::new(CompiledField::from_field(base)?);
                let r = match exp {
                    PowerExp::Const(r) => r,
                    PowerExp::AffineP { .. } => {
                        return Err(Error::InvalidParameter(
                            "cannot compile a field with an unbound exponent symbol p".into(),
                        ))
                    }
                };
                let as_scaled_int = |scale: i64| -> Option<i32> {
                    let scaled = r * super::rat_int(scale);
                    if scaled.is_integer() {
                        scaled.to_integer().to_i32()
                    } else {
                        None
                    }
                };
                if let Some(k) = as_scaled_int(1) {
                    CompiledField::PowInt(b, k)
                } else if let Some(k) = as_scaled_int(2) {
                    CompiledField::PowHalf(b, k)
                } else if let Some(k) = as_scaled_int(4) {
                    CompiledField::PowQuarter(b, k)
                } else {
                    CompiledField::Pow(b, rat_to_f64(r))
                }
            }
        })
    }

    #[inline]
    pub fn eval(&self, vals: &[f64]) -> f64 {
        match self {
            CompiledField::Const(c) => *c,
            CompiledField::Poly(p) => p.eval(vals),
            CompiledField::Sum(ts) => ts.iter().map(|t| t.eval(vals)).sum(),
            CompiledField::Product(ts) => ts.iter().map(|t| t.eval(vals)).product(),
            CompiledField::PowInt(b, k) => b.eval(vals).powi(*k),
            CompiledField::PowHalf(b, k) => b.eval(vals).sqrt().powi(*k),
            CompiledField::PowQuarter(b, k) => b.eval(vals).sqrt().sqrt().powi(*k),
            CompiledField::Pow(b, e) => b.eval(vals).powf(*e),
        }
    }
}
