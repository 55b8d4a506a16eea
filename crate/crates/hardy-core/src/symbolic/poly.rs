use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::{rat_int, Rat};
use crate::{Error, Result};

/// Ordered list of variable names. Polynomials over different `VarSet`s never
/// mix implicitly; cross-set moves go through [`MultiPoly::embed`] or
/// [`MultiPoly::project`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSet {
    names: Vec<String>,
}

impl VarSet {
    pub fn new<I, S>(names: I) -> Arc<VarSet>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, a) in names.iter().enumerate() {
            for b in names.iter().skip(i + 1) {
                assert_ne!(a, b, "duplicate variable name `{a}`");
            }
        }
        Arc::new(VarSet { names })
    }

    /// Coordinate variables x1..xn.
    pub fn coords(dim: usize) -> Arc<VarSet> {
        VarSet::new((1..=dim).map(|i| format!("x{i}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn label(&self) -> String {
        self.names.join(",")
    }
}

/// Variable layout used throughout the Hardy pipeline: coordinates x1..xn,
/// constant-normal components n1..nn, the half-space offset d, and the
/// distinguished exponent symbol p.
#[derive(Debug, Clone)]
pub struct HardyVars {
    set: Arc<VarSet>,
    dim: usize,
}

impl HardyVars {
    pub fn new(dim: usize) -> HardyVars {
        let mut names: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
        names.extend((1..=dim).map(|i| format!("n{i}")));
        names.push("d".to_string());
        names.push("p".to_string());
        HardyVars {
            set: VarSet::new(names),
            dim,
        }
    }

    pub fn set(&self) -> &Arc<VarSet> {
        &self.set
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of coordinate x_{i+1} (0-based i).
    pub fn x(&self, i: usize) -> usize {
        debug_assert!(i < self.dim);
        i
    }

    /// Index of normal component n_{i+1} (0-based i).
    pub fn n(&self, i: usize) -> usize {
        debug_assert!(i < self.dim);
        self.dim + i
    }

    pub fn d(&self) -> usize {
        2 * self.dim
    }

    pub fn p(&self) -> usize {
        2 * self.dim + 1
    }
}

/// Sparse multivariate polynomial over ℚ.
///
/// Terms map an exponent multi-index (aligned with the variable list) to a
/// nonzero rational coefficient; the zero polynomial has an empty term map,
/// so equality of term maps is equality of polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Arc<VarSet>,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl MultiPoly {
    pub fn zero(vars: &Arc<VarSet>) -> MultiPoly {
        MultiPoly {
            vars: Arc::clone(vars),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Arc<VarSet>, value: Rat) -> MultiPoly {
        let mut p = MultiPoly::zero(vars);
        if !value.is_zero() {
            p.terms.insert(vec![0; vars.len()], value);
        }
        p
    }

    pub fn one(vars: &Arc<VarSet>) -> MultiPoly {
        MultiPoly::constant(vars, Rat::one())
    }

    pub fn int(vars: &Arc<VarSet>, value: i64) -> MultiPoly {
        MultiPoly::constant(vars, rat_int(value))
    }

    /// The monomial `coef * Π var_i^exp_i` given as (index, exponent) pairs.
    pub fn monomial(vars: &Arc<VarSet>, coef: Rat, exps: &[(usize, u32)]) -> Result<MultiPoly> {
        let mut key = vec![0u32; vars.len()];
        for &(idx, e) in exps {
            if idx >= vars.len() {
                return Err(Error::IndexOutOfRange(idx, vars.len()));
            }
            key[idx] += e;
        }
        let mut p = MultiPoly::zero(vars);
        if !coef.is_zero() {
            p.terms.insert(key, coef);
        }
        Ok(p)
    }

    pub fn var(vars: &Arc<VarSet>, idx: usize) -> Result<MultiPoly> {
        MultiPoly::monomial(vars, Rat::one(), &[(idx, 1)])
    }

    pub fn var_named(vars: &Arc<VarSet>, name: &str) -> Result<MultiPoly> {
        let idx = vars
            .index(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        MultiPoly::var(vars, idx)
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rat)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|k| k.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|k| k[var]).max().unwrap_or(0)
    }

    /// Largest variable index actually occurring, if any.
    pub fn max_used_var(&self) -> Option<usize> {
        self.terms
            .keys()
            .flat_map(|k| {
                k.iter()
                    .enumerate()
                    .filter(|&(_, &e)| e > 0)
                    .map(|(i, _)| i)
            })
            .max()
    }

    /// The constant term (0 if absent).
    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&vec![0u32; self.vars.len()])
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    fn check_same_vars(&self, other: &MultiPoly) -> Result<()> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(Error::VarMismatch(self.vars.label(), other.vars.label()))
        }
    }

    fn insert_term(terms: &mut BTreeMap<Vec<u32>, Rat>, key: Vec<u32>, coef: Rat) {
        if coef.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(coef);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + coef;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_same_vars(other)?;
        let mut terms = self.terms.clone();
        for (k, v) in &other.terms {
            Self::insert_term(&mut terms, k.clone(), v.clone());
        }
        Ok(MultiPoly {
            vars: Arc::clone(&self.vars),
            terms,
        })
    }

    pub fn sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            vars: Arc::clone(&self.vars),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), -v.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.vars);
        }
        MultiPoly {
            vars: Arc::clone(&self.vars),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.clone() * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.check_same_vars(other)?;
        let mut terms = BTreeMap::new();
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let key: Vec<u32> = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                Self::insert_term(&mut terms, key, va.clone() * vb.clone());
            }
        }
        Ok(MultiPoly {
            vars: Arc::clone(&self.vars),
            terms,
        })
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(&self.vars);
        for _ in 0..e {
            acc = acc.mul(self).expect("same vars");
        }
        acc
    }

    /// Exact partial derivative with respect to variable index `var`.
    pub fn partial(&self, var: usize) -> Result<MultiPoly> {
        if var >= self.vars.len() {
            return Err(Error::IndexOutOfRange(var, self.vars.len()));
        }
        let mut terms = BTreeMap::new();
        for (k, v) in &self.terms {
            let e = k[var];
            if e == 0 {
                continue;
            }
            let mut key = k.clone();
            key[var] = e - 1;
            Self::insert_term(&mut terms, key, v.clone() * rat_int(e as i64));
        }
        Ok(MultiPoly {
            vars: Arc::clone(&self.vars),
            terms,
        })
    }

    pub fn partial_named(&self, name: &str) -> Result<MultiPoly> {
        let idx = self
            .vars
            .index(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        self.partial(idx)
    }

    pub fn eval_f64(&self, vals: &[f64]) -> Result<f64> {
        if vals.len() != self.vars.len() {
            return Err(Error::ArityMismatch {
                expected: self.vars.len(),
                got: vals.len(),
            });
        }
        let mut acc = 0.0;
        for (k, v) in &self.terms {
            let mut t = super::rat_to_f64(v);
            for (i, &e) in k.iter().enumerate() {
                if e > 0 {
                    t *= vals[i].powi(e as i32);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    pub fn eval_rat(&self, vals: &[Rat]) -> Result<Rat> {
        if vals.len() != self.vars.len() {
            return Err(Error::ArityMismatch {
                expected: self.vars.len(),
                got: vals.len(),
            });
        }
        let mut acc = Rat::zero();
        for (k, v) in &self.terms {
            let mut t = v.clone();
            for (i, &e) in k.iter().enumerate() {
                for _ in 0..e {
                    t *= vals[i].clone();
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Exact substitution of a rational value for one variable. The variable
    /// list is unchanged; the variable simply no longer occurs.
    pub fn substitute_rat(&self, var: usize, value: &Rat) -> Result<MultiPoly> {
        if var >= self.vars.len() {
            return Err(Error::IndexOutOfRange(var, self.vars.len()));
        }
        let mut terms = BTreeMap::new();
        for (k, v) in &self.terms {
            let e = k[var];
            let mut coef = v.clone();
            for _ in 0..e {
                coef *= value.clone();
            }
            let mut key = k.clone();
            key[var] = 0;
            Self::insert_term(&mut terms, key, coef);
        }
        Ok(MultiPoly {
            vars: Arc::clone(&self.vars),
            terms,
        })
    }

    /// Full composition: replace every variable i by `images[i]`. All images
    /// must share one variable list, which becomes the result's list.
    pub fn compose(&self, images: &[MultiPoly]) -> Result<MultiPoly> {
        if images.len() != self.vars.len() {
            return Err(Error::ArityMismatch {
                expected: self.vars.len(),
                got: images.len(),
            });
        }
        let target = match images.first() {
            Some(first) => {
                for im in images {
                    first.check_same_vars(im)?;
                }
                Arc::clone(&first.vars)
            }
            None => Arc::clone(&self.vars),
        };
        // Cache powers of each image up to the degree actually used.
        let mut powers: Vec<Vec<MultiPoly>> = images
            .iter()
            .map(|im| vec![MultiPoly::one(&im.vars), im.clone()])
            .collect();
        let mut acc = MultiPoly::zero(&target);
        for (k, v) in &self.terms {
            let mut term = MultiPoly::constant(&target, v.clone());
            for (i, &e) in k.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&images[i])?;
                    powers[i].push(next);
                }
                term = term.mul(&powers[i][e as usize])?;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Re-express over a superset variable list (matched by name).
    pub fn embed(&self, target: &Arc<VarSet>) -> Result<MultiPoly> {
        let map: Vec<usize> = self
            .vars
            .names()
            .map(|n| {
                target
                    .index(n)
                    .ok_or_else(|| Error::UnknownVariable(n.to_string()))
            })
            .collect::<Result<_>>()?;
        let mut terms = BTreeMap::new();
        for (k, v) in &self.terms {
            let mut key = vec![0u32; target.len()];
            for (i, &e) in k.iter().enumerate() {
                key[map[i]] = e;
            }
            terms.insert(key, v.clone());
        }
        Ok(MultiPoly {
            vars: Arc::clone(target),
            terms,
        })
    }

    /// Re-express over a smaller variable list; errors if a dropped variable
    /// actually occurs.
    pub fn project(&self, target: &Arc<VarSet>) -> Result<MultiPoly> {
        let map: Vec<Option<usize>> = self.vars.names().map(|n| target.index(n)).collect();
        let mut terms = BTreeMap::new();
        for (k, v) in &self.terms {
            let mut key = vec![0u32; target.len()];
            for (i, &e) in k.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match map[i] {
                    Some(j) => key[j] = e,
                    None => {
                        return Err(Error::UnknownVariable(format!(
                            "{} (occurs but is not in the target list)",
                            self.vars.name(i)
                        )))
                    }
                }
            }
            terms.insert(key, v.clone());
        }
        Ok(MultiPoly {
            vars: Arc::clone(target),
            terms,
        })
    }

    /// True iff the polynomial has degree ≤ 1 in every coordinate listed and
    /// degree 0 in everything else; returns (constant, linear coefficients).
    pub fn affine_in(&self, coords: &[usize]) -> Option<(Rat, Vec<Rat>)> {
        let mut linear = vec![Rat::zero(); coords.len()];
        let mut constant = Rat::zero();
        for (k, v) in &self.terms {
            let total: u32 = k.iter().sum();
            if total == 0 {
                constant = v.clone();
                continue;
            }
            if total != 1 {
                return None;
            }
            let var = k.iter().position(|&e| e == 1).unwrap();
            match coords.iter().position(|&c| c == var) {
                Some(slot) => linear[slot] = v.clone(),
                None => return None,
            }
        }
        Some((constant, linear))
    }
}

impl fmt::Display for MultiPoly {
    /// Deterministic graded-lexicographic printing: higher total degree
    /// first, ties broken lexicographically on the exponent vector.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (pos, key) in keys.iter().enumerate() {
            let coef = &self.terms[*key];
            let mag = coef.abs();
            if pos == 0 {
                if coef.is_negative() {
                    write!(f, "-")?;
                }
            } else if coef.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let is_const = key.iter().all(|&e| e == 0);
            if !mag.is_one() || is_const {
                write!(f, "{mag}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut first = true;
            for (i, &e) in key.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "{}", self.vars.name(i))?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}
