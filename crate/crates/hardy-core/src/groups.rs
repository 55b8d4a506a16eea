//! Concrete vector-field frames: Heisenberg, Engel, the Grushin plane, and
//! frames loaded from text definitions; stratified metadata (group law,
//! dilation weights), commutators, the Hörmander rank probe, the dilation
//! generator Z, and the starshapedness verdict sampler.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_traits::Zero;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::symbolic::{parse_poly, rat, rat_int, HardyVars, MultiPoly, Rat, VarSet};
use crate::{Error, Result};

/// N horizontal vector fields on ℝⁿ with polynomial coefficients.
///
/// Entry (k, j) of the coefficient matrix is the coefficient of ∂/∂x_{j+1}
/// in X_{k+1}. Coefficients live over the Hardy variable layout so they can
/// be combined directly with weight polynomials carrying n, d, p symbols.
#[derive(Debug, Clone)]
pub struct Frame {
    name: String,
    hv: HardyVars,
    coeffs: Vec<Vec<MultiPoly>>,
}

impl Frame {
    pub fn new(name: &str, hv: HardyVars, coeffs: Vec<Vec<MultiPoly>>) -> Result<Frame> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("frame needs at least one field".into()));
        }
        for row in &coeffs {
            if row.len() != hv.dim() {
                return Err(Error::ArityMismatch {
                    expected: hv.dim(),
                    got: row.len(),
                });
            }
            for c in row {
                if c.vars() != hv.set() {
                    return Err(Error::VarMismatch(
                        "frame coefficient".into(),
                        "frame variable layout".into(),
                    ));
                }
            }
        }
        Ok(Frame {
            name: name.to_string(),
            hv,
            coeffs,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Ambient dimension n.
    pub fn dim(&self) -> usize {
        self.hv.dim()
    }

    /// Number of horizontal fields N.
    pub fn horizontal_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn vars(&self) -> &HardyVars {
        &self.hv
    }

    pub fn coefficient(&self, field: usize, coord: usize) -> &MultiPoly {
        &self.coeffs[field][coord]
    }

    pub fn row(&self, field: usize) -> &[MultiPoly] {
        &self.coeffs[field]
    }

    /// Copy with one coefficient replaced; negative-control hook for the
    /// identity suite.
    pub fn with_coefficient(&self, field: usize, coord: usize, poly: MultiPoly) -> Frame {
        let mut f = self.clone();
        f.coeffs[field][coord] = poly;
        f
    }
}

/// Group multiplication written per coordinate as polynomials in
/// (x1..xn, y1..yn), where y is the right factor.
#[derive(Debug, Clone)]
pub struct GroupLaw {
    vars: Arc<VarSet>,
    dim: usize,
    components: Vec<MultiPoly>,
}

impl GroupLaw {
    /// Variable list x1..xn, y1..yn used by group-law polynomials.
    pub fn law_vars(dim: usize) -> Arc<VarSet> {
        let mut names: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
        names.extend((1..=dim).map(|i| format!("y{i}")));
        VarSet::new(names)
    }

    pub fn new(dim: usize, components: Vec<MultiPoly>) -> Result<GroupLaw> {
        let vars = GroupLaw::law_vars(dim);
        if components.len() != dim {
            return Err(Error::ArityMismatch {
                expected: dim,
                got: components.len(),
            });
        }
        for c in &components {
            if c.vars() != &vars {
                return Err(Error::VarMismatch(
                    "group law component".into(),
                    "law variable layout".into(),
                ));
            }
        }
        Ok(GroupLaw {
            vars,
            dim,
            components,
        })
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, i: usize) -> &MultiPoly {
        &self.components[i]
    }

    pub fn components(&self) -> &[MultiPoly] {
        &self.components
    }
}

/// Stratification metadata: strata sizes [N, N₂, …, N_r], per-coordinate
/// dilation weights (weight l on stratum l), and optionally the group law.
#[derive(Debug, Clone)]
pub struct StratifiedDescriptor {
    strata: Vec<usize>,
    weights: Vec<u32>,
    group_law: Option<GroupLaw>,
}

impl StratifiedDescriptor {
    pub fn new(strata: Vec<usize>, group_law: Option<GroupLaw>) -> Result<StratifiedDescriptor> {
        if strata.is_empty() || strata.iter().any(|&s| s == 0) {
            return Err(Error::InvalidParameter("strata sizes must be positive".into()));
        }
        let mut weights = Vec::new();
        for (level, &size) in strata.iter().enumerate() {
            weights.extend(std::iter::repeat(level as u32 + 1).take(size));
        }
        if let Some(law) = &group_law {
            if law.dim() != weights.len() {
                return Err(Error::ArityMismatch {
                    expected: weights.len(),
                    got: law.dim(),
                });
            }
        }
        Ok(StratifiedDescriptor {
            strata,
            weights,
            group_law,
        })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn strata(&self) -> &[usize] {
        &self.strata
    }

    /// Dilation weight of coordinate `i` (0-based).
    pub fn weight(&self, i: usize) -> u32 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn group_law(&self) -> Option<&GroupLaw> {
        self.group_law.as_ref()
    }

    /// Homogeneous dimension Q = Σ l·N_l.
    pub fn homogeneous_dimension(&self) -> u32 {
        self.weights.iter().sum()
    }

    /// Check the stratified coefficient pattern: the first-stratum block of
    /// the frame is the identity, and the coefficient on a stratum-l
    /// coordinate only involves variables of strictly lower weight.
    pub fn validate_frame(&self, frame: &Frame) -> Result<()> {
        if frame.dim() != self.dim() {
            return Err(Error::ArityMismatch {
                expected: self.dim(),
                got: frame.dim(),
            });
        }
        let n_first = self.strata[0];
        if frame.horizontal_count() != n_first {
            return Err(Error::InvalidParameter(format!(
                "expected {n_first} first-stratum fields, frame has {}",
                frame.horizontal_count()
            )));
        }
        let hv = frame.vars();
        for k in 0..n_first {
            for j in 0..frame.dim() {
                let c = frame.coefficient(k, j);
                if j < n_first {
                    let expected = if j == k {
                        MultiPoly::one(hv.set())
                    } else {
                        MultiPoly::zero(hv.set())
                    };
                    if c != &expected {
                        return Err(Error::InvalidParameter(format!(
                            "first-stratum block is not the identity at ({k},{j})"
                        )));
                    }
                } else {
                    let level = self.weights[j];
                    for (key, _) in c.terms() {
                        for (i, &e) in key.iter().enumerate().take(frame.dim()) {
                            if e > 0 && self.weights[i] >= level {
                                return Err(Error::InvalidParameter(format!(
                                    "coefficient ({k},{j}) depends on x{} of weight {}",
                                    i + 1,
                                    self.weights[i]
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn mono(vs: &Arc<VarSet>, c: Rat, exps: &[(usize, u32)]) -> MultiPoly {
    MultiPoly::monomial(vs, c, exps).expect("indices in range")
}

/// The first Heisenberg group H₁ on ℝ³:
/// X₁ = ∂₁ + 2x₂∂₃, X₂ = ∂₂ − 2x₁∂₃, strata [2, 1], weights (1, 1, 2),
/// law (x₁+y₁, x₂+y₂, x₃+y₃+2(y₁x₂−x₁y₂)).
pub fn make_heisenberg() -> (Frame, StratifiedDescriptor) {
    let hv = HardyVars::new(3);
    let vs = hv.set().clone();
    let one = MultiPoly::one(&vs);
    let zero = MultiPoly::zero(&vs);
    let coeffs = vec![
        vec![one.clone(), zero.clone(), mono(&vs, rat_int(2), &[(hv.x(1), 1)])],
        vec![zero.clone(), one.clone(), mono(&vs, rat_int(-2), &[(hv.x(0), 1)])],
    ];
    let frame = Frame::new("heisenberg1", hv, coeffs).unwrap();

    let lv = GroupLaw::law_vars(3);
    let x = |i: usize| MultiPoly::var(&lv, i).unwrap();
    let y = |i: usize| MultiPoly::var(&lv, 3 + i).unwrap();
    let third = x(2)
        .add(&y(2))
        .unwrap()
        .add(&y(0).mul(&x(1)).unwrap().scale(&rat_int(2)))
        .unwrap()
        .sub(&x(0).mul(&y(1)).unwrap().scale(&rat_int(2)))
        .unwrap();
    let law = GroupLaw::new(3, vec![x(0).add(&y(0)).unwrap(), x(1).add(&y(1)).unwrap(), third])
        .unwrap();
    let desc = StratifiedDescriptor::new(vec![2, 1], Some(law)).unwrap();
    desc.validate_frame(&frame).expect("stratified pattern");
    (frame, desc)
}

/// The Engel group on ℝ⁴ (step 3):
/// X₁ = ∂₁ − (x₂/2)∂₃ − (x₃/2 + x₁x₂/12)∂₄, X₂ = ∂₂ + (x₁/2)∂₃ + (x₁²/12)∂₄,
/// strata [2, 1, 1], weights (1, 1, 2, 3).
pub fn make_engel() -> (Frame, StratifiedDescriptor) {
    let hv = HardyVars::new(4);
    let vs = hv.set().clone();
    let one = MultiPoly::one(&vs);
    let zero = MultiPoly::zero(&vs);
    let x1_row = vec![
        one.clone(),
        zero.clone(),
        mono(&vs, rat(-1, 2), &[(hv.x(1), 1)]),
        mono(&vs, rat(-1, 2), &[(hv.x(2), 1)]).add(&mono(
            &vs,
            rat(-1, 12),
            &[(hv.x(0), 1), (hv.x(1), 1)],
        ))
        .unwrap(),
    ];
    let x2_row = vec![
        zero.clone(),
        one.clone(),
        mono(&vs, rat(1, 2), &[(hv.x(0), 1)]),
        mono(&vs, rat(1, 12), &[(hv.x(0), 2)]),
    ];
    let frame = Frame::new("engel", hv, vec![x1_row, x2_row]).unwrap();

    let lv = GroupLaw::law_vars(4);
    let x = |i: usize| MultiPoly::var(&lv, i).unwrap();
    let y = |i: usize| MultiPoly::var(&lv, 4 + i).unwrap();
    // P3 = (x1 y2 - x2 y1)/2
    let p3 = x(0)
        .mul(&y(1))
        .unwrap()
        .sub(&x(1).mul(&y(0)).unwrap())
        .unwrap()
        .scale(&rat(1, 2));
    // P4 = (x1 y3 - x3 y1)/2 + (x1^2 y2 - x1 y1 (x2 + y2) + x2 y1^2)/12
    let p4 = x(0)
        .mul(&y(2))
        .unwrap()
        .sub(&x(2).mul(&y(0)).unwrap())
        .unwrap()
        .scale(&rat(1, 2))
        .add(
            &x(0)
                .pow(2)
                .mul(&y(1))
                .unwrap()
                .sub(&x(0).mul(&y(0)).unwrap().mul(&x(1).add(&y(1)).unwrap()).unwrap())
                .unwrap()
                .add(&x(1).mul(&y(0).pow(2)).unwrap())
                .unwrap()
                .scale(&rat(1, 12)),
        )
        .unwrap();
    let law = GroupLaw::new(
        4,
        vec![
            x(0).add(&y(0)).unwrap(),
            x(1).add(&y(1)).unwrap(),
            x(2).add(&y(2)).unwrap().add(&p3).unwrap(),
            x(3).add(&y(3)).unwrap().add(&p4).unwrap(),
        ],
    )
    .unwrap();
    let desc = StratifiedDescriptor::new(vec![2, 1, 1], Some(law)).unwrap();
    desc.validate_frame(&frame).expect("stratified pattern");
    (frame, desc)
}

/// The Grushin plane on ℝ²: X₁ = ∂₁, X₂ = x₁∂₂. Not a group; no metadata.
pub fn make_grushin() -> Frame {
    let hv = HardyVars::new(2);
    let vs = hv.set().clone();
    let coeffs = vec![
        vec![MultiPoly::one(&vs), MultiPoly::zero(&vs)],
        vec![MultiPoly::zero(&vs), mono(&vs, rat_int(1), &[(hv.x(0), 1)])],
    ];
    Frame::new("grushin", hv, coeffs).unwrap()
}

/// Built-in frames addressable by name.
pub fn builtin(name: &str) -> Option<(Frame, Option<StratifiedDescriptor>)> {
    match name {
        "heisenberg1" => {
            let (f, d) = make_heisenberg();
            Some((f, Some(d)))
        }
        "engel" => {
            let (f, d) = make_engel();
            Some((f, Some(d)))
        }
        "grushin" => Some((make_grushin(), None)),
        _ => None,
    }
}

/// Lie bracket of two coordinate vector fields on ℝ^dim:
/// [F, G]_m = Σ_l (F_l ∂_l G_m − G_l ∂_l F_m).
fn bracket_vectors(dim: usize, f: &[MultiPoly], g: &[MultiPoly]) -> Result<Vec<MultiPoly>> {
    let vars = f[0].vars().clone();
    let mut out = Vec::with_capacity(dim);
    for m in 0..dim {
        let mut comp = MultiPoly::zero(&vars);
        for l in 0..dim {
            comp = comp.add(&f[l].mul(&g[m].partial(l)?)?)?;
            comp = comp.sub(&g[l].mul(&f[m].partial(l)?)?)?;
        }
        out.push(comp);
    }
    Ok(out)
}

/// [X_i, X_j] as a coordinate vector field with exact polynomial
/// coefficients (0-based field indices).
pub fn commutator(frame: &Frame, i: usize, j: usize) -> Result<Vec<MultiPoly>> {
    let n = frame.horizontal_count();
    if i >= n {
        return Err(Error::IndexOutOfRange(i, n));
    }
    if j >= n {
        return Err(Error::IndexOutOfRange(j, n));
    }
    bracket_vectors(frame.dim(), frame.row(i), frame.row(j))
}

/// All iterated brackets up to `max_depth`, depth 1 being the frame fields
/// themselves and depth k the brackets [X_i, Y] with Y of depth k−1.
pub fn iterated_brackets(frame: &Frame, max_depth: usize) -> Result<Vec<Vec<MultiPoly>>> {
    let mut all: Vec<Vec<MultiPoly>> = frame.coeffs.clone();
    let mut last: Vec<Vec<MultiPoly>> = frame.coeffs.clone();
    for _ in 2..=max_depth {
        let mut next = Vec::new();
        for base in 0..frame.horizontal_count() {
            for field in &last {
                next.push(bracket_vectors(frame.dim(), frame.row(base), field)?);
            }
        }
        all.extend(next.iter().cloned());
        last = next;
    }
    Ok(all)
}

fn pad_point(hv: &HardyVars, x: &[f64]) -> Vec<f64> {
    let mut vals = vec![0.0; hv.set().len()];
    vals[..x.len()].copy_from_slice(x);
    vals
}

/// Rank of the span at `point` of all iterated brackets up to `max_depth`,
/// by singular values with absolute threshold 1e−10.
pub fn bracket_rank(frame: &Frame, point: &[f64], max_depth: usize) -> Result<usize> {
    if max_depth < 1 {
        return Err(Error::InvalidParameter("max_depth must be at least 1".into()));
    }
    if point.len() != frame.dim() {
        return Err(Error::ArityMismatch {
            expected: frame.dim(),
            got: point.len(),
        });
    }
    let fields = iterated_brackets(frame, max_depth)?;
    let vals = pad_point(frame.vars(), point);
    let mut rows = Vec::with_capacity(fields.len() * frame.dim());
    for field in &fields {
        for c in field {
            rows.push(c.eval_f64(&vals)?);
        }
    }
    let mat = DMatrix::from_row_slice(fields.len(), frame.dim(), &rows);
    let svals = mat.svd(false, false).singular_values;
    Ok(svals.iter().filter(|&&s| s > 1e-10).count())
}

/// Exact rank via Gaussian elimination when the point is rational.
pub fn bracket_rank_exact(frame: &Frame, point: &[Rat], max_depth: usize) -> Result<usize> {
    if max_depth < 1 {
        return Err(Error::InvalidParameter("max_depth must be at least 1".into()));
    }
    if point.len() != frame.dim() {
        return Err(Error::ArityMismatch {
            expected: frame.dim(),
            got: point.len(),
        });
    }
    let fields = iterated_brackets(frame, max_depth)?;
    let mut vals = vec![Rat::zero(); frame.vars().set().len()];
    vals[..point.len()].clone_from_slice(point);
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(fields.len());
    for field in &fields {
        rows.push(
            field
                .iter()
                .map(|c| c.eval_rat(&vals))
                .collect::<Result<_>>()?,
        );
    }
    // row echelon over ℚ
    let cols = frame.dim();
    let mut rank = 0usize;
    let mut pivot_row = 0usize;
    for col in 0..cols {
        let Some(found) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, found);
        let pivot = rows[pivot_row][col].clone();
        for r in pivot_row + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = rows[r][col].clone() / pivot.clone();
            for c in col..cols {
                let delta = factor.clone() * rows[pivot_row][c].clone();
                rows[r][c] -= delta;
            }
        }
        pivot_row += 1;
        rank += 1;
    }
    Ok(rank)
}

/// The dilation generator Z(x) = (x′, 2x⁽²⁾, …, r·x⁽ʳ⁾): component i is
/// w_i·x_i with w_i the dilation weight of coordinate i. Components are
/// polynomials over the Hardy variable layout of the descriptor's dimension.
pub fn z_generator(desc: &StratifiedDescriptor) -> Vec<MultiPoly> {
    let hv = HardyVars::new(desc.dim());
    let vs = hv.set();
    (0..desc.dim())
        .map(|i| mono(vs, rat_int(desc.weight(i) as i64), &[(hv.x(i), 1)]))
        .collect()
}

/// Verdict of the boundary sampler.
#[derive(Debug, Clone, PartialEq)]
pub enum Starshaped {
    StrictlyStarshaped,
    Starshaped,
    Violated { point: Vec<f64>, value: f64 },
}

const BOUNDARY_PHI_TOL: f64 = 1e-12;
const VERDICT_TOL: f64 = 1e-10;

fn ray_seed(seed: u64, ray: u64) -> u64 {
    // splitmix64 step keyed by ray index
    let mut z = seed ^ ray.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sample boundary points of the domain {φ < 0} along seeded random rays
/// from the origin (bisecting each sign change of φ to |φ| < 1e−12), set
/// n = ∇φ/|∇φ|, and judge ⟨Z(x), n(x)⟩ over the samples: strictly
/// starshaped if every value exceeds 1e−10, starshaped if none is below
/// −1e−10, otherwise violated with the worst witness.
pub fn starshaped_check(
    desc: &StratifiedDescriptor,
    levelset: &MultiPoly,
    rays: usize,
    seed: u64,
) -> Result<Starshaped> {
    let dim = desc.dim();
    if levelset.vars().len() != dim {
        return Err(Error::ArityMismatch {
            expected: dim,
            got: levelset.vars().len(),
        });
    }
    let grad: Vec<MultiPoly> = (0..dim)
        .map(|j| levelset.partial(j))
        .collect::<Result<_>>()?;

    let phi = |x: &[f64]| levelset.eval_f64(x).expect("arity checked");

    let mut points: Vec<Vec<f64>> = Vec::new();
    let origin = vec![0.0; dim];
    if phi(&origin).abs() <= BOUNDARY_PHI_TOL {
        points.push(origin);
    }

    let per_ray: Vec<Vec<Vec<f64>>> = (0..rays as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(ray_seed(seed, k));
            let mut normal = || {
                // Box–Muller
                let u1: f64 = rng.gen::<f64>().max(1e-300);
                let u2: f64 = rng.gen();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            };
            let mut dir = vec![0.0; dim];
            loop {
                let mut norm2 = 0.0;
                for d in dir.iter_mut() {
                    *d = normal();
                    norm2 += *d * *d;
                }
                if norm2 > 1e-12 {
                    let norm = norm2.sqrt();
                    for d in dir.iter_mut() {
                        *d /= norm;
                    }
                    break;
                }
            }
            let at = |s: f64| -> f64 {
                let x: Vec<f64> = dir.iter().map(|d| d * s).collect();
                phi(&x)
            };
            // geometric scan for sign changes, then bisection
            let mut found = Vec::new();
            let mut s_prev = 0.0;
            let mut v_prev = at(0.0);
            let mut s = 1e-8;
            while s <= 1.05e6 {
                let v = at(s);
                if v == 0.0 {
                    found.push(dir.iter().map(|d| d * s).collect::<Vec<f64>>());
                } else if v_prev != 0.0 && v.signum() != v_prev.signum() {
                    let (mut lo, mut hi) = (s_prev, s);
                    let (mut vlo, _) = (v_prev, v);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        let vm = at(mid);
                        if vm.abs() <= BOUNDARY_PHI_TOL || (hi - lo) <= f64::EPSILON * hi {
                            lo = mid;
                            hi = mid;
                            break;
                        }
                        if vm.signum() == vlo.signum() {
                            lo = mid;
                            vlo = vm;
                        } else {
                            hi = mid;
                        }
                    }
                    let root = 0.5 * (lo + hi);
                    found.push(dir.iter().map(|d| d * root).collect::<Vec<f64>>());
                }
                s_prev = s;
                v_prev = v;
                s *= 1.05;
            }
            found
        })
        .collect();
    for ray_points in per_ray {
        points.extend(ray_points);
    }

    if points.is_empty() {
        return Err(Error::Sampling(format!(
            "no boundary point found along {rays} rays within radius 1e6"
        )));
    }

    let mut worst: Option<(f64, Vec<f64>)> = None;
    for x in &points {
        let g: Vec<f64> = grad
            .iter()
            .map(|c| c.eval_f64(x).expect("arity checked"))
            .collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-10 {
            return Err(Error::DegenerateBoundary { point: x.clone() });
        }
        let zn: f64 = (0..dim)
            .map(|i| desc.weight(i) as f64 * x[i] * g[i] / norm)
            .sum();
        if worst.as_ref().map_or(true, |(w, _)| zn < *w) {
            worst = Some((zn, x.clone()));
        }
    }
    let (min_zn, witness) = worst.expect("nonempty samples");
    if min_zn > VERDICT_TOL {
        Ok(Starshaped::StrictlyStarshaped)
    } else if min_zn >= -VERDICT_TOL {
        Ok(Starshaped::Starshaped)
    } else {
        Ok(Starshaped::Violated {
            point: witness,
            value: min_zn,
        })
    }
}

/// Load a frame from a text definition: one line per field, comma-separated
/// polynomial coefficients in x1..xn, `#` comments allowed. The ambient
/// dimension is the number of coefficients per line.
pub fn parse_frame_file(name: &str, text: &str) -> Result<Frame> {
    let mut rows_src: Vec<Vec<&str>> = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        rows_src.push(line.split(',').map(str::trim).collect());
    }
    if rows_src.is_empty() {
        return Err(Error::Parse("frame definition has no fields".into()));
    }
    let dim = rows_src[0].len();
    let hv = HardyVars::new(dim);
    let coords = VarSet::coords(dim);
    let mut coeffs = Vec::new();
    for row in &rows_src {
        if row.len() != dim {
            return Err(Error::ArityMismatch {
                expected: dim,
                got: row.len(),
            });
        }
        let mut parsed = Vec::new();
        for src in row {
            parsed.push(parse_poly(&coords, src)?.embed(hv.set())?);
        }
        coeffs.push(parsed);
    }
    Frame::new(name, hv, coeffs)
}
