//! Quadrature over boxes, compactly supported test functions, admissibility,
//! and derivative-free Rayleigh-quotient probing.

mod bump;
mod nelder;
mod quadrature;
mod rayleigh;

pub use bump::{BumpKind, TestFunction};
pub use nelder::{minimize, MinimizeResult, NelderMeadOptions};
pub use quadrature::{
    gauss_legendre, integrate, integrate_components, integrate_components_fixed_order,
    integrate_fixed_order, BoxRegion, QuadratureRule,
};
pub use rayleigh::{
    minimize_quotient, rayleigh_quotient, rayleigh_quotient_probe, BumpFamily, LogWindowBump,
    LogWindowFamily, ProbeFunction, RayleighResult, SingleBumpFamily,
};

use crate::hardy::HardySpec;
use crate::symbolic::rat_to_f64;
use crate::{Error, Result};

/// Margin by which a test-function support must clear the boundary
/// {w = 0} to be admissible.
pub const ADMISSIBILITY_MARGIN: f64 = 1e-6;

/// Range (min, max) of the spec's weight function w over the support of the
/// probe. All built-in weights are affine in x, so the range over an
/// ellipsoid is closed-form.
pub(crate) fn weight_range_over(
    spec: &HardySpec,
    probe: &dyn ProbeFunction,
) -> Result<(f64, f64)> {
    let w = spec.weight_poly()?;
    let dim = spec.dim();
    let coords: Vec<usize> = (0..dim).collect();
    let Some((c0, lin)) = w.affine_in(&coords) else {
        return Err(Error::InvalidParameter(
            "admissibility needs an affine weight function".into(),
        ));
    };
    let lin_f: Vec<f64> = lin.iter().map(rat_to_f64).collect();
    Ok(probe.affine_range(rat_to_f64(&c0), &lin_f))
}

/// True iff the support lies strictly inside {w > margin} (or entirely in
/// {w < −margin}; the weights enter through |w|, so either side works).
pub fn admissible(f: &TestFunction, spec: &HardySpec) -> Result<bool> {
    if f.dim() != spec.dim() {
        return Err(Error::ArityMismatch {
            expected: spec.dim(),
            got: f.dim(),
        });
    }
    let (lo, hi) = weight_range_over(spec, f)?;
    Ok(lo > ADMISSIBILITY_MARGIN || hi < -ADMISSIBILITY_MARGIN)
}
