use super::quadrature::BoxRegion;
use crate::{Error, Result};

/// Shape of a compactly supported test function on the ellipsoid r < 1,
/// r² = Σ((x_i − c_i)/ρ_i)².
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpKind {
    /// exp(1 − 1/(1 − r²)) inside r < 1; C^∞ with all derivatives vanishing
    /// at the support boundary; value 1 at the center.
    Smooth,
    /// (1 − r²)₊^m; C^{m−1}, needs m ≥ 2 for a continuous gradient.
    Poly { m: u32 },
}

/// Compactly supported test function with analytic gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub kind: BumpKind,
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
}

impl TestFunction {
    pub fn new(kind: BumpKind, center: Vec<f64>, radii: Vec<f64>) -> Result<TestFunction> {
        if center.len() != radii.len() {
            return Err(Error::ArityMismatch {
                expected: center.len(),
                got: radii.len(),
            });
        }
        if radii.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidParameter("bump radii must be positive".into()));
        }
        if let BumpKind::Poly { m } = kind {
            if m < 2 {
                return Err(Error::InvalidParameter(
                    "polynomial bump needs exponent m >= 2 for a C1 edge".into(),
                ));
            }
        }
        Ok(TestFunction {
            kind,
            center,
            radii,
        })
    }

    pub fn smooth(center: Vec<f64>, radii: Vec<f64>) -> Result<TestFunction> {
        TestFunction::new(BumpKind::Smooth, center, radii)
    }

    pub fn poly(m: u32, center: Vec<f64>, radii: Vec<f64>) -> Result<TestFunction> {
        TestFunction::new(BumpKind::Poly { m }, center, radii)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    fn r2(&self, x: &[f64]) -> f64 {
        self.center
            .iter()
            .zip(&self.radii)
            .zip(x)
            .map(|((c, rho), xi)| {
                let t = (xi - c) / rho;
                t * t
            })
            .sum()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let r2 = self.r2(x);
        if r2 >= 1.0 {
            return 0.0;
        }
        match self.kind {
            BumpKind::Smooth => (1.0 - 1.0 / (1.0 - r2)).exp(),
            BumpKind::Poly { m } => (1.0 - r2).powi(m as i32),
        }
    }

    /// Analytic gradient; identically 0 outside the support ellipsoid.
    pub fn grad(&self, x: &[f64], out: &mut [f64]) {
        let r2 = self.r2(x);
        if r2 >= 1.0 {
            out.fill(0.0);
            return;
        }
        // common radial factor: f'(r²) in d/dx_j f(r²) = f'(r²)·2(x_j−c_j)/ρ_j²
        let radial = match self.kind {
            BumpKind::Smooth => {
                let u = 1.0 - r2;
                -(1.0 - 1.0 / u).exp() / (u * u)
            }
            BumpKind::Poly { m } => -(m as f64) * (1.0 - r2).powi(m as i32 - 1),
        };
        for j in 0..self.dim() {
            out[j] = radial * 2.0 * (x[j] - self.center[j]) / (self.radii[j] * self.radii[j]);
        }
    }

    /// Bounding box of the support ellipsoid.
    pub fn support_box(&self) -> BoxRegion {
        let lower: Vec<f64> = self
            .center
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| c - r)
            .collect();
        let upper: Vec<f64> = self
            .center
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| c + r)
            .collect();
        BoxRegion::new(lower, upper).expect("radii positive")
    }
}
