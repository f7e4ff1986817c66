use crate::error::{Error, Result};
use crate::phase::TrigPoly;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Default absolute floor on `|e^{2πikθ} - 1|`.
pub const DIVISOR_FLOOR: f64 = 1e-8;

/// Solution of `α(x) = β(x + θ) - β(x) + ᾱ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohomology {
    pub beta: TrigPoly,
    #[serde(with = "crate::decimal")]
    pub mean: f64,
}

impl Cohomology {
    /// `max |β(x+θ) - β(x) + ᾱ - α(x)|` over `len` uniform points.
    pub fn residual(&self, alpha: &TrigPoly, theta: f64, len: usize) -> f64 {
        let lhs = self.beta.shifted(theta).plus(&self.beta.scaled(-1.0)).plus_constant(self.mean);
        let a = alpha.sample(len);
        lhs.sample(len).iter().zip(&a).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    }
}

/// Harmonic-by-harmonic solve with divisors `e^{2πikθ} - 1`; `β` has zero mean.
///
/// Only harmonics present in `α` are checked against `floor`.
pub fn solve_cohomological(alpha: &TrigPoly, theta: f64, floor: f64) -> Result<Cohomology> {
    let mut coeffs = Vec::with_capacity(alpha.degree());
    for k in 1..=alpha.degree() {
        let c = alpha.complex_coeff(k);
        if c == Complex64::new(0.0, 0.0) {
            coeffs.push(c);
            continue;
        }
        let divisor = Complex64::from_polar(1.0, TAU * k as f64 * theta) - 1.0;
        if divisor.norm() < floor {
            return Err(Error::SmallDivisorResonance { k, divisor: divisor.norm() });
        }
        coeffs.push(c / divisor);
    }
    Ok(Cohomology { beta: TrigPoly::from_complex_coeffs(0.0, &coeffs), mean: alpha.mean() })
}
