use super::scalar::Scalar;
use super::trig::TrigPoly;
use serde::{Deserialize, Serialize};

/// A function of `y` given as a polynomial plus a periodic trigonometric part:
/// `sum_i poly[i] y^i + trig(y)`.
///
/// Torus maps should use only the trigonometric part (and at most a constant
/// polynomial term); cylinder maps may use both.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct YFunction {
    #[serde(with = "crate::decimal::vec", default)]
    pub poly: Vec<f64>,
    #[serde(default)]
    pub trig: TrigPoly,
}

impl YFunction {
    pub fn polynomial(poly: Vec<f64>) -> Self {
        YFunction { poly, trig: TrigPoly::zero() }
    }

    pub fn trigonometric(trig: TrigPoly) -> Self {
        YFunction { poly: Vec::new(), trig }
    }

    /// True when `u(y + 1) = u(y)`, i.e. the function descends to the torus.
    pub fn is_periodic(&self) -> bool {
        self.poly.iter().skip(1).all(|&c| c == 0.0)
    }

    /// Value and derivatives up to order `D - 1` (`D <= 4`).
    pub fn eval_derivs<const D: usize>(&self, y: f64) -> [f64; D] {
        let mut out = self.trig.eval_derivs::<D>(y);
        // Horner for the polynomial and its derivatives
        for (order, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in (order..self.poly.len()).rev() {
                let falling: f64 = (0..order).map(|m| (i - m) as f64).product();
                acc = acc * y + self.poly[i] * falling;
            }
            *slot += acc;
        }
        out
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.eval_derivs::<1>(y)[0]
    }

    pub fn eval_scalar<S: Scalar>(&self, y: S) -> S {
        let mut acc = S::from_f64(0.0);
        for &c in self.poly.iter().rev() {
            acc = acc * y + S::from_f64(c);
        }
        acc + self.trig.eval_scalar(y)
    }

    pub fn derivative(&self) -> YFunction {
        let poly = self
            .poly
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * i as f64)
            .collect();
        YFunction { poly, trig: self.trig.derivative() }
    }

    pub fn scaled(&self, factor: f64) -> YFunction {
        YFunction {
            poly: self.poly.iter().map(|c| c * factor).collect(),
            trig: self.trig.scaled(factor),
        }
    }
}
