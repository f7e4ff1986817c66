use serde::{Deserialize, Serialize};
use std::ops::Mul;

/// A real 2x2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Jacobian2 {
    pub const IDENTITY: Jacobian2 = Jacobian2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Jacobian2 { m11, m12, m21, m22 }
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        ]
    }

    /// Inverse; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Jacobian2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Jacobian2::new(
            self.m22 / d,
            -self.m12 / d,
            -self.m21 / d,
            self.m11 / d,
        ))
    }

    /// Solves `self · v = rhs`.
    pub fn solve(&self, rhs: [f64; 2]) -> Option<[f64; 2]> {
        self.inverse().map(|inv| inv.apply(rhs))
    }

    pub fn minus_identity(&self) -> Jacobian2 {
        Jacobian2::new(self.m11 - 1.0, self.m12, self.m21, self.m22 - 1.0)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.m11 * self.m11 + self.m12 * self.m12 + self.m21 * self.m21 + self.m22 * self.m22)
            .sqrt()
    }

    /// 2-norm condition number from the singular values.
    pub fn condition(&self) -> f64 {
        let f2 = self.norm().powi(2);
        let d = self.det().abs();
        let disc = (f2 * f2 - 4.0 * d * d).max(0.0).sqrt();
        let smax = ((f2 + disc) / 2.0).sqrt();
        let smin = ((f2 - disc) / 2.0).max(0.0).sqrt();
        if smin == 0.0 {
            f64::INFINITY
        } else {
            smax / smin
        }
    }

    pub fn max_abs_diff(&self, other: &Jacobian2) -> f64 {
        [
            self.m11 - other.m11,
            self.m12 - other.m12,
            self.m21 - other.m21,
            self.m22 - other.m22,
        ]
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl Mul for Jacobian2 {
    type Output = Jacobian2;
    fn mul(self, b: Jacobian2) -> Jacobian2 {
        Jacobian2::new(
            self.m11 * b.m11 + self.m12 * b.m21,
            self.m11 * b.m12 + self.m12 * b.m22,
            self.m21 * b.m11 + self.m22 * b.m21,
            self.m21 * b.m12 + self.m22 * b.m22,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unipotent_power() {
        let twist = Jacobian2::new(1.0, 1.0, 0.0, 1.0);
        let mut acc = Jacobian2::IDENTITY;
        for _ in 0..7 {
            acc = twist * acc;
        }
        assert_eq!(acc, Jacobian2::new(1.0, 7.0, 0.0, 1.0));
        assert_eq!(acc.trace(), 2.0);
        assert_eq!(acc.det(), 1.0);
    }

    #[test]
    fn inverse_and_condition() {
        let a = Jacobian2::new(2.0, 1.0, 1.0, 1.0);
        let i = a * a.inverse().unwrap();
        assert!(i.max_abs_diff(&Jacobian2::IDENTITY) < 1e-15);
        assert!((Jacobian2::new(3.0, 0.0, 0.0, 0.5).condition() - 6.0).abs() < 1e-12);
        assert!(Jacobian2::new(0.0, 3.0, 0.0, 0.0).condition().is_infinite());
    }
}
