//! Number types the closed-form maps can be evaluated over: plain reals,
//! complex numbers (strip norms) and truncated bivariate Taylor jets
//! (normal forms).

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// `(sin 2πs, cos 2πs)`.
    fn sin_cos_2pi(self) -> (Self, Self);
    /// Real part of the constant term; used to seed inner Newton solves.
    fn real(self) -> f64;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn sin_cos_2pi(self) -> (Self, Self) {
        (TAU * self).sin_cos()
    }

    fn real(self) -> f64 {
        self
    }
}

impl Scalar for Complex64 {
    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }

    fn sin_cos_2pi(self) -> (Self, Self) {
        let z = self * TAU;
        (z.sin(), z.cos())
    }

    fn real(self) -> f64 {
        self.re
    }
}

/// Monomial exponents of a cubic jet in two variables, graded order.
pub const JET_EXPONENTS: [(usize, usize); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

/// Index of the monomial `u^i v^j` (requires `i + j <= 3`).
pub fn jet_index(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// Taylor polynomial of degree 3 in two variables `(u, v)`, truncated on
/// multiplication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    pub coeffs: [f64; 10],
}

impl Jet3 {
    pub fn constant(c: f64) -> Self {
        let mut coeffs = [0.0; 10];
        coeffs[0] = c;
        Jet3 { coeffs }
    }

    /// `c + u`, the first independent variable based at `c`.
    pub fn var_u(c: f64) -> Self {
        let mut j = Self::constant(c);
        j.coeffs[1] = 1.0;
        j
    }

    /// `c + v`, the second independent variable based at `c`.
    pub fn var_v(c: f64) -> Self {
        let mut j = Self::constant(c);
        j.coeffs[2] = 1.0;
        j
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs[jet_index(i, j)]
    }

    fn nilpotent(self) -> Self {
        let mut h = self;
        h.coeffs[0] = 0.0;
        h
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(mut self, rhs: Jet3) -> Jet3 {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(mut self, rhs: Jet3) -> Jet3 {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(mut self) -> Jet3 {
        for a in self.coeffs.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: Jet3) -> Jet3 {
        let mut out = [0.0; 10];
        for (ia, &(ai, aj)) in JET_EXPONENTS.iter().enumerate() {
            let a = self.coeffs[ia];
            if a == 0.0 {
                continue;
            }
            for (ib, &(bi, bj)) in JET_EXPONENTS.iter().enumerate() {
                if ai + aj + bi + bj > 3 {
                    continue;
                }
                out[jet_index(ai + bi, aj + bj)] += a * rhs.coeffs[ib];
            }
        }
        Jet3 { coeffs: out }
    }
}

impl Div for Jet3 {
    type Output = Jet3;
    fn div(self, rhs: Jet3) -> Jet3 {
        let b0 = rhs.coeffs[0];
        let u = rhs.nilpotent() * Jet3::constant(1.0 / b0);
        let u2 = u * u;
        let inv = (Jet3::constant(1.0) - u + u2 - u2 * u) * Jet3::constant(1.0 / b0);
        self * inv
    }
}

impl Scalar for Jet3 {
    fn from_f64(v: f64) -> Self {
        Jet3::constant(v)
    }

    fn sin_cos_2pi(self) -> (Self, Self) {
        let (s0, c0) = (TAU * self.coeffs[0]).sin_cos();
        let h = self.nilpotent() * Jet3::constant(TAU);
        let h2 = h * h;
        let h3 = h2 * h;
        let cos_h = Jet3::constant(1.0) - h2 * Jet3::constant(0.5);
        let sin_h = h - h3 * Jet3::constant(1.0 / 6.0);
        let s0j = Jet3::constant(s0);
        let c0j = Jet3::constant(c0);
        (s0j * cos_h + c0j * sin_h, c0j * cos_h - s0j * sin_h)
    }

    fn real(self) -> f64 {
        self.coeffs[0]
    }
}
