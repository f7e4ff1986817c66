use super::scalar::Scalar;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cell::RefCell;
use std::f64::consts::TAU;

/// Harmonic index after which the rotation recurrence is re-anchored with
/// a fresh `sin_cos`, bounding accumulated roundoff.
const REANCHOR: usize = 32;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let plan = if inverse {
            planner.plan_fft_inverse(buf.len())
        } else {
            planner.plan_fft_forward(buf.len())
        };
        plan.process(buf);
    });
}

/// Real trigonometric polynomial
/// `mean + sum_k a_k cos(2πkx) + b_k sin(2πkx)` on the circle R/Z.
///
/// Harmonics are stored densely: `cos[k-1]`, `sin[k-1]` hold `a_k`, `b_k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    mean: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigPoly {
    pub fn new(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        let n = cos.len().max(sin.len());
        let mut cos = cos;
        let mut sin = sin;
        cos.resize(n, 0.0);
        sin.resize(n, 0.0);
        let mut p = TrigPoly { mean, cos, sin };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        TrigPoly { mean: c, ..Default::default() }
    }

    /// Builds from sparse `(k, a_k, b_k)` triples; repeated `k` accumulate.
    pub fn from_harmonics(mean: f64, harmonics: &[(usize, f64, f64)]) -> Self {
        let degree = harmonics.iter().map(|h| h.0).max().unwrap_or(0);
        let mut cos = vec![0.0; degree];
        let mut sin = vec![0.0; degree];
        for &(k, a, b) in harmonics {
            if k == 0 {
                continue;
            }
            cos[k - 1] += a;
            sin[k - 1] += b;
        }
        Self::new(mean, cos, sin)
    }

    /// `a cos(2πkx) + b sin(2πkx)`.
    pub fn harmonic(k: usize, a: f64, b: f64) -> Self {
        Self::from_harmonics(0.0, &[(k, a, b)])
    }

    fn trim(&mut self) {
        while let (Some(&a), Some(&b)) = (self.cos.last(), self.sin.last()) {
            if a == 0.0 && b == 0.0 {
                self.cos.pop();
                self.sin.pop();
            } else {
                break;
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    pub fn is_constant(&self) -> bool {
        self.cos.is_empty()
    }

    /// `(a_k, b_k)`; zero beyond the degree, `(mean, 0)` for `k = 0`.
    pub fn coeff(&self, k: usize) -> (f64, f64) {
        if k == 0 {
            (self.mean, 0.0)
        } else if k <= self.degree() {
            (self.cos[k - 1], self.sin[k - 1])
        } else {
            (0.0, 0.0)
        }
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    /// Complex coefficient of `e^{2πikx}` for `k >= 0`.
    pub fn complex_coeff(&self, k: usize) -> Complex64 {
        let (a, b) = self.coeff(k);
        if k == 0 {
            Complex64::new(a, 0.0)
        } else {
            Complex64::new(a / 2.0, -b / 2.0)
        }
    }

    /// Inverse of [`TrigPoly::complex_coeff`] for a real polynomial.
    pub fn from_complex_coeffs(mean: f64, positive: &[Complex64]) -> Self {
        let cos = positive.iter().map(|c| 2.0 * c.re).collect();
        let sin = positive.iter().map(|c| -2.0 * c.im).collect();
        Self::new(mean, cos, sin)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_derivs::<1>(x)[0]
    }

    /// Value and first derivative.
    pub fn eval_d1(&self, x: f64) -> (f64, f64) {
        let v = self.eval_derivs::<2>(x);
        (v[0], v[1])
    }

    /// Value and the first `D - 1` derivatives (`D <= 4`) in one pass.
    pub fn eval_derivs<const D: usize>(&self, x: f64) -> [f64; D] {
        let mut out = [0.0; D];
        out[0] = self.mean;
        let (s1, c1) = (TAU * x).sin_cos();
        let (mut s, mut c) = (0.0, 1.0);
        for k in 1..=self.degree() {
            if k % REANCHOR == 1 && k > 1 {
                let r = (k as f64 * x).fract();
                (s, c) = (TAU * r).sin_cos();
            } else {
                (s, c) = (s * c1 + c * s1, c * c1 - s * s1);
            }
            let (a, b) = (self.cos[k - 1], self.sin[k - 1]);
            let even = a * c + b * s;
            let odd = b * c - a * s;
            out[0] += even;
            if D > 1 {
                let w = TAU * k as f64;
                out[1] += w * odd;
                if D > 2 {
                    out[2] -= w * w * even;
                    if D > 3 {
                        out[3] -= w * w * w * odd;
                    }
                }
            }
        }
        out
    }

    /// Evaluation over any [`Scalar`], e.g. complex strip points or jets.
    pub fn eval_scalar<S: Scalar>(&self, x: S) -> S {
        let mut acc = S::from_f64(self.mean);
        if self.is_constant() {
            return acc;
        }
        let (s1, c1) = x.sin_cos_2pi();
        let (mut s, mut c) = (S::from_f64(0.0), S::from_f64(1.0));
        for k in 1..=self.degree() {
            if k % REANCHOR == 1 && k > 1 {
                (s, c) = (S::from_f64(k as f64) * x).sin_cos_2pi();
            } else {
                (s, c) = (s * c1 + c * s1, c * c1 - s * s1);
            }
            let (a, b) = (self.cos[k - 1], self.sin[k - 1]);
            if a != 0.0 {
                acc = acc + S::from_f64(a) * c;
            }
            if b != 0.0 {
                acc = acc + S::from_f64(b) * s;
            }
        }
        acc
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.eval_scalar(z)
    }

    pub fn derivative(&self) -> TrigPoly {
        let n = self.degree();
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for k in 1..=n {
            let w = TAU * k as f64;
            cos[k - 1] = w * self.sin[k - 1];
            sin[k - 1] = -w * self.cos[k - 1];
        }
        TrigPoly::new(0.0, cos, sin)
    }

    /// Mean-free antiderivative; only periodic when the mean vanishes.
    pub fn antiderivative(&self) -> Result<TrigPoly> {
        let scale = self.max_abs_coeff().max(1.0);
        if self.mean.abs() > 1e-14 * scale {
            return Err(Error::DomainError(format!(
                "antiderivative of a trigonometric polynomial with mean {:.3e} is not periodic",
                self.mean
            )));
        }
        let n = self.degree();
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for k in 1..=n {
            let w = TAU * k as f64;
            cos[k - 1] = -self.sin[k - 1] / w;
            sin[k - 1] = self.cos[k - 1] / w;
        }
        Ok(TrigPoly::new(0.0, cos, sin))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.cos
            .iter()
            .chain(self.sin.iter())
            .fold(self.mean.abs(), |m, v| m.max(v.abs()))
    }

    /// Sum of absolute coefficients, an upper bound for the sup norm.
    pub fn l1_norm(&self) -> f64 {
        self.mean.abs()
            + self
                .cos
                .iter()
                .zip(&self.sin)
                .map(|(a, b)| a.hypot(*b))
                .sum::<f64>()
    }

    pub fn scaled(&self, factor: f64) -> TrigPoly {
        TrigPoly::new(
            self.mean * factor,
            self.cos.iter().map(|v| v * factor).collect(),
            self.sin.iter().map(|v| v * factor).collect(),
        )
    }

    pub fn plus(&self, other: &TrigPoly) -> TrigPoly {
        let n = self.degree().max(other.degree());
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for k in 1..=n {
            let (a1, b1) = self.coeff(k);
            let (a2, b2) = other.coeff(k);
            cos[k - 1] = a1 + a2;
            sin[k - 1] = b1 + b2;
        }
        TrigPoly::new(self.mean + other.mean, cos, sin)
    }

    pub fn plus_constant(&self, c: f64) -> TrigPoly {
        let mut p = self.clone();
        p.mean += c;
        p
    }

    /// Exact product via the complex coefficients (product-to-sum).
    pub fn times(&self, other: &TrigPoly) -> TrigPoly {
        let (n1, n2) = (self.degree() as isize, other.degree() as isize);
        let n = (n1 + n2) as usize;
        let coeff = |p: &TrigPoly, k: isize| -> Complex64 {
            let c = p.complex_coeff(k.unsigned_abs());
            if k < 0 {
                c.conj()
            } else {
                c
            }
        };
        let mut prod = vec![Complex64::new(0.0, 0.0); n + 1];
        for k1 in -n1..=n1 {
            let c1 = coeff(self, k1);
            for k2 in -n2..=n2 {
                let k = k1 + k2;
                if k >= 0 {
                    prod[k as usize] += c1 * coeff(other, k2);
                }
            }
        }
        TrigPoly::from_complex_coeffs(prod[0].re, &prod[1..])
    }

    /// `x ↦ p(x + shift)`.
    pub fn shifted(&self, shift: f64) -> TrigPoly {
        let n = self.degree();
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for k in 1..=n {
            let (sw, cw) = (TAU * (k as f64 * shift).fract()).sin_cos();
            let (a, b) = (self.cos[k - 1], self.sin[k - 1]);
            cos[k - 1] = a * cw + b * sw;
            sin[k - 1] = b * cw - a * sw;
        }
        TrigPoly::new(self.mean, cos, sin)
    }

    /// Keeps harmonics up to `degree`, padding with zeros.
    pub fn truncated(&self, degree: usize) -> TrigPoly {
        let mut cos = self.cos.clone();
        let mut sin = self.sin.clone();
        cos.resize(degree, 0.0);
        sin.resize(degree, 0.0);
        TrigPoly::new(self.mean, cos, sin)
    }

    /// Values on the uniform grid `l / len`, via one inverse FFT.
    /// Harmonics at or beyond `len / 2` alias as they would when sampled.
    pub fn sample(&self, len: usize) -> Vec<f64> {
        assert!(len > 0);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        buf[0] += self.mean;
        for k in 1..=self.degree() {
            let c = self.complex_coeff(k);
            buf[k % len] += c;
            buf[(len - k % len) % len] += c.conj();
        }
        fft_in_place(&mut buf, true);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Trigonometric interpolant of uniform samples `values[l] = p(l / len)`.
    ///
    /// For even `len` the Nyquist harmonic keeps only its cosine part, so the
    /// interpolant is real and has degree at most `len / 2`.
    pub fn from_samples(values: &[f64]) -> TrigPoly {
        let len = values.len();
        assert!(len > 0);
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_in_place(&mut buf, false);
        let scale = 1.0 / len as f64;
        let half = len / 2;
        let mut cos = Vec::with_capacity(half);
        let mut sin = Vec::with_capacity(half);
        for (k, z) in buf.iter().enumerate().take(half + 1).skip(1) {
            let f = z * scale;
            if 2 * k == len {
                cos.push(f.re);
                sin.push(0.0);
            } else {
                cos.push(2.0 * f.re);
                sin.push(-2.0 * f.im);
            }
        }
        TrigPoly::new(buf[0].re * scale, cos, sin)
    }

    /// Largest absolute value on a uniform grid of `len` points.
    pub fn grid_sup(&self, len: usize) -> f64 {
        self.sample(len).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup norm estimate: grid maximum on a grid fine enough to resolve the
    /// highest harmonic eight times over.
    pub fn sup_norm(&self) -> f64 {
        let len = (16 * self.degree().max(4)).next_power_of_two();
        self.grid_sup(len)
    }
}

#[derive(Serialize, Deserialize)]
struct TrigPolyRepr {
    #[serde(with = "crate::decimal")]
    mean: f64,
    harmonics: Vec<HarmonicRepr>,
}

#[derive(Serialize, Deserialize)]
struct HarmonicRepr {
    k: usize,
    #[serde(with = "crate::decimal")]
    a: f64,
    #[serde(with = "crate::decimal")]
    b: f64,
}

impl Serialize for TrigPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let harmonics = (1..=self.degree())
            .filter_map(|k| {
                let (a, b) = self.coeff(k);
                (a != 0.0 || b != 0.0).then_some(HarmonicRepr { k, a, b })
            })
            .collect();
        TrigPolyRepr { mean: self.mean, harmonics }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TrigPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = TrigPolyRepr::deserialize(deserializer)?;
        if repr.harmonics.iter().any(|h| h.k == 0) {
            return Err(serde::de::Error::custom("harmonic index must be positive"));
        }
        let triples: Vec<_> = repr.harmonics.iter().map(|h| (h.k, h.a, h.b)).collect();
        Ok(TrigPoly::from_harmonics(repr.mean, &triples))
    }
}
