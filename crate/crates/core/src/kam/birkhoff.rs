use crate::error::{Error, Result};
use crate::phase::{Jacobian2, Jet3, SymplecticMap};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Third-order Birkhoff data at an elliptic fixed point: the map is
/// conjugate to a rotation by `alpha0 + alpha1 r^2` up to higher order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistCoefficient {
    #[serde(with = "crate::decimal")]
    pub alpha0: f64,
    #[serde(with = "crate::decimal")]
    pub alpha1: f64,
    /// `alpha1 > 0`.
    pub moser_stable: bool,
}

/// Linear symplectic change of basis `P` (det 1) with `P^{-1} A P` a rotation.
fn rotation_basis(a: &Jacobian2) -> Result<(f64, Jacobian2)> {
    let cos = a.trace() / 2.0;
    if !(cos.abs() < 1.0) {
        return Err(Error::DomainError(format!("fixed point not elliptic: trace {}", a.trace())));
    }
    let sin = (1.0 - cos * cos).sqrt() * a.m21.signum();
    let omega = sin.atan2(cos);
    // S = (A - cos I) / sin squares to -I; P J P^{-1} = S with P upper triangular
    let s21 = a.m21 / sin;
    let s11 = (a.m11 - cos) / sin;
    let s = s21.sqrt();
    Ok((omega, Jacobian2::new(1.0 / s, s11 / s, 0.0, s)))
}

fn cubic_coeffs(gx: &Jet3, gy: &Jet3) -> [[Complex64; 4]; 4] {
    // g(ζ, ζ̄) = gx + i gy with X = (ζ + ζ̄)/2, Y = (ζ - ζ̄)/(2i)
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    let half = Complex64::new(0.5, 0.0);
    let x_lin = [half, half];
    let y_lin = [Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5)];
    for &(i, j) in crate::phase::scalar::JET_EXPONENTS.iter() {
        let coeff = Complex64::new(gx.coeff(i, j), gy.coeff(i, j));
        if coeff == Complex64::new(0.0, 0.0) {
            continue;
        }
        // expand X^i Y^j into monomials ζ^a ζ̄^b
        let mut poly = vec![vec![Complex64::new(0.0, 0.0); 4]; 4];
        poly[0][0] = Complex64::new(1.0, 0.0);
        for factor in std::iter::repeat_n(x_lin, i).chain(std::iter::repeat_n(y_lin, j)) {
            let mut next = vec![vec![Complex64::new(0.0, 0.0); 4]; 4];
            for a in 0..4 {
                for b in 0..4 - a {
                    let c = poly[a][b];
                    if c == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    if a + 1 + b <= 3 {
                        next[a + 1][b] += c * factor[0];
                        next[a][b + 1] += c * factor[1];
                    }
                }
            }
            poly = next;
        }
        for a in 0..4 {
            for b in 0..4 - a {
                out[a][b] += coeff * poly[a][b];
            }
        }
    }
    out
}

/// `(α₀, α₁)` at an elliptic fixed point from the cubic jet of the map.
pub fn twist_coefficient(map: &SymplecticMap, fixed: [f64; 2]) -> Result<TwistCoefficient> {
    let (x0, y0) = (fixed[0], fixed[1]);
    let (fx, fy) = map.eval_scalar(Jet3::var_u(x0), Jet3::var_v(y0))?;
    let lin = Jacobian2::new(fx.coeff(1, 0), fx.coeff(0, 1), fy.coeff(1, 0), fy.coeff(0, 1));
    let (omega, p) = rotation_basis(&lin)?;
    let lambda = Complex64::from_polar(1.0, omega);
    for order in 1..=4u32 {
        if (lambda.powu(order) - 1.0).norm() < 1e-6 {
            return Err(Error::ResonantEigenvalue { order });
        }
    }
    // jet in the rotation basis: (u, v) = P (X, Y)
    let (bx, by) = (Jet3::var_u(0.0), Jet3::var_v(0.0));
    let cst = |c: f64| Jet3::constant(c);
    let u = cst(p.m11) * bx + cst(p.m12) * by;
    let v = cst(p.m21) * bx + cst(p.m22) * by;
    let (gx, gy) = map.eval_scalar(cst(x0) + u, cst(y0) + v)?;
    let (gx, gy) = (gx - cst(gx.coeffs[0]), gy - cst(gy.coeffs[0]));
    let pinv = p.inverse().ok_or(Error::NotDiffeo { min_derivative: 0.0 })?;
    let nx = cst(pinv.m11) * gx + cst(pinv.m12) * gy;
    let ny = cst(pinv.m21) * gx + cst(pinv.m22) * gy;
    let a = cubic_coeffs(&nx, &ny);
    // Taylor coefficients with factorial normalization
    let g20 = a[2][0] * 2.0;
    let g11 = a[1][1];
    let g02 = a[0][2] * 2.0;
    let g21 = a[2][1] * 2.0;
    let lb = lambda.conj();
    let one = Complex64::new(1.0, 0.0);
    let c1 = g20 * g11 * (lb - 3.0 + lambda * 2.0) / ((lambda * lambda - lambda) * (lb - one) * 2.0)
        + g11.norm_sqr() / (one - lb)
        + g02.norm_sqr() / ((lambda * lambda - lb) * 2.0)
        + g21 / 2.0;
    let alpha1 = (lb * c1).im;
    Ok(TwistCoefficient { alpha0: omega, alpha1, moser_stable: alpha1 > 0.0 })
}

/// Mean rotation angle per step (radians) of the orbit of `start` about `center`.
pub fn mean_rotation_angle(map: &SymplecticMap, center: [f64; 2], start: [f64; 2], n_iter: usize) -> Result<f64> {
    let (mut x, mut y) = (start[0], start[1]);
    let mut total = 0.0;
    for _ in 0..n_iter {
        let (nx, ny) = map.apply_lift(x, y)?;
        let a0 = (y - center[1]).atan2(x - center[0]);
        let a1 = (ny - center[1]).atan2(nx - center[0]);
        let mut d = (a1 - a0) % TAU;
        if d < 0.0 {
            d += TAU;
        }
        total += d;
        (x, y) = (nx, ny);
    }
    Ok(total / n_iter as f64)
}
