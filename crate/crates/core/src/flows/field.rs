use crate::error::Result;
use crate::phase::map::invert_circle_map;
use crate::phase::{TrigPoly, YFunction};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Value, gradient and Hessian of a Hamiltonian at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hess {
    pub h: f64,
    pub hx: f64,
    pub hy: f64,
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

/// Scalar fields whose flows the library can build.
///
/// The induced vector field is `(∂H/∂y, -∂H/∂x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianField {
    /// `H = h(x)`.
    XOnly { h: TrigPoly },
    /// `H = k(y)`.
    YOnly { k: YFunction },
    /// `H = (1/2π) a(x) sin 2π(y - g(x))` with `a = φ' ∘ φ^{-1}`,
    /// `φ(z) = z + xi(z)` and `g = eta ∘ φ^{-1}`; transports the curve
    /// `z ↦ (φ(z), eta(z))` along itself with unit parameter speed.
    CurveFollowing { xi: TrigPoly, eta: TrigPoly },
    /// `H = -h(x) χ(y)` with a smoothstep cutoff: `χ = 1` on
    /// `|y| <= delta - width`, `χ = 0` on `|y| >= delta`.
    BumpCutoff {
        h: TrigPoly,
        #[serde(with = "crate::decimal")]
        delta: f64,
        #[serde(with = "crate::decimal")]
        width: f64,
    },
    /// `H = -h(z) χ(w)` in the frame `(x, y) = (φ(z), w / φ'(z) + eta(z))`,
    /// with the cutoff of `BumpCutoff` and `y - eta` wrapped to `[-1/2, 1/2)`.
    /// Near the curve its flow is the vertical shear `w ↦ w + t h'(z)`.
    CurveBump {
        h: TrigPoly,
        xi: TrigPoly,
        eta: TrigPoly,
        #[serde(with = "crate::decimal")]
        delta: f64,
        #[serde(with = "crate::decimal")]
        width: f64,
    },
}

/// `u ∘ φ^{-1}` and its first two derivatives from the derivatives of `u`
/// at `z = φ^{-1}(x)`, given `φ'(z)` and `φ''(z)`.
fn pull_back(u: [f64; 3], p1: f64, p2: f64) -> [f64; 3] {
    [u[0], u[1] / p1, (u[2] - u[1] * p2 / p1) / (p1 * p1)]
}

/// Degree-7 smoothstep `S(s)` on `[0,1]` (C^3 at both ends) with two derivatives.
pub fn smoothstep7(s: f64) -> [f64; 3] {
    if s <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    if s >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let s2 = s * s;
    let s3 = s2 * s;
    let v = s3 * s * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s)));
    let d1 = 140.0 * s3 * (1.0 - s).powi(3);
    let d2 = 420.0 * s2 * (1.0 - s).powi(2) * (1.0 - 2.0 * s);
    [v, d1, d2]
}

/// Even cutoff: `1` on `|y| <= delta - width`, `0` on `|y| >= delta`.
pub fn cutoff(y: f64, delta: f64, width: f64) -> [f64; 3] {
    let s = (delta - y.abs()) / width;
    let [v, d1, d2] = smoothstep7(s);
    let sign = if y >= 0.0 { 1.0 } else { -1.0 };
    // d/dy of s is -sign/width
    [v, -sign * d1 / width, d2 / (width * width)]
}

impl HamiltonianField {
    pub fn hess(&self, x: f64, y: f64) -> Result<Hess> {
        Ok(match self {
            HamiltonianField::XOnly { h } => {
                let [v, d1, d2] = h.eval_derivs::<3>(x);
                Hess { h: v, hx: d1, hxx: d2, ..Default::default() }
            }
            HamiltonianField::YOnly { k } => {
                let [v, d1, d2] = k.eval_derivs::<3>(y);
                Hess { h: v, hy: d1, hyy: d2, ..Default::default() }
            }
            HamiltonianField::CurveFollowing { xi, eta } => {
                let z = invert_circle_map(xi, x)?;
                let [_, x1, x2, x3] = xi.eval_derivs::<4>(z);
                let p1 = 1.0 + x1;
                // a(x) = φ'(z(x)) and its x-derivatives, z' = 1/φ'(z)
                let a = p1;
                let a1 = x2 / p1;
                let a2 = (x3 / p1 - x2 * x2 / (p1 * p1)) / p1;
                // g = eta ∘ φ^{-1} and its x-derivatives
                let [g0, g1, g2] = pull_back(eta.eval_derivs::<3>(z), p1, x2);
                let (s, c) = (TAU * (y - g0)).sin_cos();
                Hess {
                    h: a * s / TAU,
                    hy: a * c,
                    hyy: -TAU * a * s,
                    hx: a1 * s / TAU - a * g1 * c,
                    hxy: a1 * c + TAU * a * g1 * s,
                    hxx: a2 * s / TAU - 2.0 * a1 * g1 * c - a * g2 * c - TAU * a * g1 * g1 * s,
                }
            }
            HamiltonianField::BumpCutoff { h, delta, width } => {
                let [chi, chi1, chi2] = cutoff(y, *delta, *width);
                if chi == 0.0 && chi1 == 0.0 {
                    return Ok(Hess::default());
                }
                let [v, d1, d2] = h.eval_derivs::<3>(x);
                Hess {
                    h: -v * chi,
                    hx: -d1 * chi,
                    hy: -v * chi1,
                    hxx: -d2 * chi,
                    hxy: -d1 * chi1,
                    hyy: -v * chi2,
                }
            }
            HamiltonianField::CurveBump { h, xi, eta, delta, width } => {
                let z = invert_circle_map(xi, x)?;
                let [_, x1, x2, x3] = xi.eval_derivs::<4>(z);
                let p1 = 1.0 + x1;
                let [g0, g1, g2] = pull_back(eta.eval_derivs::<3>(z), p1, x2);
                let offset = y - g0;
                let offset = offset - offset.round();
                let w = p1 * offset;
                let [chi, chi1, chi2] = cutoff(w, *delta, *width);
                if chi == 0.0 && chi1 == 0.0 && chi2 == 0.0 {
                    return Ok(Hess::default());
                }
                // a = φ' ∘ φ^{-1} and its derivatives
                let a1 = x2 / p1;
                let a2 = (x3 / p1 - x2 * x2 / (p1 * p1)) / p1;
                let wx = a1 * offset - p1 * g1;
                let wxx = a2 * offset - 2.0 * a1 * g1 - p1 * g2;
                let [b0, b1, b2] = pull_back(h.eval_derivs::<3>(z), p1, x2);
                Hess {
                    h: -b0 * chi,
                    hx: -b1 * chi - b0 * chi1 * wx,
                    hy: -b0 * chi1 * p1,
                    hxx: -b2 * chi - 2.0 * b1 * chi1 * wx - b0 * (chi2 * wx * wx + chi1 * wxx),
                    hxy: -b1 * chi1 * p1 - b0 * (chi2 * wx * p1 + chi1 * a1),
                    hyy: -b0 * chi2 * p1 * p1,
                }
            }
        })
    }

    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.hess(x, y)?.h)
    }

    /// Vector field `(H_y, -H_x)`.
    pub fn vector_field(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        let d = self.hess(x, y)?;
        Ok([d.hy, -d.hx])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_difference_check(field: &HamiltonianField, x: f64, y: f64) {
        let e = 1e-5;
        let d = field.hess(x, y).unwrap();
        let at = |dx: f64, dy: f64| field.hess(x + dx, y + dy).unwrap();
        let fd_hx = (at(e, 0.0).h - at(-e, 0.0).h) / (2.0 * e);
        let fd_hy = (at(0.0, e).h - at(0.0, -e).h) / (2.0 * e);
        let fd_hxx = (at(e, 0.0).hx - at(-e, 0.0).hx) / (2.0 * e);
        let fd_hxy = (at(0.0, e).hx - at(0.0, -e).hx) / (2.0 * e);
        let fd_hyy = (at(0.0, e).hy - at(0.0, -e).hy) / (2.0 * e);
        for (a, b) in [
            (d.hx, fd_hx),
            (d.hy, fd_hy),
            (d.hxx, fd_hxx),
            (d.hxy, fd_hxy),
            (d.hyy, fd_hyy),
        ] {
            assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn curve_following_derivatives() {
        let field = HamiltonianField::CurveFollowing {
            xi: TrigPoly::harmonic(1, 0.0, 0.05),
            eta: TrigPoly::from_harmonics(0.1, &[(1, 0.02, 0.1), (2, 0.0, -0.03)]),
        };
        finite_difference_check(&field, 0.3, 0.17);
        finite_difference_check(&field, 0.81, -0.4);
    }

    #[test]
    fn bump_cutoff_derivatives_and_support() {
        let field = HamiltonianField::BumpCutoff {
            h: TrigPoly::harmonic(3, 0.2, 0.1),
            delta: 0.1,
            width: 0.04,
        };
        finite_difference_check(&field, 0.3, 0.075);
        finite_difference_check(&field, 0.6, -0.08);
        assert_eq!(field.hess(0.2, 0.1).unwrap(), Hess::default());
        // plateau: pure -h(x)
        let d = field.hess(0.2, 0.05).unwrap();
        assert_eq!(d.hy, 0.0);
    }

    #[test]
    fn curve_bump_derivatives_and_plateau() {
        let xi = TrigPoly::harmonic(1, 0.0, 0.05);
        let eta = TrigPoly::from_harmonics(0.1, &[(1, 0.02, 0.01)]);
        let h = TrigPoly::harmonic(3, 0.2, 0.1);
        let field = HamiltonianField::CurveBump { h: h.clone(), xi: xi.clone(), eta: eta.clone(), delta: 0.1, width: 0.04 };
        // inside the ramp, on both sides of the curve
        for (z, w) in [(0.3, 0.075), (0.6, -0.08), (0.05, 0.07)] {
            let (v, d) = xi.eval_d1(z);
            finite_difference_check(&field, z + v, w / (1.0 + d) + eta.eval(z));
        }
        // on the plateau the field is the lifted shear: x fixed, y' = h'(z)/φ'(z)
        for z in [0.0, 0.37, 0.8] {
            let (v, d) = xi.eval_d1(z);
            let [vx, vy] = field.vector_field(z + v, eta.eval(z) + 0.01).unwrap();
            assert_eq!(vx, 0.0);
            assert!((vy - h.eval_d1(z).1 / (1.0 + d)).abs() < 1e-13);
        }
        // outside the support, including the periodic copy one unit up
        assert_eq!(field.hess(0.2, eta.eval(0.2) + 0.3).unwrap(), Hess::default());
        let inside = field.hess(0.2, 0.1).unwrap();
        let copy = field.hess(0.2, 1.1).unwrap();
        assert!((inside.hx - copy.hx).abs() < 1e-12);
    }

    #[test]
    fn curve_following_is_tangent_to_graph() {
        let xi = TrigPoly::harmonic(1, 0.0, 0.05);
        let eta = TrigPoly::harmonic(1, 0.0, 0.1);
        let field = HamiltonianField::CurveFollowing { xi: xi.clone(), eta: eta.clone() };
        for z in [0.0, 0.21, 0.5, 0.77] {
            let (v, d) = xi.eval_d1(z);
            let (e, de) = eta.eval_d1(z);
            let [vx, vy] = field.vector_field(z + v, e).unwrap();
            assert!((vx - (1.0 + d)).abs() < 1e-13);
            assert!((vy - de).abs() < 1e-12);
        }
    }
}
