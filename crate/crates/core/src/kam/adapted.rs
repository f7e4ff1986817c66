use super::cohomology::{solve_cohomological, DIVISOR_FLOOR};
use super::invariance::KamCurve;
use crate::error::{Error, Result};
use crate::phase::{Jacobian2, Space, SymplecticMap, TrigPoly};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Frame `ψ₁ ∘ ψ₂` around a KAM curve in which the derivative along the
/// circle is `[[1, α*], [0, 1]]`, with `ψ₂(z₁, z₂) = (z₁ + β(z₁) z₂, z₂)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptedChart {
    pub beta: TrigPoly,
    /// Twist `α(z)` of the map in the curve frame `ψ₁`.
    pub alpha: TrigPoly,
    #[serde(with = "crate::decimal")]
    pub alpha_star: f64,
    /// `max |conjugated derivative - [[1, α*], [0, 1]]|` on the grid.
    #[serde(with = "crate::decimal")]
    pub conjugation_error: f64,
}

fn chart_jacobian(curve: &KamCurve, beta: &TrigPoly, z: f64) -> Jacobian2 {
    curve.frame().jacobian(z) * Jacobian2::new(1.0, beta.eval(z), 0.0, 1.0)
}

/// Averaged twist `α*` and the shear `β` solving `α(z) = β(z+θ) - β(z) + α*`.
pub fn adapted_coordinates(map: &SymplecticMap, curve: &KamCurve, samples: usize) -> Result<AdaptedChart> {
    let len = samples.max(16).next_power_of_two();
    let theta = curve.theta;
    let frame = curve.frame();
    let mut values = Vec::with_capacity(len);
    for l in 0..len {
        let z = l as f64 / len as f64;
        values.push(frame.twist(map, z, 1, theta)?);
    }
    let alpha = TrigPoly::from_samples(&values);
    let sol = solve_cohomological(&alpha, theta, DIVISOR_FLOOR)?;
    let target = Jacobian2::new(1.0, sol.mean, 0.0, 1.0);
    let mut conjugation_error = 0.0_f64;
    for l in 0..len {
        let z = l as f64 / len as f64;
        let (x, y) = curve.point(z);
        let jac = map.jacobian(crate::PhasePoint::cylinder(x, y))?;
        let start = chart_jacobian(curve, &sol.beta, z);
        let end = chart_jacobian(curve, &sol.beta, z + theta);
        let inv = end.inverse().ok_or(Error::NotDiffeo { min_derivative: 0.0 })?;
        conjugation_error = conjugation_error.max((inv * jac * start).max_abs_diff(&target));
    }
    Ok(AdaptedChart { beta: sol.beta, alpha, alpha_star: sol.mean, conjugation_error })
}

/// Outcome of the KAM smallness test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallnessReport {
    #[serde(with = "crate::decimal")]
    pub sup: f64,
    #[serde(with = "crate::decimal")]
    pub threshold: f64,
    pub passed: bool,
    /// Complex strip points were used (closed-form maps only).
    pub complex: bool,
}

/// Deviation of `map` from `(z₁ + θ + α z₂, z₂)` over `|Im z₁| <= r`,
/// `|z₂| <= δ`, compared with `δ^{3/2}`. Flow maps fall back to a real grid.
pub fn kam_smallness(
    map: &SymplecticMap,
    theta: f64,
    alpha: f64,
    r: f64,
    delta: f64,
    grid: usize,
) -> Result<SmallnessReport> {
    let grid = grid.max(2);
    let complex = r > 0.0 && map.eval_scalar(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)).is_ok();
    let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    };
    let xs: Vec<f64> = (0..grid).map(|i| i as f64 / grid as f64).collect();
    let ys = axis(-delta, delta, grid);
    let mut sup = 0.0_f64;
    if complex {
        let imags = axis(-r, r, 5);
        let imag_y = axis(-delta, delta, 5);
        for &s in &imags {
            for &x in &xs {
                for &y in &ys {
                    for &t in &imag_y {
                        let z1 = Complex64::new(x, s);
                        let z2 = Complex64::new(y, t);
                        if z2.norm() > delta * (1.0 + 1e-12) {
                            continue;
                        }
                        let (fx, fy) = map.eval_scalar(z1, z2)?;
                        let dx = fx - (z1 + theta + alpha * z2);
                        let dy = fy - z2;
                        sup = sup.max(dx.norm().hypot(dy.norm()));
                    }
                }
            }
        }
    } else {
        for &x in &xs {
            for &y in &ys {
                let (fx, fy) = map.apply_lift(x, y)?;
                sup = sup.max((fx - (x + theta + alpha * y)).hypot(fy - y));
            }
        }
    }
    let threshold = delta.powf(1.5);
    Ok(SmallnessReport { sup, threshold, passed: sup < threshold, complex })
}

/// Does the image of the graph `y = g(x)` meet the graph?
///
/// Compares the image with the graph over the image abscissae; a zero or a
/// sign change of the vertical offset means they intersect.
pub fn intersection_check(map: &SymplecticMap, g: &TrigPoly, samples: usize, space: Space) -> Result<bool> {
    let n = samples.max(8);
    let mut offsets = Vec::with_capacity(n);
    let mut prev_x: Option<f64> = None;
    let mut first_x = 0.0;
    for i in 0..n {
        let x = i as f64 / n as f64;
        let (fx, fy) = map.apply_lift(x, g.eval(x))?;
        if let Some(px) = prev_x {
            if fx <= px {
                return Err(Error::GraphFolded { x });
            }
        } else {
            first_x = fx;
        }
        prev_x = Some(fx);
        let mut d = fy - g.eval(fx);
        if space == Space::Torus {
            d -= d.round();
        }
        offsets.push(d);
    }
    if let Some(px) = prev_x {
        if px >= first_x + 1.0 {
            return Err(Error::GraphFolded { x: 1.0 - 1.0 / n as f64 });
        }
    }
    let any_zero = offsets.contains(&0.0);
    let positive = offsets.iter().any(|&d| d > 0.0);
    let negative = offsets.iter().any(|&d| d < 0.0);
    Ok(any_zero || (positive && negative))
}
