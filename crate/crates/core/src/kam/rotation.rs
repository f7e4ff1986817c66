use crate::error::{Error, Result};
use crate::phase::{PhasePoint, SymplecticMap};
use serde::{Deserialize, Serialize};

/// Rotation number estimate with an error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    #[serde(with = "crate::decimal")]
    pub value: f64,
    /// Difference between the weighted averages over the full orbit and its
    /// first half.
    #[serde(with = "crate::decimal")]
    pub error: f64,
    pub iterations: usize,
}

/// Smooth bump weight on `(0, 1)`.
fn weight(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (-1.0 / (s * (1.0 - s))).exp()
    }
}

fn weighted_mean(increments: &[f64], base: f64) -> f64 {
    let n = increments.len() as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for (k, d) in increments.iter().enumerate() {
        let w = weight((k as f64 + 0.5) / n);
        num += w * (d - base);
        den += w;
    }
    base + num / den
}

/// Weighted Birkhoff average of the lifted x-increments along an orbit.
///
/// Constant increments are returned exactly. Fails with `NonConvergent`
/// when the half-orbit and full-orbit averages differ by more than `bound`.
pub fn rotation_number(
    map: &SymplecticMap,
    start: PhasePoint,
    n_iter: usize,
    bound: f64,
) -> Result<RotationEstimate> {
    if n_iter < 2 {
        return Err(Error::DomainError("rotation number needs at least 2 iterations".into()));
    }
    let (mut x, mut y) = start.xy();
    let mut increments = Vec::with_capacity(n_iter);
    for _ in 0..n_iter {
        let s = map.step(x, y, false)?;
        increments.push(s.displacement[0]);
        x = (x + s.displacement[0]).rem_euclid(1.0);
        y += s.displacement[1];
        if start.space == crate::Space::Torus {
            y = y.rem_euclid(1.0);
        }
    }
    let base = increments[0];
    let full = weighted_mean(&increments, base);
    let half = weighted_mean(&increments[..n_iter / 2], base);
    let error = (full - half).abs();
    if !(error <= bound) {
        return Err(Error::NonConvergent { oscillation: error });
    }
    Ok(RotationEstimate { value: full, error, iterations: n_iter })
}
