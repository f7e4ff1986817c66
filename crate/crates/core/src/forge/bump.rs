use super::grid::ResonantGrid;
use crate::error::{Error, Result};
use crate::phase::TrigPoly;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How well the bump meets its derivative constraints on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpResiduals {
    /// `max |h'(x_{i,j})|`
    #[serde(with = "crate::decimal")]
    pub slope: f64,
    /// `max |h''(x_{i,0}) - (-1)^i|`
    #[serde(with = "crate::decimal")]
    pub curvature_orbit: f64,
    /// `max |h''(x_{i,j})|` over `j != 0`
    #[serde(with = "crate::decimal")]
    pub curvature_other: f64,
}

/// Trigonometric bump `h` with `h' = 0` on the whole grid and
/// `h'' = (-1)^i` at `x_{i,0}`, `h'' = 0` at the other grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub grid: ResonantGrid,
    pub h: TrigPoly,
    /// Envelope with `h'(x) = c(x) sin(πMx)`.
    pub envelope: TrigPoly,
    pub residuals: BumpResiduals,
}

impl BumpProfile {
    /// `h'(x)`.
    pub fn slope(&self) -> TrigPoly {
        self.h.derivative()
    }
}

/// Builds the bump from its envelope.
///
/// `sin(πMx)` vanishes exactly on the grid `m/M` and nowhere else, with
/// `d/dx sin(πMx) = πM (-1)^m` there. Choosing the envelope values
/// `c(m/M) = (-1)^m target_m / (πM)` therefore gives `h'' = target` on the grid.
/// The envelope is the trigonometric interpolant of those values; its Nyquist
/// term is cosine-only, so `c(x) sin(πMx)` has zero mean and a periodic
/// antiderivative.
pub fn build_bump(grid: &ResonantGrid) -> Result<BumpProfile> {
    let m = grid.size();
    let scale = 1.0 / (PI * m as f64);
    let mut values = vec![0.0; m];
    for i in 0..grid.orbit_count() {
        let idx = grid.index(i, 0);
        let target = if i % 2 == 0 { 1.0 } else { -1.0 };
        let parity = if idx.is_multiple_of(2) { 1.0 } else { -1.0 };
        values[idx] = parity * target * scale;
    }
    let envelope = TrigPoly::from_samples(&values);
    // interpolation check: the envelope must reproduce its data
    let back = envelope.sample(m);
    let worst = back
        .iter()
        .zip(&values)
        .fold(0.0_f64, |w, (a, b)| w.max((a - b).abs()));
    if !(worst <= 1e-9 * scale) {
        return Err(Error::InterpolationSingular);
    }
    assert!(m.is_multiple_of(2));
    let carrier = TrigPoly::harmonic(m / 2, 0.0, 1.0);
    let slope = envelope.times(&carrier);
    let h = slope.antiderivative()?;
    let residuals = measure_residuals(grid, &h);
    Ok(BumpProfile { grid: *grid, h, envelope, residuals })
}

fn measure_residuals(grid: &ResonantGrid, h: &TrigPoly) -> BumpResiduals {
    let mut r = BumpResiduals { slope: 0.0, curvature_orbit: 0.0, curvature_other: 0.0 };
    for i in 0..grid.orbit_count() {
        for j in 0..grid.n as usize {
            let [_, d1, d2] = h.eval_derivs::<3>(grid.point(i, j));
            r.slope = r.slope.max(d1.abs());
            if j == 0 {
                let target = if i % 2 == 0 { 1.0 } else { -1.0 };
                r.curvature_orbit = r.curvature_orbit.max((d2 - target).abs());
            } else {
                r.curvature_other = r.curvature_other.max(d2.abs());
            }
        }
    }
    r
}
