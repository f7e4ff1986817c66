use super::map::SymplecticMap;
use super::point::{circle_delta, Space};
use crate::error::Result;
use serde::{Deserialize, Serialize};

/// Rectangle `[x_min, x_max] × [y_min, y_max]` of lifted coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    #[serde(with = "crate::decimal")]
    pub x_min: f64,
    #[serde(with = "crate::decimal")]
    pub x_max: f64,
    #[serde(with = "crate::decimal")]
    pub y_min: f64,
    #[serde(with = "crate::decimal")]
    pub y_max: f64,
    pub space: Space,
}

impl Region {
    /// Full circle in x times a y band.
    pub fn band(y_min: f64, y_max: f64, space: Space) -> Self {
        Region { x_min: 0.0, x_max: 1.0, y_min, y_max, space }
    }

    pub fn torus() -> Self {
        Self::band(0.0, 1.0, Space::Torus)
    }

    pub fn contains_y(&self, y: f64) -> bool {
        y >= self.y_min && y <= self.y_max
    }
}

/// Distance between two lifted points in the metric of `space`.
pub fn lifted_distance(a: (f64, f64), b: (f64, f64), space: Space) -> f64 {
    let dx = circle_delta(a.0, b.0);
    let dy = match space {
        Space::Torus => circle_delta(a.1, b.1),
        Space::Cylinder => b.1 - a.1,
    };
    dx.hypot(dy)
}

/// Grid abscissae used by [`sup_distance`]: dyadic, so that larger
/// densities always refine smaller ones.
pub fn dyadic_axis(lo: f64, hi: f64, density: usize) -> Vec<f64> {
    let cells = density.max(1).next_power_of_two();
    (0..=cells)
        .map(|i| lo + (hi - lo) * i as f64 / cells as f64)
        .collect()
}

/// Largest distance between the images of `a` and `b` over a deterministic
/// dyadic grid of `region`. Refining the density never decreases the value.
pub fn sup_distance(
    a: &SymplecticMap,
    b: &SymplecticMap,
    region: &Region,
    density: usize,
) -> Result<f64> {
    let xs = dyadic_axis(region.x_min, region.x_max, density);
    let ys = dyadic_axis(region.y_min, region.y_max, density);
    let mut sup = 0.0_f64;
    for &y in &ys {
        for &x in &xs {
            let pa = a.apply_lift(x, y)?;
            let pb = b.apply_lift(x, y)?;
            sup = sup.max(lifted_distance(pa, pb, region.space));
        }
    }
    Ok(sup)
}

/// Largest distance between the images of `a` and `b` over explicit points.
pub fn probe_distance(a: &SymplecticMap, b: &SymplecticMap, probes: &[[f64; 2]], space: Space) -> Result<f64> {
    let mut sup = 0.0_f64;
    for p in probes {
        let pa = a.apply_lift(p[0], p[1])?;
        let pb = b.apply_lift(p[0], p[1])?;
        sup = sup.max(lifted_distance(pa, pb, space));
    }
    Ok(sup)
}
