//! A unimodal interval map whose iterates are the identity on a cascade of
//! plateaus, oscillating plateau perturbations, and an exhaustive census of
//! periodic points of interval maps.

pub mod census;
pub mod unimodal;

pub use census::{
    interval_census, interval_census_csv, iterate, lap_partition, Continuum, IntervalCensus,
    IntervalCensusConfig, IntervalRoot, Lap,
};
pub use unimodal::{build_f0, cascade_piece, IntervalMap, PlateauBump, PlateauSpec, HYPERBOLICITY_MARGIN};

use crate::error::Result;
use serde::{Deserialize, Serialize};

/// A piecewise smooth self-map of a compact interval.
pub trait IntervalDynamics {
    fn domain(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }

    /// Value and derivative.
    fn eval(&self, x: f64) -> [f64; 2];

    /// Interior turning points; the map is monotone between them.
    fn critical_points(&self) -> Vec<f64>;
}

/// `T(x) = 1 - 2|x|` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TentMap;

impl IntervalDynamics for TentMap {
    fn eval(&self, x: f64) -> [f64; 2] {
        if x < 0.0 {
            [1.0 + 2.0 * x, 2.0]
        } else {
            [1.0 - 2.0 * x, -2.0]
        }
    }

    fn critical_points(&self) -> Vec<f64> {
        vec![0.0]
    }
}

/// Growth record for one perturbed plateau.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauGrowth {
    pub k: usize,
    pub period: usize,
    pub gamma: u32,
    #[serde(with = "crate::decimal")]
    pub amplitude: f64,
    #[serde(with = "crate::decimal")]
    pub margin: f64,
    /// Transverse roots of least period `k + 1` inside the plateau.
    pub plateau_roots: usize,
    /// Transverse roots of least period `k + 1` on the whole interval.
    pub total_roots: usize,
    pub hyperbolic: usize,
    pub continua: usize,
}

/// Perturbs plateaus `1..=kmax` in turn with `gamma_k = 2^{k+1}` and
/// counts period-`(k + 1)` points of the final map.
pub fn plateau_growth(
    map: &IntervalMap,
    kmax: usize,
    budget: f64,
    config: &IntervalCensusConfig,
) -> Result<(IntervalMap, Vec<PlateauGrowth>)> {
    let mut f = map.clone();
    for k in 1..=kmax {
        f = f.perturb_plateau(k, 1 << (k + 1), budget)?;
    }
    let mut out = Vec::new();
    for bump in f.bumps.clone() {
        let p = bump.plateau;
        let census = interval_census(&f, p.period, config)?;
        out.push(PlateauGrowth {
            k: p.k,
            period: p.period,
            gamma: bump.gamma,
            amplitude: bump.amplitude,
            margin: bump.crossing_margin(),
            plateau_roots: census.count_in(p.lo, p.hi),
            total_roots: census.roots.len(),
            hyperbolic: census.hyperbolic_count(),
            continua: census.continua.len(),
        });
    }
    Ok((f, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_map_counts() {
        let config = IntervalCensusConfig::default();
        for n in 1..=10 {
            let laps = lap_partition(&TentMap, n, config.max_laps).unwrap();
            assert_eq!(laps.len(), 1 << n);
            // all fixed points of T^n, whatever their least period
            let mut all = 0;
            for d in (1..=n).filter(|d| n % d == 0) {
                all += interval_census(&TentMap, d, &config).unwrap().roots.len();
            }
            assert_eq!(all, 1 << n, "n = {n}");
        }
        assert!(matches!(
            lap_partition(&TentMap, 12, 1000),
            Err(crate::Error::PartitionOverflow { .. })
        ));
    }

    #[test]
    fn unperturbed_plateau_is_a_continuum() {
        let f = build_f0(0.2, 6).unwrap();
        let c = interval_census(&f, 2, &IntervalCensusConfig::default()).unwrap();
        let p = f.plateau(1).unwrap();
        assert!(c
            .continua
            .iter()
            .any(|s| s.lo <= p.lo + 1e-9 && s.hi >= p.hi - 1e-9 && s.least_period == 2));
        assert_eq!(c.count_in(p.lo, p.hi), 0);
    }

    #[test]
    fn perturbed_plateau_census() {
        let f = build_f0(0.2, 6).unwrap().perturb_plateau(1, 4, 1e-4).unwrap();
        let c = interval_census(&f, 2, &IntervalCensusConfig::default()).unwrap();
        let p = f.plateau(1).unwrap();
        let inside: Vec<_> = c.roots.iter().filter(|r| r.x > p.lo && r.x < p.hi).collect();
        assert!(inside.len() >= 4);
        assert!(inside.iter().all(|r| (r.derivative - 1.0).abs() >= 1e-5));
        // crossings alternate between expanding and contracting
        for w in inside.windows(2) {
            assert!((w[0].derivative > 1.0) != (w[1].derivative > 1.0));
        }
        let orbit_points = inside.len() * 2;
        assert!(orbit_points >= 8);
        let expanding = inside.iter().filter(|r| r.derivative > 1.0).count() * 2;
        assert!(expanding >= 4);
        // the images of the crossings are found too
        for r in &inside {
            let y = f.eval(r.x)[0];
            assert!(c.roots.iter().any(|s| (s.x - y).abs() < 1e-9));
        }
    }

    #[test]
    fn doubling_gamma_does_not_lose_crossings() {
        let f = build_f0(0.2, 6).unwrap();
        let config = IntervalCensusConfig::default();
        let p = f.plateau(1).unwrap();
        let mut last = 0;
        for gamma in [2, 4, 8, 16] {
            let g = f.perturb_plateau(1, gamma, 1e-4).unwrap();
            let count = interval_census(&g, 2, &config).unwrap().count_in(p.lo, p.hi);
            assert!(count >= last, "gamma {gamma}: {count} < {last}");
            last = count;
        }
    }
}
