//! Independent search for periodic orbits of planar area-preserving maps.

pub mod export;
pub mod newton;
pub mod search;

pub use export::{census_csv, census_summary, CensusSummary};
pub use newton::{polish, NewtonConfig, Root};
pub use search::{find_periodic, Census, CensusConfig, DegenerateFamily, SeedStats};

use crate::error::{Error, Result};
use crate::phase::{lifted_distance, Jacobian2, Space, SymplecticMap};
use serde::{Deserialize, Serialize};

/// Default classification tolerance on `|trace| - 2`.
pub const CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitType {
    Hyperbolic,
    Elliptic,
    ParabolicAmbiguous,
}

impl OrbitType {
    pub fn label(self) -> &'static str {
        match self {
            OrbitType::Hyperbolic => "hyperbolic",
            OrbitType::Elliptic => "elliptic",
            OrbitType::ParabolicAmbiguous => "ambiguous",
        }
    }
}

/// Type of a periodic point of an area-preserving map from the trace of `D(f^n)`.
pub fn classify(trace: f64, tol_h: f64, tol_e: f64) -> OrbitType {
    if trace.abs() > 2.0 + tol_h {
        OrbitType::Hyperbolic
    } else if trace.abs() < 2.0 - tol_e {
        OrbitType::Elliptic
    } else {
        OrbitType::ParabolicAmbiguous
    }
}

/// One periodic orbit. `points[0]` is the representative (the
/// lexicographically smallest normalized point of the orbit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub period: usize,
    /// Lift winding in x over one period.
    pub winding: i64,
    #[serde(with = "crate::decimal")]
    pub trace: f64,
    pub kind: OrbitType,
    #[serde(with = "crate::decimal")]
    pub residual: f64,
    pub nondegenerate: bool,
    pub points: Vec<[f64; 2]>,
    #[serde(skip)]
    pub monodromy: Option<Jacobian2>,
}

impl OrbitRecord {
    pub fn representative(&self) -> [f64; 2] {
        self.points[0]
    }

    /// Eigenvalue check: real reciprocal pair off the unit circle for
    /// hyperbolic orbits, conjugate pair on it for elliptic ones.
    pub fn eigen_consistent(&self, tol: f64) -> bool {
        let Some(m) = self.monodromy else { return false };
        let tr = m.trace();
        let det = m.det();
        if (det - 1.0).abs() > 1e-6 {
            return false;
        }
        let disc = tr * tr / 4.0 - det;
        match self.kind {
            OrbitType::Hyperbolic => {
                if disc <= 0.0 {
                    return false;
                }
                let l1 = tr / 2.0 + disc.sqrt() * tr.signum();
                let l2 = det / l1;
                l1.abs() > 1.0 + tol && (l1 * l2 - 1.0).abs() < 1e-6
            }
            OrbitType::Elliptic => disc < 0.0 && (det.sqrt() - 1.0).abs() <= 1e-8,
            OrbitType::ParabolicAmbiguous => true,
        }
    }
}

/// Least divisor `d` of `n` with `f^d(point) = point` (mod lifts) within `tol`.
pub fn minimal_period(
    map: &SymplecticMap,
    point: [f64; 2],
    n: usize,
    space: Space,
    tol: f64,
) -> Result<usize> {
    if n == 0 {
        return Err(Error::DomainError("period must be positive".into()));
    }
    let (x0, y0) = (point[0], point[1]);
    let (mut x, mut y) = (x0, y0);
    let mut found = None;
    for k in 1..=n {
        (x, y) = map.apply_lift(x, y)?;
        if n.is_multiple_of(k) && lifted_distance((x0, y0), (x, y), space) <= tol {
            found.get_or_insert(k);
            if k == n {
                break;
            }
        }
    }
    let defect = lifted_distance((x0, y0), (x, y), space);
    if defect > tol {
        return Err(Error::NotPeriodic { period: n, defect });
    }
    Ok(found.unwrap_or(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_thresholds() {
        assert_eq!(classify(2.003, 1e-6, 1e-6), OrbitType::Hyperbolic);
        assert_eq!(classify(1.997, 1e-6, 1e-6), OrbitType::Elliptic);
        assert_eq!(classify(2.0 + 1e-9, 1e-6, 1e-6), OrbitType::ParabolicAmbiguous);
        assert_eq!(classify(2.0 - 1e-9, 1e-6, 1e-6), OrbitType::ParabolicAmbiguous);
        assert_eq!(classify(-2.5, 1e-6, 1e-6), OrbitType::Hyperbolic);
    }

    #[test]
    fn minimal_period_examples() {
        let fixed = SymplecticMap::identity();
        assert_eq!(minimal_period(&fixed, [0.2, 0.1], 6, Space::Torus, 1e-10).unwrap(), 1);
        let third = SymplecticMap::Translation { theta: 1.0 / 3.0 };
        assert_eq!(minimal_period(&third, [0.2, 0.1], 6, Space::Torus, 1e-10).unwrap(), 3);
        let drift = SymplecticMap::Translation { theta: 1e-3 };
        assert!(matches!(
            minimal_period(&drift, [0.2, 0.1], 6, Space::Torus, 1e-10),
            Err(Error::NotPeriodic { .. })
        ));
    }
}
