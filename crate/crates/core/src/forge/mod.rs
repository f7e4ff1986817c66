//! Resonant grids, the trigonometric bump and the forging of prescribed
//! hyperbolic and elliptic orbits on a resonant invariant circle.

pub mod assemble;
pub mod bump;
pub mod grid;

pub use assemble::{
    forge, orbit_table_csv, prepare, CurveFrame, ForgeOptions, ForgePlan, ForgeResult,
    OrbitPrediction, TSelection,
};
pub use bump::{build_bump, BumpProfile, BumpResiduals};
pub use grid::{gcd, ResonantGrid};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{find_periodic, CensusConfig, OrbitType};
    use crate::phase::{Region, Space, SymplecticMap};

    fn twist_third() -> SymplecticMap {
        SymplecticMap::compose(vec![
            SymplecticMap::IntegrableTwist { slope: 1.0 },
            SymplecticMap::Translation { theta: 1.0 / 3.0 },
        ])
    }

    #[test]
    fn traces_on_integrable_twist() {
        let grid = ResonantGrid::build(1, 3, 1).unwrap();
        let r = forge(&twist_third(), &grid, 1e-3).unwrap();
        assert_eq!(r.orbits.len(), 2);
        assert!((r.orbits[0].predicted_trace - 2.003).abs() < 1e-15);
        assert!((r.orbits[1].predicted_trace - 1.997).abs() < 1e-15);
        for o in &r.orbits {
            assert!((o.measured_trace - o.predicted_trace).abs() < 1e-12);
            assert!(o.residual <= 1e-10);
        }
        assert_eq!(r.orbits[0].kind, OrbitType::Hyperbolic);
        assert_eq!(r.orbits[1].kind, OrbitType::Elliptic);
        let flat = forge(&twist_third(), &grid, 0.0).unwrap();
        assert!(flat.orbits.iter().all(|o| o.measured_trace == 2.0));
    }

    #[test]
    fn negative_strength_swaps_types() {
        let grid = ResonantGrid::build(1, 3, 2).unwrap();
        let a = forge(&twist_third(), &grid, 1e-3).unwrap();
        let b = forge(&twist_third(), &grid, -1e-3).unwrap();
        for (x, y) in a.orbits.iter().zip(&b.orbits) {
            assert_ne!(x.kind, y.kind);
        }
    }

    #[test]
    fn preconditions() {
        let grid = ResonantGrid::build(1, 3, 1).unwrap();
        let off = SymplecticMap::compose(vec![
            SymplecticMap::IntegrableTwist { slope: 1.0 },
            SymplecticMap::Translation { theta: 0.3 },
        ]);
        assert!(matches!(forge(&off, &grid, 1e-3), Err(crate::Error::NotResonantCircle { .. })));
        let untwisted = SymplecticMap::Translation { theta: 1.0 / 3.0 };
        assert!(matches!(forge(&untwisted, &grid, 1e-3), Err(crate::Error::NoTwist { .. })));
    }

    #[test]
    fn census_finds_forged_orbits() {
        let grid = ResonantGrid::build(1, 3, 2).unwrap();
        let r = forge(&twist_third(), &grid, 1e-3).unwrap();
        let config = CensusConfig {
            seeds_x: 4 * grid.size(),
            seeds_y: 5,
            windings: vec![1],
            ..CensusConfig::default()
        };
        let region = Region::band(-0.05, 0.05, Space::Cylinder);
        let c = find_periodic(&r.map, 3, &region, &config).unwrap();
        assert_eq!(c.records.len(), 4, "{:?}", c.stats);
        assert_eq!(c.hyperbolic_points(), 6);
        assert_eq!(c.elliptic_points(), 6);
        assert!(c.records.iter().all(|rec| rec.eigen_consistent(1e-9)));
    }

    #[test]
    fn select_t_bounds() {
        let grid = ResonantGrid::build(1, 3, 1).unwrap();
        let plan = prepare(&twist_third(), &CurveFrame::identity(), &grid, &ForgeOptions::default()).unwrap();
        let s = plan.select_t(1e-2, None).unwrap();
        assert!((s.t - (1e-2 / plan.sup_per_unit_t).min(s.t_twist)).abs() < 1e-15);
        assert!(plan.select_t(2e-2, None).unwrap().t >= s.t);
        assert!(matches!(plan.select_t(0.0, None), Err(crate::Error::EmptyAdmissibleRange { .. })));
    }

    #[test]
    fn csv_rows() {
        let grid = ResonantGrid::build(1, 3, 2).unwrap();
        let r = forge(&twist_third(), &grid, 1e-3).unwrap();
        let csv = orbit_table_csv(&r);
        assert_eq!(csv.lines().count(), 13);
    }
}
