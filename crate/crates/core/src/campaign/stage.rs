use super::config::{CampaignConfig, StageSpec};
use crate::census::{find_periodic, Census, CensusConfig, OrbitType, SeedStats};
use crate::error::{Error, Result};
use crate::flows::curve_following_flow;
use crate::forge::{prepare, ForgeOptions, ForgeResult, ResonantGrid, TSelection};
use crate::kam::{solve_invariance, DiophantineCert, KamConfig, KamCurve};
use crate::phase::{probe_distance, sup_distance, Region, Space, SymplecticMap};
use serde::{Deserialize, Serialize};

/// Largest KAM residual a stage accepts on its input circle.
pub const CURVE_TOL: f64 = 1e-8;

/// The current map and its tracked invariant circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignState {
    pub map: SymplecticMap,
    pub curve: KamCurve,
}

/// An orbit stored for later persistence checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoredOrbit {
    pub stage: usize,
    pub period: usize,
    pub winding: i64,
    pub point: [f64; 2],
    pub kind: OrbitType,
}

/// Persistence of one earlier stage's orbits on the current map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Persistence {
    pub stage: usize,
    pub orbits: usize,
    pub persisted: usize,
    #[serde(with = "crate::decimal")]
    pub max_residual: f64,
    /// Largest distance an orbit moved since it was last seen.
    #[serde(with = "crate::decimal")]
    pub max_drift: f64,
}

/// What one stage did, with the counts behind its ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub p: i64,
    pub n: i64,
    pub gamma: usize,
    /// `N * gamma`.
    pub target: usize,
    pub hyperbolic: usize,
    pub elliptic: usize,
    /// `min(hyperbolic, elliptic) / gamma`.
    #[serde(with = "crate::decimal")]
    pub ratio: f64,
    #[serde(with = "crate::decimal")]
    pub eps: f64,
    /// Rotation shift `p/N - theta`.
    #[serde(with = "crate::decimal")]
    pub shift: f64,
    #[serde(with = "crate::decimal")]
    pub shift_bound: f64,
    pub forge: TSelection,
    /// Sup-distance from the map before the stage over the torus grid and
    /// the probes of the bump support.
    #[serde(with = "crate::decimal")]
    pub sup_distance: f64,
    /// Same measurement against the base map, with every stage's probes.
    #[serde(with = "crate::decimal")]
    pub total_distance: f64,
    pub predicted_hyperbolic: usize,
    pub predicted_elliptic: usize,
    pub census: SeedStats,
    pub degenerate_families: usize,
    /// Residual of the circle re-solved on the post-stage map.
    #[serde(with = "crate::decimal::opt")]
    pub kam_residual: Option<f64>,
    pub kam_modes: Option<usize>,
    #[serde(with = "crate::decimal::opt")]
    pub strip_radius: Option<f64>,
    pub persistence: Vec<Persistence>,
}

impl StageReport {
    pub fn recomputed_ratio(&self) -> f64 {
        self.hyperbolic.min(self.elliptic) as f64 / self.gamma as f64
    }
}

/// Output of [`run_stage`].
#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub map: SymplecticMap,
    pub forged: ForgeResult,
    pub census: Census,
    pub orbits: Vec<StoredOrbit>,
    /// Points across the bump support, where the torus grid is too coarse.
    pub probes: Vec<[f64; 2]>,
    pub report: StageReport,
}

/// Points `(φ(z), eta(z) + w / φ'(z))` for `|w| <= delta` on a grid fine
/// enough for `harmonics` oscillations around the circle.
pub fn band_probes(curve: &KamCurve, delta: f64, harmonics: usize) -> Vec<[f64; 2]> {
    let columns = (4 * harmonics.max(64)).next_power_of_two();
    let mut out = Vec::with_capacity(9 * columns);
    for i in 0..columns {
        let z = i as f64 / columns as f64;
        let (xi, dxi) = curve.xi.eval_d1(z);
        let eta = curve.eta.eval(z);
        for j in -4..=4 {
            out.push([z + xi, eta + delta * j as f64 / 4.0 / (1.0 + dxi)]);
        }
    }
    out
}

fn sup_dphi(curve: &KamCurve) -> f64 {
    let len = (8 * curve.xi.degree().max(32)).next_power_of_two();
    curve.xi.derivative().plus_constant(1.0).sample(len).into_iter().fold(0.0, f64::max)
}

/// Census band around the circle.
pub fn curve_band(curve: &KamCurve, half_height: f64) -> Region {
    let len = (8 * curve.eta.degree().max(32)).next_power_of_two();
    let ys = curve.eta.sample(len);
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Region::band(lo - half_height, hi + half_height, Space::Torus)
}

/// Bump support around the circle: half the frame height at which the twist
/// undoes the smaller of this and the previous rotation shift, so earlier
/// orbits stay outside it. `None` (a global bump) when the circle has no twist.
pub fn bump_cutoff(curve: &KamCurve, shift: f64, previous_shift: Option<f64>) -> Option<(f64, f64)> {
    if !(curve.mean_twist > 0.0) {
        return None;
    }
    let gap = previous_shift.map_or(shift.abs(), |s| s.abs().min(shift.abs()));
    let delta = (0.5 * gap / curve.mean_twist).min(0.25);
    (delta > 0.0).then_some((delta, 0.4 * delta))
}

/// Moves the circle to rotation `p/N`, forges `2 gamma` orbits on it and
/// counts them independently.
pub fn run_stage(
    state: &CampaignState,
    stage: usize,
    spec: &StageSpec,
    eps: f64,
    t_cap: f64,
    previous_shift: Option<f64>,
    config: &CampaignConfig,
) -> Result<StageOutcome> {
    let curve = &state.curve;
    if !(curve.residual <= CURVE_TOL) {
        return Err(Error::InvarianceViolation { x: 0.0, defect: curve.residual });
    }
    let gamma = spec.gamma();
    let target = spec.n as usize * gamma;
    let shift = spec.p as f64 / spec.n as f64 - curve.theta;
    // the flow moves points by at most |t| sup a = |t| sup φ'
    let shift_bound = shift.abs() * sup_dphi(curve);
    if shift_bound > eps / 2.0 {
        return Err(Error::BudgetExceeded { distance: shift_bound, budget: eps / 2.0 });
    }
    let flow = curve_following_flow(&curve.xi, &curve.eta, shift, config.integrator)?;
    let shifted = SymplecticMap::compose(vec![state.map.clone(), flow]);

    let grid = ResonantGrid::build(spec.p, spec.n, gamma)?;
    let options = ForgeOptions {
        invariance_tol: config.invariance_tol,
        space: Space::Torus,
        cutoff: bump_cutoff(curve, shift, previous_shift),
        integrator: config.integrator,
        ..ForgeOptions::default()
    };
    let plan = prepare(&shifted, &curve.frame(), &grid, &options)?;
    let selection = plan.select_t(eps - shift_bound, Some(t_cap))?;
    let forged = plan.apply(selection.t)?;
    let map = forged.map.clone();
    let probes = match options.cutoff {
        Some((delta, _)) => band_probes(curve, delta, forged.h.degree()),
        None => Vec::new(),
    };
    let distance = sup_distance(&state.map, &map, &Region::torus(), config.distance_grid)?
        .max(probe_distance(&state.map, &map, &probes, Space::Torus)?);
    if distance > eps {
        return Err(Error::BudgetExceeded { distance, budget: eps });
    }

    let census_config = CensusConfig {
        seeds_x: 1,
        seeds_y: 1,
        windings: vec![spec.p],
        hints: forged.orbits.iter().map(|o| o.points[0]).collect(),
        newton: config.newton,
        ..CensusConfig::default()
    };
    let census = find_periodic(&map, spec.n as usize, &curve_band(curve, config.band), &census_config)?;
    let hyperbolic = census.hyperbolic_points();
    let elliptic = census.elliptic_points();
    for (kind, found) in [("hyperbolic", hyperbolic), ("elliptic", elliptic)] {
        if found < target {
            return Err(Error::CensusShortfall { kind: kind.into(), found, required: target });
        }
    }
    let orbits = census
        .records
        .iter()
        .map(|r| StoredOrbit {
            stage,
            period: r.period,
            winding: r.winding,
            point: r.representative(),
            kind: r.kind,
        })
        .collect();
    let report = StageReport {
        stage,
        p: spec.p,
        n: spec.n,
        gamma,
        target,
        hyperbolic,
        elliptic,
        ratio: hyperbolic.min(elliptic) as f64 / gamma as f64,
        eps,
        shift,
        shift_bound,
        forge: selection,
        sup_distance: distance,
        total_distance: f64::NAN,
        predicted_hyperbolic: forged.count(OrbitType::Hyperbolic),
        predicted_elliptic: forged.count(OrbitType::Elliptic),
        census: census.stats.clone(),
        degenerate_families: census.degenerate_families.len(),
        kam_residual: None,
        kam_modes: None,
        strip_radius: None,
        persistence: Vec::new(),
    };
    Ok(StageOutcome { map, forged, census, orbits, probes, report })
}

/// Re-finds the circle of rotation `cert.theta` after a stage that shifted
/// the rotation by `shift`. Failures halt the campaign at `stage`.
pub fn resolve_next_curve(
    map: &SymplecticMap,
    previous: &KamCurve,
    shift: f64,
    cert: &DiophantineCert,
    kam: &KamConfig,
    stage: usize,
) -> Result<KamCurve> {
    let mut guess = previous.clone();
    if previous.mean_twist > 0.0 {
        // the rotation at the old circle moved by `shift`; undo it with the twist
        guess.eta = guess.eta.plus_constant(-shift / previous.mean_twist);
    }
    solve_invariance(map, cert, &guess, kam).map_err(|e| {
        let history = match &e {
            Error::NewtonDiverged { history, .. } => history.clone(),
            _ => Vec::new(),
        };
        Error::CampaignHalted { stage, reason: e.to_string(), history }
    })
}
