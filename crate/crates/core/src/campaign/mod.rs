//! Multi-stage growth campaigns: shift a Diophantine circle to a rational
//! rotation, forge orbits there, count them, re-find the circle, repeat.

pub mod config;
pub mod stage;

pub use config::{sine_twist, AutoStages, CampaignConfig, CampaignPlan, StageSpec};
pub use stage::{
    band_probes, bump_cutoff, curve_band, resolve_next_curve, run_stage, CampaignState, Persistence, StageOutcome,
    StageReport, StoredOrbit, CURVE_TOL,
};

use crate::census::{classify, polish, CLASSIFY_TOL};
use crate::error::{Error, Result};
use crate::kam::{solve_invariance, KamConfig, KamCurve};
use crate::phase::{lifted_distance, probe_distance, sup_distance, Region, Space, SymplecticMap, TrigPoly};
use serde::{Deserialize, Serialize};

/// Where and why a campaign stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halt {
    pub stage: usize,
    pub kind: String,
    pub message: String,
    #[serde(with = "crate::decimal::vec")]
    pub history: Vec<f64>,
}

/// Per-stage growth records of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthLedger {
    #[serde(with = "crate::decimal")]
    pub theta: f64,
    pub seed: u64,
    #[serde(with = "crate::decimal")]
    pub eps0: f64,
    #[serde(with = "crate::decimal")]
    pub initial_residual: f64,
    pub stages: Vec<StageReport>,
    /// Grid sup-distance of the final map from the base map.
    #[serde(with = "crate::decimal")]
    pub total_distance: f64,
    /// `3/2 eps0`.
    #[serde(with = "crate::decimal")]
    pub distance_bound: f64,
    pub halted: Option<Halt>,
    /// One `key=value` line per event.
    pub events: Vec<String>,
}

impl GrowthLedger {
    pub fn completed(&self) -> bool {
        self.halted.is_none()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ledger serializes")
    }
}

/// A finished or halted campaign with its final map and circle.
#[derive(Debug, Clone)]
pub struct CampaignRun {
    pub ledger: GrowthLedger,
    pub map: SymplecticMap,
    pub curve: KamCurve,
    pub orbits: Vec<StoredOrbit>,
}

fn halt_from(stage: usize, e: &Error) -> Halt {
    let history = match e {
        Error::NewtonDiverged { history, .. } | Error::CampaignHalted { history, .. } => history.clone(),
        _ => Vec::new(),
    };
    Halt { stage, kind: e.kind().into(), message: e.to_string(), history }
}

/// Polishes every stored orbit on `map`, updating positions in place.
fn check_persistence(
    map: &SymplecticMap,
    orbits: &mut [StoredOrbit],
    config: &CampaignConfig,
    current: usize,
    events: &mut Vec<String>,
) -> Vec<Persistence> {
    let mut out: Vec<Persistence> = Vec::new();
    for orbit in orbits.iter_mut() {
        let slot = match out.iter().position(|p| p.stage == orbit.stage) {
            Some(i) => i,
            None => {
                out.push(Persistence { stage: orbit.stage, orbits: 0, persisted: 0, max_residual: 0.0, max_drift: 0.0 });
                out.len() - 1
            }
        };
        let entry = &mut out[slot];
        entry.orbits += 1;
        let result = polish(map, orbit.point, orbit.period, orbit.winding, Space::Torus, &config.newton);
        match result {
            Ok(root)
                if root.residual <= config.persistence_tol
                    && classify(root.monodromy.trace(), CLASSIFY_TOL, CLASSIFY_TOL) == orbit.kind =>
            {
                entry.persisted += 1;
                entry.max_residual = entry.max_residual.max(root.residual);
                let drift = lifted_distance((orbit.point[0], orbit.point[1]), (root.x, root.y), Space::Torus);
                entry.max_drift = entry.max_drift.max(drift);
                orbit.point = [root.x, root.y];
            }
            other => {
                let why = match other {
                    Ok(root) => format!("residual={:e} trace={:e}", root.residual, root.monodromy.trace()),
                    Err(e) => format!("error={}", e.kind()),
                };
                events.push(format!(
                    "event=persistence_lost stage={current} origin={} x={:e} y={:e} {why}",
                    orbit.stage, orbit.point[0], orbit.point[1]
                ));
            }
        }
    }
    out
}

/// Runs every stage in order. Numerical failures stop the campaign and are
/// recorded in the ledger; only an invalid configuration is an error.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignRun> {
    let plan = config.validate()?;
    let theta = plan.cert.theta;
    let mut events = Vec::new();
    let base_kam = KamConfig { modes: config.kam.modes.max(8), ..config.kam.clone() };
    let guess = KamCurve::graph(TrigPoly::constant(plan.initial_height), theta);
    let initial = solve_invariance(&plan.base, &plan.cert, &guess, &base_kam);
    let mut ledger = GrowthLedger {
        theta,
        seed: config.seed,
        eps0: config.eps0,
        initial_residual: f64::NAN,
        stages: Vec::new(),
        total_distance: 0.0,
        distance_bound: 1.5 * config.eps0,
        halted: None,
        events: Vec::new(),
    };
    let curve = match initial {
        Ok(c) => c,
        Err(e) => {
            ledger.halted = Some(halt_from(0, &e));
            ledger.events.push(format!("event=halted stage=0 kind={}", e.kind()));
            return Ok(CampaignRun { ledger, map: plan.base, curve: guess, orbits: Vec::new() });
        }
    };
    ledger.initial_residual = curve.residual;
    events.push(format!("event=initial_curve residual={:e} mean_twist={:e}", curve.residual, curve.mean_twist));
    let mut state = CampaignState { map: plan.base.clone(), curve };
    let mut orbits: Vec<StoredOrbit> = Vec::new();
    let last = plan.stages.len();
    let mut previous_shift = None;
    let mut probes: Vec<[f64; 2]> = Vec::new();
    for (k, spec) in plan.stages.iter().enumerate() {
        let stage = k + 1;
        events.push(format!("event=stage_start stage={stage} p={} n={} gamma={}", spec.p, spec.n, spec.gamma()));
        let outcome = match run_stage(&state, stage, spec, plan.eps[k], plan.t_caps[k], previous_shift, config) {
            Ok(o) => o,
            Err(e) => {
                events.push(format!("event=halted stage={stage} kind={}", e.kind()));
                ledger.halted = Some(halt_from(stage, &e));
                break;
            }
        };
        let mut report = outcome.report;
        previous_shift = Some(report.shift);
        events.push(format!(
            "event=stage_counted stage={stage} hyperbolic={} elliptic={} t={:e} distance={:e}",
            report.hyperbolic, report.elliptic, report.forge.t, report.sup_distance
        ));
        report.persistence = check_persistence(&outcome.map, &mut orbits, config, stage, &mut events);
        orbits.extend(outcome.orbits);
        probes.extend_from_slice(&outcome.probes);
        let total = sup_distance(&plan.base, &outcome.map, &Region::torus(), config.distance_grid)
            .and_then(|d| Ok(d.max(probe_distance(&plan.base, &outcome.map, &probes, Space::Torus)?)));
        report.total_distance =
            match total {
                Ok(d) => d,
                Err(e) => {
                    ledger.halted = Some(halt_from(stage, &e));
                    ledger.stages.push(report);
                    break;
                }
            };
        ledger.total_distance = report.total_distance;
        let map = outcome.map;
        if stage < last || config.resolve_final {
            match resolve_next_curve(&map, &state.curve, report.shift, &plan.cert, &config.kam, stage) {
                Ok(curve) => {
                    report.kam_residual = Some(curve.residual);
                    report.kam_modes = Some(curve.modes);
                    report.strip_radius = Some(curve.strip_radius);
                    events.push(format!(
                        "event=curve_resolved stage={stage} residual={:e} modes={} iterations={}",
                        curve.residual, curve.modes, curve.iterations
                    ));
                    ledger.stages.push(report);
                    state = CampaignState { map, curve };
                }
                Err(e) => {
                    events.push(format!("event=halted stage={stage} kind={}", e.kind()));
                    ledger.halted = Some(halt_from(stage, &e));
                    ledger.stages.push(report);
                    state.map = map;
                    break;
                }
            }
        } else {
            ledger.stages.push(report);
            state.map = map;
        }
    }
    ledger.events = events;
    Ok(CampaignRun { ledger, map: state.map, curve: state.curve, orbits })
}

/// [`run_campaign`] returning only the ledger.
pub fn run_cascade(config: &CampaignConfig) -> Result<GrowthLedger> {
    Ok(run_campaign(config)?.ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::{prepare, ForgeOptions, ResonantGrid};
    use crate::kam::{diophantine_certificate, golden_mean};

    fn golden_state() -> (CampaignState, crate::kam::DiophantineCert) {
        let cert = diophantine_certificate(golden_mean(), 0.0, 10_000).unwrap();
        let guess = KamCurve::graph(TrigPoly::constant(golden_mean().asin() / std::f64::consts::TAU), cert.theta);
        let curve = solve_invariance(&sine_twist(), &cert, &guess, &KamConfig::default()).unwrap();
        (CampaignState { map: sine_twist(), curve }, cert)
    }

    #[test]
    fn single_stage_on_golden_circle() {
        let (state, cert) = golden_state();
        let config = CampaignConfig::default();
        let spec = StageSpec { p: 3, n: 5, gamma: Some(1) };
        let out = run_stage(&state, 1, &spec, 0.05, 1e-3, None, &config).unwrap();
        assert!(out.report.hyperbolic >= 5 && out.report.elliptic >= 5);
        assert_eq!(out.report.predicted_hyperbolic, 5);
        assert!(out.report.sup_distance <= 0.05);
        let next = resolve_next_curve(&out.map, &state.curve, out.report.shift, &cert, &KamConfig::default(), 1)
            .unwrap();
        assert!(next.residual <= 1e-9);
        assert!(next.min_twist > 0.0);
    }

    #[test]
    fn shift_larger_than_budget_is_rejected() {
        let (state, _) = golden_state();
        let spec = StageSpec { p: 3, n: 5, gamma: Some(1) };
        let err = run_stage(&state, 1, &spec, 0.01, 1e-3, None, &CampaignConfig::default()).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn zero_strength_forge_keeps_the_curve() {
        let (state, cert) = golden_state();
        let grid = ResonantGrid::build(3, 5, 1).unwrap();
        let height = 0.6f64.asin() / std::f64::consts::TAU;
        let options = ForgeOptions { space: Space::Torus, ..ForgeOptions::default() };
        let plan = prepare(&state.map, &crate::forge::CurveFrame::straight(height), &grid, &options).unwrap();
        let map = SymplecticMap::compose(vec![plan.bump_map(0.0).unwrap(), state.map.clone()]);
        let again = resolve_next_curve(&map, &state.curve, 0.0, &cert, &KamConfig::default(), 1).unwrap();
        let diff = again.eta.plus(&state.curve.eta.scaled(-1.0)).l1_norm()
            + again.xi.plus(&state.curve.xi.scaled(-1.0)).l1_norm();
        assert!(diff <= 1e-14, "{diff}");
    }

    #[test]
    fn oversized_stage_halts_with_history() {
        let (state, cert) = golden_state();
        let shift = 3.0 / 5.0 - cert.theta;
        let flow = crate::flows::curve_following_flow(&state.curve.xi, &state.curve.eta, shift, Default::default())
            .unwrap();
        let shifted = SymplecticMap::compose(vec![state.map.clone(), flow]);
        let grid = ResonantGrid::build(3, 5, 1).unwrap();
        let options = ForgeOptions { space: Space::Torus, ..ForgeOptions::default() };
        let plan = prepare(&shifted, &state.curve.frame(), &grid, &options).unwrap();
        let forged = plan.apply(0.5).unwrap();
        let err = resolve_next_curve(&forged.map, &state.curve, shift, &cert, &KamConfig::default(), 1).unwrap_err();
        match err {
            Error::CampaignHalted { stage, history, .. } => {
                assert_eq!(stage, 1);
                assert!(!history.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
