use crate::census::NewtonConfig;
use crate::error::{Error, Result};
use crate::flows::IntegratorConfig;
use crate::forge::gcd;
use crate::kam::{diophantine_certificate, golden_mean, DiophantineCert, KamConfig};
use crate::phase::{SymplecticMap, TrigPoly, YFunction};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// One rational target `p/N` with its orbit multiplicity `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSpec {
    pub p: i64,
    pub n: i64,
    /// Defaults to `n`.
    #[serde(default)]
    pub gamma: Option<usize>,
}

impl StageSpec {
    pub fn gamma(&self) -> usize {
        self.gamma.unwrap_or(self.n.max(0) as usize)
    }
}

/// Stage targets taken from the continued-fraction convergents of `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoStages {
    pub count: usize,
    /// First convergent denominator used.
    pub min_denominator: u64,
    /// Take every `step`-th convergent from there.
    pub step: usize,
}

impl Default for AutoStages {
    fn default() -> Self {
        AutoStages { count: 3, min_denominator: 5, step: 2 }
    }
}

/// Everything a growth campaign needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CampaignConfig {
    /// Starting map; `None` is `(x + sin 2πy, y)`.
    pub base: Option<SymplecticMap>,
    /// Rotation of the tracked circle: `"golden"` or a decimal string.
    pub theta: String,
    #[serde(with = "crate::decimal")]
    pub tau: f64,
    pub qmax: u64,
    /// Height of a straight initial guess; derived for the default base.
    #[serde(with = "crate::decimal::opt")]
    pub initial_height: Option<f64>,
    /// Explicit stages; empty means `auto`.
    pub stages: Vec<StageSpec>,
    pub auto: AutoStages,
    #[serde(with = "crate::decimal")]
    pub eps0: f64,
    /// Per-stage budgets; empty means `eps0 / 4^k`.
    #[serde(with = "crate::decimal::vec")]
    pub eps: Vec<f64>,
    /// Forge strength cap of the first stage.
    #[serde(with = "crate::decimal")]
    pub t_cap: f64,
    /// Factor applied to the cap at each later stage.
    #[serde(with = "crate::decimal")]
    pub t_decay: f64,
    /// Half-height of the census band around the circle.
    #[serde(with = "crate::decimal")]
    pub band: f64,
    pub newton: NewtonConfig,
    pub kam: KamConfig,
    pub integrator: IntegratorConfig,
    /// Invariance tolerance of the forge precondition.
    #[serde(with = "crate::decimal")]
    pub invariance_tol: f64,
    /// Persisting orbits must polish below this residual.
    #[serde(with = "crate::decimal")]
    pub persistence_tol: f64,
    /// Grid density of the sup-distance estimate.
    pub distance_grid: usize,
    /// Also re-solve the circle after the last stage.
    pub resolve_final: bool,
    pub seed: u64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            base: None,
            theta: "golden".into(),
            tau: 0.0,
            qmax: 10_000,
            initial_height: None,
            stages: Vec::new(),
            auto: AutoStages::default(),
            eps0: 0.05,
            eps: Vec::new(),
            t_cap: 1e-3,
            t_decay: 0.1,
            band: 0.02,
            newton: NewtonConfig::default(),
            kam: KamConfig::default(),
            integrator: IntegratorConfig::default(),
            invariance_tol: 1e-9,
            persistence_tol: 1e-8,
            distance_grid: 64,
            resolve_final: false,
            seed: 0,
        }
    }
}

/// `(x + sin 2πy, y)`.
pub fn sine_twist() -> SymplecticMap {
    SymplecticMap::HorizontalShear { u: YFunction::trigonometric(TrigPoly::harmonic(1, 0.0, 1.0)) }
}

/// Stage targets, budgets and strength caps after validation.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignPlan {
    pub base: SymplecticMap,
    pub cert: DiophantineCert,
    pub initial_height: f64,
    pub stages: Vec<StageSpec>,
    pub eps: Vec<f64>,
    pub t_caps: Vec<f64>,
}

impl CampaignConfig {
    pub fn theta_value(&self) -> Result<f64> {
        match self.theta.trim() {
            "golden" => Ok(golden_mean()),
            text => crate::decimal::parse(text).map_err(Error::InvalidConfig),
        }
    }

    /// Checks the invariants and resolves every default.
    pub fn validate(&self) -> Result<CampaignPlan> {
        let theta = self.theta_value()?;
        let cert = diophantine_certificate(theta, self.tau, self.qmax)?;
        let stages = if self.stages.is_empty() { self.auto_stages(&cert)? } else { self.stages.clone() };
        if stages.is_empty() {
            return Err(Error::InvalidConfig("campaign has no stages".into()));
        }
        for (k, s) in stages.iter().enumerate() {
            if s.n < 1 || s.gamma() == 0 {
                return Err(Error::InvalidConfig(format!(
                    "stage {}: need N >= 1 and gamma >= 1 (got N = {}, gamma = {})",
                    k + 1,
                    s.n,
                    s.gamma()
                )));
            }
            if gcd(s.p, s.n) != 1 {
                return Err(Error::NotLowestTerms { p: s.p, n: s.n });
            }
            if k > 0 && s.n <= stages[k - 1].n {
                return Err(Error::InvalidConfig(format!(
                    "stage denominators must increase: {} after {}",
                    s.n,
                    stages[k - 1].n
                )));
            }
        }
        if !(self.eps0 > 0.0) {
            return Err(Error::InvalidConfig(format!("eps0 = {} must be positive", self.eps0)));
        }
        let eps = if self.eps.is_empty() {
            (0..stages.len()).map(|k| self.eps0 / 4f64.powi(k as i32)).collect()
        } else {
            self.eps.clone()
        };
        if eps.len() != stages.len() {
            return Err(Error::InvalidConfig(format!(
                "{} budgets for {} stages",
                eps.len(),
                stages.len()
            )));
        }
        if !(eps[0] > 0.0 && eps[0] <= self.eps0) {
            return Err(Error::InvalidConfig(format!("first budget {} must lie in (0, eps0]", eps[0])));
        }
        for k in 1..eps.len() {
            if !(eps[k] > 0.0 && eps[k] < eps[k - 1] / 3.0) {
                return Err(Error::InvalidConfig(format!(
                    "budget {} of stage {} must lie in (0, {}/3)",
                    eps[k],
                    k + 1,
                    eps[k - 1]
                )));
            }
        }
        if !(self.t_cap > 0.0 && self.t_decay > 0.0 && self.t_decay <= 1.0) {
            return Err(Error::InvalidConfig("need t_cap > 0 and t_decay in (0, 1]".into()));
        }
        let t_caps = (0..stages.len()).map(|k| self.t_cap * self.t_decay.powi(k as i32)).collect();
        let base = self.base.clone().unwrap_or_else(sine_twist);
        let initial_height = match (self.initial_height, &self.base) {
            (Some(h), _) => h,
            (None, None) => theta.asin() / TAU,
            (None, Some(_)) => {
                return Err(Error::InvalidConfig("a custom base needs initial_height".into()))
            }
        };
        if !initial_height.is_finite() {
            return Err(Error::InvalidConfig(format!("no circle of rotation {theta} for the default base")));
        }
        Ok(CampaignPlan { base, cert, initial_height, stages, eps, t_caps })
    }

    fn auto_stages(&self, cert: &DiophantineCert) -> Result<Vec<StageSpec>> {
        let step = self.auto.step.max(1);
        let picked: Vec<StageSpec> = cert
            .convergents
            .iter()
            .filter(|(_, q)| *q >= self.auto.min_denominator)
            .step_by(step)
            .take(self.auto.count)
            .map(|&(p, q)| StageSpec { p, n: q as i64, gamma: None })
            .collect();
        if picked.len() < self.auto.count {
            return Err(Error::InvalidConfig(format!(
                "only {} convergents available for {} automatic stages",
                picked.len(),
                self.auto.count
            )));
        }
        Ok(picked)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_stages_are_fibonacci_quotients() {
        let plan = CampaignConfig::default().validate().unwrap();
        let pairs: Vec<(i64, i64)> = plan.stages.iter().map(|s| (s.p, s.n)).collect();
        assert_eq!(pairs, vec![(3, 5), (8, 13), (21, 34)]);
        assert_eq!(plan.eps, vec![0.05, 0.0125, 0.003125]);
        assert!((plan.initial_height - 0.10603).abs() < 1e-4);
    }

    #[test]
    fn validation_rejections() {
        let zero_gamma = CampaignConfig {
            stages: vec![StageSpec { p: 3, n: 5, gamma: Some(0) }],
            ..CampaignConfig::default()
        };
        assert!(matches!(zero_gamma.validate(), Err(Error::InvalidConfig(_))));
        let not_increasing = CampaignConfig {
            stages: vec![StageSpec { p: 8, n: 13, gamma: None }, StageSpec { p: 3, n: 5, gamma: None }],
            ..CampaignConfig::default()
        };
        assert!(matches!(not_increasing.validate(), Err(Error::InvalidConfig(_))));
        let reducible = CampaignConfig {
            stages: vec![StageSpec { p: 2, n: 4, gamma: None }],
            ..CampaignConfig::default()
        };
        assert!(matches!(reducible.validate(), Err(Error::NotLowestTerms { .. })));
        let slow_decay = CampaignConfig { eps: vec![0.05, 0.02, 0.001], ..CampaignConfig::default() };
        assert!(matches!(slow_decay.validate(), Err(Error::InvalidConfig(_))));
    }
}
