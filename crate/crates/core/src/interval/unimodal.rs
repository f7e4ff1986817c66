use super::IntervalDynamics;
use crate::error::{Error, Result};
use crate::flows::smoothstep7;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Smallest acceptable margin `|(f^{k+1})' - 1|` at the crossings a plateau
/// bump creates.
pub const HYPERBOLICITY_MARGIN: f64 = 1e-9;

/// Sup of the derivative of the window profile per unit plateau length.
const WINDOW_SLOPE: f64 = 17.5;

/// The plateau `[x_k, x'_k]` on which `f^{k+1}` is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauSpec {
    pub k: usize,
    #[serde(with = "crate::decimal")]
    pub lo: f64,
    #[serde(with = "crate::decimal")]
    pub hi: f64,
    pub period: usize,
}

impl PlateauSpec {
    pub fn new(delta: f64, k: usize) -> Self {
        PlateauSpec {
            k,
            lo: delta / (2 * k + 1) as f64,
            hi: delta / (2 * k) as f64,
            period: k + 1,
        }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// An oscillating bump `amplitude * window(u) * sin(2 pi gamma u)` with
/// `u` the relative position on a plateau.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauBump {
    pub plateau: PlateauSpec,
    pub gamma: u32,
    /// Requested C0 budget.
    #[serde(with = "crate::decimal")]
    pub budget: f64,
    /// Amplitude actually used, capped so that `f` stays strictly monotone.
    #[serde(with = "crate::decimal")]
    pub amplitude: f64,
}

/// Window equal to 1 on the middle half of `[0, 1]` with smooth ramps on
/// `[1/8, 1/4]` and `[3/4, 7/8]`.
fn window(u: f64) -> [f64; 2] {
    if u <= 0.5 {
        let [v, d, _] = smoothstep7(8.0 * (u - 0.125));
        [v, 8.0 * d]
    } else {
        let [v, d, _] = smoothstep7(8.0 * (0.875 - u));
        [v, -8.0 * d]
    }
}

impl PlateauBump {
    /// Value and derivative at `x`.
    pub fn eval(&self, x: f64) -> [f64; 2] {
        let len = self.plateau.length();
        let u = (x - self.plateau.lo) / len;
        if u <= 0.125 || u >= 0.875 {
            return [0.0, 0.0];
        }
        let [s, ds] = window(u);
        let phase = 2.0 * PI * self.gamma as f64 * u;
        let v = self.amplitude * s * phase.sin();
        let dv = self.amplitude * (ds * phase.sin() + s * 2.0 * PI * self.gamma as f64 * phase.cos());
        [v, dv / len]
    }

    /// `|(f^{k+1})' - 1|` at the crossings inside the flat part of the window.
    pub fn crossing_margin(&self) -> f64 {
        2f64.powi(self.plateau.k as i32) * self.amplitude * 2.0 * PI * self.gamma as f64
            / self.plateau.length()
    }
}

/// The truncated unimodal cascade map on `[-1, 1]`.
///
/// Pieces: `1 + 2x` on `[-1, -1/3]`, a monotone cubic up to `f(0) = 1`,
/// a monotone cubic from `0` to `x_kmax`, `1 - g_k` on `[x_k, x_{k-1}]` for
/// `k >= 2`, `1 - g_1` on the first plateau, a decreasing join to `1/3`
/// and `1 - 2x` on `[1/3, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalMap {
    #[serde(with = "crate::decimal")]
    pub delta: f64,
    pub kmax: usize,
    pub bumps: Vec<PlateauBump>,
}

/// `g_k` and its derivative.
pub fn cascade_piece(delta: f64, k: usize, x: f64) -> [f64; 2] {
    let kf = k as f64;
    let scale = 2f64.powi(-(k as i32));
    let slope = (2.0 * kf - 1.0) * 2.0 * kf / delta;
    let [chi, dchi, _] = smoothstep7((2.0 * kf - 1.0) * (2.0 * kf * x / delta - 1.0));
    [scale * (1.0 + chi) * (1.0 + x), scale * ((1.0 + chi) + dchi * slope * (1.0 + x))]
}

/// Cubic Hermite value and derivative on `[a, b]`.
fn hermite(a: f64, b: f64, ya: f64, yb: f64, da: f64, db: f64, x: f64) -> [f64; 2] {
    let h = b - a;
    let s = (x - a) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let v = (2.0 * s3 - 3.0 * s2 + 1.0) * ya
        + (s3 - 2.0 * s2 + s) * h * da
        + (-2.0 * s3 + 3.0 * s2) * yb
        + (s3 - s2) * h * db;
    let d = (6.0 * s2 - 6.0 * s) * ya / h
        + (3.0 * s2 - 4.0 * s + 1.0) * da
        + (-6.0 * s2 + 6.0 * s) * yb / h
        + (3.0 * s2 - 2.0 * s) * db;
    [v, d]
}

impl IntervalMap {
    /// Builds the unperturbed map.
    pub fn build(delta: f64, kmax: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.25) {
            return Err(Error::DomainError(format!("delta = {delta} must lie in (0, 1/4)")));
        }
        if kmax < 2 {
            return Err(Error::DomainError(format!("kmax = {kmax} must be at least 2")));
        }
        Ok(IntervalMap { delta, kmax, bumps: Vec::new() })
    }

    pub fn plateau(&self, k: usize) -> Result<PlateauSpec> {
        if k == 0 || k > self.kmax {
            return Err(Error::DomainError(format!("plateau {k} outside 1..={}", self.kmax)));
        }
        Ok(PlateauSpec::new(self.delta, k))
    }

    /// `x_k`.
    pub fn node(&self, k: usize) -> f64 {
        self.delta / (2 * k + 1) as f64
    }

    fn base(&self, x: f64) -> [f64; 2] {
        let third = 1.0 / 3.0;
        if x <= -third {
            return [1.0 + 2.0 * x, 2.0];
        }
        if x <= 0.0 {
            return hermite(-third, 0.0, third, 1.0, 2.0, 0.0, x);
        }
        if x >= third {
            return [1.0 - 2.0 * x, -2.0];
        }
        let first = PlateauSpec::new(self.delta, 1);
        if x >= first.hi {
            // f' = -(1/2 (1 - s) + 2 s^7), whose mean over the gap is 1/2
            let len = third - first.hi;
            let s = (x - first.hi) / len;
            let start = 0.5 * (1.0 - first.hi);
            let integral = 0.5 * (s - 0.5 * s * s) + 0.25 * s.powi(8);
            return [start - len * integral, -(0.5 * (1.0 - s) + 2.0 * s.powi(7))];
        }
        let last = self.node(self.kmax);
        if x <= last {
            let [g, dg] = cascade_piece(self.delta, self.kmax, last);
            return hermite(0.0, last, 1.0, 1.0 - g, 0.0, -dg, x);
        }
        // x in [x_k, x_{k-1}] with x_k = delta / (2k + 1)
        let k = ((self.delta / x - 1.0) / 2.0).ceil().clamp(1.0, self.kmax as f64) as usize;
        let [g, dg] = cascade_piece(self.delta, k, x);
        [1.0 - g, -dg]
    }

    /// Returns a copy with an oscillating bump on plateau `k`.
    ///
    /// The bump amplitude is `min(budget, a)` with `a` the largest amplitude
    /// that keeps `|f'|` at least half its plateau value.
    pub fn perturb_plateau(&self, k: usize, gamma: u32, budget: f64) -> Result<Self> {
        let plateau = self.plateau(k)?;
        if !(budget >= 0.0) {
            return Err(Error::DomainError(format!("budget {budget} must be non-negative")));
        }
        if budget == 0.0 {
            return Ok(self.clone());
        }
        if gamma == 0 {
            return Err(Error::DomainError("gamma must be positive".into()));
        }
        if self.bumps.iter().any(|b| b.plateau.k == k) {
            return Err(Error::DomainError(format!("plateau {k} already perturbed")));
        }
        let scale = 2f64.powi(-(k as i32));
        let cap = 0.5 * scale * plateau.length() / (2.0 * PI * gamma as f64 + WINDOW_SLOPE);
        let bump = PlateauBump { plateau, gamma, budget, amplitude: budget.min(cap) };
        let margin = bump.crossing_margin();
        if margin < HYPERBOLICITY_MARGIN {
            return Err(Error::BudgetTooSmall(format!(
                "crossing margin {margin:.3e} below {HYPERBOLICITY_MARGIN:e} (amplitude {:.3e})",
                bump.amplitude
            )));
        }
        let mut out = self.clone();
        out.bumps.push(bump);
        out.bumps.sort_by_key(|b| b.plateau.k);
        Ok(out)
    }

    /// Sup of `|f^{k+1}(x) - x|` over `samples` equispaced points of plateau `k`.
    pub fn plateau_identity_check(&self, k: usize, samples: usize) -> Result<f64> {
        let p = self.plateau(k)?;
        let m = samples.max(2);
        Ok((0..m)
            .map(|i| {
                let x = p.lo + p.length() * i as f64 / (m - 1) as f64;
                (super::iterate(self, x, p.period)[0] - x).abs()
            })
            .fold(0.0, f64::max))
    }

    /// Smallest `|f'|` over a grid of spacing `resolution`, skipping `|x| < resolution`.
    pub fn min_slope_away_from_critical(&self, resolution: f64) -> f64 {
        let m = (2.0 / resolution).ceil() as usize;
        (0..=m)
            .map(|i| -1.0 + 2.0 * i as f64 / m as f64)
            .filter(|x| x.abs() >= resolution)
            .map(|x| self.eval(x)[1].abs())
            .fold(f64::INFINITY, f64::min)
    }
}

impl IntervalDynamics for IntervalMap {
    fn eval(&self, x: f64) -> [f64; 2] {
        let [mut v, mut d] = self.base(x);
        for b in &self.bumps {
            if x > b.plateau.lo && x < b.plateau.hi {
                let [bv, bd] = b.eval(x);
                v += bv;
                d += bd;
            }
        }
        [v, d]
    }

    fn critical_points(&self) -> Vec<f64> {
        vec![0.0]
    }
}

/// `build` as a free function.
pub fn build_f0(delta: f64, kmax: usize) -> Result<IntervalMap> {
    IntervalMap::build(delta, kmax)
}
