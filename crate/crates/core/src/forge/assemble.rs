use super::bump::{build_bump, BumpProfile};
use super::grid::ResonantGrid;
use crate::census::{classify, OrbitType, CLASSIFY_TOL};
use crate::decimal::format17;
use crate::error::{Error, Result};
use crate::flows::{
    bump_hamiltonian, curve_bump_hamiltonian, integrate_flow, shear_flow, smoothstep7, IntegratorConfig,
};
use crate::phase::{lifted_distance, Jacobian2, Space, SymplecticMap, TrigPoly};
use serde::{Deserialize, Serialize};

/// Parameterized circle `z ↦ (z + xi(z), eta(z))` together with the
/// symplectic frame `(z, w) ↦ (z + xi(z), w / φ'(z) + eta(z))`, `φ = id + xi`.
/// The identity frame is the straight circle `y = 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveFrame {
    pub xi: TrigPoly,
    pub eta: TrigPoly,
}

impl CurveFrame {
    pub fn identity() -> Self {
        CurveFrame::default()
    }

    /// Horizontal circle `y = height`.
    pub fn straight(height: f64) -> Self {
        CurveFrame { xi: TrigPoly::zero(), eta: TrigPoly::constant(height) }
    }

    pub fn is_straight(&self) -> bool {
        self.xi.is_constant() && self.xi.mean() == 0.0 && self.eta.is_constant()
    }

    /// Circle point with parameter `z` (lifted).
    pub fn point(&self, z: f64) -> (f64, f64) {
        (z + self.xi.eval(z), self.eta.eval(z))
    }

    /// Derivative of the frame at `(z, 0)`.
    pub fn jacobian(&self, z: f64) -> Jacobian2 {
        let d = 1.0 + self.xi.eval_d1(z).1;
        let de = self.eta.eval_d1(z).1;
        Jacobian2::new(d, 0.0, de, 1.0 / d)
    }

    /// `(1,2)` entry of `D(map)^n` at the circle point `z`, expressed in the frame.
    pub fn twist(&self, map: &SymplecticMap, z: f64, n: usize, rotation: f64) -> Result<f64> {
        let (x, y) = self.point(z);
        let (_, jac) = map.orbit_displacement(x, y, n)?;
        let start = self.jacobian(z);
        let end = self.jacobian(z + n as f64 * rotation);
        let inv = end.inverse().ok_or(Error::NotDiffeo { min_derivative: 0.0 })?;
        Ok((inv * jac * start).m12)
    }
}

/// Settings for [`prepare`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForgeOptions {
    /// Tolerance of the resonant-invariance precondition.
    #[serde(with = "crate::decimal")]
    pub invariance_tol: f64,
    /// Abscissae sampled for the one-step twist precondition.
    pub twist_samples: usize,
    pub space: Space,
    /// `(delta, width)`: localize the bump to frame heights `|w| < delta`
    /// with a smooth cutoff. The bump is then an integrated flow; on a
    /// curved frame it is 1-periodic in `y` and needs `Space::Torus`.
    pub cutoff: Option<(f64, f64)>,
    pub integrator: IntegratorConfig,
}

impl Default for ForgeOptions {
    fn default() -> Self {
        ForgeOptions {
            invariance_tol: 1e-10,
            twist_samples: 256,
            space: Space::Cylinder,
            cutoff: None,
            integrator: IntegratorConfig::default(),
        }
    }
}

/// Perturbation size chosen by [`ForgePlan::select_t`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TSelection {
    #[serde(with = "crate::decimal")]
    pub t: f64,
    /// Largest `t` allowed by the sup-norm budget.
    #[serde(with = "crate::decimal")]
    pub t_budget: f64,
    /// Largest `t` keeping the elliptic traces separated from `-2`.
    #[serde(with = "crate::decimal")]
    pub t_twist: f64,
    /// `min_i t w_i / 2`.
    #[serde(with = "crate::decimal")]
    pub margin: f64,
    /// Sup-norm of the resulting perturbation.
    #[serde(with = "crate::decimal")]
    pub perturbation: f64,
}

/// A validated resonant circle with its bump, ready to be forged for any `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgePlan {
    pub base: SymplecticMap,
    pub frame: CurveFrame,
    pub grid: ResonantGrid,
    pub bump: BumpProfile,
    /// Frame twist `w_i` of the `N`-th iterate at `x_{i,0}`.
    pub twists: Vec<f64>,
    /// `sup |h'(z) / φ'(z)|`: perturbation size per unit `t`.
    #[serde(with = "crate::decimal")]
    pub sup_per_unit_t: f64,
    pub options: ForgeOptions,
}

/// One forged orbit with its predicted and measured monodromy trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitPrediction {
    pub i: usize,
    /// `p_{i,j}` for `j = 0..N`.
    pub points: Vec<[f64; 2]>,
    #[serde(with = "crate::decimal")]
    pub twist: f64,
    #[serde(with = "crate::decimal")]
    pub predicted_trace: f64,
    #[serde(with = "crate::decimal")]
    pub measured_trace: f64,
    /// `|f^N(p_{i,0}) - p_{i,0} - (winding, 0)|`.
    #[serde(with = "crate::decimal")]
    pub residual: f64,
    pub winding: i64,
    pub kind: OrbitType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgeResult {
    pub map: SymplecticMap,
    #[serde(with = "crate::decimal")]
    pub t: f64,
    pub grid: ResonantGrid,
    pub h: TrigPoly,
    pub orbits: Vec<OrbitPrediction>,
    /// Sup-norm of the displacement added by the bump.
    #[serde(with = "crate::decimal")]
    pub perturbation: f64,
}

impl ForgeResult {
    pub fn count(&self, kind: OrbitType) -> usize {
        self.orbits.iter().filter(|o| o.kind == kind).map(|o| o.points.len()).sum()
    }

    /// All predicted orbit points, for seeding a census.
    pub fn hints(&self) -> Vec<[f64; 2]> {
        self.orbits.iter().flat_map(|o| o.points.iter().copied()).collect()
    }
}

fn frame_sup(frame: &CurveFrame, slope: &TrigPoly) -> f64 {
    let len = (16 * (slope.degree() + frame.xi.degree()).max(16)).next_power_of_two();
    let values = slope.sample(len);
    let dphi = frame.xi.derivative().plus_constant(1.0).sample(len);
    values.iter().zip(&dphi).fold(0.0_f64, |m, (v, d)| m.max((v / d).abs()))
}

/// Bound on the speed of the cutoff bump field: the vertical part carries
/// the slope of `h` plus the cutoff ramp across a tilted circle, the
/// horizontal part the ramp alone.
fn cutoff_sup(frame: &CurveFrame, h: &TrigPoly, delta: f64, width: f64) -> f64 {
    let degree = h.degree() + frame.xi.degree() + frame.eta.degree();
    let len = (16 * degree.max(16)).next_power_of_two();
    let sup = |p: TrigPoly| p.sample(len).into_iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let dphi = frame.xi.derivative().plus_constant(1.0);
    let phi_min = dphi.sample(len).into_iter().fold(f64::INFINITY, f64::min);
    let value = sup(h.clone());
    // slopes in x pick up a factor 1/φ'
    let slope = sup(h.derivative()) / phi_min;
    let a = sup(dphi);
    let a1 = sup(frame.xi.derivative().derivative()) / phi_min;
    let g1 = sup(frame.eta.derivative()) / phi_min;
    let ramp = (0..=256).map(|k| smoothstep7(k as f64 / 256.0)[1]).fold(0.0_f64, f64::max) / width;
    // |y - g| <= delta / φ' on the support
    let wx = a1 * delta / phi_min + a * g1;
    let vertical = slope + value * ramp * wx;
    let horizontal = value * ramp * a;
    vertical.hypot(horizontal)
}

/// Checks the forge preconditions on `map` along `frame` and builds the bump.
///
/// The circle must carry the rotation `p/N` (every grid point lands on the
/// next one within `invariance_tol`) and the map must twist it.
pub fn prepare(
    map: &SymplecticMap,
    frame: &CurveFrame,
    grid: &ResonantGrid,
    options: &ForgeOptions,
) -> Result<ForgePlan> {
    if options.cutoff.is_some() && !frame.is_straight() && options.space != Space::Torus {
        return Err(Error::Unsupported("cutoff bumps on a curved circle need the torus".into()));
    }
    let dphi_min = frame
        .xi
        .derivative()
        .plus_constant(1.0)
        .sample(256.max(4 * frame.xi.degree()).next_power_of_two())
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if dphi_min <= 0.0 {
        return Err(Error::NotDiffeo { min_derivative: dphi_min });
    }
    let theta = grid.theta();
    let m = grid.size();
    for k in 0..m {
        let z = k as f64 / m as f64;
        let image = map.apply_lift(frame.point(z).0, frame.point(z).1)?;
        let target = frame.point(z + theta);
        let defect = lifted_distance(image, target, options.space);
        if !(defect <= options.invariance_tol) {
            return Err(Error::NotResonantCircle { p: grid.p, n: grid.n, defect });
        }
    }
    for k in 0..options.twist_samples {
        let z = k as f64 / options.twist_samples as f64;
        let value = frame.twist(map, z, 1, theta)?;
        if !(value > 0.0) {
            return Err(Error::NoTwist { x: z, value });
        }
    }
    let bump = build_bump(grid)?;
    let n = grid.n as usize;
    let mut twists = Vec::with_capacity(grid.orbit_count());
    for i in 0..grid.orbit_count() {
        let z = grid.point(i, 0);
        let w = frame.twist(map, z, n, theta)?;
        if !(w > 0.0) {
            return Err(Error::NoTwist { x: z, value: w });
        }
        twists.push(w);
    }
    let sup_per_unit_t = match options.cutoff {
        Some((delta, width)) => cutoff_sup(frame, &bump.h, delta, width),
        None => frame_sup(frame, &bump.slope()),
    };
    Ok(ForgePlan {
        base: map.clone(),
        frame: frame.clone(),
        grid: *grid,
        bump,
        twists,
        sup_per_unit_t,
        options: options.clone(),
    })
}

impl ForgePlan {
    /// The bump perturbation `B_t`, acting before the base map.
    pub fn bump_map(&self, t: f64) -> Result<SymplecticMap> {
        let h = &self.bump.h;
        if let Some((delta, width)) = self.options.cutoff {
            if !self.frame.is_straight() {
                let field = curve_bump_hamiltonian(h, &self.frame.xi, &self.frame.eta, delta, width)?;
                return integrate_flow(field, t, self.options.integrator);
            }
            let height = self.frame.eta.mean();
            let field = bump_hamiltonian(h, delta, width)?;
            let flow = integrate_flow(field, t, self.options.integrator)?;
            if height == 0.0 {
                return Ok(flow);
            }
            let up = SymplecticMap::VerticalShear { v: TrigPoly::constant(height) };
            let down = SymplecticMap::VerticalShear { v: TrigPoly::constant(-height) };
            return Ok(SymplecticMap::compose(vec![down, flow, up]));
        }
        let shear = shear_flow(h, t);
        if self.frame.xi.is_constant() && self.frame.xi.mean() == 0.0 {
            return Ok(shear);
        }
        // conjugating by the frame; the eta part commutes with vertical shears
        Ok(SymplecticMap::compose(vec![
            SymplecticMap::CotangentLift { xi: self.frame.xi.clone(), inverse: true },
            shear,
            SymplecticMap::CotangentLift { xi: self.frame.xi.clone(), inverse: false },
        ]))
    }

    pub fn perturbation(&self, t: f64) -> f64 {
        t.abs() * self.sup_per_unit_t
    }

    /// Largest `t` with perturbation `<= eps`, elliptic traces inside
    /// `(-2 + margin, 2 - margin)` and `t <= t_max` when given.
    pub fn select_t(&self, eps: f64, t_max: Option<f64>) -> Result<TSelection> {
        if !(eps > 0.0) {
            return Err(Error::EmptyAdmissibleRange { t: 0.0 });
        }
        let w_max = self.twists.iter().copied().fold(0.0_f64, f64::max);
        let w_min = self.twists.iter().copied().fold(f64::INFINITY, f64::min);
        let t_budget = eps / self.sup_per_unit_t;
        let t_twist = 4.0 / (w_max + w_min / 2.0) * (1.0 - 1e-9);
        let mut t = t_budget.min(t_twist);
        if let Some(cap) = t_max {
            t = t.min(cap);
        }
        if !(t >= 1e-13) {
            return Err(Error::EmptyAdmissibleRange { t });
        }
        Ok(TSelection { t, t_budget, t_twist, margin: t * w_min / 2.0, perturbation: self.perturbation(t) })
    }

    /// Forges the grid orbits with strength `t`: the map `base ∘ B_t`.
    pub fn apply(&self, t: f64) -> Result<ForgeResult> {
        if !t.is_finite() {
            return Err(Error::DomainError(format!("forge strength {t} is not finite")));
        }
        let map = SymplecticMap::compose(vec![self.bump_map(t)?, self.base.clone()]);
        let n = self.grid.n as usize;
        let mut orbits = Vec::with_capacity(self.grid.orbit_count());
        for i in 0..self.grid.orbit_count() {
            let points: Vec<[f64; 2]> = (0..n)
                .map(|j| {
                    let (x, y) = self.frame.point(self.grid.point(i, j));
                    [x.rem_euclid(1.0), y]
                })
                .collect();
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let predicted_trace = 2.0 + sign * t * self.twists[i];
            let (x0, y0) = self.frame.point(self.grid.point(i, 0));
            let (disp, jac) = map.orbit_displacement(x0, y0, n)?;
            let winding = disp[0].round() as i64;
            let dy = match self.options.space {
                Space::Torus => disp[1] - disp[1].round(),
                Space::Cylinder => disp[1],
            };
            orbits.push(OrbitPrediction {
                i,
                points,
                twist: self.twists[i],
                predicted_trace,
                measured_trace: jac.trace(),
                residual: (disp[0] - winding as f64).hypot(dy),
                winding,
                kind: classify(predicted_trace, CLASSIFY_TOL, CLASSIFY_TOL),
            });
        }
        Ok(ForgeResult {
            map,
            t,
            grid: self.grid,
            h: self.bump.h.clone(),
            orbits,
            perturbation: self.perturbation(t),
        })
    }
}

/// Forges `grid` on the invariant circle `y = 0` of `map` with strength `t`.
pub fn forge(map: &SymplecticMap, grid: &ResonantGrid, t: f64) -> Result<ForgeResult> {
    prepare(map, &CurveFrame::identity(), grid, &ForgeOptions::default())?.apply(t)
}

/// Orbit table with columns
/// `i,j,x,y,period,predicted_trace,measured_trace,type`, sorted by `(i, j)`.
pub fn orbit_table_csv(result: &ForgeResult) -> String {
    let mut out = String::from("i,j,x,y,period,predicted_trace,measured_trace,type\n");
    for o in &result.orbits {
        for (j, p) in o.points.iter().enumerate() {
            out.push_str(&format!(
                "{},{j},{},{},{},{},{},{}\n",
                o.i,
                format17(p[0]),
                format17(p[1]),
                result.grid.n,
                format17(o.predicted_trace),
                format17(o.measured_trace),
                o.kind.label()
            ));
        }
    }
    out
}
