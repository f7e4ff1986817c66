use super::jacobian::Jacobian2;
use super::point::{split_lift, PhasePoint, Space};
use super::scalar::Scalar;
use super::trig::TrigPoly;
use super::yfunc::YFunction;
use crate::error::{Error, Result};
use crate::flows::{integrator, HamiltonianField, IntegratorConfig};
use serde::{Deserialize, Serialize};

/// An area-preserving map assembled from exactly evaluable pieces.
///
/// All nodes act on lifted coordinates `(x, y)` and are 1-periodic in `x`;
/// torus maps are also 1-periodic in `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymplecticMap {
    /// `(x + theta, y)`
    Translation {
        #[serde(with = "crate::decimal")]
        theta: f64,
    },
    /// `(x, y + v(x))`
    VerticalShear { v: TrigPoly },
    /// `(x + u(y), y)`
    HorizontalShear { u: YFunction },
    /// `(x + slope * y, y)`
    IntegrableTwist {
        #[serde(with = "crate::decimal")]
        slope: f64,
    },
    /// Time-`t` map of a Hamiltonian flow, numerically integrated.
    FlowMap {
        field: HamiltonianField,
        #[serde(with = "crate::decimal")]
        t: f64,
        #[serde(default)]
        config: IntegratorConfig,
    },
    /// Children applied in list order: `maps[0]` acts first.
    Composition { maps: Vec<SymplecticMap> },
    /// `(z, w) ↦ (z + xi(z), w / (1 + xi'(z)))`, the symplectic lift of a
    /// circle diffeomorphism, or its inverse.
    CotangentLift {
        xi: TrigPoly,
        #[serde(default)]
        inverse: bool,
    },
    /// Planar rotation by angle `rotation + twist * (x^2 + y^2)`.
    /// Local chart only: not periodic in either coordinate.
    PolarTwist {
        #[serde(with = "crate::decimal")]
        rotation: f64,
        #[serde(with = "crate::decimal")]
        twist: f64,
    },
}

/// Result of one evaluation: lifted displacement and (optionally) Jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub displacement: [f64; 2],
    pub jacobian: Jacobian2,
}

/// n-fold iterate of a point with lift bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iterate {
    pub point: PhasePoint,
    pub jacobian: Jacobian2,
    /// Accumulated integer winding in x and (torus only) y.
    pub winding: [i64; 2],
    /// Total lifted displacement; `winding` plus the change of representative.
    pub displacement: [f64; 2],
}

const LIFT_NEWTON_ITERS: usize = 60;

impl SymplecticMap {
    pub fn identity() -> Self {
        SymplecticMap::Composition { maps: Vec::new() }
    }

    pub fn compose(maps: Vec<SymplecticMap>) -> Self {
        SymplecticMap::Composition { maps }
    }

    /// `outer ∘ inner`: applies `inner` first.
    pub fn then(inner: SymplecticMap, outer: SymplecticMap) -> Self {
        SymplecticMap::Composition { maps: vec![inner, outer] }
    }

    /// True when no node needs numerical integration.
    pub fn is_closed_form(&self) -> bool {
        match self {
            SymplecticMap::FlowMap { .. } => false,
            SymplecticMap::Composition { maps } => maps.iter().all(|m| m.is_closed_form()),
            _ => true,
        }
    }

    /// Displacement (and Jacobian when `with_jacobian`) at a lifted point.
    pub fn step(&self, x: f64, y: f64, with_jacobian: bool) -> Result<Step> {
        use SymplecticMap::*;
        let plain = |d: [f64; 2], j: Jacobian2| Ok(Step { displacement: d, jacobian: j });
        match self {
            Translation { theta } => plain([*theta, 0.0], Jacobian2::IDENTITY),
            VerticalShear { v } => {
                if with_jacobian {
                    let (val, dv) = v.eval_d1(x);
                    plain([0.0, val], Jacobian2::new(1.0, 0.0, dv, 1.0))
                } else {
                    plain([0.0, v.eval(x)], Jacobian2::IDENTITY)
                }
            }
            HorizontalShear { u } => {
                let [val, du] = u.eval_derivs::<2>(y);
                plain([val, 0.0], Jacobian2::new(1.0, du, 0.0, 1.0))
            }
            IntegrableTwist { slope } => {
                plain([slope * y, 0.0], Jacobian2::new(1.0, *slope, 0.0, 1.0))
            }
            FlowMap { field, t, config } => integrator::flow(field, *t, config, x, y, with_jacobian),
            Composition { maps } => {
                let (mut cx, mut cy) = (x, y);
                let mut total = [0.0, 0.0];
                let mut jac = Jacobian2::IDENTITY;
                for m in maps {
                    let s = m.step(cx, cy, with_jacobian)?;
                    total[0] += s.displacement[0];
                    total[1] += s.displacement[1];
                    cx = x + total[0];
                    cy = y + total[1];
                    if with_jacobian {
                        jac = s.jacobian * jac;
                    }
                }
                plain(total, jac)
            }
            CotangentLift { xi, inverse: false } => {
                let [v, d1, d2] = xi.eval_derivs::<3>(x);
                let a = 1.0 + d1;
                let j = Jacobian2::new(a, 0.0, -y * d2 / (a * a), 1.0 / a);
                plain([v, y / a - y], j)
            }
            CotangentLift { xi, inverse: true } => {
                let z = invert_circle_map(xi, x)?;
                let [_, d1, d2] = xi.eval_derivs::<3>(z);
                let a = 1.0 + d1;
                let w = y * a;
                // inverse of the forward Jacobian at (z, w)
                let j = Jacobian2::new(1.0 / a, 0.0, w * d2 / (a * a), a);
                plain([z - x, w - y], j)
            }
            PolarTwist { rotation, twist } => {
                let angle = rotation + twist * (x * x + y * y);
                let (s, c) = angle.sin_cos();
                let (px, py) = (c * x - s * y, s * x + c * y);
                let j = Jacobian2::new(
                    c - py * 2.0 * twist * x,
                    -s - py * 2.0 * twist * y,
                    s + px * 2.0 * twist * x,
                    c + px * 2.0 * twist * y,
                );
                plain([px - x, py - y], j)
            }
        }
    }

    /// Lifted image of a lifted point.
    pub fn apply_lift(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let s = self.step(x, y, false)?;
        Ok((x + s.displacement[0], y + s.displacement[1]))
    }

    /// Lifted image and Jacobian.
    pub fn apply_lift_jac(&self, x: f64, y: f64) -> Result<((f64, f64), Jacobian2)> {
        let s = self.step(x, y, true)?;
        Ok(((x + s.displacement[0], y + s.displacement[1]), s.jacobian))
    }

    /// Image of `p`, normalized to the point's space.
    pub fn eval_map(&self, p: PhasePoint) -> Result<PhasePoint> {
        let (x, y) = p.xy();
        let (nx, ny) = self.apply_lift(x, y)?;
        Ok(PhasePoint::new(nx, ny, p.space))
    }

    pub fn jacobian(&self, p: PhasePoint) -> Result<Jacobian2> {
        let (x, y) = p.xy();
        Ok(self.step(x, y, true)?.jacobian)
    }

    /// `n`-th image with product Jacobian and lift winding.
    pub fn iterate(&self, p: PhasePoint, n: usize) -> Result<Iterate> {
        if n == 0 {
            return Err(Error::DomainError("iterate needs n >= 1".into()));
        }
        let (mut x, mut y) = p.xy();
        let mut jac = Jacobian2::IDENTITY;
        let mut winding = [0i64; 2];
        let mut total = [0.0; 2];
        for _ in 0..n {
            let s = self.step(x, y, true)?;
            jac = s.jacobian * jac;
            total[0] += s.displacement[0];
            total[1] += s.displacement[1];
            let (wx, rx) = split_lift(x + s.displacement[0]);
            winding[0] += wx;
            x = rx;
            y += s.displacement[1];
            if p.space == Space::Torus {
                let (wy, ry) = split_lift(y);
                winding[1] += wy;
                y = ry;
            }
        }
        Ok(Iterate {
            point: PhasePoint { x: super::point::CirclePoint::new(x), y, space: p.space },
            jacobian: jac,
            winding,
            displacement: total,
        })
    }

    /// Total lifted displacement of `n` steps from a lifted point, with the
    /// product Jacobian. This is the workhorse for periodic-orbit Newton.
    pub fn orbit_displacement(&self, x: f64, y: f64, n: usize) -> Result<([f64; 2], Jacobian2)> {
        let (mut cx, mut cy) = (x, y);
        let mut jac = Jacobian2::IDENTITY;
        let mut total = [0.0; 2];
        for _ in 0..n {
            let s = self.step(cx, cy, true)?;
            jac = s.jacobian * jac;
            total[0] += s.displacement[0];
            total[1] += s.displacement[1];
            // keep the base point bounded without disturbing the running sum
            cx = (x + total[0]).rem_euclid(1.0);
            cy = y + total[1];
        }
        Ok((total, jac))
    }

    /// Lifted image over an arbitrary [`Scalar`] (complex, jets).
    /// Flow maps are not supported.
    pub fn eval_scalar<S: Scalar>(&self, x: S, y: S) -> Result<(S, S)> {
        use SymplecticMap::*;
        match self {
            Translation { theta } => Ok((x + S::from_f64(*theta), y)),
            VerticalShear { v } => Ok((x, y + v.eval_scalar(x))),
            HorizontalShear { u } => Ok((x + u.eval_scalar(y), y)),
            IntegrableTwist { slope } => Ok((x + S::from_f64(*slope) * y, y)),
            FlowMap { .. } => Err(Error::Unsupported(
                "flow maps cannot be evaluated over generic scalars".into(),
            )),
            Composition { maps } => {
                let (mut cx, mut cy) = (x, y);
                for m in maps {
                    (cx, cy) = m.eval_scalar(cx, cy)?;
                }
                Ok((cx, cy))
            }
            CotangentLift { xi, inverse: false } => {
                let dxi = xi.derivative();
                let a = S::from_f64(1.0) + dxi.eval_scalar(x);
                Ok((x + xi.eval_scalar(x), y / a))
            }
            CotangentLift { xi, inverse: true } => {
                let dxi = xi.derivative();
                let mut z = x - S::from_f64(x.real() - invert_circle_map(xi, x.real())?);
                for _ in 0..8 {
                    let g = z + xi.eval_scalar(z) - x;
                    let dg = S::from_f64(1.0) + dxi.eval_scalar(z);
                    z = z - g / dg;
                }
                let a = S::from_f64(1.0) + dxi.eval_scalar(z);
                Ok((z, y * a))
            }
            PolarTwist { rotation, twist } => {
                let angle = S::from_f64(*rotation) + S::from_f64(*twist) * (x * x + y * y);
                let (s, c) = (angle / S::from_f64(std::f64::consts::TAU)).sin_cos_2pi();
                Ok((c * x - s * y, s * x + c * y))
            }
        }
    }
}

/// Solves `z + xi(z) = x` for the lift of a circle diffeomorphism.
pub fn invert_circle_map(xi: &TrigPoly, x: f64) -> Result<f64> {
    let mut z = x - xi.eval(x);
    for _ in 0..LIFT_NEWTON_ITERS {
        let (v, d) = xi.eval_d1(z);
        let a = 1.0 + d;
        if a <= 0.0 {
            return Err(Error::NotDiffeo { min_derivative: a });
        }
        let dz = (z + v - x) / a;
        z -= dz;
        if dz.abs() <= 1e-16 * (1.0 + z.abs()) {
            return Ok(z);
        }
    }
    // Newton stalls at roundoff; accept if the residual is at that level
    let r = z + xi.eval(z) - x;
    if r.abs() <= 1e-14 {
        Ok(z)
    } else {
        Err(Error::IntegrationFailure {
            step: LIFT_NEWTON_ITERS,
            time: 0.0,
            reason: format!("circle-map inversion residual {r:.3e}"),
        })
    }
}
