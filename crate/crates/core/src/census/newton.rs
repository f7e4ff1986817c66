use crate::error::{Error, Result};
use crate::phase::{Jacobian2, Space, SymplecticMap};
use serde::{Deserialize, Serialize};

/// Damped Newton settings for `f^n(z) - z - (p, 0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NewtonConfig {
    pub max_iterations: usize,
    /// Converged when the residual falls below this.
    pub tolerance: f64,
    /// Also accepted if stalled below this after the iteration budget.
    pub accept: f64,
    /// Largest step length per iteration.
    pub max_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { max_iterations: 60, tolerance: 1e-12, accept: 1e-10, max_step: 0.05 }
    }
}

/// A converged root of the periodic-orbit equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub y: f64,
    pub residual: f64,
    pub monodromy: Jacobian2,
}

fn residual(
    map: &SymplecticMap,
    x: f64,
    y: f64,
    n: usize,
    winding: i64,
    space: Space,
) -> Result<([f64; 2], Jacobian2)> {
    let (disp, jac) = map.orbit_displacement(x, y, n)?;
    let dy = match space {
        Space::Torus => disp[1] - disp[1].round(),
        Space::Cylinder => disp[1],
    };
    Ok(([disp[0] - winding as f64, dy], jac))
}

/// Levenberg–Marquardt step with a tiny damping: plain Newton when `J` is
/// well conditioned, the minimum-norm step when it is singular.
fn newton_step(j: &Jacobian2, g: [f64; 2]) -> [f64; 2] {
    let a = j.minus_identity();
    let scale = a.norm().powi(2).max(1e-300);
    let lambda = 1e-14 * scale;
    let jtj = Jacobian2::new(
        a.m11 * a.m11 + a.m21 * a.m21 + lambda,
        a.m11 * a.m12 + a.m21 * a.m22,
        a.m12 * a.m11 + a.m22 * a.m21,
        a.m12 * a.m12 + a.m22 * a.m22 + lambda,
    );
    let jtg = [a.m11 * g[0] + a.m21 * g[1], a.m12 * g[0] + a.m22 * g[1]];
    match jtj.solve(jtg) {
        Some(d) => [-d[0], -d[1]],
        None => [0.0, 0.0],
    }
}

/// Polishes a seed into a root of `f^n(z) = z + (winding, 0)`.
pub fn polish(
    map: &SymplecticMap,
    seed: [f64; 2],
    n: usize,
    winding: i64,
    space: Space,
    config: &NewtonConfig,
) -> Result<Root> {
    let (mut x, mut y) = (seed[0], seed[1]);
    let (mut g, mut jac) = residual(map, x, y, n, winding, space)?;
    let mut norm = g[0].hypot(g[1]);
    let mut history = vec![norm];
    for _ in 0..config.max_iterations {
        if norm <= config.tolerance {
            break;
        }
        let mut d = newton_step(&jac, g);
        let len = d[0].hypot(d[1]);
        if !len.is_finite() || len == 0.0 {
            break;
        }
        if len > config.max_step {
            let s = config.max_step / len;
            d = [d[0] * s, d[1] * s];
        }
        // backtrack on the residual norm
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let (nx, ny) = (x + alpha * d[0], y + alpha * d[1]);
            let (ng, nj) = residual(map, nx, ny, n, winding, space)?;
            let nn = ng[0].hypot(ng[1]);
            if nn.is_finite() && nn < norm {
                accepted = Some((nx, ny, ng, nj, nn));
                break;
            }
            alpha *= 0.5;
        }
        let Some((nx, ny, ng, nj, nn)) = accepted else { break };
        (x, y, g, jac, norm) = (nx, ny, ng, nj, nn);
        history.push(norm);
    }
    if norm <= config.accept {
        let y = if space == Space::Torus { y.rem_euclid(1.0) } else { y };
        Ok(Root { x: x.rem_euclid(1.0), y, residual: norm, monodromy: jac })
    } else {
        Err(Error::NewtonDiverged { reason: format!("residual {norm:e} after polishing"), history })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_twist_fixed_circle_point() {
        // standard-map-like kick has isolated fixed points at x = 0 and 1/2
        let kick = SymplecticMap::compose(vec![
            SymplecticMap::VerticalShear { v: crate::TrigPoly::harmonic(1, 0.0, 0.1) },
            SymplecticMap::IntegrableTwist { slope: 1.0 },
        ]);
        let r = polish(&kick, [0.47, 0.02], 1, 0, Space::Cylinder, &NewtonConfig::default()).unwrap();
        assert!(r.residual <= 1e-12);
        assert!((r.x - 0.5).abs() < 1e-10 && r.y.abs() < 1e-10);
    }
}
