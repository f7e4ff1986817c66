use super::map::SymplecticMap;
use super::point::{circle_delta, Space};
use super::trig::TrigPoly;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default tolerance for "the curve is invariant" checks.
pub const INVARIANCE_TOL: f64 = 1e-8;

/// `n` evenly spaced sample abscissae `i / n`.
pub fn uniform_samples(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

/// Distance from `(x, y)` to the graph `y = g(x)` measured vertically.
fn graph_defect(g: &TrigPoly, x: f64, y: f64, space: Space) -> f64 {
    let d = y - g.eval(x);
    match space {
        Space::Torus => circle_delta(0.0, d).abs(),
        Space::Cylinder => d.abs(),
    }
}

/// Entry `(1,2)` of `D(map^n)` at `(x, g(x))`, i.e. `∂/∂y` of the x-component
/// of the n-th iterate. Each iterate is checked to stay on the graph.
pub fn twist_entry(
    map: &SymplecticMap,
    g: &TrigPoly,
    x: f64,
    n: usize,
    space: Space,
    tol: f64,
) -> Result<f64> {
    let (mut cx, mut cy) = (x, g.eval(x));
    let mut jac = super::Jacobian2::IDENTITY;
    for _ in 0..n {
        let ((nx, ny), j) = map.apply_lift_jac(cx, cy)?;
        jac = j * jac;
        let defect = graph_defect(g, nx, ny, space);
        if defect > tol {
            return Err(Error::InvarianceViolation { x: cx, defect });
        }
        (cx, cy) = (nx, ny);
    }
    Ok(jac.m12)
}

/// First point where the cone condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeViolation {
    pub x: f64,
    pub k: usize,
    pub vector: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub passed: bool,
    pub points_checked: usize,
    pub first_violation: Option<ConeViolation>,
}

/// Checks that `D(map^k)` sends the vertical vector `(0,1)` into the open
/// half cone `{s > 0, t > g'(x) s}` at the image point, for `1 <= k <= n`
/// and every sample abscissa.
pub fn cone_check(
    map: &SymplecticMap,
    g: &TrigPoly,
    n: usize,
    samples: &[f64],
    space: Space,
) -> Result<ConeReport> {
    let dg = g.derivative();
    for &x0 in samples {
        let (mut x, mut y) = (x0, g.eval(x0));
        let mut v = [0.0, 1.0];
        for k in 1..=n {
            let ((nx, ny), j) = map.apply_lift_jac(x, y)?;
            let defect = graph_defect(g, nx, ny, space);
            if defect > INVARIANCE_TOL {
                return Err(Error::InvarianceViolation { x, defect });
            }
            v = j.apply(v);
            (x, y) = (nx, ny);
            let slope = dg.eval(x);
            if !(v[0] > 0.0 && v[1] > slope * v[0]) {
                return Ok(ConeReport {
                    passed: false,
                    points_checked: samples.len(),
                    first_violation: Some(ConeViolation { x: x0, k, vector: v }),
                });
            }
        }
    }
    Ok(ConeReport { passed: true, points_checked: samples.len(), first_violation: None })
}
