use super::cohomology::{solve_cohomological, DIVISOR_FLOOR};
use super::diophantine::DiophantineCert;
use crate::error::{Error, Result};
use crate::forge::CurveFrame;
use crate::phase::{Jacobian2, Space, SymplecticMap, TrigPoly};
use serde::{Deserialize, Serialize};

/// Invariant circle `z ↦ (z + xi(z), eta(z))` conjugating the map to the
/// rotation by `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KamCurve {
    pub xi: TrigPoly,
    pub eta: TrigPoly,
    #[serde(with = "crate::decimal")]
    pub theta: f64,
    /// Grid sup of `|F(K(z)) - K(z + θ)|`.
    #[serde(with = "crate::decimal")]
    pub residual: f64,
    /// Extremes and mean of the twist along the curve.
    #[serde(with = "crate::decimal")]
    pub min_twist: f64,
    #[serde(with = "crate::decimal")]
    pub mean_twist: f64,
    /// Analyticity strip estimated from the Fourier decay.
    #[serde(with = "crate::decimal")]
    pub strip_radius: f64,
    pub modes: usize,
    pub iterations: usize,
    #[serde(with = "crate::decimal::vec")]
    pub history: Vec<f64>,
}

impl KamCurve {
    /// Initial guess `y = g(x)` with the identity parameterization.
    pub fn graph(g: TrigPoly, theta: f64) -> Self {
        KamCurve {
            xi: TrigPoly::zero(),
            eta: g,
            theta,
            residual: f64::INFINITY,
            min_twist: 0.0,
            mean_twist: 0.0,
            strip_radius: f64::INFINITY,
            modes: 0,
            iterations: 0,
            history: Vec::new(),
        }
    }

    /// `x`-projection is a diffeomorphism.
    pub fn is_graph(&self) -> bool {
        let d = self.xi.derivative().plus_constant(1.0);
        let len = (8 * self.xi.degree().max(32)).next_power_of_two();
        d.sample(len).into_iter().fold(f64::INFINITY, f64::min) > 0.0
    }

    pub fn frame(&self) -> CurveFrame {
        CurveFrame { xi: self.xi.clone(), eta: self.eta.clone() }
    }

    pub fn point(&self, z: f64) -> (f64, f64) {
        (z + self.xi.eval(z), self.eta.eval(z))
    }

    /// Invariance residual on a grid of `len` points.
    pub fn residual_on(&self, map: &SymplecticMap, len: usize, space: Space) -> Result<f64> {
        Ok(evaluate(map, &self.xi, &self.eta, self.theta, len, space, false)?.residual)
    }
}

/// Settings for [`solve_invariance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KamConfig {
    /// Harmonics kept in each component.
    pub modes: usize,
    /// Grid points per harmonic kept.
    pub oversample: usize,
    pub max_iterations: usize,
    #[serde(with = "crate::decimal")]
    pub tolerance: f64,
    /// Residual accepted when the iteration stalls.
    #[serde(with = "crate::decimal")]
    pub accept: f64,
    #[serde(with = "crate::decimal")]
    pub divisor_floor: f64,
    /// Largest energy fraction allowed in the top decile of the spectrum.
    #[serde(with = "crate::decimal")]
    pub tail_ratio: f64,
    pub space: Space,
    pub require_twist: bool,
}

impl Default for KamConfig {
    fn default() -> Self {
        KamConfig {
            modes: 64,
            oversample: 4,
            max_iterations: 40,
            tolerance: 1e-12,
            accept: 1e-10,
            divisor_floor: DIVISOR_FLOOR,
            tail_ratio: 1e-12,
            space: Space::Torus,
            require_twist: true,
        }
    }
}

struct GridEval {
    error: Vec<[f64; 2]>,
    jac: Vec<Jacobian2>,
    residual: f64,
}

fn evaluate(
    map: &SymplecticMap,
    xi: &TrigPoly,
    eta: &TrigPoly,
    theta: f64,
    len: usize,
    space: Space,
    with_jacobian: bool,
) -> Result<GridEval> {
    let xs = xi.sample(len);
    let ys = eta.sample(len);
    let xs_next = xi.shifted(theta).sample(len);
    let ys_next = eta.shifted(theta).sample(len);
    let mut error = Vec::with_capacity(len);
    let mut jac = Vec::with_capacity(if with_jacobian { len } else { 0 });
    let mut residual = 0.0_f64;
    for l in 0..len {
        let z = l as f64 / len as f64;
        let s = map.step(z + xs[l], ys[l], with_jacobian)?;
        let ex = z + xs[l] + s.displacement[0] - (z + theta + xs_next[l]);
        let mut ey = ys[l] + s.displacement[1] - ys_next[l];
        if space == Space::Torus {
            ey -= ey.round();
        }
        residual = residual.max(ex.hypot(ey));
        error.push([ex, ey]);
        if with_jacobian {
            jac.push(s.jacobian);
        }
    }
    if !residual.is_finite() {
        residual = f64::INFINITY;
    }
    Ok(GridEval { error, jac, residual })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Tangent `L = K'` and normal `N = (-L_y, L_x)/|L|^2` on the grid.
fn frame_vectors(xi: &TrigPoly, eta: &TrigPoly, len: usize) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let lx: Vec<f64> = xi.derivative().plus_constant(1.0).sample(len);
    let ly: Vec<f64> = eta.derivative().sample(len);
    let tangent: Vec<[f64; 2]> = lx.iter().zip(&ly).map(|(&a, &b)| [a, b]).collect();
    let normal = tangent
        .iter()
        .map(|l| {
            let n2 = l[0] * l[0] + l[1] * l[1];
            [-l[1] / n2, l[0] / n2]
        })
        .collect();
    (tangent, normal)
}

/// Twist `T(z)` of the map along the curve in the `[L | N]` frame.
fn twist_values(jac: &[Jacobian2], normal: &[[f64; 2]], normal_next: &[[f64; 2]]) -> Vec<f64> {
    jac.iter()
        .zip(normal)
        .zip(normal_next)
        .map(|((j, n), np)| {
            let v = j.apply(*n);
            np[1] * v[0] - np[0] * v[1]
        })
        .collect()
}

fn spectrum_energy(p: &TrigPoly) -> Vec<f64> {
    (1..=p.degree())
        .map(|k| {
            let (a, b) = p.coeff(k);
            a * a + b * b
        })
        .collect()
}

fn combined_energy(xi: &TrigPoly, eta: &TrigPoly, modes: usize) -> Vec<f64> {
    let ex = spectrum_energy(xi);
    let ey = spectrum_energy(eta);
    (0..modes)
        .map(|i| ex.get(i).copied().unwrap_or(0.0) + ey.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// Fraction of the harmonic energy in the top tenth of the kept modes.
pub fn tail_fraction(xi: &TrigPoly, eta: &TrigPoly, modes: usize) -> (f64, f64) {
    let e = combined_energy(xi, eta, modes);
    let total: f64 = e.iter().sum();
    let start = modes - modes / 10;
    let top: f64 = e[start.min(e.len())..].iter().sum();
    (top, total)
}

/// Strip radius `ρ` from a least-squares fit `log |c_k| ≈ A - 2πρk`.
pub fn strip_radius(xi: &TrigPoly, eta: &TrigPoly) -> f64 {
    let modes = xi.degree().max(eta.degree());
    let e = combined_energy(xi, eta, modes);
    let peak = e.iter().copied().fold(0.0_f64, f64::max);
    let pts: Vec<(f64, f64)> = e
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 1e-30 * peak.max(1e-300) && v > 1e-300)
        .map(|(i, &v)| ((i + 1) as f64, 0.5 * v.ln()))
        .collect();
    if pts.len() < 3 {
        return f64::INFINITY;
    }
    let n = pts.len() as f64;
    let mk = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pts.iter().map(|p| (p.0 - mk) * (p.1 - ml)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mk).powi(2)).sum();
    let slope = cov / var;
    if slope >= 0.0 {
        0.0
    } else {
        -slope / std::f64::consts::TAU
    }
}

/// Newton iteration on `F(K(z)) = K(z + θ)` in Fourier space.
///
/// Each step solves the linearized equation in the frame `[K' | N]`, where
/// it reduces to two cohomological equations coupled by the twist. The
/// tangential mean keeps `mean(xi) = 0`; the normal mean is fixed by the
/// rotation number.
pub fn solve_invariance(
    map: &SymplecticMap,
    cert: &DiophantineCert,
    guess: &KamCurve,
    config: &KamConfig,
) -> Result<KamCurve> {
    let theta = cert.theta;
    let modes = config.modes.max(4);
    let len = (config.oversample.max(2) * modes).next_power_of_two();
    let mut xi = guess.xi.truncated(modes);
    xi = xi.plus_constant(-xi.mean());
    let mut eta = guess.eta.truncated(modes);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut rises = 0;
    let diverged = |reason: String, history: &[f64]| Error::NewtonDiverged {
        reason,
        history: history.to_vec(),
    };
    loop {
        let ev = evaluate(map, &xi, &eta, theta, len, config.space, true)?;
        let res = ev.residual;
        if let Some(&last) = history.last() {
            rises = if res > last { rises + 1 } else { 0 };
        }
        history.push(res);
        if !res.is_finite() || res > 1.0 {
            return Err(diverged(format!("residual {res:e} at iteration {iterations}"), &history));
        }
        if rises >= 3 {
            return Err(diverged("residual grew three times in a row".into(), &history));
        }
        let (tangent, normal) = frame_vectors(&xi, &eta, len);
        let (tangent_next, normal_next) = frame_vectors(&xi.shifted(theta), &eta.shifted(theta), len);
        let twist = twist_values(&ev.jac, &normal, &normal_next);
        if res <= config.tolerance || iterations >= config.max_iterations {
            if res > config.accept {
                return Err(diverged(format!("residual {res:e} after {iterations} iterations"), &history));
            }
            let min_twist = twist.iter().copied().fold(f64::INFINITY, f64::min);
            let mean_twist = mean(&twist);
            if config.require_twist && !(min_twist > 0.0) {
                return Err(Error::TwistLost { min_entry: min_twist });
            }
            let (top, total) = tail_fraction(&xi, &eta, modes);
            if top > config.tail_ratio * total && top > 1e-28 {
                return Err(diverged(
                    format!("spectral tail holds {top:e} of {total:e}: too few modes"),
                    &history,
                ));
            }
            return Ok(KamCurve {
                strip_radius: strip_radius(&xi, &eta),
                xi,
                eta,
                theta,
                residual: res,
                min_twist,
                mean_twist,
                modes,
                iterations,
                history,
            });
        }
        iterations += 1;
        // error in the frame at z + θ
        let mut e1 = Vec::with_capacity(len);
        let mut e2 = Vec::with_capacity(len);
        for l in 0..len {
            let [ex, ey] = ev.error[l];
            let (lp, np) = (tangent_next[l], normal_next[l]);
            e1.push(np[1] * ex - np[0] * ey);
            e2.push(-lp[1] * ex + lp[0] * ey);
        }
        let m2 = mean(&e2);
        let rhs2: Vec<f64> = e2.iter().map(|v| v - m2).collect();
        let b0 = solve_cohomological(&TrigPoly::from_samples(&rhs2), theta, config.divisor_floor)?
            .beta
            .sample(len);
        let tb0: Vec<f64> = twist.iter().zip(&b0).map(|(t, b)| t * b).collect();
        let mean_twist = mean(&twist);
        if mean_twist.abs() < 1e-14 {
            return Err(Error::TwistLost { min_entry: mean_twist });
        }
        let c2 = -(mean(&e1) + mean(&tb0)) / mean_twist;
        let b: Vec<f64> = b0.iter().map(|v| v + c2).collect();
        let rhs1: Vec<f64> = (0..len).map(|l| e1[l] + twist[l] * b[l]).collect();
        let m1 = mean(&rhs1);
        let rhs1: Vec<f64> = rhs1.iter().map(|v| v - m1).collect();
        let a0 = solve_cohomological(&TrigPoly::from_samples(&rhs1), theta, config.divisor_floor)?
            .beta
            .sample(len);
        let shift_x: Vec<f64> = (0..len).map(|l| tangent[l][0] * a0[l] + normal[l][0] * b[l]).collect();
        let mean_lx = mean(&tangent.iter().map(|t| t[0]).collect::<Vec<_>>());
        let c1 = -mean(&shift_x) / mean_lx;
        let xs = xi.sample(len);
        let ys = eta.sample(len);
        let mut new_x = Vec::with_capacity(len);
        let mut new_y = Vec::with_capacity(len);
        for l in 0..len {
            let a = a0[l] + c1;
            new_x.push(xs[l] + tangent[l][0] * a + normal[l][0] * b[l]);
            new_y.push(ys[l] + tangent[l][1] * a + normal[l][1] * b[l]);
        }
        xi = TrigPoly::from_samples(&new_x).truncated(modes);
        xi = xi.plus_constant(-xi.mean());
        eta = TrigPoly::from_samples(&new_y).truncated(modes);
    }
}
