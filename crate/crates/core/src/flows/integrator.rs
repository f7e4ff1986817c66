//! Gauss–Legendre collocation for autonomous Hamiltonian flows.
//!
//! Stages are solved by full Newton with the exact Hessian. The Jacobian of
//! the returned map is the derivative of the discrete map itself (the
//! linearized stage system is solved at the converged stages), so it is
//! symplectic to roundoff regardless of step size.

use super::field::{Hess, HamiltonianField};
use crate::error::{Error, Result};
use crate::phase::{Jacobian2, Step};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Maximum step size; the actual step divides `|t|` evenly.
    #[serde(with = "crate::decimal")]
    pub step: f64,
    /// Newton tolerance on stage updates.
    #[serde(with = "crate::decimal")]
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Number of Gauss–Legendre stages: 1 is the implicit midpoint rule,
    /// 2 is the fourth-order method.
    pub stages: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { step: 1e-3, tolerance: 1e-15, max_iterations: 30, stages: 2 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "integrator needs step > 0, tolerance > 0, max_iterations >= 1".into(),
            ));
        }
        if !(1..=3).contains(&self.stages) {
            return Err(Error::InvalidConfig("integrator stages must be 1, 2 or 3".into()));
        }
        Ok(())
    }
}

struct Tableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
}

fn tableau(stages: usize) -> Tableau {
    match stages {
        1 => Tableau { a: vec![vec![0.5]], b: vec![1.0], c: vec![0.5] },
        2 => {
            let r = 3f64.sqrt() / 6.0;
            Tableau {
                a: vec![vec![0.25, 0.25 - r], vec![0.25 + r, 0.25]],
                b: vec![0.5, 0.5],
                c: vec![0.5 - r, 0.5 + r],
            }
        }
        _ => {
            let r = 15f64.sqrt();
            Tableau {
                a: vec![
                    vec![5.0 / 36.0, 2.0 / 9.0 - r / 15.0, 5.0 / 36.0 - r / 30.0],
                    vec![5.0 / 36.0 + r / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r / 24.0],
                    vec![5.0 / 36.0 + r / 30.0, 2.0 / 9.0 + r / 15.0, 5.0 / 36.0],
                ],
                b: vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
                c: vec![0.5 - r / 10.0, 0.5, 0.5 + r / 10.0],
            }
        }
    }
}

fn field_jacobian(d: &Hess) -> [[f64; 2]; 2] {
    // derivative of (H_y, -H_x)
    [[d.hxy, d.hyy], [-d.hxx, -d.hxy]]
}

/// Time-`t` map from the lifted point `(x, y)`: displacement and, when
/// requested, the exact Jacobian of the discrete flow.
pub fn flow(
    field: &HamiltonianField,
    t: f64,
    config: &IntegratorConfig,
    x: f64,
    y: f64,
    with_jacobian: bool,
) -> Result<Step> {
    config.validate()?;
    if t == 0.0 {
        return Ok(Step { displacement: [0.0, 0.0], jacobian: Jacobian2::IDENTITY });
    }
    let steps = (t.abs() / config.step).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let tab = tableau(config.stages);
    let mut z = [x, y];
    let mut jac = Jacobian2::IDENTITY;
    for k in 0..steps {
        let (next, dj) = gl_step(field, &tab, h, z, config, with_jacobian).map_err(|reason| {
            Error::IntegrationFailure { step: k, time: k as f64 * h, reason }
        })?;
        z = next;
        if with_jacobian {
            jac = dj * jac;
        }
    }
    Ok(Step { displacement: [z[0] - x, z[1] - y], jacobian: jac })
}

fn gl_step(
    field: &HamiltonianField,
    tab: &Tableau,
    h: f64,
    z: [f64; 2],
    config: &IntegratorConfig,
    with_jacobian: bool,
) -> std::result::Result<([f64; 2], Jacobian2), String> {
    let s = tab.b.len();
    let n = 2 * s;
    let eval = |p: [f64; 2]| field.hess(p[0], p[1]).map_err(|e| e.to_string());

    // explicit Euler predictor for the stage values
    let d0 = eval(z)?;
    let f0 = [d0.hy, -d0.hx];
    let mut stages: Vec<[f64; 2]> =
        tab.c.iter().map(|c| [z[0] + h * c * f0[0], z[1] + h * c * f0[1]]).collect();

    let mut derivs: Vec<Hess> = Vec::with_capacity(s);
    let mut converged = false;
    let mut last = f64::INFINITY;
    for _ in 0..config.max_iterations {
        derivs.clear();
        for st in &stages {
            derivs.push(eval(*st)?);
        }
        // residual R_i = Y_i - z - h Σ_j a_ij f(Y_j)
        let mut r = DVector::<f64>::zeros(n);
        let mut m = DMatrix::<f64>::identity(n, n);
        for i in 0..s {
            let mut acc = [0.0, 0.0];
            for j in 0..s {
                let d = &derivs[j];
                acc[0] += tab.a[i][j] * d.hy;
                acc[1] -= tab.a[i][j] * d.hx;
                let fj = field_jacobian(d);
                for (p, row) in fj.iter().enumerate() {
                    for (q, v) in row.iter().enumerate() {
                        m[(2 * i + p, 2 * j + q)] -= h * tab.a[i][j] * v;
                    }
                }
            }
            r[2 * i] = stages[i][0] - z[0] - h * acc[0];
            r[2 * i + 1] = stages[i][1] - z[1] - h * acc[1];
        }
        let delta = m
            .lu()
            .solve(&r)
            .ok_or_else(|| "singular stage Newton matrix".to_string())?;
        let mut size = 0.0_f64;
        for i in 0..s {
            stages[i][0] -= delta[2 * i];
            stages[i][1] -= delta[2 * i + 1];
            size = size.max(delta[2 * i].abs()).max(delta[2 * i + 1].abs());
        }
        if !size.is_finite() {
            return Err("non-finite stage update".into());
        }
        let scale = 1.0 + z[0].abs() + z[1].abs();
        if size <= config.tolerance * scale || (size <= 1e-13 * scale && size >= last) {
            converged = true;
            break;
        }
        last = size;
    }
    if !converged {
        return Err(format!("stage Newton did not converge (last update {last:.3e})"));
    }
    derivs.clear();
    for st in &stages {
        derivs.push(eval(*st)?);
    }
    let mut next = z;
    for i in 0..s {
        next[0] += h * tab.b[i] * derivs[i].hy;
        next[1] -= h * tab.b[i] * derivs[i].hx;
    }
    if !with_jacobian {
        return Ok((next, Jacobian2::IDENTITY));
    }
    // (I - h A⊗F) dY = [I; I; ...], then dz' = I + h Σ b_i F_i dY_i
    let mut m = DMatrix::<f64>::identity(n, n);
    for i in 0..s {
        for j in 0..s {
            let fj = field_jacobian(&derivs[j]);
            for (p, row) in fj.iter().enumerate() {
                for (q, v) in row.iter().enumerate() {
                    m[(2 * i + p, 2 * j + q)] -= h * tab.a[i][j] * v;
                }
            }
        }
    }
    let mut rhs = DMatrix::<f64>::zeros(n, 2);
    for i in 0..s {
        rhs[(2 * i, 0)] = 1.0;
        rhs[(2 * i + 1, 1)] = 1.0;
    }
    let dy = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| "singular variational matrix".to_string())?;
    let mut j = [[1.0, 0.0], [0.0, 1.0]];
    for i in 0..s {
        let fi = field_jacobian(&derivs[i]);
        for p in 0..2 {
            for q in 0..2 {
                let prod = fi[p][0] * dy[(2 * i, q)] + fi[p][1] * dy[(2 * i + 1, q)];
                j[p][q] += h * tab.b[i] * prod;
            }
        }
    }
    Ok((next, Jacobian2::new(j[0][0], j[0][1], j[1][0], j[1][1])))
}
