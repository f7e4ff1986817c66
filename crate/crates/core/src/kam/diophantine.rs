use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Golden mean `(√5 - 1) / 2`.
pub fn golden_mean() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Certified lower bound `|θ - p/q| >= c / q^{2+τ}` for all `q <= qmax`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiophantineCert {
    #[serde(with = "crate::decimal")]
    pub theta: f64,
    #[serde(with = "crate::decimal")]
    pub tau: f64,
    /// Sound constant: the minimum over every `q <= qmax`.
    #[serde(with = "crate::decimal")]
    pub c: f64,
    pub qmax: u64,
    /// Smallest `q^{2+τ} |θ - p/q|` over the last few convergents: the
    /// asymptotic constant, informational only.
    #[serde(with = "crate::decimal")]
    pub tail_constant: f64,
    /// Convergents `(p, q)` with `q <= qmax`.
    pub convergents: Vec<(i64, u64)>,
    /// Continued-fraction partial quotients used.
    pub partial_quotients: Vec<u64>,
}

impl DiophantineCert {
    /// Checks the inequality for every `q <= qmax` with the nearest `p`;
    /// returns the number of violations.
    pub fn violations(&self) -> usize {
        (1..=self.qmax)
            .filter(|&q| {
                let qf = q as f64;
                let p = (self.theta * qf).round();
                (self.theta - p / qf).abs() < self.c / qf.powf(2.0 + self.tau)
            })
            .count()
    }
}

/// Continued-fraction certificate of `θ` with exponent `τ` up to `qmax`.
///
/// The minimum of `q^{2+τ} |θ - p/q|` is attained at convergents; any other
/// fraction satisfies `q^2 |θ - p/q| >= 1/2` (Legendre), so `c` is capped
/// at `1/2` and holds for every `q <= qmax`.
pub fn diophantine_certificate(theta: f64, tau: f64, qmax: u64) -> Result<DiophantineCert> {
    if qmax < 2 || !(tau >= 0.0) || !theta.is_finite() {
        return Err(Error::DomainError(format!(
            "certificate needs qmax >= 2, tau >= 0 and finite theta (got {qmax}, {tau}, {theta})"
        )));
    }
    let a0 = theta.floor();
    let mut partial = vec![a0 as i64 as u64];
    let (mut p_prev, mut q_prev) = (1i64, 0u64);
    let (mut p, mut q) = (a0 as i64, 1u64);
    let mut convergents = vec![(p, q)];
    let mut rest = theta - a0;
    loop {
        if rest.abs() < 1e-12 {
            return Err(Error::RationalDetected { p, q: q as i64 });
        }
        let inv = 1.0 / rest;
        let a = inv.floor();
        rest = inv - a;
        let a = a as u64;
        let q_next = a * q + q_prev;
        if q_next > qmax {
            break;
        }
        let p_next = a as i64 * p + p_prev;
        (p_prev, q_prev, p, q) = (p, q, p_next, q_next);
        partial.push(a);
        convergents.push((p, q));
    }
    let measure = |&(p, q): &(i64, u64)| {
        let qf = q as f64;
        qf.powf(2.0 + tau) * (theta - p as f64 / qf).abs()
    };
    // the integer part convergent is compared with its nearer neighbour too
    let mut c = convergents.iter().map(measure).fold(f64::INFINITY, f64::min);
    c = c.min(measure(&((theta.round()) as i64, 1)));
    c = c.min(0.5);
    let tail_constant = convergents.iter().rev().take(4).map(measure).fold(f64::INFINITY, f64::min);
    if c < 1e-9 {
        let &(p, q) = convergents.last().unwrap();
        return Err(Error::RationalDetected { p, q: q as i64 });
    }
    Ok(DiophantineCert { theta, tau, c, qmax, tail_constant, convergents, partial_quotients: partial })
}
