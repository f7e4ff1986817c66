use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The points `x_{i,j} = i/M + j p/N (mod 1)`, `0 <= i < 2γ`, `0 <= j < N`,
/// with `M = 2γN`. They coincide with the uniform grid `m/M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResonantGrid {
    pub p: i64,
    pub n: i64,
    pub gamma: usize,
}

impl ResonantGrid {
    /// Validates `N >= 1`, `γ >= 1`, `gcd(p, N) = 1` and the bijection onto `m/M`.
    pub fn build(p: i64, n: i64, gamma: usize) -> Result<Self> {
        if n < 1 || gamma < 1 {
            return Err(Error::DomainError(format!("grid needs N >= 1 and gamma >= 1 (got N={n}, gamma={gamma})")));
        }
        if gcd(p, n) != 1 {
            return Err(Error::NotLowestTerms { p, n });
        }
        let grid = ResonantGrid { p, n, gamma };
        let mut seen = vec![false; grid.size()];
        for i in 0..2 * gamma {
            for j in 0..n as usize {
                let m = grid.index(i, j);
                if seen[m] {
                    return Err(Error::NotLowestTerms { p, n });
                }
                seen[m] = true;
            }
        }
        Ok(grid)
    }

    /// `M = 2γN`.
    pub fn size(&self) -> usize {
        2 * self.gamma * self.n as usize
    }

    pub fn theta(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    /// `(i + 2γ j p) mod M`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        let m = self.size() as i64;
        (i as i64 + 2 * self.gamma as i64 * j as i64 * self.p).rem_euclid(m) as usize
    }

    pub fn point(&self, i: usize, j: usize) -> f64 {
        self.index(i, j) as f64 / self.size() as f64
    }

    /// Number of orbits, `2γ`.
    pub fn orbit_count(&self) -> usize {
        2 * self.gamma
    }
}
