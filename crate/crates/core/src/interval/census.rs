use super::IntervalDynamics;
use crate::decimal::format17;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Settings for [`interval_census`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntervalCensusConfig {
    /// Largest number of monotone laps of `f^n` before giving up.
    pub max_laps: usize,
    /// Subdivision stops below this width.
    pub min_width: f64,
    /// `|f^n(x) - x|` below this on a whole subinterval marks a continuum.
    pub identity_tol: f64,
    /// Continua are only recognized on subintervals at least this wide.
    pub continuum_width: f64,
    /// Roots with `|(f^n)' - 1|` at most this are degenerate.
    pub transversality_tol: f64,
    /// Proper-divisor periodicity test tolerance.
    pub period_tol: f64,
}

impl Default for IntervalCensusConfig {
    fn default() -> Self {
        IntervalCensusConfig {
            max_laps: 1 << 16,
            min_width: 1e-13,
            identity_tol: 1e-11,
            continuum_width: 1e-9,
            transversality_tol: 1e-9,
            period_tol: 1e-9,
        }
    }
}

/// A monotone piece of `f^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lap {
    pub lo: f64,
    pub hi: f64,
    pub increasing: bool,
}

/// An isolated solution of `f^n(x) = x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalRoot {
    #[serde(with = "crate::decimal")]
    pub x: f64,
    /// `(f^n)'(x)`.
    #[serde(with = "crate::decimal")]
    pub derivative: f64,
    /// `|(f^n)'| != 1` beyond the tolerance.
    pub hyperbolic: bool,
}

/// A subinterval on which `f^n` is the identity to within tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Continuum {
    #[serde(with = "crate::decimal")]
    pub lo: f64,
    #[serde(with = "crate::decimal")]
    pub hi: f64,
    /// Least period of its midpoint.
    pub least_period: usize,
}

/// All points of least period `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCensus {
    pub period: usize,
    pub laps: usize,
    /// Transverse roots of least period `n`, sorted by `x`.
    pub roots: Vec<IntervalRoot>,
    /// Isolated roots with `(f^n)'` too close to 1.
    pub degenerate_roots: Vec<IntervalRoot>,
    pub continua: Vec<Continuum>,
    /// Roots discarded because their least period divides `n` properly.
    pub lower_period: usize,
}

impl IntervalCensus {
    pub fn hyperbolic_count(&self) -> usize {
        self.roots.iter().filter(|r| r.hyperbolic).count()
    }

    /// Roots with `|(f^n)'| > 1`.
    pub fn expanding_count(&self) -> usize {
        self.roots.iter().filter(|r| r.derivative.abs() > 1.0).count()
    }

    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.roots.iter().filter(|r| r.x >= lo && r.x <= hi).count()
    }
}

/// `f^n(x)` and `(f^n)'(x)`.
pub fn iterate<F: IntervalDynamics + ?Sized>(f: &F, x: f64, n: usize) -> [f64; 2] {
    let (mut y, mut d) = (x, 1.0);
    for _ in 0..n {
        let [v, dv] = f.eval(y);
        d *= dv;
        y = v;
    }
    [y, d]
}

/// Solves `h(x) = target` for monotone `h` on `[lo, hi]` by bisection.
fn bisect(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, target: f64) -> f64 {
    let increasing = h(hi) >= h(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (h(mid) < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Monotone partition of `f^n`, refined one iterate at a time by the
/// preimages of the critical points.
pub fn lap_partition<F: IntervalDynamics + ?Sized>(f: &F, n: usize, max_laps: usize) -> Result<Vec<Lap>> {
    let (a, b) = f.domain();
    let crit = f.critical_points();
    let mut cuts = vec![a, b];
    cuts.extend(crit.iter().copied().filter(|c| *c > a && *c < b));
    cuts.sort_by(f64::total_cmp);
    for m in 1..n {
        let mut next = Vec::with_capacity(cuts.len() * 2);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            next.push(lo);
            let (ylo, yhi) = (iterate(f, lo, m)[0], iterate(f, hi, m)[0]);
            let (vmin, vmax) = (ylo.min(yhi), ylo.max(yhi));
            let mut inner: Vec<f64> = crit
                .iter()
                .filter(|c| **c > vmin && **c < vmax)
                .map(|c| bisect(|x| iterate(f, x, m)[0], lo, hi, *c))
                .filter(|x| *x > lo && *x < hi)
                .collect();
            inner.sort_by(f64::total_cmp);
            next.extend(inner);
            if next.len() > max_laps + 1 {
                return Err(Error::PartitionOverflow { period: n, limit: max_laps });
            }
        }
        next.push(b);
        cuts = next;
    }
    if cuts.len() - 1 > max_laps {
        return Err(Error::PartitionOverflow { period: n, limit: max_laps });
    }
    Ok(cuts
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            Lap { lo: w[0], hi: w[1], increasing: iterate(f, mid, n)[1] >= 0.0 }
        })
        .collect())
}

enum Piece {
    Candidate(f64, f64),
    Flat(f64, f64),
}

/// Candidate and flat subintervals of an increasing lap. A subinterval
/// `[u, v]` is discarded when `f^n([u, v])`, an interval by monotonicity,
/// misses `[u, v]`.
fn scan_increasing<F: IntervalDynamics + ?Sized>(
    f: &F,
    lap: Lap,
    n: usize,
    config: &IntervalCensusConfig,
) -> Vec<Piece> {
    let g = |x: f64| iterate(f, x, n)[0] - x;
    let mut out = Vec::new();
    let mut stack = vec![(lap.lo, lap.hi, g(lap.lo), g(lap.hi))];
    while let Some((u, v, gu, gv)) = stack.pop() {
        let w = v - u;
        if gu > w || gv < -w {
            continue;
        }
        if w <= config.min_width {
            out.push(Piece::Candidate(u, v));
            continue;
        }
        let mid = 0.5 * (u + v);
        let gm = g(mid);
        if w >= config.continuum_width {
            let q1 = g(u + 0.25 * w);
            let q3 = g(u + 0.75 * w);
            if [gu, gv, gm, q1, q3].iter().all(|e| e.abs() <= config.identity_tol) {
                out.push(Piece::Flat(u, v));
                continue;
            }
        }
        // right half first so the left half is processed first
        stack.push((mid, v, gm, gv));
        stack.push((u, mid, gu, gm));
    }
    out
}

/// Root of a strictly decreasing `f^n(x) - x` on a lap, if any.
fn scan_decreasing<F: IntervalDynamics + ?Sized>(f: &F, lap: Lap, n: usize) -> Option<f64> {
    let g = |x: f64| iterate(f, x, n)[0] - x;
    let (gl, gh) = (g(lap.lo), g(lap.hi));
    if gl < 0.0 || gh > 0.0 {
        return None;
    }
    Some(bisect(g, lap.lo, lap.hi, 0.0))
}

fn least_period<F: IntervalDynamics + ?Sized>(f: &F, x: f64, n: usize, tol: f64) -> usize {
    (1..n).find(|d| n.is_multiple_of(*d) && (iterate(f, x, *d)[0] - x).abs() <= tol).unwrap_or(n)
}

/// Enumerates the solutions of `f^n(x) = x` over the whole domain.
///
/// Laps are scanned in order, so the result is deterministic.
pub fn interval_census<F: IntervalDynamics + ?Sized>(
    f: &F,
    n: usize,
    config: &IntervalCensusConfig,
) -> Result<IntervalCensus> {
    if n == 0 {
        return Err(Error::DomainError("period must be positive".into()));
    }
    let laps = lap_partition(f, n, config.max_laps)?;
    let g = |x: f64| iterate(f, x, n)[0] - x;
    let mut raw: Vec<f64> = Vec::new();
    let mut flats: Vec<(f64, f64)> = Vec::new();
    for lap in &laps {
        if !lap.increasing {
            raw.extend(scan_decreasing(f, *lap, n));
            continue;
        }
        let pieces = scan_increasing(f, *lap, n, config);
        // merge touching candidates into clusters; clusters touching a flat
        // piece belong to it
        let mut clusters: Vec<(f64, f64, bool)> = Vec::new();
        for p in pieces {
            let (lo, hi, flat) = match p {
                Piece::Candidate(lo, hi) => (lo, hi, false),
                Piece::Flat(lo, hi) => (lo, hi, true),
            };
            match clusters.last_mut() {
                Some(last) if lo <= last.1 => {
                    last.1 = last.1.max(hi);
                    last.2 |= flat;
                }
                _ => clusters.push((lo, hi, flat)),
            }
        }
        for (lo, hi, flat) in clusters {
            if flat {
                flats.push((lo, hi));
                continue;
            }
            let (glo, ghi) = (g(lo), g(hi));
            if glo == 0.0 {
                raw.push(lo);
            } else if ghi == 0.0 {
                raw.push(hi);
            } else if glo.signum() != ghi.signum() {
                raw.push(bisect(g, lo, hi, 0.0));
            } else {
                let x = 0.5 * (lo + hi);
                if g(x).abs() <= config.identity_tol {
                    raw.push(x);
                }
            }
        }
    }

    raw.sort_by(f64::total_cmp);
    raw.dedup_by(|b, a| (*b - *a).abs() <= 1e-11);
    flats.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut continua: Vec<Continuum> = Vec::new();
    for (lo, hi) in flats {
        match continua.last_mut() {
            Some(last) if lo <= last.hi + 1e-12 => last.hi = last.hi.max(hi),
            _ => continua.push(Continuum { lo, hi, least_period: 0 }),
        }
    }
    for c in &mut continua {
        c.least_period = least_period(f, 0.5 * (c.lo + c.hi), n, config.period_tol);
    }

    let mut roots = Vec::new();
    let mut degenerate_roots = Vec::new();
    let mut lower_period = 0;
    for x in raw {
        if continua.iter().any(|c| x >= c.lo - 1e-12 && x <= c.hi + 1e-12) {
            continue;
        }
        if least_period(f, x, n, config.period_tol) < n {
            lower_period += 1;
            continue;
        }
        let derivative = iterate(f, x, n)[1];
        let root = IntervalRoot {
            x,
            derivative,
            hyperbolic: (derivative.abs() - 1.0).abs() > config.transversality_tol,
        };
        if (derivative - 1.0).abs() > config.transversality_tol {
            roots.push(root);
        } else {
            degenerate_roots.push(root);
        }
    }
    Ok(IntervalCensus { period: n, laps: laps.len(), roots, degenerate_roots, continua, lower_period })
}

/// Rows `n,x,derivative,type` for transverse roots, then degenerate ones.
pub fn interval_census_csv(censuses: &[IntervalCensus]) -> String {
    let mut out = String::from("n,x,derivative,type\n");
    for c in censuses {
        let tagged = c
            .roots
            .iter()
            .map(|r| (r, if r.hyperbolic { "hyperbolic" } else { "neutral" }))
            .chain(c.degenerate_roots.iter().map(|r| (r, "degenerate")));
        for (r, label) in tagged {
            out.push_str(&format!("{},{},{},{label}\n", c.period, format17(r.x), format17(r.derivative)));
        }
    }
    out
}
