use super::search::Census;
use super::OrbitType;
use crate::decimal::format17;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Per-period tallies of periodic points.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusSummary {
    pub hyperbolic: usize,
    pub elliptic: usize,
    pub ambiguous: usize,
    pub degenerate_families: usize,
}

/// `{n: {hyperbolic, elliptic, ambiguous, degenerate_families}}`.
pub fn census_summary(censuses: &[Census]) -> BTreeMap<usize, CensusSummary> {
    let mut out: BTreeMap<usize, CensusSummary> = BTreeMap::new();
    for c in censuses {
        let s = out.entry(c.period).or_default();
        s.hyperbolic += c.point_count(OrbitType::Hyperbolic);
        s.elliptic += c.point_count(OrbitType::Elliptic);
        s.ambiguous += c.point_count(OrbitType::ParabolicAmbiguous);
        s.degenerate_families += c.degenerate_families.len();
    }
    out
}

/// One row per periodic point, sorted by `(n, winding, x, y)`.
pub fn census_csv(censuses: &[Census]) -> String {
    let mut rows = Vec::new();
    for c in censuses {
        for r in &c.records {
            for p in &r.points {
                rows.push((c.period, r.winding, p[0], p[1], r.kind, r.trace, r.residual));
            }
        }
    }
    rows.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.total_cmp(&b.3))
    });
    let mut out = String::from("n,type,x,y,trace,residual,winding\n");
    for (n, w, x, y, kind, trace, res) in rows {
        out.push_str(&format!(
            "{n},{},{},{},{},{},{w}\n",
            kind.label(),
            format17(x),
            format17(y),
            format17(trace),
            format17(res)
        ));
    }
    out
}
