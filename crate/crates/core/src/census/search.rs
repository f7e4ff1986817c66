use super::newton::{polish, NewtonConfig, Root};
use super::{classify, minimal_period, OrbitRecord, OrbitType, CLASSIFY_TOL};
use crate::error::{Error, Result};
use crate::phase::{lifted_distance, Region, Space, SymplecticMap};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Search settings for [`find_periodic`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CensusConfig {
    /// Seed columns along x.
    pub seeds_x: usize,
    /// Seed rows across the y band.
    pub seeds_y: usize,
    /// Candidate x-windings `p` of `f^n(z) = z + (p, 0)`.
    pub windings: Vec<i64>,
    /// Extra seeds, for example forge-predicted orbit points.
    pub hints: Vec<[f64; 2]>,
    pub newton: NewtonConfig,
    /// Two roots closer than this are the same point.
    #[serde(with = "crate::decimal")]
    pub dedupe_tol: f64,
    /// Roots whose `D(f^n) - I` has a larger condition number are degenerate.
    #[serde(with = "crate::decimal")]
    pub degenerate_condition: f64,
    #[serde(with = "crate::decimal")]
    pub tol_h: f64,
    #[serde(with = "crate::decimal")]
    pub tol_e: f64,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            seeds_x: 64,
            seeds_y: 8,
            windings: vec![0],
            hints: Vec::new(),
            newton: NewtonConfig::default(),
            dedupe_tol: 1e-8,
            degenerate_condition: 1e8,
            tol_h: CLASSIFY_TOL,
            tol_e: CLASSIFY_TOL,
        }
    }
}

/// A cluster of degenerate roots, typically a circle of periodic points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateFamily {
    pub winding: i64,
    pub roots: usize,
    #[serde(with = "crate::decimal")]
    pub y_min: f64,
    #[serde(with = "crate::decimal")]
    pub y_max: f64,
    #[serde(with = "crate::decimal")]
    pub condition: f64,
}

/// Bookkeeping of what happened to the seeds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedStats {
    pub seeds: usize,
    pub newton_runs: usize,
    pub converged: usize,
    pub non_convergent: usize,
    pub outside_region: usize,
    pub lower_period: usize,
    pub degenerate: usize,
    pub duplicates: usize,
}

/// Periodic orbits of least period `period` found in a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub period: usize,
    pub region: Region,
    pub records: Vec<OrbitRecord>,
    pub degenerate_families: Vec<DegenerateFamily>,
    pub stats: SeedStats,
}

impl Census {
    /// Number of periodic points (not orbits) of the given type.
    pub fn point_count(&self, kind: OrbitType) -> usize {
        self.records.iter().filter(|r| r.kind == kind).map(|r| r.period).sum()
    }

    pub fn orbit_count(&self, kind: OrbitType) -> usize {
        self.records.iter().filter(|r| r.kind == kind).count()
    }

    pub fn hyperbolic_points(&self) -> usize {
        self.point_count(OrbitType::Hyperbolic)
    }

    pub fn elliptic_points(&self) -> usize {
        self.point_count(OrbitType::Elliptic)
    }

    pub fn total_points(&self) -> usize {
        self.records.iter().map(|r| r.period).sum()
    }

    pub fn has_degenerate_family(&self) -> bool {
        !self.degenerate_families.is_empty()
    }
}

struct Candidate {
    winding: i64,
    root: Root,
}

fn seeds(region: &Region, config: &CensusConfig) -> Vec<[f64; 2]> {
    let nx = config.seeds_x.max(1);
    let ny = config.seeds_y.max(1);
    let mut out = Vec::with_capacity(nx * ny + config.hints.len());
    for j in 0..ny {
        let y = region.y_min + (region.y_max - region.y_min) * (j as f64 + 0.5) / ny as f64;
        for i in 0..nx {
            let x = region.x_min + (region.x_max - region.x_min) * (i as f64 + 0.5) / nx as f64;
            out.push([x, y]);
        }
    }
    out.extend(config.hints.iter().copied());
    out
}

fn normalize(p: (f64, f64), space: Space) -> [f64; 2] {
    let x = p.0.rem_euclid(1.0);
    let y = if space == Space::Torus { p.1.rem_euclid(1.0) } else { p.1 };
    // rem_euclid can return exactly 1.0 for tiny negative inputs
    let fix = |v: f64| if v >= 1.0 { 0.0 } else { v };
    [fix(x), if space == Space::Torus { fix(y) } else { y }]
}

fn orbit_points(map: &SymplecticMap, root: &Root, n: usize, space: Space) -> Result<Vec<[f64; 2]>> {
    let mut pts = Vec::with_capacity(n);
    let (mut x, mut y) = (root.x, root.y);
    for _ in 0..n {
        pts.push(normalize((x, y), space));
        (x, y) = map.apply_lift(x, y)?;
    }
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    Ok(pts)
}

/// Spatial hash over normalized points with cell size `tol`.
struct PointIndex {
    tol: f64,
    space: Space,
    cells: HashMap<(i64, i64), Vec<[f64; 2]>>,
}

impl PointIndex {
    fn new(tol: f64, space: Space) -> Self {
        PointIndex { tol, space, cells: HashMap::new() }
    }

    fn key(&self, p: [f64; 2]) -> (i64, i64) {
        ((p[0] / self.tol).floor() as i64, (p[1] / self.tol).floor() as i64)
    }

    fn wrap(&self, k: i64, axis_periodic: bool) -> i64 {
        if axis_periodic {
            let cells = (1.0 / self.tol).ceil() as i64;
            k.rem_euclid(cells)
        } else {
            k
        }
    }

    fn contains_near(&self, p: [f64; 2]) -> bool {
        let (kx, ky) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let key = (self.wrap(kx + dx, true), self.wrap(ky + dy, self.space == Space::Torus));
                if let Some(list) = self.cells.get(&key) {
                    if list
                        .iter()
                        .any(|q| lifted_distance((p[0], p[1]), (q[0], q[1]), self.space) <= self.tol)
                    {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn insert(&mut self, p: [f64; 2]) {
        let (kx, ky) = self.key(p);
        let key = (self.wrap(kx, true), self.wrap(ky, self.space == Space::Torus));
        self.cells.entry(key).or_default().push(p);
    }
}

/// Groups degenerate roots into families by single-linkage within `link`.
fn cluster(roots: &[(i64, [f64; 2], f64)], link: f64, space: Space) -> Vec<DegenerateFamily> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = i;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for a in 0..n {
        for b in a + 1..n {
            if roots[a].0 == roots[b].0
                && lifted_distance((roots[a].1[0], roots[a].1[1]), (roots[b].1[0], roots[b].1[1]), space)
                    <= link
            {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, DegenerateFamily> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let (w, p, c) = roots[i];
        let fam = groups.entry(r).or_insert(DegenerateFamily {
            winding: w,
            roots: 0,
            y_min: p[1],
            y_max: p[1],
            condition: c,
        });
        fam.roots += 1;
        fam.y_min = fam.y_min.min(p[1]);
        fam.y_max = fam.y_max.max(p[1]);
        fam.condition = fam.condition.min(c);
    }
    groups.into_values().collect()
}

/// Finds periodic orbits of least period `n` with a representative in `region`.
///
/// Non-convergent seeds are dropped and tallied, never reported as errors.
pub fn find_periodic(
    map: &SymplecticMap,
    n: usize,
    region: &Region,
    config: &CensusConfig,
) -> Result<Census> {
    if n == 0 {
        return Err(Error::DomainError("period must be positive".into()));
    }
    let space = region.space;
    let seeds = seeds(region, config);
    let mut stats = SeedStats { seeds: seeds.len(), ..SeedStats::default() };
    let mut found: Vec<Candidate> = Vec::new();
    for &winding in &config.windings {
        for seed in &seeds {
            stats.newton_runs += 1;
            match polish(map, *seed, n, winding, space, &config.newton) {
                Ok(root) => {
                    stats.converged += 1;
                    found.push(Candidate { winding, root });
                }
                Err(Error::NewtonDiverged { .. }) => stats.non_convergent += 1,
                Err(e) => return Err(e),
            }
        }
    }
    found.sort_by(|a, b| {
        a.winding
            .cmp(&b.winding)
            .then(a.root.x.total_cmp(&b.root.x))
            .then(a.root.y.total_cmp(&b.root.y))
    });

    let spacing_x = (region.x_max - region.x_min) / config.seeds_x.max(1) as f64;
    let spacing_y = (region.y_max - region.y_min) / config.seeds_y.max(1) as f64;
    let mut index = PointIndex::new(config.dedupe_tol, space);
    let mut degenerate = Vec::new();
    let mut records = Vec::new();
    for cand in found {
        let root = cand.root;
        let cond = root.monodromy.minus_identity().condition();
        if !(cond <= config.degenerate_condition) {
            stats.degenerate += 1;
            degenerate.push((cand.winding, normalize((root.x, root.y), space), cond));
            continue;
        }
        let least = minimal_period(map, [root.x, root.y], n, space, 1e-9)?;
        if least < n {
            stats.lower_period += 1;
            continue;
        }
        let points = orbit_points(map, &root, n, space)?;
        if points.iter().any(|p| index.contains_near(*p)) {
            stats.duplicates += 1;
            continue;
        }
        let rep = points[0];
        if !region.contains_y(rep[1]) {
            stats.outside_region += 1;
            continue;
        }
        for p in &points {
            index.insert(*p);
        }
        let trace = root.monodromy.trace();
        // fresh residual from the representative
        let (disp, _) = map.orbit_displacement(rep[0], rep[1], n)?;
        let dy = if space == Space::Torus { disp[1] - disp[1].round() } else { disp[1] };
        let residual = (disp[0] - cand.winding as f64).hypot(dy);
        let kind = classify(trace, config.tol_h, config.tol_e);
        records.push(OrbitRecord {
            period: n,
            winding: cand.winding,
            trace,
            kind,
            residual,
            nondegenerate: kind != OrbitType::ParabolicAmbiguous,
            points,
            monodromy: Some(root.monodromy),
        });
    }
    records.sort_by(|a, b| {
        a.winding
            .cmp(&b.winding)
            .then(a.points[0][0].total_cmp(&b.points[0][0]))
            .then(a.points[0][1].total_cmp(&b.points[0][1]))
    });
    let link = 2.5 * spacing_x.hypot(spacing_y);
    let degenerate_families = cluster(&degenerate, link, space);
    Ok(Census { period: n, region: *region, records, degenerate_families, stats })
}
