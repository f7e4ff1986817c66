use crate::{CertifyArgs, Common, Failure};
use orbitforge::campaign::{run_campaign, CampaignConfig};
use orbitforge::census::{census_csv, census_summary, find_periodic, CensusConfig, OrbitType};
use orbitforge::forge::{orbit_table_csv, prepare, CurveFrame, ForgeOptions, ResonantGrid};
use orbitforge::interval::{build_f0, interval_census, interval_census_csv, IntervalCensusConfig, IntervalMap};
use orbitforge::kam::{diophantine_certificate, golden_mean, solve_invariance, KamConfig, KamCurve};
use orbitforge::phase::Region;
use orbitforge::{decimal, SymplecticMap, TrigPoly};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

type Outcome = Result<(), Failure>;

fn load<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::validation("ConfigMissing", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::validation("ConfigParse", format!("{}: {e}", path.display())))
}

fn write(common: &Common, name: &str, contents: &str) -> Outcome {
    let io = |e: std::io::Error| Failure::validation("OutputError", format!("{}: {e}", common.out.display()));
    std::fs::create_dir_all(&common.out).map_err(io)?;
    std::fs::write(common.out.join(name), contents).map_err(io)
}

fn write_json<T: Serialize>(common: &Common, name: &str, value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    write(common, name, &format!("{text}\n"))
}

fn log(common: &Common, line: &str) {
    if common.verbose {
        eprintln!("{line}");
    }
}

/// Settings of `forge`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForgeJob {
    map: SymplecticMap,
    p: i64,
    n: i64,
    gamma: usize,
    /// Strength; chosen from `eps` when absent.
    #[serde(default, with = "decimal::opt")]
    t: Option<f64>,
    #[serde(default, with = "decimal::opt")]
    eps: Option<f64>,
    #[serde(default)]
    frame: CurveFrame,
    #[serde(default)]
    options: ForgeOptions,
    /// Half-height of the census band around the circle.
    #[serde(default = "default_band", with = "decimal")]
    band: f64,
    #[serde(default)]
    census: Option<CensusConfig>,
}

fn default_band() -> f64 {
    0.05
}

#[derive(Serialize)]
struct ForgeReport {
    #[serde(with = "decimal")]
    t: f64,
    #[serde(with = "decimal")]
    perturbation: f64,
    predicted_hyperbolic: usize,
    predicted_elliptic: usize,
    census_hyperbolic: usize,
    census_elliptic: usize,
    census_orbits: usize,
    seed: Option<u64>,
}

pub fn forge(path: &Path, common: &Common) -> Outcome {
    let job: ForgeJob = load(path)?;
    let grid = ResonantGrid::build(job.p, job.n, job.gamma)?;
    let plan = prepare(&job.map, &job.frame, &grid, &job.options)?;
    let t = match (job.t, job.eps) {
        (Some(t), _) => t,
        (None, Some(eps)) => plan.select_t(eps, None)?.t,
        (None, None) => return Err(Failure::validation("InvalidConfig", "forge needs `t` or `eps`")),
    };
    let result = plan.apply(t)?;
    log(common, &format!("event=forged p={} n={} gamma={} t={t:e}", job.p, job.n, job.gamma));
    let mut config = job.census.unwrap_or_else(|| CensusConfig {
        seeds_x: 4 * grid.size(),
        seeds_y: 5,
        ..CensusConfig::default()
    });
    config.windings = vec![job.p];
    config.hints = result.hints();
    let height = job.frame.eta.mean();
    let region = Region::band(height - job.band, height + job.band, job.options.space);
    let census = find_periodic(&result.map, job.n as usize, &region, &config)?;
    log(
        common,
        &format!(
            "event=census period={} hyperbolic={} elliptic={}",
            job.n,
            census.hyperbolic_points(),
            census.elliptic_points()
        ),
    );
    write(common, "forge.csv", &orbit_table_csv(&result))?;
    write(common, "census.csv", &census_csv(std::slice::from_ref(&census)))?;
    write_json(
        common,
        "forge.json",
        &ForgeReport {
            t,
            perturbation: result.perturbation,
            predicted_hyperbolic: result.count(OrbitType::Hyperbolic),
            predicted_elliptic: result.count(OrbitType::Elliptic),
            census_hyperbolic: census.hyperbolic_points(),
            census_elliptic: census.elliptic_points(),
            census_orbits: census.records.len(),
            seed: common.seed,
        },
    )
}

pub fn cascade(path: &Path, common: &Common) -> Outcome {
    let mut config: CampaignConfig = load(path)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let run = run_campaign(&config)?;
    let ledger = &run.ledger;
    for line in &ledger.events {
        log(common, line);
    }
    write(common, "ledger.json", &format!("{}\n", ledger.to_json()))?;
    write(common, "events.log", &ledger.events.iter().map(|l| format!("{l}\n")).collect::<String>())?;
    let mut orbits = csv::Writer::from_writer(Vec::new());
    orbits.write_record(["stage", "period", "winding", "x", "y", "type"]).map_err(csv_failure)?;
    for o in &run.orbits {
        orbits
            .write_record([
                o.stage.to_string(),
                o.period.to_string(),
                o.winding.to_string(),
                decimal::format17(o.point[0]),
                decimal::format17(o.point[1]),
                o.kind.label().to_string(),
            ])
            .map_err(csv_failure)?;
    }
    write(common, "orbits.csv", &into_text(orbits)?)?;
    let mut history = csv::Writer::from_writer(Vec::new());
    history.write_record(["stage", "iteration", "residual"]).map_err(csv_failure)?;
    if let Some(halt) = &ledger.halted {
        for (i, r) in halt.history.iter().enumerate() {
            history
                .write_record([halt.stage.to_string(), i.to_string(), decimal::format17(*r)])
                .map_err(csv_failure)?;
        }
    }
    write(common, "residual_history.csv", &into_text(history)?)?;
    match &ledger.halted {
        None => Ok(()),
        Some(halt) => Err(Failure::Numeric { kind: halt.kind.clone(), message: halt.message.clone() }),
    }
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure::validation("OutputError", e.to_string())
}

fn into_text(writer: csv::Writer<Vec<u8>>) -> Result<String, Failure> {
    let bytes = writer.into_inner().map_err(|e| Failure::validation("OutputError", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Settings of `census`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CensusJob {
    map: SymplecticMap,
    periods: Vec<usize>,
    region: Region,
    #[serde(default)]
    census: CensusConfig,
}

pub fn census(path: &Path, common: &Common) -> Outcome {
    let job: CensusJob = load(path)?;
    if job.periods.is_empty() {
        return Err(Failure::validation("InvalidConfig", "census needs at least one period"));
    }
    let mut results = Vec::new();
    for &n in &job.periods {
        let c = find_periodic(&job.map, n, &job.region, &job.census)?;
        log(
            common,
            &format!("event=census period={n} hyperbolic={} elliptic={}", c.hyperbolic_points(), c.elliptic_points()),
        );
        results.push(c);
    }
    write(common, "census.csv", &census_csv(&results))?;
    write_json(common, "census.json", &census_summary(&results))
}

/// Settings of `kam`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KamJob {
    map: SymplecticMap,
    #[serde(default = "golden")]
    theta: String,
    #[serde(default, with = "decimal")]
    tau: f64,
    #[serde(default = "default_qmax")]
    qmax: u64,
    /// Initial graph `y = guess(x)`.
    guess: TrigPoly,
    #[serde(default)]
    kam: KamConfig,
}

fn golden() -> String {
    "golden".into()
}

fn default_qmax() -> u64 {
    10_000
}

fn parse_theta(text: &str) -> Result<f64, Failure> {
    match text.trim() {
        "golden" => Ok(golden_mean()),
        other => decimal::parse(other).map_err(|e| Failure::validation("InvalidConfig", e)),
    }
}

pub fn kam(path: &Path, common: &Common) -> Outcome {
    let job: KamJob = load(path)?;
    let theta = parse_theta(&job.theta)?;
    let cert = diophantine_certificate(theta, job.tau, job.qmax)?;
    let curve = solve_invariance(&job.map, &cert, &KamCurve::graph(job.guess, theta), &job.kam)?;
    log(
        common,
        &format!(
            "event=kam_solved residual={:e} iterations={} min_twist={:e}",
            curve.residual, curve.iterations, curve.min_twist
        ),
    );
    write_json(common, "kam.json", &curve)
}

/// Settings of `interval`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalJob {
    #[serde(with = "decimal")]
    delta: f64,
    kmax: usize,
    /// Plateaus to perturb, each with `gamma = 2^{k+1}`.
    perturb: Vec<usize>,
    #[serde(with = "decimal")]
    budget: f64,
    #[serde(default)]
    census: IntervalCensusConfig,
}

#[derive(Serialize)]
struct IntervalReport {
    k: usize,
    period: usize,
    gamma: u32,
    #[serde(with = "decimal")]
    amplitude: f64,
    plateau_points: usize,
    transverse_points: usize,
    continua: usize,
}

pub fn interval(path: &Path, common: &Common) -> Outcome {
    let job: IntervalJob = load(path)?;
    let mut map: IntervalMap = build_f0(job.delta, job.kmax)?;
    for &k in &job.perturb {
        let gamma = 1u32.checked_shl(k as u32 + 1).filter(|g| *g > 0).ok_or_else(|| {
            Failure::validation("InvalidConfig", format!("plateau {k} is too deep"))
        })?;
        map = map.perturb_plateau(k, gamma, job.budget)?;
    }
    let mut censuses = Vec::new();
    let mut reports = Vec::new();
    for bump in map.bumps.clone() {
        let p = bump.plateau;
        let c = interval_census(&map, p.period, &job.census)?;
        log(common, &format!("event=interval_census k={} period={} roots={}", p.k, p.period, c.roots.len()));
        reports.push(IntervalReport {
            k: p.k,
            period: p.period,
            gamma: bump.gamma,
            amplitude: bump.amplitude,
            plateau_points: c.count_in(p.lo, p.hi),
            transverse_points: c.roots.len(),
            continua: c.continua.len(),
        });
        censuses.push(c);
    }
    write(common, "interval.csv", &interval_census_csv(&censuses))?;
    write_json(common, "interval.json", &reports)
}

/// Settings of `certify` when read from a file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertifyJob {
    theta: Option<String>,
    #[serde(default, with = "decimal::opt")]
    tau: Option<f64>,
    qmax: Option<u64>,
}

pub fn certify(args: &CertifyArgs, common: &Common) -> Outcome {
    let job: CertifyJob = match &args.config {
        Some(path) => load(path)?,
        None => CertifyJob::default(),
    };
    let theta_text = args.theta.clone().or(job.theta).unwrap_or_else(golden);
    let theta = parse_theta(&theta_text)?;
    let cert = diophantine_certificate(theta, args.tau.or(job.tau).unwrap_or(0.0), args.qmax.or(job.qmax).unwrap_or(10_000))?;
    log(common, &format!("event=certified c={:e} tail_constant={:e}", cert.c, cert.tail_constant));
    let text = serde_json::to_string_pretty(&cert).expect("certificate serializes");
    // a closed pipe on stdout is not a failure; the file below is the record
    let _ = writeln!(std::io::stdout(), "{text}");
    write(common, "certificate.json", &format!("{text}\n"))
}
