//! Runs a scenario and writes its report files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use filtex_core::martingale_lab::{TestStat, Verdict};
use filtex_core::{Decomposition, PathEnsemble};
use serde::Serialize;

use crate::checks::{CheckOutcome, Context};
use crate::config::{parse_scenario, ConfigError, Scenario};

/// Failure that maps to exit status 2.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Io { path: PathBuf, source: std::io::Error },
    Check { name: String, source: filtex_core::Error },
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            RunError::Check { name, source } => write!(f, "check {name}: {source}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, RunError> {
    let src = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(parse_scenario(&src)?)
}

/// Everything a run produced.
#[derive(Debug)]
pub struct RunResult {
    pub outcomes: Vec<CheckOutcome>,
    pub report_json: String,
    pub summary: String,
}

impl RunResult {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn outcome(&self, name: &str) -> Option<&CheckOutcome> {
        self.outcomes.iter().find(|o| o.name == name)
    }
}

#[derive(Serialize)]
struct ScenarioEcho<'a> {
    id: &'a str,
    horizon: f64,
    steps: usize,
    n_paths: usize,
    seed: u64,
    model: &'a crate::config::ModelSpec,
    martingale: &'a filtex_core::LocalMartingale,
    mode: crate::config::ModeSpec,
    bracket: filtex_core::single_expansion::BracketMethod,
}

#[derive(Serialize)]
struct ReportRecord<'a> {
    check: &'a str,
    op: &'a str,
    n_paths: usize,
    max_abs_z: f64,
    verdict: Verdict,
    skipped: &'a [String],
    stats: &'a [TestStat],
}

#[derive(Serialize)]
struct Report<'a> {
    scenario: ScenarioEcho<'a>,
    passed: bool,
    checks: BTreeMap<&'a str, &'a CheckOutcome>,
    order: Vec<&'a str>,
    reports: Vec<ReportRecord<'a>>,
}

/// Runs every check of the scenario in the listed order.
pub fn run_checks(scenario: &Scenario) -> Result<RunResult, RunError> {
    let ctx = Context::new(scenario);
    let mut outcomes = Vec::with_capacity(scenario.checks.len());
    for name in &scenario.checks {
        let o = ctx.run(name).map_err(|source| RunError::Check { name: name.clone(), source })?;
        outcomes.push(o);
    }
    let report_json = render_report(scenario, &outcomes);
    let summary = render_summary(scenario, &outcomes);
    Ok(RunResult { outcomes, report_json, summary })
}

fn render_report(sc: &Scenario, outcomes: &[CheckOutcome]) -> String {
    let report = Report {
        scenario: ScenarioEcho {
            id: &sc.id,
            horizon: sc.grid.horizon(),
            steps: sc.grid.steps(),
            n_paths: sc.n_paths,
            seed: sc.seed,
            model: &sc.model_spec,
            martingale: &sc.martingale,
            mode: sc.mode,
            bracket: sc.bracket,
        },
        passed: outcomes.iter().all(|o| o.passed),
        checks: outcomes.iter().map(|o| (o.name.as_str(), o)).collect(),
        order: outcomes.iter().map(|o| o.name.as_str()).collect(),
        reports: outcomes
            .iter()
            .flat_map(|o| {
                o.reports.iter().map(move |(op, r)| ReportRecord {
                    check: &o.name,
                    op,
                    n_paths: r.n_paths,
                    max_abs_z: r.max_abs_z,
                    verdict: r.verdict,
                    skipped: &r.skipped,
                    stats: &r.stats,
                })
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}

fn render_summary(sc: &Scenario, outcomes: &[CheckOutcome]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "scenario {}: {} paths, K = {}, T = {}, seed {}",
        sc.id,
        sc.n_paths,
        sc.grid.steps(),
        sc.grid.horizon(),
        sc.seed
    );
    for o in outcomes {
        let _ = writeln!(s, "{:<4} {:<24} {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let _ = writeln!(s, "{} of {} checks passed", outcomes.len() - failed, outcomes.len());
    s
}

/// Output directory: `--out`, then the config's `output.dir`, then
/// `filtex-out/<id>`.
pub fn output_dir(sc: &Scenario, cli: Option<&Path>) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| sc.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("filtex-out").join(&sc.id))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), RunError> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path).map_err(io_err(&path))?;
    f.write_all(contents.as_bytes()).map_err(io_err(&path))
}

/// Runs the scenario and writes `report.json`, `summary.txt` and, when
/// requested, `paths.csv`.
pub fn run_scenario(scenario: &Scenario, dir: &Path) -> Result<RunResult, RunError> {
    let result = run_checks(scenario)?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_file(dir, "report.json", &result.report_json)?;
    write_file(dir, "summary.txt", &result.summary)?;
    if scenario.csv_paths > 0 {
        write_file(dir, "paths.csv", &paths_csv(scenario)?)?;
    }
    Ok(result)
}

/// Writes `paths.csv` and `moments.csv` without running any check.
pub fn emit_plot_data(scenario: &Scenario, dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_file(dir, "paths.csv", &paths_csv(scenario)?)?;
    write_file(dir, "moments.csv", &moments_csv(scenario)?)
}

fn sampled(sc: &Scenario, n: usize) -> Result<(PathEnsemble, Decomposition), RunError> {
    let ctx = Context::new(sc);
    ctx.sample_block(n)
        .map_err(|source| RunError::Check { name: "paths".into(), source })
}

pub const PATHS_HEADER: &str = "path,t,W,Z,drift_before,drift_after,martingale_part";

/// First `csv_paths` paths (at least one): driver, Azéma Z (of the first
/// time for families) and the decomposition, 17 significant digits.
pub fn paths_csv(sc: &Scenario) -> Result<String, RunError> {
    let (e, d) = sampled(sc, sc.csv_paths.clamp(1, sc.n_paths))?;
    let grid = *e.grid();
    let mut s = String::from(PATHS_HEADER);
    s.push('\n');
    for p in 0..e.n_paths() {
        for i in 0..grid.n_nodes() {
            let t = grid.node(i);
            let z = sc.model.azema(t, e.state(p, i));
            let _ = writeln!(
                s,
                "{p},{t:.16e},{:.16e},{z:.16e},{:.16e},{:.16e},{:.16e}",
                e.value(p, i, 0),
                d.drift_before.value(p, i),
                d.drift_after.value(p, i),
                d.martingale_part.value(p, i)
            );
        }
    }
    Ok(s)
}

pub const MOMENTS_HEADER: &str = "t,mean_original,mean_martingale_part,mean_drift,sd_martingale_part";

/// Cross-sectional moments over the first chunk of paths.
pub fn moments_csv(sc: &Scenario) -> Result<String, RunError> {
    let (e, d) = sampled(sc, sc.chunk.min(sc.n_paths))?;
    let grid = *e.grid();
    let drift = d.drift();
    let mut s = String::from(MOMENTS_HEADER);
    s.push('\n');
    for i in 0..grid.n_nodes() {
        let (mo, _) = filtex_core::numeric::mean_and_se(&d.original.column(i));
        let mp_col = d.martingale_part.column(i);
        let (mp, se) = filtex_core::numeric::mean_and_se(&mp_col);
        let (md, _) = filtex_core::numeric::mean_and_se(&drift.column(i));
        let sd = se * (mp_col.len() as f64).sqrt();
        let _ = writeln!(s, "{:.16e},{mo:.16e},{mp:.16e},{md:.16e},{sd:.16e}", grid.node(i));
    }
    Ok(s)
}
