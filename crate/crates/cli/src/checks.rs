//! Registry of scenario checks.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use filtex_core::grid_paths::{path_rng, simulate_brownian_block, GridProcess, PathEnsemble, StreamDomain};
use filtex_core::martingale_lab::{
    chunks, density_martingale_regression, driver_features,
    family_features, progressive_features, projection_lemma_process,
    q_integral_max, quarter_pairs, quarter_stride, shrinkage_check, shrinkage_negative_control,
    state_lattice, Feature, LemmaIntegrand, MartingaleAccumulator, TestReport, Verdict, Z_PASS,
};
use filtex_core::multi_expansion::{
    active_windows, gluing_residual, multi_drift, n_process, snapped_nodes, telescope_residual,
    z_subset, z_subset_quadrature, Subset,
};
use filtex_core::numeric::{mean_and_se, norm_pdf, norm_sf, GaussLegendre};
use filtex_core::single_expansion::{decompose_single, Decomposition, DriftMode, LocalMartingale, Profile};
use filtex_core::time_models::{
    sample_family, sample_times, z_martingale_part, BridgeLognormal, DriverFamily, MarkLaw,
    RandomTimeModel, SingleTimeModel,
};
use filtex_core::{Error, Result};
use rand::Rng;
use serde::Serialize;

use crate::config::{ModeSpec, ModelSpec, Scenario};

/// Which models a check can run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requirement {
    Any,
    SingleTime,
    /// Any bridge-based model; the check reads its anchor.
    BridgeAnchor,
    MarkedBridge,
    MarkedFamily,
}

pub struct CheckSpec {
    pub name: &'static str,
    pub summary: &'static str,
    pub requirement: Requirement,
    run: fn(&Context) -> Result<CheckOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip)]
    pub reports: Vec<(String, TestReport)>,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
            metrics: BTreeMap::new(),
            reports: Vec::new(),
        }
    }

    fn metric(mut self, key: &str, value: f64) -> Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    fn report(mut self, op: &str, report: TestReport) -> Self {
        self.reports.push((op.to_string(), report));
        self
    }
}

/// Alphabetized registry.
pub static REGISTRY: &[CheckSpec] = &[
    CheckSpec {
        name: "additivity",
        summary: "M = martingale part + drift before τ + drift after τ at every node of every path",
        requirement: Requirement::Any,
        run: additivity,
    },
    CheckSpec {
        name: "density-martingale",
        summary: "p_t(u) is a martingale: increments regress to zero on (1, W_s) for five u",
        requirement: Requirement::BridgeAnchor,
        run: density_martingale,
    },
    CheckSpec {
        name: "density-normalization",
        summary: "∫ p_t(u) η(du) = 1 and Z_t = ∫_(t,∞) p_t(u) η(du) on a 20×20 (t, W_t) lattice",
        requirement: Requirement::BridgeAnchor,
        run: density_normalization,
    },
    CheckSpec {
        name: "gluing",
        summary: "window processes stopped at T and at (σ_I∨T)∧(ρ_I∨c) coincide",
        requirement: Requirement::Any,
        run: gluing,
    },
    CheckSpec {
        name: "marked-coincidence",
        summary: "(τ, X) and τ decompositions agree before τ, and everywhere for uninformative marks",
        requirement: Requirement::MarkedBridge,
        run: marked_coincidence,
    },
    CheckSpec {
        name: "multi-drift-n2",
        summary: "two independent-driver times: W¹ minus the windowed drift is a martingale",
        requirement: Requirement::BridgeAnchor,
        run: multi_drift_n2,
    },
    CheckSpec {
        name: "multi-drift-n3",
        summary: "three independent-driver times: W¹ minus the windowed drift is a martingale",
        requirement: Requirement::BridgeAnchor,
        run: multi_drift_n3,
    },
    CheckSpec {
        name: "multi-oracle",
        summary: "windowed drift increments match the bridge slope and d⟨M,Z^I⟩/Z^I oracles",
        requirement: Requirement::BridgeAnchor,
        run: multi_oracle,
    },
    CheckSpec {
        name: "multi-reduction",
        summary: "the multi-time drift with one time equals the single-time decomposition exactly",
        requirement: Requirement::BridgeAnchor,
        run: multi_reduction,
    },
    CheckSpec {
        name: "n-process",
        summary: "N_t = Σ X_i 1{τ_i ≤ t} has mean zero at the horizon for symmetric marks",
        requirement: Requirement::MarkedFamily,
        run: n_process_check,
    },
    CheckSpec {
        name: "null-drift",
        summary: "the drift vanishes identically and M passes the expanded martingale test",
        requirement: Requirement::Any,
        run: null_drift,
    },
    CheckSpec {
        name: "projection-lemma",
        summary: "E(∫_0^t a ds | G_t) − ∫_0^t E(a_s | G_s) ds is a G-martingale",
        requirement: Requirement::BridgeAnchor,
        run: projection_lemma,
    },
    CheckSpec {
        name: "q-integral",
        summary: "∫_0^∞ q_t(u) du = 0 for the Lebesgue density on the node × state lattice",
        requirement: Requirement::BridgeAnchor,
        run: q_integral,
    },
    CheckSpec {
        name: "shrinkage",
        summary: "∫ (1/Z) (∫_s^∞ q_s(u) du) m_s ds equals ∫ d⟨M,Z⟩/Z before τ; Jacod drift does not",
        requirement: Requirement::BridgeAnchor,
        run: shrinkage,
    },
    CheckSpec {
        name: "single-decomposition",
        summary: "M minus the Jeulin–Yor and Jacod drifts passes the expanded martingale test",
        requirement: Requirement::SingleTime,
        run: single_decomposition,
    },
    CheckSpec {
        name: "telescope",
        summary: "Σ_I 1{σ_I≤ρ_I}(M_{t∧ρ_I} − M_{t∧σ_I}) = M_t − M_0 on 1000 random configurations",
        requirement: Requirement::Any,
        run: telescope,
    },
    CheckSpec {
        name: "uncorrected-martingale",
        summary: "M itself is tested in the expanded filtration (fails when τ carries information)",
        requirement: Requirement::Any,
        run: uncorrected_martingale,
    },
    CheckSpec {
        name: "z-martingale",
        summary: "the martingale part μ of Z has driver-measurable increments of mean zero",
        requirement: Requirement::Any,
        run: z_martingale,
    },
    CheckSpec {
        name: "z-subset",
        summary: "Z^I in closed form matches tensor quadrature; Z^∅ is the Azéma Z of min τ_i",
        requirement: Requirement::BridgeAnchor,
        run: z_subset_check,
    },
];

pub fn find(name: &str) -> Option<&'static CheckSpec> {
    REGISTRY.iter().find(|c| c.name == name)
}

/// Shared state for the checks of one scenario.
pub struct Context<'a> {
    pub scenario: &'a Scenario,
    streamed: OnceLock<Result<Streamed>>,
}

impl<'a> Context<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Self {
            scenario,
            streamed: OnceLock::new(),
        }
    }

    pub fn run(&self, name: &str) -> Result<CheckOutcome> {
        let spec = find(name).ok_or_else(|| Error::InvalidArgument(format!("unknown check {name}")))?;
        (spec.run)(self)
    }

    fn stride(&self) -> usize {
        quarter_stride(&self.scenario.grid)
    }

    fn pairs(&self) -> Vec<(f64, f64)> {
        quarter_pairs(self.scenario.grid.horizon())
    }

    fn block(&self, dim: usize, offset: u64, len: usize) -> Result<PathEnsemble> {
        simulate_brownian_block(self.scenario.grid, dim, len, self.scenario.seed, offset)
    }

    fn single(&self) -> Result<SingleTimeModel> {
        match self.scenario.model {
            RandomTimeModel::Single(m) => Ok(m),
            RandomTimeModel::Family(_) => Err(Error::Unsupported("a single-time check on a family")),
        }
    }

    fn bridge(&self) -> Result<BridgeLognormal> {
        match self.scenario.model {
            RandomTimeModel::Single(m) => m.bridge().copied().ok_or(Error::Unsupported("bridge anchor")),
            RandomTimeModel::Family(f) => Ok(*f.component()),
        }
    }

    fn family(&self, n: usize, marked: bool) -> Result<DriverFamily> {
        DriverFamily::new(n, self.bridge()?.anchor(), marked)
    }

    fn streamed(&self) -> Result<&Streamed> {
        self.streamed
            .get_or_init(|| stream_scenario(self))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Decomposition of the scenario's martingale on one block.
    fn decompose_block(&self, e: &PathEnsemble) -> Result<(Decomposition, Vec<Feature>)> {
        let sc = self.scenario;
        let stride = self.stride();
        match sc.model {
            RandomTimeModel::Single(model) => {
                let samples = sample_times(&model, e, sc.seed)?;
                let marked = sc.mode == ModeSpec::Marked;
                let mode = if marked { DriftMode::Marked } else { DriftMode::Plain };
                let d = decompose_single(&sc.martingale, &model, e, &samples, mode, sc.bracket)?;
                let f = progressive_features(e, &model, &samples, marked, stride)?;
                Ok((d, f))
            }
            RandomTimeModel::Family(fam) => {
                let samples = sample_family(&fam, e, sc.seed)?;
                let d = multi_drift(&sc.martingale, &fam, e, &samples)?;
                let f = family_features(e, &fam, &samples, stride)?;
                Ok((d, f))
            }
        }
    }
}

/// Whole-ensemble summaries of the scenario decomposition.
struct Streamed {
    corrected: TestReport,
    uncorrected: TestReport,
    additivity: f64,
    localized: bool,
    truncation: f64,
    drift_max_abs: f64,
}

fn stream_scenario(ctx: &Context) -> Result<Streamed> {
    let sc = ctx.scenario;
    let stride = ctx.stride();
    let pairs = ctx.pairs();
    let mut corrected = MartingaleAccumulator::new(&pairs);
    let mut uncorrected = MartingaleAccumulator::new(&pairs);
    let (mut additivity, mut drift_max_abs, mut truncated) = (0.0f64, 0.0f64, 0usize);
    let mut localized = true;
    for (off, len) in chunks(sc.n_paths, sc.chunk) {
        let e = ctx.block(sc.model.driver_dim(), off, len)?;
        let (d, f) = ctx.decompose_block(&e)?;
        corrected.push(&d.martingale_part.restrict(stride)?, &f)?;
        uncorrected.push(&d.original.restrict(stride)?, &f)?;
        additivity = additivity.max(d.additivity_residual());
        drift_max_abs = drift_max_abs.max(
            d.drift_before
                .values()
                .iter()
                .chain(d.drift_after.values())
                .fold(0.0f64, |a, v| a.max(v.abs())),
        );
        truncated += d.truncated.iter().filter(|t| **t).count();
        if d.n_times == 1 {
            localized &= d.localization_holds();
        }
    }
    Ok(Streamed {
        corrected: corrected.finish(),
        uncorrected: uncorrected.finish(),
        additivity,
        localized,
        truncation: truncated as f64 / sc.n_paths as f64,
        drift_max_abs,
    })
}

/// Tolerance for sums that agree up to one rounding per node.
const ROUNDING_TOL: f64 = 1e-12;
/// Tolerance for closed form against quadrature.
const QUADRATURE_TOL: f64 = 1e-6;

fn verdict_detail(r: &TestReport) -> String {
    format!("max |z| = {:.3} ({:?}, {} paths)", r.max_abs_z, r.verdict, r.n_paths)
}

fn additivity(ctx: &Context) -> Result<CheckOutcome> {
    let s = ctx.streamed()?;
    let passed = s.additivity <= ROUNDING_TOL && s.localized;
    Ok(CheckOutcome::new(
        "additivity",
        passed,
        format!("max residual {:.3e}; localization {}", s.additivity, if s.localized { "holds" } else { "violated" }),
    )
    .metric("max_residual", s.additivity))
}

fn density_martingale(ctx: &Context) -> Result<CheckOutcome> {
    let sc = ctx.scenario;
    let bridge = ctx.bridge()?;
    let stride = ctx.stride();
    let mut parts = Vec::new();
    for (off, len) in chunks(sc.n_paths, sc.chunk) {
        parts.push(ctx.block(1, off, len)?.restrict(stride)?);
    }
    let coarse = PathEnsemble::concat(&parts)?;
    let us: Vec<f64> = [-1.5f64, -0.5, 0.0, 0.5, 1.5].iter().map(|x| x.exp()).collect();
    let r = density_martingale_regression(&bridge, &coarse, &us, &ctx.pairs())?;
    Ok(CheckOutcome::new("density-martingale", r.verdict == Verdict::Pass, verdict_detail(&r))
        .metric("max_abs_z", r.max_abs_z)
        .report("density_martingale_regression", r))
}

fn density_normalization(ctx: &Context) -> Result<CheckOutcome> {
    let bridge = ctx.bridge()?;
    let h = ctx.scenario.grid.horizon();
    let (mut norm, mut tail) = (0.0f64, 0.0f64);
    for i in 0..20 {
        let t = h * i as f64 / 19.0;
        for w in state_lattice(20) {
            norm = norm.max((bridge.eta_mass_above(t, w, 0.0) - 1.0).abs());
            tail = tail.max((bridge.azema(t, w) - bridge.eta_mass_above(t, w, t)).abs());
        }
    }
    Ok(CheckOutcome::new(
        "density-normalization",
        norm < QUADRATURE_TOL && tail < QUADRATURE_TOL,
        format!("max |∫p dη − 1| = {norm:.3e}; max |Z − tail| = {tail:.3e}"),
    )
    .metric("normalization_error", norm)
    .metric("tail_error", tail))
}

/// Paths used by checks whose cost is quadratic in the grid size.
const SMALL_BLOCK: usize = 200;

fn gluing(ctx: &Context) -> Result<CheckOutcome> {
    let sc = ctx.scenario;
    let len = sc.n_paths.min(SMALL_BLOCK);
    let e = ctx.block(sc.model.driver_dim(), 0, len)?;
    let (d, _) = ctx.decompose_block(&e)?;
    let c = sc.grid.horizon() / 2.0;
    let mut worst = 0.0f64;
    for x in [&d.martingale_part, &d.drift_before, &d.drift_after] {
        worst = worst.max(gluing_residual(x, &d.taus, d.n_times, c)?);
    }
    Ok(CheckOutcome::new("gluing", worst == 0.0, format!("max residual {worst:.3e} over {len} paths"))
        .metric("max_residual", worst))
}

fn marked_coincidence(ctx: &Context) -> Result<CheckOutcome> {
    let sc = ctx.scenario;
    let model = ctx.single()?;
    let uninformative = matches!(
        sc.model_spec,
        ModelSpec::MarkedBridge { mark: MarkLaw::Rademacher | MarkLaw::AnchorSign, .. }
    );
    let (mut pre_gap, mut differing) = (0.0f64, 0usize);
    for (off, len) in chunks(sc.n_paths, sc.chunk) {
        let e = ctx.block(1, off, len)?;
        let s = sample_times(&model, &e, sc.seed)?;
        let plain = decompose_single(&sc.martingale, &model, &e, &s, DriftMode::Plain, sc.bracket)?;
        let marked = decompose_single(&sc.martingale, &model, &e, &s, DriftMode::Marked, sc.bracket)?;
        for p in 0..len {
            let k = sc.grid.snap_up(s[p].tau).min(sc.grid.steps());
            let (a, b) = (plain.martingale_part.path(p), marked.martingale_part.path(p));
            for j in 0..=k {
                pre_gap = pre_gap.max((a[j] - b[j]).abs());
            }
            if a != b {
                differing += 1;
            }
        }
    }
    let passed = pre_gap == 0.0 && (!uninformative || differing == 0);
    Ok(CheckOutcome::new(
        "marked-coincidence",
        passed,
        format!(
            "max gap before τ {pre_gap:.3e}; {differing} of {} paths differ after τ{}",
            sc.n_paths,
            if uninformative { " (mark carries no information)" } else { "" }
        ),
    )
    .metric("pre_tau_gap", pre_gap)
    .metric("paths_differing", differing as f64))
}

fn multi_drift_for(ctx: &Context, n: usize, name: &str) -> Result<CheckOutcome> {
    let sc = ctx.scenario;
    let fam = ctx.family(n, false)?;
    let stride = ctx.stride();
    let pairs = ctx.pairs();
    let m = if sc.martingale.dim() <= n { sc.martingale.clone() } else { LocalMartingale::brownian(0) };
    let mut corrected = MartingaleAccumulator::new(&pairs);
    let mut uncorrected = MartingaleAccumulator::new(&pairs);
    let mut additivity = 0.0f64;
    for (off, len) in chunks(sc.n_paths, sc.chunk) {
        let e = ctx.block(n, off, len)?;
        let s = sample_family(&fam, &e, sc.seed)?;
        let d = multi_drift(&m, &fam, &e, &s)?;
        let f = family_features(&e, &fam, &s, stride)?;
        corrected.push(&d.martingale_part.restrict(stride)?, &f)?;
        uncorrected.push(&d.original.restrict(stride)?, &f)?;
        additivity = additivity.max(d.additivity_residual());
    }
    let (c, u) = (corrected.finish(), uncorrected.finish());
    let power = u.max_abs_z_ending_at(sc.grid.horizon());
    Ok(CheckOutcome::new(
        name,
        c.verdict == Verdict::Pass && additivity <= ROUNDING_TOL,
        format!("corrected {}; uncorrected max |z| at horizon {power:.3}", verdict_detail(&c)),
    )
    .metric("corrected_max_abs_z", c.max_abs_z)
    .metric("uncorrected_horizon_abs_z", power)
    .metric("additivity", additivity)
    .report("martingale_test:corrected", c)
    .report("martingale_test:uncorrected", u))
}

fn multi_drift_n2(ctx: &Context) -> Result<CheckOutcome> {
    multi_drift_for(ctx, 2, "multi-drift-n2")
}

fn multi_drift_n3(ctx: &Context) -> Result<CheckOutcome> {
    multi_drift_for(ctx, 3, "multi-drift-n3")
}

/// Family size used by the family oracle checks.
fn oracle_family_size(ctx: &Context) -> usize {
    match ctx.scenario.model_spec {
        ModelSpec::IndependentDriverFamily { n, .. } => n.min(3),
        _ => 2,
    }
}

/// Worst deviation of windowed drift increments from independent oracles.
pub fn multi_oracle_error(
    m: &LocalMartingale,
    fam: &DriverFamily,
    e: &PathEnsemble,
    d: &Decomposition,
) -> (f64, f64) {
    let grid = *e.grid();
    let dt = grid.dt();
    let n = fam.n_times();
    let a0 = fam.anchor();
    let h = 1e-5;
    let (mut jy_err, mut jacod_err) = (0.0f64, 0.0f64);
    for p in 0..e.n_paths() {
        let taus = d.tau(p);
        let nodes = snapped_nodes(&grid, taus);
        let windows = active_windows(&nodes);
        for i in 0..grid.steps() {
            let t = grid.node(i);
            let state = e.state(p, i);
            let subset = windows
                .iter()
                .find(|w| w.start <= i && i < w.end)
                .map(|w| w.subset);
            let Some(subset) = subset else { continue };
            let mut jy = 0.0;
            if subset != Subset::full(n) {
                let z = fam.z_subset(t, state, subset);
                for c in 0..n {
                    let mut up = state.to_vec();
                    let mut dn = state.to_vec();
                    up[c] += h;
                    dn[c] -= h;
                    let dz = (fam.z_subset(t, &up, subset) - fam.z_subset(t, &dn, subset)) / (2.0 * h);
                    jy += m.vol(c, t) * dz / z * dt;
                }
            }
            let mut jacod = 0.0;
            for c in subset.indices() {
                jacod += (taus[c].ln() - state[c]) / (a0 - t) * m.vol(c, t) * dt;
            }
            let db = d.drift_before.value(p, i + 1) - d.drift_before.value(p, i);
            let da = d.drift_after.value(p, i + 1) - d.drift_after.value(p, i);
            if !d.truncated[p] {
                jy_err = jy_err.max((db - jy).abs());
                jacod_err = jacod_err.max((da - jacod).abs());
            }
        }
    }
    (jy_err, jacod_err)
}

fn multi_oracle(ctx: &Context) -> Result<CheckOutcome> {
    let sc = ctx.scenario;
    let n = oracle_family_size(ctx);
    let fam = ctx.family(n, false)?;
    let len = sc.n_paths.min(2000);
    let e = ctx.block(n, 0, len)?;
    let s = sample_family(&fam, &e, sc.seed)?;
    let m = LocalMartingale::brownian(0);
    let d = multi_drift(&m, &fam, &e, &s)?;
    let (jy, jacod) = multi_oracle_error(&m, &fam, &e, &d);
    let tol = 5.0 * sc.grid.dt();
    Ok(CheckOutcome::new(
        "multi-oracle",
        jy <= tol && jacod <= tol,
        format!("n = {n}: max JY error {jy:.3e}, max Jacod error {jacod:.3e}, tolerance {tol:.3e}"),
    )
    .metric("jy_error", jy)
    .metric("jacod_error", jacod)
    .metric("tolerance", tol))
}

fn multi_reduction(ctx: &Context) -> Result<CheckOutcome> {
    let sc = ctx.scenario;
    let fam = ctx.family(1, false)?;
    let single = SingleTimeModel::BridgeLognormal(*fam.component());
    let m = LocalMartingale { weights: vec![sc.martingale.weights[0]], profile: sc.martingale.profile };
    let mut mismatched = 0usize;
    for (off, len) in chunks(sc.n_paths, sc.chunk) {
        let e = ctx.block(1, off, len)?;
        let fs = sample_family(&fam, &e, sc.seed)?;
        let ss = sample_times(&single, &e, sc.seed)?;
        let multi = multi_drift(&m, &fam, &e, &fs)?;
        let one = decompose_single(&m, &single, &e, &ss, DriftMode::Plain, Default::default())?;
        for p in 0..len {
            if multi.martingale_part.path(p) != one.martingale_part.path(p)
                || multi.drift_before.path(p) != one.drift_before.path(p)
                || multi.drift_after.path(p) != one.drift_after.path(p)
            {
                mismatched += 1;
            }
        }
    }
    Ok(CheckOutcome::new(
        "multi-reduction",
        mismatched == 0,
        format!("{mismatched} of {} paths differ", sc.n_paths),
    )
    .metric("paths_differing", mismatched as f64))
}

fn n_process_check(ctx: &Context) -> Result<CheckOutcome> {
    let sc = ctx.scenario;
    let RandomTimeModel::Family(fam) = sc.model else {
        return Err(Error::Unsupported("n-process outside a family"));
    };
    let mut terminal = Vec::with_capacity(sc.n_paths);
    for (off, len) in chunks(sc.n_paths, sc.chunk) {
        let e = ctx.block(fam.driver_dim(), off, len)?;
        let s = sample_family(&fam, &e, sc.seed)?;
        terminal.extend(n_process(&sc.grid, &s)?.terminal());
    }
    let (mean, se) = mean_and_se(&terminal);
    let z = if se > 0.0 { mean / se } else { 0.0 };
    Ok(CheckOutcome::new(
        "n-process",
        z.abs() < Z_PASS,
        format!("mean N_T = {mean:.4e} (z = {z:.3})"),
    )
    .metric("mean", mean)
    .metric("z", z))
}

fn null_drift(ctx: &Context) -> Result<CheckOutcome> {
    let s = ctx.streamed()?;
    let passed = s.drift_max_abs == 0.0 && s.corrected.verdict == Verdict::Pass;
    Ok(CheckOutcome::new(
        "null-drift",
        passed,
        format!("max |drift| = {:.3e}; {}", s.drift_max_abs, verdict_detail(&s.corrected)),
    )
    .metric("max_abs_drift", s.drift_max_abs)
    .metric("max_abs_z", s.corrected.max_abs_z)
    .report("martingale_test:corrected", s.corrected.clone()))
}

fn projection_lemma(ctx: &Context) -> Result<CheckOutcome> {
    let sc = ctx.scenario;
    let bridge = ctx.bridge()?;
    let model = SingleTimeModel::BridgeLognormal(bridge);
    let stride = ctx.stride();
    let mut acc = MartingaleAccumulator::new(&ctx.pairs());
    let mut trivial = 0.0f64;
    for (k, (off, len)) in chunks(sc.n_paths, sc.chunk).enumerate() {
        let e = ctx.block(1, off, len)?;
        let s = sample_times(&model, &e, sc.seed)?;
        if k == 0 {
            for a in [LemmaIntegrand::Constant { value: 1.0 }, LemmaIntegrand::SlopeAfterTau] {
                let m = projection_lemma_process(a, &bridge, &e, &s)?;
                trivial = trivial.max(m.values().iter().fold(0.0f64, |x, v| x.max(v.abs())));
            }
        }
        let m = projection_lemma_process(LemmaIntegrand::SlopeBeforeTau, &bridge, &e, &s)?;
        let f = progressive_features(&e, &model, &s, false, stride)?;
        acc.push(&m.restrict(stride)?, &f)?;
    }
    let r = acc.finish();
    Ok(CheckOutcome::new(
        "projection-lemma",
        r.verdict == Verdict::Pass && trivial == 0.0,
        format!("{}; trivial integrands max |M| = {trivial:.1e}", verdict_detail(&r)),
    )
    .metric("max_abs_z", r.max_abs_z)
    .metric("trivial_max_abs", trivial)
    .report("projection_lemma_process", r))
}

fn q_integral(ctx: &Context) -> Result<CheckOutcome> {
    let bridge = ctx.bridge()?;
    let q = q_integral_max(&bridge, &ctx.scenario.grid.nodes(), &state_lattice(21))?;
    Ok(CheckOutcome::new("q-integral", q < QUADRATURE_TOL, format!("max |∫q du| = {q:.3e}"))
        .metric("q_integral_max", q))
}

/// Paths used by the quadrature-heavy shrinkage check.
const SHRINKAGE_PATHS: usize = 2000;
/// The negative control must separate the drifts by this much ...
const NEGATIVE_GAP: f64 = 1e-2;
/// ... on at least this fraction of paths.
const NEGATIVE_FRACTION: f64 = 0.99;

/// Integrands checked by the shrinkage identity in addition to the scenario's.
const SHRINKAGE_PROFILES: [Profile; 2] = [Profile::UNIT, Profile { level: 1.0, slope: 0.5 }];

fn shrinkage(ctx: &Context) -> Result<CheckOutcome> {
    let sc = ctx.scenario;
    let bridge = ctx.bridge()?;
    let model = SingleTimeModel::BridgeLognormal(bridge);
    let len = sc.n_paths.min(SHRINKAGE_PATHS);
    let e = ctx.block(1, 0, len)?;
    let s = sample_times(&model, &e, sc.seed)?;
    let mut profiles = SHRINKAGE_PROFILES.to_vec();
    if !profiles.contains(&sc.martingale.profile) {
        profiles.push(sc.martingale.profile);
    }
    let (mut sup, mut q, mut frac) = (0.0f64, 0.0f64, 1.0f64);
    for profile in profiles {
        let r = shrinkage_check(&bridge, profile, &e, &s)?;
        let neg = shrinkage_negative_control(&bridge, profile, &e, &s)?;
        sup = sup.max(r.sup_discrepancy);
        q = q.max(r.q_integral_max);
        frac = frac.min(neg.iter().filter(|g| **g > NEGATIVE_GAP).count() as f64 / len as f64);
    }
    let passed = sup < QUADRATURE_TOL && q < QUADRATURE_TOL && frac >= NEGATIVE_FRACTION;
    Ok(CheckOutcome::new(
        "shrinkage",
        passed,
        format!(
            "sup discrepancy {sup:.3e}; max |∫q du| {q:.3e}; negative control separated on {:.2}% of {len} paths",
            100.0 * frac
        ),
    )
    .metric("sup_discrepancy", sup)
    .metric("q_integral_max", q)
    .metric("negative_control_fraction", frac))
}

fn single_decomposition(ctx: &Context) -> Result<CheckOutcome> {
    let s = ctx.streamed()?;
    let passed = s.corrected.verdict == Verdict::Pass && s.additivity <= ROUNDING_TOL && s.localized;
    Ok(CheckOutcome::new(
        "single-decomposition",
        passed,
        format!(
            "corrected {}; uncorrected max |z| at horizon {:.3}; truncated {:.2e}",
            verdict_detail(&s.corrected),
            s.uncorrected.max_abs_z_ending_at(ctx.scenario.grid.horizon()),
            s.truncation
        ),
    )
    .metric("corrected_max_abs_z", s.corrected.max_abs_z)
    .metric("uncorrected_horizon_abs_z", s.uncorrected.max_abs_z_ending_at(ctx.scenario.grid.horizon()))
    .metric("truncation_fraction", s.truncation)
    .report("martingale_test:corrected", s.corrected.clone()))
}

/// Random configurations for the telescoping identity.
const TELESCOPE_CONFIGS: usize = 1000;

/// Worst telescoping residual over random configurations with `1..=5`
/// times placed on grid nodes.
pub fn telescope_sweep(grid: filtex_core::TimeGrid, seed: u64, configs: usize) -> Result<f64> {
    let e = simulate_brownian_block(grid, 1, configs, seed, 0)?;
    let w = e.component(0)?;
    let mut rng = path_rng(seed, StreamDomain::Auxiliary(1), 0);
    let mut worst = 0.0f64;
    for p in 0..configs {
        let n = rng.random_range(1..=5usize);
        let taus: Vec<f64> = (0..n).map(|_| grid.node(rng.random_range(0..=grid.steps()))).collect();
        let row = GridProcess::new(grid, 1, w.path(p).to_vec())?;
        worst = worst.max(telescope_residual(&row, &taus, n)?);
    }
    Ok(worst)
}

fn telescope(ctx: &Context) -> Result<CheckOutcome> {
    let worst = telescope_sweep(ctx.scenario.grid, ctx.scenario.seed, TELESCOPE_CONFIGS)?;
    Ok(CheckOutcome::new(
        "telescope",
        worst <= ROUNDING_TOL,
        format!("max residual {worst:.3e} over {TELESCOPE_CONFIGS} configurations"),
    )
    .metric("max_residual", worst)
    .metric("n_configs", TELESCOPE_CONFIGS as f64))
}

fn uncorrected_martingale(ctx: &Context) -> Result<CheckOutcome> {
    let s = ctx.streamed()?;
    let r = &s.uncorrected;
    Ok(CheckOutcome::new(
        "uncorrected-martingale",
        r.verdict == Verdict::Pass,
        format!(
            "{}; max |z| at horizon {:.3}",
            verdict_detail(r),
            r.max_abs_z_ending_at(ctx.scenario.grid.horizon())
        ),
    )
    .metric("max_abs_z", r.max_abs_z)
    .metric("horizon_abs_z", r.max_abs_z_ending_at(ctx.scenario.grid.horizon()))
    .report("martingale_test:uncorrected", r.clone()))
}

fn z_martingale(ctx: &Context) -> Result<CheckOutcome> {
    let sc = ctx.scenario;
    let stride = ctx.stride();
    let mut acc = MartingaleAccumulator::new(&ctx.pairs());
    let dim = sc.model.driver_dim();
    for (off, len) in chunks(sc.n_paths, sc.chunk) {
        let e = ctx.block(dim, off, len)?;
        let mu = z_martingale_part(&sc.model, &e)?;
        acc.push(&mu.restrict(stride)?, &driver_features(&e, dim, stride)?)?;
    }
    let r = acc.finish();
    Ok(CheckOutcome::new("z-martingale", r.verdict == Verdict::Pass, verdict_detail(&r))
        .metric("max_abs_z", r.max_abs_z)
        .report("martingale_test:mu", r))
}

/// `P(min_c τ_c > t | W_t = state)` by integrating the density of the
/// minimum in log coordinates, where `ln τ_c | W^c_t = w ~ N(w, anchor − t)`.
pub fn min_time_survival(anchor: f64, t: f64, state: &[f64]) -> f64 {
    let sd = (anchor - t).sqrt();
    let lo_w = state.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_w = state.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = if t > 0.0 { t.ln().max(lo_w - 12.0 * sd) } else { lo_w - 12.0 * sd };
    let hi = hi_w + 12.0 * sd;
    if lo >= hi {
        return 0.0;
    }
    let density = |y: f64| {
        (0..state.len())
            .map(|c| {
                let others: f64 = (0..state.len())
                    .filter(|&j| j != c)
                    .map(|j| norm_sf((y - state[j]) / sd))
                    .product();
                norm_pdf((y - state[c]) / sd) / sd * others
            })
            .sum::<f64>()
    };
    let rule = GaussLegendre::new(64);
    let pieces = 16;
    let h = (hi - lo) / pieces as f64;
    (0..pieces)
        .map(|k| rule.integrate(lo + k as f64 * h, lo + (k + 1) as f64 * h, density))
        .sum()
}

fn z_subset_check(ctx: &Context) -> Result<CheckOutcome> {
    let n = oracle_family_size(ctx);
    let fam = ctx.family(n, false)?;
    let h = ctx.scenario.grid.horizon();
    let lattice = state_lattice(5);
    let (mut quad, mut full, mut min_gap) = (0.0f64, 0.0f64, 0.0f64);
    let mut rng = path_rng(ctx.scenario.seed, StreamDomain::Auxiliary(2), 0);
    for k in 0..5 {
        let t = h * k as f64 / 4.0;
        for _ in 0..4 {
            let state: Vec<f64> = (0..n).map(|_| lattice[rng.random_range(0..lattice.len())]).collect();
            for subset in Subset::all(n) {
                let closed = z_subset(&fam, t, &state, subset)?;
                let q = z_subset_quadrature(&fam, t, &state, subset)?;
                quad = quad.max((closed - q).abs());
            }
            full = full.max((z_subset(&fam, t, &state, Subset::full(n))? - 1.0).abs());
            let empty = z_subset(&fam, t, &state, Subset::from_bits(0))?;
            min_gap = min_gap.max((empty - min_time_survival(fam.anchor(), t, &state)).abs());
        }
    }
    Ok(CheckOutcome::new(
        "z-subset",
        quad < QUADRATURE_TOL && full == 0.0 && min_gap < QUADRATURE_TOL,
        format!(
            "n = {n}: max |closed − quadrature| = {quad:.3e}; max |Z^∅ − min-time Z| = {min_gap:.3e}; Z at the full set deviates by {full:.1e}"
        ),
    )
    .metric("quadrature_error", quad)
    .metric("min_time_error", min_gap)
    .metric("full_set_error", full))
}

impl Context<'_> {
    /// The first `n` paths and their decomposition.
    pub fn sample_block(&self, n: usize) -> Result<(PathEnsemble, Decomposition)> {
        let e = self.block(self.scenario.model.driver_dim(), 0, n)?;
        let (d, _) = self.decompose_block(&e)?;
        Ok((e, d))
    }
}
