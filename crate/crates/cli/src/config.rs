//! Scenario files.
//!
//! A scenario is a TOML document; unknown keys are rejected. See the README
//! for the full schema.

use std::ops::Range;
use std::path::PathBuf;

use filtex_core::single_expansion::{BracketMethod, LocalMartingale, Profile};
use filtex_core::time_models::{
    BridgeLognormal, CoxDeterministic, DriverFamily, IndependentTime, MarkLaw, MarkedBridge,
    RandomTimeModel, SingleTimeModel, TimeLaw,
};
use filtex_core::TimeGrid;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::checks::{self, Requirement};

/// Smallest ensemble a scenario may request.
pub const MIN_PATHS: usize = 100;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub id: String,
    pub grid: Spanned<RawGrid>,
    pub ensemble: Spanned<RawEnsemble>,
    pub model: Spanned<ModelSpec>,
    #[serde(default)]
    pub martingale: Option<Spanned<MartingaleSpec>>,
    pub checks: Vec<Spanned<String>>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub horizon: Spanned<f64>,
    pub steps: Spanned<i64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEnsemble {
    pub n_paths: Spanned<i64>,
    pub seed: u64,
    #[serde(default)]
    pub chunk: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Independent { law: TimeLaw },
    CoxDeterministic { intensity: f64 },
    BridgeLognormal { anchor: f64 },
    IndependentDriverFamily {
        anchor: f64,
        n: usize,
        #[serde(default)]
        marked: bool,
    },
    MarkedBridge { anchor: f64, mark: MarkLaw },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    #[default]
    Plain,
    Marked,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleSpec {
    #[serde(default = "default_weights")]
    pub weights: Vec<f64>,
    #[serde(default = "default_profile")]
    pub profile: Profile,
    #[serde(default)]
    pub mode: ModeSpec,
    #[serde(default)]
    pub bracket: BracketMethod,
}

fn default_weights() -> Vec<f64> {
    vec![1.0]
}

fn default_profile() -> Profile {
    Profile::UNIT
}

impl Default for MartingaleSpec {
    fn default() -> Self {
        Self {
            weights: default_weights(),
            profile: default_profile(),
            mode: ModeSpec::Plain,
            bracket: BracketMethod::ClosedForm,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Number of paths written to `paths.csv`.
    #[serde(default)]
    pub paths: Option<usize>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub grid: TimeGrid,
    pub n_paths: usize,
    pub seed: u64,
    pub chunk: usize,
    pub model_spec: ModelSpec,
    pub model: RandomTimeModel,
    pub martingale: LocalMartingale,
    pub mode: ModeSpec,
    pub bracket: BracketMethod,
    pub checks: Vec<String>,
    pub output_dir: Option<PathBuf>,
    pub csv_paths: usize,
}

/// Parse or validation failure, with the 1-based line it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_of(src: &str, span: Range<usize>) -> usize {
    src[..span.start.min(src.len())].matches('\n').count() + 1
}

fn at<T>(src: &str, s: &Spanned<T>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: Some(line_of(src, s.span())),
        message: message.into(),
    }
}

impl ModelSpec {
    pub fn build(&self) -> filtex_core::Result<RandomTimeModel> {
        Ok(match *self {
            ModelSpec::Independent { law } => {
                SingleTimeModel::Independent(IndependentTime::new(law)?).into()
            }
            ModelSpec::CoxDeterministic { intensity } => {
                SingleTimeModel::CoxDeterministic(CoxDeterministic::new(intensity)?).into()
            }
            ModelSpec::BridgeLognormal { anchor } => {
                SingleTimeModel::BridgeLognormal(BridgeLognormal::new(anchor)?).into()
            }
            ModelSpec::IndependentDriverFamily { anchor, n, marked } => {
                DriverFamily::new(n, anchor, marked)?.into()
            }
            ModelSpec::MarkedBridge { anchor, mark } => SingleTimeModel::MarkedBridge(
                MarkedBridge::new(BridgeLognormal::new(anchor)?, mark)?,
            )
            .into(),
        })
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(src: &str) -> Result<Scenario, ConfigError> {
    let raw: RawScenario = toml::from_str(src).map_err(|e| ConfigError {
        line: e.span().map(|s| line_of(src, s)),
        message: e.message().trim().to_string(),
    })?;

    let g = raw.grid.get_ref();
    let horizon = *g.horizon.get_ref();
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(at(src, &g.horizon, format!("grid.horizon must be positive, got {horizon}")));
    }
    let steps = *g.steps.get_ref();
    if steps < 2 {
        return Err(at(src, &g.steps, format!("grid.steps must be at least 2, got {steps}")));
    }
    let grid = TimeGrid::new(horizon, steps as usize).map_err(|e| at(src, &raw.grid, e.to_string()))?;

    let ens = raw.ensemble.get_ref();
    let n_paths = *ens.n_paths.get_ref();
    if n_paths < MIN_PATHS as i64 {
        return Err(at(
            src,
            &ens.n_paths,
            format!("ensemble.n_paths must be at least {MIN_PATHS}, got {n_paths}"),
        ));
    }
    let chunk = ens.chunk.unwrap_or(filtex_core::martingale_lab::DEFAULT_CHUNK);
    if chunk == 0 {
        return Err(at(src, &raw.ensemble, "ensemble.chunk must be positive"));
    }

    let model_spec = *raw.model.get_ref();
    let model = model_spec.build().map_err(|e| at(src, &raw.model, e.to_string()))?;
    if horizon > model.time_limit() {
        return Err(at(
            src,
            &g.horizon,
            format!(
                "grid.horizon {horizon} exceeds the model validity horizon {}",
                model.time_limit()
            ),
        ));
    }

    let (mart, mart_span) = match &raw.martingale {
        Some(s) => (s.get_ref().clone(), Some(s)),
        None => (MartingaleSpec::default(), None),
    };
    let mart_err = |msg: String| match mart_span {
        Some(s) => at(src, s, msg),
        None => ConfigError { line: None, message: msg },
    };
    if mart.weights.is_empty() || mart.weights.len() > model.driver_dim() {
        return Err(mart_err(format!(
            "martingale.weights must have between 1 and {} entries",
            model.driver_dim()
        )));
    }
    if mart.weights.iter().chain([&mart.profile.level, &mart.profile.slope]).any(|v| !v.is_finite()) {
        return Err(mart_err("martingale coefficients must be finite".into()));
    }
    let marked_model = matches!(model_spec, ModelSpec::MarkedBridge { .. });
    if mart.mode == ModeSpec::Marked && !marked_model {
        return Err(mart_err("martingale.mode = \"marked\" needs a marked-bridge model".into()));
    }

    let mut names = Vec::new();
    for c in &raw.checks {
        let name = c.get_ref();
        let Some(check) = checks::find(name) else {
            return Err(at(src, c, format!("unknown check \"{name}\"; see `filtex list-checks`")));
        };
        if let Err(why) = check.requirement.admits(&model_spec) {
            return Err(at(src, c, format!("check \"{name}\" {why}")));
        }
        if names.contains(name) {
            return Err(at(src, c, format!("check \"{name}\" listed twice")));
        }
        names.push(name.clone());
    }
    if names.is_empty() {
        return Err(ConfigError {
            line: None,
            message: "at least one check is required".into(),
        });
    }

    Ok(Scenario {
        id: raw.id,
        grid,
        n_paths: n_paths as usize,
        seed: ens.seed,
        chunk,
        model_spec,
        model,
        martingale: LocalMartingale {
            weights: mart.weights,
            profile: mart.profile,
        },
        mode: mart.mode,
        bracket: mart.bracket,
        checks: names,
        output_dir: raw.output.dir,
        csv_paths: raw.output.paths.unwrap_or(10),
    })
}

impl Requirement {
    pub fn admits(&self, model: &ModelSpec) -> Result<(), &'static str> {
        let ok = match self {
            Requirement::Any => true,
            Requirement::SingleTime => !matches!(model, ModelSpec::IndependentDriverFamily { .. }),
            Requirement::BridgeAnchor => matches!(
                model,
                ModelSpec::BridgeLognormal { .. }
                    | ModelSpec::MarkedBridge { .. }
                    | ModelSpec::IndependentDriverFamily { .. }
            ),
            Requirement::MarkedBridge => matches!(model, ModelSpec::MarkedBridge { .. }),
            Requirement::MarkedFamily => {
                matches!(model, ModelSpec::IndependentDriverFamily { marked: true, .. })
            }
        };
        if ok {
            Ok(())
        } else {
            Err(self.describe())
        }
    }

    fn describe(&self) -> &'static str {
        match self {
            Requirement::Any => "is always available",
            Requirement::SingleTime => "needs a single-time model",
            Requirement::BridgeAnchor => {
                "needs a bridge-lognormal, marked-bridge or independent-driver-family model"
            }
            Requirement::MarkedBridge => "needs a marked-bridge model",
            Requirement::MarkedFamily => "needs an independent-driver-family model with marked = true",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
id = "demo"
checks = ["additivity"]

[grid]
horizon = 1.0
steps = 40

[ensemble]
n_paths = 200
seed = 3

[model]
kind = "bridge-lognormal"
anchor = 2.0
"#;

    #[test]
    fn parses_a_minimal_scenario() {
        let s = parse_scenario(GOOD).unwrap();
        assert_eq!(s.grid.steps(), 40);
        assert_eq!(s.martingale, LocalMartingale::brownian(0));
        assert_eq!(s.csv_paths, 10);
    }

    #[test]
    fn step_count_error_points_at_its_line() {
        let bad = GOOD.replace("steps = 40", "steps = 1");
        let e = parse_scenario(&bad).unwrap_err();
        assert_eq!(e.line, Some(7));
        assert!(e.message.contains("steps"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = GOOD.replace("seed = 3", "seed = 3\ncolour = 1");
        let e = parse_scenario(&bad).unwrap_err();
        assert_eq!(e.line, Some(12));
        assert!(e.message.contains("colour"), "{}", e.message);
    }

    #[test]
    fn horizon_beyond_model_limit() {
        let bad = GOOD.replace("anchor = 2.0", "anchor = 1.05");
        let e = parse_scenario(&bad).unwrap_err();
        assert_eq!(e.line, Some(6));
    }

    #[test]
    fn unknown_and_inapplicable_checks() {
        let bad = GOOD.replace("[\"additivity\"]", "[\"additivity\", \"bogus\"]");
        assert_eq!(parse_scenario(&bad).unwrap_err().line, Some(3));
        let bad = GOOD.replace("[\"additivity\"]", "[\"marked-coincidence\"]");
        assert!(parse_scenario(&bad).unwrap_err().message.contains("marked-bridge"));
    }

    #[test]
    fn nested_model_parameters() {
        let src = GOOD.replace(
            "kind = \"bridge-lognormal\"\nanchor = 2.0",
            "kind = \"marked-bridge\"\nanchor = 2.0\nmark = { law = \"intermediate-sign\", at = 1.5 }",
        );
        let s = parse_scenario(&src).unwrap();
        assert!(matches!(
            s.model_spec,
            ModelSpec::MarkedBridge { mark: MarkLaw::IntermediateSign { at }, .. } if at == 1.5
        ));
        let src = GOOD.replace(
            "kind = \"bridge-lognormal\"\nanchor = 2.0",
            "kind = \"independent\"\nlaw = { dist = \"exponential\", rate = 1.0 }",
        );
        assert!(parse_scenario(&src).is_ok());
    }
}
