//! Command line definitions and the `--config` file merge.
//!
//! A config file is a JSON object whose keys are the snake_case flag names.
//! Top-level keys apply to every subcommand; an object stored under a
//! subcommand's name (for example `"evaluate": {...}`) applies only to it.
//! Flags given on the command line win over both.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ingredient_cf::corpus::PipelineConfig;
use ingredient_cf::evaluation::{EvalMode, Fold, SourceSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Debug, Parser)]
#[command(name = "ingredient-cf", version, about = "Ingredient recommendation by item-based collaborative filtering")]
pub struct Cli {
    /// JSON file with default values for any flag.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean a raw recipe file into a corpus bundle.
    Prepare(PrepareArgs),
    /// Describe a corpus bundle.
    Stats(StatsArgs),
    /// Build a model bundle from a corpus bundle.
    Build(BuildArgs),
    /// Leave-one-out evaluation of one configuration.
    Evaluate(EvaluateArgs),
    /// Evaluate a grid of configurations on the tuning fold.
    Sweep(SweepArgs),
    /// Complete a recipe from a model bundle.
    Recommend(RecommendArgs),
    /// Serve a model bundle over HTTP.
    Serve(ServeArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Prepare(_) => "prepare",
            Command::Stats(_) => "stats",
            Command::Build(_) => "build",
            Command::Evaluate(_) => "evaluate",
            Command::Sweep(_) => "sweep",
            Command::Recommend(_) => "recommend",
            Command::Serve(_) => "serve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    Raw,
    Pca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldArg {
    Tuning,
    Test,
}

impl From<FoldArg> for Fold {
    fn from(f: FoldArg) -> Self {
        match f {
            FoldArg::Tuning => Fold::Tuning,
            FoldArg::Test => Fold::Test,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    #[serde(alias = "fold_complement")]
    FoldComplement,
    #[serde(alias = "exact_downdate")]
    ExactDowndate,
}

impl From<ModeArg> for EvalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FoldComplement => EvalMode::FoldComplement,
            ModeArg::ExactDowndate => EvalMode::ExactDowndate,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepareArgs {
    /// Raw recipe JSON (an array of {id, cuisine, ingredients}).
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Directory for the corpus bundle.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub min_raw_count: Option<usize>,
    #[arg(long)]
    pub min_final_count: Option<usize>,
    /// Pipeline settings; only settable from the config file.
    #[arg(skip)]
    pub pipeline: Option<PipelineConfig>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct StatsArgs {
    /// Corpus bundle directory.
    #[arg(long, short)]
    pub corpus: Option<PathBuf>,
    /// Number of most frequent ingredients to list.
    #[arg(long)]
    pub top: Option<usize>,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
    /// Also write the JSON report here.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Flags naming a similarity measure and the vectors it runs on.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelArgs {
    /// cs, acs, js or pmi.
    #[arg(long)]
    pub measure: Option<String>,
    /// Asymmetry of the asymmetric cosine; ignored for other measures.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Neighbourhood size.
    #[arg(long, short)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub source: Option<SourceKind>,
    /// Shorthand for `--source pca`.
    #[arg(long, conflicts_with_all = ["source", "raw"])]
    pub pca: bool,
    /// Shorthand for `--source raw`.
    #[arg(long, conflicts_with = "source")]
    pub raw: bool,
    /// Number of principal components kept (default: all).
    #[arg(long)]
    pub components: Option<usize>,
    /// Skip mean-centering before PCA.
    #[arg(long)]
    pub no_center: bool,
}

impl ModelArgs {
    /// Folds the shorthand flags into `source` so they outrank the config file.
    fn normalize(&mut self) {
        if self.pca {
            self.source = Some(SourceKind::Pca);
        } else if self.raw {
            self.source = Some(SourceKind::Raw);
        }
    }

    pub fn source_spec(&self) -> SourceSpec {
        let kind = self.source.unwrap_or(if self.raw && !self.pca { SourceKind::Raw } else { SourceKind::Pca });
        match kind {
            SourceKind::Raw => SourceSpec::Raw,
            SourceKind::Pca => SourceSpec::Pca { components: self.components, center: !self.no_center },
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildArgs {
    /// Corpus bundle directory.
    #[arg(long, short)]
    pub corpus: Option<PathBuf>,
    /// Directory for the model bundle.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluateArgs {
    /// Corpus bundle directory.
    #[arg(long, short)]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum)]
    pub fold: Option<FoldArg>,
    #[arg(long)]
    pub tuning_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Directory for report.json, trace.csv and summary.txt.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Print the JSON report instead of the summary table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepArgs {
    /// Corpus bundle directory.
    #[arg(long, short)]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub measures: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', value_enum)]
    pub sources: Option<Vec<SourceKind>>,
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long)]
    pub no_center: bool,
    #[arg(long)]
    pub tuning_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Protocol for raw-source cells; PCA cells always use fold-complement.
    #[arg(long, value_enum)]
    pub raw_mode: Option<ModeArg>,
    /// Directory for sweep.json and summary.txt.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct RecommendArgs {
    /// Model bundle directory.
    #[arg(long, short)]
    pub bundle: Option<PathBuf>,
    /// Ingredients already in the recipe.
    pub ingredients: Vec<String>,
    /// Number of suggestions.
    #[arg(short, long)]
    pub n: Option<usize>,
    /// Drop names missing from the vocabulary instead of failing.
    #[arg(long)]
    pub ignore_unknown: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ServeArgs {
    /// Model bundle directory.
    #[arg(long, short)]
    pub bundle: Option<PathBuf>,
    /// Address to listen on (default 127.0.0.1:8080).
    #[arg(long)]
    pub bind: Option<String>,
    /// Directory of UI assets served from `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    /// Extra origin allowed by CORS, e.g. a UI dev server.
    #[arg(long)]
    pub cors_origin: Option<String>,
}

pub fn load_config(path: &Path) -> Result<Value, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_slice(&bytes).map_err(|e| CliError::io(path, e))?;
    if !value.is_object() {
        return Err(CliError::io(path, "config must be a JSON object"));
    }
    Ok(value)
}

const SECTIONS: &[&str] = &["prepare", "stats", "build", "evaluate", "sweep", "recommend", "serve"];

/// Whether a serialized flag value was actually given on the command line.
fn is_set(value: &Value) -> bool {
    match value {
        Value::Null | Value::Bool(false) => false,
        Value::Array(items) => !items.is_empty(),
        _ => true,
    }
}

/// Overlays command-line values onto config-file values for one subcommand.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Value>, section: &str) -> Result<T, CliError> {
    let mut merged = Map::new();
    if let Some(Value::Object(file)) = config {
        for (key, value) in file {
            if !SECTIONS.contains(&key.as_str()) {
                merged.insert(key.clone(), value.clone());
            }
        }
        if let Some(Value::Object(own)) = file.get(section) {
            merged.extend(own.clone());
        }
    }
    let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::Usage(e.to_string()))? else {
        unreachable!("argument structs serialize to objects");
    };
    for (key, value) in given {
        if is_set(&value) {
            merged.insert(key, value);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("config: {e}")))
}

pub fn merge_build(mut flags: BuildArgs, config: Option<&Value>) -> Result<BuildArgs, CliError> {
    flags.model.normalize();
    merge(&flags, config, "build")
}

pub fn merge_evaluate(mut flags: EvaluateArgs, config: Option<&Value>) -> Result<EvaluateArgs, CliError> {
    flags.model.normalize();
    merge(&flags, config, "evaluate")
}

pub fn required<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| CliError::Usage(format!("missing required option --{flag}")))
}
