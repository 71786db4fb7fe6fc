use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use ingredient_cf::bundle::{self, BuildConfig, ModelBundle, PipelineRecord};
use ingredient_cf::corpus::{parse_raw, run_pipeline, Corpus};
use ingredient_cf::evaluation::{
    evaluate_fold, summary_table, sweep, EvalConfig, EvalMode, Fold, SourceSpec, SweepGrid,
};
use ingredient_cf::recommender::{recommend, PartialRecipe, Recommendation};
use ingredient_cf::similarity::{Measure, MeasureKind, DEFAULT_ALPHA};
use ingredient_cf::stats::corpus_stats;
use serde::Serialize;
use serde_json::Value;

use crate::args::{
    merge, merge_build, merge_evaluate, required, BuildArgs, EvaluateArgs, ModelArgs, PrepareArgs, RecommendArgs,
    ServeArgs, SourceKind, StatsArgs, SweepArgs, DEFAULT_BIND, DEFAULT_SEED,
};
use crate::error::CliError;
use crate::service::{router, AppState, ServiceOptions};

const DEFAULT_K: usize = 50;
const DEFAULT_TOP: usize = 10;
const DEFAULT_SUGGESTIONS: usize = 10;

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

fn load_corpus(dir: &Path) -> Result<Corpus, CliError> {
    Ok(bundle::read_corpus_bundle(dir)?.0)
}

fn parse_measure_kind(name: &str) -> Result<MeasureKind, CliError> {
    MeasureKind::from_str(name).map_err(|e| CliError::Usage(e.to_string()))
}

/// Measure from flags; an alpha given for a symmetric measure is ignored with a warning.
fn measure_from(args: &ModelArgs) -> Result<Measure, CliError> {
    let kind = match &args.measure {
        Some(name) => parse_measure_kind(name)?,
        None => MeasureKind::Pmi,
    };
    match (kind, args.alpha) {
        (MeasureKind::AsymmetricCosine, alpha) => {
            Measure::new(kind, alpha.unwrap_or(DEFAULT_ALPHA)).map_err(|e| CliError::Usage(e.to_string()))
        }
        (_, Some(alpha)) => {
            log::warn!("--alpha {alpha} only applies to the asymmetric cosine; ignored for {kind}");
            Ok(Measure::of(kind))
        }
        (_, None) => Ok(Measure::of(kind)),
    }
}

pub fn prepare(flags: PrepareArgs, config: Option<&Value>) -> Result<String, CliError> {
    let args = merge(&flags, config, "prepare")?;
    let input = required(&args.input, "input")?;
    let output = required(&args.output, "output")?;
    let mut pipeline = args.pipeline.clone().unwrap_or_default();
    if let Some(v) = args.min_raw_count {
        pipeline.min_raw_count = v;
    }
    if let Some(v) = args.min_final_count {
        pipeline.min_final_count = v;
    }

    let started = Instant::now();
    let bytes = fs::read(input).map_err(|e| CliError::io(input, e))?;
    let raw = parse_raw(&bytes).map_err(|e| CliError::io(input, e))?;
    let (corpus, report) = run_pipeline(raw, &pipeline)?;
    let record = PipelineRecord { config: pipeline, input_sha256: bundle::sha256_hex(&bytes), stages: report.stages };
    bundle::write_corpus_bundle(output, &corpus, &record)?;
    log::info!("prepared corpus in {:.1?}", started.elapsed());

    let mut out = format!("{:<14} {:>9} {:>12}\n", "stage", "recipes", "ingredients");
    for stage in &record.stages {
        let _ = writeln!(out, "{:<14} {:>9} {:>12}", stage.stage, stage.recipes, stage.ingredients);
    }
    let _ = writeln!(out, "corpus bundle written to {}", output.display());
    Ok(out)
}

pub fn stats(flags: StatsArgs, config: Option<&Value>) -> Result<String, CliError> {
    let args = merge(&flags, config, "stats")?;
    let corpus = load_corpus(required(&args.corpus, "corpus")?)?;
    let report = corpus_stats(&corpus, args.top.unwrap_or(DEFAULT_TOP));
    let json = to_json(&report);
    if let Some(path) = &args.output {
        write_file(path, &json)?;
    }
    Ok(if args.json { json } else { report.to_text() })
}

pub fn build(flags: BuildArgs, config: Option<&Value>) -> Result<String, CliError> {
    let args = merge_build(flags, config)?;
    let corpus_dir = required(&args.corpus, "corpus")?;
    let output = required(&args.output, "output")?;
    let k = args.model.k.unwrap_or(DEFAULT_K);
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let build = BuildConfig { measure: measure_from(&args.model)?, k, source: args.model.source_spec() };
    let (corpus, record) = bundle::read_corpus_bundle(corpus_dir)?;

    let started = Instant::now();
    let model = ModelBundle::build(&corpus, build, Some(record))?;
    let elapsed = started.elapsed();
    model.save(output)?;
    Ok(format!(
        "built {} over {} on {} ingredients, k={}, in {:.2?}\nmodel bundle written to {}\n",
        build.measure,
        build.source.label(),
        corpus.num_ingredients(),
        k,
        elapsed,
        output.display()
    ))
}

pub fn evaluate(flags: EvaluateArgs, config: Option<&Value>) -> Result<String, CliError> {
    let args = merge_evaluate(flags, config)?;
    let corpus = load_corpus(required(&args.corpus, "corpus")?)?;
    let defaults = EvalConfig::default();
    let eval = EvalConfig {
        measure: measure_from(&args.model)?,
        k: args.model.k.unwrap_or(DEFAULT_K),
        source: args.model.source_spec(),
        fold: args.fold.map(Fold::from).unwrap_or(defaults.fold),
        tuning_fraction: args.tuning_fraction.unwrap_or(defaults.tuning_fraction),
        seed: args.seed.unwrap_or(DEFAULT_SEED),
        mode: args.mode.map(EvalMode::from).unwrap_or(defaults.mode),
    };
    eval.validate()?;
    let report = evaluate_fold(&corpus, &eval)?;
    log::info!("evaluated {} recipes in {:.1?}", report.recipes_evaluated, report.wall_time);

    let json = to_json(&report);
    let summary = summary_table(std::slice::from_ref(&report));
    if let Some(dir) = &args.output {
        create_dir(dir)?;
        write_file(&dir.join("report.json"), &json)?;
        write_file(&dir.join("trace.csv"), report.trace_csv())?;
        write_file(&dir.join("summary.txt"), &summary)?;
    }
    Ok(if args.json { json } else { format!("{summary}protocol: {}\nseed: {}\n", report.protocol, eval.seed) })
}

pub fn sweep_cmd(flags: SweepArgs, config: Option<&Value>) -> Result<String, CliError> {
    let args = merge(&flags, config, "sweep")?;
    let corpus = load_corpus(required(&args.corpus, "corpus")?)?;
    let mut grid = SweepGrid::default();
    if let Some(names) = &args.measures {
        grid.measures = names.iter().map(|n| parse_measure_kind(n)).collect::<Result<_, _>>()?;
    }
    if let Some(alphas) = &args.alphas {
        grid.alphas = alphas.clone();
    }
    if let Some(ks) = &args.ks {
        grid.ks = ks.clone();
    }
    let pca = SourceSpec::Pca { components: args.components, center: !args.no_center };
    grid.sources = match &args.sources {
        Some(kinds) => kinds
            .iter()
            .map(|k| match k {
                SourceKind::Raw => SourceSpec::Raw,
                SourceKind::Pca => pca,
            })
            .collect(),
        None => vec![SourceSpec::Raw, pca],
    };
    let fraction = args.tuning_fraction.unwrap_or(EvalConfig::default().tuning_fraction);
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let raw_mode = args.raw_mode.map(EvalMode::from).unwrap_or(EvalMode::FoldComplement);

    let started = Instant::now();
    let report = sweep(&corpus, &grid, fraction, seed, raw_mode)?;
    log::info!("swept {} cells in {:.1?}", report.cells.len(), started.elapsed());

    let json = to_json(&report);
    let summary = format!("seed: {seed}\n{}", report.summary());
    if let Some(dir) = &args.output {
        create_dir(dir)?;
        write_file(&dir.join("sweep.json"), &json)?;
        write_file(&dir.join("summary.txt"), &summary)?;
    }
    Ok(if args.json { json } else { summary })
}

fn recommendation_table(rows: &[Recommendation]) -> String {
    let mut out = format!("{:>4}  {:<30} {:>8}\n", "rank", "ingredient", "fit");
    for r in rows {
        let _ = writeln!(out, "{:>4}  {:<30} {:>8.4}", r.rank, r.name, r.fit);
    }
    out
}

pub fn recommend_cmd(flags: RecommendArgs, config: Option<&Value>) -> Result<String, CliError> {
    let args = merge(&flags, config, "recommend")?;
    let model = ModelBundle::load(required(&args.bundle, "bundle")?)?;
    let n = args.n.unwrap_or(DEFAULT_SUGGESTIONS);
    if n == 0 {
        return Err(CliError::Usage("-n must be at least 1".into()));
    }
    if args.ingredients.is_empty() {
        return Err(CliError::Usage("name at least one ingredient".into()));
    }
    let (ids, unknown) = model.vocabulary.resolve(&args.ingredients);
    if !unknown.is_empty() {
        if args.ignore_unknown {
            log::warn!("ignoring unknown ingredients: {}", unknown.join(", "));
        } else {
            return Err(CliError::Usage(format!("unknown ingredients: {}", unknown.join(", "))));
        }
    }
    if ids.is_empty() {
        return Err(CliError::Usage("none of the ingredients are in the vocabulary".into()));
    }
    let recipe = PartialRecipe::new(ids, model.vocabulary.len()).map_err(|e| CliError::Runtime(e.to_string()))?;
    let rows =
        recommend(&model.neighbors, &model.vocabulary, &recipe, n).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(if args.json { to_json(&rows) } else { recommendation_table(&rows) })
}

async fn shutdown_signal(mut failed: tokio::sync::watch::Receiver<bool>) {
    tokio::select! {
        _ = tokio::signal::ctrl_c() => log::info!("interrupted, shutting down"),
        _ = failed.wait_for(|&f| f) => {}
    }
}

pub fn serve(flags: ServeArgs, config: Option<&Value>) -> Result<String, CliError> {
    let args = merge(&flags, config, "serve")?;
    let bundle_dir = required(&args.bundle, "bundle")?.clone();
    let bind = args.bind.clone().unwrap_or_else(|| DEFAULT_BIND.to_string());
    if let Some(origin) = &args.cors_origin {
        axum::http::HeaderValue::from_str(origin)
            .map_err(|_| CliError::Usage(format!("invalid CORS origin {origin:?}")))?;
    }
    let options = ServiceOptions { static_dir: args.static_dir.clone(), cors_origin: args.cors_origin.clone() };

    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&bind)
            .await
            .map_err(|e| CliError::Runtime(format!("cannot listen on {bind}: {e}")))?;
        let address = listener.local_addr().map_err(|e| CliError::Runtime(e.to_string()))?;
        eprintln!("listening on http://{address}");

        let state = AppState::loading();
        let (failed_tx, failed_rx) = tokio::sync::watch::channel(false);
        let loader_state = state.clone();
        let loader = tokio::task::spawn_blocking(move || match ModelBundle::load(&bundle_dir) {
            Ok(model) => {
                log::info!("loaded model with {} ingredients", model.vocabulary.len());
                loader_state.set(model);
                Ok(())
            }
            Err(e) => {
                let _ = failed_tx.send(true);
                Err(CliError::from(e))
            }
        });

        axum::serve(listener, router(state, &options))
            .with_graceful_shutdown(shutdown_signal(failed_rx))
            .await
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        loader.await.map_err(|e| CliError::Runtime(e.to_string()))??;
        Ok(String::new())
    })
}
