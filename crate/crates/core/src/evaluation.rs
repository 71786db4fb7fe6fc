//! Leave-one-out evaluation, ranking metrics and parameter sweeps.
//!
//! Two protocols keep the evaluated recipe out of the model:
//!
//! * `fold_complement` builds one model per fold from every recipe outside
//!   the fold, so no evaluated recipe is ever seen.
//! * `exact_downdate` keeps global co-occurrence counts and, per evaluated
//!   recipe, subtracts that recipe before computing similarities. This is an
//!   exact leave-one-out for measures on raw binary columns.
//!
//! Removal of the held-out ingredient uses a counter-style RNG keyed on
//! `(seed, recipe id)`, so results do not depend on evaluation order.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Recipe};
use crate::embedding::{pca_embed, EmbeddingConfig, EmbeddingError, IngredientEmbedding};
use crate::matrix::{CooccurrenceCounts, RatingMatrix};
use crate::recommender::{fit_scores, rank_in, PartialRecipe};
use crate::similarity::{
    neighbors_from_row, similarity_matrix, Measure, MeasureKind, NeighborModel, SimilarityError, SourceDescriptor,
    VectorSource,
};
use crate::stats::{mean, median};

/// Recommendation list length behind the recall metric.
pub const RECALL_CUTOFF: usize = 10;

const REMOVAL_KEY: u64 = 0x6a09_e667_f3bc_c908;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("the {0:?} fold is empty")]
    EmptyFold(Fold),
    #[error("tuning fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("invalid evaluation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Raw,
    Pca { components: Option<usize>, center: bool },
}

impl SourceSpec {
    pub fn pca() -> Self {
        Self::Pca { components: None, center: true }
    }

    pub fn is_pca(&self) -> bool {
        matches!(self, Self::Pca { .. })
    }

    pub fn label(&self) -> String {
        match self {
            Self::Raw => "raw".to_string(),
            Self::Pca { components: None, center } => format!("pca(full{})", if *center { "" } else { ",uncentered" }),
            Self::Pca { components: Some(d), center } => {
                format!("pca({d}{})", if *center { "" } else { ",uncentered" })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fold {
    Tuning,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    FoldComplement,
    ExactDowndate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub measure: Measure,
    pub k: usize,
    pub source: SourceSpec,
    pub fold: Fold,
    pub tuning_fraction: f64,
    pub seed: u64,
    pub mode: EvalMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            measure: Measure::of(MeasureKind::Pmi),
            k: 50,
            source: SourceSpec::pca(),
            fold: Fold::Test,
            tuning_fraction: 0.10,
            seed: 42,
            mode: EvalMode::FoldComplement,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if !(self.tuning_fraction > 0.0 && self.tuning_fraction < 1.0) {
            return Err(EvalError::InvalidFraction(self.tuning_fraction));
        }
        if self.k == 0 {
            return Err(EvalError::InvalidConfig("k must be at least 1".into()));
        }
        if self.mode == EvalMode::ExactDowndate && self.source.is_pca() {
            return Err(EvalError::InvalidConfig("exact_downdate requires the raw source".into()));
        }
        Measure::new(self.measure.kind, self.measure.alpha)?;
        Ok(())
    }

    pub fn protocol(&self) -> &'static str {
        match self.mode {
            EvalMode::FoldComplement => {
                "fold_complement: one model per fold, built only from recipes outside the evaluated fold"
            }
            EvalMode::ExactDowndate => {
                "exact_downdate: per-recipe leave-one-out, model built from every other recipe in the corpus"
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Folds {
    pub tuning: Vec<i64>,
    pub test: Vec<i64>,
}

impl Folds {
    pub fn get(&self, fold: Fold) -> &[i64] {
        match fold {
            Fold::Tuning => &self.tuning,
            Fold::Test => &self.test,
        }
    }
}

/// Deterministic tuning/test split of the recipe ids; both folds are sorted.
pub fn split_folds(corpus: &Corpus, tuning_fraction: f64, seed: u64) -> Result<Folds, EvalError> {
    if !(tuning_fraction > 0.0 && tuning_fraction < 1.0) {
        return Err(EvalError::InvalidFraction(tuning_fraction));
    }
    let mut ids: Vec<i64> = corpus.recipes().iter().map(|r| r.id).collect();
    ids.sort_unstable();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let tuning_len = (tuning_fraction * ids.len() as f64).round() as usize;
    let mut test = ids.split_off(tuning_len);
    ids.sort_unstable();
    test.sort_unstable();
    Ok(Folds { tuning: ids, test })
}

/// Removes one ingredient uniformly at random, keyed on `(seed, recipe.id)`.
pub fn hold_one_out(recipe: &Recipe, seed: u64, n: usize) -> (PartialRecipe, u32) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ REMOVAL_KEY);
    rng.set_stream(recipe.id as u64);
    let pick = rng.random_range(0..recipe.ingredients.len());
    let missing = recipe.ingredients[pick];
    let rest: Vec<u32> = recipe.ingredients.iter().copied().filter(|&i| i != missing).collect();
    let partial = PartialRecipe::new(rest, n).expect("recipes hold at least two distinct ingredients");
    (partial, missing)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankMetrics {
    pub count: usize,
    pub recall_at_10: f64,
    pub mean_rank: f64,
    pub median_rank: f64,
}

pub fn rank_metrics(ranks: &[usize]) -> RankMetrics {
    let as_f64: Vec<f64> = ranks.iter().map(|&r| r as f64).collect();
    let hits = ranks.iter().filter(|&&r| r <= RECALL_CUTOFF).count();
    RankMetrics {
        count: ranks.len(),
        recall_at_10: if ranks.is_empty() { 0.0 } else { hits as f64 / ranks.len() as f64 },
        mean_rank: mean(&as_f64),
        median_rank: median(&as_f64),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub recipe_id: i64,
    pub removed_id: u32,
    pub removed_ingredient: String,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: EvalConfig,
    pub protocol: String,
    pub recipes_evaluated: usize,
    pub recall_at_10: f64,
    pub mean_rank: f64,
    pub median_rank: f64,
    /// Rank -> number of recipes whose held-out ingredient landed there.
    pub rank_histogram: BTreeMap<usize, usize>,
    /// Sorted by recipe id.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEntry>,
    /// Not serialized, so reports of identical runs compare byte for byte.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl EvalReport {
    fn new(config: EvalConfig, trace: Vec<TraceEntry>, wall_time: Duration) -> Self {
        let ranks: Vec<usize> = trace.iter().map(|t| t.rank).collect();
        let metrics = rank_metrics(&ranks);
        let mut rank_histogram = BTreeMap::new();
        for &r in &ranks {
            *rank_histogram.entry(r).or_insert(0) += 1;
        }
        Self {
            config,
            protocol: config.protocol().to_string(),
            recipes_evaluated: metrics.count,
            recall_at_10: metrics.recall_at_10,
            mean_rank: metrics.mean_rank,
            median_rank: metrics.median_rank,
            rank_histogram,
            trace,
            wall_time,
        }
    }

    pub fn metrics(&self) -> RankMetrics {
        RankMetrics {
            count: self.recipes_evaluated,
            recall_at_10: self.recall_at_10,
            mean_rank: self.mean_rank,
            median_rank: self.median_rank,
        }
    }

    /// `recipe_id,removed_ingredient,rank` lines with a header.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("recipe_id,removed_ingredient,rank\n");
        for t in &self.trace {
            let _ = writeln!(out, "{},{},{}", t.recipe_id, t.removed_ingredient, t.rank);
        }
        out
    }
}

/// Plain-text table of reports, one row per report.
pub fn summary_table(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:<14} {:>4} {:>10} {:>10} {:>12}",
        "Similarity measure", "Source", "k", "Recall@10", "Mean rank", "Median rank"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<28} {:<14} {:>4} {:>9.2}% {:>10.2} {:>12}",
            r.config.measure.to_string(),
            r.config.source.label(),
            r.config.k,
            100.0 * r.recall_at_10,
            r.mean_rank,
            r.median_rank
        );
    }
    out
}

/// Co-occurrence counts with one recipe subtracted, computed on the fly.
pub struct DowndatedCounts<'a> {
    base: &'a CooccurrenceCounts,
    removed: Vec<bool>,
}

impl<'a> DowndatedCounts<'a> {
    pub fn new(base: &'a CooccurrenceCounts, recipe: &[u32]) -> Self {
        let mut removed = vec![false; base.num_ingredients()];
        for &i in recipe {
            removed[i as usize] = true;
        }
        Self { base, removed }
    }
}

impl VectorSource for DowndatedCounts<'_> {
    fn num_ingredients(&self) -> usize {
        self.base.num_ingredients()
    }

    fn num_recipes(&self) -> usize {
        self.base.num_recipes() - 1
    }

    fn dot(&self, i: usize, j: usize) -> f64 {
        let overlap = u32::from(self.removed[i] && self.removed[j]);
        (self.base.get(i, j) - overlap) as f64
    }

    fn descriptor(&self) -> SourceDescriptor {
        SourceDescriptor::Raw
    }
}

fn evaluated_recipes<'c>(corpus: &'c Corpus, folds: &Folds, fold: Fold) -> Result<Vec<&'c Recipe>, EvalError> {
    let wanted: HashSet<i64> = folds.get(fold).iter().copied().collect();
    let mut recipes: Vec<&Recipe> = corpus.recipes().iter().filter(|r| wanted.contains(&r.id)).collect();
    if recipes.is_empty() {
        return Err(EvalError::EmptyFold(fold));
    }
    recipes.sort_by_key(|r| r.id);
    Ok(recipes)
}

fn complement_matrix(corpus: &Corpus, folds: &Folds, fold: Fold) -> RatingMatrix {
    let excluded: HashSet<i64> = folds.get(fold).iter().copied().collect();
    let rows = corpus.recipes().iter().filter(|r| !excluded.contains(&r.id)).map(|r| r.ingredients.clone()).collect();
    RatingMatrix::from_rows(corpus.num_ingredients(), rows)
}

fn embed(matrix: &RatingMatrix, spec: SourceSpec) -> Result<Option<IngredientEmbedding>, EvalError> {
    match spec {
        SourceSpec::Raw => Ok(None),
        SourceSpec::Pca { components, center } => Ok(Some(pca_embed(matrix, &EmbeddingConfig { components, center })?)),
    }
}

/// Ranks of the held-out ingredient for each neighbour count, one row per recipe.
fn ranks_for_ks(models: &[NeighborModel], names: &[String], partial: &PartialRecipe, missing: u32) -> Vec<usize> {
    models.iter().map(|model| rank_in(&fit_scores(model, partial), names, partial, missing)).collect()
}

fn truncations(model: &NeighborModel, ks: &[usize]) -> Vec<NeighborModel> {
    ks.iter().map(|&k| model.truncated(k)).collect()
}

fn to_reports(
    corpus: &Corpus,
    base: &EvalConfig,
    ks: &[usize],
    recipes: &[&Recipe],
    ranks: Vec<(u32, Vec<usize>)>,
    started: Instant,
) -> Vec<EvalReport> {
    let vocab = corpus.vocabulary();
    let elapsed = started.elapsed();
    ks.iter()
        .enumerate()
        .map(|(slot, &k)| {
            let trace = recipes
                .iter()
                .zip(&ranks)
                .map(|(recipe, (missing, per_k))| TraceEntry {
                    recipe_id: recipe.id,
                    removed_id: *missing,
                    removed_ingredient: vocab.name(*missing).to_string(),
                    rank: per_k[slot],
                })
                .collect();
            EvalReport::new(EvalConfig { k, ..*base }, trace, elapsed)
        })
        .collect()
}

/// Shared state for evaluating several configurations on one fold.
struct FoldEvaluator<'c> {
    corpus: &'c Corpus,
    recipes: Vec<&'c Recipe>,
    names: &'c [String],
    /// Held-out split per evaluated recipe.
    holdouts: Vec<(PartialRecipe, u32)>,
    matrices_computed: usize,
}

impl<'c> FoldEvaluator<'c> {
    fn new(corpus: &'c Corpus, folds: &Folds, fold: Fold, seed: u64) -> Result<Self, EvalError> {
        let recipes = evaluated_recipes(corpus, folds, fold)?;
        let n = corpus.num_ingredients();
        let holdouts = recipes.iter().map(|r| hold_one_out(r, seed, n)).collect();
        Ok(Self { corpus, recipes, names: corpus.vocabulary().names(), holdouts, matrices_computed: 0 })
    }

    /// One similarity matrix, truncated to every requested k.
    fn with_source<S: VectorSource + ?Sized>(
        &mut self,
        source: &S,
        config: &EvalConfig,
        ks: &[usize],
    ) -> Result<Vec<EvalReport>, EvalError> {
        let started = Instant::now();
        let sim = similarity_matrix(source, &config.measure)?;
        self.matrices_computed += 1;
        let k_max = ks.iter().copied().max().unwrap_or(1);
        let full = NeighborModel {
            k: k_max,
            measure: config.measure,
            source: source.descriptor(),
            neighbors: (0..sim.len())
                .into_par_iter()
                .map(|i| neighbors_from_row(i, sim.row(i), k_max, self.names))
                .collect(),
        };
        let models = truncations(&full, ks);
        let names = self.names;
        let ranks: Vec<(u32, Vec<usize>)> = self
            .holdouts
            .par_iter()
            .map(|(partial, missing)| (*missing, ranks_for_ks(&models, names, partial, *missing)))
            .collect();
        Ok(to_reports(self.corpus, config, ks, &self.recipes, ranks, started))
    }

    /// Exact per-recipe leave-one-out on raw co-occurrence counts.
    fn downdated(
        &mut self,
        counts: &CooccurrenceCounts,
        config: &EvalConfig,
        ks: &[usize],
    ) -> Result<Vec<EvalReport>, EvalError> {
        let started = Instant::now();
        let k_max = ks.iter().copied().max().unwrap_or(1);
        let names = self.names;
        let ranks: Vec<(u32, Vec<usize>)> = self
            .recipes
            .par_iter()
            .zip(self.holdouts.par_iter())
            .map(|(recipe, (partial, missing))| {
                let source = DowndatedCounts::new(counts, &recipe.ingredients);
                let sim = similarity_matrix(&source, &config.measure)?;
                let neighbors = (0..sim.len())
                    .map(|i| {
                        if partial.contains(i as u32) {
                            Vec::new()
                        } else {
                            neighbors_from_row(i, sim.row(i), k_max, names)
                        }
                    })
                    .collect();
                let full =
                    NeighborModel { k: k_max, measure: config.measure, source: SourceDescriptor::Raw, neighbors };
                Ok((*missing, ranks_for_ks(&truncations(&full, ks), names, partial, *missing)))
            })
            .collect::<Result<_, EvalError>>()?;
        self.matrices_computed += self.recipes.len();
        Ok(to_reports(self.corpus, config, ks, &self.recipes, ranks, started))
    }
}

/// Evaluates `config` once per neighbour count in `ks`, sharing all work
/// that does not depend on k.
pub fn evaluate_ks(corpus: &Corpus, config: &EvalConfig, ks: &[usize]) -> Result<Vec<EvalReport>, EvalError> {
    config.validate()?;
    if ks.is_empty() || ks.contains(&0) {
        return Err(EvalError::InvalidConfig("neighbour counts must be nonempty and at least 1".into()));
    }
    let folds = split_folds(corpus, config.tuning_fraction, config.seed)?;
    let mut evaluator = FoldEvaluator::new(corpus, &folds, config.fold, config.seed)?;
    match config.mode {
        EvalMode::FoldComplement => {
            let training = complement_matrix(corpus, &folds, config.fold);
            match embed(&training, config.source)? {
                Some(embedding) => evaluator.with_source(&embedding, config, ks),
                None => evaluator.with_source(&training, config, ks),
            }
        }
        EvalMode::ExactDowndate => {
            let all = RatingMatrix::from_rows(
                corpus.num_ingredients(),
                corpus.recipes().iter().map(|r| r.ingredients.clone()).collect(),
            );
            evaluator.downdated(&all.cooccurrence_counts(), config, ks)
        }
    }
}

pub fn evaluate_fold(corpus: &Corpus, config: &EvalConfig) -> Result<EvalReport, EvalError> {
    let mut reports = evaluate_ks(corpus, config, &[config.k])?;
    Ok(reports.remove(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub measures: Vec<MeasureKind>,
    /// Asymmetry values tried for the asymmetric cosine.
    pub alphas: Vec<f64>,
    pub ks: Vec<usize>,
    pub sources: Vec<SourceSpec>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            measures: MeasureKind::ALL.to_vec(),
            alphas: (0..=10).map(|i| i as f64 * 0.05).collect(),
            ks: vec![10, 20, 50, 100, 150, 200],
            sources: vec![SourceSpec::Raw, SourceSpec::pca()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub measure: MeasureKind,
    pub alpha: Option<f64>,
    pub k: usize,
    pub source: SourceSpec,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub measure: MeasureKind,
    pub source: SourceSpec,
    pub k: usize,
    pub alpha: Option<f64>,
    pub recall_at_10: f64,
    pub median_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub seed: u64,
    pub tuning_fraction: f64,
    pub raw_mode: EvalMode,
    pub grid: SweepGrid,
    pub cells: Vec<SweepCell>,
    pub selection_rule: String,
    pub selections: Vec<Selection>,
    pub similarity_matrices_computed: usize,
}

pub const SELECTION_RULE: &str = "highest recall@10, then lowest median rank, then smallest k";

/// Evaluates every grid cell on the tuning fold. PCA cells always use the
/// fold-complement protocol; raw cells use `raw_mode`. Traces are dropped
/// from the cell reports.
pub fn sweep(
    corpus: &Corpus,
    grid: &SweepGrid,
    tuning_fraction: f64,
    seed: u64,
    raw_mode: EvalMode,
) -> Result<SweepReport, EvalError> {
    if grid.measures.is_empty() || grid.ks.is_empty() || grid.sources.is_empty() {
        return Err(EvalError::InvalidConfig("sweep grid has an empty axis".into()));
    }
    if grid.measures.contains(&MeasureKind::AsymmetricCosine) && grid.alphas.is_empty() {
        return Err(EvalError::InvalidConfig("asymmetric cosine needs at least one alpha".into()));
    }
    if grid.ks.contains(&0) {
        return Err(EvalError::InvalidConfig("k must be at least 1".into()));
    }
    let folds = split_folds(corpus, tuning_fraction, seed)?;
    let mut evaluator = FoldEvaluator::new(corpus, &folds, Fold::Tuning, seed)?;
    let training = complement_matrix(corpus, &folds, Fold::Tuning);
    let mut cells = Vec::new();

    for &source in &grid.sources {
        let mode = if source.is_pca() { EvalMode::FoldComplement } else { raw_mode };
        let embedding = embed(&training, source)?;
        let counts = (mode == EvalMode::ExactDowndate).then(|| {
            RatingMatrix::from_rows(
                corpus.num_ingredients(),
                corpus.recipes().iter().map(|r| r.ingredients.clone()).collect(),
            )
            .cooccurrence_counts()
        });
        for &kind in &grid.measures {
            let alphas: Vec<Option<f64>> = if kind == MeasureKind::AsymmetricCosine {
                grid.alphas.iter().map(|&a| Some(a)).collect()
            } else {
                vec![None]
            };
            for alpha in alphas {
                let measure = match alpha {
                    Some(a) => Measure::new(kind, a)?,
                    None => Measure::of(kind),
                };
                let config =
                    EvalConfig { measure, k: grid.ks[0], source, fold: Fold::Tuning, tuning_fraction, seed, mode };
                let reports = match (&counts, &embedding) {
                    (Some(counts), _) => evaluator.downdated(counts, &config, &grid.ks)?,
                    (None, Some(embedding)) => evaluator.with_source(embedding, &config, &grid.ks)?,
                    (None, None) => evaluator.with_source(&training, &config, &grid.ks)?,
                };
                for mut report in reports {
                    report.trace.clear();
                    cells.push(SweepCell { measure: kind, alpha, k: report.config.k, source, report });
                }
            }
        }
    }

    let selections = select_best(&cells, grid);
    Ok(SweepReport {
        seed,
        tuning_fraction,
        raw_mode,
        grid: grid.clone(),
        cells,
        selection_rule: SELECTION_RULE.to_string(),
        selections,
        similarity_matrices_computed: evaluator.matrices_computed,
    })
}

fn select_best(cells: &[SweepCell], grid: &SweepGrid) -> Vec<Selection> {
    let mut selections = Vec::new();
    for &source in &grid.sources {
        for &kind in &grid.measures {
            let best = cells.iter().filter(|c| c.source == source && c.measure == kind).min_by(|x, y| {
                y.report
                    .recall_at_10
                    .total_cmp(&x.report.recall_at_10)
                    .then(x.report.median_rank.total_cmp(&y.report.median_rank))
                    .then(x.k.cmp(&y.k))
            });
            if let Some(cell) = best {
                selections.push(Selection {
                    measure: kind,
                    source,
                    k: cell.k,
                    alpha: cell.alpha,
                    recall_at_10: cell.report.recall_at_10,
                    median_rank: cell.report.median_rank,
                });
            }
        }
    }
    selections
}

impl SweepReport {
    pub fn summary(&self) -> String {
        let reports: Vec<EvalReport> = self.cells.iter().map(|c| c.report.clone()).collect();
        let mut out = summary_table(&reports);
        let _ = writeln!(out, "\nselection ({}):", self.selection_rule);
        for s in &self.selections {
            let alpha = s.alpha.map(|a| format!(" alpha={a}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "  {:<18} {:<14} k={:<4}{alpha}  recall@10={:.2}%  median={}",
                s.measure.to_string(),
                s.source.label(),
                s.k,
                100.0 * s.recall_at_10,
                s.median_rank
            );
        }
        out
    }
}
