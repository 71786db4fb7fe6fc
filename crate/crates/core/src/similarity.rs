//! Ingredient-ingredient similarity and neighbourhood selection.
//!
//! Every measure is written in terms of three inner products of the two
//! ingredient vectors `x` and `y`: `c = x·y`, `a = x·x`, `b = y·y`, plus the
//! recipe count `m`. On binary columns `c` is the co-occurrence count and
//! `a`, `b` are the ingredient frequencies, so the formulas are the usual
//! set-based definitions; on dense embeddings the same expressions apply
//! unchanged.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::IngredientEmbedding;
use crate::matrix::RatingMatrix;

/// Score of a pair that carries no usable similarity.
pub const NEG_INF: f64 = f64::NEG_INFINITY;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("similarity of ingredient {0} with itself is undefined")]
    SelfPair(usize),
    #[error("ingredient {index} out of range for {n} ingredients")]
    OutOfRange { index: usize, n: usize },
    #[error("ingredient {0} has a non-finite vector entry")]
    NonFinite(usize),
    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("unknown similarity measure {0:?}")]
    UnknownMeasure(String),
    #[error("neighbour count must be at least 1")]
    ZeroNeighbors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Cosine,
    AsymmetricCosine,
    Jaccard,
    Pmi,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 4] = [Self::Cosine, Self::AsymmetricCosine, Self::Jaccard, Self::Pmi];

    pub fn is_symmetric(self) -> bool {
        self != Self::AsymmetricCosine
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Self::Cosine => "cs",
            Self::AsymmetricCosine => "acs",
            Self::Jaccard => "js",
            Self::Pmi => "pmi",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Cosine => "cosine",
            Self::AsymmetricCosine => "asymmetric_cosine",
            Self::Jaccard => "jaccard",
            Self::Pmi => "pmi",
        })
    }
}

impl FromStr for MeasureKind {
    type Err = SimilarityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "cs" | "cosine" => Ok(Self::Cosine),
            "acs" | "asymmetric_cosine" => Ok(Self::AsymmetricCosine),
            "js" | "jaccard" => Ok(Self::Jaccard),
            "pmi" => Ok(Self::Pmi),
            _ => Err(SimilarityError::UnknownMeasure(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub kind: MeasureKind,
    /// Only read by the asymmetric cosine.
    pub alpha: f64,
}

impl Measure {
    pub fn new(kind: MeasureKind, alpha: f64) -> Result<Self, SimilarityError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(SimilarityError::InvalidAlpha(alpha));
        }
        Ok(Self { kind, alpha })
    }

    pub fn of(kind: MeasureKind) -> Self {
        Self { kind, alpha: DEFAULT_ALPHA }
    }

    pub fn asymmetric_cosine(alpha: f64) -> Result<Self, SimilarityError> {
        Self::new(MeasureKind::AsymmetricCosine, alpha)
    }

    /// Scores a pair from its inner products `c = x·y`, `a = x·x`, `b = y·y`
    /// over `m` recipes.
    pub fn score(&self, c: f64, a: f64, b: f64, m: f64) -> f64 {
        if a <= 0.0 || b <= 0.0 {
            return NEG_INF;
        }
        match self.kind {
            MeasureKind::Cosine => c / (a * b).sqrt(),
            MeasureKind::AsymmetricCosine => {
                if self.alpha == 0.5 {
                    c / (a * b).sqrt()
                } else {
                    c / (a.powf(self.alpha) * b.powf(1.0 - self.alpha))
                }
            }
            MeasureKind::Jaccard => c / (a + b - c),
            MeasureKind::Pmi => {
                if c <= 0.0 {
                    NEG_INF
                } else {
                    (c * m / (a * b)).ln()
                }
            }
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind == MeasureKind::AsymmetricCosine {
            write!(f, "{}(alpha={})", self.kind, self.alpha)
        } else {
            write!(f, "{}", self.kind)
        }
    }
}

/// Which vectors the similarities were computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceDescriptor {
    Raw,
    Pca { components: usize, requested: usize, center: bool },
}

/// Ingredient vectors that similarities can be computed over.
pub trait VectorSource: Sync {
    fn num_ingredients(&self) -> usize;
    fn num_recipes(&self) -> usize;
    fn dot(&self, i: usize, j: usize) -> f64;
    fn descriptor(&self) -> SourceDescriptor;

    /// Index of the first ingredient whose vector has a non-finite entry.
    fn first_non_finite(&self) -> Option<usize> {
        None
    }

    fn is_finite(&self, _i: usize) -> bool {
        true
    }
}

impl VectorSource for RatingMatrix {
    fn num_ingredients(&self) -> usize {
        RatingMatrix::num_ingredients(self)
    }

    fn num_recipes(&self) -> usize {
        RatingMatrix::num_recipes(self)
    }

    fn dot(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.column_count(i) as f64
        } else {
            self.cooccurrence(i, j) as f64
        }
    }

    fn descriptor(&self) -> SourceDescriptor {
        SourceDescriptor::Raw
    }
}

impl VectorSource for IngredientEmbedding {
    fn num_ingredients(&self) -> usize {
        self.n
    }

    fn num_recipes(&self) -> usize {
        self.num_recipes
    }

    fn dot(&self, i: usize, j: usize) -> f64 {
        IngredientEmbedding::dot(self, i, j)
    }

    fn descriptor(&self) -> SourceDescriptor {
        SourceDescriptor::Pca { components: self.d, requested: self.requested, center: self.center }
    }

    fn first_non_finite(&self) -> Option<usize> {
        (0..self.n).find(|&i| !self.is_finite(i))
    }

    fn is_finite(&self, i: usize) -> bool {
        self.vector(i).iter().all(|v| v.is_finite())
    }
}

pub fn similarity_pair<S: VectorSource + ?Sized>(
    source: &S,
    i: usize,
    j: usize,
    measure: &Measure,
) -> Result<f64, SimilarityError> {
    let n = source.num_ingredients();
    for index in [i, j] {
        if index >= n {
            return Err(SimilarityError::OutOfRange { index, n });
        }
        if !source.is_finite(index) {
            return Err(SimilarityError::NonFinite(index));
        }
    }
    if i == j {
        return Err(SimilarityError::SelfPair(i));
    }
    Ok(measure.score(source.dot(i, j), source.dot(i, i), source.dot(j, j), source.num_recipes() as f64))
}

/// Dense n x n scores; the diagonal holds [`NEG_INF`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    scores: Vec<f64>,
    measure: Measure,
    source: SourceDescriptor,
    pairs_computed: usize,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.scores[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.scores[i * self.n..(i + 1) * self.n]
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn source(&self) -> SourceDescriptor {
        self.source
    }

    /// Number of unordered pairs whose inner product was evaluated.
    pub fn pairs_computed(&self) -> usize {
        self.pairs_computed
    }

    /// Assembles a matrix from precomputed scores; the diagonal is overwritten.
    pub fn from_scores(n: usize, mut scores: Vec<f64>, measure: Measure, source: SourceDescriptor) -> Self {
        assert_eq!(scores.len(), n * n);
        for i in 0..n {
            scores[i * n + i] = NEG_INF;
        }
        Self { n, scores, measure, source, pairs_computed: 0 }
    }
}

pub fn similarity_matrix<S: VectorSource + ?Sized>(
    source: &S,
    measure: &Measure,
) -> Result<SimilarityMatrix, SimilarityError> {
    if let Some(i) = source.first_non_finite() {
        return Err(SimilarityError::NonFinite(i));
    }
    let n = source.num_ingredients();
    let m = source.num_recipes() as f64;
    let norms: Vec<f64> = (0..n).map(|i| source.dot(i, i)).collect();
    // Inner products of the upper triangle, one row per task.
    let upper: Vec<Vec<f64>> = (0..n).into_par_iter().map(|i| (i + 1..n).map(|j| source.dot(i, j)).collect()).collect();

    let mut scores = vec![NEG_INF; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (offset, &c) in row.iter().enumerate() {
            let j = i + 1 + offset;
            let forward = measure.score(c, norms[i], norms[j], m);
            scores[i * n + j] = forward;
            scores[j * n + i] =
                if measure.kind.is_symmetric() { forward } else { measure.score(c, norms[j], norms[i], m) };
        }
    }
    Ok(SimilarityMatrix {
        n,
        scores,
        measure: *measure,
        source: source.descriptor(),
        pairs_computed: n * n.saturating_sub(1) / 2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(u32, f64)", into = "(u32, f64)")]
pub struct Neighbor {
    pub id: u32,
    pub score: f64,
}

impl From<(u32, f64)> for Neighbor {
    fn from((id, score): (u32, f64)) -> Self {
        Self { id, score }
    }
}

impl From<Neighbor> for (u32, f64) {
    fn from(n: Neighbor) -> Self {
        (n.id, n.score)
    }
}

/// Per-ingredient k nearest neighbours, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborModel {
    pub k: usize,
    pub measure: Measure,
    pub source: SourceDescriptor,
    pub neighbors: Vec<Vec<Neighbor>>,
}

impl NeighborModel {
    pub fn num_ingredients(&self) -> usize {
        self.neighbors.len()
    }

    pub fn of(&self, i: usize) -> &[Neighbor] {
        &self.neighbors[i]
    }

    /// The same model restricted to the first `k` neighbours of each list.
    pub fn truncated(&self, k: usize) -> NeighborModel {
        NeighborModel {
            k,
            measure: self.measure,
            source: self.source,
            neighbors: self.neighbors.iter().map(|list| list[..list.len().min(k)].to_vec()).collect(),
        }
    }
}

fn neighbor_order(names: &[String]) -> impl Fn(&Neighbor, &Neighbor) -> std::cmp::Ordering + '_ {
    move |x, y| y.score.total_cmp(&x.score).then_with(|| names[x.id as usize].cmp(&names[y.id as usize]))
}

/// Neighbour list of one ingredient from a row of scores: the `k` best by
/// score descending, ties by name ascending, never itself or [`NEG_INF`].
pub(crate) fn neighbors_from_row(i: usize, row: &[f64], k: usize, names: &[String]) -> Vec<Neighbor> {
    let mut list: Vec<Neighbor> = row
        .iter()
        .enumerate()
        .filter(|&(j, s)| j != i && *s != NEG_INF && !s.is_nan())
        .map(|(j, &score)| Neighbor { id: j as u32, score })
        .collect();
    let order = neighbor_order(names);
    if k == 0 {
        list.clear();
    } else if list.len() > k {
        list.select_nth_unstable_by(k - 1, &order);
        list.truncate(k);
    }
    list.sort_by(&order);
    list
}

pub fn top_k_neighbors(sim: &SimilarityMatrix, k: usize, names: &[String]) -> Result<NeighborModel, SimilarityError> {
    if k == 0 {
        return Err(SimilarityError::ZeroNeighbors);
    }
    assert_eq!(names.len(), sim.len(), "one name per ingredient");
    let neighbors = (0..sim.len()).into_par_iter().map(|i| neighbors_from_row(i, sim.row(i), k, names)).collect();
    Ok(NeighborModel { k, measure: sim.measure, source: sim.source, neighbors })
}

/// Similarity matrix and top-k selection in one step.
pub fn build_neighbor_model<S: VectorSource + ?Sized>(
    source: &S,
    measure: &Measure,
    k: usize,
    names: &[String],
) -> Result<NeighborModel, SimilarityError> {
    if k == 0 {
        return Err(SimilarityError::ZeroNeighbors);
    }
    top_k_neighbors(&similarity_matrix(source, measure)?, k, names)
}
