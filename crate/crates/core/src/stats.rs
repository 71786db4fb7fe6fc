//! Descriptive statistics of a cleaned corpus.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngredientFrequency {
    pub name: String,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub recipes: usize,
    pub ingredients: usize,
    /// Every ingredient, most frequent first.
    pub frequencies: Vec<IngredientFrequency>,
    /// Recipe length -> number of recipes with that length.
    pub length_histogram: BTreeMap<usize, usize>,
    pub min_length: usize,
    pub max_length: usize,
    pub mean_length: f64,
    pub median_length: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub top: Vec<IngredientFrequency>,
    pub cuisines: BTreeMap<String, usize>,
}

pub fn corpus_stats(corpus: &Corpus, top_n: usize) -> StatsReport {
    let vocab = corpus.vocabulary();
    let mut frequencies: Vec<IngredientFrequency> = vocab
        .names()
        .iter()
        .zip(vocab.counts())
        .map(|(name, &count)| IngredientFrequency { name: name.clone(), count })
        .collect();
    frequencies.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.name.cmp(&b.name)));

    let lengths: Vec<f64> = corpus.recipes().iter().map(|r| r.ingredients.len() as f64).collect();
    let mut length_histogram = BTreeMap::new();
    let mut cuisines = BTreeMap::new();
    for recipe in corpus.recipes() {
        *length_histogram.entry(recipe.ingredients.len()).or_insert(0) += 1;
        *cuisines.entry(recipe.cuisine.clone()).or_insert(0) += 1;
    }

    StatsReport {
        recipes: corpus.num_recipes(),
        ingredients: corpus.num_ingredients(),
        top: frequencies.iter().take(top_n).cloned().collect(),
        frequencies,
        min_length: length_histogram.keys().next().copied().unwrap_or(0),
        max_length: length_histogram.keys().next_back().copied().unwrap_or(0),
        mean_length: mean(&lengths),
        median_length: median(&lengths),
        skewness: sample_skewness(&lengths),
        excess_kurtosis: sample_excess_kurtosis(&lengths),
        length_histogram,
        cuisines,
    }
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Midpoint of the two central values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    }
}

fn central_moments(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mu = mean(values);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mu;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m2 / n, m3 / n, m4 / n)
}

/// Bias-adjusted Fisher-Pearson skewness (G1). Zero for constant samples.
pub fn sample_skewness(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 3 {
        return 0.0;
    }
    let (m2, m3, _) = central_moments(values);
    if m2 <= f64::EPSILON * mean(values).abs().max(1.0) {
        return 0.0;
    }
    let g1 = m3 / m2.powf(1.5);
    g1 * (n * (n - 1.0)).sqrt() / (n - 2.0)
}

/// Bias-adjusted excess kurtosis (G2). Zero for constant samples.
pub fn sample_excess_kurtosis(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 4 {
        return 0.0;
    }
    let (m2, _, m4) = central_moments(values);
    if m2 <= f64::EPSILON * mean(values).abs().max(1.0) {
        return 0.0;
    }
    let g2 = m4 / (m2 * m2) - 3.0;
    ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0))
}

impl StatsReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "recipes             {:>10}", self.recipes);
        let _ = writeln!(out, "ingredients         {:>10}", self.ingredients);
        let _ = writeln!(out, "recipe length min   {:>10}", self.min_length);
        let _ = writeln!(out, "recipe length max   {:>10}", self.max_length);
        let _ = writeln!(out, "recipe length mean  {:>10.3}", self.mean_length);
        let _ = writeln!(out, "recipe length median{:>10.1}", self.median_length);
        let _ = writeln!(out, "skewness            {:>10.3}", self.skewness);
        let _ = writeln!(out, "excess kurtosis     {:>10.3}", self.excess_kurtosis);
        let _ = writeln!(out, "\nmost frequent ingredients");
        for (rank, f) in self.top.iter().enumerate() {
            let _ = writeln!(out, "{:>4}  {:<32} {:>7}", rank + 1, f.name, f.count);
        }
        let _ = writeln!(out, "\nrecipe length histogram");
        for (len, count) in &self.length_histogram {
            let _ = writeln!(out, "{len:>4}  {count:>7}");
        }
        let _ = writeln!(out, "\ncuisines");
        for (cuisine, count) in &self.cuisines {
            let _ = writeln!(out, "  {cuisine:<24} {count:>7}");
        }
        out
    }
}
