//! Raw recipe ingestion and the cleaning / merging / filtering pipeline that
//! turns a recipe dump into a [`Corpus`].

use std::collections::{BTreeMap, HashMap, HashSet};

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed JSON at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("schema error in recipe #{index}: {message}")]
    Schema { index: usize, message: String },
    #[error("expected a JSON array of recipes")]
    NotAnArray,
    #[error("duplicate recipe id {0}")]
    DuplicateId(i64),
    #[error("pipeline produced an empty corpus")]
    EmptyCorpus,
    #[error("invalid corpus: {0}")]
    Invalid(String),
}

/// One element of the input document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecipe {
    pub id: i64,
    pub cuisine: String,
    pub ingredients: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Raw names must appear in at least this many recipes.
    pub min_raw_count: usize,
    pub substring_ingredient_threshold: usize,
    pub substring_recipe_threshold: usize,
    /// Final ingredients must appear in at least this many recipes.
    pub min_final_count: usize,
    pub stop_ingredients: Vec<String>,
    pub min_recipe_size: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            min_raw_count: 4,
            substring_ingredient_threshold: 30,
            substring_recipe_threshold: 1000,
            min_final_count: 251,
            stop_ingredients: vec!["salt".to_string(), "water".to_string()],
            min_recipe_size: 3,
        }
    }
}

/// Ingredient id <-> name mapping together with per-ingredient recipe counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    names: Vec<String>,
    counts: Vec<u32>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn new(names: Vec<String>, counts: Vec<u32>) -> Result<Self, CorpusError> {
        if names.len() != counts.len() {
            return Err(CorpusError::Invalid(format!("{} names but {} counts", names.len(), counts.len())));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (id, name) in names.iter().enumerate() {
            if index.insert(name.clone(), id as u32).is_some() {
                return Err(CorpusError::Invalid(format!("duplicate ingredient name {name:?}")));
            }
        }
        Ok(Self { names, counts, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn count(&self, id: u32) -> u32 {
        self.counts[id as usize]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    /// Looks a user-supplied name up, falling back to the normalized form.
    /// Underscores are accepted as word separators.
    pub fn lookup(&self, name: &str) -> Option<u32> {
        self.id(name).or_else(|| {
            let normalized = normalize_name(&name.replace('_', " "))?;
            self.id(&normalized)
        })
    }

    /// Splits `names` into resolved ids (first occurrence order, deduplicated)
    /// and the names that could not be resolved.
    pub fn resolve<S: AsRef<str>>(&self, names: &[S]) -> (Vec<u32>, Vec<String>) {
        let mut ids = Vec::new();
        let mut unknown = Vec::new();
        for name in names {
            match self.lookup(name.as_ref()) {
                Some(id) if !ids.contains(&id) => ids.push(id),
                Some(_) => {}
                None => unknown.push(name.as_ref().to_string()),
            }
        }
        (ids, unknown)
    }
}

/// A cleaned recipe: ingredient ids are sorted and distinct.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipe {
    pub id: i64,
    pub cuisine: String,
    pub ingredients: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    recipes: Vec<Recipe>,
    vocabulary: Vocabulary,
}

impl Corpus {
    /// Builds a corpus from ingredient names and recipes over those names,
    /// recomputing counts and checking every corpus invariant.
    pub fn from_parts(names: Vec<String>, mut recipes: Vec<Recipe>) -> Result<Self, CorpusError> {
        let n = names.len();
        let mut counts = vec![0u32; n];
        let mut seen_ids = HashSet::with_capacity(recipes.len());
        for recipe in &mut recipes {
            if !seen_ids.insert(recipe.id) {
                return Err(CorpusError::DuplicateId(recipe.id));
            }
            recipe.ingredients.sort_unstable();
            recipe.ingredients.dedup();
            for &i in &recipe.ingredients {
                let slot = counts.get_mut(i as usize).ok_or_else(|| {
                    CorpusError::Invalid(format!("recipe {} references ingredient {i} of {n}", recipe.id))
                })?;
                *slot += 1;
            }
        }
        if let Some(i) = counts.iter().position(|&c| c == 0) {
            return Err(CorpusError::Invalid(format!("ingredient {:?} appears in no recipe", names[i])));
        }
        let vocabulary = Vocabulary::new(names, counts)?;
        Ok(Self { recipes, vocabulary })
    }

    pub fn recipes(&self) -> &[Recipe] {
        &self.recipes
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn num_recipes(&self) -> usize {
        self.recipes.len()
    }

    pub fn num_ingredients(&self) -> usize {
        self.vocabulary.len()
    }
}

/// Recipe and distinct-ingredient counts after one pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCount {
    pub stage: String,
    pub recipes: usize,
    pub ingredients: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PipelineReport {
    pub stages: Vec<StageCount>,
}

impl PipelineReport {
    fn record(&mut self, stage: &str, recipes: &[RawRecipe]) {
        let stage =
            StageCount { stage: stage.to_string(), recipes: recipes.len(), ingredients: distinct_names(recipes) };
        debug!("{}: {} recipes, {} ingredients", stage.stage, stage.recipes, stage.ingredients);
        self.stages.push(stage);
    }
}

fn distinct_names(recipes: &[RawRecipe]) -> usize {
    recipes.iter().flat_map(|r| r.ingredients.iter().map(String::as_str)).collect::<HashSet<_>>().len()
}

pub fn parse_raw(bytes: &[u8]) -> Result<Vec<RawRecipe>, CorpusError> {
    let value: serde_json::Value = serde_json::from_slice(bytes)
        .map_err(|e| CorpusError::Parse { offset: byte_offset(bytes, e.line(), e.column()), message: e.to_string() })?;
    let serde_json::Value::Array(items) = value else {
        return Err(CorpusError::NotAnArray);
    };
    let mut seen = HashSet::with_capacity(items.len());
    items
        .into_iter()
        .enumerate()
        .map(|(index, item)| {
            let recipe: RawRecipe =
                serde_json::from_value(item).map_err(|e| CorpusError::Schema { index, message: e.to_string() })?;
            if !seen.insert(recipe.id) {
                return Err(CorpusError::DuplicateId(recipe.id));
            }
            Ok(recipe)
        })
        .collect()
}

// serde_json reports 1-based line and column; turn them into a byte offset.
fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let line_start: usize = bytes.split(|&b| b == b'\n').take(line.saturating_sub(1)).map(|l| l.len() + 1).sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}

/// Canonical form of one ingredient name, or `None` if nothing is left.
///
/// Lowercases, turns digits and punctuation into separators (apostrophes are
/// deleted outright), drops the token `oz` and collapses whitespace. Hyphens
/// inside tokens survive.
pub fn normalize_name(name: &str) -> Option<String> {
    let mut cleaned = String::with_capacity(name.len());
    for ch in name.chars().flat_map(char::to_lowercase) {
        match ch {
            'a'..='z' | '-' => cleaned.push(ch),
            '\'' | '\u{2019}' => {}
            _ => cleaned.push(' '),
        }
    }
    let tokens: Vec<&str> =
        cleaned.split_whitespace().map(|t| t.trim_matches('-')).filter(|t| !t.is_empty() && *t != "oz").collect();
    if tokens.is_empty() {
        None
    } else {
        Some(tokens.join(" "))
    }
}

pub fn normalize_names(recipes: Vec<RawRecipe>) -> Vec<RawRecipe> {
    recipes
        .into_iter()
        .map(|mut recipe| {
            let mut seen = HashSet::new();
            let mut names = Vec::with_capacity(recipe.ingredients.len());
            for raw in &recipe.ingredients {
                match normalize_name(raw) {
                    Some(name) => {
                        if seen.insert(name.clone()) {
                            names.push(name);
                        }
                    }
                    None => debug!("recipe {}: dropping ingredient {raw:?}, empty after cleaning", recipe.id),
                }
            }
            recipe.ingredients = names;
            recipe
        })
        .collect()
}

fn recipe_counts(recipes: &[RawRecipe]) -> HashMap<&str, usize> {
    let mut counts = HashMap::new();
    for recipe in recipes {
        let distinct: HashSet<&str> = recipe.ingredients.iter().map(String::as_str).collect();
        for name in distinct {
            *counts.entry(name).or_insert(0) += 1;
        }
    }
    counts
}

pub fn drop_rare_raw(recipes: Vec<RawRecipe>, min_raw_count: usize) -> Vec<RawRecipe> {
    if min_raw_count == 0 {
        return recipes;
    }
    let keep: HashSet<String> = recipe_counts(&recipes)
        .into_iter()
        .filter(|&(_, c)| c >= min_raw_count)
        .map(|(name, _)| name.to_string())
        .collect();
    recipes
        .into_iter()
        .map(|mut recipe| {
            recipe.ingredients.retain(|name| keep.contains(name));
            recipe
        })
        .collect()
}

/// Token-level view of the distinct ingredient names of a recipe list.
struct NameTable {
    /// Distinct names in lexicographic order.
    names: Vec<String>,
    tokens: Vec<Vec<u32>>,
    /// Recipe indices per name.
    recipes: Vec<Vec<u32>>,
    /// `spans[name][start * len + (width - 1)]` is the id of that token span.
    spans: Vec<Vec<u32>>,
    num_spans: usize,
}

impl NameTable {
    fn new(recipes: &[RawRecipe]) -> Self {
        let mut by_name: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
        for (r, recipe) in recipes.iter().enumerate() {
            for name in &recipe.ingredients {
                let list = by_name.entry(name.as_str()).or_default();
                if list.last() != Some(&(r as u32)) {
                    list.push(r as u32);
                }
            }
        }
        let mut vocab: HashMap<&str, u32> = HashMap::new();
        let mut span_ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut names = Vec::with_capacity(by_name.len());
        let mut tokens = Vec::with_capacity(by_name.len());
        let mut recipe_lists = Vec::with_capacity(by_name.len());
        let mut spans = Vec::with_capacity(by_name.len());
        for (name, list) in by_name {
            let toks: Vec<u32> = name
                .split(' ')
                .map(|t| {
                    let next = vocab.len() as u32;
                    *vocab.entry(t).or_insert(next)
                })
                .collect();
            let len = toks.len();
            let mut table = vec![u32::MAX; len * len];
            for start in 0..len {
                for width in 1..=len - start {
                    let next = span_ids.len() as u32;
                    let id = *span_ids.entry(toks[start..start + width].to_vec()).or_insert(next);
                    table[start * len + width - 1] = id;
                }
            }
            names.push(name.to_string());
            tokens.push(toks);
            recipe_lists.push(list);
            spans.push(table);
        }
        Self { names, tokens, recipes: recipe_lists, spans, num_spans: span_ids.len() }
    }

    fn span(&self, name: usize, start: usize, width: usize) -> u32 {
        let len = self.tokens[name].len();
        self.spans[name][start * len + width - 1]
    }

    /// Marks every longest common token span of each pair of distinct names.
    fn candidate_spans(&self) -> Vec<bool> {
        let n = self.names.len();
        (0..n)
            .into_par_iter()
            .fold(
                || (vec![false; self.num_spans], Vec::new()),
                |(mut marks, mut dp), a| {
                    for b in a + 1..n {
                        self.mark_longest_common(a, b, &mut dp, &mut marks);
                    }
                    (marks, dp)
                },
            )
            .map(|(marks, _)| marks)
            .reduce(
                || vec![false; self.num_spans],
                |mut acc, marks| {
                    acc.iter_mut().zip(marks).for_each(|(x, y)| *x |= y);
                    acc
                },
            )
    }

    fn mark_longest_common(&self, a: usize, b: usize, dp: &mut Vec<u32>, marks: &mut [bool]) {
        let (x, y) = (&self.tokens[a], &self.tokens[b]);
        let cols = y.len() + 1;
        dp.clear();
        dp.resize((x.len() + 1) * cols, 0);
        let mut best = 0;
        for i in 1..=x.len() {
            for j in 1..=y.len() {
                if x[i - 1] == y[j - 1] {
                    let v = dp[(i - 1) * cols + j - 1] + 1;
                    dp[i * cols + j] = v;
                    best = best.max(v);
                }
            }
        }
        if best == 0 {
            return;
        }
        let width = best as usize;
        for i in width..=x.len() {
            if (1..=y.len()).any(|j| dp[i * cols + j] == best) {
                marks[self.span(a, i - width, width) as usize] = true;
            }
        }
    }

    /// Spans occurring in more than `name_threshold` names or in names that
    /// together cover more than `recipe_threshold` recipes.
    fn dominant_spans(&self, candidates: &[bool], name_threshold: usize, recipe_threshold: usize) -> Vec<bool> {
        let mut holders: Vec<Vec<u32>> = vec![Vec::new(); self.num_spans];
        for (name, table) in self.spans.iter().enumerate() {
            let mut own: Vec<u32> = table.iter().copied().filter(|&s| s != u32::MAX).collect();
            own.sort_unstable();
            own.dedup();
            for s in own {
                if candidates[s as usize] {
                    holders[s as usize].push(name as u32);
                }
            }
        }
        let num_recipes = self.recipes.iter().flatten().map(|&r| r as usize + 1).max().unwrap_or(0);
        let mut stamp = vec![u32::MAX; num_recipes];
        holders
            .iter()
            .enumerate()
            .map(|(s, names)| {
                if names.len() > name_threshold {
                    return true;
                }
                let mut covered = 0;
                for &name in names {
                    for &r in &self.recipes[name as usize] {
                        if stamp[r as usize] != s as u32 {
                            stamp[r as usize] = s as u32;
                            covered += 1;
                        }
                    }
                }
                covered > recipe_threshold
            })
            .collect()
    }

    /// Keeps only the tokens covered by a dominant span; a name with no
    /// dominant span is returned unchanged.
    fn rewrite(&self, name: usize, dominant: &[bool]) -> String {
        let len = self.tokens[name].len();
        let mut covered = vec![false; len];
        for start in 0..len {
            for width in 1..=len - start {
                if dominant[self.span(name, start, width) as usize] {
                    covered[start..start + width].iter_mut().for_each(|c| *c = true);
                }
            }
        }
        if !covered.iter().any(|&c| c) {
            return self.names[name].clone();
        }
        self.names[name]
            .split(' ')
            .zip(&covered)
            .filter(|(_, &keep)| keep)
            .map(|(t, _)| t)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Collapses name variants onto the frequent token spans they share with
/// other names, merging ingredients whose rewritten names coincide.
pub fn merge_by_substrings(recipes: Vec<RawRecipe>, config: &PipelineConfig) -> Vec<RawRecipe> {
    let table = NameTable::new(&recipes);
    let candidates = table.candidate_spans();
    let dominant =
        table.dominant_spans(&candidates, config.substring_ingredient_threshold, config.substring_recipe_threshold);
    let rewrites: HashMap<&str, String> =
        (0..table.names.len()).map(|name| (table.names[name].as_str(), table.rewrite(name, &dominant))).collect();
    debug!(
        "substring merge: {} candidate spans, {} dominant",
        candidates.iter().filter(|&&c| c).count(),
        dominant.iter().filter(|&&d| d).count()
    );
    let mapped: Vec<RawRecipe> = recipes
        .iter()
        .map(|recipe| {
            let mut seen = HashSet::new();
            let ingredients = recipe
                .ingredients
                .iter()
                .map(|name| rewrites[name.as_str()].clone())
                .filter(|name| seen.insert(name.clone()))
                .collect();
            RawRecipe { id: recipe.id, cuisine: recipe.cuisine.clone(), ingredients }
        })
        .collect();
    mapped
}

/// Frequency, stop-list and recipe-size filtering, iterated to a fixed point.
/// Ingredient ids are assigned in lexicographic name order.
pub fn filter_corpus(recipes: Vec<RawRecipe>, config: &PipelineConfig) -> Result<Corpus, CorpusError> {
    let stop: HashSet<&str> = config.stop_ingredients.iter().map(String::as_str).collect();
    let min_count = config.min_final_count.max(1);

    let mut names: BTreeMap<&str, u32> = BTreeMap::new();
    for recipe in &recipes {
        for name in &recipe.ingredients {
            names.insert(name.as_str(), 0);
        }
    }
    let all_names: Vec<&str> = names.keys().copied().collect();
    for (i, name) in all_names.iter().enumerate() {
        names.insert(name, i as u32);
    }
    let mut sets: Vec<Vec<u32>> = recipes
        .iter()
        .map(|r| {
            let mut ids: Vec<u32> = r.ingredients.iter().map(|n| names[n.as_str()]).collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        })
        .collect();
    let mut alive_recipe = vec![true; recipes.len()];
    let mut alive_name: Vec<bool> = all_names.iter().map(|n| !stop.contains(n)).collect();

    loop {
        let mut counts = vec![0usize; all_names.len()];
        for (set, _) in sets.iter().zip(&alive_recipe).filter(|(_, &a)| a) {
            for &i in set {
                counts[i as usize] += 1;
            }
        }
        let mut changed = false;
        for (alive, &count) in alive_name.iter_mut().zip(&counts) {
            if *alive && count < min_count {
                *alive = false;
                changed = true;
            }
        }
        for (set, alive) in sets.iter_mut().zip(alive_recipe.iter_mut()) {
            if !*alive {
                continue;
            }
            set.retain(|&i| alive_name[i as usize]);
            if set.len() < config.min_recipe_size || set.is_empty() {
                *alive = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut dense = vec![u32::MAX; all_names.len()];
    let mut kept_names = Vec::new();
    for (i, name) in all_names.iter().enumerate() {
        if alive_name[i] {
            dense[i] = kept_names.len() as u32;
            kept_names.push(name.to_string());
        }
    }
    let kept: Vec<Recipe> = recipes
        .iter()
        .zip(sets)
        .zip(&alive_recipe)
        .filter(|(_, &alive)| alive)
        .map(|((raw, set), _)| Recipe {
            id: raw.id,
            cuisine: raw.cuisine.clone(),
            ingredients: set.iter().map(|&i| dense[i as usize]).collect(),
        })
        .collect();
    if kept.is_empty() || kept_names.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Corpus::from_parts(kept_names, kept)
}

/// Runs every stage in order, recording counts after each.
pub fn run_pipeline(raw: Vec<RawRecipe>, config: &PipelineConfig) -> Result<(Corpus, PipelineReport), CorpusError> {
    let mut report = PipelineReport::default();
    report.record("raw", &raw);
    let recipes = normalize_names(raw);
    report.record("normalized", &recipes);
    let recipes = drop_rare_raw(recipes, config.min_raw_count);
    report.record("rare_dropped", &recipes);
    let recipes = merge_by_substrings(recipes, config);
    report.record("merged", &recipes);
    let corpus = filter_corpus(recipes, config)?;
    report.stages.push(StageCount {
        stage: "filtered".to_string(),
        recipes: corpus.num_recipes(),
        ingredients: corpus.num_ingredients(),
    });
    Ok((corpus, report))
}
