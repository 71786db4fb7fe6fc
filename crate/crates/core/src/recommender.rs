//! Item-based scoring of candidate ingredients against a partial recipe.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Vocabulary;
use crate::similarity::NeighborModel;

#[derive(Debug, Error, PartialEq)]
pub enum RecommendError {
    #[error("partial recipe is empty")]
    EmptyRecipe,
    #[error("unknown ingredients: {}", .0.join(", "))]
    UnknownIngredients(Vec<String>),
    #[error("ingredient id {id} out of range for {n} ingredients")]
    InvalidId { id: u32, n: usize },
    #[error("number of recommendations must be at least 1")]
    ZeroCount,
}

/// A nonempty set of ingredient ids, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialRecipe {
    ids: Vec<u32>,
}

impl PartialRecipe {
    pub fn new(mut ids: Vec<u32>, n: usize) -> Result<Self, RecommendError> {
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            return Err(RecommendError::EmptyRecipe);
        }
        if let Some(&id) = ids.iter().find(|&&id| id as usize >= n) {
            return Err(RecommendError::InvalidId { id, n });
        }
        Ok(Self { ids })
    }

    pub fn from_names<S: AsRef<str>>(vocabulary: &Vocabulary, names: &[S]) -> Result<Self, RecommendError> {
        let (ids, unknown) = vocabulary.resolve(names);
        if !unknown.is_empty() {
            return Err(RecommendError::UnknownIngredients(unknown));
        }
        Self::new(ids, vocabulary.len())
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &id in &self.ids {
            mask[id as usize] = true;
        }
        mask
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub id: u32,
    pub name: String,
    pub fit: f64,
    pub rank: usize,
}

fn fit_with_mask(model: &NeighborModel, present: &[bool], i: usize) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for neighbor in model.of(i) {
        if present[neighbor.id as usize] {
            num += neighbor.score;
        }
        den += neighbor.score.abs();
    }
    if den == 0.0 {
        0.0
    } else {
        // Adding 0.0 turns -0.0 into 0.0 so equal fits tie-break by name.
        num / den + 0.0
    }
}

/// P(u, i): similarity-weighted share of i's neighbourhood present in the recipe.
pub fn fit_score(model: &NeighborModel, recipe: &PartialRecipe, i: u32) -> Result<f64, RecommendError> {
    let n = model.num_ingredients();
    if i as usize >= n {
        return Err(RecommendError::InvalidId { id: i, n });
    }
    if let Some(&id) = recipe.ids().iter().find(|&&id| id as usize >= n) {
        return Err(RecommendError::InvalidId { id, n });
    }
    Ok(fit_with_mask(model, &recipe.mask(n), i as usize))
}

/// Fit of every ingredient; entries for recipe members are still computed.
pub fn fit_scores(model: &NeighborModel, recipe: &PartialRecipe) -> Vec<f64> {
    let n = model.num_ingredients();
    let present = recipe.mask(n);
    (0..n).map(|i| fit_with_mask(model, &present, i)).collect()
}

fn order(fits: &[f64], names: &[String], x: usize, y: usize) -> Ordering {
    fits[y].total_cmp(&fits[x]).then_with(|| names[x].cmp(&names[y]))
}

pub fn recommend(
    model: &NeighborModel,
    vocabulary: &Vocabulary,
    recipe: &PartialRecipe,
    count: usize,
) -> Result<Vec<Recommendation>, RecommendError> {
    if count == 0 {
        return Err(RecommendError::ZeroCount);
    }
    let n = vocabulary.len();
    if let Some(&id) = recipe.ids().iter().find(|&&id| id as usize >= n) {
        return Err(RecommendError::InvalidId { id, n });
    }
    let fits = fit_scores(model, recipe);
    let names = vocabulary.names();
    let mut candidates: Vec<usize> = (0..n).filter(|&i| !recipe.contains(i as u32)).collect();
    candidates.sort_by(|&x, &y| order(&fits, names, x, y));
    Ok(candidates
        .into_iter()
        .take(count)
        .enumerate()
        .map(|(r, i)| Recommendation { id: i as u32, name: names[i].clone(), fit: fits[i], rank: r + 1 })
        .collect())
}

/// 1-based position `target` would take in the full recommendation list.
pub fn rank_of(model: &NeighborModel, names: &[String], recipe: &PartialRecipe, target: u32) -> usize {
    let fits = fit_scores(model, recipe);
    rank_in(&fits, names, recipe, target)
}

pub(crate) fn rank_in(fits: &[f64], names: &[String], recipe: &PartialRecipe, target: u32) -> usize {
    let t = target as usize;
    1 + (0..fits.len())
        .filter(|&i| i != t && !recipe.contains(i as u32))
        .filter(|&i| order(fits, names, i, t) == Ordering::Less)
        .count()
}
