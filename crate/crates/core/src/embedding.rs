//! Dense ingredient embeddings from a principal component analysis of the
//! rating matrix, with ingredients as samples and recipes as features.
//!
//! The eigendecomposition runs on the n x n ingredient Gram matrix, never on
//! anything recipe-sized. Each ingredient's score vector is `V_d sqrt(Λ_d)`,
//! so at full rank the pairwise dot products of the scores reproduce the
//! (centered) Gram matrix exactly.

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::RatingMatrix;

/// Relative cutoff below which an eigenvalue counts as rank deficiency.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Relative gap below which two loadings count as equally large.
pub const SIGN_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum EmbeddingError {
    #[error("cannot embed an all-zero rating matrix")]
    ZeroMatrix,
    #[error("requested {requested} components for {n} ingredients")]
    InvalidComponents { requested: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    /// Number of components; `None` keeps all `n`.
    pub components: Option<usize>,
    pub center: bool,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self { components: None, center: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngredientEmbedding {
    pub n: usize,
    /// Columns actually produced; may be below the request when rank deficient.
    pub d: usize,
    pub requested: usize,
    pub center: bool,
    pub num_recipes: usize,
    pub rank_deficient: bool,
    /// Row-major n x d scores.
    pub vectors: Vec<f64>,
    /// Per-recipe mean over ingredients, subtracted when centering.
    pub feature_means: Vec<f64>,
    /// Eigenvalue / (n - 1), nonincreasing.
    pub explained_variance: Vec<f64>,
}

impl IngredientEmbedding {
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.d..(i + 1) * self.d]
    }

    pub fn dot(&self, i: usize, j: usize) -> f64 {
        self.vector(i).iter().zip(self.vector(j)).map(|(a, b)| a * b).sum()
    }
}

/// Gram matrix of the (optionally centered) ingredient columns, row-major.
pub fn ingredient_gram(matrix: &RatingMatrix, center: bool) -> Vec<f64> {
    let n = matrix.num_ingredients();
    let counts = matrix.cooccurrence_counts();
    let mut gram: Vec<f64> = (0..n * n).map(|k| counts.get(k / n, k % n) as f64).collect();
    if center && n > 0 {
        // H G H with H = I - 11'/n.
        let row_means: Vec<f64> = gram.chunks(n).map(|row| row.iter().sum::<f64>() / n as f64).collect();
        let grand = row_means.iter().sum::<f64>() / n as f64;
        for i in 0..n {
            for j in 0..n {
                gram[i * n + j] += grand - row_means[i] - row_means[j];
            }
        }
    }
    gram
}

pub fn pca_embed(matrix: &RatingMatrix, config: &EmbeddingConfig) -> Result<IngredientEmbedding, EmbeddingError> {
    let n = matrix.num_ingredients();
    if n == 0 || matrix.nnz() == 0 {
        return Err(EmbeddingError::ZeroMatrix);
    }
    let requested = config.components.unwrap_or(n);
    if requested == 0 || requested > n {
        return Err(EmbeddingError::InvalidComponents { requested, n });
    }

    let gram = ingredient_gram(matrix, config.center);
    let eigen = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &gram));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]).then(a.cmp(&b)));

    let largest = eigen.eigenvalues[order[0]];
    // A centered Gram of identical columns is numerically zero, not rank n.
    let cutoff = (largest * RANK_TOLERANCE).max(f64::EPSILON * n as f64);
    let rank = order.iter().take_while(|&&k| eigen.eigenvalues[k] > cutoff).count();
    let d = requested.min(rank);
    if d < requested {
        warn!("rating matrix has numerical rank {rank}; embedding keeps {d} of {requested} components");
    }

    let mut vectors = vec![0.0; n * d];
    let mut explained_variance = Vec::with_capacity(d);
    for (c, &k) in order.iter().take(d).enumerate() {
        let lambda = eigen.eigenvalues[k];
        let column = eigen.eigenvectors.column(k);
        // Pin the sign: the largest-magnitude loading is positive. Loadings
        // equal up to rounding count as tied and the first one wins.
        let largest_loading = column.amax();
        let pivot = (0..n).find(|&i| column[i].abs() >= largest_loading * (1.0 - SIGN_TIE_TOLERANCE)).unwrap_or(0);
        let sign = if column[pivot] < 0.0 { -1.0 } else { 1.0 };
        let scale = sign * lambda.sqrt();
        for i in 0..n {
            vectors[i * d + c] = column[i] * scale;
        }
        explained_variance.push(lambda / (n.max(2) - 1) as f64);
    }

    let feature_means = if config.center {
        matrix.rows().iter().map(|row| row.len() as f64 / n as f64).collect()
    } else {
        vec![0.0; matrix.num_recipes()]
    };

    Ok(IngredientEmbedding {
        n,
        d,
        requested,
        center: config.center,
        num_recipes: matrix.num_recipes(),
        rank_deficient: d < requested,
        vectors,
        feature_means,
        explained_variance,
    })
}
