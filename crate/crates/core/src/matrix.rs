use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;

/// Sparse binary recipe x ingredient matrix with both row and column views.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingMatrix {
    n: usize,
    rows: Vec<Vec<u32>>,
    cols: Vec<Vec<u32>>,
}

impl RatingMatrix {
    /// `rows[u]` lists the ingredients of recipe `u`; ids must be `< n`.
    pub fn from_rows(n: usize, rows: Vec<Vec<u32>>) -> Self {
        let mut cols = vec![Vec::new(); n];
        let rows: Vec<Vec<u32>> = rows
            .into_iter()
            .map(|mut row| {
                row.sort_unstable();
                row.dedup();
                row
            })
            .collect();
        for (u, row) in rows.iter().enumerate() {
            for &i in row {
                assert!((i as usize) < n, "ingredient {i} out of range for {n} columns");
                cols[i as usize].push(u as u32);
            }
        }
        Self { n, rows, cols }
    }

    pub fn num_recipes(&self) -> usize {
        self.rows.len()
    }

    pub fn num_ingredients(&self) -> usize {
        self.n
    }

    pub fn row(&self, recipe: usize) -> &[u32] {
        &self.rows[recipe]
    }

    pub fn column(&self, ingredient: usize) -> &[u32] {
        &self.cols[ingredient]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn contains(&self, recipe: usize, ingredient: u32) -> bool {
        self.rows[recipe].binary_search(&ingredient).is_ok()
    }

    /// |U(i)|
    pub fn column_count(&self, ingredient: usize) -> usize {
        self.cols[ingredient].len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn density(&self) -> f64 {
        if self.rows.is_empty() || self.n == 0 {
            return 0.0;
        }
        self.nnz() as f64 / (self.rows.len() * self.n) as f64
    }

    /// |U(i) ∩ U(j)| by merging the two sorted column lists.
    pub fn cooccurrence(&self, i: usize, j: usize) -> usize {
        sorted_intersection_len(&self.cols[i], &self.cols[j])
    }

    /// Dense co-occurrence counts, accumulated row by row.
    pub fn cooccurrence_counts(&self) -> CooccurrenceCounts {
        let mut counts = CooccurrenceCounts::zeros(self.n, 0);
        for row in &self.rows {
            counts.add_recipe(row);
        }
        counts
    }
}

pub fn build_matrix(corpus: &Corpus) -> RatingMatrix {
    RatingMatrix::from_rows(corpus.num_ingredients(), corpus.recipes().iter().map(|r| r.ingredients.clone()).collect())
}

pub(crate) fn sorted_intersection_len(a: &[u32], b: &[u32]) -> usize {
    let (mut x, mut y, mut count) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                x += 1;
                y += 1;
            }
        }
    }
    count
}

/// Symmetric n x n co-occurrence table plus the recipe count it was built from.
/// The diagonal holds |U(i)|.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CooccurrenceCounts {
    n: usize,
    recipes: usize,
    counts: Vec<u32>,
}

impl CooccurrenceCounts {
    pub fn zeros(n: usize, recipes: usize) -> Self {
        Self { n, recipes, counts: vec![0; n * n] }
    }

    pub fn num_ingredients(&self) -> usize {
        self.n
    }

    pub fn num_recipes(&self) -> usize {
        self.recipes
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.n + j]
    }

    pub fn add_recipe(&mut self, ingredients: &[u32]) {
        self.recipes += 1;
        for &i in ingredients {
            let base = i as usize * self.n;
            for &j in ingredients {
                self.counts[base + j as usize] += 1;
            }
        }
    }

    /// Subtracts one recipe's contribution; `ingredients` must have been added.
    pub fn remove_recipe(&mut self, ingredients: &[u32]) {
        self.recipes -= 1;
        for &i in ingredients {
            let base = i as usize * self.n;
            for &j in ingredients {
                self.counts[base + j as usize] -= 1;
            }
        }
    }
}
