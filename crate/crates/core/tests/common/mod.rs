//! Independent reference implementations and the property checks built on
//! them. Shared by the regular tests and the acceptance harness; each check
//! returns a one-line summary or the first discrepancy found.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ingredient_cf::embedding::{pca_embed, EmbeddingConfig};
use ingredient_cf::evaluation::{evaluate_fold, DowndatedCounts, EvalConfig, EvalMode, Fold, SourceSpec};
use ingredient_cf::matrix::RatingMatrix;
use ingredient_cf::recommender::{recommend, PartialRecipe};
use ingredient_cf::similarity::{build_neighbor_model, similarity_matrix, Measure, MeasureKind, VectorSource, NEG_INF};
use ingredient_cf::synthetic::{synthetic_corpus, SyntheticConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

/// Random 0/1 matrix given as ingredient sets per recipe (rows).
pub fn random_rows(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Vec<u32>> {
    let density = rng.random_range(0.1..0.7);
    (0..m).map(|_| (0..n as u32).filter(|_| rng.random::<f64>() < density).collect()).collect()
}

/// U(i) for every column.
pub fn supports(rows: &[Vec<u32>], n: usize) -> Vec<BTreeSet<usize>> {
    let mut sets = vec![BTreeSet::new(); n];
    for (u, row) in rows.iter().enumerate() {
        for &i in row {
            sets[i as usize].insert(u);
        }
    }
    sets
}

/// Similarity from support sets, written out measure by measure.
pub fn set_similarity(kind: MeasureKind, alpha: f64, ui: &BTreeSet<usize>, uj: &BTreeSet<usize>, m: usize) -> f64 {
    let both = ui.intersection(uj).count() as f64;
    let (a, b) = (ui.len() as f64, uj.len() as f64);
    if ui.is_empty() || uj.is_empty() {
        return NEG_INF;
    }
    match kind {
        MeasureKind::Cosine => both / (a * b).sqrt(),
        MeasureKind::AsymmetricCosine => both / (a.powf(alpha) * b.powf(1.0 - alpha)),
        MeasureKind::Jaccard => both / ui.union(uj).count() as f64,
        MeasureKind::Pmi => {
            if both == 0.0 {
                NEG_INF
            } else {
                // ln(P(i,j) / (P(i) P(j))) with the 1/m factors cancelled, so that
                // mathematically tied scores stay tied in floating point.
                (both * m as f64 / (a * b)).ln()
            }
        }
    }
}

/// Dense column vectors, so the substitution rule runs on plain dot products.
pub struct DenseColumns {
    pub m: usize,
    pub columns: Vec<Vec<f64>>,
}

impl DenseColumns {
    pub fn new(rows: &[Vec<u32>], n: usize) -> Self {
        let mut columns = vec![vec![0.0; rows.len()]; n];
        for (u, row) in rows.iter().enumerate() {
            for &i in row {
                columns[i as usize][u] = 1.0;
            }
        }
        Self { m: rows.len(), columns }
    }
}

impl VectorSource for DenseColumns {
    fn num_ingredients(&self) -> usize {
        self.columns.len()
    }

    fn num_recipes(&self) -> usize {
        self.m
    }

    fn dot(&self, i: usize, j: usize) -> f64 {
        self.columns[i].iter().zip(&self.columns[j]).map(|(x, y)| x * y).sum()
    }

    fn descriptor(&self) -> ingredient_cf::similarity::SourceDescriptor {
        ingredient_cf::similarity::SourceDescriptor::Raw
    }
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x == NEG_INF && y == NEG_INF) || (x - y).abs() <= tol
}

fn measures_with_alpha(alpha: f64) -> Vec<Measure> {
    vec![
        Measure::of(MeasureKind::Cosine),
        Measure::new(MeasureKind::AsymmetricCosine, alpha).unwrap(),
        Measure::of(MeasureKind::Jaccard),
        Measure::of(MeasureKind::Pmi),
    ]
}

/// Substitution rule (sparse and dense sources) against the set formulas.
pub fn check_substitution_rule(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut compared = 0usize;
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let m = rng.random_range(1..=30);
        let n = rng.random_range(2..=10);
        let rows = random_rows(&mut rng, m, n);
        let sets = supports(&rows, n);
        let sparse = RatingMatrix::from_rows(n, rows.clone());
        let dense = DenseColumns::new(&rows, n);
        let alpha = rng.random_range(0.0..=1.0);
        for measure in measures_with_alpha(alpha) {
            let from_sparse = similarity_matrix(&sparse, &measure).map_err(|e| e.to_string())?;
            let from_dense = similarity_matrix(&dense, &measure).map_err(|e| e.to_string())?;
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let expected = set_similarity(measure.kind, measure.alpha, &sets[i], &sets[j], m);
                    for got in [from_sparse.get(i, j), from_dense.get(i, j)] {
                        if !close(got, expected, 1e-12) {
                            return Err(format!("trial {t}: {measure} ({i},{j}) gave {got}, sets give {expected}"));
                        }
                        if expected.is_finite() {
                            worst = worst.max((got - expected).abs());
                        }
                    }
                    compared += 2;
                }
            }
        }
    }
    Ok(format!("{trials} matrices, {compared} scores, max deviation {worst:.1e}"))
}

/// ACS(0.5) = CS, ACS(i,j;a) = ACS(j,i;1-a), JS <= CS <= 1, PMI = 0 under independence.
pub fn check_identities(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in 0..trials {
        let m = rng.random_range(1..=30);
        let n = rng.random_range(2..=10);
        let matrix = RatingMatrix::from_rows(n, random_rows(&mut rng, m, n));
        let alpha = rng.random_range(0.0..=1.0);
        let cs = similarity_matrix(&matrix, &Measure::of(MeasureKind::Cosine)).unwrap();
        let half = similarity_matrix(&matrix, &Measure::new(MeasureKind::AsymmetricCosine, 0.5).unwrap()).unwrap();
        let acs = similarity_matrix(&matrix, &Measure::new(MeasureKind::AsymmetricCosine, alpha).unwrap()).unwrap();
        let mirrored =
            similarity_matrix(&matrix, &Measure::new(MeasureKind::AsymmetricCosine, 1.0 - alpha).unwrap()).unwrap();
        let js = similarity_matrix(&matrix, &Measure::of(MeasureKind::Jaccard)).unwrap();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if !close(half.get(i, j), cs.get(i, j), 1e-15) {
                    return Err(format!("trial {t}: ACS(0.5) {} != CS {}", half.get(i, j), cs.get(i, j)));
                }
                if !close(acs.get(i, j), mirrored.get(j, i), 1e-12) {
                    return Err(format!("trial {t}: ACS({i},{j};{alpha}) != ACS({j},{i};1-{alpha})"));
                }
                if js.get(i, j) > cs.get(i, j) + 1e-15 || cs.get(i, j) > 1.0 + 1e-15 {
                    return Err(format!("trial {t}: JS {} <= CS {} <= 1 fails", js.get(i, j), cs.get(i, j)));
                }
            }
        }
    }
    // Independent pair: P(i) = P(j) = 1/2 and P(i, j) = 1/4.
    let independent = RatingMatrix::from_rows(2, vec![vec![0, 1], vec![0], vec![1], vec![]]);
    let pmi = similarity_matrix(&independent, &Measure::of(MeasureKind::Pmi)).unwrap().get(0, 1);
    if pmi.abs() > 1e-15 {
        return Err(format!("PMI of an independent pair is {pmi}"));
    }
    Ok(format!("{trials} matrices; independent-pair PMI = {pmi}"))
}

/// Uncentered full-rank embedding reproduces every column inner product.
pub fn check_gram_preservation(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_ratio: f64 = 0.0;
    for t in 0..trials {
        let m = rng.random_range(2..=30);
        let n = rng.random_range(2..=10);
        let rows = random_rows(&mut rng, m, n);
        let matrix = RatingMatrix::from_rows(n, rows.clone());
        if matrix.nnz() == 0 {
            continue;
        }
        let embedding = pca_embed(&matrix, &EmbeddingConfig { components: None, center: false }).unwrap();
        let dense = DenseColumns::new(&rows, n);
        let tol = 1e-6 * m as f64;
        for i in 0..n {
            for j in 0..n {
                let err = (embedding.dot(i, j) - dense.dot(i, j)).abs();
                worst_ratio = worst_ratio.max(err / tol);
                if err > tol {
                    return Err(format!("trial {t}: <{i},{j}> off by {err:.3e} (tolerance {tol:.1e})"));
                }
            }
        }
    }
    Ok(format!("{trials} matrices, worst error {worst_ratio:.1e} of the 1e-6*m tolerance"))
}

/// Cyclic Jacobi eigendecomposition of a symmetric row-major matrix.
/// Returns eigenvalues (descending) and matching unit eigenvectors.
pub fn jacobi_eigen(mut a: Vec<f64>, n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y * n + y].total_cmp(&a[x * n + x]));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let vectors = order.iter().map(|&k| (0..n).map(|i| v[i * n + k]).collect()).collect();
    (values, vectors)
}

/// Centered Gram built from the explicitly centered data matrix.
pub fn centered_gram(rows: &[Vec<u32>], n: usize) -> Vec<f64> {
    let dense = DenseColumns::new(rows, n);
    let m = rows.len();
    let means: Vec<f64> = (0..m).map(|u| dense.columns.iter().map(|c| c[u]).sum::<f64>() / n as f64).collect();
    let centered: Vec<Vec<f64>> =
        dense.columns.iter().map(|c| c.iter().zip(&means).map(|(x, mu)| x - mu).collect()).collect();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            gram[i * n + j] = centered[i].iter().zip(&centered[j]).map(|(x, y)| x * y).sum();
        }
    }
    gram
}

/// Centered PCA against the Jacobi oracle: spectrum, score Gram, and each
/// component (up to the sign convention) where its eigenvalue is simple.
pub fn check_centered_pca(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut done, mut components_compared) = (0, 0);
    let tol = 1e-9;
    while done < trials {
        let m = rng.random_range(3..=20);
        let n = rng.random_range(3..=8);
        let rows = random_rows(&mut rng, m, n);
        let matrix = RatingMatrix::from_rows(n, rows.clone());
        let Ok(embedding) = pca_embed(&matrix, &EmbeddingConfig { components: None, center: true }) else {
            continue;
        };
        done += 1;
        let gram = centered_gram(&rows, n);
        let (values, vectors) = jacobi_eigen(gram.clone(), n);
        let scale = values[0].max(1.0);
        let rank = values.iter().filter(|&&l| l > 1e-9 * scale).count();
        if embedding.d != rank {
            return Err(format!("trial {done}: embedding keeps {} components, oracle rank is {rank}", embedding.d));
        }
        for (c, &var) in embedding.explained_variance.iter().enumerate() {
            let oracle = values[c] / (n - 1) as f64;
            if (var - oracle).abs() > tol * scale {
                return Err(format!("trial {done}: variance {c} is {var}, oracle {oracle}"));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if (embedding.dot(i, j) - gram[i * n + j]).abs() > tol * scale {
                    return Err(format!("trial {done}: score Gram ({i},{j}) differs from centered Gram"));
                }
            }
        }
        for c in 0..rank {
            let simple = (c == 0 || values[c - 1] - values[c] > 1e-6 * scale)
                && (c + 1 == n || values[c] - values[c + 1] > 1e-6 * scale);
            if !simple {
                continue;
            }
            let v = &vectors[c];
            let largest = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            let pivot = (0..n).find(|&i| v[i].abs() >= largest * (1.0 - 1e-9)).unwrap();
            let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
            for (i, loading) in v.iter().enumerate() {
                let expected = sign * loading * values[c].sqrt();
                let got = embedding.vector(i)[c];
                if (got - expected).abs() > tol * scale.sqrt() {
                    return Err(format!("trial {done}: component {c} row {i} is {got}, oracle {expected}"));
                }
            }
            components_compared += 1;
        }
    }
    Ok(format!("{trials} matrices, {components_compared} simple components matched to 1e-9"))
}

fn brute_force_recommendations(
    sim: &dyn Fn(usize, usize) -> f64,
    n: usize,
    k: usize,
    recipe: &BTreeSet<usize>,
    names: &[String],
) -> Vec<(usize, f64)> {
    let mut fits = Vec::new();
    for i in 0..n {
        if recipe.contains(&i) {
            continue;
        }
        let mut others: Vec<(usize, f64)> =
            (0..n).filter(|&j| j != i).map(|j| (j, sim(i, j))).filter(|&(_, s)| s != NEG_INF).collect();
        others.sort_by(|x, y| y.1.total_cmp(&x.1).then(names[x.0].cmp(&names[y.0])));
        others.truncate(k);
        let num: f64 = others.iter().filter(|(j, _)| recipe.contains(j)).map(|(_, s)| s).sum();
        let den: f64 = others.iter().map(|(_, s)| s.abs()).sum();
        fits.push((i, if den == 0.0 { 0.0 } else { num / den }));
    }
    fits.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(names[x.0].cmp(&names[y.0])));
    fits
}

/// Recommendations against exhaustive scoring for every k and every N.
pub fn check_fit_brute_force(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = 0;
    for t in 0..trials {
        let m = rng.random_range(3..=30);
        let n = rng.random_range(3..=9);
        let rows = random_rows(&mut rng, m, n);
        let sets = supports(&rows, n);
        let names: Vec<String> = (0..n).map(|i| format!("ing{i:02}")).collect();
        let vocabulary =
            ingredient_cf::corpus::Vocabulary::new(names.clone(), sets.iter().map(|s| s.len() as u32).collect())
                .map_err(|e| e.to_string())?;
        let matrix = RatingMatrix::from_rows(n, rows);
        let kind = MeasureKind::ALL[t % MeasureKind::ALL.len()];
        let measure = Measure::of(kind);
        let recipe_len = rng.random_range(1..n);
        let mut recipe = BTreeSet::new();
        while recipe.len() < recipe_len {
            recipe.insert(rng.random_range(0..n));
        }
        let partial = PartialRecipe::new(recipe.iter().map(|&i| i as u32).collect(), n).unwrap();
        let sim = |i: usize, j: usize| set_similarity(kind, measure.alpha, &sets[i], &sets[j], m);
        for k in 1..n {
            let model = build_neighbor_model(&matrix, &measure, k, &names).map_err(|e| e.to_string())?;
            let expected = brute_force_recommendations(&sim, n, k, &recipe, &names);
            for count in 1..=n - recipe.len() {
                let got = recommend(&model, &vocabulary, &partial, count).map_err(|e| e.to_string())?;
                if got.len() != count {
                    return Err(format!("trial {t}: asked for {count}, got {}", got.len()));
                }
                for (r, (g, e)) in got.iter().zip(&expected).enumerate() {
                    if g.id as usize != e.0 || (g.fit - e.1).abs() > 1e-12 || g.rank != r + 1 {
                        return Err(format!(
                            "trial {t} ({kind}, k={k}, N={count}): position {r} is {} ({}), expected {} ({})\n got {:?}\n expected {:?}",
                            g.name, g.fit, names[e.0], e.1, got.iter().map(|g| (g.id, g.fit)).collect::<Vec<_>>(), expected
                        ));
                    }
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{trials} toy models, {cases} (k, N) cases"))
}

/// Downdated counts against counting corpus minus {u} from scratch, for every u.
pub fn check_downdate(recipes: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 12;
    let rows: Vec<Vec<u32>> = (0..recipes)
        .map(|_| {
            let mut row: Vec<u32> = (0..n as u32).filter(|_| rng.random::<f64>() < 0.35).collect();
            while row.len() < 3 {
                let extra = rng.random_range(0..n as u32);
                if !row.contains(&extra) {
                    row.push(extra);
                }
            }
            row.sort_unstable();
            row
        })
        .collect();
    let base = RatingMatrix::from_rows(n, rows.clone()).cooccurrence_counts();
    for (u, removed) in rows.iter().enumerate() {
        let down = DowndatedCounts::new(&base, removed);
        if down.num_recipes() != recipes - 1 {
            return Err(format!("recipe {u}: {} recipes after removal", down.num_recipes()));
        }
        for i in 0..n {
            for j in 0..n {
                let scratch = rows
                    .iter()
                    .enumerate()
                    .filter(|&(v, row)| v != u && row.contains(&(i as u32)) && row.contains(&(j as u32)))
                    .count();
                if down.dot(i, j) != scratch as f64 {
                    return Err(format!("recipe {u}: count ({i},{j}) is {}, recount gives {scratch}", down.dot(i, j)));
                }
            }
        }
    }
    Ok(format!("all {recipes} leave-one-out count tables match a recount"))
}

/// Two concurrent evaluations with the same seed serialize identically.
pub fn check_parallel_determinism(recipes: usize) -> Check {
    let corpus = synthetic_corpus(&SyntheticConfig { recipes, ingredients: 80, ..SyntheticConfig::default() });
    let configs = [
        EvalConfig { k: 20, ..EvalConfig::default() },
        EvalConfig {
            measure: Measure::of(MeasureKind::Jaccard),
            k: 20,
            source: SourceSpec::Raw,
            fold: Fold::Tuning,
            mode: EvalMode::ExactDowndate,
            ..EvalConfig::default()
        },
    ];
    for config in configs {
        let (a, b) = std::thread::scope(|scope| {
            let first = scope.spawn(|| evaluate_fold(&corpus, &config));
            let second = scope.spawn(|| evaluate_fold(&corpus, &config));
            (first.join().unwrap(), second.join().unwrap())
        });
        let (a, b) = (a.map_err(|e| e.to_string())?, b.map_err(|e| e.to_string())?);
        if serde_json::to_vec(&a).unwrap() != serde_json::to_vec(&b).unwrap() {
            return Err(format!("reports differ for {}", config.protocol()));
        }
    }
    Ok(format!("fold-complement/PCA and exact-downdate/raw reports byte-identical on {recipes} recipes"))
}
