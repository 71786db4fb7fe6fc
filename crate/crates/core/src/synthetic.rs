//! Seeded synthetic recipe corpora with cuisine structure, for tests and
//! benchmarks when the real recipe dump is not available.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, RawRecipe, Recipe};

/// Named ingredients grouped by cuisine; the remaining vocabulary is filled
/// with generated single-word names.
const NAMED: &[(&str, &[&str])] = &[
    (
        "mexican",
        &[
            "avocado",
            "lime",
            "cilantro",
            "salsa",
            "sour cream",
            "tortillas",
            "jalapeno",
            "cumin",
            "black beans",
            "cheddar",
        ],
    ),
    ("southern_us", &["flour", "milk", "eggs", "baking powder", "butter", "sugar", "vanilla", "buttermilk"]),
    ("indian", &["masala", "turmeric", "ginger", "yogurt", "chilies", "garlic", "coriander", "cardamom"]),
    ("italian", &["olive oil", "basil", "parmesan", "tomatoes", "mozzarella", "pasta", "oregano"]),
    ("chinese", &["soy sauce", "sesame", "rice", "scallions", "mirin", "tofu", "bok choy"]),
];

const SYLLABLES: &[&str] =
    &["ba", "ko", "ri", "me", "tu", "sa", "lo", "ne", "vi", "da", "pu", "ze", "ka", "mo", "fi", "ga"];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub recipes: usize,
    pub ingredients: usize,
    pub cuisines: usize,
    /// Probability that an ingredient is drawn from the recipe's own cuisine.
    pub cuisine_affinity: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { recipes: 2_000, ingredients: 267, cuisines: 5, cuisine_affinity: 0.75, seed: 7 }
    }
}

fn generated_name(mut index: usize) -> String {
    let mut name = String::from("x");
    loop {
        name.push_str(SYLLABLES[index % SYLLABLES.len()]);
        index /= SYLLABLES.len();
        if index == 0 {
            break;
        }
    }
    name
}

struct Layout {
    names: Vec<String>,
    home: Vec<usize>,
    cuisine_names: Vec<String>,
}

fn layout(config: &SyntheticConfig) -> Layout {
    let cuisines = config.cuisines.max(1);
    let mut names = Vec::with_capacity(config.ingredients);
    let mut home = Vec::with_capacity(config.ingredients);
    let cuisine_names: Vec<String> = (0..cuisines)
        .map(|c| NAMED.get(c).map_or_else(|| format!("cuisine_{c}"), |(name, _)| name.to_string()))
        .collect();
    'fill: for (c, (_, list)) in NAMED.iter().enumerate().take(cuisines) {
        for name in *list {
            if names.len() == config.ingredients {
                break 'fill;
            }
            names.push(name.to_string());
            home.push(c);
        }
    }
    let mut extra = 0;
    while names.len() < config.ingredients {
        names.push(generated_name(extra));
        home.push(extra % cuisines);
        extra += 1;
    }
    Layout { names, home, cuisine_names }
}

fn weighted_pick(rng: &mut ChaCha8Rng, pool: &[usize], weights: &[f64]) -> usize {
    let total: f64 = pool.iter().map(|&i| weights[i]).sum();
    let mut target = rng.random::<f64>() * total;
    for &i in pool {
        target -= weights[i];
        if target <= 0.0 {
            return i;
        }
    }
    *pool.last().expect("nonempty pool")
}

/// Recipes as lists of ingredient indices into the layout, plus cuisines.
fn generate(config: &SyntheticConfig, layout: &Layout) -> Vec<(usize, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = layout.names.len();
    let cuisines = layout.cuisine_names.len();
    // Zipf-like popularity by position within the vocabulary.
    let weights: Vec<f64> = (0..n).map(|i| 1.0 / ((i % 60) as f64 + 1.0).powf(0.8)).collect();
    let pools: Vec<Vec<usize>> = (0..cuisines).map(|c| (0..n).filter(|&i| layout.home[i] == c).collect()).collect();
    let everything: Vec<usize> = (0..n).collect();
    let cuisine_weights: Vec<f64> = (0..cuisines).map(|c| 1.0 / (c as f64 + 1.0)).collect();
    let cuisine_ids: Vec<usize> = (0..cuisines).collect();

    (0..config.recipes)
        .map(|_| {
            let cuisine = weighted_pick(&mut rng, &cuisine_ids, &cuisine_weights);
            // 3 + Binomial(25, 0.2): mean 8, range 3..=28.
            let extra = (0..25).filter(|_| rng.random::<f64>() < 0.2).count();
            let len = (3 + extra).min(n);
            let mut chosen: Vec<usize> = Vec::with_capacity(len);
            let mut attempts = 0;
            while chosen.len() < len && attempts < 50 * len {
                attempts += 1;
                let pool = if rng.random::<f64>() < config.cuisine_affinity && !pools[cuisine].is_empty() {
                    &pools[cuisine]
                } else {
                    &everything
                };
                let pick = weighted_pick(&mut rng, pool, &weights);
                if !chosen.contains(&pick) {
                    chosen.push(pick);
                }
            }
            (cuisine, chosen)
        })
        .collect()
}

/// A valid corpus: ingredients that were never drawn are dropped and ids
/// follow lexicographic name order.
pub fn synthetic_corpus(config: &SyntheticConfig) -> Corpus {
    let layout = layout(config);
    let drawn = generate(config, &layout);
    let mut used = vec![false; layout.names.len()];
    for (_, items) in &drawn {
        for &i in items {
            used[i] = true;
        }
    }
    let mut order: Vec<usize> = (0..layout.names.len()).filter(|&i| used[i]).collect();
    order.sort_by(|&a, &b| layout.names[a].cmp(&layout.names[b]));
    let mut dense = vec![u32::MAX; layout.names.len()];
    for (id, &i) in order.iter().enumerate() {
        dense[i] = id as u32;
    }
    let names = order.iter().map(|&i| layout.names[i].clone()).collect();
    let recipes = drawn
        .into_iter()
        .enumerate()
        .map(|(u, (cuisine, items))| Recipe {
            id: u as i64,
            cuisine: layout.cuisine_names[cuisine].clone(),
            ingredients: items.into_iter().map(|i| dense[i]).collect(),
        })
        .collect();
    Corpus::from_parts(names, recipes).expect("synthetic corpus satisfies corpus invariants")
}

/// The same recipes in the raw input shape, with cosmetic noise on the names
/// (capitals, stray spaces, quantities) that cleaning removes again.
pub fn synthetic_raw(config: &SyntheticConfig) -> Vec<RawRecipe> {
    let layout = layout(config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xabcd);
    generate(config, &layout)
        .into_iter()
        .enumerate()
        .map(|(u, (cuisine, items))| RawRecipe {
            id: u as i64,
            cuisine: layout.cuisine_names[cuisine].clone(),
            ingredients: items
                .into_iter()
                .map(|i| {
                    let name = &layout.names[i];
                    match rng.random_range(0..4) {
                        0 => format!(" {name}"),
                        1 => format!("14 oz {name}"),
                        2 => name.to_uppercase(),
                        _ => name.clone(),
                    }
                })
                .collect(),
        })
        .collect()
}
