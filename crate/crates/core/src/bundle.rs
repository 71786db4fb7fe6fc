//! On-disk artifacts: the corpus bundle written by the pipeline and the model
//! bundle a recommender loads. Both are directories of JSON files.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, PipelineConfig, Recipe, StageCount, Vocabulary};
use crate::embedding::{pca_embed, EmbeddingConfig, EmbeddingError, IngredientEmbedding};
use crate::evaluation::SourceSpec;
use crate::matrix::build_matrix;
use crate::similarity::{build_neighbor_model, Measure, NeighborModel, SimilarityError};

pub const SCHEMA_VERSION: u32 = 1;

pub const VOCABULARY_FILE: &str = "vocabulary.json";
pub const RECIPES_FILE: &str = "recipes.jsonl";
pub const PIPELINE_FILE: &str = "pipeline.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const NEIGHBORS_FILE: &str = "neighbors.json";
pub const EMBEDDING_FILE: &str = "embedding.json";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("bundle schema version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BundleError + '_ {
    move |source| BundleError::Io { path: path.to_path_buf(), source }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BundleError> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|source| BundleError::Json { path: path.to_path_buf(), source })?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(io_err(path))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, BundleError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    serde_json::from_slice(&bytes).map_err(|source| BundleError::Json { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabularyEntry {
    pub id: u32,
    pub name: String,
    pub count: u32,
}

fn vocabulary_entries(vocab: &Vocabulary) -> Vec<VocabularyEntry> {
    (0..vocab.len() as u32)
        .map(|id| VocabularyEntry { id, name: vocab.name(id).to_string(), count: vocab.count(id) })
        .collect()
}

fn vocabulary_from_entries(path: &Path, entries: Vec<VocabularyEntry>) -> Result<Vocabulary, BundleError> {
    let mut names = Vec::with_capacity(entries.len());
    let mut counts = Vec::with_capacity(entries.len());
    for (expected, entry) in entries.into_iter().enumerate() {
        if entry.id as usize != expected {
            return Err(BundleError::Schema {
                path: path.to_path_buf(),
                message: format!("ingredient ids must be dense and ordered; found {} at position {expected}", entry.id),
            });
        }
        names.push(entry.name);
        counts.push(entry.count);
    }
    Ok(Vocabulary::new(names, counts)?)
}

fn vocabulary_bytes(vocab: &Vocabulary) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(&vocabulary_entries(vocab)).expect("vocabulary serializes");
    bytes.push(b'\n');
    bytes
}

fn recipes_bytes(corpus: &Corpus) -> Vec<u8> {
    let mut bytes = Vec::new();
    for recipe in corpus.recipes() {
        serde_json::to_writer(&mut bytes, recipe).expect("recipe serializes");
        bytes.push(b'\n');
    }
    bytes
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the canonical serialization of a corpus.
pub fn corpus_hash(corpus: &Corpus) -> String {
    let mut hasher = Sha256::new();
    hasher.update(vocabulary_bytes(corpus.vocabulary()));
    hasher.update(recipes_bytes(corpus));
    hex::encode(hasher.finalize())
}

/// Provenance of a corpus bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRecord {
    pub config: PipelineConfig,
    pub input_sha256: String,
    pub stages: Vec<StageCount>,
}

pub fn write_corpus_bundle(dir: &Path, corpus: &Corpus, record: &PipelineRecord) -> Result<(), BundleError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let vocab_path = dir.join(VOCABULARY_FILE);
    fs::write(&vocab_path, vocabulary_bytes(corpus.vocabulary())).map_err(io_err(&vocab_path))?;
    let recipes_path = dir.join(RECIPES_FILE);
    let mut file = fs::File::create(&recipes_path).map_err(io_err(&recipes_path))?;
    file.write_all(&recipes_bytes(corpus)).map_err(io_err(&recipes_path))?;
    write_json(&dir.join(PIPELINE_FILE), record)
}

pub fn read_corpus_bundle(dir: &Path) -> Result<(Corpus, PipelineRecord), BundleError> {
    let vocab_path = dir.join(VOCABULARY_FILE);
    let entries: Vec<VocabularyEntry> = read_json(&vocab_path)?;
    let declared = vocabulary_from_entries(&vocab_path, entries)?;

    let recipes_path = dir.join(RECIPES_FILE);
    let file = fs::File::open(&recipes_path).map_err(io_err(&recipes_path))?;
    let mut recipes = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(&recipes_path))?;
        if line.trim().is_empty() {
            continue;
        }
        let recipe: Recipe =
            serde_json::from_str(&line).map_err(|source| BundleError::Json { path: recipes_path.clone(), source })?;
        recipes.push(recipe);
    }
    let corpus = Corpus::from_parts(declared.names().to_vec(), recipes)?;
    if corpus.vocabulary().counts() != declared.counts() {
        return Err(BundleError::Schema {
            path: vocab_path,
            message: "ingredient counts disagree with recipes".into(),
        });
    }
    let record = read_json(&dir.join(PIPELINE_FILE))?;
    Ok((corpus, record))
}

/// What a model bundle was built with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub measure: Measure,
    pub k: usize,
    pub source: SourceSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    /// Seconds since the Unix epoch; honours `SOURCE_DATE_EPOCH`.
    pub created_unix: u64,
    pub build: BuildConfig,
    pub corpus_hash: String,
    pub ingredients: usize,
    pub recipes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub manifest: Manifest,
    pub vocabulary: Vocabulary,
    pub neighbors: NeighborModel,
    pub embedding: Option<IngredientEmbedding>,
    pub pipeline: Option<PipelineRecord>,
}

fn creation_time() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
}

impl ModelBundle {
    pub fn build(corpus: &Corpus, config: BuildConfig, pipeline: Option<PipelineRecord>) -> Result<Self, BundleError> {
        let matrix = build_matrix(corpus);
        let names = corpus.vocabulary().names();
        let (neighbors, embedding) = match config.source {
            SourceSpec::Raw => (build_neighbor_model(&matrix, &config.measure, config.k, names)?, None),
            SourceSpec::Pca { components, center } => {
                let embedding = pca_embed(&matrix, &EmbeddingConfig { components, center })?;
                (build_neighbor_model(&embedding, &config.measure, config.k, names)?, Some(embedding))
            }
        };
        Ok(Self {
            manifest: Manifest {
                schema_version: SCHEMA_VERSION,
                created_unix: creation_time(),
                build: config,
                corpus_hash: corpus_hash(corpus),
                ingredients: corpus.num_ingredients(),
                recipes: corpus.num_recipes(),
            },
            vocabulary: corpus.vocabulary().clone(),
            neighbors,
            embedding,
            pipeline,
        })
    }

    pub fn save(&self, dir: &Path) -> Result<(), BundleError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        write_json(&dir.join(MANIFEST_FILE), &self.manifest)?;
        let vocab_path = dir.join(VOCABULARY_FILE);
        fs::write(&vocab_path, vocabulary_bytes(&self.vocabulary)).map_err(io_err(&vocab_path))?;
        write_json(&dir.join(NEIGHBORS_FILE), &self.neighbors)?;
        let embedding_path = dir.join(EMBEDDING_FILE);
        match &self.embedding {
            Some(embedding) => write_json(&embedding_path, embedding)?,
            None if embedding_path.exists() => fs::remove_file(&embedding_path).map_err(io_err(&embedding_path))?,
            None => {}
        }
        if let Some(pipeline) = &self.pipeline {
            write_json(&dir.join(PIPELINE_FILE), pipeline)?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, BundleError> {
        let manifest: Manifest = read_json(&dir.join(MANIFEST_FILE))?;
        if manifest.schema_version != SCHEMA_VERSION {
            return Err(BundleError::Version { found: manifest.schema_version, expected: SCHEMA_VERSION });
        }
        let vocab_path = dir.join(VOCABULARY_FILE);
        let vocabulary = vocabulary_from_entries(&vocab_path, read_json(&vocab_path)?)?;
        let neighbors_path = dir.join(NEIGHBORS_FILE);
        let neighbors: NeighborModel = read_json(&neighbors_path)?;
        let n = vocabulary.len();
        if neighbors.num_ingredients() != n || neighbors.neighbors.iter().flatten().any(|nb| nb.id as usize >= n) {
            return Err(BundleError::Schema {
                path: neighbors_path,
                message: format!("neighbour lists do not match a vocabulary of {n} ingredients"),
            });
        }
        let embedding_path = dir.join(EMBEDDING_FILE);
        let embedding = if embedding_path.exists() { Some(read_json(&embedding_path)?) } else { None };
        let pipeline_path = dir.join(PIPELINE_FILE);
        let pipeline = if pipeline_path.exists() { Some(read_json(&pipeline_path)?) } else { None };
        Ok(Self { manifest, vocabulary, neighbors, embedding, pipeline })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recommender::{recommend, PartialRecipe};
    use crate::similarity::MeasureKind;
    use crate::synthetic::{synthetic_corpus, SyntheticConfig};

    fn record() -> PipelineRecord {
        PipelineRecord { config: PipelineConfig::default(), input_sha256: sha256_hex(b"input"), stages: vec![] }
    }

    #[test]
    fn corpus_bundle_round_trips_byte_identically() {
        let corpus = synthetic_corpus(&SyntheticConfig { recipes: 200, ingredients: 30, ..SyntheticConfig::default() });
        let dir = tempfile::tempdir().unwrap();
        write_corpus_bundle(dir.path(), &corpus, &record()).unwrap();
        let (loaded, rec) = read_corpus_bundle(dir.path()).unwrap();
        assert_eq!(loaded, corpus);
        assert_eq!(rec, record());
        let first = fs::read(dir.path().join(RECIPES_FILE)).unwrap();
        write_corpus_bundle(dir.path(), &loaded, &rec).unwrap();
        assert_eq!(first, fs::read(dir.path().join(RECIPES_FILE)).unwrap());
        assert_eq!(corpus_hash(&loaded), corpus_hash(&corpus));
    }

    #[test]
    fn model_bundle_round_trip_preserves_recommendations() {
        let corpus = synthetic_corpus(&SyntheticConfig { recipes: 400, ingredients: 40, ..SyntheticConfig::default() });
        let config = BuildConfig { measure: Measure::of(MeasureKind::Pmi), k: 10, source: SourceSpec::pca() };
        let bundle = ModelBundle::build(&corpus, config, Some(record())).unwrap();
        let dir = tempfile::tempdir().unwrap();
        bundle.save(dir.path()).unwrap();
        let loaded = ModelBundle::load(dir.path()).unwrap();
        assert_eq!(loaded, bundle);
        let recipe = PartialRecipe::new(vec![0, 3, 5], corpus.num_ingredients()).unwrap();
        assert_eq!(
            recommend(&loaded.neighbors, &loaded.vocabulary, &recipe, 10).unwrap(),
            recommend(&bundle.neighbors, &bundle.vocabulary, &recipe, 10).unwrap()
        );
    }

    #[test]
    fn rejects_unknown_schema_version() {
        let corpus = synthetic_corpus(&SyntheticConfig { recipes: 100, ingredients: 20, ..SyntheticConfig::default() });
        let config = BuildConfig { measure: Measure::of(MeasureKind::Cosine), k: 5, source: SourceSpec::Raw };
        let mut bundle = ModelBundle::build(&corpus, config, None).unwrap();
        bundle.manifest.schema_version = 99;
        let dir = tempfile::tempdir().unwrap();
        bundle.save(dir.path()).unwrap();
        assert!(matches!(ModelBundle::load(dir.path()), Err(BundleError::Version { found: 99, .. })));
    }
}
