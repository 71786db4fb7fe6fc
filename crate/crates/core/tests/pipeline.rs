use ingredient_cf::bundle::{corpus_hash, read_corpus_bundle, write_corpus_bundle, PipelineRecord};
use ingredient_cf::corpus::{parse_raw, run_pipeline, PipelineConfig};
use ingredient_cf::synthetic::{synthetic_corpus, synthetic_raw, SyntheticConfig};

fn config() -> SyntheticConfig {
    SyntheticConfig { recipes: 1_500, ..SyntheticConfig::default() }
}

fn lenient() -> PipelineConfig {
    PipelineConfig { min_final_count: 1, ..PipelineConfig::default() }
}

#[test]
fn cleaning_noisy_names_recovers_the_clean_corpus() {
    let raw = synthetic_raw(&config());
    let bytes = serde_json::to_vec(&raw).unwrap();
    let (corpus, report) = run_pipeline(parse_raw(&bytes).unwrap(), &lenient()).unwrap();
    let clean = synthetic_corpus(&config());
    assert_eq!(corpus.vocabulary().names(), clean.vocabulary().names());
    assert_eq!(corpus, clean);

    let raw_stage = &report.stages[0];
    assert_eq!(raw_stage.stage, "raw");
    assert!(raw_stage.ingredients > corpus.num_ingredients(), "noise should inflate the raw vocabulary");
    assert_eq!(report.stages.last().unwrap().ingredients, corpus.num_ingredients());
}

#[test]
fn prepared_bundle_is_reproducible() {
    let raw = synthetic_raw(&config());
    let bytes = serde_json::to_vec(&raw).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let (corpus, report) = run_pipeline(parse_raw(&bytes).unwrap(), &lenient()).unwrap();
        let record = PipelineRecord {
            config: lenient(),
            input_sha256: ingredient_cf::bundle::sha256_hex(&bytes),
            stages: report.stages,
        };
        write_corpus_bundle(dir.path(), &corpus, &record).unwrap();
    }
    for file in ["vocabulary.json", "recipes.jsonl", "pipeline.json"] {
        let a = std::fs::read(dirs[0].path().join(file)).unwrap();
        let b = std::fs::read(dirs[1].path().join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let (a, _) = read_corpus_bundle(dirs[0].path()).unwrap();
    let (b, _) = read_corpus_bundle(dirs[1].path()).unwrap();
    assert_eq!(corpus_hash(&a), corpus_hash(&b));
}

#[test]
fn frequency_cut_removes_rare_ingredients_and_short_recipes() {
    let raw = synthetic_raw(&config());
    let strict = PipelineConfig { min_final_count: 60, ..PipelineConfig::default() };
    let (corpus, _) = run_pipeline(raw, &strict).unwrap();
    assert!(corpus.vocabulary().counts().iter().all(|&c| c >= 60));
    assert!(corpus.recipes().iter().all(|r| r.ingredients.len() >= strict.min_recipe_size));
}
