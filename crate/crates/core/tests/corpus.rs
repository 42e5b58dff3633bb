use std::collections::BTreeSet;

use scriptrace::augment::{sample_id, Half};
use scriptrace::cluster::Style;
use scriptrace::eval::{merge_corpora, run_setup, table_from_vectors, Corpus, FeatureTable, PipelineConfig, Trainer};
use scriptrace::features::{Family, FeatureVector};
use scriptrace::identify::Classifier;
use scriptrace::imaging::binarize;
use scriptrace::io::manifest::{merge_manifests, read_manifest, validate, ManifestRecord, SplitName};
use scriptrace::io::synth::{page_id, writer_id};
use scriptrace::io::{render_corpus, synth_corpus, SynthConfig};
use scriptrace::segmentation::{segment_page, SegmentConfig};

fn small(seed: u64) -> SynthConfig {
    SynthConfig {
        writers: 10,
        pages_per_style: 2,
        seed,
        lines: 3,
        ..SynthConfig::default()
    }
}

#[test]
fn synth_writes_a_valid_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let records = synth_corpus(dir.path(), &small(3)).unwrap();
    assert_eq!(records.len(), 10 * 3 * 2);
    let back = read_manifest(&dir.path().join("manifest.jsonl")).unwrap();
    assert_eq!(back, records);
    validate(&back).unwrap();
    for r in &back {
        assert!(r.resolve_image(&dir.path().join("manifest.jsonl")).is_file());
    }
}

#[test]
fn synth_is_byte_identical_for_one_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = SynthConfig { writers: 3, ..small(5) };
    let records = synth_corpus(a.path(), &cfg).unwrap();
    synth_corpus(b.path(), &cfg).unwrap();
    let read = |d: &tempfile::TempDir, rel: &str| std::fs::read(d.path().join(rel)).unwrap();
    assert_eq!(read(&a, "manifest.jsonl"), read(&b, "manifest.jsonl"));
    for r in &records {
        assert_eq!(read(&a, &r.image_path), read(&b, &r.image_path), "{}", r.image_path);
    }
}

#[test]
fn zero_severity_makes_styles_identical() {
    let pages = render_corpus(&SynthConfig { writers: 3, severity: 0.0, ..small(9) }).unwrap();
    for w in 0..3 {
        for p in 0..2 {
            let of = |s: Style| &pages.iter().find(|x| x.page_id == page_id(w, s, p)).unwrap().image;
            assert_eq!(of(Style::Slow), of(Style::Medium));
            assert_eq!(of(Style::Slow), of(Style::Fast));
        }
    }
}

#[test]
fn segmentation_recovers_rendered_lines() {
    let seg = SegmentConfig::default();
    let mut wrong = Vec::new();
    for seed in 0..100 {
        let cfg = SynthConfig { writers: 2, pages_per_style: 1, ..small(seed) };
        for page in render_corpus(&cfg).unwrap() {
            let found = segment_page(&binarize(&page.image).0, &seg).lines.len();
            if found != page.line_count {
                wrong.push((page.page_id, found, page.line_count));
            }
        }
    }
    assert!(wrong.is_empty(), "{wrong:?}");
}

/// Sample records for `writers` writers with the standard 2:1:1 layout.
fn sample_records(writers: usize) -> Vec<ManifestRecord> {
    let mut out = Vec::new();
    for w in 0..writers {
        for style in Style::ALL {
            for page_index in 0..2 {
                let page = page_id(w, style, page_index);
                for half in [Half::Top, Half::Bottom] {
                    let split = match (page_index, half) {
                        (0, _) => SplitName::Train,
                        (_, Half::Top) => SplitName::Val,
                        _ => SplitName::Test,
                    };
                    for v in 0..11 {
                        out.push(ManifestRecord {
                            sample_id: sample_id(&page, half, v),
                            writer_id: writer_id(w),
                            style,
                            split: Some(split),
                            parent_page_id: page.clone(),
                            half,
                            variant_index: v,
                            image_path: format!("samples/{}.png", sample_id(&page, half, v)),
                            elapsed_seconds: None,
                        });
                    }
                }
            }
        }
    }
    out
}

fn one_vector_each(corpus: &Corpus) -> FeatureTable {
    table_from_vectors(
        corpus
            .samples
            .iter()
            .map(|s| FeatureVector::page(s.sample_id.clone(), Family::Ingested, vec![1.0]))
            .collect(),
    )
}

/// Scores every writer equally, so the tie rule always names the first one.
struct Constant(Vec<String>);

impl Classifier for Constant {
    fn writers(&self) -> &[String] {
        &self.0
    }

    fn scores(&self, _x: &[f64]) -> scriptrace::Result<Vec<f64>> {
        Ok(vec![0.0; self.0.len()])
    }
}

struct ConstantTrainer;

impl Trainer for ConstantTrainer {
    fn train(&self, _x: &[Vec<f64>], labels: &[String]) -> scriptrace::Result<Box<dyn Classifier>> {
        let writers: BTreeSet<String> = labels.iter().cloned().collect();
        Ok(Box::new(Constant(writers.into_iter().collect())))
    }
}

fn chance(corpus: &Corpus) -> f64 {
    let table = one_vector_each(corpus);
    let p = PipelineConfig { patches_per_sample: 1, ..PipelineConfig::default() };
    run_setup(corpus, &table, &[Style::Medium], Style::Medium, &p, &ConstantTrainer).unwrap().top1
}

#[test]
fn merged_manifests_keep_every_writer() {
    let a = sample_records(100);
    let b = sample_records(100);
    validate(&a).unwrap();
    let merged = merge_manifests(&a, &b).unwrap();
    let writers: BTreeSet<&str> = merged.iter().map(|r| r.writer_id.as_str()).collect();
    assert_eq!(writers.len(), 200);
    validate(&merged).unwrap();

    let (ca, cb) = (Corpus::index_only(&a).unwrap(), Corpus::index_only(&b).unwrap());
    let joined = merge_corpora(&ca, &cb).unwrap();
    assert_eq!(joined.writers.len(), 200);
    assert_eq!(joined.samples.len(), 2 * a.len());
}

#[test]
fn constant_classifier_scores_at_chance() {
    for writers in [4, 10, 25] {
        let corpus = Corpus::index_only(&sample_records(writers)).unwrap();
        let top1 = chance(&corpus);
        assert!((top1 - 100.0 / writers as f64).abs() < 1e-9, "{writers} writers: {top1}");
    }
    let a = Corpus::index_only(&sample_records(10)).unwrap();
    let joined = merge_corpora(&a, &a).unwrap();
    assert!((chance(&joined) - 5.0).abs() < 1e-9);
}
