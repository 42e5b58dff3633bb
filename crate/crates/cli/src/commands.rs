//! Subcommand bodies. Each takes the fully resolved configuration.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use scriptrace::cluster::{
    cluster_vectors, nmi, speed_label, SpeedRecord, SpeedThresholds, Style,
};
use scriptrace::eval::{
    feature_table, merge_corpora, nine_tuple, nine_tuple_csv, rank_reports, run_setup_detailed, sample_features,
    table_from_vectors, Corpus, FeatureTable, ModelReport, PipelineConfig,
};
use scriptrace::features::{extract, Family, FeatureVector};
use scriptrace::identify::{concatenated_mean, in_top_n, Backend, Strategy};
use scriptrace::imaging::binarize;
use scriptrace::io::{
    export_features, ingest_features, load_gray, merge_manifests, read_manifest, save_binary, synth_corpus,
    write_manifest, IngestOptions, ManifestRecord,
};
use scriptrace::page::PageAnalysis;
use scriptrace::verify::{far_frr_curve, pair_distances, threshold_sweep};

use crate::config::{Config, ModelSpec, VerifyMode};

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))
}

pub fn synth(cfg: &Config, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let records = synth_corpus(out, &cfg.synth)?;
    eprintln!("wrote {} pages to {}", records.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PreprocessRecord {
    sample_id: String,
    writer_id: String,
    style: Style,
    threshold: u8,
    lines: usize,
    words: usize,
    characters: usize,
    mean_width: Option<f64>,
    std_width: Option<f64>,
    stroke_length_px: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    speed: Option<f64>,
    /// Speed class against the writer's medium pages.
    #[serde(skip_serializing_if = "Option::is_none")]
    speed_label: Option<Style>,
}

pub fn preprocess(cfg: &Config, manifest: &Path, out: &Path) -> Result<()> {
    let records = read_manifest(manifest)?;
    fs::create_dir_all(out.join("binary"))?;
    fs::create_dir_all(out.join("skeleton"))?;
    let mut rows: Vec<PreprocessRecord> = records
        .par_iter()
        .map(|r| {
            let a = PageAnalysis::analyze(&load_gray(&r.resolve_image(manifest))?, &cfg.segment);
            save_binary(&out.join("binary").join(format!("{}.png", r.sample_id)), &a.binary)?;
            save_binary(&out.join("skeleton").join(format!("{}.png", r.sample_id)), &a.skeleton.image)?;
            let length = a.skeleton.stroke_length_px;
            let speed = r
                .elapsed_seconds
                .map(|t| SpeedRecord::new(length as f64, t).map(|s| s.speed()))
                .transpose()?;
            Ok(PreprocessRecord {
                sample_id: r.sample_id.clone(),
                writer_id: r.writer_id.clone(),
                style: r.style,
                threshold: a.threshold,
                lines: a.segmentation.lines.len(),
                words: a.segmentation.words.len(),
                characters: a.segmentation.characters.len(),
                mean_width: a.stats.map(|s| s.mean_width),
                std_width: a.stats.map(|s| s.std_width),
                stroke_length_px: length,
                speed,
                speed_label: None,
            })
        })
        .collect::<scriptrace::Result<_>>()?;

    let mut medium: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for row in &rows {
        if let (Style::Medium, Some(s)) = (row.style, row.speed) {
            medium.entry(row.writer_id.as_str()).or_default().push(s);
        }
    }
    let thresholds: BTreeMap<String, SpeedThresholds> = medium
        .into_iter()
        .map(|(w, speeds)| Ok((w.to_string(), SpeedThresholds::from_medium(&speeds, cfg.preprocess.alpha_s)?)))
        .collect::<scriptrace::Result<_>>()?;
    for row in &mut rows {
        if let (Some(s), Some(t)) = (row.speed, thresholds.get(&row.writer_id)) {
            row.speed_label = Some(speed_label(s, t));
        }
    }
    scriptrace::io::write_jsonl(&out.join("preprocess.jsonl"), &rows)?;
    write_json(&out.join("speed_thresholds.json"), &thresholds)?;
    eprintln!("preprocessed {} images", rows.len());
    Ok(())
}

pub fn features(cfg: &Config, manifest: &Path, out: &Path) -> Result<()> {
    let p = &cfg.pipeline;
    if p.family == Family::Ingested {
        bail!("the ingested family cannot be computed, only read from a feature file");
    }
    let records = read_manifest(manifest)?;
    let per_patch = cfg.features.per_patch;
    let vectors: Vec<Vec<FeatureVector>> = records
        .par_iter()
        .map(|r| {
            let gray = load_gray(&r.resolve_image(manifest))?;
            if per_patch {
                sample_features(&r.sample_id, &binarize(&gray).0, p, &cfg.segment)
            } else {
                let a = PageAnalysis::analyze(&gray, &cfg.segment);
                Ok(vec![FeatureVector::page(&r.sample_id, p.family, extract(p.family, &a)?)])
            }
        })
        .collect::<scriptrace::Result<_>>()?;
    let vectors: Vec<FeatureVector> = vectors.into_iter().flatten().collect();
    if let Some(dir) = out.parent() {
        fs::create_dir_all(dir)?;
    }
    export_features(out, &vectors)?;
    eprintln!("wrote {} {} vectors to {}", vectors.len(), p.family, out.display());
    Ok(())
}

pub fn augment(cfg: &Config, manifest: &Path, out: &Path) -> Result<()> {
    let corpus = Corpus::from_manifest(manifest, &cfg.segment, &cfg.augment)?;
    fs::create_dir_all(out.join("samples"))?;
    let records: Vec<ManifestRecord> = corpus
        .samples
        .par_iter()
        .map(|s| {
            let rel = format!("samples/{}.png", s.sample_id);
            save_binary(&out.join(&rel), &s.image)?;
            Ok(s.record(rel))
        })
        .collect::<scriptrace::Result<_>>()?;
    write_manifest(&out.join("manifest.jsonl"), &records)?;
    eprintln!("wrote {} samples of {} writers", records.len(), corpus.writers.len());
    Ok(())
}

fn load_feature_table(manifest: &[ManifestRecord], features: &Path, unit_norm: bool) -> Result<FeatureTable> {
    let known: BTreeSet<String> = manifest.iter().map(|r| r.sample_id.clone()).collect();
    let vectors = ingest_features(
        features,
        &IngestOptions {
            unit_norm,
            known_samples: Some(&known),
        },
    )?;
    Ok(table_from_vectors(vectors))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct IdentifySummary<'a> {
    pipeline: &'a PipelineConfig,
    train: &'a [Style],
    test: Style,
    test_samples: usize,
    top1: f64,
    top2: f64,
    top5: f64,
    top_n: usize,
    top_n_accuracy: f64,
}

pub fn identify(cfg: &Config, manifest: &Path, features: Option<&Path>, out: &Path) -> Result<()> {
    let mut p = cfg.pipeline.clone();
    let (corpus, table) = match features {
        Some(f) => {
            let records = read_manifest(manifest)?;
            let table = load_feature_table(&records, f, cfg.identify.unit_norm)?;
            // Ingested files may carry any number of vectors per sample.
            if let Some(n) = table.values().map(Vec::len).max() {
                p.patches_per_sample = n;
            }
            (Corpus::index_only(&records)?, table)
        }
        None => {
            let corpus = Corpus::from_manifest(manifest, &cfg.segment, &cfg.augment)?;
            let table = feature_table(&corpus, &p, &cfg.segment)?;
            (corpus, table)
        }
    };
    let test = cfg.identify.test;
    let train = if cfg.identify.train.is_empty() {
        vec![test]
    } else {
        cfg.identify.train.clone()
    };
    let (result, decisions) = run_setup_detailed(&corpus, &table, &train, test, &p, &p.backend)?;

    let truths: Vec<&str> = corpus
        .set(test, scriptrace::io::SplitName::Test)
        .map(|s| s.writer_id.as_str())
        .collect();
    let trained: BTreeSet<&str> = train
        .iter()
        .flat_map(|&s| corpus.set(s, scriptrace::io::SplitName::Train))
        .map(|s| s.writer_id.as_str())
        .collect();
    let trained: Vec<&str> = trained.into_iter().collect();
    let n = cfg.identify.top_n.max(1);

    fs::create_dir_all(out)?;
    let mut w = csv_writer(&out.join("decisions.csv"))?;
    w.write_record(["sampleId", "writerId", "predicted", "top1", &format!("top{n}")])?;
    let mut hits_n = 0usize;
    for (d, truth) in decisions.iter().zip(&truths) {
        let top1 = d.final_writer == *truth;
        let top_n = top1
            || trained
                .binary_search(truth)
                .is_ok_and(|t| in_top_n(&d.scores, t, n));
        hits_n += usize::from(top_n);
        w.write_record([
            d.page_id.as_str(),
            truth,
            d.final_writer.as_str(),
            if top1 { "1" } else { "0" },
            if top_n { "1" } else { "0" },
        ])?;
    }
    w.flush()?;
    write_json(
        &out.join("summary.json"),
        &IdentifySummary {
            pipeline: &p,
            train: &train,
            test,
            test_samples: result.pages,
            top1: result.top1,
            top2: result.top2,
            top5: result.top5,
            top_n: n,
            top_n_accuracy: 100.0 * hits_n as f64 / decisions.len() as f64,
        },
    )?;
    eprintln!("top-1 {:.2}%  top-{n} {:.2}%", result.top1, 100.0 * hits_n as f64 / decisions.len() as f64);
    Ok(())
}

/// One vector per sample (the mean of its patch vectors), in sample-id
/// order.
fn page_vectors(table: &FeatureTable) -> Result<Vec<(String, Vec<f64>)>> {
    table
        .iter()
        .map(|(id, v)| Ok((id.clone(), concatenated_mean(v)?)))
        .collect()
}

pub fn verify(cfg: &Config, features: &Path, manifest: &Path, out: &Path) -> Result<()> {
    let records = read_manifest(manifest)?;
    let writer: BTreeMap<&str, &str> = records
        .iter()
        .map(|r| (r.sample_id.as_str(), r.writer_id.as_str()))
        .collect();
    let table = load_feature_table(&records, features, false)?;
    let items: Vec<(String, String, Vec<f64>)> = page_vectors(&table)?
        .into_iter()
        .map(|(id, v)| {
            let w = writer[id.as_str()].to_string();
            (id, w, v)
        })
        .collect();
    let measure = cfg.verify.measure;
    let (same, diff) = pair_distances(&items, measure)?;

    fs::create_dir_all(out)?;
    let mut w = csv_writer(&out.join("pairs.csv"))?;
    w.write_record(["a", "b", "sameWriter", "distance"])?;
    for (flag, pairs) in [("1", &same), ("0", &diff)] {
        for p in pairs {
            w.write_record([p.a.as_str(), p.b.as_str(), flag, &p.dw.to_string()])?;
        }
    }
    w.flush()?;

    let summary = match cfg.verify.mode {
        VerifyMode::Eer => {
            let s: Vec<f64> = same.iter().map(|p| p.dw).collect();
            let d: Vec<f64> = diff.iter().map(|p| p.dw).collect();
            let curve = far_frr_curve(&d, &s)?;
            let mut w = csv_writer(&out.join("curve.csv"))?;
            w.write_record(["threshold", "far", "frr"])?;
            for i in 0..curve.thresholds.len() {
                w.write_record([curve.thresholds[i], curve.far[i], curve.frr[i]].map(|v| v.to_string()))?;
            }
            w.flush()?;
            eprintln!("EER {:.4}  accuracy {:.2}%", curve.eer, curve.accuracy_pct);
            serde_json::json!({
                "measure": measure,
                "mode": "eer",
                "samePairs": same.len(),
                "differentPairs": diff.len(),
                "eer": curve.eer,
                "accuracyPct": curve.accuracy_pct,
            })
        }
        VerifyMode::Sweep => {
            let r = threshold_sweep(&same, &diff)?;
            eprintln!("best threshold {:.2}  accuracy {:.4}", r.best_d, r.accuracy);
            serde_json::json!({
                "measure": measure,
                "mode": "sweep",
                "samePairs": same.len(),
                "differentPairs": diff.len(),
                "step": r.step,
                "bestD": r.best_d,
                "tpr": r.tpr,
                "tnr": r.tnr,
                "accuracy": r.accuracy,
            })
        }
    };
    write_json(&out.join("verify.json"), &summary)
}

pub fn cluster(cfg: &Config, features: &Path, manifest: Option<&Path>, out: &Path) -> Result<()> {
    let records = manifest.map(read_manifest).transpose()?;
    let table = match &records {
        Some(r) => load_feature_table(r, features, false)?,
        None => table_from_vectors(ingest_features(features, &IngestOptions::default())?),
    };
    let (ids, vectors): (Vec<String>, Vec<Vec<f64>>) = page_vectors(&table)?.into_iter().unzip();
    let c = &cfg.cluster;
    let assignment = cluster_vectors(&ids, &vectors, c.k, c.method, c.seed)?;

    let styles: Option<BTreeMap<&str, Style>> = records
        .as_ref()
        .map(|r| r.iter().map(|r| (r.sample_id.as_str(), r.style)).collect());
    fs::create_dir_all(out)?;
    let mut w = csv_writer(&out.join("assignments.csv"))?;
    w.write_record(["itemId", "cluster", "style"])?;
    for (id, label) in assignment.item_ids.iter().zip(&assignment.labels) {
        let style = styles.as_ref().map(|s| s[id.as_str()].to_string()).unwrap_or_default();
        w.write_record([id.as_str(), &label.to_string(), &style])?;
    }
    w.flush()?;

    let nmi_style = styles
        .map(|s| {
            let truth: Vec<usize> = ids
                .iter()
                .map(|id| Style::ALL.iter().position(|&x| x == s[id.as_str()]).expect("known style"))
                .collect();
            nmi(&truth, &assignment.labels)
        })
        .transpose()?;
    if let Some(v) = nmi_style {
        eprintln!("NMI against style {v:.4}");
    }
    write_json(
        &out.join("cluster.json"),
        &serde_json::json!({
            "method": c.method,
            "k": c.k,
            "seed": c.seed,
            "items": ids.len(),
            "nmiStyle": nmi_style,
        }),
    )
}

fn backend_name(b: &Backend) -> &'static str {
    match b {
        Backend::NearestCentroid => "nc",
        Backend::Knn { .. } => "knn",
        Backend::LinearOneVsAll { .. } => "linear",
    }
}

fn model_name(p: &PipelineConfig) -> String {
    let strategy = match p.strategy {
        Strategy::Major => "major",
        Strategy::Mean => "mean",
    };
    format!("{}-{}-{strategy}", p.family, backend_name(&p.backend))
}

/// The models to evaluate: the configured list, or the pipeline with each
/// backend when ranking, or the pipeline alone.
fn eval_models(cfg: &Config) -> Vec<ModelSpec> {
    if !cfg.eval.models.is_empty() {
        return cfg.eval.models.clone();
    }
    let backends = if cfg.eval.borda {
        vec![Backend::NearestCentroid, Backend::knn(3), Backend::linear()]
    } else {
        vec![cfg.pipeline.backend]
    };
    backends
        .into_iter()
        .map(|backend| {
            let pipeline = PipelineConfig {
                backend,
                ..cfg.pipeline.clone()
            };
            ModelSpec {
                name: model_name(&pipeline),
                pipeline,
            }
        })
        .collect()
}

pub fn eval(cfg: &Config, manifest: &Path, out: &Path) -> Result<()> {
    if !cfg.eval.nine_tuple && !cfg.eval.borda {
        bail!("nothing to evaluate: pass --nine-tuple and/or --borda");
    }
    let mut corpus = Corpus::from_manifest(manifest, &cfg.segment, &cfg.augment)?;
    if let Some(extra) = &cfg.eval.pretrain_corpus {
        let extra = Corpus::from_manifest(extra, &cfg.segment, &cfg.augment)?;
        corpus = merge_corpora(&corpus, &extra)?;
    }
    let models = eval_models(cfg);
    if cfg.eval.borda && models.len() < 2 {
        bail!("ranking needs at least two models");
    }

    // Models that differ only in classifier share one feature table.
    let mut tables: BTreeMap<String, FeatureTable> = BTreeMap::new();
    let mut reports = Vec::with_capacity(models.len());
    for m in &models {
        let p = &m.pipeline;
        let key = serde_json::to_string(&(p.family, p.patches_per_sample, p.patch_mode, p.patch_size, p.seed))?;
        if !tables.contains_key(&key) {
            tables.insert(key.clone(), feature_table(&corpus, p, &cfg.segment)?);
        }
        let report = nine_tuple(&corpus, &tables[&key], p, &p.backend)?;
        eprintln!("{}: {:?}", m.name, report.top1.values().map(|v| (v * 100.0).round() / 100.0));
        reports.push(ModelReport {
            model: m.name.clone(),
            pipeline: p.clone(),
            nine_tuple: report,
            rank: None,
        });
    }
    let ranking = if cfg.eval.borda { rank_reports(&mut reports)? } else { None };

    fs::create_dir_all(out)?;
    fs::write(out.join("nine_tuple.csv"), nine_tuple_csv(&reports)?)?;
    if let Some(r) = &ranking {
        let mut w = csv_writer(&out.join("borda.csv"))?;
        let mut header = vec!["model".to_string(), "aggregate".into(), "rank".into()];
        header.extend(scriptrace::eval::NineTuple::NAMES.iter().map(|n| format!("points_{n}")));
        w.write_record(&header)?;
        for i in 0..r.model_ids.len() {
            let mut row = vec![r.model_ids[i].clone(), r.aggregate[i].to_string(), r.rank[i].to_string()];
            row.extend(r.per_metric_points[i].iter().map(usize::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    write_json(
        &out.join("eval.json"),
        &serde_json::json!({
            "writers": corpus.writers.len(),
            "samples": corpus.samples.len(),
            "models": reports,
            "ranking": ranking,
        }),
    )
}

pub fn merge(a: &Path, b: &Path, out: &Path) -> Result<()> {
    // Image paths become absolute so the merged manifest can live anywhere.
    let load = |path: &Path| -> Result<Vec<ManifestRecord>> {
        read_manifest(path)?
            .into_iter()
            .map(|mut r| {
                let abs = std::path::absolute(r.resolve_image(path))?;
                r.image_path = abs.to_string_lossy().into_owned();
                Ok(r)
            })
            .collect()
    };
    let merged = merge_manifests(&load(a)?, &load(b)?)?;
    if let Some(dir) = out.parent() {
        fs::create_dir_all(dir)?;
    }
    write_manifest(out, &merged)?;
    let writers: BTreeSet<&str> = merged.iter().map(|r| r.writer_id.as_str()).collect();
    eprintln!("merged {} records of {} writers", merged.len(), writers.len());
    Ok(())
}
