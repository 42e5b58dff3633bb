//! The cross-style experimental grid: corpora with slow/medium/fast style
//! sets, the nine-tuple of setup accuracies, Borda ranking of models and
//! corpus merging.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augment::{expand_page, split211, AugmentConfig, Half, SampleTag};
use crate::cluster::Style;
use crate::error::{Error, Result};
use crate::features::{compute_epsilon, extract, extract_fdh, Family, FeatureVector};
use crate::identify::{
    fit, in_top_n, scalar_means, strategy_major, strategy_mean, Backend, Classifier, PageDecision, Strategy,
};
use crate::imaging::{binarize, trace_contours, BinaryImage, GrayImage};
use crate::io::manifest::collision_prefix;
use crate::io::{load_gray, read_manifest, ManifestRecord, SplitName};
use crate::page::PageAnalysis;
use crate::patches::{sample_patches, PatchConfig, SampleMode};
use crate::segmentation::SegmentConfig;
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSample {
    pub sample_id: String,
    pub writer_id: String,
    pub style: Style,
    pub split: SplitName,
    pub parent_page_id: String,
    pub half: Half,
    pub variant_index: u32,
    pub image: BinaryImage,
}

impl CorpusSample {
    pub fn record(&self, image_path: String) -> ManifestRecord {
        ManifestRecord {
            sample_id: self.sample_id.clone(),
            writer_id: self.writer_id.clone(),
            style: self.style,
            split: Some(self.split),
            parent_page_id: self.parent_page_id.clone(),
            half: self.half,
            variant_index: self.variant_index,
            image_path,
            elapsed_seconds: None,
        }
    }
}

/// A full page before expansion.
#[derive(Debug, Clone)]
pub struct PageInput {
    pub page_id: String,
    pub writer_id: String,
    pub style: Style,
    pub image: GrayImage,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    /// Sorted writer roster, shared by all style sets.
    pub writers: Vec<String>,
    pub samples: Vec<CorpusSample>,
}

impl Corpus {
    /// Expands every page into its 22 samples and applies the 2:1:1 split
    /// per writer and style. Pages of one (writer, style) are taken in
    /// page-id order.
    pub fn from_pages(pages: &[PageInput], seg: &SegmentConfig, aug: &AugmentConfig) -> Result<Self> {
        let expanded: Vec<Vec<_>> = pages
            .par_iter()
            .map(|p| {
                let a = PageAnalysis::analyze(&p.image, seg);
                expand_page(&p.page_id, &a, seg, aug)
            })
            .collect::<Result<_>>()?;
        let mut groups: BTreeMap<(&str, Style), Vec<usize>> = BTreeMap::new();
        for (i, p) in pages.iter().enumerate() {
            groups.entry((p.writer_id.as_str(), p.style)).or_default().push(i);
        }
        let mut samples = Vec::with_capacity(pages.len() * crate::augment::SAMPLES_PER_PAGE);
        for ((writer, style), mut idx) in groups {
            idx.sort_by(|&a, &b| pages[a].page_id.cmp(&pages[b].page_id));
            let tags: Vec<Vec<SampleTag>> =
                idx.iter().map(|&i| expanded[i].iter().map(SampleTag::from).collect()).collect();
            let split = split211(&format!("{writer}/{style}"), &tags)?;
            let names = split_lookup(&split);
            for &i in &idx {
                for s in &expanded[i] {
                    samples.push(CorpusSample {
                        sample_id: s.sample_id.clone(),
                        writer_id: writer.to_string(),
                        style,
                        split: names[s.sample_id.as_str()],
                        parent_page_id: s.parent_page_id.clone(),
                        half: s.half,
                        variant_index: s.variant_index,
                        image: s.image.clone(),
                    });
                }
            }
        }
        Self::new(samples)
    }

    /// Builds the corpus from raw samples and checks that every style set
    /// has the same writer roster.
    pub fn new(samples: Vec<CorpusSample>) -> Result<Self> {
        let mut rosters: BTreeMap<Style, BTreeSet<&str>> = BTreeMap::new();
        for s in &samples {
            rosters.entry(s.style).or_default().insert(&s.writer_id);
        }
        let mut it = rosters.iter();
        if let Some((_, first)) = it.next() {
            if let Some((style, _)) = it.find(|(_, r)| *r != first) {
                return Err(Error::IncompleteSet {
                    writer: "*".into(),
                    reason: format!("style set {style} has a different writer roster"),
                });
            }
        }
        let writers: Vec<String> = rosters
            .values()
            .next()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .unwrap_or_default();
        Ok(Self { writers, samples })
    }

    /// Loads a manifest. Page records are expanded and split; sample
    /// records are read as they are.
    pub fn from_manifest(path: &Path, seg: &SegmentConfig, aug: &AugmentConfig) -> Result<Self> {
        let records = read_manifest(path)?;
        if records.iter().all(|r| r.split.is_none()) {
            let pages: Vec<PageInput> = records
                .par_iter()
                .map(|r| {
                    Ok(PageInput {
                        page_id: r.sample_id.clone(),
                        writer_id: r.writer_id.clone(),
                        style: r.style,
                        image: load_gray(&r.resolve_image(path))?,
                    })
                })
                .collect::<Result<_>>()?;
            return Self::from_pages(&pages, seg, aug);
        }
        let samples = records
            .par_iter()
            .map(|r| {
                let split = r.split.ok_or_else(|| {
                    Error::InvalidArgument(format!("sample {} has no split", r.sample_id))
                })?;
                Ok(CorpusSample {
                    sample_id: r.sample_id.clone(),
                    writer_id: r.writer_id.clone(),
                    style: r.style,
                    split,
                    parent_page_id: r.parent_page_id.clone(),
                    half: r.half,
                    variant_index: r.variant_index,
                    image: binarize(&load_gray(&r.resolve_image(path))?).0,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(samples)
    }

    /// A corpus without pixels, for runs on externally computed features.
    /// Every record needs a split.
    pub fn index_only(records: &[ManifestRecord]) -> Result<Self> {
        let samples = records
            .iter()
            .map(|r| {
                Ok(CorpusSample {
                    sample_id: r.sample_id.clone(),
                    writer_id: r.writer_id.clone(),
                    style: r.style,
                    split: r.split.ok_or_else(|| {
                        Error::InvalidArgument(format!("sample {} has no split", r.sample_id))
                    })?,
                    parent_page_id: r.parent_page_id.clone(),
                    half: r.half,
                    variant_index: r.variant_index,
                    image: BinaryImage::new(1, 1),
                })
            })
            .collect::<Result<_>>()?;
        Self::new(samples)
    }

    pub fn set(&self, style: Style, split: SplitName) -> impl Iterator<Item = &CorpusSample> + '_ {
        self.samples.iter().filter(move |s| s.style == style && s.split == split)
    }
}

fn split_lookup(split: &crate::augment::Split) -> BTreeMap<&str, SplitName> {
    split
        .train
        .iter()
        .map(|s| (s.as_str(), SplitName::Train))
        .chain(split.validation.iter().map(|s| (s.as_str(), SplitName::Val)))
        .chain(split.test.iter().map(|s| (s.as_str(), SplitName::Test)))
        .collect()
}

/// Feature family, patch sampling, classifier and page strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub family: Family,
    pub backend: Backend,
    pub strategy: Strategy,
    pub patches_per_sample: usize,
    pub patch_mode: SampleMode,
    pub patch_size: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            family: Family::Fdh,
            backend: Backend::NearestCentroid,
            strategy: Strategy::Major,
            patches_per_sample: 24,
            patch_mode: SampleMode::Char,
            patch_size: 128,
            seed: 7,
        }
    }
}

/// Per-patch vectors of every sample, keyed by sample id.
pub type FeatureTable = BTreeMap<String, Vec<FeatureVector>>;

fn patch_vector(family: Family, pixels: &BinaryImage, eps: usize, seg: &SegmentConfig) -> Result<Vec<f64>> {
    match family {
        // The sample's leg length keeps patch histograms comparable.
        Family::Fdh => Ok(extract_fdh(&trace_contours(pixels), eps)),
        f => extract(f, &PageAnalysis::analyze_binary(pixels, seg)),
    }
}

/// Samples `patches_per_sample` patches from one sample image and computes
/// the family on each.
pub fn sample_features(
    sample_id: &str,
    image: &BinaryImage,
    p: &PipelineConfig,
    seg: &SegmentConfig,
) -> Result<Vec<FeatureVector>> {
    let a = PageAnalysis::analyze_binary(image, seg);
    let eps = a.stats.as_ref().map(compute_epsilon).unwrap_or(2);
    let cfg = PatchConfig::new(p.patch_size)?;
    let patches = sample_patches(
        &a,
        sample_id,
        p.patches_per_sample,
        p.patch_mode,
        &cfg,
        seed::derive(p.seed, sample_id),
    )?;
    patches
        .iter()
        .enumerate()
        .map(|(i, patch)| {
            Ok(FeatureVector {
                sample_id: sample_id.to_string(),
                patch_id: format!("{i:03}"),
                family: p.family,
                values: patch_vector(p.family, &patch.pixels, eps, seg)?,
                center: Some((patch.center.0 as f64, patch.center.1 as f64)),
            })
        })
        .collect()
}

pub fn feature_table(corpus: &Corpus, p: &PipelineConfig, seg: &SegmentConfig) -> Result<FeatureTable> {
    corpus
        .samples
        .par_iter()
        .map(|s| Ok((s.sample_id.clone(), sample_features(&s.sample_id, &s.image, p, seg)?)))
        .collect()
}

/// Groups loose vectors (for example from a feature file) by sample.
pub fn table_from_vectors(vectors: Vec<FeatureVector>) -> FeatureTable {
    let mut table = FeatureTable::new();
    for v in vectors {
        table.entry(v.sample_id.clone()).or_default().push(v);
    }
    table
}

/// Builds a classifier from training vectors and writer labels.
pub trait Trainer: Sync {
    fn train(&self, x: &[Vec<f64>], labels: &[String]) -> Result<Box<dyn Classifier>>;
}

impl Trainer for Backend {
    fn train(&self, x: &[Vec<f64>], labels: &[String]) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(fit(self, x, labels)?))
    }
}

/// Top-N page accuracies of one setup, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetupResult {
    pub top1: f64,
    pub top2: f64,
    pub top5: f64,
    pub pages: usize,
}

fn training_data<'a>(
    samples: impl Iterator<Item = &'a CorpusSample>,
    table: &FeatureTable,
    strategy: Strategy,
    n_p: usize,
) -> Result<(Vec<Vec<f64>>, Vec<String>)> {
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for s in samples {
        let vecs = table
            .get(&s.sample_id)
            .ok_or_else(|| Error::UnknownSample(s.sample_id.clone()))?;
        match strategy {
            Strategy::Major => {
                for v in vecs {
                    x.push(v.values.clone());
                    y.push(s.writer_id.clone());
                }
            }
            Strategy::Mean => {
                x.push(scalar_means(vecs, n_p)?);
                y.push(s.writer_id.clone());
            }
        }
    }
    if x.is_empty() {
        return Err(Error::Empty("training set"));
    }
    Ok((x, y))
}

fn decide(model: &dyn Classifier, s: &CorpusSample, table: &FeatureTable, strategy: Strategy, n_p: usize) -> Result<PageDecision> {
    let vecs = table
        .get(&s.sample_id)
        .ok_or_else(|| Error::UnknownSample(s.sample_id.clone()))?;
    match strategy {
        Strategy::Major => strategy_major(model, &s.sample_id, vecs),
        Strategy::Mean => strategy_mean(model, &s.sample_id, vecs, n_p),
    }
}

fn score_setup(
    model: &dyn Classifier,
    test: &[&CorpusSample],
    table: &FeatureTable,
    strategy: Strategy,
    n_p: usize,
) -> Result<SetupResult> {
    Ok(score_with_decisions(model, test, table, strategy, n_p)?.0)
}

fn score_with_decisions(
    model: &dyn Classifier,
    test: &[&CorpusSample],
    table: &FeatureTable,
    strategy: Strategy,
    n_p: usize,
) -> Result<(SetupResult, Vec<PageDecision>)> {
    if test.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let decisions: Vec<PageDecision> = test
        .par_iter()
        .map(|s| decide(model, s, table, strategy, n_p))
        .collect::<Result<_>>()?;
    let (mut hits, mut top2, mut top5) = (0usize, 0usize, 0usize);
    for (d, s) in decisions.iter().zip(test) {
        if d.final_writer == s.writer_id {
            hits += 1;
        }
        // A test writer unseen in training can never be a hit.
        if let Ok(t) = model.writers().binary_search(&s.writer_id) {
            // Top-1 hit implies membership in any larger list.
            let top1 = d.final_writer == s.writer_id;
            top2 += usize::from(top1 || in_top_n(&d.scores, t, 2));
            top5 += usize::from(top1 || in_top_n(&d.scores, t, 5));
        }
    }
    let pct = |h: usize| 100.0 * h as f64 / test.len() as f64;
    let result = SetupResult {
        top1: pct(hits),
        top2: pct(top2),
        top5: pct(top5),
        pages: test.len(),
    };
    Ok((result, decisions))
}

/// Trains on the union of `train` style sets (train split) and reports
/// accuracy on the test split of `test`.
pub fn run_setup(
    corpus: &Corpus,
    table: &FeatureTable,
    train: &[Style],
    test: Style,
    p: &PipelineConfig,
    trainer: &dyn Trainer,
) -> Result<SetupResult> {
    Ok(run_setup_detailed(corpus, table, train, test, p, trainer)?.0)
}

/// [`run_setup`] that also returns the per-sample decisions, in test-set
/// order.
pub fn run_setup_detailed(
    corpus: &Corpus,
    table: &FeatureTable,
    train: &[Style],
    test: Style,
    p: &PipelineConfig,
    trainer: &dyn Trainer,
) -> Result<(SetupResult, Vec<PageDecision>)> {
    let test_set: Vec<&CorpusSample> = corpus.set(test, SplitName::Test).collect();
    if test_set.is_empty() {
        return Err(Error::Empty("test set"));
    }
    let (x, y) = training_data(
        train.iter().flat_map(|&s| corpus.set(s, SplitName::Train)),
        table,
        p.strategy,
        p.patches_per_sample,
    )?;
    let model = trainer.train(&x, &y)?;
    score_with_decisions(model.as_ref(), &test_set, table, p.strategy, p.patches_per_sample)
}

/// The nine headline accuracies, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NineTuple {
    pub ss: f64,
    pub mm: f64,
    pub ff: f64,
    pub smv: f64,
    pub sfv: f64,
    pub mfv: f64,
    pub smf_s: f64,
    pub smf_m: f64,
    pub smf_f: f64,
}

impl NineTuple {
    pub const NAMES: [&'static str; 9] = [
        "AE_ss", "AE_mm", "AE_ff", "AE_smv", "AE_sfv", "AE_mfv", "AE_smf/s", "AE_smf/m", "AE_smf/f",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.ss, self.mm, self.ff, self.smv, self.sfv, self.mfv, self.smf_s, self.smf_m, self.smf_f,
        ]
    }

    pub fn from_values(v: [f64; 9]) -> Self {
        Self {
            ss: v[0],
            mm: v[1],
            ff: v[2],
            smv: v[3],
            sfv: v[4],
            mfv: v[5],
            smf_s: v[6],
            smf_m: v[7],
            smf_f: v[8],
        }
    }

    /// `AE_smv + AE_sfv + AE_mfv`, the ranking tie-break.
    pub fn cross_style_sum(&self) -> f64 {
        self.smv + self.sfv + self.mfv
    }
}

/// Nine-tuples at Top-1 (headline), Top-2 and Top-5, plus every underlying
/// setup keyed as `E_<train>_<test>` with `smf` for the combined model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NineTupleReport {
    pub top1: NineTuple,
    pub top2: NineTuple,
    pub top5: NineTuple,
    pub setups: BTreeMap<String, SetupResult>,
}

/// Runs the twelve setups behind the nine-tuple. Four models are trained:
/// one per style set and one on the union of the three training sets, which
/// all three combined entries share.
pub fn nine_tuple(
    corpus: &Corpus,
    table: &FeatureTable,
    p: &PipelineConfig,
    trainer: &dyn Trainer,
) -> Result<NineTupleReport> {
    let models: Vec<(String, Vec<Style>)> = Style::ALL
        .iter()
        .map(|&s| (s.letter().to_string(), vec![s]))
        .chain(std::iter::once(("smf".to_string(), Style::ALL.to_vec())))
        .collect();
    let mut setups = BTreeMap::new();
    for (name, train) in &models {
        let (x, y) = training_data(
            train.iter().flat_map(|&s| corpus.set(s, SplitName::Train)),
            table,
            p.strategy,
            p.patches_per_sample,
        )?;
        let model = trainer.train(&x, &y)?;
        for test in Style::ALL {
            let test_set: Vec<&CorpusSample> = corpus.set(test, SplitName::Test).collect();
            let r = score_setup(model.as_ref(), &test_set, table, p.strategy, p.patches_per_sample)?;
            setups.insert(format!("E_{name}_{}", test.letter()), r);
        }
    }
    let tuple = |f: fn(&SetupResult) -> f64| {
        let g = |k: &str| f(&setups[k]);
        NineTuple {
            ss: g("E_s_s"),
            mm: g("E_m_m"),
            ff: g("E_f_f"),
            smv: (g("E_s_m") + g("E_m_s")) / 2.0,
            sfv: (g("E_s_f") + g("E_f_s")) / 2.0,
            mfv: (g("E_m_f") + g("E_f_m")) / 2.0,
            smf_s: g("E_smf_s"),
            smf_m: g("E_smf_m"),
            smf_f: g("E_smf_f"),
        }
    };
    Ok(NineTupleReport {
        top1: tuple(|r| r.top1),
        top2: tuple(|r| r.top2),
        top5: tuple(|r| r.top5),
        setups,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BordaRanking {
    pub model_ids: Vec<String>,
    /// Per model, per metric: how many models score strictly lower.
    pub per_metric_points: Vec<[usize; 9]>,
    /// Max rule: the best per-metric points of each model.
    pub aggregate: Vec<usize>,
    /// 1-based rank of each model.
    pub rank: Vec<usize>,
}

impl BordaRanking {
    /// Model ids from first to last place.
    pub fn order(&self) -> Vec<&str> {
        let mut idx: Vec<usize> = (0..self.model_ids.len()).collect();
        idx.sort_by_key(|&i| self.rank[i]);
        idx.into_iter().map(|i| self.model_ids[i].as_str()).collect()
    }
}

/// Borda ranking over the nine accuracies. Draws on the aggregate go to the
/// larger cross-style sum, then to the smaller model id.
pub fn borda_rank(models: &[(String, NineTuple)]) -> Result<BordaRanking> {
    if models.len() < 2 {
        return Err(Error::InvalidArgument("Borda ranking needs at least two models".into()));
    }
    let vals: Vec<[f64; 9]> = models.iter().map(|(_, t)| t.values()).collect();
    let per_metric_points: Vec<[usize; 9]> = vals
        .iter()
        .map(|v| {
            let mut pts = [0usize; 9];
            for (m, p) in pts.iter_mut().enumerate() {
                *p = vals.iter().filter(|o| o[m] < v[m]).count();
            }
            pts
        })
        .collect();
    let aggregate: Vec<usize> = per_metric_points
        .iter()
        .map(|p| *p.iter().max().expect("nine metrics"))
        .collect();
    let mut order: Vec<usize> = (0..models.len()).collect();
    order.sort_by(|&a, &b| {
        aggregate[b]
            .cmp(&aggregate[a])
            .then(models[b].1.cross_style_sum().total_cmp(&models[a].1.cross_style_sum()))
            .then(models[a].0.cmp(&models[b].0))
    });
    let mut rank = vec![0; models.len()];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos + 1;
    }
    Ok(BordaRanking {
        model_ids: models.iter().map(|(id, _)| id.clone()).collect(),
        per_metric_points,
        aggregate,
        rank,
    })
}

/// Union of two corpora. When any writer or sample id of `b` collides with
/// `a`, every id of `b` gets a distinguishing prefix.
pub fn merge_corpora(a: &Corpus, b: &Corpus) -> Result<Corpus> {
    let prefix = collision_prefix(
        a.writers.iter().map(String::as_str),
        a.samples.iter().map(|s| s.sample_id.as_str()),
        b.writers.iter().map(String::as_str),
        b.samples.iter().map(|s| s.sample_id.as_str()),
    );
    let mut samples = a.samples.clone();
    samples.extend(b.samples.iter().map(|s| CorpusSample {
        sample_id: format!("{prefix}{}", s.sample_id),
        writer_id: format!("{prefix}{}", s.writer_id),
        parent_page_id: format!("{prefix}{}", s.parent_page_id),
        ..s.clone()
    }));
    Corpus::new(samples)
}

/// One model's line in an evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    pub pipeline: PipelineConfig,
    pub nine_tuple: NineTupleReport,
    pub rank: Option<usize>,
}

/// Attaches Borda ranks to the reports when there are at least two.
pub fn rank_reports(reports: &mut [ModelReport]) -> Result<Option<BordaRanking>> {
    if reports.len() < 2 {
        return Ok(None);
    }
    let models: Vec<(String, NineTuple)> = reports.iter().map(|r| (r.model.clone(), r.nine_tuple.top1)).collect();
    let ranking = borda_rank(&models)?;
    for (r, &rank) in reports.iter_mut().zip(&ranking.rank) {
        r.rank = Some(rank);
    }
    Ok(Some(ranking))
}

/// CSV with one row per model: the nine Top-1 accuracies, the rank (empty
/// when unranked), then the Top-2 and Top-5 tuples. Values have four
/// decimals.
pub fn nine_tuple_csv(reports: &[ModelReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["model".to_string()];
    header.extend(NineTuple::NAMES.iter().map(|n| n.to_string()));
    header.push("rank".into());
    for k in ["top2", "top5"] {
        header.extend(NineTuple::NAMES.iter().map(|n| format!("{k}_{n}")));
    }
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![r.model.clone()];
        let fmt = |t: &NineTuple| t.values().map(|v| format!("{v:.4}"));
        row.extend(fmt(&r.nine_tuple.top1));
        row.push(r.rank.map(|k| k.to_string()).unwrap_or_default());
        row.extend(fmt(&r.nine_tuple.top2));
        row.extend(fmt(&r.nine_tuple.top5));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(v: f64) -> NineTuple {
        NineTuple::from_values([v; 9])
    }

    #[test]
    fn dominance_ranks_first() {
        let mut a = tuple(50.0);
        a.ss = 90.0;
        let r = borda_rank(&[("b".into(), tuple(40.0)), ("a".into(), a)]).unwrap();
        assert_eq!(r.order(), vec!["a", "b"]);
        assert_eq!(r.aggregate, vec![0, 1]);
    }

    #[test]
    fn aggregate_ties_use_cross_style_sum() {
        // Each wins one metric; b is stronger across styles.
        let a = NineTuple::from_values([90.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 10.0]);
        let b = NineTuple::from_values([10.0, 10.0, 10.0, 90.0, 10.0, 10.0, 10.0, 10.0, 10.0]);
        let r = borda_rank(&[("a".into(), a), ("b".into(), b)]).unwrap();
        assert_eq!(r.order(), vec!["b", "a"]);
        let r = borda_rank(&[("z".into(), tuple(5.0)), ("y".into(), tuple(5.0))]).unwrap();
        assert_eq!(r.order(), vec!["y", "z"]);
    }

    #[test]
    fn borda_needs_two_models() {
        assert!(borda_rank(&[("a".into(), tuple(1.0))]).is_err());
    }

    fn toy_corpus(writers: &[&str]) -> Corpus {
        let samples = writers
            .iter()
            .flat_map(|w| {
                Style::ALL.into_iter().map(move |style| CorpusSample {
                    sample_id: format!("{w}-{style}"),
                    writer_id: w.to_string(),
                    style,
                    split: SplitName::Test,
                    parent_page_id: format!("{w}-{style}"),
                    half: Half::Full,
                    variant_index: 0,
                    image: BinaryImage::new(1, 1),
                })
            })
            .collect();
        Corpus::new(samples).unwrap()
    }

    #[test]
    fn merging_remaps_collisions() {
        let a = toy_corpus(&["w1", "w2"]);
        let m = merge_corpora(&a, &a).unwrap();
        assert_eq!(m.writers.len(), 4);
        assert_eq!(m.samples.len(), 12);
        let b = toy_corpus(&["w3"]);
        assert_eq!(merge_corpora(&a, &b).unwrap().writers, vec!["w1", "w2", "w3"]);
    }

    #[test]
    fn mismatched_rosters_are_rejected() {
        let mut c = toy_corpus(&["w1", "w2"]);
        c.samples.retain(|s| !(s.writer_id == "w2" && s.style == Style::Fast));
        assert!(Corpus::new(c.samples).is_err());
    }
}
