//! Writer classifiers and page-level decisions.
//!
//! Every backend scores all writers for a query vector (higher is more
//! likely). Writers are kept in ascending id order, so "lowest index" and
//! "smallest writer id" coincide wherever ties are broken.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::verify::{distance, euclidean, DistanceMeasure};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "kebab-case")]
pub enum Backend {
    NearestCentroid,
    Knn {
        k: usize,
        measure: DistanceMeasure,
    },
    LinearOneVsAll {
        epochs: usize,
        learning_rate: f64,
    },
}

impl Backend {
    pub fn knn(k: usize) -> Self {
        Self::Knn {
            k,
            measure: DistanceMeasure::ChiSquare,
        }
    }

    pub fn linear() -> Self {
        Self::LinearOneVsAll {
            epochs: 100,
            learning_rate: 0.5,
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    /// `nearest-centroid`, `knn` (k = 3, chi-square) or `linear`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest-centroid" | "nc" => Ok(Self::NearestCentroid),
            "knn" => Ok(Self::knn(3)),
            "linear" | "linear-one-vs-all" => Ok(Self::linear()),
            other => Err(Error::InvalidArgument(format!("unknown backend {other:?}"))),
        }
    }
}

/// Anything that scores writers for a feature vector.
pub trait Classifier: Send + Sync {
    /// Writer ids in ascending order; scores follow this order.
    fn writers(&self) -> &[String];

    fn scores(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Index of the best writer; ties go to the smallest id.
    fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.scores(x)?))
    }
}

/// First index of the maximum.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum Params {
    Centroids {
        centroids: Vec<Vec<f64>>,
    },
    Neighbors {
        points: Vec<Vec<f64>>,
        labels: Vec<usize>,
    },
    Linear {
        mean: Vec<f64>,
        scale: Vec<f64>,
        /// One row per writer, bias last.
        weights: Vec<Vec<f64>>,
        losses: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub version: u32,
    pub backend: Backend,
    pub writers: Vec<String>,
    pub dim: usize,
    params: Params,
}

impl Model {
    /// Mean training loss per epoch for the linear backend.
    pub fn training_losses(&self) -> Option<&[f64]> {
        match &self.params {
            Params::Linear { losses, .. } => Some(losses),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Model = serde_json::from_str(s)?;
        if m.version != MODEL_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model version {}",
                m.version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl Classifier for Model {
    fn writers(&self) -> &[String] {
        &self.writers
    }

    fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        match (&self.params, self.backend) {
            (Params::Centroids { centroids }, _) => centroids
                .iter()
                .map(|c| euclidean(c, x).map(|d| -d))
                .collect(),
            (Params::Neighbors { points, labels }, Backend::Knn { k, measure }) => {
                knn_scores(points, labels, self.writers.len(), k, measure, x)
            }
            (Params::Linear { mean, scale, weights, .. }, _) => {
                let z = standardize(x, mean, scale);
                Ok(weights.iter().map(|w| dot_bias(w, &z)).collect())
            }
            _ => Err(Error::InvalidArgument("model parameters do not match backend".into())),
        }
    }
}

/// kNN writer scores: votes among the `k` nearest training points, plus a
/// bonus in `(0, 1]` from the writer's nearest distance so that vote ties
/// go to the closer writer and writers without votes are still ranked.
fn knn_scores(
    points: &[Vec<f64>],
    labels: &[usize],
    n_writers: usize,
    k: usize,
    measure: DistanceMeasure,
    x: &[f64],
) -> Result<Vec<f64>> {
    let mut dist: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| distance(p, x, measure).map(|d| (d, i)))
        .collect::<Result<_>>()?;
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut nearest = vec![f64::INFINITY; n_writers];
    for &(d, i) in &dist {
        let w = labels[i];
        if nearest[w].is_infinite() {
            nearest[w] = d;
        }
    }
    let mut scores: Vec<f64> = nearest.iter().map(|&d| 1.0 / (1.0 + d)).collect();
    for &(_, i) in dist.iter().take(k) {
        scores[labels[i]] += 1.0;
    }
    Ok(scores)
}

fn standardize(x: &[f64], mean: &[f64], scale: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(mean)
        .zip(scale)
        .map(|((v, m), s)| (v - m) / s)
        .collect()
}

fn dot_bias(w: &[f64], z: &[f64]) -> f64 {
    let n = z.len();
    w[..n].iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + w[n]
}

/// Full-batch gradient descent on the L2-regularized squared hinge loss.
/// The step is capped at the inverse smoothness constant, so the loss never
/// increases between epochs.
fn fit_linear(
    x: &[Vec<f64>],
    y: &[usize],
    n_writers: usize,
    epochs: usize,
    learning_rate: f64,
) -> Params {
    const LAMBDA: f64 = 1e-4;
    let dim = x[0].len();
    let n = x.len() as f64;
    let mut mean = vec![0.0; dim];
    for v in x {
        for (m, a) in mean.iter_mut().zip(v) {
            *m += a / n;
        }
    }
    let mut scale = vec![0.0; dim];
    for v in x {
        for ((s, a), m) in scale.iter_mut().zip(v).zip(&mean) {
            *s += (a - m) * (a - m) / n;
        }
    }
    for s in scale.iter_mut() {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    let z: Vec<Vec<f64>> = x.iter().map(|v| standardize(v, &mean, &scale)).collect();
    let frob: f64 = z.iter().map(|r| r.iter().map(|a| a * a).sum::<f64>() + 1.0).sum();
    let smooth = 2.0 * frob / n + LAMBDA;
    let step = learning_rate.min(1.0 / smooth);

    let mut weights = vec![vec![0.0; dim + 1]; n_writers];
    let loss = |weights: &[Vec<f64>]| -> f64 {
        let mut total = 0.0;
        for (w_idx, w) in weights.iter().enumerate() {
            let data: f64 = z
                .iter()
                .zip(y)
                .map(|(r, &label)| {
                    let t = if label == w_idx { 1.0 } else { -1.0 };
                    let h = (1.0 - t * dot_bias(w, r)).max(0.0);
                    h * h
                })
                .sum::<f64>()
                / n;
            let reg: f64 = w[..dim].iter().map(|a| a * a).sum::<f64>() * LAMBDA / 2.0;
            total += data + reg;
        }
        total / n_writers as f64
    };
    let mut losses = vec![loss(&weights)];
    for _ in 0..epochs {
        for (w_idx, w) in weights.iter_mut().enumerate() {
            let mut grad = vec![0.0; dim + 1];
            for (r, &label) in z.iter().zip(y) {
                let t = if label == w_idx { 1.0 } else { -1.0 };
                let h = 1.0 - t * dot_bias(w, r);
                if h > 0.0 {
                    let g = -2.0 * t * h / n;
                    for (gi, ri) in grad.iter_mut().zip(r) {
                        *gi += g * ri;
                    }
                    grad[dim] += g;
                }
            }
            for (gi, wi) in grad.iter_mut().zip(w.iter()).take(dim) {
                *gi += LAMBDA * wi;
            }
            for (wi, gi) in w.iter_mut().zip(&grad) {
                *wi -= step * gi;
            }
        }
        losses.push(loss(&weights));
    }
    Params::Linear {
        mean,
        scale,
        weights,
        losses,
    }
}

/// Fits a backend. Deterministic for given data; no backend currently
/// draws random numbers.
pub fn fit(backend: &Backend, x: &[Vec<f64>], labels: &[String]) -> Result<Model> {
    if x.is_empty() {
        return Err(Error::Empty("training vectors"));
    }
    if x.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: labels.len(),
        });
    }
    let dim = x[0].len();
    if let Some(v) = x.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    let writers: Vec<String> = labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if writers.len() < 2 {
        return Err(Error::SingleClass);
    }
    let y: Vec<usize> = labels
        .iter()
        .map(|l| writers.binary_search(l).expect("label is a writer"))
        .collect();
    let params = match *backend {
        Backend::NearestCentroid => {
            let mut sums = vec![vec![0.0; dim]; writers.len()];
            let mut counts = vec![0usize; writers.len()];
            for (v, &w) in x.iter().zip(&y) {
                counts[w] += 1;
                for (s, a) in sums[w].iter_mut().zip(v) {
                    *s += a;
                }
            }
            for (s, &c) in sums.iter_mut().zip(&counts) {
                s.iter_mut().for_each(|a| *a /= c as f64);
            }
            Params::Centroids { centroids: sums }
        }
        Backend::Knn { k, .. } => {
            if k == 0 {
                return Err(Error::InvalidArgument("k must be >= 1".into()));
            }
            Params::Neighbors {
                points: x.to_vec(),
                labels: y,
            }
        }
        Backend::LinearOneVsAll {
            epochs,
            learning_rate,
        } => {
            if !(learning_rate > 0.0) {
                return Err(Error::InvalidArgument("learning rate must be positive".into()));
            }
            fit_linear(x, &y, writers.len(), epochs, learning_rate)
        }
    };
    Ok(Model {
        version: MODEL_VERSION,
        backend: *backend,
        writers,
        dim,
        params,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageDecision {
    pub page_id: String,
    /// Per-patch winners (majority strategy only).
    pub per_patch_labels: Vec<String>,
    pub final_writer: String,
    /// One score per writer, in the classifier's writer order.
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Major,
    Mean,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "major" => Ok(Self::Major),
            "mean" => Ok(Self::Mean),
            other => Err(Error::InvalidArgument(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Modal label with ties to the smallest index. Returns the vote counts too.
pub fn majority(labels: &[usize], n_writers: usize) -> (usize, Vec<usize>) {
    let mut votes = vec![0usize; n_writers];
    for &l in labels {
        votes[l] += 1;
    }
    let mut best = 0;
    for (i, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = i;
        }
    }
    (best, votes)
}

/// Classifies every patch and takes the majority. The score of a writer is
/// its vote count, lowered by a fraction of its index so that the ranking
/// follows the same tie rule.
pub fn strategy_major(
    model: &dyn Classifier,
    page_id: &str,
    patches: &[FeatureVector],
) -> Result<PageDecision> {
    if patches.is_empty() {
        return Err(Error::Empty("page patches"));
    }
    let labels: Vec<usize> = patches
        .iter()
        .map(|p| model.predict(&p.values))
        .collect::<Result<_>>()?;
    let n = model.writers().len();
    let (best, votes) = majority(&labels, n);
    let scores = votes
        .iter()
        .enumerate()
        .map(|(i, &v)| v as f64 - i as f64 / n as f64)
        .collect();
    Ok(PageDecision {
        page_id: page_id.to_string(),
        per_patch_labels: labels.iter().map(|&l| model.writers()[l].clone()).collect(),
        final_writer: model.writers()[best].clone(),
        scores,
    })
}

fn canonical_order(patches: &[FeatureVector]) -> Vec<&FeatureVector> {
    let mut sorted: Vec<&FeatureVector> = patches.iter().collect();
    sorted.sort_by(|a, b| {
        let ca = a.center.unwrap_or((f64::INFINITY, f64::INFINITY));
        let cb = b.center.unwrap_or((f64::INFINITY, f64::INFINITY));
        ca.0.total_cmp(&cb.0)
            .then(ca.1.total_cmp(&cb.1))
            .then(a.patch_id.cmp(&b.patch_id))
    });
    sorted
}

/// The vector of per-patch scalar means, in patch-center order.
pub fn scalar_means(patches: &[FeatureVector], n_p: usize) -> Result<Vec<f64>> {
    if patches.len() != n_p {
        return Err(Error::DimensionMismatch {
            expected: n_p,
            found: patches.len(),
        });
    }
    Ok(canonical_order(patches)
        .into_iter()
        .map(|p| {
            if p.values.is_empty() {
                0.0
            } else {
                p.values.iter().sum::<f64>() / p.values.len() as f64
            }
        })
        .collect())
}

/// Component-wise mean of the patch vectors. An alternative to the scalar
/// means that keeps the feature dimension.
pub fn concatenated_mean(patches: &[FeatureVector]) -> Result<Vec<f64>> {
    let first = patches.first().ok_or(Error::Empty("page patches"))?;
    let dim = first.dim();
    let mut out = vec![0.0; dim];
    for p in patches {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        for (o, v) in out.iter_mut().zip(&p.values) {
            *o += v / patches.len() as f64;
        }
    }
    Ok(out)
}

/// Classifies the `n_p`-dimensional vector of per-patch scalar means.
pub fn strategy_mean(
    model: &dyn Classifier,
    page_id: &str,
    patches: &[FeatureVector],
    n_p: usize,
) -> Result<PageDecision> {
    let m = scalar_means(patches, n_p)?;
    let scores = model.scores(&m)?;
    Ok(PageDecision {
        page_id: page_id.to_string(),
        per_patch_labels: Vec::new(),
        final_writer: model.writers()[argmax(&scores)].clone(),
        scores,
    })
}

/// True when fewer than `n` writers score strictly above the truth, so ties
/// at the N-th place count as hits.
pub fn in_top_n(scores: &[f64], truth: usize, n: usize) -> bool {
    let t = scores[truth];
    scores.iter().filter(|&&s| s > t).count() < n
}

/// Fraction of pages whose true writer is among the top `n` scores.
pub fn top_n_accuracy(scores: &[Vec<f64>], truths: &[usize], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    if scores.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            found: truths.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::Empty("decisions"));
    }
    let hits = scores
        .iter()
        .zip(truths)
        .filter(|(s, &t)| in_top_n(s, t, n))
        .count();
    Ok(hits as f64 / scores.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn nearest_centroid_by_hand() {
        let m = fit(
            &Backend::NearestCentroid,
            &[vec![0.0, 0.0], vec![10.0, 10.0]],
            &labels(&["A", "B"]),
        )
        .unwrap();
        assert_eq!(m.predict(&[1.0, 1.0]).unwrap(), 0);
    }

    #[test]
    fn separable_points_for_every_backend() {
        let x = vec![
            vec![0.0, 0.1],
            vec![0.2, 0.0],
            vec![0.1, 0.3],
            vec![3.0, 3.1],
            vec![3.2, 2.9],
            vec![2.9, 3.3],
        ];
        let y = labels(&["a", "a", "a", "b", "b", "b"]);
        for b in [
            Backend::NearestCentroid,
            Backend::Knn {
                k: 3,
                measure: DistanceMeasure::Minkowski(2),
            },
            Backend::linear(),
        ] {
            let m = fit(&b, &x, &y).unwrap();
            for (v, l) in x.iter().zip(&y) {
                assert_eq!(&m.writers[m.predict(v).unwrap()], l, "{b:?}");
            }
        }
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(matches!(
            fit(&Backend::NearestCentroid, &[vec![1.0], vec![2.0]], &labels(&["a", "a"])),
            Err(Error::SingleClass)
        ));
        assert!(matches!(
            fit(&Backend::NearestCentroid, &[vec![1.0], vec![2.0, 3.0]], &labels(&["a", "b"])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn majority_ties_go_to_smallest() {
        assert_eq!(majority(&[0, 0, 1], 2).0, 0);
        assert_eq!(majority(&[1, 0], 2).0, 0);
        assert_eq!(majority(&[2, 1, 2, 1], 3).0, 1);
    }

    #[test]
    fn scalar_means_hand_example() {
        let p = |id: &str, v: Vec<f64>, c: f64| FeatureVector {
            sample_id: "s".into(),
            patch_id: id.into(),
            family: crate::features::Family::Ingested,
            values: v,
            center: Some((c, 0.0)),
        };
        let patches = vec![p("b", vec![5.0, 7.0], 2.0), p("a", vec![1.0, 3.0], 1.0)];
        assert_eq!(scalar_means(&patches, 2).unwrap(), vec![2.0, 6.0]);
        assert!(scalar_means(&patches, 3).is_err());
    }

    #[test]
    fn top_n_examples() {
        let scores = vec![vec![0.9, 0.5, 0.3, 0.1, 0.0, -1.0]];
        assert_eq!(top_n_accuracy(&scores, &[0], 1).unwrap(), 1.0);
        assert_eq!(top_n_accuracy(&scores, &[2], 2).unwrap(), 0.0);
        assert_eq!(top_n_accuracy(&scores, &[2], 5).unwrap(), 1.0);
        // Tied at the boundary counts.
        assert!(in_top_n(&[1.0, 1.0, 1.0], 2, 1));
    }

    #[test]
    fn model_json_round_trip() {
        let m = fit(
            &Backend::knn(1),
            &[vec![0.0, 1.0], vec![1.0, 0.0]],
            &labels(&["x", "y"]),
        )
        .unwrap();
        let back = Model::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
