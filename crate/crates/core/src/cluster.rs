//! Clustering backends, NMI, majority page grouping and speed-based style
//! labels.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    Slow,
    Medium,
    Fast,
}

impl Style {
    pub const ALL: [Style; 3] = [Style::Slow, Style::Medium, Style::Fast];

    pub fn letter(self) -> char {
        match self {
            Style::Slow => 's',
            Style::Medium => 'm',
            Style::Fast => 'f',
        }
    }
}

impl std::fmt::Display for Style {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Style::Slow => "slow",
            Style::Medium => "medium",
            Style::Fast => "fast",
        })
    }
}

impl std::str::FromStr for Style {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "slow" | "s" => Ok(Style::Slow),
            "medium" | "m" => Ok(Style::Medium),
            "fast" | "f" => Ok(Style::Fast),
            other => Err(Error::InvalidArgument(format!("unknown style {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterMethod {
    Kmeans,
    MinibatchKmeans,
    FuzzyCMeans,
    Agglomerative,
}

impl std::str::FromStr for ClusterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(Self::Kmeans),
            "minibatch-kmeans" | "minibatch" => Ok(Self::MinibatchKmeans),
            "fuzzy-c-means" | "fuzzy-cmeans" | "fcm" => Ok(Self::FuzzyCMeans),
            "agglomerative" | "agglo" => Ok(Self::Agglomerative),
            other => Err(Error::InvalidArgument(format!("unknown cluster method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub item_ids: Vec<String>,
    pub labels: Vec<usize>,
    pub k: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(x: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn check_input(vectors: &[Vec<f64>], k: usize) -> Result<usize> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be >= 2, got {k}")));
    }
    if k > vectors.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the {} items",
            vectors.len()
        )));
    }
    let dim = vectors[0].len();
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    Ok(dim)
}

/// k-means++ seeding. When every remaining item sits on a chosen center the
/// next unchosen index is taken.
fn plus_plus(vectors: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut chosen = vec![rng.gen_range(0..vectors.len())];
    let mut d2: Vec<f64> = vectors.iter().map(|v| sq_dist(v, &vectors[chosen[0]])).collect();
    while chosen.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            Err(_) => (0..vectors.len()).find(|i| !chosen.contains(i)).expect("k <= n"),
        };
        chosen.push(next);
        for (d, v) in d2.iter_mut().zip(vectors) {
            *d = d.min(sq_dist(v, &vectors[next]));
        }
    }
    chosen.into_iter().map(|i| vectors[i].clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmeansRun {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squares after each assignment step.
    pub objective: Vec<f64>,
}

/// Lloyd iterations from k-means++ seeds until assignments stop changing.
pub fn kmeans(vectors: &[Vec<f64>], k: usize, seed: u64, max_iter: usize) -> Result<KmeansRun> {
    let dim = check_input(vectors, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(vectors, k, &mut rng);
    let mut labels = vec![usize::MAX; vectors.len()];
    let mut objective = Vec::new();
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        let mut sse = 0.0;
        for (l, v) in labels.iter_mut().zip(vectors) {
            let (c, d) = nearest(v, &centroids);
            sse += d;
            if *l != c {
                *l = c;
                changed = true;
            }
        }
        objective.push(sse);
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (v, &l) in vectors.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(v) {
                *s += x;
            }
        }
        for c in 0..k {
            // An empty cluster keeps its previous center.
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    Ok(KmeansRun {
        labels,
        centroids,
        objective,
    })
}

/// Mini-batch k-means with per-center learning rates `1 / count`.
pub fn minibatch_kmeans(
    vectors: &[Vec<f64>],
    k: usize,
    seed: u64,
    batch: usize,
    iterations: usize,
) -> Result<Vec<usize>> {
    check_input(vectors, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus(vectors, k, &mut rng);
    let mut counts = vec![0usize; k];
    let b = batch.clamp(1, vectors.len());
    for _ in 0..iterations {
        let idx = index::sample(&mut rng, vectors.len(), b).into_vec();
        let assigned: Vec<usize> = idx.iter().map(|&i| nearest(&vectors[i], &centroids).0).collect();
        for (&i, &c) in idx.iter().zip(&assigned) {
            counts[c] += 1;
            let eta = 1.0 / counts[c] as f64;
            for (m, x) in centroids[c].iter_mut().zip(&vectors[i]) {
                *m += eta * (x - *m);
            }
        }
    }
    Ok(vectors.iter().map(|v| nearest(v, &centroids).0).collect())
}

/// Fuzzy c-means with exponent 2, defuzzified by maximum membership.
/// Returns labels and the membership matrix (items by clusters).
pub fn fuzzy_cmeans(
    vectors: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
    let dim = check_input(vectors, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u: Vec<Vec<f64>> = (0..vectors.len())
        .map(|_| {
            let row: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let s: f64 = row.iter().sum();
            row.into_iter().map(|x| x / s).collect()
        })
        .collect();
    for _ in 0..max_iter.max(1) {
        let mut centers = vec![vec![0.0; dim]; k];
        let mut weights = vec![0.0; k];
        for (row, v) in u.iter().zip(vectors) {
            for c in 0..k {
                let w = row[c] * row[c];
                weights[c] += w;
                for (m, x) in centers[c].iter_mut().zip(v) {
                    *m += w * x;
                }
            }
        }
        for (m, &w) in centers.iter_mut().zip(&weights) {
            if w > 0.0 {
                m.iter_mut().for_each(|x| *x /= w);
            }
        }
        let mut shift: f64 = 0.0;
        for (row, v) in u.iter_mut().zip(vectors) {
            let d: Vec<f64> = centers.iter().map(|c| sq_dist(v, c)).collect();
            let new_row: Vec<f64> = match d.iter().position(|&x| x == 0.0) {
                Some(z) => (0..k).map(|c| f64::from(u8::from(c == z))).collect(),
                // With exponent 2 the membership is proportional to 1/d^2
                // in squared-distance terms: u_c = 1 / sum_j (d_c / d_j).
                None => d
                    .iter()
                    .map(|&dc| 1.0 / d.iter().map(|&dj| dc / dj).sum::<f64>())
                    .collect(),
            };
            for (a, b) in row.iter().zip(&new_row) {
                shift = shift.max((a - b).abs());
            }
            *row = new_row;
        }
        if shift < 1e-9 {
            break;
        }
    }
    let labels = u
        .iter()
        .map(|row| {
            let mut best = 0;
            for (c, &x) in row.iter().enumerate() {
                if x > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect();
    Ok((labels, u))
}

/// One agglomerative step: slots `a < b` merged into slot `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
}

/// Average-linkage clustering on Euclidean distances, stopped at `k`
/// clusters. Ties between candidate pairs go to the lexicographically
/// smallest `(a, b)`. Labels number clusters by their smallest member.
pub fn agglomerative_average(vectors: &[Vec<f64>], k: usize) -> Result<(Vec<usize>, Vec<Merge>)> {
    check_input(vectors, k)?;
    let n = vectors.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = sq_dist(&vectors[i], &vectors[j]).sqrt();
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    let mut size = vec![1usize; n];
    let mut alive = vec![true; n];
    let mut owner: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - k);
    for _ in 0..n - k {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for a in (0..n).filter(|&a| alive[a]) {
            for b in (a + 1..n).filter(|&b| alive[b]) {
                if d[a][b] < best.2 {
                    best = (a, b, d[a][b]);
                }
            }
        }
        let (a, b, dist) = best;
        for c in (0..n).filter(|&c| alive[c] && c != a && c != b) {
            let v = (size[a] as f64 * d[a][c] + size[b] as f64 * d[b][c]) / (size[a] + size[b]) as f64;
            d[a][c] = v;
            d[c][a] = v;
        }
        size[a] += size[b];
        alive[b] = false;
        for o in owner.iter_mut() {
            if *o == b {
                *o = a;
            }
        }
        merges.push(Merge { a, b, distance: dist });
    }
    Ok((relabel_by_first(&owner), merges))
}

/// Renumbers labels by order of first appearance.
fn relabel_by_first(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

pub fn cluster_vectors(
    ids: &[String],
    vectors: &[Vec<f64>],
    k: usize,
    method: ClusterMethod,
    seed: u64,
) -> Result<ClusterAssignment> {
    if ids.len() != vectors.len() {
        return Err(Error::DimensionMismatch {
            expected: vectors.len(),
            found: ids.len(),
        });
    }
    if vectors.is_empty() {
        return Err(Error::Empty("cluster items"));
    }
    let labels = match method {
        ClusterMethod::Kmeans => kmeans(vectors, k, seed, 300)?.labels,
        ClusterMethod::MinibatchKmeans => minibatch_kmeans(vectors, k, seed, 100, 100)?,
        ClusterMethod::FuzzyCMeans => fuzzy_cmeans(vectors, k, seed, 300)?.0,
        ClusterMethod::Agglomerative => agglomerative_average(vectors, k)?.0,
    };
    Ok(ClusterAssignment {
        item_ids: ids.to_vec(),
        labels,
        k,
    })
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information, normalized by the arithmetic mean of the
/// two entropies. Zero when either labeling has zero entropy.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::Empty("labelings"));
    }
    let n = a.len() as f64;
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut ca: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cb: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
    }
    let ha = entropy(ca.values().copied(), n);
    let hb = entropy(cb.values().copied(), n);
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| {
            let c = c as f64;
            c / n * (n * c / (ca[&x] as f64 * cb[&y] as f64)).ln()
        })
        .sum();
    Ok((mi / ((ha + hb) / 2.0)).clamp(0.0, 1.0))
}

/// Page label as the modal cluster over all plots; `None` on a tie.
/// `per_plot[p][page]` is the cluster given to `page` in plot `p`.
pub fn majority_group_pages(per_plot: &[Vec<usize>]) -> Vec<Option<usize>> {
    let pages = per_plot.first().map_or(0, Vec::len);
    (0..pages)
        .map(|page| {
            let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
            for plot in per_plot {
                *votes.entry(plot[page]).or_default() += 1;
            }
            let top = votes.values().copied().max()?;
            let mut winners = votes.iter().filter(|(_, &v)| v == top);
            let first = winners.next().map(|(&c, _)| c);
            if winners.next().is_some() {
                None
            } else {
                first
            }
        })
        .collect()
}

/// Per-page label within one plot: the majority over the page's patches,
/// ties to the smallest cluster.
pub fn page_labels_from_patches(patch_pages: &[usize], patch_labels: &[usize], pages: usize) -> Vec<usize> {
    let mut votes = vec![BTreeMap::<usize, usize>::new(); pages];
    for (&p, &l) in patch_pages.iter().zip(patch_labels) {
        *votes[p].entry(l).or_default() += 1;
    }
    votes
        .iter()
        .map(|v| {
            let mut best = (0, 0);
            for (&l, &c) in v {
                if c > best.1 {
                    best = (l, c);
                }
            }
            best.0
        })
        .collect()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Renames the clusters of `labels` to agree as much as possible with
/// `reference`, by exhaustive search over permutations (k up to 8).
pub fn align_labels(reference: &[usize], labels: &[usize], k: usize) -> Result<Vec<usize>> {
    if k > 8 {
        return Err(Error::InvalidArgument("label alignment supports k <= 8".into()));
    }
    let mut agree = vec![vec![0usize; k]; k];
    for (&r, &l) in reference.iter().zip(labels) {
        if r < k && l < k {
            agree[l][r] += 1;
        }
    }
    let best = permutations(k)
        .into_iter()
        .max_by_key(|p| (0..k).map(|l| agree[l][p[l]]).sum::<usize>())
        .expect("at least one permutation");
    Ok(labels.iter().map(|&l| best[l]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedRecord {
    pub stroke_length: f64,
    pub elapsed: f64,
}

impl SpeedRecord {
    pub fn new(stroke_length: f64, elapsed: f64) -> Result<Self> {
        if !(elapsed > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "elapsed time must be positive, got {elapsed}"
            )));
        }
        Ok(Self {
            stroke_length,
            elapsed,
        })
    }

    pub fn speed(&self) -> f64 {
        self.stroke_length / self.elapsed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedThresholds {
    pub mu: f64,
    pub sigma: f64,
    pub alpha_s: f64,
    pub t1: f64,
    pub t2: f64,
}

impl SpeedThresholds {
    pub fn new(mu: f64, sigma: f64, alpha_s: f64) -> Self {
        Self {
            mu,
            sigma,
            alpha_s,
            t1: (mu + alpha_s * sigma).ceil(),
            t2: (mu - alpha_s * sigma).ceil(),
        }
    }

    /// Thresholds from a writer's medium-speed pages (population sigma).
    pub fn from_medium(speeds: &[f64], alpha_s: f64) -> Result<Self> {
        if speeds.is_empty() {
            return Err(Error::Empty("medium-speed pages"));
        }
        let n = speeds.len() as f64;
        let mu = speeds.iter().sum::<f64>() / n;
        let var = speeds.iter().map(|s| (s - mu) * (s - mu)).sum::<f64>() / n;
        Ok(Self::new(mu, var.sqrt(), alpha_s))
    }
}

pub fn speed_label(speed: f64, t: &SpeedThresholds) -> Style {
    if speed > t.t1 {
        Style::Fast
    } else if speed < t.t2 {
        Style::Slow
    } else {
        Style::Medium
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut v = Vec::new();
        let mut truth = Vec::new();
        for i in 0..40 {
            let c = if i % 2 == 0 { 0.0 } else { 20.0 };
            v.push(vec![c + rng.gen::<f64>(), c + rng.gen::<f64>()]);
            truth.push(i % 2);
        }
        (v, truth)
    }

    #[test]
    fn blobs_are_recovered_by_every_method() {
        let (v, truth) = blobs();
        let ids: Vec<String> = (0..v.len()).map(|i| i.to_string()).collect();
        for m in [
            ClusterMethod::Kmeans,
            ClusterMethod::MinibatchKmeans,
            ClusterMethod::FuzzyCMeans,
            ClusterMethod::Agglomerative,
        ] {
            let a = cluster_vectors(&ids, &v, 2, m, 1).unwrap();
            assert_eq!(nmi(&a.labels, &truth).unwrap(), 1.0, "{m:?}");
        }
    }

    #[test]
    fn identical_vectors_do_not_crash() {
        let v = vec![vec![1.0, 1.0]; 5];
        let ids: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        for m in [
            ClusterMethod::Kmeans,
            ClusterMethod::MinibatchKmeans,
            ClusterMethod::FuzzyCMeans,
            ClusterMethod::Agglomerative,
        ] {
            let a = cluster_vectors(&ids, &v, 2, m, 0).unwrap();
            assert!(a.labels.iter().all(|&l| l < 2));
        }
    }

    #[test]
    fn k_larger_than_items_is_rejected() {
        assert!(kmeans(&[vec![0.0]], 2, 0, 10).is_err());
    }

    #[test]
    fn nmi_edge_cases() {
        let a = [0, 0, 1, 1, 2, 2];
        assert!((nmi(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(nmi(&[0; 6], &a).unwrap(), 0.0);
        let relabeled = [2, 2, 0, 0, 1, 1];
        assert!((nmi(&a, &relabeled).unwrap() - 1.0).abs() < 1e-12);
        assert!(nmi(&a, &[0, 1]).is_err());
    }

    #[test]
    fn majority_grouping() {
        assert_eq!(majority_group_pages(&[vec![1], vec![1], vec![1]]), vec![Some(1)]);
        assert_eq!(
            majority_group_pages(&[vec![0], vec![0], vec![1], vec![1]]),
            vec![None]
        );
    }

    #[test]
    fn alignment_undoes_a_permutation() {
        let r = [0, 0, 1, 1, 2, 2];
        let l = [2, 2, 0, 0, 1, 1];
        assert_eq!(align_labels(&r, &l, 3).unwrap(), r.to_vec());
    }

    #[test]
    fn speed_thresholds_formula() {
        let t = SpeedThresholds::new(100.0, 10.0, 2.0);
        assert_eq!((t.t1, t.t2), (120.0, 80.0));
        assert_eq!(speed_label(125.0, &t), Style::Fast);
        assert_eq!(speed_label(80.0, &t), Style::Medium);
        assert_eq!(speed_label(120.0, &t), Style::Medium);
        assert_eq!(speed_label(79.5, &t), Style::Slow);
        assert!(SpeedRecord::new(10.0, 0.0).is_err());
    }
}
