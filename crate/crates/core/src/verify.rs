//! Pairwise distances and same/different-writer verification scores.
//!
//! Two evaluations are provided. The FAR/FRR curve sweeps a threshold over
//! the observed distances and reports the equal error rate. The threshold
//! sweep scans a 0.1-step grid and keeps the best balanced accuracy of true
//! positive and true negative rates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serialized by name: `minkowski1`..`minkowski5`, `bhattacharyya`,
/// `chi-square`, `hausdorff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DistanceMeasure {
    /// Order 1 (Manhattan) to 5.
    Minkowski(u32),
    Bhattacharyya,
    ChiSquare,
    Hausdorff,
}

impl std::str::FromStr for DistanceMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        let m = match s.as_str() {
            "chi-square" | "chisquare" | "chi2" => Self::ChiSquare,
            "bhattacharyya" => Self::Bhattacharyya,
            "hausdorff" => Self::Hausdorff,
            "manhattan" => Self::Minkowski(1),
            "euclidean" => Self::Minkowski(2),
            _ => match s.strip_prefix("minkowski").map(str::parse::<u32>) {
                Some(Ok(p)) if (1..=5).contains(&p) => Self::Minkowski(p),
                _ => return Err(Error::InvalidArgument(format!("unknown distance measure {s:?}"))),
            },
        };
        Ok(m)
    }
}

impl TryFrom<String> for DistanceMeasure {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DistanceMeasure> for String {
    fn from(m: DistanceMeasure) -> Self {
        m.to_string()
    }
}

impl std::fmt::Display for DistanceMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Minkowski(p) => write!(f, "minkowski{p}"),
            Self::Bhattacharyya => f.write_str("bhattacharyya"),
            Self::ChiSquare => f.write_str("chi-square"),
            Self::Hausdorff => f.write_str("hausdorff"),
        }
    }
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Chi-square distance; components where both values are zero contribute 0.
pub fn chi_square(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    Ok(a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let s = x + y;
            if s == 0.0 {
                0.0
            } else {
                (x - y) * (x - y) / s
            }
        })
        .sum())
}

pub fn minkowski(a: &[f64], b: &[f64], order: u32) -> Result<f64> {
    check_dims(a, b)?;
    if !(1..=5).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "minkowski order must be 1..=5, got {order}"
        )));
    }
    let p = order as f64;
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs().powi(order as i32)).sum();
    Ok(s.powf(1.0 / p))
}

/// Euclidean distance between two feature vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

fn as_distribution(v: &[f64]) -> Result<Vec<f64>> {
    if v.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "bhattacharyya needs finite non-negative values".into(),
        ));
    }
    let s: f64 = v.iter().sum();
    if s == 0.0 {
        return Err(Error::InvalidArgument("bhattacharyya on an all-zero vector".into()));
    }
    Ok(v.iter().map(|x| x / s).collect())
}

/// `-ln sum sqrt(p q)` after scaling both vectors to sum 1. Infinite when
/// the supports are disjoint.
pub fn bhattacharyya(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    let (p, q) = (as_distribution(a)?, as_distribution(b)?);
    let bc: f64 = p.iter().zip(&q).map(|(x, y)| (x * y).sqrt()).sum();
    if bc == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((-bc.min(1.0).ln()).max(0.0))
}

/// Symmetric Hausdorff distance between the two vectors' value sets.
pub fn hausdorff(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dims(a, b)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    fn directed(from: &[f64], sorted_to: &[f64]) -> f64 {
        from.iter()
            .map(|&x| {
                let i = sorted_to.partition_point(|&y| y < x);
                let mut best = f64::INFINITY;
                if i < sorted_to.len() {
                    best = best.min(sorted_to[i] - x);
                }
                if i > 0 {
                    best = best.min(x - sorted_to[i - 1]);
                }
                best
            })
            .fold(0.0, f64::max)
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    Ok(directed(a, &sb).max(directed(b, &sa)))
}

pub fn distance(a: &[f64], b: &[f64], measure: DistanceMeasure) -> Result<f64> {
    match measure {
        DistanceMeasure::Minkowski(p) => minkowski(a, b, p),
        DistanceMeasure::Bhattacharyya => bhattacharyya(a, b),
        DistanceMeasure::ChiSquare => chi_square(a, b),
        DistanceMeasure::Hausdorff => hausdorff(a, b),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationCurve {
    pub thresholds: Vec<f64>,
    pub far: Vec<f64>,
    pub frr: Vec<f64>,
    pub eer: f64,
    pub accuracy_pct: f64,
}

/// Empirical FAR/FRR over every observed distance, plus one threshold below
/// all of them so that the curve starts at FAR = 0.
pub fn far_frr_curve(diff: &[f64], same: &[f64]) -> Result<VerificationCurve> {
    if diff.is_empty() {
        return Err(Error::Empty("different-writer distances"));
    }
    if same.is_empty() {
        return Err(Error::Empty("same-writer distances"));
    }
    let mut d = diff.to_vec();
    let mut s = same.to_vec();
    d.sort_by(f64::total_cmp);
    s.sort_by(f64::total_cmp);
    let mut thresholds: Vec<f64> = d.iter().chain(&s).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let lowest = thresholds[0];
    thresholds.insert(0, if lowest > 0.0 { 0.0 } else { lowest - 1.0 });

    let at_most = |v: &[f64], t: f64| v.partition_point(|&x| x <= t) as f64;
    let far: Vec<f64> = thresholds.iter().map(|&t| at_most(&d, t) / d.len() as f64).collect();
    let frr: Vec<f64> = thresholds
        .iter()
        .map(|&t| (s.len() as f64 - at_most(&s, t)) / s.len() as f64)
        .collect();

    let k = (0..thresholds.len())
        .find(|&i| far[i] >= frr[i])
        .expect("frr reaches 0 at the largest threshold");
    let eer = if k == 0 {
        (far[0] + frr[0]) / 2.0
    } else {
        let g0 = far[k - 1] - frr[k - 1];
        let g1 = far[k] - frr[k];
        let lambda = -g0 / (g1 - g0);
        far[k - 1] + lambda * (far[k] - far[k - 1])
    };
    Ok(VerificationCurve {
        thresholds,
        far,
        frr,
        eer,
        accuracy_pct: (1.0 - eer) * 100.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastiveParams {
    pub alpha: f64,
    pub beta: f64,
    pub margin: f64,
}

impl ContrastiveParams {
    pub fn new(alpha: f64, beta: f64, margin: f64) -> Result<Self> {
        if !(margin > 0.0) {
            return Err(Error::InvalidMargin(margin));
        }
        if alpha < 0.0 || beta < 0.0 {
            return Err(Error::InvalidArgument("alpha and beta must be >= 0".into()));
        }
        Ok(Self { alpha, beta, margin })
    }

    /// `alpha = beta = 0.5` with the given margin.
    pub fn with_margin(margin: f64) -> Result<Self> {
        Self::new(0.5, 0.5, margin)
    }
}

/// Contrastive loss; `label` is 0 for a same-writer pair and 1 otherwise.
pub fn contrastive_loss(dw: f64, label: u8, p: &ContrastiveParams) -> f64 {
    let l = f64::from(label.min(1));
    let hinge = (p.margin - dw).max(0.0);
    p.alpha * (1.0 - l) * dw * dw + p.beta * l * hinge * hinge
}

/// Mean squared pair distance. Check the result with
/// [`ContrastiveParams::new`], which rejects a zero margin.
pub fn default_margin(distances: &[f64]) -> Result<f64> {
    if distances.is_empty() {
        return Err(Error::Empty("pair distances"));
    }
    Ok(distances.iter().map(|d| d * d).sum::<f64>() / distances.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub a: String,
    pub b: String,
    pub dw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub step: f64,
    pub best_d: f64,
    pub tpr: f64,
    pub tnr: f64,
    pub accuracy: f64,
}

pub const SWEEP_STEP: f64 = 0.1;

/// The threshold grid `min, min + 0.1, ...`, capped at `max`.
pub fn sweep_grid(min: f64, max: f64) -> Vec<f64> {
    let steps = ((max - min) / SWEEP_STEP - 1e-9).ceil().max(0.0) as usize;
    (0..=steps)
        .map(|k| (min + k as f64 * SWEEP_STEP).min(max))
        .collect()
}

/// Best `(TPR + TNR) / 2` over the threshold grid; the smallest threshold
/// wins ties.
pub fn threshold_sweep(same: &[ScoredPair], diff: &[ScoredPair]) -> Result<SweepResult> {
    if same.is_empty() {
        return Err(Error::Empty("same-writer pairs"));
    }
    if diff.is_empty() {
        return Err(Error::Empty("different-writer pairs"));
    }
    let mut s: Vec<f64> = same.iter().map(|p| p.dw).collect();
    let mut d: Vec<f64> = diff.iter().map(|p| p.dw).collect();
    s.sort_by(f64::total_cmp);
    d.sort_by(f64::total_cmp);
    let min = s[0].min(d[0]);
    let max = s[s.len() - 1].max(d[d.len() - 1]);
    let mut best: Option<SweepResult> = None;
    for t in sweep_grid(min, max) {
        let tpr = s.partition_point(|&x| x <= t) as f64 / s.len() as f64;
        let tnr = (d.len() - d.partition_point(|&x| x <= t)) as f64 / d.len() as f64;
        let accuracy = (tpr + tnr) / 2.0;
        if best.map_or(true, |b| accuracy > b.accuracy) {
            best = Some(SweepResult {
                step: SWEEP_STEP,
                best_d: t,
                tpr,
                tnr,
                accuracy,
            });
        }
    }
    Ok(best.expect("grid is never empty"))
}

/// Distances of all unordered pairs, split into same-writer and
/// different-writer populations. Items are `(id, writer, vector)`.
pub fn pair_distances(
    items: &[(String, String, Vec<f64>)],
    measure: DistanceMeasure,
) -> Result<(Vec<ScoredPair>, Vec<ScoredPair>)> {
    let pairs: Vec<(usize, usize)> = (0..items.len())
        .flat_map(|i| (i + 1..items.len()).map(move |j| (i, j)))
        .collect();
    let scored: Vec<(bool, ScoredPair)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let dw = distance(&items[i].2, &items[j].2, measure)?;
            Ok((
                items[i].1 == items[j].1,
                ScoredPair {
                    a: items[i].0.clone(),
                    b: items[j].0.clone(),
                    dw,
                },
            ))
        })
        .collect::<Result<_>>()?;
    let (same, diff): (Vec<_>, Vec<_>) = scored.into_iter().partition(|(s, _)| *s);
    Ok((
        same.into_iter().map(|(_, p)| p).collect(),
        diff.into_iter().map(|(_, p)| p).collect(),
    ))
}
