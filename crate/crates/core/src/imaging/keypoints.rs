use serde::{Deserialize, Serialize};

use super::graph::trace_paths;
use super::{Point, Skeleton};

/// Chord length, in pixels, used to measure direction change along a stroke.
pub const CURVE_CHORD: usize = 5;
/// Minimum turn between the incoming and outgoing chords for a curved point.
pub const CURVE_MIN_TURN_DEG: f64 = 45.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeypointKind {
    End,
    Branch,
    Curved,
}

/// A structural point on the skeleton. Junctions are clusters of adjacent
/// pixels with three or more neighbors; `pixels` holds the whole cluster and
/// `position` its most central member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Keypoint {
    pub position: Point,
    pub kind: KeypointKind,
    pub pixels: Vec<Point>,
}

impl Keypoint {
    fn single(position: Point, kind: KeypointKind) -> Self {
        Self {
            position,
            kind,
            pixels: vec![position],
        }
    }
}

fn turn_deg(a: Point, b: Point, c: Point) -> f64 {
    let v1 = (b.0 as f64 - a.0 as f64, b.1 as f64 - a.1 as f64);
    let v2 = (c.0 as f64 - b.0 as f64, c.1 as f64 - b.1 as f64);
    let n1 = v1.0.hypot(v1.1);
    let n2 = v2.0.hypot(v2.1);
    if n1 == 0.0 || n2 == 0.0 {
        return 0.0;
    }
    let cos = ((v1.0 * v2.0 + v1.1 * v2.1) / (n1 * n2)).clamp(-1.0, 1.0);
    cos.acos().to_degrees()
}

/// Indices in `candidates` (sorted) grouped into consecutive runs; returns the
/// index of maximal turn in each run.
fn run_peaks(candidates: &[(usize, f64)], cyclic_len: Option<usize>) -> Vec<usize> {
    let mut runs: Vec<Vec<(usize, f64)>> = Vec::new();
    for &(i, t) in candidates {
        match runs.last_mut() {
            Some(run) if run.last().map(|&(j, _)| j + 1 == i).unwrap_or(false) => run.push((i, t)),
            _ => runs.push(vec![(i, t)]),
        }
    }
    if let Some(n) = cyclic_len {
        if runs.len() > 1 {
            let wraps = runs[0][0].0 == 0 && runs.last().unwrap().last().unwrap().0 == n - 1;
            if wraps {
                let first = runs.remove(0);
                runs.last_mut().unwrap().extend(first);
            }
        }
    }
    runs.iter()
        .map(|run| {
            run.iter()
                .fold(run[0], |best, &x| if x.1 > best.1 { x } else { best })
                .0
        })
        .collect()
}

/// Curved points on an open run: chords reach `CURVE_CHORD` pixels to either
/// side, using the bounding node pixels as run ends.
fn curved_on_path(seq: &[Point]) -> Vec<Point> {
    let w = CURVE_CHORD;
    if seq.len() < 2 * w + 1 {
        return Vec::new();
    }
    let candidates: Vec<(usize, f64)> = (w..seq.len() - w)
        .map(|j| (j, turn_deg(seq[j - w], seq[j], seq[j + w])))
        .filter(|&(_, t)| t >= CURVE_MIN_TURN_DEG)
        .collect();
    run_peaks(&candidates, None)
        .into_iter()
        .map(|j| seq[j])
        .collect()
}

/// Curved points on a closed loop. The loop always gets at least one point,
/// its sharpest turn, so that it can be anchored in the graph.
fn curved_on_cycle(seq: &[Point]) -> Vec<Point> {
    let n = seq.len();
    let w = CURVE_CHORD.min((n / 3).max(1));
    let turns: Vec<(usize, f64)> = (0..n)
        .map(|j| (j, turn_deg(seq[(j + n - w) % n], seq[j], seq[(j + w) % n])))
        .collect();
    let candidates: Vec<(usize, f64)> = turns
        .iter()
        .copied()
        .filter(|&(_, t)| t >= CURVE_MIN_TURN_DEG)
        .collect();
    let mut peaks = run_peaks(&candidates, Some(n));
    if peaks.is_empty() {
        let best = turns
            .iter()
            .fold(turns[0], |b, &x| if x.1 > b.1 { x } else { b });
        peaks.push(best.0);
    }
    peaks.into_iter().map(|j| seq[j]).collect()
}

/// Detects stroke ends (one neighbor; isolated dots also count), junction
/// clusters (three or more neighbors) and curved points (chord turn of at
/// least [`CURVE_MIN_TURN_DEG`]). Output is sorted by position.
pub fn detect_keypoints(sk: &Skeleton) -> Vec<Keypoint> {
    let img = &sk.image;
    let w = img.width();
    let mut kps: Vec<Keypoint> = Vec::new();
    let mut in_branch = vec![false; w * img.height()];

    for (r, c) in img.ink_points() {
        let n = img.neighbor_count(r, c);
        if n <= 1 {
            kps.push(Keypoint::single((r, c), KeypointKind::End));
        } else if n >= 3 {
            in_branch[r * w + c] = true;
        }
    }

    // Cluster junction pixels.
    let mut seen = vec![false; w * img.height()];
    for (r, c) in img.ink_points() {
        if !in_branch[r * w + c] || seen[r * w + c] {
            continue;
        }
        let mut cluster = vec![(r, c)];
        seen[r * w + c] = true;
        let mut i = 0;
        while i < cluster.len() {
            let (pr, pc) = cluster[i];
            for q in img.neighbors(pr, pc) {
                if in_branch[q.0 * w + q.1] && !seen[q.0 * w + q.1] {
                    seen[q.0 * w + q.1] = true;
                    cluster.push(q);
                }
            }
            i += 1;
        }
        cluster.sort_unstable();
        let n = cluster.len() as f64;
        let cr = cluster.iter().map(|p| p.0 as f64).sum::<f64>() / n;
        let cc = cluster.iter().map(|p| p.1 as f64).sum::<f64>() / n;
        let position = *cluster
            .iter()
            .min_by(|a, b| {
                let da = (a.0 as f64 - cr).powi(2) + (a.1 as f64 - cc).powi(2);
                let db = (b.0 as f64 - cr).powi(2) + (b.1 as f64 - cc).powi(2);
                da.total_cmp(&db).then(a.cmp(b))
            })
            .unwrap();
        kps.push(Keypoint {
            position,
            kind: KeypointKind::Branch,
            pixels: cluster,
        });
    }

    let mut node_of: Vec<Option<usize>> = vec![None; w * img.height()];
    for (i, kp) in kps.iter().enumerate() {
        for &(r, c) in &kp.pixels {
            node_of[r * w + c] = Some(i);
        }
    }
    let pixel_sets: Vec<Vec<Point>> = kps.iter().map(|k| k.pixels.clone()).collect();
    let (paths, cycles) = trace_paths(sk, &node_of, &pixel_sets);

    let mut curved = Vec::new();
    for p in &paths {
        let mut seq = Vec::with_capacity(p.pixels.len() + 2);
        seq.push(kps[p.from].position);
        seq.extend_from_slice(&p.pixels);
        seq.push(kps[p.to].position);
        // Curved points are taken only from the run's own pixels.
        curved.extend(
            curved_on_path(&seq)
                .into_iter()
                .filter(|q| node_of[q.0 * w + q.1].is_none()),
        );
    }
    for cyc in &cycles {
        curved.extend(curved_on_cycle(cyc));
    }
    kps.extend(
        curved
            .into_iter()
            .map(|p| Keypoint::single(p, KeypointKind::Curved)),
    );
    kps.sort_by(|a, b| a.position.cmp(&b.position).then(a.kind.cmp(&b.kind)));
    kps
}
