use std::collections::BTreeSet;

use super::{normalize, DC_BINS, FDC_DIM};
use crate::imaging::{KeypointKind, Point, StrokeGraph};

/// Unit writing direction between two connected keypoints, `x` = column and
/// `y` up. Pairs are oriented left to right (then top to bottom).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionPair {
    pub from: Point,
    pub to: Point,
    pub cos: f64,
    pub sin: f64,
}

/// Turn between consecutive fragments of a keypoint chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureTriple {
    pub points: [Point; 3],
    pub cos: f64,
    pub sin: f64,
}

fn vector(a: Point, b: Point) -> (f64, f64) {
    (b.1 as f64 - a.1 as f64, a.0 as f64 - b.0 as f64)
}

fn left_to_right(a: Point, b: Point) -> (Point, Point) {
    if (a.1, a.0) <= (b.1, b.0) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Bin of a value in `[-1, 1]` among `DC_BINS` equal cells.
pub fn value_bin(v: f64) -> usize {
    let b = ((v + 1.0) / 2.0 * DC_BINS as f64).floor();
    (b.max(0.0) as usize).min(DC_BINS - 1)
}

/// One direction pair per graph edge joining two distinct positions.
pub fn direction_pairs(g: &StrokeGraph) -> Vec<DirectionPair> {
    g.edges
        .iter()
        .filter_map(|e| {
            let (from, to) = left_to_right(g.nodes[e.from].position, g.nodes[e.to].position);
            let (dx, dy) = vector(from, to);
            let d = dx.hypot(dy);
            (d > 0.0).then(|| DirectionPair {
                from,
                to,
                cos: dx / d,
                sin: dy / d,
            })
        })
        .collect()
}

/// Maximal node chains whose interior nodes are non-branch nodes of degree
/// two. Returned as node index sequences; closed chains repeat their first
/// node at the end.
fn chains(g: &StrokeGraph) -> Vec<Vec<usize>> {
    let n = g.nodes.len();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for e in &g.edges {
        adj[e.from].push((e.id, e.to));
        adj[e.to].push((e.id, e.from));
    }
    let passable = |v: usize| adj[v].len() == 2 && g.nodes[v].kind != KeypointKind::Branch;
    let mut used: BTreeSet<usize> = BTreeSet::new();
    let mut out = Vec::new();

    let walk = |start: usize, first: (usize, usize), used: &mut BTreeSet<usize>| {
        let mut seq = vec![start];
        let (mut edge, mut cur) = first;
        used.insert(edge);
        loop {
            seq.push(cur);
            if cur == start || !passable(cur) {
                break;
            }
            let next = adj[cur].iter().copied().find(|&(id, _)| id != edge);
            match next {
                Some((id, v)) if !used.contains(&id) => {
                    used.insert(id);
                    edge = id;
                    cur = v;
                }
                _ => break,
            }
        }
        seq
    };

    // Open chains start at nodes that cannot be passed through.
    for v in 0..n {
        if passable(v) {
            continue;
        }
        for &(id, to) in &adj[v].clone() {
            if !used.contains(&id) {
                out.push(walk(v, (id, to), &mut used));
            }
        }
    }
    // Remaining edges lie on closed loops of pass-through nodes.
    for v in 0..n {
        for &(id, to) in &adj[v].clone() {
            if !used.contains(&id) {
                out.push(walk(v, (id, to), &mut used));
            }
        }
    }
    out
}

/// Curvature triples along every chain. Open chains are read left to right;
/// closed chains wrap around.
pub fn curvature_triples(g: &StrokeGraph) -> Vec<CurvatureTriple> {
    let mut out = Vec::new();
    for chain in chains(g) {
        let closed = chain.len() > 2 && chain.first() == chain.last();
        let mut pts: Vec<Point> = chain.iter().map(|&v| g.nodes[v].position).collect();
        if closed {
            pts.pop();
        } else if (pts[0].1, pts[0].0) > (pts[pts.len() - 1].1, pts[pts.len() - 1].0) {
            pts.reverse();
        }
        pts.dedup();
        let m = pts.len();
        let triples: Vec<[Point; 3]> = if closed {
            if m < 3 {
                continue;
            }
            (0..m).map(|i| [pts[(i + m - 1) % m], pts[i], pts[(i + 1) % m]]).collect()
        } else {
            pts.windows(3).map(|w| [w[0], w[1], w[2]]).collect()
        };
        for t in triples {
            let v1 = vector(t[0], t[1]);
            let v2 = vector(t[1], t[2]);
            let n = v1.0.hypot(v1.1) * v2.0.hypot(v2.1);
            if n == 0.0 {
                continue;
            }
            out.push(CurvatureTriple {
                points: t,
                cos: (v1.0 * v2.0 + v1.1 * v2.1) / n,
                sin: (v1.0 * v2.1 - v1.1 * v2.0) / n,
            });
        }
    }
    out
}

/// F_DC: histograms of direction cosine, direction sine, curvature cosine
/// and curvature sine, each over 200 bins.
pub fn extract_fdc(g: &StrokeGraph) -> Vec<f64> {
    let mut v = vec![0.0; FDC_DIM];
    for p in direction_pairs(g) {
        v[value_bin(p.cos)] += 1.0;
        v[DC_BINS + value_bin(p.sin)] += 1.0;
    }
    for t in curvature_triples(g) {
        v[2 * DC_BINS + value_bin(t.cos)] += 1.0;
        v[3 * DC_BINS + value_bin(t.sin)] += 1.0;
    }
    for block in v.chunks_mut(DC_BINS) {
        normalize(block);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{Edge, Keypoint};

    fn graph(points: &[Point], kinds: &[KeypointKind], edges: &[(usize, usize)]) -> StrokeGraph {
        StrokeGraph {
            width: 64,
            height: 64,
            nodes: points
                .iter()
                .zip(kinds)
                .map(|(&p, &kind)| Keypoint {
                    position: p,
                    kind,
                    pixels: vec![p],
                })
                .collect(),
            edges: edges
                .iter()
                .enumerate()
                .map(|(id, &(from, to))| Edge {
                    id,
                    from,
                    to,
                    pixels: Vec::new(),
                })
                .collect(),
            component_count: 1,
        }
    }

    use KeypointKind::*;

    #[test]
    fn axis_aligned_pair() {
        let g = graph(&[(0, 0), (0, 10)], &[End, End], &[(0, 1)]);
        let v = extract_fdc(&g);
        assert_eq!(v[DC_BINS - 1], 1.0);
        assert_eq!(v[DC_BINS + value_bin(0.0)], 1.0);
    }

    #[test]
    fn collinear_triple() {
        let g = graph(&[(5, 0), (5, 10), (5, 20)], &[End, Curved, End], &[(0, 1), (1, 2)]);
        let t = curvature_triples(&g);
        assert_eq!(t.len(), 1);
        assert!((t[0].cos - 1.0).abs() < 1e-12 && t[0].sin.abs() < 1e-12);
        let v = extract_fdc(&g);
        assert_eq!(v[2 * DC_BINS + DC_BINS - 1], 1.0);
        assert_eq!(v[3 * DC_BINS + value_bin(0.0)], 1.0);
    }

    #[test]
    fn right_angle_triple() {
        let g = graph(&[(10, 0), (10, 10), (0, 10)], &[End, Curved, End], &[(0, 1), (1, 2)]);
        let t = curvature_triples(&g);
        assert_eq!(t.len(), 1);
        assert!(t[0].cos.abs() < 1e-12);
        assert!((t[0].sin.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn branch_nodes_terminate_chains() {
        // A plus sign: no triple passes through the junction.
        let g = graph(
            &[(5, 5), (0, 5), (10, 5), (5, 0), (5, 10)],
            &[Branch, End, End, End, End],
            &[(0, 1), (0, 2), (0, 3), (0, 4)],
        );
        assert!(curvature_triples(&g).is_empty());
        assert_eq!(direction_pairs(&g).len(), 4);
    }

    #[test]
    fn closed_chain_wraps() {
        let g = graph(
            &[(0, 0), (0, 10), (10, 10), (10, 0)],
            &[Curved, Curved, Curved, Curved],
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
        );
        let t = curvature_triples(&g);
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|x| x.cos.abs() < 1e-12));
    }

    #[test]
    fn too_few_keypoints_give_zero_vector() {
        let g = graph(&[(3, 3)], &[End], &[]);
        assert!(extract_fdc(&g).iter().all(|&v| v == 0.0));
    }
}
