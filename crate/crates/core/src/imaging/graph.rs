use serde::{Deserialize, Serialize};

use super::{count_components, Keypoint, KeypointKind, Point, Skeleton, RING};

/// A keypoint-free run of skeleton pixels between two nodes. `pixels` is
/// ordered from `from` to `to` and excludes node pixels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub pixels: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeGraph {
    pub width: usize,
    pub height: usize,
    pub nodes: Vec<Keypoint>,
    pub edges: Vec<Edge>,
    pub component_count: usize,
}

impl StrokeGraph {
    /// Edge ids incident to `node`.
    pub fn incident(&self, node: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.edges
            .iter()
            .filter(move |e| e.from == node || e.to == node)
    }

    pub fn node_pixel_count(&self) -> usize {
        self.nodes.iter().map(|n| n.pixels.len()).sum()
    }

    pub fn edge_pixel_count(&self) -> usize {
        self.edges.iter().map(|e| e.pixels.len()).sum()
    }
}

pub(crate) struct TracedPath {
    pub from: usize,
    pub to: usize,
    pub pixels: Vec<Point>,
}

/// Walks every maximal run of non-node pixels starting from node pixels.
/// Returns the node-to-node runs and the leftover closed loops that touch no
/// node (each as a cyclic pixel sequence starting at its first raster pixel).
pub(crate) fn trace_paths(
    sk: &Skeleton,
    node_of: &[Option<usize>],
    nodes: &[Vec<Point>],
) -> (Vec<TracedPath>, Vec<Vec<Point>>) {
    let img = &sk.image;
    let w = img.width();
    let mut visited = vec![false; w * img.height()];
    let mut paths = Vec::new();

    for (ni, pixels) in nodes.iter().enumerate() {
        for &np in pixels {
            for q in img.neighbors(np.0, np.1).collect::<Vec<_>>() {
                if node_of[q.0 * w + q.1].is_some() || visited[q.0 * w + q.1] {
                    continue;
                }
                let mut seq = vec![q];
                visited[q.0 * w + q.1] = true;
                let mut prev = np;
                let mut cur = q;
                let end_node = loop {
                    let mut next_path = None;
                    let mut next_node = None;
                    for n in img.neighbors(cur.0, cur.1) {
                        if n == prev {
                            continue;
                        }
                        match node_of[n.0 * w + n.1] {
                            Some(k) => {
                                if next_node.is_none() {
                                    next_node = Some(k);
                                }
                            }
                            None if !visited[n.0 * w + n.1] => {
                                if next_path.is_none() {
                                    next_path = Some(n);
                                }
                            }
                            None => {}
                        }
                    }
                    if let Some(k) = next_node {
                        break k;
                    }
                    match next_path {
                        Some(n) => {
                            visited[n.0 * w + n.1] = true;
                            seq.push(n);
                            prev = cur;
                            cur = n;
                        }
                        // Dead end on an irregular raster: close on the start node.
                        None => break ni,
                    }
                };
                paths.push(TracedPath {
                    from: ni,
                    to: end_node,
                    pixels: seq,
                });
            }
        }
    }

    let mut cycles = Vec::new();
    for (r, c) in img.ink_points() {
        if node_of[r * w + c].is_some() || visited[r * w + c] {
            continue;
        }
        let mut seq = vec![(r, c)];
        visited[r * w + c] = true;
        let mut cur = (r, c);
        while let Some(n) = img
            .neighbors(cur.0, cur.1)
            .find(|n| node_of[n.0 * w + n.1].is_none() && !visited[n.0 * w + n.1])
        {
            visited[n.0 * w + n.1] = true;
            seq.push(n);
            cur = n;
        }
        cycles.push(seq);
    }
    (paths, cycles)
}

/// Builds the keypoint graph: nodes are the keypoints (junction clusters
/// keep all their pixels), edges are the maximal keypoint-free pixel runs
/// between them. Nodes that touch directly are joined by an edge with an
/// empty pixel run. Loops without any keypoint get an anchor node.
pub fn build_stroke_graph(sk: &Skeleton, keypoints: &[Keypoint]) -> StrokeGraph {
    let img = &sk.image;
    let w = img.width();
    let mut nodes: Vec<Keypoint> = keypoints.to_vec();
    let mut node_of: Vec<Option<usize>> = vec![None; w * img.height()];
    for (i, kp) in nodes.iter().enumerate() {
        for &(r, c) in &kp.pixels {
            node_of[r * w + c] = Some(i);
        }
    }

    let pixel_sets: Vec<Vec<Point>> = nodes.iter().map(|n| n.pixels.clone()).collect();
    let (mut paths, cycles) = trace_paths(sk, &node_of, &pixel_sets);
    for cycle in cycles {
        let anchor = cycle[0];
        let id = nodes.len();
        nodes.push(Keypoint {
            position: anchor,
            kind: KeypointKind::Curved,
            pixels: vec![anchor],
        });
        node_of[anchor.0 * w + anchor.1] = Some(id);
        if cycle.len() > 1 {
            paths.push(TracedPath {
                from: id,
                to: id,
                pixels: cycle[1..].to_vec(),
            });
        }
    }

    let mut edges: Vec<Edge> = paths
        .into_iter()
        .enumerate()
        .map(|(id, p)| Edge {
            id,
            from: p.from,
            to: p.to,
            pixels: p.pixels,
        })
        .collect();

    // Directly touching nodes.
    let mut touching = std::collections::BTreeSet::new();
    for (i, node) in nodes.iter().enumerate() {
        for &(r, c) in &node.pixels {
            for &(dr, dc) in &RING {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if !img.get_signed(nr, nc) {
                    continue;
                }
                if let Some(j) = node_of[nr as usize * w + nc as usize] {
                    if j > i {
                        touching.insert((i, j));
                    }
                }
            }
        }
    }
    for (i, j) in touching {
        edges.push(Edge {
            id: edges.len(),
            from: i,
            to: j,
            pixels: Vec::new(),
        });
    }

    StrokeGraph {
        width: w,
        height: img.height(),
        nodes,
        edges,
        component_count: count_components(img),
    }
}
