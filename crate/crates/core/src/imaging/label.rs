use super::BinaryImage;

/// Connected-component labels; 0 is background and components are numbered
/// `1..=count` in raster order of their first pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub count: usize,
}

impl Labels {
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    /// Pixel count per label, indexed by label (entry 0 is background).
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0usize; self.count + 1];
        for &l in &self.labels {
            areas[l as usize] += 1;
        }
        areas
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let ra = find(parent, a);
    let rb = find(parent, b);
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// Two-pass 8-connected labeling with union-find equivalences.
pub fn label_components(img: &BinaryImage) -> Labels {
    let (w, h) = (img.width(), img.height());
    let mut labels = vec![0u32; w * h];
    let mut parent: Vec<u32> = vec![0];

    for r in 0..h {
        for c in 0..w {
            if !img.get(r, c) {
                continue;
            }
            // Already-visited neighbors: W, NW, N, NE.
            let mut neigh = [0u32; 4];
            let mut n = 0;
            if c > 0 && labels[r * w + c - 1] != 0 {
                neigh[n] = labels[r * w + c - 1];
                n += 1;
            }
            if r > 0 {
                for dc in [-1isize, 0, 1] {
                    let cc = c as isize + dc;
                    if cc >= 0 && (cc as usize) < w {
                        let l = labels[(r - 1) * w + cc as usize];
                        if l != 0 {
                            neigh[n] = l;
                            n += 1;
                        }
                    }
                }
            }
            let idx = r * w + c;
            if n == 0 {
                let l = parent.len() as u32;
                parent.push(l);
                labels[idx] = l;
            } else {
                let m = *neigh[..n].iter().min().unwrap();
                labels[idx] = m;
                for &l in &neigh[..n] {
                    union(&mut parent, m, l);
                }
            }
        }
    }

    // Resolve and compact in raster order.
    let mut remap = vec![0u32; parent.len()];
    let mut count = 0u32;
    for l in labels.iter_mut() {
        if *l == 0 {
            continue;
        }
        let root = find(&mut parent, *l);
        if remap[root as usize] == 0 {
            count += 1;
            remap[root as usize] = count;
        }
        *l = remap[root as usize];
    }

    Labels {
        width: w,
        height: h,
        labels,
        count: count as usize,
    }
}

pub fn count_components(img: &BinaryImage) -> usize {
    label_components(img).count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_mask_has_no_components() {
        assert_eq!(count_components(&BinaryImage::new(5, 5)), 0);
    }

    #[test]
    fn disjoint_blocks_get_distinct_labels() {
        let img = BinaryImage::from_ascii(
            "###....\n\
             ###....\n\
             ###.###\n\
             ....###\n\
             ....###",
        );
        let labels = label_components(&img);
        assert_eq!(labels.count, 2);
        assert_ne!(labels.get(0, 0), labels.get(4, 6));
        assert_eq!(labels.get(0, 0), 1);
    }

    #[test]
    fn diagonal_contact_joins_components() {
        let img = BinaryImage::from_ascii("#..\n.#.\n..#");
        assert_eq!(count_components(&img), 1);
    }

    #[test]
    fn u_shape_merges_late() {
        let img = BinaryImage::from_ascii("#.#\n#.#\n###");
        let labels = label_components(&img);
        assert_eq!(labels.count, 1);
        assert_eq!(labels.areas()[1], 7);
    }
}
