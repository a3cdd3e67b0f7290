//! Exact nearest-neighbor search over a static point set.
//!
//! A plain k-d tree with median splits and squared-Euclidean pruning. The
//! pruning test is exact (no epsilon), so a query always returns a point
//! at the true minimum distance; callers verify this against an
//! exhaustive scan in their test suites.

pub(crate) struct KdTree<const D: usize> {
    nodes: Vec<Node<D>>,
    root: u32,
}

struct Node<const D: usize> {
    point: [f64; D],
    /// Index of the point in the order it was passed to `build`.
    payload: u32,
    axis: u8,
    left: u32,
    right: u32,
}

const NONE: u32 = u32::MAX;

impl<const D: usize> KdTree<D> {
    /// Builds a tree over `points`; payloads are the input positions.
    /// All coordinates must be finite. Panics on an empty input.
    pub(crate) fn build(points: &[[f64; D]]) -> Self {
        assert!(!points.is_empty(), "kd-tree needs at least one point");
        let mut items: Vec<([f64; D], u32)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (*p, i as u32))
            .collect();
        let mut nodes = Vec::with_capacity(points.len());
        let root = build_rec(&mut items, 0, &mut nodes);
        KdTree { nodes, root }
    }

    /// Returns `(payload, squared_distance)` of a nearest point to `q`.
    pub(crate) fn nearest(&self, q: &[f64; D]) -> (u32, f64) {
        let mut best = (NONE, f64::INFINITY);
        self.search(self.root, q, &mut best);
        (self.nodes[best.0 as usize].payload, best.1)
    }

    fn search(&self, node: u32, q: &[f64; D], best: &mut (u32, f64)) {
        if node == NONE {
            return;
        }
        let n = &self.nodes[node as usize];
        let d2 = squared_distance(&n.point, q);
        if d2 < best.1 {
            *best = (node, d2);
        }
        let axis = n.axis as usize;
        let delta = q[axis] - n.point[axis];
        let (near, far) = if delta < 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.search(near, q, best);
        if delta * delta <= best.1 {
            self.search(far, q, best);
        }
    }
}

fn build_rec<const D: usize>(
    items: &mut [([f64; D], u32)],
    depth: usize,
    nodes: &mut Vec<Node<D>>,
) -> u32 {
    if items.is_empty() {
        return NONE;
    }
    let axis = depth % D;
    let mid = items.len() / 2;
    items.select_nth_unstable_by(mid, |a, b| a.0[axis].total_cmp(&b.0[axis]));
    let (point, payload) = items[mid];
    let (lo, hi) = items.split_at_mut(mid);
    let left = build_rec(lo, depth + 1, nodes);
    let right = build_rec(&mut hi[1..], depth + 1, nodes);
    let idx = nodes.len() as u32;
    nodes.push(Node {
        point,
        payload,
        axis: axis as u8,
        left,
        right,
    });
    idx
}

#[inline]
pub(crate) fn squared_distance<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut acc = 0.0;
    for d in 0..D {
        let diff = a[d] - b[d];
        acc += diff * diff;
    }
    acc
}
