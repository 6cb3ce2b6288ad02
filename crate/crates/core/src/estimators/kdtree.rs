//! Median-split kd-tree with pluggable leaf scoring.
//!
//! The tree stores points in "search coordinates" (raw joints, or whitened
//! joints for Mahalanobis measures). Leaves are scored by a caller-supplied
//! closure returning the model's actual similarity, so results do not
//! depend on the tree's own arithmetic; the tree only supplies lower bounds
//! on that similarity for pruning.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const LEAF_SIZE: usize = 12;
/// Bounds are shrunk by this factor before pruning to absorb rounding
/// differences between the bound and the leaf score.
const PRUNE_SLACK: f64 = 1.0 - 1e-9;

/// How a node's box bounds the similarity from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PruneBound {
    /// Similarity is the Euclidean norm in search coordinates.
    Euclidean,
    /// Similarity is `sqrt(sum w_i d_i^2)` with per-sample `w`; the bound uses
    /// the per-node minimum of each weight.
    Weighted,
    /// No usable bound; every leaf is scored.
    None,
}

#[derive(Clone, Debug)]
struct Node {
    start: usize,
    end: usize,
    /// Child ids, or `usize::MAX` for leaves.
    left: usize,
    right: usize,
}

#[derive(Clone, Debug)]
pub struct KdTree {
    dim: usize,
    /// Search coordinates in tree order.
    coords: Vec<f64>,
    /// `order[i]` is the sample index stored at tree position `i`.
    order: Vec<usize>,
    nodes: Vec<Node>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    min_weights: Option<Vec<f64>>,
    bound: PruneBound,
}

/// A scored training sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub sim: f64,
}

impl Neighbor {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.sim.total_cmp(&other.sim).then(self.index.cmp(&other.index))
    }
}

struct HeapItem(Neighbor);

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.key_cmp(&other.0)
    }
}

/// Min-heap entry for best-first traversal.
struct Pending(f64, usize);

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Running best-k set ordered by `(sim, index)`.
struct BestK {
    k: usize,
    heap: BinaryHeap<HeapItem>,
}

impl BestK {
    fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    fn offer(&mut self, n: Neighbor) {
        if self.heap.len() < self.k {
            self.heap.push(HeapItem(n));
        } else if let Some(top) = self.heap.peek() {
            if n.key_cmp(&top.0) == Ordering::Less {
                self.heap.pop();
                self.heap.push(HeapItem(n));
            }
        }
    }

    fn worst(&self) -> f64 {
        if self.heap.len() < self.k {
            f64::INFINITY
        } else {
            self.heap.peek().map_or(f64::INFINITY, |t| t.0.sim)
        }
    }

    fn into_sorted(self) -> Vec<Neighbor> {
        let mut v: Vec<Neighbor> = self.heap.into_iter().map(|h| h.0).collect();
        v.sort_by(|a, b| a.key_cmp(b));
        v
    }
}

/// Node-visit counters from a search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_visited: usize,
    pub points_scored: usize,
}

impl KdTree {
    /// Build over `coords` (row-major, `dim` per point). `weights`, if
    /// given, holds one row of per-axis weights per point and enables the
    /// weighted bound.
    pub fn build(dim: usize, coords: &[f64], weights: Option<&[f64]>, bound: PruneBound) -> Self {
        assert!(dim > 0 && coords.len() % dim == 0);
        let n = coords.len() / dim;
        assert!(bound != PruneBound::Weighted || weights.is_some());
        let mut order: Vec<usize> = (0..n).collect();
        let mut tree = Self {
            dim,
            coords: Vec::new(),
            order: Vec::new(),
            nodes: Vec::new(),
            lo: Vec::new(),
            hi: Vec::new(),
            min_weights: weights.filter(|_| bound == PruneBound::Weighted).map(|_| Vec::new()),
            bound,
        };
        if n > 0 {
            tree.split(coords, weights, &mut order, 0, n);
        }
        tree.coords = order
            .iter()
            .flat_map(|&i| coords[i * dim..(i + 1) * dim].iter().copied())
            .collect();
        tree.order = order;
        tree
    }

    fn split(
        &mut self,
        coords: &[f64],
        weights: Option<&[f64]>,
        order: &mut [usize],
        start: usize,
        end: usize,
    ) -> usize {
        let d = self.dim;
        let id = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            left: usize::MAX,
            right: usize::MAX,
        });
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in &order[start..end] {
            for k in 0..d {
                lo[k] = lo[k].min(coords[i * d + k]);
                hi[k] = hi[k].max(coords[i * d + k]);
            }
        }
        if let (Some(mw), Some(w)) = (self.min_weights.as_mut(), weights) {
            let mut m = vec![f64::INFINITY; d];
            for &i in &order[start..end] {
                for k in 0..d {
                    m[k] = m[k].min(w[i * d + k]);
                }
            }
            mw.extend(m.iter().map(|v| v.max(0.0)));
        }
        let axis = (0..d)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
            .expect("dim > 0");
        let spread = hi[axis] - lo[axis];
        self.lo.extend_from_slice(&lo);
        self.hi.extend_from_slice(&hi);
        if end - start <= LEAF_SIZE || spread == 0.0 {
            return id;
        }
        let mid = start + (end - start) / 2;
        order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            coords[a * d + axis].total_cmp(&coords[b * d + axis]).then(a.cmp(&b))
        });
        let left = self.split(coords, weights, order, start, mid);
        let right = self.split(coords, weights, order, mid, end);
        self.nodes[id].left = left;
        self.nodes[id].right = right;
        id
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Lower bound on the similarity of any point in `node` to `query`.
    fn lower_bound(&self, node: usize, query: &[f64]) -> f64 {
        if self.bound == PruneBound::None {
            return 0.0;
        }
        let d = self.dim;
        let lo = &self.lo[node * d..(node + 1) * d];
        let hi = &self.hi[node * d..(node + 1) * d];
        let mut s = 0.0;
        for k in 0..d {
            let gap = if query[k] < lo[k] {
                lo[k] - query[k]
            } else if query[k] > hi[k] {
                query[k] - hi[k]
            } else {
                0.0
            };
            let w = match &self.min_weights {
                Some(mw) => mw[node * d + k],
                None => 1.0,
            };
            s += w * gap * gap;
        }
        s.sqrt() * PRUNE_SLACK
    }

    fn score_leaf<F: Fn(usize) -> f64>(&self, node: usize, score: &F, best: &mut BestK, stats: &mut SearchStats) {
        let n = &self.nodes[node];
        for pos in n.start..n.end {
            let index = self.order[pos];
            stats.points_scored += 1;
            best.offer(Neighbor {
                index,
                sim: score(index),
            });
        }
    }

    /// Exact `k` nearest samples by `(sim, index)`.
    pub fn knn<F: Fn(usize) -> f64>(&self, query: &[f64], k: usize, score: F) -> (Vec<Neighbor>, SearchStats) {
        let mut best = BestK::new(k);
        let mut stats = SearchStats::default();
        if k > 0 && !self.is_empty() {
            self.knn_rec(0, query, &score, &mut best, &mut stats);
        }
        (best.into_sorted(), stats)
    }

    fn knn_rec<F: Fn(usize) -> f64>(
        &self,
        node: usize,
        query: &[f64],
        score: &F,
        best: &mut BestK,
        stats: &mut SearchStats,
    ) {
        stats.nodes_visited += 1;
        let n = &self.nodes[node];
        if n.left == usize::MAX {
            self.score_leaf(node, score, best, stats);
            return;
        }
        let bl = self.lower_bound(n.left, query);
        let br = self.lower_bound(n.right, query);
        let (first, fb, second, sb) = if bl <= br {
            (n.left, bl, n.right, br)
        } else {
            (n.right, br, n.left, bl)
        };
        if fb <= best.worst() {
            self.knn_rec(first, query, score, best, stats);
        }
        if sb <= best.worst() {
            self.knn_rec(second, query, score, best, stats);
        }
    }

    /// Best-first approximate search. A node is skipped once
    /// `(1 + eps) * bound` exceeds the current k-th similarity, and the
    /// search stops after `max_nodes` node visits.
    pub fn ann<F: Fn(usize) -> f64>(
        &self,
        query: &[f64],
        k: usize,
        eps: f64,
        max_nodes: usize,
        score: F,
    ) -> (Vec<Neighbor>, SearchStats) {
        let mut best = BestK::new(k);
        let mut stats = SearchStats::default();
        if k == 0 || self.is_empty() {
            return (Vec::new(), stats);
        }
        let mut queue = BinaryHeap::new();
        queue.push(Pending(self.lower_bound(0, query), 0));
        while let Some(Pending(b, node)) = queue.pop() {
            if (1.0 + eps) * b > best.worst() {
                break;
            }
            if stats.nodes_visited >= max_nodes && best.heap.len() == k {
                break;
            }
            stats.nodes_visited += 1;
            let n = &self.nodes[node];
            if n.left == usize::MAX {
                self.score_leaf(node, &score, &mut best, &mut stats);
            } else {
                queue.push(Pending(self.lower_bound(n.left, query), n.left));
                queue.push(Pending(self.lower_bound(n.right, query), n.right));
            }
        }
        (best.into_sorted(), stats)
    }

    /// All samples with `sim < r`, sorted by index.
    pub fn within<F: Fn(usize) -> f64>(&self, query: &[f64], r: f64, score: F) -> (Vec<Neighbor>, SearchStats) {
        let mut out = Vec::new();
        let mut stats = SearchStats::default();
        if self.is_empty() {
            return (out, stats);
        }
        let mut stack = vec![0];
        while let Some(node) = stack.pop() {
            stats.nodes_visited += 1;
            let n = &self.nodes[node];
            if n.left == usize::MAX {
                for pos in n.start..n.end {
                    let index = self.order[pos];
                    stats.points_scored += 1;
                    let sim = score(index);
                    if sim < r {
                        out.push(Neighbor { index, sim });
                    }
                }
                continue;
            }
            for child in [n.left, n.right] {
                if self.lower_bound(child, query) < r {
                    stack.push(child);
                }
            }
        }
        out.sort_by_key(|n| n.index);
        (out, stats)
    }
}
