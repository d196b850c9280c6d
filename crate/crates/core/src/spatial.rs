//! k-nearest-neighbour index over point sets.
//!
//! A static kd-tree with median splits. Queries return results sorted by
//! nondecreasing Euclidean distance, with ties broken by lower point id so
//! that every consumer of neighbourhood information (stencil selection, fill
//! proximity tests, Shepard reconstruction) is reproducible run to run.

use crate::point::{dist_sq, Point};

/// Immutable k-nearest-neighbour index.
///
/// Built once over a point set; concurrent queries are safe.
#[derive(Debug, Clone)]
pub struct NeighborIndex<const D: usize> {
    points: Vec<Point<D>>,
    /// Point ids arranged as a balanced kd-tree: the root of a range is its
    /// median element, left/right subranges are the subtrees.
    order: Vec<u32>,
}

impl<const D: usize> NeighborIndex<D> {
    /// Builds the index. An empty list is allowed; queries then return nothing.
    pub fn build(points: &[Point<D>]) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        if !order.is_empty() {
            build_rec(points, &mut order, 0);
        }
        Self {
            points: points.to_vec(),
            order,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: usize) -> Point<D> {
        self.points[id]
    }

    /// The `min(k, len)` nearest points to `q`, sorted by nondecreasing
    /// distance; exact ties are broken by lower point id.
    pub fn knn(&self, q: Point<D>, k: usize) -> Vec<(usize, f64)> {
        let mut heap = KnnHeap::new(k);
        if k > 0 && !self.order.is_empty() {
            self.search(&mut heap, q, 0, self.order.len(), 0);
        }
        heap.into_sorted()
    }

    /// Distance from `q` to the nearest indexed point, if any.
    pub fn nearest_dist(&self, q: Point<D>) -> Option<f64> {
        self.knn(q, 1).first().map(|&(_, d)| d)
    }

    fn search(&self, heap: &mut KnnHeap, q: Point<D>, lo: usize, hi: usize, depth: usize) {
        let mid = lo + (hi - lo) / 2;
        let id = self.order[mid] as usize;
        heap.offer(id, dist_sq(q, self.points[id]));

        let axis = depth % D;
        let delta = q[axis] - self.points[id][axis];
        let (near, far) = if delta <= 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        if near.0 < near.1 {
            self.search(heap, q, near.0, near.1, depth + 1);
        }
        if far.0 < far.1 && delta * delta <= heap.worst_dist_sq() {
            self.search(heap, q, far.0, far.1, depth + 1);
        }
    }
}

fn build_rec<const D: usize>(points: &[Point<D>], order: &mut [u32], depth: usize) {
    if order.len() <= 1 {
        return;
    }
    let axis = depth % D;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis]
            .partial_cmp(&points[b as usize][axis])
            .unwrap()
            .then(a.cmp(&b))
    });
    let (left, right) = order.split_at_mut(mid);
    build_rec(points, left, depth + 1);
    build_rec(points, &mut right[1..], depth + 1);
}

/// Bounded max-heap over (distance², id) with the tie-break order baked in:
/// an entry is worse than another if its distance is larger, or equal with a
/// higher id.
struct KnnHeap {
    k: usize,
    entries: Vec<(f64, usize)>,
}

impl KnnHeap {
    fn new(k: usize) -> Self {
        Self {
            k,
            entries: Vec::with_capacity(k + 1),
        }
    }

    fn worst_dist_sq(&self) -> f64 {
        if self.entries.len() < self.k {
            f64::INFINITY
        } else {
            self.entries[0].0
        }
    }

    fn offer(&mut self, id: usize, d2: f64) {
        if self.entries.len() < self.k {
            self.entries.push((d2, id));
            self.sift_up(self.entries.len() - 1);
        } else if worse(self.entries[0], (d2, id)) {
            self.entries[0] = (d2, id);
            self.sift_down(0);
        }
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if worse(self.entries[i], self.entries[parent]) {
                self.entries.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut largest = i;
            if l < self.entries.len() && worse(self.entries[l], self.entries[largest]) {
                largest = l;
            }
            if r < self.entries.len() && worse(self.entries[r], self.entries[largest]) {
                largest = r;
            }
            if largest == i {
                break;
            }
            self.entries.swap(i, largest);
            i = largest;
        }
    }

    fn into_sorted(self) -> Vec<(usize, f64)> {
        let mut out: Vec<(f64, usize)> = self.entries;
        out.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        out.into_iter().map(|(d2, id)| (id, d2.sqrt())).collect()
    }
}

/// True if `a` ranks strictly worse (farther, or same distance with higher id).
#[inline]
fn worse(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 > b.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_knn<const D: usize>(points: &[Point<D>], q: Point<D>, k: usize) -> Vec<(usize, f64)> {
        let mut all: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, &p)| (dist_sq(q, p), i))
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        all.truncate(k);
        all.into_iter().map(|(d2, i)| (i, d2.sqrt())).collect()
    }

    #[test]
    fn collinear_points() {
        let pts = [[0.0], [1.0], [2.0]];
        let index = NeighborIndex::build(&pts);
        assert_eq!(index.len(), 3);
        let hits = index.knn([0.9], 1);
        assert_eq!(hits[0].0, 1);
    }

    #[test]
    fn query_at_indexed_point() {
        let pts = [[0.0, 0.0], [1.0, 0.0]];
        let index = NeighborIndex::build(&pts);
        let hits = index.knn([1.0, 0.0], 1);
        assert_eq!(hits, vec![(1, 0.0)]);
    }

    #[test]
    fn duplicates_are_both_returned() {
        let pts = [[2.0, 2.0], [2.0, 2.0], [5.0, 5.0]];
        let index = NeighborIndex::build(&pts);
        let hits = index.knn([2.0, 2.0], 2);
        assert_eq!(hits, vec![(0, 0.0), (1, 0.0)]);
    }

    #[test]
    fn grid_center_five_nearest() {
        // 3x3 unit grid, query at center: center + 4 edge-adjacent at distance 1.
        let mut pts = Vec::new();
        for y in 0..3 {
            for x in 0..3 {
                pts.push([x as f64, y as f64]);
            }
        }
        let index = NeighborIndex::build(&pts);
        let hits = index.knn([1.0, 1.0], 5);
        let expected = brute_knn(&pts, [1.0, 1.0], 5);
        assert_eq!(hits, expected);
        assert_eq!(hits[0], (4, 0.0));
        for &(_, d) in &hits[1..] {
            assert_eq!(d, 1.0);
        }
    }

    #[test]
    fn k_larger_than_size_returns_all() {
        let pts = [[0.0, 1.0], [1.0, 0.0]];
        let index = NeighborIndex::build(&pts);
        assert_eq!(index.knn([0.0, 0.0], 10).len(), 2);
    }

    #[test]
    fn empty_index() {
        let index = NeighborIndex::<2>::build(&[]);
        assert!(index.is_empty());
        assert!(index.knn([0.0, 0.0], 3).is_empty());
    }

    #[test]
    fn agrees_with_brute_force_including_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..200 {
            let n = rng.random_range(1..=2000);
            // Snap to a coarse grid so exact distance ties actually occur.
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|_| {
                    [
                        (rng.random_range(-8..=8) as f64) * 0.25,
                        (rng.random_range(-8..=8) as f64) * 0.25,
                    ]
                })
                .collect();
            let index = NeighborIndex::build(&pts);
            let q = [
                (rng.random_range(-8..=8) as f64) * 0.25,
                (rng.random_range(-8..=8) as f64) * 0.25,
            ];
            let k = rng.random_range(1..=12);
            assert_eq!(
                index.knn(q, k),
                brute_knn(&pts, q, k),
                "trial {trial} mismatch"
            );
        }
    }

    #[test]
    fn three_dimensional_queries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<[f64; 3]> = (0..500)
            .map(|_| std::array::from_fn(|_| rng.random::<f64>()))
            .collect();
        let index = NeighborIndex::build(&pts);
        for _ in 0..50 {
            let q: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>());
            assert_eq!(index.knn(q, 15), brute_knn(&pts, q, 15));
        }
    }
}
