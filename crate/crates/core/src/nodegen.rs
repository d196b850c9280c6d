//! Node placement: variable-density fill, repel regularization, and
//! distribution quality diagnostics.
//!
//! The fill is a Poisson-disc-style expansion: starting from the boundary
//! nodes (or a single interior seed), each processed node spawns candidates
//! regularly placed on the circle/sphere of radius `δr(p)` around it, and a
//! candidate survives only if no existing node lies closer than
//! `ζ · δr(candidate)`. The queue is FIFO and all randomness comes from a
//! seeded generator, so a fill is a pure function of its inputs.

use std::collections::VecDeque;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adaptivity::RadiusField;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryPoint, Domain};
use crate::point::{add_scaled, sub, Point};
use crate::spatial::NeighborIndex;

/// Interior or boundary discretization node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    Boundary,
}

/// The discretization: positions, node kinds, boundary normals and segment
/// labels, and the per-node spacing `δr_i` (distance to the closest other
/// node).
#[derive(Debug, Clone)]
pub struct NodeSet<const D: usize> {
    positions: Vec<Point<D>>,
    kinds: Vec<NodeKind>,
    normals: Vec<Point<D>>,
    segments: Vec<Option<u32>>,
    segment_names: Vec<String>,
    spacing: Vec<f64>,
}

impl<const D: usize> NodeSet<D> {
    /// Assembles a node set; boundary nodes first, then interior points.
    /// Spacing is computed from scratch.
    pub fn from_parts(boundary: &[BoundaryPoint<D>], interior: Vec<Point<D>>) -> Self {
        let mut segment_names: Vec<String> = Vec::new();
        let mut positions = Vec::with_capacity(boundary.len() + interior.len());
        let mut kinds = Vec::with_capacity(positions.capacity());
        let mut normals = Vec::with_capacity(positions.capacity());
        let mut segments = Vec::with_capacity(positions.capacity());
        for b in boundary {
            positions.push(b.position);
            kinds.push(NodeKind::Boundary);
            normals.push(b.normal);
            let id = match segment_names.iter().position(|s| *s == b.segment) {
                Some(i) => i,
                None => {
                    segment_names.push(b.segment.clone());
                    segment_names.len() - 1
                }
            };
            segments.push(Some(id as u32));
        }
        for p in interior {
            positions.push(p);
            kinds.push(NodeKind::Interior);
            normals.push([0.0; D]);
            segments.push(None);
        }
        let mut set = Self {
            positions,
            kinds,
            normals,
            segments,
            segment_names,
            spacing: Vec::new(),
        };
        set.recompute_spacing();
        set
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point<D>] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> Point<D> {
        self.positions[i]
    }

    pub fn kind(&self, i: usize) -> NodeKind {
        self.kinds[i]
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.kinds[i] == NodeKind::Boundary
    }

    pub fn normal(&self, i: usize) -> Point<D> {
        self.normals[i]
    }

    pub fn segment(&self, i: usize) -> Option<&str> {
        self.segments[i].map(|id| self.segment_names[id as usize].as_str())
    }

    /// Distance from node `i` to its closest neighbour.
    pub fn spacing(&self, i: usize) -> f64 {
        self.spacing[i]
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacing
    }

    pub fn interior_count(&self) -> usize {
        self.kinds.iter().filter(|k| **k == NodeKind::Interior).count()
    }

    pub fn boundary_count(&self) -> usize {
        self.len() - self.interior_count()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Recomputes `δr_i` after positions changed. A single-node set keeps an
    /// infinite spacing clamped to its own value downstream.
    pub fn recompute_spacing(&mut self) {
        let index = NeighborIndex::build(&self.positions);
        self.spacing = self
            .positions
            .iter()
            .map(|&p| {
                index
                    .knn(p, 2)
                    .iter()
                    .map(|&(_, d)| d)
                    .find(|&d| d > 0.0)
                    .unwrap_or(f64::INFINITY)
            })
            .collect();
    }

    pub(crate) fn set_position(&mut self, i: usize, p: Point<D>) {
        self.positions[i] = p;
    }
}

/// Parameters of the fill expansion.
#[derive(Debug, Clone)]
pub struct FillParams {
    /// Proximity factor ζ ∈ [0, 1].
    pub zeta: f64,
    pub seed: u64,
    /// Candidates placed on the circle/sphere per expansion.
    pub candidates: usize,
    /// Hard cap on accepted nodes; a spacing function collapsing towards
    /// zero otherwise expands forever in ever smaller steps.
    pub max_nodes: usize,
}

impl FillParams {
    /// Standard candidate counts: 6 on a circle, 12 on a sphere.
    pub fn standard(dim: usize, seed: u64) -> Self {
        Self {
            zeta: 0.9,
            seed,
            candidates: match dim {
                1 => 2,
                2 => 6,
                _ => 12,
            },
            max_nodes: 2_000_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.zeta) {
            return Err(Error::InvalidParameter(format!(
                "zeta must lie in [0, 1], got {}",
                self.zeta
            )));
        }
        if self.candidates == 0 {
            return Err(Error::InvalidParameter("candidates must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parameters of the repel regularization.
#[derive(Debug, Clone)]
pub struct RelaxParams {
    pub iterations: usize,
    pub initial_heat: f64,
    pub final_heat: f64,
    pub power: f64,
    pub neighbors: usize,
}

impl Default for RelaxParams {
    fn default() -> Self {
        Self {
            iterations: 10,
            initial_heat: 0.8,
            final_heat: 0.0,
            power: 2.0,
            neighbors: 3,
        }
    }
}

impl RelaxParams {
    fn validate(&self) -> Result<()> {
        if !(self.initial_heat >= self.final_heat && self.final_heat >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "heats must satisfy Q_i >= Q_f >= 0, got {} and {}",
                self.initial_heat, self.final_heat
            )));
        }
        if !(self.power > 0.0) {
            return Err(Error::InvalidParameter("potential power must be > 0".into()));
        }
        if self.neighbors == 0 {
            return Err(Error::InvalidParameter("relax neighbors must be >= 1".into()));
        }
        Ok(())
    }
}

/// Fills the domain with interior nodes matching the target spacing.
///
/// Boundary nodes seed the expansion queue; when none are given a single
/// deterministic interior seed starts it. For a fixed seed the result is
/// bit-identical across runs.
pub fn fill<const D: usize>(
    domain: &Domain<D>,
    dr: &RadiusField<D>,
    params: &FillParams,
    boundary: &[BoundaryPoint<D>],
) -> Result<NodeSet<D>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let contains = |p: Point<D>| domain.contains(p);
    let dr_fn = |p: Point<D>| dr.eval(p);

    let existing: Vec<Point<D>> = boundary.iter().map(|b| b.position).collect();
    let mut interior = Vec::new();
    let added = if existing.is_empty() {
        let seed_point = domain.interior_seed();
        check_dr(dr_fn(seed_point), seed_point)?;
        interior.push(seed_point);
        sampler::expand(
            &[seed_point],
            &[seed_point],
            &contains,
            &dr_fn,
            params.zeta,
            params.candidates,
            params.max_nodes,
            &mut rng,
        )?
    } else {
        sampler::expand(
            &existing,
            &existing,
            &contains,
            &dr_fn,
            params.zeta,
            params.candidates,
            params.max_nodes,
            &mut rng,
        )?
    };
    interior.extend(added);
    Ok(NodeSet::from_parts(boundary, interior))
}

/// One repel pass displaces each interior node by
/// `d(i) = -ξ_i a(n_r) Σ_j (δr(p_j) / |p_j - p_i|)^κ (p_j - p_i)`
/// summed over its closest neighbours, where `ξ_i` is the distance to the
/// closest node and the annealing factor
/// `a(n_r) = Q_f + (N_r - n_r)/N_r (Q_i - Q_f)` drops linearly from `Q_i`
/// towards `Q_f`. Updates are Jacobi style against the previous iteration's
/// positions; boundary nodes never move. A move is cancelled if it would
/// leave the domain or shrink the node's own clearance by more than 0.5%.
pub fn relax<const D: usize>(
    nodes: &NodeSet<D>,
    dr: &RadiusField<D>,
    params: &RelaxParams,
    domain: &Domain<D>,
) -> Result<NodeSet<D>> {
    params.validate()?;
    if nodes.is_empty() {
        return Err(Error::InvalidParameter("relax needs a nonempty node set".into()));
    }
    let mut out = nodes.clone();
    let n_total = params.iterations;
    for n_r in 0..n_total {
        let anneal = params.final_heat
            + (n_total - n_r) as f64 / n_total as f64 * (params.initial_heat - params.final_heat);
        let index = NeighborIndex::build(out.positions());
        let mut new_positions: Vec<Point<D>> = Vec::with_capacity(out.len());
        for i in 0..out.len() {
            let p = out.position(i);
            if out.is_boundary(i) {
                new_positions.push(p);
                continue;
            }
            let hits = index.knn(p, params.neighbors + 1);
            let mut displacement = [0.0; D];
            let mut xi = f64::INFINITY;
            let mut used = 0;
            for &(j, d) in &hits {
                if j == i || d == 0.0 {
                    continue;
                }
                if used == params.neighbors {
                    break;
                }
                used += 1;
                xi = xi.min(d);
                let w = (dr.eval(out.position(j)) / d).powf(params.power);
                displacement = add_scaled(displacement, w, sub(out.position(j), p));
            }
            if used == 0 || !xi.is_finite() {
                new_positions.push(p);
                continue;
            }
            let q = add_scaled(p, -xi * anneal, displacement);
            // Cancel moves that exit the domain or materially reduce this
            // node's clearance (keeps the global minimum spacing from
            // dropping more than ~1% per iteration).
            let accept = domain.contains(q) && {
                let d_new = index
                    .knn(q, 2)
                    .iter()
                    .map(|&(j, d)| if j == i { f64::INFINITY } else { d })
                    .fold(f64::INFINITY, f64::min);
                d_new >= 0.995 * xi
            };
            new_positions.push(if accept { q } else { p });
        }
        for (i, q) in new_positions.into_iter().enumerate() {
            out.set_position(i, q);
        }
    }
    out.recompute_spacing();
    Ok(out)
}

/// Normalized distances `d_{i,j} = |p_{i,j} - p_i| / δr(p_i)` over the
/// `neighbors` closest nodes of every node (self excluded).
pub fn normalized_distances<const D: usize>(
    nodes: &NodeSet<D>,
    dr: &RadiusField<D>,
    neighbors: usize,
) -> Result<Vec<f64>> {
    if nodes.len() <= neighbors {
        return Err(Error::InvalidParameter(format!(
            "need more than {neighbors} nodes for the quality histogram, have {}",
            nodes.len()
        )));
    }
    let index = NeighborIndex::build(nodes.positions());
    let mut out = Vec::with_capacity(nodes.len() * neighbors);
    for i in 0..nodes.len() {
        let p = nodes.position(i);
        let scale = dr.eval(p);
        let mut taken = 0;
        for &(j, d) in &index.knn(p, neighbors + 1) {
            if j == i {
                continue;
            }
            if taken == neighbors {
                break;
            }
            taken += 1;
            out.push(d / scale);
        }
    }
    Ok(out)
}

/// The conventional neighbour count for quality histograms.
pub fn quality_neighbors(dim: usize) -> usize {
    match dim {
        1 => 2,
        2 => 6,
        _ => 12,
    }
}

/// Histogram with uniform bins over `[range.0, range.1)`.
#[derive(Debug, Clone)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Fraction of all samples falling in `[lo, hi)`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        let total: usize = self.counts.iter().sum();
        if total == 0 {
            return 0.0;
        }
        let mut hit = 0usize;
        for (k, &c) in self.counts.iter().enumerate() {
            if self.edges[k] >= lo && self.edges[k + 1] <= hi {
                hit += c;
            }
        }
        hit as f64 / total as f64
    }
}

/// Bins the normalized neighbour distances of the node set.
pub fn quality_histogram<const D: usize>(
    nodes: &NodeSet<D>,
    dr: &RadiusField<D>,
    neighbors: usize,
    bins: usize,
    range: (f64, f64),
) -> Result<Histogram> {
    let samples = normalized_distances(nodes, dr, neighbors)?;
    let (lo, hi) = range;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for s in samples {
        if s >= lo && s < hi {
            counts[((s - lo) / width) as usize] += 1;
        }
    }
    let edges = (0..=bins).map(|k| lo + k as f64 * width).collect();
    Ok(Histogram { edges, counts })
}

/// Scaled and shifted MATLAB `peaks` function used by the node-distribution
/// demonstrations: spacing `δx` in the densest spots, `Δx` in the coarsest.
pub fn peaks_spacing(delta_x: f64, big_delta_x: f64) -> RadiusField<2> {
    RadiusField::analytic(move |p: Point<2>| {
        let (x, y) = (p[0], p[1]);
        let peaks = 3.0 * (1.0 - x).powi(2) * (-x * x - (y + 1.0).powi(2)).exp()
            - 10.0 * (x / 5.0 - x.powi(3) - y.powi(5)) * (-x * x - y * y).exp()
            - (1.0 / 3.0) * (-(x + 1.0).powi(2) - y * y).exp();
        delta_x + (big_delta_x - delta_x) * (peaks + 6.55) / 14.66
    })
}

fn check_dr<const D: usize>(value: f64, p: Point<D>) -> Result<f64> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::NonPositiveSpacing {
            location: p.to_vec(),
            value,
        });
    }
    Ok(value)
}

pub(crate) mod sampler {
    //! The expansion core shared by the interior fill and box-face filling.

    use super::*;

    /// Grows a point set by Poisson-disc expansion.
    ///
    /// `existing` are proximity obstacles (returned points exclude them);
    /// `queue_seeds` start the FIFO processing queue. Returns the accepted
    /// new points in insertion order.
    pub(crate) fn expand<const D: usize>(
        existing: &[Point<D>],
        queue_seeds: &[Point<D>],
        contains: &dyn Fn(Point<D>) -> bool,
        dr: &dyn Fn(Point<D>) -> f64,
        zeta: f64,
        candidates: usize,
        max_new: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<Point<D>>> {
        let mut index = IncrementalIndex::new(existing);
        let mut queue: VecDeque<Point<D>> = queue_seeds.iter().copied().collect();
        let mut added = Vec::new();
        let mut expand_one = |center: Point<D>,
                              index: &mut IncrementalIndex<D>,
                              queue: &mut VecDeque<Point<D>>,
                              added: &mut Vec<Point<D>>,
                              rng: &mut ChaCha8Rng|
         -> Result<()> {
            let radius = check_dr(dr(center), center)?;
            for dir in directions::<D>(candidates, rng) {
                let cand = add_scaled(center, radius, dir);
                if !contains(cand) {
                    continue;
                }
                let dr_c = check_dr(dr(cand), cand)?;
                if index.clear_of(cand, zeta * dr_c) {
                    if added.len() >= max_new {
                        return Err(Error::FillBudgetExceeded { limit: max_new });
                    }
                    index.insert(cand);
                    queue.push_back(cand);
                    added.push(cand);
                }
            }
            Ok(())
        };

        // Wavefront pass from the seeds.
        while let Some(center) = queue.pop_front() {
            expand_one(center, &mut index, &mut queue, &mut added, rng)?;
        }
        // Saturation sweeps: a single wavefront leaves fillable gaps where
        // all candidate rings happened to miss; re-expand every node with a
        // fresh rotation. Yields decay geometrically, so stop once a sweep
        // contributes less than 0.25% of the set (or after eight sweeps).
        for _sweep in 0..8 {
            let before = added.len();
            let all: Vec<Point<D>> =
                existing.iter().copied().chain(added.iter().copied()).collect();
            for center in all {
                expand_one(center, &mut index, &mut queue, &mut added, rng)?;
            }
            while let Some(center) = queue.pop_front() {
                expand_one(center, &mut index, &mut queue, &mut added, rng)?;
            }
            let gained = added.len() - before;
            if gained * 400 < existing.len() + added.len() {
                break;
            }
        }
        Ok(added)
    }

    /// Unit directions: regular angular offsets with one random rotation per
    /// expansion (2-D), a randomly rotated spherical Fibonacci set (3-D), or
    /// both axis directions (1-D).
    fn directions<const D: usize>(count: usize, rng: &mut ChaCha8Rng) -> Vec<Point<D>> {
        match D {
            1 => {
                let mut plus = [0.0; D];
                plus[0] = 1.0;
                let mut minus = [0.0; D];
                minus[0] = -1.0;
                vec![plus, minus]
            }
            2 => {
                let theta0: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                (0..count)
                    .map(|k| {
                        let theta = theta0 + std::f64::consts::TAU * k as f64 / count as f64;
                        let mut p = [0.0; D];
                        p[0] = theta.cos();
                        p[1] = theta.sin();
                        p
                    })
                    .collect()
            }
            3 => {
                let rot = random_rotation(rng);
                (0..count)
                    .map(|k| {
                        let v = fibonacci_sphere(k, count);
                        let mut p = [0.0; D];
                        for r in 0..3 {
                            p[r] = rot[r][0] * v[0] + rot[r][1] * v[1] + rot[r][2] * v[2];
                        }
                        p
                    })
                    .collect()
            }
            _ => unreachable!("unsupported dimension"),
        }
    }

    /// k-th of n points of the spherical Fibonacci lattice.
    fn fibonacci_sphere(k: usize, n: usize) -> [f64; 3] {
        let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = std::f64::consts::TAU * (k as f64 / golden).fract();
        [r * phi.cos(), r * phi.sin(), z]
    }

    /// Uniform random rotation matrix (Shoemake quaternion construction).
    fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
        let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
        let (s2, c2) = (std::f64::consts::TAU * u2).sin_cos();
        let (s3, c3) = (std::f64::consts::TAU * u3).sin_cos();
        let (x, y, z, w) = (a * s2, a * c2, b * s3, b * c3);
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - z * w),
                2.0 * (x * z + y * w),
            ],
            [
                2.0 * (x * y + z * w),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - x * w),
            ],
            [
                2.0 * (x * z - y * w),
                2.0 * (y * z + x * w),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }

    /// Append-only nearest-neighbour structure: a periodically rebuilt
    /// kd-tree plus a brute-force tail of recent insertions.
    struct IncrementalIndex<const D: usize> {
        all: Vec<Point<D>>,
        tree: NeighborIndex<D>,
        tree_len: usize,
    }

    const REBUILD_TAIL: usize = 512;

    impl<const D: usize> IncrementalIndex<D> {
        fn new(initial: &[Point<D>]) -> Self {
            Self {
                all: initial.to_vec(),
                tree: NeighborIndex::build(initial),
                tree_len: initial.len(),
            }
        }

        fn insert(&mut self, p: Point<D>) {
            self.all.push(p);
            if self.all.len() - self.tree_len >= REBUILD_TAIL {
                self.tree = NeighborIndex::build(&self.all);
                self.tree_len = self.all.len();
            }
        }

        /// True if no stored point lies strictly closer than `radius` to `q`.
        fn clear_of(&self, q: Point<D>, radius: f64) -> bool {
            if let Some(d) = self.tree.nearest_dist(q) {
                if d < radius {
                    return false;
                }
            }
            let r2 = radius * radius;
            for p in &self.all[self.tree_len..] {
                if crate::point::dist_sq(*p, q) < r2 {
                    return false;
                }
            }
            true
        }
    }
}
