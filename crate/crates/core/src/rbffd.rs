//! RBF-FD differentiation weights.
//!
//! Weights for a linear operator at a stencil center are obtained by imposing
//! exactness on Gaussian RBFs centred at the stencil nodes. Putting RBFs on
//! only the `m` closest of `n` stencil nodes gives an underdetermined system,
//! resolved by the minimum-norm solution; a constant monomial can be appended
//! through a Lagrange multiplier, which forces derivative weights to sum to
//! zero. The shape parameter scales with the local node spacing so the
//! collocation matrices stay equally conditioned as the density changes.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nodegen::NodeSet;
use crate::point::{dist, dist_sq, Point};
use crate::spatial::NeighborIndex;

/// A linear differential operator to approximate.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Identity,
    /// First partial along the given axis.
    Derivative(usize),
    /// Second partial `d²/dx_a dx_b`.
    SecondDerivative(usize, usize),
    Laplacian,
    /// Linear combination of non-combination terms.
    Combination(Vec<(f64, OperatorSpec)>),
}

impl OperatorSpec {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            OperatorSpec::Identity | OperatorSpec::Laplacian => Ok(()),
            OperatorSpec::Derivative(a) => {
                if *a < dim {
                    Ok(())
                } else {
                    Err(Error::UnsupportedOperator(format!(
                        "derivative axis {a} in dimension {dim}"
                    )))
                }
            }
            OperatorSpec::SecondDerivative(a, b) => {
                if *a < dim && *b < dim {
                    Ok(())
                } else {
                    Err(Error::UnsupportedOperator(format!(
                        "second derivative axes ({a},{b}) in dimension {dim}"
                    )))
                }
            }
            OperatorSpec::Combination(terms) => {
                if terms.is_empty() {
                    return Err(Error::UnsupportedOperator("empty combination".into()));
                }
                for (c, term) in terms {
                    if !c.is_finite() {
                        return Err(Error::UnsupportedOperator(format!(
                            "non-finite coefficient {c}"
                        )));
                    }
                    if matches!(term, OperatorSpec::Combination(_)) {
                        return Err(Error::UnsupportedOperator(
                            "nested combinations are not supported".into(),
                        ));
                    }
                    term.validate(dim)?;
                }
                Ok(())
            }
        }
    }

    /// The operator applied to the constant function 1 (the augmentation
    /// row's right-hand side).
    fn on_constant(&self) -> f64 {
        match self {
            OperatorSpec::Identity => 1.0,
            OperatorSpec::Derivative(_)
            | OperatorSpec::SecondDerivative(_, _)
            | OperatorSpec::Laplacian => 0.0,
            OperatorSpec::Combination(terms) => {
                terms.iter().map(|(c, t)| c * t.on_constant()).sum()
            }
        }
    }
}

/// `(𝓛 φ_center)(eval_at)` for the Gaussian `φ(p) = exp(-(|p - center|/σ)²)`,
/// from the closed-form derivatives.
pub fn gaussian_rbf<const D: usize>(
    op: &OperatorSpec,
    center: Point<D>,
    eval_at: Point<D>,
    sigma: f64,
) -> Result<f64> {
    op.validate(D)?;
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "shape parameter must be positive, got {sigma}"
        )));
    }
    Ok(gaussian_unchecked(op, center, eval_at, sigma))
}

fn gaussian_unchecked<const D: usize>(
    op: &OperatorSpec,
    center: Point<D>,
    eval_at: Point<D>,
    sigma: f64,
) -> f64 {
    let s2 = sigma * sigma;
    let u = crate::point::sub(eval_at, center);
    let r2 = crate::point::norm_sq(u);
    let e = (-r2 / s2).exp();
    match op {
        OperatorSpec::Identity => e,
        OperatorSpec::Derivative(a) => -2.0 * u[*a] / s2 * e,
        OperatorSpec::SecondDerivative(a, b) => {
            let kron = if a == b { 2.0 / s2 } else { 0.0 };
            (4.0 * u[*a] * u[*b] / (s2 * s2) - kron) * e
        }
        OperatorSpec::Laplacian => (4.0 * r2 / (s2 * s2) - 2.0 * D as f64 / s2) * e,
        OperatorSpec::Combination(terms) => terms
            .iter()
            .map(|(c, t)| c * gaussian_unchecked(t, center, eval_at, sigma))
            .sum(),
    }
}

/// Base shape parameter; the per-node value is `σ_b · δr_i` with `δr_i` the
/// distance from the stencil center to its closest stencil node.
#[derive(Debug, Clone, Copy)]
pub struct ShapeParam {
    pub base: f64,
}

impl ShapeParam {
    pub fn new(base: f64) -> Result<Self> {
        if !(base > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "shape parameter base must be positive, got {base}"
            )));
        }
        Ok(Self { base })
    }
}

/// Monomial augmentation of the RBF basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Augmentation {
    None,
    Constant,
}

impl Augmentation {
    /// Spec-style degree: -1 disables augmentation, 0 appends the constant.
    pub fn from_degree(degree: i32) -> Result<Self> {
        match degree {
            -1 => Ok(Augmentation::None),
            0 => Ok(Augmentation::Constant),
            d => Err(Error::InvalidParameter(format!(
                "only augmentation degrees -1 and 0 are supported, got {d}"
            ))),
        }
    }
}

/// Stencil size `n`, RBF count `m <= n`, and augmentation choice.
#[derive(Debug, Clone, Copy)]
pub struct StencilConfig {
    pub n: usize,
    pub m: usize,
    pub augmentation: Augmentation,
}

impl StencilConfig {
    pub fn new(n: usize, m: usize, augmentation: Augmentation) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::InvalidParameter(format!(
                "stencil config requires 1 <= m <= n, got n={n}, m={m}"
            )));
        }
        Ok(Self { n, m, augmentation })
    }
}

/// Per-node stencil index lists (all stencils share the same size).
#[derive(Debug, Clone)]
pub struct StencilTable {
    size: usize,
    ids: Vec<u32>,
}

impl StencilTable {
    pub fn stencil(&self, node: usize) -> &[u32] {
        &self.ids[node * self.size..(node + 1) * self.size]
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn node_count(&self) -> usize {
        if self.size == 0 {
            0
        } else {
            self.ids.len() / self.size
        }
    }
}

/// Per-node weight vectors for a set of operators over shared stencils.
#[derive(Debug, Clone)]
pub struct WeightStore {
    stencils: StencilTable,
    ops: Vec<OperatorSpec>,
    /// weights[op][node * n .. (node+1) * n]
    weights: Vec<Vec<f64>>,
}

impl WeightStore {
    pub fn stencils(&self) -> &StencilTable {
        &self.stencils
    }

    pub fn ops(&self) -> &[OperatorSpec] {
        &self.ops
    }

    pub fn op_index(&self, op: &OperatorSpec) -> Result<usize> {
        self.ops
            .iter()
            .position(|o| o == op)
            .ok_or_else(|| Error::MissingOperator(format!("{op:?}")))
    }

    pub fn weights(&self, op_index: usize, node: usize) -> &[f64] {
        let n = self.stencils.size();
        &self.weights[op_index][node * n..(node + 1) * n]
    }

    pub fn stencil(&self, node: usize) -> &[u32] {
        self.stencils.stencil(node)
    }

    /// Applies one operator's weights to a nodal scalar field.
    pub fn apply(&self, op_index: usize, node: usize, field: &[f64]) -> f64 {
        self.stencil(node)
            .iter()
            .zip(self.weights(op_index, node))
            .map(|(&j, &w)| field[j as usize] * w)
            .sum()
    }
}

/// Differentiation weights for one stencil and one operator.
///
/// The first stencil point is the center. See [`compute_weights_multi`] for
/// the variant that shares the factorization across several operators.
pub fn compute_weights<const D: usize>(
    stencil_points: &[Point<D>],
    op: &OperatorSpec,
    cfg: &StencilConfig,
    shape: &ShapeParam,
) -> Result<Vec<f64>> {
    compute_weights_multi(stencil_points, std::slice::from_ref(op), cfg, shape)
        .map(|mut v| v.pop().unwrap())
}

/// Weights for several operators over one stencil, factorizing once.
///
/// Very flat shape parameters can push a particular stencil beyond what
/// double precision resolves; the shape is then halved for that stencil
/// (up to three times) until the exactness gate holds.
pub fn compute_weights_multi<const D: usize>(
    stencil_points: &[Point<D>],
    ops: &[OperatorSpec],
    cfg: &StencilConfig,
    shape: &ShapeParam,
) -> Result<Vec<Vec<f64>>> {
    let mut base = shape.base;
    let mut last = None;
    for _ in 0..4 {
        match compute_weights_fixed_shape(stencil_points, ops, cfg, &ShapeParam { base }) {
            Err(Error::IllConditioned { cond }) => {
                last = Some(Error::IllConditioned { cond });
                base *= 0.5;
            }
            other => return other,
        }
    }
    Err(last.unwrap())
}

fn compute_weights_fixed_shape<const D: usize>(
    stencil_points: &[Point<D>],
    ops: &[OperatorSpec],
    cfg: &StencilConfig,
    shape: &ShapeParam,
) -> Result<Vec<Vec<f64>>> {
    let n = stencil_points.len();
    if n != cfg.n {
        return Err(Error::InvalidParameter(format!(
            "stencil has {n} points but the config declares n={}",
            cfg.n
        )));
    }
    for op in ops {
        op.validate(D)?;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if stencil_points[i] == stencil_points[j] {
                return Err(Error::DuplicateStencilPoints(i, j));
            }
        }
    }
    let center = stencil_points[0];
    let spacing = stencil_points[1..]
        .iter()
        .map(|&p| dist(center, p))
        .fold(f64::INFINITY, f64::min);
    if !spacing.is_finite() || spacing == 0.0 {
        return Err(Error::InvalidParameter(
            "stencil needs at least two distinct points".into(),
        ));
    }
    let sigma = shape.base * spacing;

    // RBF centers: the m closest stencil nodes (ties by input order). For
    // m == n keep the input order so the collocation matrix is symmetric.
    let centers: Vec<usize> = if cfg.m == n {
        (0..n).collect()
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            dist_sq(center, stencil_points[a])
                .partial_cmp(&dist_sq(center, stencil_points[b]))
                .unwrap()
                .then(a.cmp(&b))
        });
        order.truncate(cfg.m);
        order
    };

    let phi = DMatrix::from_fn(cfg.m, n, |k, j| {
        gaussian_unchecked(
            &OperatorSpec::Identity,
            stencil_points[centers[k]],
            stencil_points[j],
            sigma,
        )
    });
    let rhs: Vec<DVector<f64>> = ops
        .iter()
        .map(|op| {
            DVector::from_fn(cfg.m, |k, _| {
                gaussian_unchecked(op, stencil_points[centers[k]], center, sigma)
            })
        })
        .collect();

    match (cfg.augmentation, cfg.m == n) {
        (Augmentation::None, true) => solve_collocation(&phi, &rhs, ops),
        (Augmentation::None, false) => solve_min_norm(&phi, &rhs, ops),
        (Augmentation::Constant, true) => {
            solve_bordered(&phi, &rhs, ops).map(|w| enforce_consistency_sums(w, ops))
        }
        (Augmentation::Constant, false) => {
            // Stack the consistency row onto the exactness rows and take the
            // minimum-norm solution of the taller underdetermined system.
            let stacked = phi.clone().insert_row(cfg.m, 1.0);
            let rhs_stacked: Vec<DVector<f64>> = rhs
                .iter()
                .zip(ops)
                .map(|(b, op)| {
                    let mut v = b.clone().insert_row(cfg.m, 0.0);
                    v[cfg.m] = op.on_constant();
                    v
                })
                .collect();
            solve_min_norm(&stacked, &rhs_stacked, ops)
                .map(|w| enforce_consistency_sums(w, ops))
        }
    }
}

/// The augmentation's consistency constraint `Σ w = (𝓛 1)(p_i)` holds to
/// solver accuracy after the solve; a final uniform shift makes it hold to
/// rounding, which the polynomial-reproduction contract relies on.
fn enforce_consistency_sums(mut weights: Vec<Vec<f64>>, ops: &[OperatorSpec]) -> Vec<Vec<f64>> {
    for (w, op) in weights.iter_mut().zip(ops) {
        let target = op.on_constant();
        let shift = (w.iter().sum::<f64>() - target) / w.len() as f64;
        for wi in w.iter_mut() {
            *wi -= shift;
        }
    }
    weights
}

/// Relative exactness tolerance enforced on every solve path.
const EXACTNESS_TOL: f64 = 1e-8;
/// Condition estimate beyond which the SPD fast path gives way to a
/// rank-revealing decomposition.
const COND_LIMIT: f64 = 1e14;
/// Relative singular-value truncation of the rank-revealing path.
const SVD_TRUNC: f64 = 1e-15;

fn residual_ok(phi: &DMatrix<f64>, w: &DVector<f64>, b: &DVector<f64>) -> bool {
    // The absolute floor scales with the operator's overall magnitude:
    // derivative values grow like 1/h^k on fine stencils, and components
    // that happen to vanish (mixed partials at axis-aligned points) would
    // otherwise demand more than rounding allows.
    let scale = b.amax().max(1.0);
    let r = phi * w - b;
    r.iter()
        .zip(b.iter())
        .all(|(ri, bi)| ri.abs() <= EXACTNESS_TOL * bi.abs().max(scale))
}

/// Determined symmetric collocation system `A w = b` (Cholesky, falling back
/// to untruncated QR and then a truncated SVD when numerically indefinite).
fn solve_collocation(
    a: &DMatrix<f64>,
    rhs: &[DVector<f64>],
    ops: &[OperatorSpec],
) -> Result<Vec<Vec<f64>>> {
    let _ = ops;
    if let Some(chol) = nalgebra::linalg::Cholesky::new(a.clone()) {
        let ldiag = chol.l_dirty().diagonal();
        let cond = (ldiag.max() / ldiag.min()).powi(2);
        if cond < COND_LIMIT {
            let mut out = Vec::with_capacity(rhs.len());
            let mut good = true;
            for b in rhs {
                let mut w = chol.solve(b);
                if !residual_ok(a, &w, b) {
                    // One step of iterative refinement.
                    let correction = chol.solve(&(b - a * &w));
                    w += correction;
                }
                if !residual_ok(a, &w, b) {
                    good = false;
                    break;
                }
                out.push(w.iter().copied().collect());
            }
            if good {
                return Ok(out);
            }
        }
    }
    solve_qr(a, rhs).or_else(|_| solve_svd(a, rhs))
}

/// Minimum-norm solution of the underdetermined system `Φ w = b` via the
/// normal equations of the second kind, with rank-revealing fallbacks.
fn solve_min_norm(
    phi: &DMatrix<f64>,
    rhs: &[DVector<f64>],
    ops: &[OperatorSpec],
) -> Result<Vec<Vec<f64>>> {
    let _ = ops;
    let gram = phi * phi.transpose();
    if let Some(chol) = nalgebra::linalg::Cholesky::new(gram.clone()) {
        let ldiag = chol.l_dirty().diagonal();
        let cond = (ldiag.max() / ldiag.min()).powi(2);
        if cond < COND_LIMIT {
            let mut out = Vec::with_capacity(rhs.len());
            let mut good = true;
            for b in rhs {
                let mut w = phi.transpose() * chol.solve(b);
                if !residual_ok(phi, &w, b) {
                    let correction = phi.transpose() * chol.solve(&(b - phi * &w));
                    w += correction;
                }
                if !residual_ok(phi, &w, b) {
                    good = false;
                    break;
                }
                out.push(w.iter().copied().collect());
            }
            if good {
                return Ok(out);
            }
        }
    }
    solve_qr(phi, rhs).or_else(|_| solve_svd(phi, rhs))
}

/// Minimum-norm solution through a QR factorization of `Φᵀ`:
/// `w = Q (Rᵀ)⁻¹ b`. No singular-value truncation: in the flat-Gaussian
/// regime the tiny directions carry the high-order reproduction the
/// derivative weights need, and the backward-stable triangular solve keeps
/// their contributions usable where a truncated pseudoinverse discards them.
fn solve_qr(phi: &DMatrix<f64>, rhs: &[DVector<f64>]) -> Result<Vec<Vec<f64>>> {
    let qr = phi.transpose().qr();
    let q = qr.q();
    let r = qr.r();
    let rt = r.transpose();
    let mut out = Vec::with_capacity(rhs.len());
    for b in rhs {
        let solve_once = |v: &DVector<f64>| -> Option<DVector<f64>> {
            rt.solve_lower_triangular(v).map(|y| &q * y)
        };
        let mut w = solve_once(b).ok_or(Error::IllConditioned { cond: f64::INFINITY })?;
        if !w.iter().all(|v| v.is_finite()) {
            return Err(Error::IllConditioned {
                cond: f64::INFINITY,
            });
        }
        for _ in 0..2 {
            if residual_ok(phi, &w, b) {
                break;
            }
            match solve_once(&(b - phi * &w)) {
                Some(c) if c.iter().all(|v| v.is_finite()) => w += c,
                _ => break,
            }
        }
        if !residual_ok(phi, &w, b) {
            return Err(Error::IllConditioned {
                cond: f64::INFINITY,
            });
        }
        out.push(w.iter().copied().collect());
    }
    Ok(out)
}

/// Bordered system of the constant augmentation: append the multiplier
/// column/row of ones and discard the multiplier afterwards.
fn solve_bordered(
    a: &DMatrix<f64>,
    rhs: &[DVector<f64>],
    ops: &[OperatorSpec],
) -> Result<Vec<Vec<f64>>> {
    let n = a.nrows();
    let mut big = DMatrix::zeros(n + 1, n + 1);
    big.view_mut((0, 0), (n, n)).copy_from(a);
    for j in 0..n {
        big[(n, j)] = 1.0;
        big[(j, n)] = 1.0;
    }
    let rhs_big: Vec<DVector<f64>> = rhs
        .iter()
        .zip(ops)
        .map(|(b, op)| {
            let mut v = b.clone().insert_row(n, 0.0);
            v[n] = op.on_constant();
            v
        })
        .collect();
    let lu = big.clone().lu();
    let mut out = Vec::with_capacity(rhs.len());
    for b in &rhs_big {
        let mut w = match lu.solve(b) {
            Some(w) => w,
            None => return solve_svd_trim(&big, &rhs_big, n),
        };
        if !residual_ok(&big, &w, b) {
            if let Some(correction) = lu.solve(&(b - &big * &w)) {
                w += correction;
            }
        }
        if !residual_ok(&big, &w, b) {
            return solve_svd_trim(&big, &rhs_big, n);
        }
        out.push(w.iter().take(n).copied().collect());
    }
    Ok(out)
}

/// Truncated-SVD pseudoinverse solve; the returned solution is the
/// minimum-norm least-squares one.
fn solve_svd(mat: &DMatrix<f64>, rhs: &[DVector<f64>]) -> Result<Vec<Vec<f64>>> {
    let svd = mat.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let mut out = Vec::with_capacity(rhs.len());
    for b in rhs {
        let mut w = svd
            .solve(b, SVD_TRUNC * smax)
            .map_err(|_| Error::IllConditioned { cond })?;
        if !residual_ok(mat, &w, b) {
            if let Ok(correction) = svd.solve(&(b - mat * &w), SVD_TRUNC * smax) {
                w += correction;
            }
        }
        if !residual_ok(mat, &w, b) {
            return Err(Error::IllConditioned { cond });
        }
        out.push(w.iter().copied().collect());
    }
    Ok(out)
}

fn solve_svd_trim(
    mat: &DMatrix<f64>,
    rhs: &[DVector<f64>],
    keep: usize,
) -> Result<Vec<Vec<f64>>> {
    let full = solve_svd(mat, rhs)?;
    Ok(full.into_iter().map(|mut w| {
        w.truncate(keep);
        w
    }).collect())
}

/// Computes weights for every node and every operator; stencils are the `n`
/// nearest nodes including the node itself.
pub fn build_weight_store<const D: usize>(
    nodes: &NodeSet<D>,
    ops: &[OperatorSpec],
    cfg: &StencilConfig,
    shape: &ShapeParam,
    index: &NeighborIndex<D>,
) -> Result<WeightStore> {
    let n_nodes = nodes.len();
    let per_node: Vec<(Vec<u32>, Vec<Vec<f64>>)> = (0..n_nodes)
        .into_par_iter()
        .map(|i| {
            let p = nodes.position(i);
            let hits = index.knn(p, cfg.n);
            if hits.len() < cfg.n {
                return Err(Error::NotEnoughNeighbors {
                    node: i,
                    available: hits.len(),
                    required: cfg.n,
                });
            }
            let ids: Vec<u32> = hits.iter().map(|&(j, _)| j as u32).collect();
            debug_assert_eq!(ids[0] as usize, i, "stencil center must be the node itself");
            let pts: Vec<Point<D>> = ids.iter().map(|&j| nodes.position(j as usize)).collect();
            let w = compute_weights_multi(&pts, ops, cfg, shape)
                .map_err(|e| e.at_node(i))?;
            Ok((ids, w))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut ids = Vec::with_capacity(n_nodes * cfg.n);
    let mut weights: Vec<Vec<f64>> = vec![Vec::with_capacity(n_nodes * cfg.n); ops.len()];
    for (stencil, per_op) in per_node {
        ids.extend_from_slice(&stencil);
        for (k, w) in per_op.into_iter().enumerate() {
            weights[k].extend_from_slice(&w);
        }
    }
    Ok(WeightStore {
        stencils: StencilTable { size: cfg.n, ids },
        ops: ops.to_vec(),
        weights,
    })
}
