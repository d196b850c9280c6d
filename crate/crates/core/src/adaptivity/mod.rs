//! Indicator-driven h-refinement: error indicators, the density increase
//! factor, nodal radius updates, spacing-function reconstruction, and the
//! top-level adaptive driver.

mod shepard;

pub use shepard::{shepard_reconstruct, RadiusField, ShepardField};

use crate::elasticity::{Material, StressField};
use crate::error::{Error, Result};
use crate::metrics::ErrorReport;
use crate::nodegen::NodeSet;
use crate::rbffd::StencilTable;

/// Refine/derefine thresholds and aggressiveness.
#[derive(Debug, Clone, Copy)]
pub struct Thresholds {
    /// Refine threshold ε.
    pub epsilon: f64,
    /// Derefine threshold η ≤ ε.
    pub eta: f64,
    /// Refine aggressiveness α ≥ 1.
    pub alpha: f64,
    /// Derefine aggressiveness β ≥ 1.
    pub beta: f64,
}

impl Thresholds {
    pub fn new(epsilon: f64, eta: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(eta <= epsilon) {
            return Err(Error::InvalidParameter(format!(
                "thresholds require η <= ε, got η={eta}, ε={epsilon}"
            )));
        }
        if !(alpha >= 1.0 && beta >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "aggressiveness requires α, β >= 1, got α={alpha}, β={beta}"
            )));
        }
        Ok(Self {
            epsilon,
            eta,
            alpha,
            beta,
        })
    }
}

/// How the indicator field is reduced for the termination test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    Mean,
    Max,
}

/// Full configuration of the adaptive loop.
#[derive(Debug, Clone)]
pub struct AdaptParams<const D: usize> {
    pub thresholds: Thresholds,
    /// Coarseness bound δrᵘ: radii never grow beyond this during derefinement.
    pub dr_upper: RadiusField<D>,
    /// Iteration cap I_max (the loop runs at most `I_max + 1` solves).
    pub max_iterations: usize,
    /// Neighbour count of the Shepard reconstruction.
    pub shepard_neighbors: usize,
    /// Stop before solving if a discretization exceeds this many nodes.
    pub node_budget: Option<usize>,
    /// Reduction of the indicator used in the termination test.
    pub termination: Reduction,
}

/// Per-node nonnegative error indicator with its recorded extremes.
#[derive(Debug, Clone)]
pub struct IndicatorField {
    values: Vec<f64>,
    min: f64,
    max: f64,
}

impl IndicatorField {
    pub fn new(values: Vec<f64>) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { values, min, max }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn reduce(&self, reduction: Reduction) -> f64 {
        match reduction {
            Reduction::Mean => self.mean(),
            Reduction::Max => self.max,
        }
    }
}

/// Analytic energy-kernel indicator `ê(p) = (σ : S : σ) δr(p)^d`.
///
/// `stresses` are the exact closed-form values when available; `spacings`
/// are the per-node `δr_i`.
pub fn indicator_energy(
    stresses: &StressField,
    mat: &Material,
    spacings: &[f64],
    dim: usize,
) -> IndicatorField {
    assert_eq!(stresses.node_count(), spacings.len());
    let values = (0..stresses.node_count())
        .map(|i| mat.compliance_energy(stresses.row(i)) * spacings[i].powi(dim as i32))
        .collect();
    IndicatorField::new(values)
}

/// Ad-hoc variability indicator: the sum over distinct stress components of
/// the standard deviation across the node's stencil.
pub fn indicator_std(stresses: &StressField, stencils: &StencilTable) -> Result<IndicatorField> {
    if stencils.size() < 2 {
        return Err(Error::InvalidParameter(
            "the variability indicator needs stencils of at least 2 nodes".into(),
        ));
    }
    let comps = stresses.component_count();
    let n = stencils.node_count();
    let mut values = Vec::with_capacity(n);
    let k = stencils.size() as f64;
    for i in 0..n {
        let stencil = stencils.stencil(i);
        let mut total = 0.0;
        for c in 0..comps {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for &j in stencil {
                let v = stresses.row(j as usize)[c];
                sum += v;
                sum_sq += v * v;
            }
            let mean = sum / k;
            let var = (sum_sq / k - mean * mean).max(0.0);
            total += var.sqrt();
        }
        values.push(total);
    }
    Ok(IndicatorField::new(values))
}

/// Density increase factor: piecewise-linear response to the indicator,
/// clamped to `[1/β, α]`, with the refine ramp anchored at `ε → 1` and
/// `M → α`, and the derefine ramp at `η → 1` and `m → 1/β`.
pub fn density_factor(e_hat: &IndicatorField, thr: &Thresholds) -> Vec<f64> {
    let (m, big_m) = (e_hat.min(), e_hat.max());
    e_hat
        .values()
        .iter()
        .map(|&e| {
            if e <= thr.eta {
                // Degenerate ramp (η = m): every such node sits at the
                // minimum, which maps to the full derefinement factor.
                if thr.eta == m {
                    1.0 / thr.beta
                } else {
                    1.0 + (thr.eta - e) / (thr.eta - m) * (1.0 / thr.beta - 1.0)
                }
            } else if e < thr.epsilon {
                1.0
            } else if big_m == thr.epsilon {
                1.0
            } else {
                1.0 + (e - thr.epsilon) / (big_m - thr.epsilon) * (thr.alpha - 1.0)
            }
        })
        .collect()
}

/// What happened to a node's radius in one adaptive step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusCategory {
    Refined,
    Unchanged,
    Derefined,
    DerefinedHitBound,
}

/// New per-node radii and their categories.
#[derive(Debug, Clone)]
pub struct RadiusUpdate {
    pub radii: Vec<f64>,
    pub categories: Vec<RadiusCategory>,
}

/// `δr̃_i = min(δr_i / f_i, δrᵘ_i)` with the per-node category record.
///
/// The coarseness bound caps the radius during derefinement (`f < 1`); it
/// never forces down nodes whose current radius already exceeds it, which
/// only matters when the initial density is coarser than `δrᵘ` somewhere.
pub fn update_radii<const D: usize>(
    nodes: &NodeSet<D>,
    factors: &[f64],
    dr_upper: &RadiusField<D>,
) -> RadiusUpdate {
    assert_eq!(nodes.len(), factors.len());
    let mut radii = Vec::with_capacity(nodes.len());
    let mut categories = Vec::with_capacity(nodes.len());
    for i in 0..nodes.len() {
        let f = factors[i];
        let raw = nodes.spacing(i) / f;
        let cap = dr_upper.eval(nodes.position(i));
        let new = if f < 1.0 { raw.min(cap) } else { raw };
        radii.push(new);
        categories.push(if f > 1.0 {
            RadiusCategory::Refined
        } else if f == 1.0 {
            RadiusCategory::Unchanged
        } else if raw > cap {
            RadiusCategory::DerefinedHitBound
        } else {
            RadiusCategory::Derefined
        });
    }
    RadiusUpdate { radii, categories }
}

/// Counts of the four radius categories in one adaptive step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CategoryCounts {
    pub refined: usize,
    pub no_change: usize,
    pub derefined: usize,
    pub hit_bound: usize,
}

impl CategoryCounts {
    pub fn tally(categories: &[RadiusCategory]) -> Self {
        let mut c = CategoryCounts {
            refined: 0,
            no_change: 0,
            derefined: 0,
            hit_bound: 0,
        };
        for cat in categories {
            match cat {
                RadiusCategory::Refined => c.refined += 1,
                RadiusCategory::Unchanged => c.no_change += 1,
                RadiusCategory::Derefined => c.derefined += 1,
                RadiusCategory::DerefinedHitBound => c.hit_bound += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.refined + self.no_change + self.derefined + self.hit_bound
    }
}

/// One row of the per-iteration report.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub nodes: usize,
    /// Absent on the final iteration (no adaptation happened after it).
    pub categories: Option<CategoryCounts>,
    pub mean_indicator: f64,
    pub max_indicator: f64,
    pub errors: Option<ErrorReport>,
}

/// How the adaptive loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// The indicator reduction dropped below ε after this iteration.
    Converged { iteration: usize },
    /// The iteration cap was reached.
    MaxIterations,
    /// The next discretization would have exceeded the node budget.
    NodeBudgetExceeded { would_be: usize },
}

/// Everything one adaptive iteration produced.
pub struct IterationData<const D: usize, S> {
    pub nodes: NodeSet<D>,
    pub state: S,
    pub indicator: IndicatorField,
    pub record: IterationRecord,
}

/// Result of an adaptive run.
pub struct AdaptiveRun<const D: usize, S> {
    pub iterations: Vec<IterationData<D, S>>,
    pub outcome: Outcome,
}

impl<const D: usize, S> AdaptiveRun<D, S> {
    pub fn final_iteration(&self) -> &IterationData<D, S> {
        self.iterations.last().expect("adaptive runs solve at least once")
    }

    pub fn records(&self) -> Vec<IterationRecord> {
        self.iterations.iter().map(|it| it.record.clone()).collect()
    }
}

/// A problem the adaptive driver can iterate on.
pub trait AdaptiveCase<const D: usize> {
    type State;

    /// Discretizes the domain to the current spacing function. `iteration`
    /// only parametrizes the fill seed.
    fn discretize(&self, dr: &RadiusField<D>, iteration: usize) -> Result<NodeSet<D>>;

    fn solve(&self, nodes: &NodeSet<D>) -> Result<Self::State>;

    fn indicator(&self, state: &Self::State, nodes: &NodeSet<D>) -> Result<IndicatorField>;

    /// Error norms against the exact solution, when one exists.
    fn error_report(&self, state: &Self::State, nodes: &NodeSet<D>) -> Option<ErrorReport>;
}

/// The adaptive solution procedure: discretize, solve, indicate, and either
/// stop (indicator reduction below ε, iteration cap, node budget) or adapt
/// the spacing function and repeat.
pub fn adaptive_solve<const D: usize, C: AdaptiveCase<D>>(
    case: &C,
    dr0: &RadiusField<D>,
    params: &AdaptParams<D>,
) -> Result<AdaptiveRun<D, C::State>> {
    let mut dr = dr0.clone();
    let mut iterations: Vec<IterationData<D, C::State>> = Vec::new();
    let mut outcome = Outcome::MaxIterations;

    for it in 0..=params.max_iterations {
        let nodes = case.discretize(&dr, it).map_err(|e| e.at_iteration(it))?;
        if let Some(budget) = params.node_budget {
            if nodes.len() > budget && !iterations.is_empty() {
                outcome = Outcome::NodeBudgetExceeded {
                    would_be: nodes.len(),
                };
                break;
            }
        }
        let state = case.solve(&nodes).map_err(|e| e.at_iteration(it))?;
        let indicator = case
            .indicator(&state, &nodes)
            .map_err(|e| e.at_iteration(it))?;
        let errors = case.error_report(&state, &nodes);
        let mut record = IterationRecord {
            iteration: it,
            nodes: nodes.len(),
            categories: None,
            mean_indicator: indicator.mean(),
            max_indicator: indicator.max(),
            errors,
        };

        if indicator.reduce(params.termination) < params.thresholds.epsilon {
            outcome = Outcome::Converged { iteration: it };
            iterations.push(IterationData {
                nodes,
                state,
                indicator,
                record,
            });
            break;
        }
        if it == params.max_iterations {
            iterations.push(IterationData {
                nodes,
                state,
                indicator,
                record,
            });
            break;
        }

        let factors = density_factor(&indicator, &params.thresholds);
        let update = update_radii(&nodes, &factors, &params.dr_upper);
        record.categories = Some(CategoryCounts::tally(&update.categories));
        dr = shepard_reconstruct(nodes.positions(), &update.radii, params.shepard_neighbors);
        iterations.push(IterationData {
            nodes,
            state,
            indicator,
            record,
        });
    }

    Ok(AdaptiveRun {
        iterations,
        outcome,
    })
}
