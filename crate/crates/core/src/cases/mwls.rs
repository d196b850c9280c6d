//! 1-D adaptivity demonstration on a function-approximation problem.
//!
//! The target `g(x) = 3(1-x)² exp(-x²) + 3 exp(-4(x-1)²)` is approximated on
//! `[-3, 3]` by moving weighted least squares with basis `{1, x}`, twelve
//! support nodes and a Gaussian weight scaled to the farthest support. The
//! discretization is a deterministic left-to-right march matching the target
//! spacing, so iteration 0 is reproducible exactly; the indicator is the
//! pointwise approximation error times the local nodal spacing.

use crate::adaptivity::{
    AdaptParams, AdaptiveCase, IndicatorField, RadiusField, Reduction, Thresholds,
};
use crate::error::{Error, Result};
use crate::geometry::{march_arclength, BoundaryPoint};
use crate::metrics::ErrorReport;
use crate::nodegen::NodeSet;
use crate::spatial::NeighborIndex;

/// The moving-weighted-least-squares adaptivity demo.
#[derive(Debug, Clone)]
pub struct MwlsDemo {
    pub xmin: f64,
    pub xmax: f64,
    /// Base spacing `h₀` of the initial density `h₀ (1 + 25 |3 + x|)`.
    pub h0: f64,
    /// Support size of the least-squares fit.
    pub support: usize,
    /// Proximity factor of the marching fill.
    pub zeta: f64,
}

impl Default for MwlsDemo {
    fn default() -> Self {
        Self {
            xmin: -3.0,
            xmax: 3.0,
            h0: 0.005,
            support: 12,
            zeta: 0.9,
        }
    }
}

/// One MWLS solve: the approximation and target sampled at the nodes.
#[derive(Debug, Clone)]
pub struct MwlsState {
    pub approx: Vec<f64>,
    pub exact: Vec<f64>,
    /// Discrete L¹ error: Σ |g - ĝ| δr_i, the spacing-weighted integral of
    /// the approximation error.
    pub l1_error: f64,
}

impl MwlsDemo {
    /// `g(x) = 3(1-x)² exp(-x²) + 3 exp(-4(x-1)²)`.
    pub fn target(&self, x: f64) -> f64 {
        3.0 * (1.0 - x).powi(2) * (-x * x).exp() + 3.0 * (-4.0 * (x - 1.0).powi(2)).exp()
    }

    /// Initial density `δr(x) = h₀ (1 + 25 |3 + x|)`: dense at the left end,
    /// coarse at the right.
    pub fn initial_spacing(&self) -> RadiusField<1> {
        let h0 = self.h0;
        RadiusField::analytic(move |p| h0 * (1.0 + 25.0 * (3.0 + p[0]).abs()))
    }

    /// ε = 1e-3, η = 1e-4, α = β = 4, δrᵘ = 10 h₀, three iterations.
    pub fn default_adapt_params(&self) -> AdaptParams<1> {
        AdaptParams {
            thresholds: Thresholds::new(1e-3, 1e-4, 4.0, 4.0).expect("static"),
            dr_upper: RadiusField::constant(10.0 * self.h0),
            max_iterations: 3,
            shepard_neighbors: 7,
            node_budget: None,
            termination: Reduction::Mean,
        }
    }

    /// Evaluates the moving weighted least squares fit at every node.
    pub fn approximate(&self, nodes: &NodeSet<1>) -> Result<MwlsState> {
        let n = nodes.len();
        let k = self.support.min(n);
        if k < 2 {
            return Err(Error::InvalidParameter(
                "MWLS needs at least two support nodes".into(),
            ));
        }
        let index = NeighborIndex::build(nodes.positions());
        let g: Vec<f64> = nodes.positions().iter().map(|p| self.target(p[0])).collect();
        let mut approx = Vec::with_capacity(n);
        for i in 0..n {
            let x = nodes.position(i)[0];
            let hits = index.knn([x], k);
            let d_far = hits.last().unwrap().1;
            // Weighted fit of {1, t} in the local coordinate t = x_j - x;
            // the value at the node is the constant coefficient.
            let (mut a00, mut a01, mut a11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for &(j, dj) in &hits {
                let w = (-(dj / d_far).powi(2)).exp();
                let t = nodes.position(j)[0] - x;
                a00 += w;
                a01 += w * t;
                a11 += w * t * t;
                b0 += w * g[j];
                b1 += w * t * g[j];
            }
            let det = a00 * a11 - a01 * a01;
            approx.push((b0 * a11 - b1 * a01) / det);
        }
        let l1_error = approx
            .iter()
            .zip(&g)
            .enumerate()
            .map(|(i, (a, e))| (a - e).abs() * nodes.spacing(i))
            .sum::<f64>();
        Ok(MwlsState {
            approx,
            exact: g,
            l1_error,
        })
    }

    fn endpoints(&self) -> [BoundaryPoint<1>; 2] {
        [
            BoundaryPoint {
                position: [self.xmin],
                normal: [-1.0],
                segment: "left".into(),
            },
            BoundaryPoint {
                position: [self.xmax],
                normal: [1.0],
                segment: "right".into(),
            },
        ]
    }
}

impl AdaptiveCase<1> for MwlsDemo {
    type State = MwlsState;

    /// Deterministic 1-D fill: march from the left endpoint with steps
    /// matching the spacing at each gap midpoint; marched nodes within
    /// `ζ · min(δr)` of the right endpoint are dropped in its favour.
    fn discretize(&self, dr: &RadiusField<1>, _iteration: usize) -> Result<NodeSet<1>> {
        let length = self.xmax - self.xmin;
        let at = |s: f64| -> Result<f64> {
            let v = dr.eval([self.xmin + s]);
            if !(v > 0.0) {
                return Err(Error::NonPositiveSpacing {
                    location: vec![self.xmin + s],
                    value: v,
                });
            }
            Ok(v)
        };
        let steps = march_arclength(length, &at)?;
        let dr_end = dr.eval([self.xmax]);
        let mut interior = Vec::with_capacity(steps.len());
        for s in steps {
            let x = self.xmin + s;
            if self.xmax - x >= self.zeta * dr.eval([x]).min(dr_end) {
                interior.push([x]);
            }
        }
        Ok(NodeSet::from_parts(&self.endpoints(), interior))
    }

    fn solve(&self, nodes: &NodeSet<1>) -> Result<MwlsState> {
        self.approximate(nodes)
    }

    /// `e_i = |g(x_i) - ĝ(x_i)| δr(x_i)` with the local nodal spacing.
    fn indicator(&self, state: &MwlsState, nodes: &NodeSet<1>) -> Result<IndicatorField> {
        let values = (0..nodes.len())
            .map(|i| (state.exact[i] - state.approx[i]).abs() * nodes.spacing(i))
            .collect();
        Ok(IndicatorField::new(values))
    }

    fn error_report(&self, state: &MwlsState, nodes: &NodeSet<1>) -> Option<ErrorReport> {
        Some(ErrorReport {
            e_1: Some(state.l1_error),
            points: nodes.len(),
            ..ErrorReport::default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_hand_values() {
        let demo = MwlsDemo::default();
        // g(0) = 3 + 3 e^{-4}.
        let expected = 3.0 + 3.0 * (-4.0f64).exp();
        assert!((demo.target(0.0) - expected).abs() < 1e-12);
        assert!((demo.target(0.0) - 3.05495).abs() < 1e-5);
    }

    #[test]
    fn initial_fill_is_deterministic() {
        let demo = MwlsDemo::default();
        let dr = demo.initial_spacing();
        let a = demo.discretize(&dr, 0).unwrap();
        let b = demo.discretize(&dr, 5).unwrap();
        assert_eq!(a.len(), b.len());
        for i in 0..a.len() {
            assert_eq!(a.position(i), b.position(i));
        }
    }

    #[test]
    fn initial_fill_has_41_nodes() {
        let demo = MwlsDemo::default();
        let nodes = demo.discretize(&demo.initial_spacing(), 0).unwrap();
        assert_eq!(nodes.len(), 41);
    }

    #[test]
    fn mwls_reproduces_linear_data() {
        // With basis {1, x} the fit is exact on linear targets; emulate by
        // fitting a linear "g" through the same machinery.
        let demo = MwlsDemo {
            support: 5,
            ..MwlsDemo::default()
        };
        let nodes = NodeSet::<1>::from_parts(
            &demo.endpoints(),
            (1..20).map(|i| [-3.0 + 6.0 * i as f64 / 20.0]).collect(),
        );
        let index = NeighborIndex::build(nodes.positions());
        for i in 0..nodes.len() {
            let x = nodes.position(i)[0];
            let hits = index.knn([x], 5);
            let d_far = hits.last().unwrap().1;
            let (mut a00, mut a01, mut a11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for &(j, dj) in &hits {
                let w = (-(dj / d_far).powi(2)).exp();
                let t = nodes.position(j)[0] - x;
                let val = 2.0 * nodes.position(j)[0] - 0.7;
                a00 += w;
                a01 += w * t;
                a11 += w * t * t;
                b0 += w * val;
                b1 += w * t * val;
            }
            let det = a00 * a11 - a01 * a01;
            let fit = (b0 * a11 - b1 * a01) / det;
            assert!((fit - (2.0 * x - 0.7)).abs() < 1e-10);
        }
    }

    #[test]
    fn approximation_error_is_small_where_dense() {
        let demo = MwlsDemo::default();
        let nodes = demo.discretize(&demo.initial_spacing(), 0).unwrap();
        let state = demo.approximate(&nodes).unwrap();
        // The dense left end resolves g far better than the coarse right.
        let mut worst_left = 0.0f64;
        let mut worst_right = 0.0f64;
        for i in 0..nodes.len() {
            let x = nodes.position(i)[0];
            let err = (state.approx[i] - state.exact[i]).abs();
            if x < -2.5 {
                worst_left = worst_left.max(err);
            } else if x > 0.0 {
                worst_right = worst_right.max(err);
            }
        }
        assert!(
            worst_left < 0.1 * worst_right,
            "dense end {worst_left} vs coarse end {worst_right}"
        );
        assert!(worst_left < 0.05, "dense-end error too large: {worst_left}");
    }
}
