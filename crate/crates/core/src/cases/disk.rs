//! Disk under diametrical compression.
//!
//! A disk of radius `R` is compressed by opposing point forces of magnitude
//! `P` at its poles; the plane-stress stress field is known in closed form
//! and is singular at the poles. Numerically a quarter disk of radius
//! `R - γ` is solved, with the exact tractions on the arc and symmetry
//! conditions on the straight edges; `γ` controls how close the domain gets
//! to the singularity and therefore the case difficulty.

use std::f64::consts::PI;

use crate::adaptivity::{
    indicator_energy, AdaptParams, AdaptiveCase, IndicatorField, RadiusField, Reduction,
    Thresholds,
};
use crate::elasticity::{BoundaryCondition, Material, PlaneMode, StressField};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::metrics::{err_1, err_energy, err_inf, ErrorReport};
use crate::nodegen::NodeSet;
use crate::point::Point;

use super::{discretize_2d, solve_elasticity, PdeState, SolveConfig};

/// Compressed-disk benchmark.
#[derive(Debug, Clone)]
pub struct DiskCase {
    /// Disk radius `R` (m).
    pub radius: f64,
    /// Pole offset `γ` (m): the computational quarter disk has radius `R - γ`.
    pub gamma: f64,
    /// Point force magnitude `P` (N/m).
    pub force: f64,
    pub material: Material,
    pub solver: SolveConfig,
    /// Initial (and upper-bound) spacing.
    pub dr0: f64,
}

impl DiskCase {
    /// The published setup: `R = 0.5`, `P = 1`, `E = 1`, `ν = 0.33`,
    /// plane stress, initial spacing 0.02.
    pub fn paper(gamma: f64, seed: u64) -> Result<Self> {
        Self::new(0.5, gamma, 1.0, 1.0, 0.33, seed)
    }

    pub fn new(
        radius: f64,
        gamma: f64,
        force: f64,
        young: f64,
        poisson: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma < radius) {
            return Err(Error::InvalidParameter(format!(
                "pole offset must satisfy 0 < γ < R, got γ={gamma}, R={radius}"
            )));
        }
        Ok(Self {
            radius,
            gamma,
            force,
            material: Material::new(young, poisson, PlaneMode::PlaneStress)?,
            solver: SolveConfig::standard_2d(seed),
            dr0: 0.02,
        })
    }

    pub fn domain(&self) -> Domain<2> {
        Domain::quarter_disk(self.radius - self.gamma).expect("validated radius")
    }

    /// Closed-form stresses `(σxx, σyy, σxy)`; singular at the poles
    /// `(0, ±R)`.
    pub fn exact_stress(&self, p: Point<2>) -> Result<[f64; 3]> {
        let (x, y) = (p[0], p[1]);
        let r = self.radius;
        let r1_sq = x * x + (r - y) * (r - y);
        let r2_sq = x * x + (r + y) * (r + y);
        if r1_sq == 0.0 || r2_sq == 0.0 {
            return Err(Error::SingularPoint(format!(
                "stress evaluation at a pole: ({x}, {y})"
            )));
        }
        let k = 2.0 * self.force / PI;
        let sxx = -k * (x * x * (r - y) / (r1_sq * r1_sq) + x * x * (r + y) / (r2_sq * r2_sq)
            - 1.0 / (2.0 * r));
        let syy = -k * ((r - y).powi(3) / (r1_sq * r1_sq) + (r + y).powi(3) / (r2_sq * r2_sq)
            - 1.0 / (2.0 * r));
        let sxy = k * (x * (r - y) * (r - y) / (r1_sq * r1_sq)
            - x * (r + y) * (r + y) / (r2_sq * r2_sq));
        Ok([sxx, syy, sxy])
    }

    /// Exact tractions on the arc, symmetry on both straight edges.
    pub fn boundary_conditions(&self) -> Vec<BoundaryCondition<2>> {
        let case = self.clone();
        vec![
            BoundaryCondition::traction("arc", move |p: Point<2>| {
                let s = case.exact_stress(p).expect("arc avoids the poles");
                let r = crate::point::norm(p);
                let n = [p[0] / r, p[1] / r];
                [
                    s[0] * n[0] + s[2] * n[1],
                    s[2] * n[0] + s[1] * n[1],
                ]
            }),
            BoundaryCondition::symmetry("bottom"),
            BoundaryCondition::symmetry("left"),
        ]
    }

    pub fn exact_field(&self, nodes: &NodeSet<2>) -> Result<StressField> {
        let rows = nodes
            .positions()
            .iter()
            .map(|&p| self.exact_stress(p).map(|s| s.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(StressField::from_rows(rows))
    }

    /// Paper defaults: ε = 1e-7, η = 1e-9, α = 5, β = 1.5, δrᵘ = δr⁽⁰⁾,
    /// Shepard over 7 neighbours; two adaptive iterations as published.
    pub fn default_adapt_params(&self) -> AdaptParams<2> {
        AdaptParams {
            thresholds: Thresholds::new(1e-7, 1e-9, 5.0, 1.5).expect("static"),
            dr_upper: RadiusField::constant(self.dr0),
            max_iterations: 2,
            shepard_neighbors: 7,
            node_budget: None,
            termination: Reduction::Mean,
        }
    }

    pub fn initial_spacing(&self) -> RadiusField<2> {
        RadiusField::constant(self.dr0)
    }
}

impl AdaptiveCase<2> for DiskCase {
    type State = PdeState<2>;

    fn discretize(&self, dr: &RadiusField<2>, iteration: usize) -> Result<NodeSet<2>> {
        discretize_2d(&self.domain(), dr, &self.solver, iteration)
    }

    fn solve(&self, nodes: &NodeSet<2>) -> Result<Self::State> {
        solve_elasticity(nodes, &self.material, &self.boundary_conditions(), &self.solver)
    }

    fn indicator(&self, _state: &Self::State, nodes: &NodeSet<2>) -> Result<IndicatorField> {
        // Analytic indicator: energy kernel of the exact stresses times the
        // volume element.
        let exact = self.exact_field(nodes)?;
        Ok(indicator_energy(&exact, &self.material, nodes.spacings(), 2))
    }

    fn error_report(&self, state: &Self::State, nodes: &NodeSet<2>) -> Option<ErrorReport> {
        let exact = self.exact_field(nodes).ok()?;
        let weights: Vec<f64> = nodes.spacings().iter().map(|dr| dr * dr).collect();
        Some(ErrorReport {
            e_inf: err_inf(&exact, &state.state.stresses).ok(),
            e_1: err_1(&exact, &state.state.stresses).ok(),
            e_energy: err_energy(&exact, &state.state.stresses, &self.material, &weights).ok(),
            e_inf_u: None,
            e_1_u: None,
            points: nodes.len(),
        })
    }
}
