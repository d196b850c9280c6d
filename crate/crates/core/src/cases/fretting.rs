//! Fretting fatigue contact tractions.
//!
//! A thin rectangular specimen is stretched axially and pressed by two
//! oscillating cylindrical pads; partial-slip Hertzian theory predicts the
//! normal and tangential surface tractions, with a stick zone of half-width
//! `c` offset by the eccentricity `e`. No closed-form field solution exists;
//! the case exercises the adaptive machinery with the variability indicator.

use std::f64::consts::PI;

use crate::adaptivity::{
    indicator_std, AdaptParams, AdaptiveCase, IndicatorField, RadiusField, Reduction, Thresholds,
};
use crate::elasticity::{BoundaryCondition, Material, PlaneMode};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::metrics::ErrorReport;
use crate::nodegen::NodeSet;
use crate::point::Point;

use super::{discretize_2d, solve_elasticity, PdeState, SolveConfig};

/// Fretting fatigue benchmark (plane strain, symmetric half specimen).
#[derive(Debug, Clone)]
pub struct FrettingCase {
    /// Specimen length `L` (m), domain `[-L/2, L/2]`.
    pub length: f64,
    /// Specimen width `W` (m), domain `[-W/2, 0]`.
    pub width: f64,
    /// Specimen thickness `t` (m).
    pub thickness: f64,
    /// Pad radius `R` (m).
    pub pad_radius: f64,
    /// Normal force `F` (N).
    pub normal_force: f64,
    /// Tangential force `Q` (N).
    pub tangential_force: f64,
    /// Axial traction `σ_ax` (Pa).
    pub axial_stress: f64,
    /// Friction coefficient `μ`.
    pub friction: f64,
    pub young: [f64; 2],
    pub poisson: [f64; 2],
    pub material: Material,
    pub solver: SolveConfig,
    pub dr0: f64,
}

impl FrettingCase {
    /// The published setup: aluminium specimen and pad, `L = 40 mm`,
    /// `W = 10 mm`, `t = 4 mm`, `R = 10 mm`, `F = 543 N`, `Q = 155 N`,
    /// `σ_ax = 100 MPa`, `μ = 0.3`.
    pub fn paper(seed: u64) -> Result<Self> {
        let young = 72.1e9;
        let nu = 0.33;
        Self::new(
            [0.04, 0.01, 0.004],
            0.01,
            [543.0, 155.0],
            100.0e6,
            0.3,
            young,
            nu,
            seed,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dims_lwt: [f64; 3],
        pad_radius: f64,
        forces_fq: [f64; 2],
        axial_stress: f64,
        friction: f64,
        young: f64,
        poisson: f64,
        seed: u64,
    ) -> Result<Self> {
        let case = Self {
            length: dims_lwt[0],
            width: dims_lwt[1],
            thickness: dims_lwt[2],
            pad_radius,
            normal_force: forces_fq[0],
            tangential_force: forces_fq[1],
            axial_stress,
            friction,
            young: [young, young],
            poisson: [poisson, poisson],
            material: Material::new(young, poisson, PlaneMode::PlaneStrain)?,
            solver: {
                // Compact stencils for the same reason as the Hertz case:
                // the initial grid undersamples the contact tractions.
                let mut s = SolveConfig::standard_2d(seed);
                s.stencil_n = 9;
                s.stencil_m = 9;
                s
            },
            dr0: 0.5e-3,
        };
        case.validate()?;
        Ok(case)
    }

    /// Validity conditions of the partial-slip traction formulas.
    fn validate(&self) -> Result<()> {
        let (q, mu, f) = (self.tangential_force, self.friction, self.normal_force);
        if !(q <= mu * f) {
            return Err(Error::CaseConstraint(format!(
                "partial slip requires Q <= μF, got Q = {q}, μF = {}",
                mu * f
            )));
        }
        let limit = 4.0 * mu * self.peak_pressure() * (1.0 - (1.0 - q / (mu * f)).sqrt());
        if !(self.axial_stress <= limit) {
            return Err(Error::CaseConstraint(format!(
                "axial stress must satisfy σ_ax <= 4 μ p₀ (1 - sqrt(1 - Q/(μF))), got {} > {limit}",
                self.axial_stress
            )));
        }
        Ok(())
    }

    pub fn e_star(&self) -> f64 {
        1.0 / ((1.0 - self.poisson[0] * self.poisson[0]) / self.young[0]
            + (1.0 - self.poisson[1] * self.poisson[1]) / self.young[1])
    }

    /// `a = 2 sqrt(FR / (t π E*))`.
    pub fn contact_half_width(&self) -> f64 {
        2.0 * (self.normal_force * self.pad_radius / (self.thickness * PI * self.e_star())).sqrt()
    }

    /// `p₀ = sqrt(F E* / (t π R))`.
    pub fn peak_pressure(&self) -> f64 {
        (self.normal_force * self.e_star() / (self.thickness * PI * self.pad_radius)).sqrt()
    }

    /// Stick-zone half width `c = a sqrt(1 - Q/(μF))`.
    pub fn stick_half_width(&self) -> f64 {
        self.contact_half_width()
            * (1.0 - self.tangential_force / (self.friction * self.normal_force)).sqrt()
    }

    /// Eccentricity `e = sgn(Q) a σ_ax / (4 μ p₀)`.
    pub fn eccentricity(&self) -> f64 {
        self.tangential_force.signum() * self.contact_half_width() * self.axial_stress
            / (4.0 * self.friction * self.peak_pressure())
    }

    /// Normal and tangential tractions `(p, q)` at surface coordinate `x`.
    pub fn tractions(&self, x: f64) -> (f64, f64) {
        let a = self.contact_half_width();
        if x.abs() > a {
            return (0.0, 0.0);
        }
        let p0 = self.peak_pressure();
        let p = p0 * (1.0 - (x / a).powi(2)).max(0.0).sqrt();
        let c = self.stick_half_width();
        let e = self.eccentricity();
        let mu = self.friction;
        let q = if (x - e).abs() < c {
            -mu * p0
                * ((1.0 - (x / a).powi(2)).max(0.0).sqrt()
                    - c / a * (1.0 - ((x - e) / c).powi(2)).max(0.0).sqrt())
        } else {
            -mu * p0 * (1.0 - (x / a).powi(2)).max(0.0).sqrt()
        };
        (p, q)
    }

    pub fn domain(&self) -> Domain<2> {
        Domain::rectangle([-self.length / 2.0, -self.width / 2.0], [self.length / 2.0, 0.0])
            .expect("positive extents")
    }

    /// Contact tractions on top, clamped left end, axial traction on the
    /// right end, symmetry along the specimen midplane.
    pub fn boundary_conditions(&self) -> Vec<BoundaryCondition<2>> {
        let case = self.clone();
        let sig_ax = self.axial_stress;
        vec![
            BoundaryCondition::traction("top", move |p: Point<2>| {
                let (pn, qt) = case.tractions(p[0]);
                [qt, -pn]
            }),
            BoundaryCondition::displacement("left", |_| [0.0, 0.0]),
            BoundaryCondition::traction("right", move |_| [sig_ax, 0.0]),
            BoundaryCondition::symmetry("bottom"),
        ]
    }

    /// ε = 0.1 MPa and α = 10 as published; η and β mirror the Hertz setup.
    pub fn default_adapt_params(&self) -> AdaptParams<2> {
        AdaptParams {
            thresholds: Thresholds::new(1e5, 1e4, 10.0, 1.5).expect("static"),
            dr_upper: RadiusField::constant(self.dr0),
            max_iterations: 4,
            shepard_neighbors: 7,
            node_budget: None,
            termination: Reduction::Max,
        }
    }

    pub fn initial_spacing(&self) -> RadiusField<2> {
        RadiusField::constant(self.dr0)
    }
}

impl AdaptiveCase<2> for FrettingCase {
    type State = PdeState<2>;

    fn discretize(&self, dr: &RadiusField<2>, iteration: usize) -> Result<NodeSet<2>> {
        discretize_2d(&self.domain(), dr, &self.solver, iteration)
    }

    fn solve(&self, nodes: &NodeSet<2>) -> Result<Self::State> {
        solve_elasticity(nodes, &self.material, &self.boundary_conditions(), &self.solver)
    }

    fn indicator(&self, state: &Self::State, _nodes: &NodeSet<2>) -> Result<IndicatorField> {
        indicator_std(&state.state.stresses, &state.stencils)
    }

    fn error_report(&self, _state: &Self::State, _nodes: &NodeSet<2>) -> Option<ErrorReport> {
        None
    }
}
