//! Meshless adaptive PDE toolkit built on RBF-FD collocation.
//!
//! The crate covers the whole adaptive pipeline: variable-density node
//! generation over analytic domains, Gaussian RBF-FD differentiation weights,
//! Cauchy-Navier linear elasticity with displacement/traction/symmetry
//! boundary conditions, a-posteriori indicator driven h-refinement with
//! Modified Shepard density reconstruction, and closed-form benchmark cases
//! (compressed disk, Hertzian contact, fretting fatigue tractions, 3-D
//! Boussinesq half-space) plus a 1-D moving-least-squares adaptivity demo.

pub mod adaptivity;
pub mod cases;
pub mod elasticity;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod nodegen;
pub mod point;
pub mod rbffd;
pub mod spatial;

pub use adaptivity::{
    adaptive_solve, density_factor, indicator_energy, indicator_std, shepard_reconstruct,
    update_radii, AdaptParams, AdaptiveCase, AdaptiveRun, CategoryCounts, IndicatorField,
    IterationRecord, Outcome, RadiusCategory, RadiusField, Reduction, Thresholds,
};
pub use elasticity::{
    assemble, solve, solve_with, stresses, BcKind, BoundaryCondition, ElasticState, LinearSolver,
    Material, PlaneMode, SparseSystem, StressField,
};
pub use error::{Error, Result};
pub use geometry::{BoundaryPoint, Domain};
pub use metrics::{err_1, err_energy, err_inf, relative_density, ErrorReport};
pub use nodegen::{fill, quality_histogram, relax, FillParams, NodeKind, NodeSet, RelaxParams};
pub use point::Point;
pub use rbffd::{
    build_weight_store, compute_weights, gaussian_rbf, Augmentation, OperatorSpec, ShapeParam,
    StencilConfig, StencilTable, WeightStore,
};
pub use spatial::NeighborIndex;
