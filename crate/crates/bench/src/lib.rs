//! Shared fixtures for the pipeline benchmarks.

use mfree_core::{Domain, FillParams, NodeSet, RadiusField};

/// Unit square filled at the given spacing, boundary included.
pub fn square_nodes(dr: f64, seed: u64) -> NodeSet<2> {
    let domain = Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
    let field = RadiusField::constant(dr);
    let params = FillParams::standard(2, seed);
    let boundary = domain.discretize_boundary(&field, params.zeta).unwrap();
    mfree_core::fill(&domain, &field, &params, &boundary).unwrap()
}
