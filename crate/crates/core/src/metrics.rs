//! Error norms against exact solutions and distribution diagnostics.
//!
//! All norms are relative and evaluated over a discrete point set (the
//! computation nodes by default). The energy norm integrates the compliance
//! kernel with per-point volume weights.

use crate::elasticity::{Material, StressField};
use crate::error::{Error, Result};
use crate::nodegen::NodeSet;

/// Relative error norms of one solve; fields are present when the case has
/// the matching exact solution.
#[derive(Debug, Clone, Default)]
pub struct ErrorReport {
    pub e_inf: Option<f64>,
    pub e_1: Option<f64>,
    pub e_energy: Option<f64>,
    pub e_inf_u: Option<f64>,
    pub e_1_u: Option<f64>,
    /// Evaluation-point count.
    pub points: usize,
}

fn check_shapes(exact: &StressField, computed: &StressField) -> Result<()> {
    if exact.node_count() != computed.node_count()
        || exact.component_count() != computed.component_count()
    {
        return Err(Error::InvalidParameter(
            "error norms need fields over the same point set".into(),
        ));
    }
    Ok(())
}

/// Relative max norm over points and components.
pub fn err_inf(exact: &StressField, computed: &StressField) -> Result<f64> {
    check_shapes(exact, computed)?;
    err_inf_values(exact.data(), computed.data())
}

/// Relative mean-absolute norm over points and components.
pub fn err_1(exact: &StressField, computed: &StressField) -> Result<f64> {
    check_shapes(exact, computed)?;
    err_1_values(exact.data(), computed.data())
}

/// `max |σ̂ - σ| / max |σ|` over flat component data.
pub fn err_inf_values(exact: &[f64], computed: &[f64]) -> Result<f64> {
    assert_eq!(exact.len(), computed.len());
    let denom = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num = exact
        .iter()
        .zip(computed)
        .fold(0.0f64, |m, (e, c)| m.max((c - e).abs()));
    Ok(num / denom)
}

/// `Σ |σ̂ - σ| / Σ |σ|` over flat component data.
pub fn err_1_values(exact: &[f64], computed: &[f64]) -> Result<f64> {
    assert_eq!(exact.len(), computed.len());
    let denom: f64 = exact.iter().map(|v| v.abs()).sum();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    let num: f64 = exact.iter().zip(computed).map(|(e, c)| (c - e).abs()).sum();
    Ok(num / denom)
}

/// Relative energy norm: the compliance kernel of the stress error integrated
/// with per-point volume weights, over the same integral of the exact field.
pub fn err_energy(
    exact: &StressField,
    computed: &StressField,
    mat: &Material,
    weights: &[f64],
) -> Result<f64> {
    check_shapes(exact, computed)?;
    assert_eq!(weights.len(), exact.node_count());
    let mut num = 0.0;
    let mut den = 0.0;
    let comps = exact.component_count();
    let mut diff = vec![0.0; comps];
    for i in 0..exact.node_count() {
        let e = exact.row(i);
        let c = computed.row(i);
        for k in 0..comps {
            diff[k] = c[k] - e[k];
        }
        num += weights[i] * mat.compliance_energy(&diff);
        den += weights[i] * mat.compliance_energy(e);
    }
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((num / den).sqrt())
}

/// Relative nodal density `ρ_i = -log10(δr_i / max_j δr_j)`.
pub fn relative_density<const D: usize>(nodes: &NodeSet<D>) -> Vec<f64> {
    let max = nodes
        .spacings()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    nodes
        .spacings()
        .iter()
        .map(|&dr| -(dr / max).log10())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elasticity::PlaneMode;

    fn field(rows: &[[f64; 3]]) -> StressField {
        StressField::from_rows(rows.iter().map(|r| r.to_vec()).collect())
    }

    fn mat() -> Material {
        Material::new(1.0, 0.33, PlaneMode::PlaneStress).unwrap()
    }

    #[test]
    fn identical_fields_have_zero_error() {
        let f = field(&[[1.0, -2.0, 0.5], [0.3, 0.1, -0.2]]);
        assert_eq!(err_inf(&f, &f).unwrap(), 0.0);
        assert_eq!(err_1(&f, &f).unwrap(), 0.0);
        assert_eq!(err_energy(&f, &f, &mat(), &[1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn uniform_scaling_gives_relative_error() {
        let exact = field(&[[1.0, -2.0, 0.5], [0.3, 0.1, -0.2]]);
        let scaled = StressField::from_rows(
            (0..2)
                .map(|i| exact.row(i).iter().map(|v| 1.1 * v).collect())
                .collect(),
        );
        assert!((err_inf(&exact, &scaled).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn single_component_discrepancy() {
        let exact = field(&[[2.0, 0.0, 0.0], [0.0, -4.0, 0.0]]);
        let mut rows: Vec<Vec<f64>> = (0..2).map(|i| exact.row(i).to_vec()).collect();
        rows[0][2] += 0.6;
        let computed = StressField::from_rows(rows);
        // max |σ| = 4, discrepancy 0.6.
        assert!((err_inf(&exact, &computed).unwrap() - 0.15).abs() < 1e-12);
    }

    /// Hand expansion of the L¹ norm: constant offset c on one component over
    /// n points gives c·n / Σ|σ|.
    #[test]
    fn l1_constant_offset() {
        let exact = field(&[[1.0, 2.0, 0.0], [3.0, 1.0, 1.0], [0.5, 0.5, 1.0]]);
        let c = 0.25;
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let mut r = exact.row(i).to_vec();
                r[0] += c;
                r
            })
            .collect();
        let computed = StressField::from_rows(rows);
        let sum_abs: f64 = exact.data().iter().map(|v| v.abs()).sum();
        let expected = c * 3.0 / sum_abs;
        assert!((err_1(&exact, &computed).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn norms_are_scale_invariant() {
        let exact = field(&[[1.0, -1.0, 0.5], [2.0, 0.3, -0.4]]);
        let computed = field(&[[1.1, -0.8, 0.55], [1.9, 0.35, -0.42]]);
        let k = 7.3;
        let scale = |f: &StressField| {
            StressField::from_rows(
                (0..f.node_count())
                    .map(|i| f.row(i).iter().map(|v| k * v).collect())
                    .collect(),
            )
        };
        let m = mat();
        let w = [1.0, 1.0];
        assert!(
            (err_1(&exact, &computed).unwrap()
                - err_1(&scale(&exact), &scale(&computed)).unwrap())
            .abs()
                < 1e-12
        );
        assert!(
            (err_energy(&exact, &computed, &m, &w).unwrap()
                - err_energy(&scale(&exact), &scale(&computed), &m, &w).unwrap())
            .abs()
                < 1e-12
        );
    }

    /// Hand contraction: uniaxial σxx = s over unit weight has energy s²/E.
    #[test]
    fn energy_norm_uniaxial() {
        let m = mat();
        let s = 1.3;
        let exact = field(&[[s, 0.0, 0.0]]);
        let zero = field(&[[0.0, 0.0, 0.0]]);
        // err_energy(exact, 0) = sqrt((s²/E)/(s²/E)) = 1.
        assert!((err_energy(&exact, &zero, &m, &[1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((m.compliance_energy(&[s, 0.0, 0.0]) - s * s / m.young).abs() < 1e-12);
    }

    #[test]
    fn zero_reference_is_an_error() {
        let zero = field(&[[0.0, 0.0, 0.0]]);
        assert!(matches!(err_inf(&zero, &zero), Err(Error::ZeroReference)));
    }

    #[test]
    fn relative_density_examples() {
        let nodes = NodeSet::<2>::from_parts(
            &[],
            vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.01, 0.0]],
        );
        let rho = relative_density(&nodes);
        // Spacings: 1, 1, 0.01, 0.01 -> max 1.
        assert_eq!(rho[0], 0.0);
        assert!((rho[2] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_spacing_density_is_zero() {
        let nodes = NodeSet::<2>::from_parts(
            &[],
            (0..5).map(|i| [i as f64, 0.0]).collect(),
        );
        for r in relative_density(&nodes) {
            assert!(r.abs() < 1e-12);
        }
    }
}
