//! CSV export of node sets, elastic states, indicator fields, and
//! per-iteration reports.
//!
//! Floating-point values are written in scientific notation with 17
//! significant digits so artifacts round-trip bit exactly.

use std::io::Write;

use crate::adaptivity::{IndicatorField, IterationRecord};
use crate::elasticity::ElasticState;
use crate::error::Result;
use crate::nodegen::{NodeKind, NodeSet};

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// `x,y[,z],kind,nx,ny[,nz],dr`
pub fn write_nodes_csv<const D: usize, W: Write>(out: &mut W, nodes: &NodeSet<D>) -> Result<()> {
    let coords = ["x", "y", "z"];
    let norms = ["nx", "ny", "nz"];
    let mut header: Vec<&str> = coords[..D].to_vec();
    header.push("kind");
    header.extend_from_slice(&norms[..D]);
    header.push("dr");
    writeln!(out, "{}", header.join(","))?;
    for i in 0..nodes.len() {
        let p = nodes.position(i);
        let n = nodes.normal(i);
        let mut row: Vec<String> = p.iter().map(|&v| fmt(v)).collect();
        row.push(
            match nodes.kind(i) {
                NodeKind::Interior => "interior",
                NodeKind::Boundary => "boundary",
            }
            .to_string(),
        );
        row.extend(n.iter().map(|&v| fmt(v)));
        row.push(fmt(nodes.spacing(i)));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// `x,y[,z],ux,uy[,uz],sxx,syy[,szz],sxy[,sxz,syz],vm`
pub fn write_state_csv<const D: usize, W: Write>(
    out: &mut W,
    nodes: &NodeSet<D>,
    state: &ElasticState<D>,
) -> Result<()> {
    let header = match D {
        2 => "x,y,ux,uy,sxx,syy,sxy,vm",
        3 => "x,y,z,ux,uy,uz,sxx,syy,szz,sxy,sxz,syz,vm",
        _ => panic!("unsupported dimension {D}"),
    };
    writeln!(out, "{header}")?;
    for i in 0..nodes.len() {
        let mut row: Vec<String> = nodes.position(i).iter().map(|&v| fmt(v)).collect();
        row.extend(state.displacements[i].iter().map(|&v| fmt(v)));
        row.extend(state.stresses.row(i).iter().map(|&v| fmt(v)));
        row.push(fmt(state.von_mises[i]));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// `x,y[,z],e_hat`
pub fn write_indicator_csv<const D: usize, W: Write>(
    out: &mut W,
    nodes: &NodeSet<D>,
    indicator: &IndicatorField,
) -> Result<()> {
    let coords = ["x", "y", "z"];
    writeln!(out, "{},e_hat", coords[..D].join(","))?;
    for i in 0..nodes.len() {
        let mut row: Vec<String> = nodes.position(i).iter().map(|&v| fmt(v)).collect();
        row.push(fmt(indicator.values()[i]));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// `iter,nodes,refined,no_change,derefined,hit_bound,mean_indicator,max_indicator,...`
/// with the error-norm columns filled when the case has an exact solution.
pub fn write_report_csv<W: Write>(out: &mut W, records: &[IterationRecord]) -> Result<()> {
    writeln!(
        out,
        "iter,nodes,refined,no_change,derefined,hit_bound,mean_indicator,max_indicator,e_inf,e_1,e_energy,e_inf_u,e_1_u"
    )?;
    for r in records {
        let cat = |f: fn(&crate::adaptivity::CategoryCounts) -> usize| {
            r.categories.map(|c| f(&c).to_string()).unwrap_or_default()
        };
        let err = |f: fn(&crate::metrics::ErrorReport) -> Option<f64>| {
            r.errors
                .as_ref()
                .and_then(f)
                .map(fmt)
                .unwrap_or_default()
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.iteration,
            r.nodes,
            cat(|c| c.refined),
            cat(|c| c.no_change),
            cat(|c| c.derefined),
            cat(|c| c.hit_bound),
            fmt(r.mean_indicator),
            fmt(r.max_indicator),
            err(|e| e.e_inf),
            err(|e| e.e_1),
            err(|e| e.e_energy),
            err(|e| e.e_inf_u),
            err(|e| e.e_1_u),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptivity::CategoryCounts;

    #[test]
    fn nodes_csv_has_header_and_rows() {
        let nodes = NodeSet::<2>::from_parts(&[], vec![[0.0, 0.0], [1.0, 0.5]]);
        let mut buf = Vec::new();
        write_nodes_csv(&mut buf, &nodes).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,kind,nx,ny,dr");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].contains("interior"));
    }

    #[test]
    fn report_csv_blank_categories_on_final_row() {
        let records = vec![
            IterationRecord {
                iteration: 0,
                nodes: 41,
                categories: Some(CategoryCounts {
                    refined: 18,
                    no_change: 4,
                    derefined: 11,
                    hit_bound: 8,
                }),
                mean_indicator: 0.5,
                max_indicator: 1.0,
                errors: None,
            },
            IterationRecord {
                iteration: 1,
                nodes: 50,
                categories: None,
                mean_indicator: 0.1,
                max_indicator: 0.2,
                errors: None,
            },
        ];
        let mut buf = Vec::new();
        write_report_csv(&mut buf, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[1].starts_with("0,41,18,4,11,8,"));
        assert!(lines[2].starts_with("1,50,,,,,"));
    }

    #[test]
    fn floats_round_trip() {
        let v = 0.1234567890123456789;
        let s = fmt(v);
        let back: f64 = s.parse().unwrap();
        assert_eq!(v, back);
    }
}
