//! Continuous target-spacing functions and Modified Shepard reconstruction.

use std::fmt;
use std::sync::Arc;

use crate::point::Point;
use crate::spatial::NeighborIndex;

/// Continuous target-spacing function `δr(p)`.
///
/// Initial densities are constants or analytic functions; after an adaptive
/// step the field is backed by discrete per-node radii interpolated with
/// Modified Shepard's method.
pub enum RadiusField<const D: usize> {
    Constant(f64),
    Analytic(Arc<dyn Fn(Point<D>) -> f64 + Send + Sync>),
    Shepard(ShepardField<D>),
}

impl<const D: usize> RadiusField<D> {
    pub fn constant(value: f64) -> Self {
        RadiusField::Constant(value)
    }

    pub fn analytic(f: impl Fn(Point<D>) -> f64 + Send + Sync + 'static) -> Self {
        RadiusField::Analytic(Arc::new(f))
    }

    pub fn eval(&self, p: Point<D>) -> f64 {
        match self {
            RadiusField::Constant(v) => *v,
            RadiusField::Analytic(f) => f(p),
            RadiusField::Shepard(s) => s.eval(p),
        }
    }
}

impl<const D: usize> Clone for RadiusField<D> {
    fn clone(&self) -> Self {
        match self {
            RadiusField::Constant(v) => RadiusField::Constant(*v),
            RadiusField::Analytic(f) => RadiusField::Analytic(f.clone()),
            RadiusField::Shepard(s) => RadiusField::Shepard(s.clone()),
        }
    }
}

impl<const D: usize> fmt::Debug for RadiusField<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiusField::Constant(v) => write!(f, "RadiusField::Constant({v})"),
            RadiusField::Analytic(_) => write!(f, "RadiusField::Analytic(..)"),
            RadiusField::Shepard(s) => write!(
                f,
                "RadiusField::Shepard({} samples, n={})",
                s.points.len(),
                s.neighbors
            ),
        }
    }
}

/// Scattered-data interpolant over the `n` nearest samples with inverse
/// distance weights `w_i = ((1 - d_i/d_n) / d_i)^2`; exact at sample points.
#[derive(Debug, Clone)]
pub struct ShepardField<const D: usize> {
    points: Vec<Point<D>>,
    values: Vec<f64>,
    neighbors: usize,
    index: NeighborIndex<D>,
}

impl<const D: usize> ShepardField<D> {
    pub fn eval(&self, p: Point<D>) -> f64 {
        let hits = self.index.knn(p, self.neighbors);
        debug_assert!(!hits.is_empty());
        if hits[0].1 == 0.0 {
            return self.values[hits[0].0];
        }
        let d_far = hits.last().unwrap().1;
        let mut num = 0.0;
        let mut den = 0.0;
        for &(id, d) in &hits {
            let w = ((1.0 - d / d_far) / d).powi(2);
            num += w * self.values[id];
            den += w;
        }
        if den == 0.0 {
            // All neighbours equidistant (the farthest-weight factor vanishes
            // for every sample): fall back to their plain mean.
            return hits.iter().map(|&(id, _)| self.values[id]).sum::<f64>() / hits.len() as f64;
        }
        num / den
    }

    pub fn samples(&self) -> (&[Point<D>], &[f64]) {
        (&self.points, &self.values)
    }
}

/// Builds the Modified Shepard interpolant of `radii` sampled at `points`.
///
/// `n` is the number of nearest samples combined per evaluation (clamped to
/// the sample count).
pub fn shepard_reconstruct<const D: usize>(
    points: &[Point<D>],
    radii: &[f64],
    n: usize,
) -> RadiusField<D> {
    assert_eq!(points.len(), radii.len());
    assert!(!points.is_empty(), "shepard_reconstruct needs samples");
    assert!(n >= 2, "shepard_reconstruct needs n >= 2");
    let index = NeighborIndex::build(points);
    RadiusField::Shepard(ShepardField {
        points: points.to_vec(),
        values: radii.to_vec(),
        neighbors: n.min(points.len()),
        index,
    })
}
