//! Computational domains, point membership, and boundary discretization.
//!
//! Supported shapes are the ones the benchmark cases need: 2-D quarter disks
//! and rectangles, and 3-D axis-aligned boxes. Boundary nodes are placed by
//! arc-length marching along each analytic segment (faces of 3-D boxes are
//! filled with the same expansion sampler the interior fill uses), every node
//! carrying the outward unit normal and the label of its segment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adaptivity::RadiusField;
use crate::error::{Error, Result};
use crate::nodegen::sampler;
use crate::point::{dist, norm, Point};

/// A node on the domain boundary.
#[derive(Debug, Clone)]
pub struct BoundaryPoint<const D: usize> {
    pub position: Point<D>,
    /// Outward unit normal of the segment owning this node.
    pub normal: Point<D>,
    pub segment: String,
}

#[derive(Debug, Clone)]
enum Shape<const D: usize> {
    /// Axis-aligned box `[lo, hi]` (a rectangle when `D == 2`).
    AxisBox { lo: Point<D>, hi: Point<D> },
    /// Quarter disk `x >= 0, y >= 0, |p| <= radius`; 2-D only.
    QuarterDisk { radius: f64 },
}

/// A bounded computational region.
#[derive(Debug, Clone)]
pub struct Domain<const D: usize> {
    shape: Shape<D>,
}

impl<const D: usize> Domain<D> {
    /// Axis-aligned box (rectangle in 2-D) with strictly positive extents.
    pub fn axis_box(lo: Point<D>, hi: Point<D>) -> Result<Self> {
        for a in 0..D {
            if !(hi[a] - lo[a] > 0.0) || !lo[a].is_finite() || !hi[a].is_finite() {
                return Err(Error::InvalidDomain(format!(
                    "box extent along axis {a} must be strictly positive (lo {:?}, hi {:?})",
                    lo, hi
                )));
            }
        }
        Ok(Self {
            shape: Shape::AxisBox { lo, hi },
        })
    }

    /// True iff `p` lies in the closed region.
    pub fn contains(&self, p: Point<D>) -> bool {
        match &self.shape {
            Shape::AxisBox { lo, hi } => (0..D).all(|a| p[a] >= lo[a] && p[a] <= hi[a]),
            Shape::QuarterDisk { radius } => {
                p[0] >= 0.0 && p[1] >= 0.0 && norm(p) <= *radius
            }
        }
    }

    /// Labels of the boundary segments this domain declares.
    pub fn segment_labels(&self) -> Vec<&'static str> {
        match &self.shape {
            Shape::AxisBox { .. } => match D {
                1 => vec!["left", "right"],
                2 => vec!["bottom", "right", "top", "left"],
                3 => vec!["xmin", "xmax", "ymin", "ymax", "zmin", "zmax"],
                _ => unreachable!("unsupported dimension"),
            },
            Shape::QuarterDisk { .. } => vec!["bottom", "arc", "left"],
        }
    }

    /// A deterministic interior point, used to seed the fill when no boundary
    /// nodes are supplied.
    pub fn interior_seed(&self) -> Point<D> {
        match &self.shape {
            Shape::AxisBox { lo, hi } => std::array::from_fn(|a| 0.5 * (lo[a] + hi[a])),
            Shape::QuarterDisk { radius } => {
                let c = 0.5 * std::f64::consts::FRAC_1_SQRT_2 * radius;
                let mut p = [0.0; D];
                p[0] = c;
                p[1] = c;
                p
            }
        }
    }

    pub fn bounding_box(&self) -> (Point<D>, Point<D>) {
        match &self.shape {
            Shape::AxisBox { lo, hi } => (*lo, *hi),
            Shape::QuarterDisk { radius } => {
                let mut lo = [0.0; D];
                let mut hi = [0.0; D];
                for a in 0..D.min(2) {
                    lo[a] = 0.0;
                    hi[a] = *radius;
                }
                (lo, hi)
            }
        }
    }
}

impl Domain<2> {
    /// Quarter disk of the given radius (the disk case's `R - γ`).
    pub fn quarter_disk(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "quarter-disk radius must be strictly positive, got {radius}"
            )));
        }
        Ok(Self {
            shape: Shape::QuarterDisk { radius },
        })
    }

    pub fn rectangle(lo: Point<2>, hi: Point<2>) -> Result<Self> {
        Self::axis_box(lo, hi)
    }

    /// Boundary nodes spaced to the local target spacing.
    ///
    /// Corners are emitted exactly once, owned by the lexicographically first
    /// incident segment; marched nodes too close to already emitted ones
    /// (within `zeta * min(dr at either)`) are dropped.
    pub fn discretize_boundary(
        &self,
        dr: &RadiusField<2>,
        zeta: f64,
    ) -> Result<Vec<BoundaryPoint<2>>> {
        let segments = self.segments_2d();
        let mut out: Vec<BoundaryPoint<2>> = Vec::new();

        for corner in corner_points(&segments) {
            out.push(corner);
        }
        let n_corners = out.len();

        for seg in &segments {
            let steps = march_arclength(seg.length, &|s| dr_checked(dr, seg.point_at(s)))?;
            for s in steps {
                let p = seg.point_at(s);
                let dr_p = dr_checked(dr, p)?;
                if proximity_ok(&out, p, dr_p, dr, zeta)? {
                    out.push(BoundaryPoint {
                        position: p,
                        normal: seg.normal_at(s),
                        segment: seg.label.to_string(),
                    });
                }
            }
        }
        debug_assert!(out.len() >= n_corners);
        Ok(out)
    }

    fn segments_2d(&self) -> Vec<Segment2> {
        match &self.shape {
            Shape::AxisBox { lo, hi } => vec![
                Segment2::line("bottom", [lo[0], lo[1]], [hi[0], lo[1]], [0.0, -1.0]),
                Segment2::line("right", [hi[0], lo[1]], [hi[0], hi[1]], [1.0, 0.0]),
                Segment2::line("top", [hi[0], hi[1]], [lo[0], hi[1]], [0.0, 1.0]),
                Segment2::line("left", [lo[0], hi[1]], [lo[0], lo[1]], [-1.0, 0.0]),
            ],
            Shape::QuarterDisk { radius } => vec![
                Segment2::line("bottom", [0.0, 0.0], [*radius, 0.0], [0.0, -1.0]),
                Segment2::arc("arc", *radius),
                Segment2::line("left", [0.0, *radius], [0.0, 0.0], [-1.0, 0.0]),
            ],
        }
    }
}

impl Domain<3> {
    /// Boundary nodes of a 3-D box: corners, marched edges, filled faces.
    ///
    /// Edge and corner nodes are owned by the lexicographically first incident
    /// face and carry that face's normal. `seed` drives the face-fill
    /// expansions so the discretization is reproducible.
    pub fn discretize_boundary(
        &self,
        dr: &RadiusField<3>,
        zeta: f64,
        seed: u64,
    ) -> Result<Vec<BoundaryPoint<3>>> {
        let Shape::AxisBox { lo, hi } = &self.shape else {
            unreachable!("3-D domains are boxes");
        };
        let (lo, hi) = (*lo, *hi);
        let faces = box_faces(lo, hi);
        let mut out: Vec<BoundaryPoint<3>> = Vec::new();

        // Corners: owner face is the lexicographically first of the three.
        for ix in 0..2 {
            for iy in 0..2 {
                for iz in 0..2 {
                    let p = [
                        if ix == 0 { lo[0] } else { hi[0] },
                        if iy == 0 { lo[1] } else { hi[1] },
                        if iz == 0 { lo[2] } else { hi[2] },
                    ];
                    let owner = faces
                        .iter()
                        .filter(|f| f.contains_point(p))
                        .min_by_key(|f| f.label)
                        .unwrap();
                    out.push(BoundaryPoint {
                        position: p,
                        normal: owner.normal,
                        segment: owner.label.to_string(),
                    });
                }
            }
        }

        // Edges: vary one axis, pin the other two to a lo/hi combination.
        for axis in 0..3 {
            let (u, v) = other_axes(axis);
            for cu in 0..2 {
                for cv in 0..2 {
                    let mut start = lo;
                    start[u] = if cu == 0 { lo[u] } else { hi[u] };
                    start[v] = if cv == 0 { lo[v] } else { hi[v] };
                    start[axis] = lo[axis];
                    let mut end = start;
                    end[axis] = hi[axis];
                    let owner = faces
                        .iter()
                        .filter(|f| f.contains_point(start) && f.contains_point(end))
                        .min_by_key(|f| f.label)
                        .unwrap();
                    let length = hi[axis] - lo[axis];
                    let point_at = |s: f64| {
                        let mut p = start;
                        p[axis] = lo[axis] + s;
                        p
                    };
                    let steps = march_arclength(length, &|s| dr_checked(dr, point_at(s)))?;
                    for s in steps {
                        let p = point_at(s);
                        let dr_p = dr_checked(dr, p)?;
                        if proximity_ok(&out, p, dr_p, dr, zeta)? {
                            out.push(BoundaryPoint {
                                position: p,
                                normal: owner.normal,
                                segment: owner.label.to_string(),
                            });
                        }
                    }
                }
            }
        }

        // Faces: expansion fill in the face plane, seeded by the rim nodes.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for face in &faces {
            let rim: Vec<Point<2>> = out
                .iter()
                .filter(|b| face.contains_point(b.position))
                .map(|b| face.project(b.position))
                .collect();
            let lo2 = face.project_lo();
            let hi2 = face.project_hi();
            let contains = |q: Point<2>| {
                (0..2).all(|a| q[a] > lo2[a] && q[a] < hi2[a])
            };
            let dr2 = |q: Point<2>| dr.eval(face.embed(q));
            let added = sampler::expand(&rim, &rim, &contains, &dr2, zeta, 6, 2_000_000, &mut rng)?;
            for q in added {
                out.push(BoundaryPoint {
                    position: face.embed(q),
                    normal: face.normal,
                    segment: face.label.to_string(),
                });
            }
        }
        Ok(out)
    }
}

fn dr_checked<const D: usize>(dr: &RadiusField<D>, p: Point<D>) -> Result<f64> {
    let v = dr.eval(p);
    if !(v > 0.0) {
        return Err(Error::NonPositiveSpacing {
            location: p.to_vec(),
            value: v,
        });
    }
    Ok(v)
}

/// Accept a candidate only if it keeps `zeta * min(dr)` clearance to every
/// already emitted node. Boundary sets are small; a linear scan is fine.
fn proximity_ok<const D: usize>(
    accepted: &[BoundaryPoint<D>],
    p: Point<D>,
    dr_p: f64,
    dr: &RadiusField<D>,
    zeta: f64,
) -> Result<bool> {
    for b in accepted {
        let d = dist(b.position, p);
        if d < zeta * dr_p.min(dr_checked(dr, b.position)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Arc-length positions of marched nodes strictly inside `(0, length)`.
///
/// Steps solve `h = dr(s + h/2)` (spacing matched at the gap midpoint), so a
/// constant spacing marches uniformly and a smoothly varying one tracks the
/// continuum node-count integral.
pub(crate) fn march_arclength(length: f64, dr_at: &dyn Fn(f64) -> Result<f64>) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut s = 0.0;
    loop {
        let mut h = dr_at(s)?;
        for _ in 0..60 {
            let h_new = dr_at((s + 0.5 * h).min(length))?;
            if (h_new - h).abs() <= 1e-13 * h.abs() {
                h = h_new;
                break;
            }
            h = h_new;
        }
        s += h;
        if s >= length {
            return Ok(out);
        }
        out.push(s);
    }
}

struct Segment2 {
    label: &'static str,
    curve: Curve2,
    length: f64,
}

enum Curve2 {
    Line { a: Point<2>, b: Point<2>, normal: Point<2> },
    /// Quarter arc from angle 0 to pi/2, outward radial normal.
    Arc { radius: f64 },
}

impl Segment2 {
    fn line(label: &'static str, a: Point<2>, b: Point<2>, normal: Point<2>) -> Self {
        Self {
            label,
            length: dist(a, b),
            curve: Curve2::Line { a, b, normal },
        }
    }

    fn arc(label: &'static str, radius: f64) -> Self {
        Self {
            label,
            length: radius * std::f64::consts::FRAC_PI_2,
            curve: Curve2::Arc { radius },
        }
    }

    fn point_at(&self, s: f64) -> Point<2> {
        match &self.curve {
            Curve2::Line { a, b, .. } => {
                let t = s / self.length;
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
            }
            Curve2::Arc { radius } => {
                let theta = s / radius;
                [radius * theta.cos(), radius * theta.sin()]
            }
        }
    }

    fn normal_at(&self, s: f64) -> Point<2> {
        match &self.curve {
            Curve2::Line { normal, .. } => *normal,
            Curve2::Arc { radius } => {
                let theta = s / radius;
                [theta.cos(), theta.sin()]
            }
        }
    }

    fn start(&self) -> Point<2> {
        self.point_at(0.0)
    }

    fn end(&self) -> Point<2> {
        match &self.curve {
            Curve2::Line { b, .. } => *b,
            Curve2::Arc { radius } => [0.0, *radius],
        }
    }
}

fn corner_points(segments: &[Segment2]) -> Vec<BoundaryPoint<2>> {
    let mut corners: Vec<BoundaryPoint<2>> = Vec::new();
    let mut endpoints: Vec<(Point<2>, Vec<usize>)> = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        for p in [seg.start(), seg.end()] {
            match endpoints.iter_mut().find(|(q, _)| dist(*q, p) < 1e-14) {
                Some((_, owners)) => owners.push(i),
                None => endpoints.push((p, vec![i])),
            }
        }
    }
    for (p, owners) in endpoints {
        let owner = owners
            .iter()
            .copied()
            .min_by_key(|&i| segments[i].label)
            .unwrap();
        let seg = &segments[owner];
        let s = if dist(seg.start(), p) < 1e-14 {
            0.0
        } else {
            seg.length
        };
        corners.push(BoundaryPoint {
            position: p,
            normal: seg.normal_at(s),
            segment: seg.label.to_string(),
        });
    }
    corners
}

struct Face3 {
    label: &'static str,
    axis: usize,
    value: f64,
    normal: Point<3>,
    lo: Point<3>,
    hi: Point<3>,
}

impl Face3 {
    fn contains_point(&self, p: Point<3>) -> bool {
        p[self.axis] == self.value
    }

    fn project(&self, p: Point<3>) -> Point<2> {
        let (u, v) = other_axes(self.axis);
        [p[u], p[v]]
    }

    fn project_lo(&self) -> Point<2> {
        let (u, v) = other_axes(self.axis);
        [self.lo[u], self.lo[v]]
    }

    fn project_hi(&self) -> Point<2> {
        let (u, v) = other_axes(self.axis);
        [self.hi[u], self.hi[v]]
    }

    fn embed(&self, q: Point<2>) -> Point<3> {
        let (u, v) = other_axes(self.axis);
        let mut p = [0.0; 3];
        p[self.axis] = self.value;
        p[u] = q[0];
        p[v] = q[1];
        p
    }
}

fn other_axes(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn box_faces(lo: Point<3>, hi: Point<3>) -> Vec<Face3> {
    let labels = [
        ("xmin", "xmax"),
        ("ymin", "ymax"),
        ("zmin", "zmax"),
    ];
    let mut faces = Vec::with_capacity(6);
    for axis in 0..3 {
        let mut n_lo = [0.0; 3];
        n_lo[axis] = -1.0;
        let mut n_hi = [0.0; 3];
        n_hi[axis] = 1.0;
        faces.push(Face3 {
            label: labels[axis].0,
            axis,
            value: lo[axis],
            normal: n_lo,
            lo,
            hi,
        });
        faces.push(Face3 {
            label: labels[axis].1,
            axis,
            value: hi[axis],
            normal: n_hi,
            lo,
            hi,
        });
    }
    faces
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::norm;

    #[test]
    fn quarter_disk_membership() {
        let d = Domain::quarter_disk(0.3).unwrap();
        assert!(d.contains([0.1, 0.1]));
        assert!(!d.contains([0.3, 0.1]));
        assert!(!d.contains([-0.01, 0.1]));
        assert!(d.contains([0.3, 0.0]));
    }

    #[test]
    fn box_membership() {
        let d = Domain::<3>::axis_box([-1.0, -1.0, -1.0], [-0.01, -0.01, -0.01]).unwrap();
        assert!(d.contains([-0.5, -0.5, -0.5]));
        assert!(!d.contains([0.0, -0.5, -0.5]));
    }

    #[test]
    fn degenerate_shapes_rejected() {
        assert!(Domain::<2>::axis_box([0.0, 0.0], [0.0, 1.0]).is_err());
        assert!(Domain::quarter_disk(0.0).is_err());
        assert!(Domain::quarter_disk(-1.0).is_err());
    }

    /// Arc-length stepping oracle for a unit square at constant spacing 0.5:
    /// four corners plus one midpoint per side.
    #[test]
    fn unit_square_boundary_const_half() {
        let d = Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        let nodes = d.discretize_boundary(&RadiusField::constant(0.5), 0.9).unwrap();
        assert_eq!(nodes.len(), 8);
        // Normals are axis-aligned unit vectors.
        for b in &nodes {
            assert!((norm(b.normal) - 1.0).abs() < 1e-12);
            assert!(b.normal[0] == 0.0 || b.normal[1] == 0.0);
        }
        let midpoints: Vec<_> = nodes
            .iter()
            .filter(|b| {
                let p = b.position;
                (p[0] - 0.5).abs() < 1e-12 || (p[1] - 0.5).abs() < 1e-12
            })
            .collect();
        assert_eq!(midpoints.len(), 4);
    }

    /// Arc-length oracle for the quarter-disk arc: at dr = R/2 the marched
    /// angular steps are 0.5 rad; the step at 1.5 rad is dropped for being
    /// within proximity of the (0, R) corner.
    #[test]
    fn quarter_disk_arc_angular_steps() {
        let d = Domain::quarter_disk(0.3).unwrap();
        let nodes = d.discretize_boundary(&RadiusField::constant(0.15), 0.9).unwrap();
        let arc_nodes: Vec<_> = nodes.iter().filter(|b| b.segment == "arc").collect();
        for b in &arc_nodes {
            let r = norm(b.position);
            assert!((r - 0.3).abs() < 1e-12, "arc node not on the arc");
            // Radial normal.
            let n_expected = [b.position[0] / r, b.position[1] / r];
            assert!(dist(b.normal, n_expected) < 1e-12);
        }
        let mut angles: Vec<f64> = arc_nodes
            .iter()
            .map(|b| b.position[1].atan2(b.position[0]))
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [0.0, 0.5, 1.0, std::f64::consts::FRAC_PI_2];
        assert_eq!(angles.len(), expected.len());
        for (a, e) in angles.iter().zip(expected) {
            assert!((a - e).abs() < 1e-12, "angle {a} vs expected {e}");
        }
    }

    #[test]
    fn segment_labels_match_sides() {
        let d = Domain::rectangle([0.0, 0.0], [2.0, 1.0]).unwrap();
        let nodes = d.discretize_boundary(&RadiusField::constant(0.25), 0.9).unwrap();
        for b in &nodes {
            let p = b.position;
            match b.segment.as_str() {
                "bottom" => assert_eq!(p[1], 0.0),
                "top" => assert_eq!(p[1], 1.0),
                "left" => assert_eq!(p[0], 0.0),
                "right" => assert_eq!(p[0], 2.0),
                other => panic!("unexpected segment {other}"),
            }
            assert!(d.contains(p));
        }
    }

    #[test]
    fn corners_emitted_once_with_first_owner() {
        let d = Domain::quarter_disk(0.3).unwrap();
        let nodes = d.discretize_boundary(&RadiusField::constant(0.05), 0.9).unwrap();
        let at = |p: Point<2>| {
            nodes
                .iter()
                .filter(|b| dist(b.position, p) < 1e-12)
                .collect::<Vec<_>>()
        };
        let origin = at([0.0, 0.0]);
        assert_eq!(origin.len(), 1);
        assert_eq!(origin[0].segment, "bottom");
        let right = at([0.3, 0.0]);
        assert_eq!(right.len(), 1);
        assert_eq!(right[0].segment, "arc");
        let top = at([0.0, 0.3]);
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].segment, "arc");
    }

    #[test]
    fn spacing_bounds_hold_along_segments() {
        let d = Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        let dr = 0.13;
        let zeta = 0.9;
        let nodes = d.discretize_boundary(&RadiusField::constant(dr), zeta).unwrap();
        // Global proximity invariant.
        for (i, a) in nodes.iter().enumerate() {
            for b in nodes.iter().skip(i + 1) {
                assert!(dist(a.position, b.position) >= zeta * dr - 1e-12);
            }
        }
        // Consecutive spacing within [zeta*dr, 2*dr] per side.
        for side in ["bottom", "top", "left", "right"] {
            let mut xs: Vec<f64> = nodes
                .iter()
                .filter(|b| {
                    b.segment == side
                        || dist_to_side(b.position, side) < 1e-12
                })
                .map(|b| if side == "bottom" || side == "top" { b.position[0] } else { b.position[1] })
                .collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in xs.windows(2) {
                let gap = w[1] - w[0];
                assert!(gap >= zeta * dr - 1e-12 && gap <= 2.0 * dr + 1e-12);
            }
        }
    }

    fn dist_to_side(p: Point<2>, side: &str) -> f64 {
        match side {
            "bottom" => p[1].abs(),
            "top" => (p[1] - 1.0).abs(),
            "left" => p[0].abs(),
            _ => (p[0] - 1.0).abs(),
        }
    }

    #[test]
    fn coarse_dr_still_emits_endpoints() {
        let d = Domain::rectangle([0.0, 0.0], [1.0, 1.0]).unwrap();
        let nodes = d.discretize_boundary(&RadiusField::constant(5.0), 0.9).unwrap();
        assert_eq!(nodes.len(), 4, "only the corners survive a huge dr");
    }

    #[test]
    fn box_boundary_nodes_lie_on_faces() {
        let d = Domain::<3>::axis_box([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]).unwrap();
        let nodes = d
            .discretize_boundary(&RadiusField::constant(0.3), 0.9, 42)
            .unwrap();
        assert!(nodes.len() >= 26, "corners + edges + faces expected, got {}", nodes.len());
        for b in &nodes {
            assert!((norm(b.normal) - 1.0).abs() < 1e-12);
            let p = b.position;
            let on_face = (0..3).any(|a| p[a] == 0.0 || p[a] == 1.0);
            assert!(on_face);
            assert!(d.contains(p));
        }
        // Deterministic for a fixed seed.
        let again = d
            .discretize_boundary(&RadiusField::constant(0.3), 0.9, 42)
            .unwrap();
        assert_eq!(nodes.len(), again.len());
        for (a, b) in nodes.iter().zip(&again) {
            assert_eq!(a.position, b.position);
        }
    }
}
