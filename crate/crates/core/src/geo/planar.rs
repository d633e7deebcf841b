//! Shape distances on planar coordinates in meters.
//!
//! The geographic wrappers in the parent module project into a shared
//! [`LocalFrame`](super::LocalFrame) and delegate here.

use crate::error::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Distance from `p` to the closed segment `a`-`b`. A zero-length segment
/// degrades to point distance.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(&a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(&Point::new(a.x + t * dx, a.y + t * dy))
}

fn nearest(p: &Point, set: &[Point]) -> f64 {
    set.iter().map(|q| p.dist(q)).fold(f64::INFINITY, f64::min)
}

fn check_nonempty(a: &[Point], b: &[Point]) -> Result<(), GeometryError> {
    if a.is_empty() || b.is_empty() {
        Err(GeometryError::EmptyVertexSet)
    } else {
        Ok(())
    }
}

/// Directed Hausdorff distance: the largest nearest-vertex distance from `a` to `b`.
pub fn directed_hausdorff(a: &[Point], b: &[Point]) -> f64 {
    a.iter().map(|p| nearest(p, b)).fold(0.0, f64::max)
}

/// Symmetric vertex-set Hausdorff distance.
pub fn hausdorff(a: &[Point], b: &[Point]) -> Result<f64, GeometryError> {
    check_nonempty(a, b)?;
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

/// Symmetric Chamfer distance: both directed nearest-vertex sums, divided by
/// the total vertex count.
pub fn chamfer(a: &[Point], b: &[Point]) -> Result<f64, GeometryError> {
    check_nonempty(a, b)?;
    let ab: f64 = a.iter().map(|p| nearest(p, b)).sum();
    let ba: f64 = b.iter().map(|p| nearest(p, a)).sum();
    Ok((ab + ba) / (a.len() + b.len()) as f64)
}

fn boundary_distance(p: &Point, boundary: &[(Point, Point)]) -> f64 {
    boundary
        .iter()
        .map(|(s0, s1)| point_segment_distance(*p, *s0, *s1))
        .fold(f64::INFINITY, f64::min)
}

/// PoLiS distance between two shapes given as vertex sets plus boundary
/// segments:
///
/// `1/(2|A|) * sum_a d(a, dB) + 1/(2|B|) * sum_b d(b, dA)`
pub fn polis(
    a_vertices: &[Point],
    a_boundary: &[(Point, Point)],
    b_vertices: &[Point],
    b_boundary: &[(Point, Point)],
) -> Result<f64, GeometryError> {
    check_nonempty(a_vertices, b_vertices)?;
    if a_boundary.is_empty() || b_boundary.is_empty() {
        return Err(GeometryError::EmptyVertexSet);
    }
    let ab: f64 = a_vertices.iter().map(|p| boundary_distance(p, b_boundary)).sum();
    let ba: f64 = b_vertices.iter().map(|p| boundary_distance(p, a_boundary)).sum();
    Ok(ab / (2.0 * a_vertices.len() as f64) + ba / (2.0 * b_vertices.len() as f64))
}

/// Closed-ring boundary of a vertex loop (no repeated closing vertex).
pub fn ring_segments(vertices: &[Point]) -> Vec<(Point, Point)> {
    (0..vertices.len())
        .map(|i| (vertices[i], vertices[(i + 1) % vertices.len()]))
        .collect()
}
