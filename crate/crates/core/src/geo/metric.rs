use std::cmp::Ordering;

use super::planar;
use super::{GeoPoint, Geometry, LocalFrame, EARTH_RADIUS_M};
use crate::error::GeometryError;

/// Great-circle distance in meters (haversine formula).
///
/// Arguments are put in canonical order first, so `geo_distance(a, b)` and
/// `geo_distance(b, a)` are bit-identical.
pub fn geo_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    let (a, b) = if a.total_cmp(&b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    if a == b {
        return 0.0;
    }
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().atan2((1.0 - h).max(0.0).sqrt())
}

fn cmp_vertex_sets(a: &[GeoPoint], b: &[GeoPoint]) -> Ordering {
    for (p, q) in a.iter().zip(b) {
        match p.total_cmp(q) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Project both sets into one frame centered on their joint mean position.
fn project_pair(a: &[GeoPoint], b: &[GeoPoint]) -> (Vec<planar::Point>, Vec<planar::Point>) {
    let frame = LocalFrame::around(a.iter().chain(b));
    (
        a.iter().map(|p| frame.project(*p)).collect(),
        b.iter().map(|p| frame.project(*p)).collect(),
    )
}

/// Symmetric Hausdorff distance between two vertex sets, in meters.
pub fn hausdorff_distance(a: &[GeoPoint], b: &[GeoPoint]) -> Result<f64, GeometryError> {
    let (a, b) = canonical(a, b);
    let (pa, pb) = project_pair(a, b);
    planar::hausdorff(&pa, &pb)
}

/// Symmetric Chamfer distance between two vertex sets, in meters.
pub fn chamfer_distance(a: &[GeoPoint], b: &[GeoPoint]) -> Result<f64, GeometryError> {
    let (a, b) = canonical(a, b);
    let (pa, pb) = project_pair(a, b);
    planar::chamfer(&pa, &pb)
}

fn canonical<'a>(a: &'a [GeoPoint], b: &'a [GeoPoint]) -> (&'a [GeoPoint], &'a [GeoPoint]) {
    if cmp_vertex_sets(a, b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

/// PoLiS distance between two shapes, in meters.
///
/// Averages each shape's vertex-to-boundary distances against the other
/// shape and sums the two halves. Vertices inserted on an existing edge do
/// not move the boundary, so they leave the distance to that shape unchanged.
pub fn polis_distance(a: &Geometry, b: &Geometry) -> Result<f64, GeometryError> {
    let (a, b) = if cmp_vertex_sets(a.vertices(), b.vertices()) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    let frame = LocalFrame::around(a.vertices().iter().chain(b.vertices()));
    let proj = |g: &Geometry| {
        let verts: Vec<_> = g.vertices().iter().map(|p| frame.project(*p)).collect();
        let segs: Vec<_> = g
            .segments()
            .into_iter()
            .map(|(s, t)| (frame.project(s), frame.project(t)))
            .collect();
        (verts, segs)
    };
    let (av, asg) = proj(a);
    let (bv, bsg) = proj(b);
    planar::polis(&av, &asg, &bv, &bsg)
}

/// Distance in meters from `p` to the segment `a`-`b`, in a tangent plane
/// centered on the segment midpoint.
pub fn point_to_segment_distance(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> f64 {
    let frame = LocalFrame::around([a, b].iter());
    planar::point_segment_distance(frame.project(p), frame.project(a), frame.project(b))
}
