//! Geometry value types and the point, line and polygon distance functions.
//!
//! Point-to-point distances are great-circle (haversine) distances on a
//! sphere of radius [`EARTH_RADIUS_M`]. Shape-to-shape distances
//! (Hausdorff, Chamfer, PoLiS) are evaluated in a local equirectangular
//! tangent plane, see [`LocalFrame`]; they are accurate for shapes spanning
//! less than roughly 10 km.

mod metric;
pub mod planar;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

pub use metric::{chamfer_distance, geo_distance, hausdorff_distance, point_to_segment_distance, polis_distance};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// A WGS84 position in degrees.
///
/// Longitude is normalized into (-180, 180]: an input of -180 is stored as 180.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct GeoPoint {
    lon: f64,
    lat: f64,
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Result<Self, GeometryError> {
        if !lon.is_finite() || !lat.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(GeometryError::LatitudeOutOfRange(lat));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(GeometryError::LongitudeOutOfRange(lon));
        }
        let lon = if lon == -180.0 { 180.0 } else { lon };
        Ok(Self { lon, lat })
    }

    /// Caller guarantees the coordinates are already valid.
    pub(crate) fn new_unchecked(lon: f64, lat: f64) -> Self {
        debug_assert!(Self::new(lon, lat).is_ok());
        Self { lon, lat }
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    /// Total order on (lon, lat), used to canonicalize argument order.
    pub(crate) fn total_cmp(&self, other: &Self) -> Ordering {
        self.lon.total_cmp(&other.lon).then(self.lat.total_cmp(&other.lat))
    }

    fn approx_eq(&self, other: &Self, tol_deg: f64) -> bool {
        (self.lon - other.lon).abs() <= tol_deg && (self.lat - other.lat).abs() <= tol_deg
    }
}

impl TryFrom<[f64; 2]> for GeoPoint {
    type Error = GeometryError;

    fn try_from([lon, lat]: [f64; 2]) -> Result<Self, Self::Error> {
        Self::new(lon, lat)
    }
}

impl From<GeoPoint> for [f64; 2] {
    fn from(p: GeoPoint) -> Self {
        [p.lon, p.lat]
    }
}

/// An open polyline with distinct endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoLine {
    vertices: Vec<GeoPoint>,
}

impl GeoLine {
    pub fn new(vertices: Vec<GeoPoint>) -> Result<Self, GeometryError> {
        if vertices.len() < 2 {
            return Err(GeometryError::LineTooShort(vertices.len()));
        }
        if let Some(i) = vertices.windows(2).position(|w| w[0] == w[1]) {
            return Err(GeometryError::RepeatedVertex(i + 1));
        }
        if vertices.first() == vertices.last() {
            return Err(GeometryError::LineClosed);
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[GeoPoint] {
        &self.vertices
    }
}

/// A single closed ring. The closing vertex is stored explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoPolygon {
    ring: Vec<GeoPoint>,
}

impl GeoPolygon {
    pub fn new(ring: Vec<GeoPoint>) -> Result<Self, GeometryError> {
        if ring.len() < 4 {
            return Err(GeometryError::RingTooShort(ring.len()));
        }
        if ring.first() != ring.last() {
            return Err(GeometryError::RingNotClosed);
        }
        if let Some(i) = ring.windows(2).position(|w| w[0] == w[1]) {
            return Err(GeometryError::RepeatedVertex(i + 1));
        }
        let poly = Self { ring };
        let (area2, _, _) = poly.shoelace();
        if area2 == 0.0 || !area2.is_finite() {
            return Err(GeometryError::ZeroArea);
        }
        Ok(poly)
    }

    /// The ring including the repeated closing vertex.
    pub fn ring(&self) -> &[GeoPoint] {
        &self.ring
    }

    /// Distinct vertices: the ring without its closing vertex.
    pub fn vertices(&self) -> &[GeoPoint] {
        &self.ring[..self.ring.len() - 1]
    }

    /// Twice the signed planar area and the unnormalized centroid sums,
    /// computed relative to the first vertex to limit cancellation.
    fn shoelace(&self) -> (f64, f64, f64) {
        let origin = self.ring[0];
        let mut area2 = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        for w in self.ring.windows(2) {
            let (x0, y0) = (w[0].lon - origin.lon, w[0].lat - origin.lat);
            let (x1, y1) = (w[1].lon - origin.lon, w[1].lat - origin.lat);
            let cross = x0 * y1 - x1 * y0;
            area2 += cross;
            cx += (x0 + x1) * cross;
            cy += (y0 + y1) * cross;
        }
        (area2, cx, cy)
    }
}

/// Spatial half of a geospatial object.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Point(GeoPoint),
    Line(GeoLine),
    Polygon(GeoPolygon),
}

impl Geometry {
    /// Distinct vertices (for polygons, without the closing vertex).
    pub fn vertices(&self) -> &[GeoPoint] {
        match self {
            Geometry::Point(p) => std::slice::from_ref(p),
            Geometry::Line(l) => l.vertices(),
            Geometry::Polygon(p) => p.vertices(),
        }
    }

    /// Boundary segments. A point is its own degenerate boundary.
    pub(crate) fn segments(&self) -> Vec<(GeoPoint, GeoPoint)> {
        match self {
            Geometry::Point(p) => vec![(*p, *p)],
            Geometry::Line(l) => l.vertices().windows(2).map(|w| (w[0], w[1])).collect(),
            Geometry::Polygon(p) => p.ring().windows(2).map(|w| (w[0], w[1])).collect(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Geometry::Point(_) => "Point",
            Geometry::Line(_) => "LineString",
            Geometry::Polygon(_) => "Polygon",
        }
    }

    /// Same variant and vertex-wise equal within `tol_deg` degrees.
    pub fn approx_eq(&self, other: &Geometry, tol_deg: f64) -> bool {
        let (a, b) = match (self, other) {
            (Geometry::Point(a), Geometry::Point(b)) => return a.approx_eq(b, tol_deg),
            (Geometry::Line(a), Geometry::Line(b)) => (a.vertices(), b.vertices()),
            (Geometry::Polygon(a), Geometry::Polygon(b)) => (a.ring(), b.ring()),
            _ => return false,
        };
        a.len() == b.len() && a.iter().zip(b).all(|(p, q)| p.approx_eq(q, tol_deg))
    }

    /// Largest great-circle distance from the centroid to any vertex.
    pub fn circumradius(&self) -> f64 {
        let c = centroid(self);
        self.vertices().iter().map(|v| geo_distance(c, *v)).fold(0.0, f64::max)
    }
}

impl From<GeoPoint> for Geometry {
    fn from(p: GeoPoint) -> Self {
        Geometry::Point(p)
    }
}

/// Search anchor of a geometry, computed on raw lon/lat.
///
/// Points map to themselves, lines to the length-weighted average of their
/// segment midpoints, polygons to the area-weighted (shoelace) centroid.
/// Degenerate polygons cannot be constructed, so this never fails.
pub fn centroid(g: &Geometry) -> GeoPoint {
    match g {
        Geometry::Point(p) => *p,
        Geometry::Line(l) => {
            let mut total = 0.0;
            let mut sx = 0.0;
            let mut sy = 0.0;
            for w in l.vertices().windows(2) {
                let len = (w[1].lon - w[0].lon).hypot(w[1].lat - w[0].lat);
                total += len;
                sx += len * (w[0].lon + w[1].lon) / 2.0;
                sy += len * (w[0].lat + w[1].lat) / 2.0;
            }
            GeoPoint::new_unchecked(sx / total, sy / total)
        }
        Geometry::Polygon(p) => {
            let (area2, cx, cy) = p.shoelace();
            let origin = p.ring[0];
            GeoPoint::new_unchecked(origin.lon + cx / (3.0 * area2), origin.lat + cy / (3.0 * area2))
        }
    }
}

/// Equirectangular tangent plane around a reference position.
///
/// `x` grows east and `y` north, both in meters.
#[derive(Debug, Clone, Copy)]
pub struct LocalFrame {
    origin: GeoPoint,
    cos_lat: f64,
}

impl LocalFrame {
    pub fn new(origin: GeoPoint) -> Self {
        Self {
            origin,
            cos_lat: origin.lat.to_radians().cos(),
        }
    }

    /// Frame centered on the mean position of `points`.
    pub fn around<'a>(points: impl IntoIterator<Item = &'a GeoPoint>) -> Self {
        let (mut lon, mut lat, mut n) = (0.0, 0.0, 0usize);
        for p in points {
            lon += p.lon;
            lat += p.lat;
            n += 1;
        }
        let n = n.max(1) as f64;
        Self::new(GeoPoint::new_unchecked(lon / n, lat / n))
    }

    pub fn project(&self, p: GeoPoint) -> planar::Point {
        planar::Point {
            x: EARTH_RADIUS_M * (p.lon - self.origin.lon).to_radians() * self.cos_lat,
            y: EARTH_RADIUS_M * (p.lat - self.origin.lat).to_radians(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(lon: f64, lat: f64) -> GeoPoint {
        GeoPoint::new(lon, lat).unwrap()
    }

    #[test]
    fn point_validation() {
        assert_eq!(GeoPoint::new(0.0, 95.0), Err(GeometryError::LatitudeOutOfRange(95.0)));
        assert!(GeoPoint::new(181.0, 0.0).is_err());
        assert!(GeoPoint::new(f64::NAN, 0.0).is_err());
        assert_eq!(pt(-180.0, 10.0).lon(), 180.0);
    }

    #[test]
    fn line_invariants() {
        assert!(GeoLine::new(vec![pt(0.0, 0.0)]).is_err());
        assert_eq!(
            GeoLine::new(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 0.0)]),
            Err(GeometryError::LineClosed)
        );
        assert_eq!(
            GeoLine::new(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)]),
            Err(GeometryError::RepeatedVertex(2))
        );
    }

    #[test]
    fn polygon_invariants() {
        let open = vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)];
        assert_eq!(GeoPolygon::new(open), Err(GeometryError::RingNotClosed));
        let flat = vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0), pt(0.0, 0.0)];
        assert_eq!(GeoPolygon::new(flat), Err(GeometryError::ZeroArea));
    }

    #[test]
    fn centroids() {
        let p = pt(-114.06, 51.05);
        assert_eq!(centroid(&Geometry::Point(p)), p);

        let square = GeoPolygon::new(vec![
            pt(0.0, 0.0),
            pt(1.0, 0.0),
            pt(1.0, 1.0),
            pt(0.0, 1.0),
            pt(0.0, 0.0),
        ])
        .unwrap();
        let c = centroid(&Geometry::Polygon(square));
        assert!((c.lon() - 0.5).abs() < 1e-12 && (c.lat() - 0.5).abs() < 1e-12);

        // Two equal-length segments with midpoints (1, 0) and (2, 1).
        let line = GeoLine::new(vec![pt(0.0, 0.0), pt(2.0, 0.0), pt(2.0, 2.0)]).unwrap();
        let c = centroid(&Geometry::Line(line));
        assert!((c.lon() - 1.5).abs() < 1e-12 && (c.lat() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn clockwise_ring_centroid() {
        let ring = vec![
            pt(10.0, 10.0),
            pt(10.0, 12.0),
            pt(14.0, 12.0),
            pt(14.0, 10.0),
            pt(10.0, 10.0),
        ];
        let c = centroid(&Geometry::Polygon(GeoPolygon::new(ring).unwrap()));
        assert!((c.lon() - 12.0).abs() < 1e-12 && (c.lat() - 11.0).abs() < 1e-12);
    }

    #[test]
    fn approx_eq_respects_variant() {
        let a = Geometry::Point(pt(1.0, 1.0));
        let b = Geometry::Point(pt(1.0 + 5e-10, 1.0));
        assert!(a.approx_eq(&b, 1e-9));
        assert!(!a.approx_eq(&Geometry::Point(pt(1.0 + 1e-8, 1.0)), 1e-9));
        let line = Geometry::Line(GeoLine::new(vec![pt(1.0, 1.0), pt(2.0, 1.0)]).unwrap());
        assert!(!a.approx_eq(&line, 1e-9));
    }
}
