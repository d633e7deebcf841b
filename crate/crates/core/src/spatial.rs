//! Uniform grid over object anchors for exact radius queries.
//!
//! Every object is anchored at the centroid of its geometry and stored in
//! exactly one cell of an equirectangular grid whose cell size equals the
//! search radius. A query visits every cell intersecting the bounding box of
//! the search disk and keeps the objects whose great-circle anchor distance
//! is within the radius. Lines and polygons get the radius inflated by their
//! circumradius, so an extended shape is returned when any of its vertices
//! could reach the disk.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use crate::error::IndexError;
use crate::geo::{centroid, geo_distance, GeoPoint, Geometry, EARTH_RADIUS_M};

/// Bounding-box slack in meters, covering rounding in the box arithmetic.
const BOX_SLACK_M: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusQuery {
    center: GeoPoint,
    epsilon_m: f64,
}

impl RadiusQuery {
    pub fn new(center: GeoPoint, epsilon_m: f64) -> Result<Self, IndexError> {
        if !(epsilon_m.is_finite() && epsilon_m > 0.0) {
            return Err(IndexError::InvalidRadius(epsilon_m));
        }
        Ok(Self { center, epsilon_m })
    }

    pub fn center(&self) -> GeoPoint {
        self.center
    }

    pub fn epsilon_m(&self) -> f64 {
        self.epsilon_m
    }
}

/// One radius-query hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<'a> {
    /// Position of the object in build order.
    pub slot: usize,
    pub id: &'a str,
    pub distance_m: f64,
}

#[derive(Debug, Clone)]
struct Entry {
    id: String,
    anchor: GeoPoint,
    circumradius: f64,
}

/// Frozen grid. There is no way to insert or remove after [`SpatialGrid::build`].
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    cell_size_m: f64,
    cos_lat0: f64,
    entries: Vec<Entry>,
    cells: HashMap<(i64, i64), Vec<usize>>,
    max_circumradius: f64,
}

impl SpatialGrid {
    /// Builds the grid with `cell_size_m` equal to the search radius.
    pub fn build<'a, I>(objects: I, cell_size_m: f64) -> Result<Self, IndexError>
    where
        I: IntoIterator<Item = (&'a str, &'a Geometry)>,
    {
        if !(cell_size_m.is_finite() && cell_size_m > 0.0) {
            return Err(IndexError::InvalidRadius(cell_size_m));
        }
        let mut seen = std::collections::HashSet::new();
        let mut entries = Vec::new();
        for (id, geometry) in objects {
            if !seen.insert(id) {
                return Err(IndexError::DuplicateId(id.to_owned()));
            }
            let circumradius = match geometry {
                Geometry::Point(_) => 0.0,
                g => g.circumradius(),
            };
            entries.push(Entry {
                id: id.to_owned(),
                anchor: centroid(geometry),
                circumradius,
            });
        }
        let mean_lat = if entries.is_empty() {
            0.0
        } else {
            entries.iter().map(|e| e.anchor.lat()).sum::<f64>() / entries.len() as f64
        };
        let mut grid = Self {
            cell_size_m,
            cos_lat0: mean_lat.to_radians().cos(),
            entries,
            cells: HashMap::new(),
            max_circumradius: 0.0,
        };
        for slot in 0..grid.entries.len() {
            let e = &grid.entries[slot];
            let key = (grid.row(e.anchor.lat()), grid.col(e.anchor.lon()));
            grid.max_circumradius = grid.max_circumradius.max(e.circumradius);
            grid.cells.entry(key).or_default().push(slot);
        }
        Ok(grid)
    }

    pub fn cell_size_m(&self) -> f64 {
        self.cell_size_m
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn occupied_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn id(&self, slot: usize) -> &str {
        &self.entries[slot].id
    }

    pub fn anchor(&self, slot: usize) -> GeoPoint {
        self.entries[slot].anchor
    }

    /// Cell key of an anchor, exposed for tests and diagnostics.
    pub fn cell_of(&self, p: GeoPoint) -> (i64, i64) {
        (self.row(p.lat()), self.col(p.lon()))
    }

    fn row(&self, lat_deg: f64) -> i64 {
        (EARTH_RADIUS_M * lat_deg.to_radians() / self.cell_size_m).floor() as i64
    }

    fn col(&self, lon_deg: f64) -> i64 {
        (EARTH_RADIUS_M * lon_deg.to_radians() * self.cos_lat0 / self.cell_size_m).floor() as i64
    }

    /// Objects within the query radius, nearest first, ties by id.
    pub fn radius_query(&self, q: &RadiusQuery) -> Vec<Neighbor<'_>> {
        if self.entries.is_empty() {
            return Vec::new();
        }
        let reach = q.epsilon_m + self.max_circumradius + BOX_SLACK_M;
        let (lat_range, lon_ranges) = search_box(q.center, reach);
        let rows = self.row(lat_range.0)..=self.row(lat_range.1);
        let col_ranges: Vec<_> = lon_ranges.iter().map(|&(lo, hi)| self.col(lo)..=self.col(hi)).collect();

        let mut hits = Vec::new();
        let mut visit = |slots: &Vec<usize>| {
            for &slot in slots {
                let e = &self.entries[slot];
                let d = geo_distance(q.center, e.anchor);
                if d <= q.epsilon_m + e.circumradius {
                    hits.push(Neighbor {
                        slot,
                        id: &e.id,
                        distance_m: d,
                    });
                }
            }
        };

        let rect_cells: u128 = col_ranges
            .iter()
            .map(|c| (c.end() - c.start() + 1) as u128)
            .sum::<u128>()
            * (rows.end() - rows.start() + 1) as u128;
        if rect_cells > self.cells.len() as u128 {
            for (&(r, c), slots) in &self.cells {
                if rows.contains(&r) && col_ranges.iter().any(|cr| cr.contains(&c)) {
                    visit(slots);
                }
            }
        } else {
            for r in rows.clone() {
                for cr in &col_ranges {
                    for c in cr.clone() {
                        if let Some(slots) = self.cells.get(&(r, c)) {
                            visit(slots);
                        }
                    }
                }
            }
        }
        hits.sort_by(|a, b| a.distance_m.total_cmp(&b.distance_m).then_with(|| a.id.cmp(b.id)));
        hits
    }
}

/// Latitude range and one or two longitude ranges (degrees) covering every
/// point within `reach_m` of `center` on the sphere.
fn search_box(center: GeoPoint, reach_m: f64) -> ((f64, f64), Vec<(f64, f64)>) {
    let ang = reach_m / EARTH_RADIUS_M;
    let lat = center.lat().to_radians();
    let (lat_min, lat_max) = (lat - ang, lat + ang);
    let full_lon = vec![(-180.0, 180.0)];
    if lat_max >= FRAC_PI_2 || lat_min <= -FRAC_PI_2 || ang >= std::f64::consts::PI {
        return (
            (
                lat_min.max(-FRAC_PI_2).to_degrees(),
                lat_max.min(FRAC_PI_2).to_degrees(),
            ),
            full_lon,
        );
    }
    let dlon = (ang.sin() / lat.cos()).min(1.0).asin().to_degrees();
    let lats = (lat_min.to_degrees(), lat_max.to_degrees());
    let (lo, hi) = (center.lon() - dlon, center.lon() + dlon);
    let lons = if lo < -180.0 {
        vec![(-180.0, hi), (lo + 360.0, 180.0)]
    } else if hi > 180.0 {
        vec![(lo, 180.0), (-180.0, hi - 360.0)]
    } else {
        vec![(lo, hi)]
    };
    (lats, lons)
}
