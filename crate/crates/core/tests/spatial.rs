mod support;

use geoconflict::geo::{GeoPoint, Geometry};
use geoconflict::spatial::{RadiusQuery, SpatialGrid};
use proptest::prelude::*;
use support::{haversine, offset};

fn scan(objects: &[(String, Geometry)], center: GeoPoint, eps: f64) -> Vec<String> {
    let mut hits: Vec<(f64, &String)> = objects
        .iter()
        .filter_map(|(id, g)| {
            let Geometry::Point(p) = g else { unreachable!() };
            let d = haversine(center, *p);
            (d <= eps).then_some((d, id))
        })
        .collect();
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    hits.into_iter().map(|(_, id)| id.clone()).collect()
}

fn scene() -> impl Strategy<Value = (Vec<(String, Geometry)>, GeoPoint, f64, f64)> {
    (
        -179.9..179.9f64,
        -85.0..85.0f64,
        prop::collection::vec((-3000.0..3000.0f64, -3000.0..3000.0f64), 0..120),
        (-3500.0..3500.0f64, -3500.0..3500.0f64),
        10.0..1500.0f64,
        10.0..1500.0f64,
    )
        .prop_map(|(lon, lat, pts, (qx, qy), cell, eps)| {
            let objs = pts
                .into_iter()
                .enumerate()
                .map(|(i, (x, y))| (format!("o{i:04}"), Geometry::Point(wrap(lon, lat, x, y))))
                .collect();
            (objs, wrap(lon, lat, qx, qy), cell, eps)
        })
}

/// Like `offset` but wraps longitude so scenes may straddle the antimeridian.
fn wrap(lon: f64, lat: f64, x: f64, y: f64) -> GeoPoint {
    let dlon = (x / (support::R * lat.to_radians().cos())).to_degrees();
    let mut l = lon + dlon;
    if l > 180.0 {
        l -= 360.0;
    } else if l <= -180.0 {
        l += 360.0;
    }
    let p = offset(0.0, lat, 0.0, y);
    GeoPoint::new(l, p.lat()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn grid_equals_linear_scan((objs, center, cell, eps) in scene()) {
        let grid = SpatialGrid::build(objs.iter().map(|(id, g)| (id.as_str(), g)), cell).unwrap();
        let q = RadiusQuery::new(center, eps).unwrap();
        let got: Vec<String> = grid.radius_query(&q).iter().map(|n| n.id.to_owned()).collect();
        prop_assert_eq!(got, scan(&objs, center, eps));
    }
}

#[test]
fn antimeridian_neighbors_are_found() {
    let a = Geometry::Point(GeoPoint::new(179.9995, 10.0).unwrap());
    let b = Geometry::Point(GeoPoint::new(-179.9995, 10.0).unwrap());
    let grid = SpatialGrid::build([("a", &a), ("b", &b)], 200.0).unwrap();
    let q = RadiusQuery::new(GeoPoint::new(180.0, 10.0).unwrap(), 200.0).unwrap();
    let ids: Vec<&str> = grid.radius_query(&q).iter().map(|n| n.id).collect();
    assert_eq!(ids, ["a", "b"]);
}

#[test]
fn rejects_bad_radius_and_duplicates() {
    let p = GeoPoint::new(0.0, 0.0).unwrap();
    assert!(RadiusQuery::new(p, 0.0).is_err());
    assert!(RadiusQuery::new(p, f64::NAN).is_err());
    let g = Geometry::Point(p);
    assert!(SpatialGrid::build([("x", &g), ("x", &g)], 100.0).is_err());
}
