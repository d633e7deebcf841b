//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls the library's scoring, indexing or metric code. Shared
//! with the CLI crate's acceptance suite through a path include.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use geoconflict::engine::{Category, DetectorConfig, GeoObject};
use geoconflict::geo::{centroid, GeoLine, GeoPoint, GeoPolygon, Geometry};
use geoconflict::text::normalize;
use rand::Rng;

pub const R: f64 = 6_371_000.0;

/// Great-circle distance via the arcsine form of the haversine formula.
pub fn haversine(a: GeoPoint, b: GeoPoint) -> f64 {
    let (p1, p2) = (a.lat().to_radians(), b.lat().to_radians());
    let dp = p2 - p1;
    let dl = (b.lon() - a.lon()).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * R * h.min(1.0).sqrt().asin()
}

/// Equirectangular projection around `origin`, meters.
pub fn project(p: GeoPoint, origin: (f64, f64)) -> (f64, f64) {
    let k = origin.1.to_radians().cos();
    (
        (p.lon() - origin.0).to_radians() * R * k,
        (p.lat() - origin.1).to_radians() * R,
    )
}

pub fn mean_origin(sets: &[&[GeoPoint]]) -> (f64, f64) {
    let all: Vec<&GeoPoint> = sets.iter().flat_map(|s| s.iter()).collect();
    let n = all.len() as f64;
    (
        all.iter().map(|p| p.lon()).sum::<f64>() / n,
        all.iter().map(|p| p.lat()).sum::<f64>() / n,
    )
}

fn d2(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn nearest(p: (f64, f64), set: &[(f64, f64)]) -> f64 {
    set.iter().map(|q| d2(p, *q)).fold(f64::INFINITY, f64::min)
}

pub fn hausdorff_bf(a: &[GeoPoint], b: &[GeoPoint]) -> f64 {
    let o = mean_origin(&[a, b]);
    let pa: Vec<_> = a.iter().map(|p| project(*p, o)).collect();
    let pb: Vec<_> = b.iter().map(|p| project(*p, o)).collect();
    let ab = pa.iter().map(|p| nearest(*p, &pb)).fold(0.0, f64::max);
    let ba = pb.iter().map(|p| nearest(*p, &pa)).fold(0.0, f64::max);
    ab.max(ba)
}

pub fn chamfer_bf(a: &[GeoPoint], b: &[GeoPoint]) -> f64 {
    let o = mean_origin(&[a, b]);
    let pa: Vec<_> = a.iter().map(|p| project(*p, o)).collect();
    let pb: Vec<_> = b.iter().map(|p| project(*p, o)).collect();
    let ab: f64 = pa.iter().map(|p| nearest(*p, &pb)).sum();
    let ba: f64 = pb.iter().map(|p| nearest(*p, &pa)).sum();
    (ab + ba) / (pa.len() + pb.len()) as f64
}

/// BM25 straight from the definition, recomputing every statistic.
pub fn bm25_direct(query: &[&str], doc: usize, corpus: &[Option<Vec<&str>>], k1: f64, b: f64) -> f64 {
    let n = corpus.len() as f64;
    let len = |d: &Option<Vec<&str>>| d.as_ref().map_or(0, Vec::len) as f64;
    let avg = corpus.iter().map(len).sum::<f64>() / n;
    let Some(terms) = &corpus[doc] else {
        return 0.0;
    };
    let dl = terms.len() as f64;
    let mut score = 0.0;
    for q in query {
        let f = terms.iter().filter(|t| *t == q).count() as f64;
        if f == 0.0 {
            continue;
        }
        let df = corpus
            .iter()
            .filter(|d| d.as_ref().is_some_and(|d| d.contains(q)))
            .count() as f64;
        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
        score += idf * f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * dl / avg));
    }
    score
}

pub fn circumradius(g: &Geometry) -> f64 {
    let c = centroid(g);
    g.vertices().iter().map(|v| haversine(c, *v)).fold(0.0, f64::max)
}

/// Oracle verdict for one incoming object.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub new_id: String,
    pub matched: Option<String>,
    pub category: Category,
}

fn oracle_classify(new: &GeoObject, old: &GeoObject, dist: f64, cfg: &DetectorConfig) -> Category {
    let same_geom = new.geometry.kind() == old.geometry.kind()
        && new.geometry.vertices().len() == old.geometry.vertices().len()
        && new
            .geometry
            .vertices()
            .iter()
            .zip(old.geometry.vertices())
            .all(|(a, b)| (a.lon() - b.lon()).abs() <= 1e-9 && (a.lat() - b.lat()).abs() <= 1e-9);
    let same_text = cfg
        .fields
        .iter()
        .all(|f| new.field(&f.name).map(str::to_lowercase) == old.field(&f.name).map(str::to_lowercase));
    if same_geom && same_text {
        return Category::Identical;
    }
    let bag = |o: &GeoObject, f: &str| {
        o.field(f).map(|v| {
            let mut t = normalize(v, &cfg.pipeline).terms().to_vec();
            t.sort();
            t
        })
    };
    let same_bag = cfg.fields.iter().all(|f| bag(new, &f.name) == bag(old, &f.name));
    if same_bag && dist <= 10.0 {
        Category::IgnorableDiff
    } else {
        Category::SignificantDiff
    }
}

/// All-pairs detection: no index, no postings, no pruning.
pub fn brute_detect(new: &[GeoObject], existing: &[GeoObject], cfg: &DetectorConfig) -> Vec<Verdict> {
    let (k1, b) = (cfg.params.k1, cfg.params.b);
    let corpora: BTreeMap<&str, Vec<Option<Vec<String>>>> = cfg
        .fields
        .iter()
        .map(|f| {
            let docs = existing
                .iter()
                .map(|o| o.field(&f.name).map(|v| normalize(v, &cfg.pipeline).terms().to_vec()))
                .collect();
            (f.name.as_str(), docs)
        })
        .collect();
    let mut out: Vec<Verdict> = new
        .iter()
        .map(|n| {
            let c = centroid(&n.geometry);
            let reach = cfg.epsilon_m + circumradius(&n.geometry);
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for (i, e) in existing.iter().enumerate() {
                let d = haversine(c, centroid(&e.geometry));
                if d > reach + circumradius(&e.geometry) {
                    continue;
                }
                let mut text = 0.0;
                for f in &cfg.fields {
                    let corpus: Vec<Option<Vec<&str>>> = corpora[f.name.as_str()]
                        .iter()
                        .map(|d| d.as_ref().map(|d| d.iter().map(String::as_str).collect()))
                        .collect();
                    let mut q: Vec<String> = n
                        .field(&f.name)
                        .map(|v| normalize(v, &cfg.pipeline).terms().to_vec())
                        .unwrap_or_default();
                    if cfg.dedup_query_terms {
                        let mut seen = HashSet::new();
                        q.retain(|t| seen.insert(t.clone()));
                    }
                    let q: Vec<&str> = q.iter().map(String::as_str).collect();
                    text += f.weight * bm25_direct(&q, i, &corpus, k1, b);
                }
                cands.push((i, d, text));
            }
            let max_text = cands.iter().map(|c| c.2).fold(0.0, f64::max);
            let max_inv = cands.iter().map(|c| 1.0 / c.1.max(1.0)).fold(0.0, f64::max);
            let mut best: Option<(usize, f64, f64, f64)> = None;
            for &(i, d, text) in &cands {
                let boost = if max_text > 0.0 {
                    (1.0 / d.max(1.0)) / max_inv * max_text
                } else {
                    0.0
                };
                let total = text + boost;
                let better = match best {
                    None => true,
                    Some((j, bd, _, bt)) => {
                        total > bt || (total == bt && (d < bd || (d == bd && existing[i].id < existing[j].id)))
                    }
                };
                if better {
                    best = Some((i, d, text, total));
                }
            }
            match best.filter(|&(_, d, text, total)| total > cfg.threshold && (text > 0.0 || d <= 5.0)) {
                Some((i, d, _, _)) => Verdict {
                    new_id: n.id.clone(),
                    matched: Some(existing[i].id.clone()),
                    category: oracle_classify(n, &existing[i], d, cfg),
                },
                None => Verdict {
                    new_id: n.id.clone(),
                    matched: None,
                    category: Category::NonConflicting,
                },
            }
        })
        .collect();
    out.sort_by(|a, b| a.new_id.cmp(&b.new_id));
    out
}

/// Point `dx` meters east and `dy` meters north of `(lon, lat)`.
pub fn offset(lon: f64, lat: f64, dx: f64, dy: f64) -> GeoPoint {
    let dlat = (dy / R).to_degrees();
    let dlon = (dx / (R * lat.to_radians().cos())).to_degrees();
    GeoPoint::new(lon + dlon, lat + dlat).unwrap()
}

const WORDS: [&str; 8] = ["cafe", "golden", "dragon", "pizza", "house", "the", "grill", "lotus"];

/// A small random scene around one center: points plus a few lines and
/// polygons, names from a tiny vocabulary so that matches are common.
pub fn random_scene<R2: Rng>(rng: &mut R2, max_objects: usize) -> (Vec<GeoObject>, Vec<GeoObject>) {
    let (lon0, lat0) = (rng.random_range(-170.0..170.0), rng.random_range(-60.0..60.0));
    let n_total = rng.random_range(2..=max_objects);
    let n_existing = rng.random_range(1..n_total);
    let make = |prefix: &str, i: usize, rng: &mut R2| {
        let (x, y) = (rng.random_range(-400.0..400.0), rng.random_range(-400.0..400.0));
        let geometry: Geometry = match rng.random_range(0..6) {
            0 => Geometry::Line(
                GeoLine::new(vec![offset(lon0, lat0, x, y), offset(lon0, lat0, x + 30.0, y + 5.0)]).unwrap(),
            ),
            1 => Geometry::Polygon(
                GeoPolygon::new(vec![
                    offset(lon0, lat0, x, y),
                    offset(lon0, lat0, x + 20.0, y),
                    offset(lon0, lat0, x + 20.0, y + 15.0),
                    offset(lon0, lat0, x, y),
                ])
                .unwrap(),
            ),
            _ => offset(lon0, lat0, x, y).into(),
        };
        let words = rng.random_range(0..=3);
        let name: Vec<&str> = (0..words).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
        let mut o = GeoObject::new(format!("{prefix}{i:03}"), geometry);
        if rng.random_bool(0.9) {
            o = o.with_field("name", name.join(" "));
        }
        o
    };
    let existing: Vec<GeoObject> = (0..n_existing).map(|i| make("S", i, rng)).collect();
    let mut new: Vec<GeoObject> = (0..n_total - n_existing).map(|i| make("N", i, rng)).collect();
    // Exact and near copies so that every category shows up.
    for (i, n) in new.iter_mut().enumerate() {
        if i % 3 == 0 {
            let src = &existing[i % existing.len()];
            n.geometry = src.geometry.clone();
            n.fields = src.fields.clone();
        }
    }
    (existing, new)
}
