//! Conflict identification: for every incoming object pick the most similar
//! stored object inside the search radius, apply the threshold and classify.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, DetectError};
use crate::geo::{centroid, Geometry};
use crate::similarity::{bm25_score, combine, containment_similar, Bm25Params, FieldCorpusStats, ScoreBreakdown};
use crate::spatial::{Neighbor, RadiusQuery, SpatialGrid};
use crate::text::{normalize, PipelineConfig, TermList};

/// A pure distance-boost match (no shared text) is accepted only this close.
pub const TEXTLESS_MATCH_MAX_M: f64 = 5.0;
/// Upper distance for a difference to count as practically ignorable.
pub const IGNORABLE_MAX_M: f64 = 10.0;
/// Coordinate tolerance for geometries to count as identical.
pub const IDENTICAL_TOL_DEG: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GeoObject {
    pub id: String,
    pub geometry: Geometry,
    pub fields: BTreeMap<String, String>,
    pub source: String,
}

impl GeoObject {
    pub fn new(id: impl Into<String>, geometry: impl Into<Geometry>) -> Self {
        Self {
            id: id.into(),
            geometry: geometry.into(),
            fields: BTreeMap::new(),
            source: String::new(),
        }
    }

    pub fn with_field(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.fields.insert(name.into(), value.into());
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn field(&self, name: &str) -> Option<&str> {
        self.fields.get(name).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldWeight {
    pub name: String,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

impl FieldWeight {
    pub fn new(name: impl Into<String>, weight: f64) -> Self {
        Self {
            name: name.into(),
            weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    /// Search radius in meters.
    pub epsilon_m: f64,
    /// A candidate is a conflict only if its total score exceeds this.
    pub threshold: f64,
    pub fields: Vec<FieldWeight>,
    pub params: Bm25Params,
    pub pipeline: PipelineConfig,
    /// Count each distinct query term once instead of once per occurrence.
    pub dedup_query_terms: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            epsilon_m: 200.0,
            threshold: 0.0,
            fields: vec![FieldWeight::new("name", 1.0)],
            params: Bm25Params::default(),
            pipeline: PipelineConfig::default(),
            dedup_query_terms: false,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.epsilon_m.is_finite() && self.epsilon_m > 0.0) {
            return Err(ConfigError::Epsilon(self.epsilon_m));
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(ConfigError::Threshold(self.threshold));
        }
        if self.fields.is_empty() {
            return Err(ConfigError::NoFields);
        }
        let mut names = BTreeSet::new();
        for f in &self.fields {
            if !(f.weight.is_finite() && f.weight > 0.0) {
                return Err(ConfigError::Weight(f.name.clone()));
            }
            if !names.insert(f.name.as_str()) {
                return Err(ConfigError::DuplicateField(f.name.clone()));
            }
        }
        self.params.validate()
    }

    fn query_terms(&self, text: Option<&str>) -> Vec<String> {
        let Some(text) = text else {
            return Vec::new();
        };
        let terms = normalize(text, &self.pipeline).terms().to_vec();
        if self.dedup_query_terms {
            let mut seen = BTreeSet::new();
            terms.into_iter().filter(|t| seen.insert(t.clone())).collect()
        } else {
            terms
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    NonConflicting,
    Identical,
    IgnorableDiff,
    SignificantDiff,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::NonConflicting,
        Category::Identical,
        Category::IgnorableDiff,
        Category::SignificantDiff,
    ];

    pub fn is_conflict(self) -> bool {
        self != Category::NonConflicting
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::NonConflicting => "NonConflicting",
            Category::Identical => "Identical",
            Category::IgnorableDiff => "IgnorableDiff",
            Category::SignificantDiff => "SignificantDiff",
        }
    }
}

/// Detection outcome for one incoming object. Serialized field order is stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictReport {
    pub new_id: String,
    pub matched_existing_id: Option<String>,
    pub breakdown: Option<ScoreBreakdown>,
    pub category: Category,
    pub candidates_considered: usize,
}

impl ConflictReport {
    pub fn is_conflict(&self) -> bool {
        self.category.is_conflict()
    }
}

#[derive(Debug, Clone)]
struct IndexedField {
    name: String,
    stats: FieldCorpusStats,
}

/// Frozen, searchable snapshot of the stored objects: grid plus per-field
/// BM25 statistics over the whole stored corpus.
#[derive(Debug, Clone)]
pub struct SystemIndex {
    objects: Vec<GeoObject>,
    grid: SpatialGrid,
    fields: Vec<IndexedField>,
    pipeline: PipelineConfig,
}

impl SystemIndex {
    /// The grid cell size is `cfg.epsilon_m`; queries at other radii stay exact.
    pub fn build(objects: Vec<GeoObject>, cfg: &DetectorConfig) -> Result<Self, DetectError> {
        cfg.validate()?;
        let grid = SpatialGrid::build(objects.iter().map(|o| (o.id.as_str(), &o.geometry)), cfg.epsilon_m)?;
        let fields = cfg
            .fields
            .iter()
            .map(|f| {
                let terms: Vec<Option<TermList>> = objects
                    .iter()
                    .map(|o| o.field(&f.name).map(|v| normalize(v, &cfg.pipeline)))
                    .collect();
                IndexedField {
                    name: f.name.clone(),
                    stats: FieldCorpusStats::build(terms.iter().map(Option::as_ref)),
                }
            })
            .collect();
        Ok(Self {
            objects,
            grid,
            fields,
            pipeline: cfg.pipeline.clone(),
        })
    }

    pub fn objects(&self) -> &[GeoObject] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn field_stats(&self, name: &str) -> Option<&FieldCorpusStats> {
        self.fields.iter().find(|f| f.name == name).map(|f| &f.stats)
    }

    fn check_compatible(&self, cfg: &DetectorConfig) -> Result<(), ConfigError> {
        cfg.validate()?;
        let same_fields =
            self.fields.len() == cfg.fields.len() && self.fields.iter().zip(&cfg.fields).all(|(a, b)| a.name == b.name);
        if !same_fields || self.pipeline != cfg.pipeline {
            return Err(ConfigError::IndexMismatch);
        }
        Ok(())
    }

    fn neighbors(&self, obj: &GeoObject, cfg: &DetectorConfig) -> Vec<Neighbor<'_>> {
        let reach = match &obj.geometry {
            Geometry::Point(_) => cfg.epsilon_m,
            g => cfg.epsilon_m + g.circumradius(),
        };
        let q = RadiusQuery::new(centroid(&obj.geometry), reach).expect("validated radius");
        self.grid.radius_query(&q)
    }

    /// Scores every neighbor of `obj`, skipping the stored object `exclude`.
    fn score_neighborhood(
        &self,
        obj: &GeoObject,
        cfg: &DetectorConfig,
        exclude: Option<&str>,
    ) -> Vec<(usize, ScoreBreakdown)> {
        let neighbors: Vec<_> = self
            .neighbors(obj, cfg)
            .into_iter()
            .filter(|n| Some(n.id) != exclude)
            .collect();
        let queries: Vec<Vec<String>> = cfg.fields.iter().map(|f| cfg.query_terms(obj.field(&f.name))).collect();
        let scored: Vec<(f64, f64)> = neighbors
            .iter()
            .map(|n| {
                let text = self
                    .fields
                    .iter()
                    .zip(&cfg.fields)
                    .zip(&queries)
                    .map(|((field, fw), q)| fw.weight * bm25_score(q, n.slot, &field.stats, cfg.params))
                    .sum();
                (n.distance_m, text)
            })
            .collect();
        neighbors.iter().map(|n| n.slot).zip(combine(&scored)).collect()
    }

    fn report(
        &self,
        obj: &GeoObject,
        cfg: &DetectorConfig,
        considered: usize,
        best: Option<(usize, ScoreBreakdown)>,
    ) -> ConflictReport {
        match best {
            Some((slot, breakdown)) => {
                let existing = &self.objects[slot];
                ConflictReport {
                    new_id: obj.id.clone(),
                    matched_existing_id: Some(existing.id.clone()),
                    category: classify(obj, existing, &breakdown, cfg),
                    breakdown: Some(breakdown),
                    candidates_considered: considered,
                }
            }
            None => ConflictReport {
                new_id: obj.id.clone(),
                matched_existing_id: None,
                breakdown: None,
                category: Category::NonConflicting,
                candidates_considered: considered,
            },
        }
    }

    fn detect_one(&self, obj: &GeoObject, cfg: &DetectorConfig, exclude: Option<&str>) -> ConflictReport {
        let scored = self.score_neighborhood(obj, cfg, exclude);
        // Candidates arrive sorted by (distance, id), so keeping the first
        // strict maximum breaks ties toward the nearer, then smaller, id.
        let mut best: Option<(usize, ScoreBreakdown)> = None;
        for &(slot, s) in &scored {
            if best.is_none_or(|(_, b)| s.total > b.total) {
                best = Some((slot, s));
            }
        }
        let accepted = best
            .filter(|(_, s)| s.total > cfg.threshold && (s.text_score > 0.0 || s.distance_m <= TEXTLESS_MATCH_MAX_M));
        self.report(obj, cfg, scored.len(), accepted)
    }

    fn detect_one_baseline(&self, obj: &GeoObject, cfg: &DetectorConfig) -> ConflictReport {
        let scored = self.score_neighborhood(obj, cfg, None);
        let hit = scored
            .iter()
            .find(|(slot, _)| containment_match(obj, &self.objects[*slot], cfg))
            .copied();
        self.report(obj, cfg, scored.len(), hit)
    }
}

/// Every configured field present and non-empty on both sides, and each
/// pair in a containment relation.
fn containment_match(a: &GeoObject, b: &GeoObject, cfg: &DetectorConfig) -> bool {
    cfg.fields.iter().all(|f| match (a.field(&f.name), b.field(&f.name)) {
        (Some(x), Some(y)) if !x.trim().is_empty() && !y.trim().is_empty() => containment_similar(x, y),
        _ => false,
    })
}

fn sort_reports(mut reports: Vec<ConflictReport>) -> Vec<ConflictReport> {
    reports.sort_by(|a, b| a.new_id.cmp(&b.new_id));
    reports
}

/// One report per incoming object, sorted by `new_id`.
///
/// Objects are scored in parallel on the current rayon pool; the output does
/// not depend on the thread count.
pub fn detect(
    new_objects: &[GeoObject],
    index: &SystemIndex,
    cfg: &DetectorConfig,
) -> Result<Vec<ConflictReport>, DetectError> {
    index.check_compatible(cfg)?;
    let reports = new_objects.par_iter().map(|o| index.detect_one(o, cfg, None)).collect();
    Ok(sort_reports(reports))
}

/// Containment baseline: the nearest candidate whose configured fields
/// contain each other (in either direction) is the match. No threshold.
pub fn detect_baseline(
    new_objects: &[GeoObject],
    index: &SystemIndex,
    cfg: &DetectorConfig,
) -> Result<Vec<ConflictReport>, DetectError> {
    index.check_compatible(cfg)?;
    let reports = new_objects
        .par_iter()
        .map(|o| index.detect_one_baseline(o, cfg))
        .collect();
    Ok(sort_reports(reports))
}

/// Category of an accepted `(new, existing)` pair.
pub fn classify(new: &GeoObject, existing: &GeoObject, breakdown: &ScoreBreakdown, cfg: &DetectorConfig) -> Category {
    let lower = |o: &GeoObject, name: &str| o.field(name).map(str::to_lowercase);
    let identical_text = cfg
        .fields
        .iter()
        .all(|f| lower(new, &f.name) == lower(existing, &f.name));
    if identical_text && new.geometry.approx_eq(&existing.geometry, IDENTICAL_TOL_DEG) {
        return Category::Identical;
    }
    let sorted_terms = |o: &GeoObject, name: &str| {
        o.field(name).map(|v| {
            let t = normalize(v, &cfg.pipeline);
            t.sorted().into_iter().map(str::to_owned).collect::<Vec<_>>()
        })
    };
    let same_terms = cfg
        .fields
        .iter()
        .all(|f| sorted_terms(new, &f.name) == sorted_terms(existing, &f.name));
    if same_terms && breakdown.distance_m <= IGNORABLE_MAX_M {
        Category::IgnorableDiff
    } else {
        Category::SignificantDiff
    }
}

/// Pairs inside one dataset that detection would flag against each other.
///
/// The dataset is indexed against itself with each object's own id excluded.
/// Pairs are unordered, returned as `(smaller id, larger id)`, sorted.
pub fn check_internal_consistency(
    dataset: &[GeoObject],
    cfg: &DetectorConfig,
) -> Result<Vec<(String, String)>, DetectError> {
    let index = SystemIndex::build(dataset.to_vec(), cfg)?;
    let flagged: Vec<ConflictReport> = dataset
        .par_iter()
        .map(|o| index.detect_one(o, cfg, Some(&o.id)))
        .collect();
    let pairs: BTreeSet<(String, String)> = flagged
        .into_iter()
        .filter_map(|r| {
            let other = r.matched_existing_id?;
            Some(if r.new_id <= other {
                (r.new_id, other)
            } else {
                (other, r.new_id)
            })
        })
        .collect();
    Ok(pairs.into_iter().collect())
}

/// Stored objects matched by more than one incoming object.
pub fn many_to_one(reports: &[ConflictReport]) -> BTreeMap<String, Vec<String>> {
    let mut by_existing: HashMap<&str, Vec<String>> = HashMap::new();
    for r in reports {
        if let Some(e) = &r.matched_existing_id {
            by_existing.entry(e).or_default().push(r.new_id.clone());
        }
    }
    by_existing
        .into_iter()
        .filter(|(_, v)| v.len() > 1)
        .map(|(k, mut v)| {
            v.sort();
            (k.to_owned(), v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoPoint;

    fn obj(id: &str, lon: f64, lat: f64, name: &str) -> GeoObject {
        GeoObject::new(id, GeoPoint::new(lon, lat).unwrap()).with_field("name", name)
    }

    /// Point `meters` east of (lon, lat).
    fn east(lon: f64, lat: f64, meters: f64) -> f64 {
        lon + (meters / (crate::geo::EARTH_RADIUS_M * lat.to_radians().cos())).to_degrees()
    }

    fn run(existing: Vec<GeoObject>, new: &[GeoObject]) -> Vec<ConflictReport> {
        let cfg = DetectorConfig::default();
        let index = SystemIndex::build(existing, &cfg).unwrap();
        detect(new, &index, &cfg).unwrap()
    }

    #[test]
    fn empty_new_dataset() {
        assert!(run(vec![obj("s1", 0.0, 0.0, "x")], &[]).is_empty());
    }

    #[test]
    fn exact_duplicate_is_identical() {
        let r = run(
            vec![obj("s1", -114.06, 51.05, "Laurier Lounge")],
            &[obj("n1", -114.06, 51.05, "Laurier Lounge")],
        );
        assert_eq!(r[0].category, Category::Identical);
        assert_eq!(r[0].matched_existing_id.as_deref(), Some("s1"));
        let b = r[0].breakdown.unwrap();
        assert_eq!(b.distance_m, 0.0);
        assert_eq!(b.total, 2.0 * b.text_score);
    }

    #[test]
    fn case_change_nearby_is_ignorable() {
        let lon = east(-114.06, 51.05, 3.0);
        let r = run(
            vec![obj("s1", -114.06, 51.05, "Laurier Lounge")],
            &[obj("n1", lon, 51.05, "laurier lounge")],
        );
        assert_eq!(r[0].category, Category::IgnorableDiff);
    }

    #[test]
    fn renamed_far_is_significant() {
        let lon = east(-114.06, 51.05, 150.0);
        let r = run(
            vec![obj("s1", -114.06, 51.05, "Laurier")],
            &[obj("n1", lon, 51.05, "Laurier Restaurant")],
        );
        assert_eq!(r[0].category, Category::SignificantDiff);
    }

    #[test]
    fn textless_match_needs_to_be_very_close() {
        let near = east(0.0, 0.0, 3.0);
        let far = east(0.0, 0.0, 50.0);
        let stored = vec![obj("s1", 0.0, 0.0, "Alpha Cafe"), obj("s2", 1.0, 1.0, "Beta Cafe")];
        let r = run(stored.clone(), &[obj("n1", near, 0.0, "Gamma")]);
        // No text score at all, so every boost is 0 and total is 0.
        assert_eq!(r[0].category, Category::NonConflicting);
        assert_eq!(r[0].candidates_considered, 1);
        let r = run(stored, &[obj("n1", far, 0.0, "Zeta")]);
        assert_eq!(r[0].category, Category::NonConflicting);
    }

    #[test]
    fn nearer_wins_on_equal_text() {
        let stored = vec![
            obj("s1", east(0.0, 0.0, 30.0), 0.0, "Golden Dragon"),
            obj("s2", east(0.0, 0.0, 10.0), 0.0, "Golden Dragon"),
        ];
        let r = run(stored, &[obj("n1", 0.0, 0.0, "Golden Dragon")]);
        assert_eq!(r[0].matched_existing_id.as_deref(), Some("s2"));
    }

    #[test]
    fn reports_sorted_by_new_id() {
        let stored = vec![obj("s1", 0.0, 0.0, "a b")];
        let new = [obj("n2", 0.0, 0.0, "a"), obj("n1", 0.0, 0.0, "b")];
        let ids: Vec<_> = run(stored, &new).into_iter().map(|r| r.new_id).collect();
        assert_eq!(ids, ["n1", "n2"]);
    }

    #[test]
    fn missing_field_scores_zero() {
        let stored = vec![obj("s1", 0.0, 0.0, "Cafe")];
        let nameless = GeoObject::new("n1", GeoPoint::new(east(0.0, 0.0, 50.0), 0.0).unwrap());
        let r = run(stored, &[nameless]);
        assert_eq!(r[0].category, Category::NonConflicting);
        assert_eq!(r[0].candidates_considered, 1);
    }

    #[test]
    fn threshold_filters() {
        let cfg = DetectorConfig {
            threshold: 1e6,
            ..DetectorConfig::default()
        };
        let index = SystemIndex::build(vec![obj("s1", 0.0, 0.0, "Cafe")], &cfg).unwrap();
        let r = detect(&[obj("n1", 0.0, 0.0, "Cafe")], &index, &cfg).unwrap();
        assert_eq!(r[0].category, Category::NonConflicting);
    }

    #[test]
    fn mismatched_config_rejected() {
        let cfg = DetectorConfig::default();
        let index = SystemIndex::build(vec![], &cfg).unwrap();
        let other = DetectorConfig {
            fields: vec![FieldWeight::new("title", 1.0)],
            ..DetectorConfig::default()
        };
        assert!(matches!(
            detect(&[], &index, &other),
            Err(DetectError::Config(ConfigError::IndexMismatch))
        ));
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = DetectorConfig {
            epsilon_m: 0.0,
            ..DetectorConfig::default()
        };
        assert_eq!(cfg.validate(), Err(ConfigError::Epsilon(0.0)));
        cfg.epsilon_m = 100.0;
        cfg.fields.push(FieldWeight::new("name", 2.0));
        assert_eq!(cfg.validate(), Err(ConfigError::DuplicateField("name".into())));
    }

    #[test]
    fn baseline_uses_containment() {
        let cfg = DetectorConfig::default();
        let stored = vec![
            obj("s1", 0.0, 0.0, "One Cafe"),
            obj("s2", east(0.0, 0.0, 20.0), 0.0, "Laurier Lounge"),
        ];
        let index = SystemIndex::build(stored, &cfg).unwrap();
        let new = [
            obj("n1", 0.0, 0.0, "cafe one"),
            obj("n2", east(0.0, 0.0, 25.0), 0.0, "Laurier"),
        ];
        let r = detect_baseline(&new, &index, &cfg).unwrap();
        assert_eq!(r[0].category, Category::NonConflicting);
        assert_eq!(r[1].matched_existing_id.as_deref(), Some("s2"));
    }

    #[test]
    fn consistency_check() {
        let cfg = DetectorConfig::default();
        let clean = [obj("a", 0.0, 0.0, "Alpha"), obj("b", 1.0, 1.0, "Beta")];
        assert!(check_internal_consistency(&clean, &cfg).unwrap().is_empty());
        let dup = [
            obj("a", 0.0, 0.0, "Alpha"),
            obj("b", 1.0, 1.0, "Beta"),
            obj("c", 0.0, 0.0, "Alpha"),
        ];
        assert_eq!(
            check_internal_consistency(&dup, &cfg).unwrap(),
            [("a".to_owned(), "c".to_owned())]
        );
        let near = [
            obj("a", 0.0, 0.0, "Golden Dragon"),
            obj("b", east(0.0, 0.0, 50.0), 0.0, "Golden Dragon"),
        ];
        assert_eq!(check_internal_consistency(&near, &cfg).unwrap().len(), 1);
    }

    #[test]
    fn many_to_one_detection() {
        let stored = vec![obj("s1", 0.0, 0.0, "Alpha")];
        let new = [obj("n1", 0.0, 0.0, "Alpha"), obj("n2", 0.0, 0.0, "alpha")];
        let m = many_to_one(&run(stored, &new));
        assert_eq!(m["s1"], ["n1", "n2"]);
    }
}
