//! Synthetic merge benchmarks with injected, labeled conflicts.
//!
//! Stored objects get unique business-like names built from a shipped
//! vocabulary. A chosen number of them are copied into the incoming dataset
//! with a name mutation and a coordinate jitter; the rest of the incoming
//! dataset is fresh objects. Output is a pure function of the spec and seed.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::TAU;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GroundTruth;
use crate::engine::GeoObject;
use crate::error::EvalError;
use crate::geo::{GeoPoint, EARTH_RADIUS_M};
use crate::ingest::Dataset;

/// Bumped whenever the vocabulary, name grammar or mutation rules change.
pub const CATALOG_VERSION: u32 = 1;

const NAME_WORDS: &str = include_str!("../../data/name_words.txt");

/// Business-type suffixes and their catalog abbreviations.
const CATEGORY_WORDS: [(&str, &str); 12] = [
    ("Restaurant", "Rest."),
    ("Cafe", "Cf."),
    ("Grill", "Grl."),
    ("Bistro", "Bstr."),
    ("Kitchen", "Ktchn"),
    ("Bakery", "Bkry."),
    ("Lounge", "Lng."),
    ("Tavern", "Tav."),
    ("Diner", "Dnr."),
    ("Pizzeria", "Pizz."),
    ("Express", "Exp."),
    ("House", "Hse."),
];

/// Probability that a generated name carries a category suffix.
const CATEGORY_PROB: f64 = 0.5;
const NAME_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    ExactDuplicate,
    CasePunctuation,
    TokenReorder,
    Abbreviation,
    Typo,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::ExactDuplicate,
        Mutation::CasePunctuation,
        Mutation::TokenReorder,
        Mutation::Abbreviation,
        Mutation::Typo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mutation::ExactDuplicate => "exact_duplicate",
            Mutation::CasePunctuation => "case_punctuation",
            Mutation::TokenReorder => "token_reorder",
            Mutation::Abbreviation => "abbreviation",
            Mutation::Typo => "typo",
        }
    }
}

/// Proportions of each mutation among injected conflicts; must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationMix {
    #[serde(default)]
    pub exact_duplicate: f64,
    #[serde(default)]
    pub case_punctuation: f64,
    #[serde(default)]
    pub token_reorder: f64,
    #[serde(default)]
    pub abbreviation: f64,
    #[serde(default)]
    pub typo: f64,
}

impl MutationMix {
    pub fn only(m: Mutation) -> Self {
        let mut mix = Self {
            exact_duplicate: 0.0,
            case_punctuation: 0.0,
            token_reorder: 0.0,
            abbreviation: 0.0,
            typo: 0.0,
        };
        *mix.slot(m) = 1.0;
        mix
    }

    pub fn uniform() -> Self {
        Self {
            exact_duplicate: 0.2,
            case_punctuation: 0.2,
            token_reorder: 0.2,
            abbreviation: 0.2,
            typo: 0.2,
        }
    }

    fn slot(&mut self, m: Mutation) -> &mut f64 {
        match m {
            Mutation::ExactDuplicate => &mut self.exact_duplicate,
            Mutation::CasePunctuation => &mut self.case_punctuation,
            Mutation::TokenReorder => &mut self.token_reorder,
            Mutation::Abbreviation => &mut self.abbreviation,
            Mutation::Typo => &mut self.typo,
        }
    }

    fn weight(&self, m: Mutation) -> f64 {
        let mut copy = *self;
        *copy.slot(m)
    }

    /// Largest-remainder split of `n` across the mix, in catalog order.
    fn apportion(&self, n: usize) -> Vec<(Mutation, usize)> {
        let exact: Vec<f64> = Mutation::ALL.iter().map(|m| self.weight(*m) * n as f64).collect();
        let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
        let mut rest = n - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..exact.len()).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for i in order {
            if rest == 0 {
                break;
            }
            counts[i] += 1;
            rest -= 1;
        }
        Mutation::ALL.iter().copied().zip(counts).collect()
    }
}

/// Bounding box in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Area {
    pub min_lon: f64,
    pub min_lat: f64,
    pub max_lon: f64,
    pub max_lat: f64,
}

impl Area {
    pub fn area_km2(&self) -> f64 {
        let mid = ((self.min_lat + self.max_lat) / 2.0).to_radians();
        let h = EARTH_RADIUS_M * (self.max_lat - self.min_lat).to_radians();
        let w = EARTH_RADIUS_M * (self.max_lon - self.min_lon).to_radians() * mid.cos();
        h * w / 1e6
    }

    /// Same center and aspect ratio, scaled to `km2`.
    fn scaled_to(&self, km2: f64) -> Self {
        let f = (km2 / self.area_km2()).sqrt();
        let (cx, cy) = ((self.min_lon + self.max_lon) / 2.0, (self.min_lat + self.max_lat) / 2.0);
        let (hw, hh) = (
            (self.max_lon - self.min_lon) / 2.0 * f,
            (self.max_lat - self.min_lat) / 2.0 * f,
        );
        Self {
            min_lon: cx - hw,
            min_lat: cy - hh,
            max_lon: cx + hw,
            max_lat: cy + hh,
        }
    }

    fn is_valid(&self) -> bool {
        GeoPoint::new(self.min_lon, self.min_lat).is_ok()
            && GeoPoint::new(self.max_lon, self.max_lat).is_ok()
            && self.min_lon < self.max_lon
            && self.min_lat < self.max_lat
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_existing: usize,
    pub n_new: usize,
    pub n_injected_conflicts: usize,
    pub area: Area,
    /// Stored objects per km². When set, `area` is rescaled around its center
    /// to hit this density.
    #[serde(default)]
    pub density_per_km2: Option<f64>,
    pub mutation_mix: MutationMix,
    /// Injected copies move by a uniform distance in `[0, jitter_max_m]`.
    pub jitter_max_m: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// The area objects are actually placed in.
    pub fn effective_area(&self) -> Area {
        match self.density_per_km2 {
            Some(d) => self.area.scaled_to(self.n_existing as f64 / d),
            None => self.area,
        }
    }

    fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: &str| Err(EvalError::InfeasibleSpec(m.to_owned()));
        if self.n_injected_conflicts > self.n_new {
            return bad("n_injected_conflicts exceeds n_new");
        }
        if self.n_injected_conflicts > self.n_existing {
            return bad("n_injected_conflicts exceeds n_existing");
        }
        if !self.area.is_valid() {
            return bad("area is not a valid WGS84 bounding box");
        }
        if let Some(d) = self.density_per_km2 {
            if !(d.is_finite() && d > 0.0) {
                return bad("density_per_km2 must be positive");
            }
            if self.n_existing == 0 {
                return bad("density_per_km2 needs n_existing > 0");
            }
            if !self.effective_area().is_valid() {
                return bad("density implies an area outside WGS84 bounds");
            }
        }
        if !(self.jitter_max_m.is_finite() && self.jitter_max_m >= 0.0) {
            return bad("jitter_max_m must be non-negative");
        }
        let weights: Vec<f64> = Mutation::ALL.iter().map(|m| self.mutation_mix.weight(*m)).collect();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return bad("mutation proportions must be non-negative");
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("mutation proportions must sum to 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Injection {
    pub new_id: String,
    pub existing_id: String,
    pub mutation: Mutation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticBenchmark {
    pub existing: Dataset,
    pub new: Dataset,
    pub truth: GroundTruth,
    /// Injected pairs with the mutation applied, sorted by new id.
    pub injections: Vec<Injection>,
}

impl SyntheticBenchmark {
    pub fn new_ids_with(&self, m: Mutation) -> impl Iterator<Item = &str> {
        self.injections
            .iter()
            .filter(move |i| i.mutation == m)
            .map(|i| i.new_id.as_str())
    }
}

fn vocabulary() -> Vec<String> {
    NAME_WORDS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(capitalize)
        .collect()
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

struct NameFactory {
    words: Vec<String>,
    used: HashSet<String>,
}

impl NameFactory {
    fn fresh(&mut self, rng: &mut ChaCha8Rng) -> Result<String, EvalError> {
        for _ in 0..NAME_ATTEMPTS {
            let picked: Vec<&String> = self.words.choose_multiple(rng, 2).collect();
            let mut name = format!("{} {}", picked[0], picked[1]);
            if rng.random_bool(CATEGORY_PROB) {
                let (cat, _) = CATEGORY_WORDS.choose(rng).expect("non-empty");
                name.push(' ');
                name.push_str(cat);
            }
            if self.used.insert(name.to_lowercase()) {
                return Ok(name);
            }
        }
        Err(EvalError::InfeasibleSpec("name vocabulary exhausted".into()))
    }
}

fn random_point(area: &Area, rng: &mut ChaCha8Rng) -> GeoPoint {
    let lon = rng.random_range(area.min_lon..area.max_lon);
    let lat = rng.random_range(area.min_lat..area.max_lat);
    GeoPoint::new(lon, lat).expect("inside a validated box")
}

fn jitter(p: GeoPoint, max_m: f64, rng: &mut ChaCha8Rng) -> GeoPoint {
    if max_m == 0.0 {
        return p;
    }
    let d = rng.random_range(0.0..=max_m);
    let bearing = rng.random_range(0.0..TAU);
    let dlat = (d * bearing.cos() / EARTH_RADIUS_M).to_degrees();
    let dlon = (d * bearing.sin() / (EARTH_RADIUS_M * p.lat().to_radians().cos())).to_degrees();
    let lat = (p.lat() + dlat).clamp(-90.0, 90.0);
    let mut lon = p.lon() + dlon;
    if lon > 180.0 {
        lon -= 360.0;
    } else if lon < -180.0 {
        lon += 360.0;
    }
    GeoPoint::new(lon, lat).expect("wrapped into range")
}

/// Applies one catalog mutation to a name. The result always differs from
/// the input except for [`Mutation::ExactDuplicate`].
pub fn mutate_name(name: &str, m: Mutation, rng: &mut impl Rng) -> String {
    let tokens: Vec<&str> = name.split_whitespace().collect();
    match m {
        Mutation::ExactDuplicate => name.to_owned(),
        Mutation::CasePunctuation => match rng.random_range(0..4) {
            0 => name.to_uppercase(),
            1 => name.to_lowercase(),
            2 => tokens.join("-"),
            _ => format!("{name}!"),
        },
        Mutation::TokenReorder => {
            let mut t = tokens.clone();
            t.rotate_left(1);
            t.join(" ")
        }
        Mutation::Abbreviation => {
            let mut t: Vec<String> = tokens.iter().map(|s| s.to_string()).collect();
            let last = t.len() - 1;
            match CATEGORY_WORDS.iter().find(|(c, _)| *c == t[last]) {
                Some((_, abbr)) => t[last] = (*abbr).to_owned(),
                None => {
                    let initial: String = t[0].chars().take(1).collect();
                    t[0] = format!("{initial}.");
                }
            }
            t.join(" ")
        }
        Mutation::Typo => {
            let eligible: Vec<usize> = (0..tokens.len()).filter(|&i| tokens[i].chars().count() >= 4).collect();
            let Some(&i) = eligible.choose(rng) else {
                return format!("{name}x");
            };
            let mut t: Vec<String> = tokens.iter().map(|s| s.to_string()).collect();
            t[i] = typo(&t[i], rng);
            t.join(" ")
        }
    }
}

/// One or two interior edits: substitution, deletion, insertion, or a
/// single adjacent transposition. First and last letters are kept.
fn typo(word: &str, rng: &mut impl Rng) -> String {
    const LETTERS: &[u8] = b"abcdefghijklmnopqrstuvwxyz";
    let original: Vec<char> = word.chars().collect();
    let mut w = original.clone();
    let random_letter = |rng: &mut dyn rand::RngCore, avoid: char| loop {
        let c = LETTERS[rng.random_range(0..LETTERS.len())] as char;
        if c != avoid.to_ascii_lowercase() {
            return c;
        }
    };
    let op = rng.random_range(0..4);
    if op == 3 {
        let i = rng.random_range(1..w.len() - 2);
        if w[i] != w[i + 1] {
            w.swap(i, i + 1);
            return w.into_iter().collect();
        }
    }
    let edits = rng.random_range(1..=2);
    for _ in 0..edits {
        let interior = 1..w.len() - 1;
        match rng.random_range(0..3) {
            0 => {
                let i = rng.random_range(interior);
                w[i] = random_letter(rng, w[i]);
            }
            1 if w.len() > 3 => {
                let i = rng.random_range(interior);
                w.remove(i);
            }
            _ => {
                let i = rng.random_range(1..w.len());
                w.insert(i, random_letter(rng, w[i]));
            }
        }
    }
    if w == original {
        let i = 1;
        w[i] = random_letter(rng, w[i]);
    }
    w.into_iter().collect()
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    let width = n.to_string().len().max(5);
    (1..=n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticBenchmark, EvalError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let area = spec.effective_area();
    let mut names = NameFactory {
        words: vocabulary(),
        used: HashSet::new(),
    };

    let existing_ids = ids("S", spec.n_existing);
    let mut existing = Vec::with_capacity(spec.n_existing);
    for id in &existing_ids {
        let p = random_point(&area, &mut rng);
        existing.push(
            GeoObject::new(id.clone(), p)
                .with_field("name", names.fresh(&mut rng)?)
                .with_source("existing"),
        );
    }

    let mut mutations: Vec<Mutation> = spec
        .mutation_mix
        .apportion(spec.n_injected_conflicts)
        .into_iter()
        .flat_map(|(m, n)| std::iter::repeat_n(m, n))
        .collect();
    mutations.shuffle(&mut rng);
    let sources: Vec<usize> = rand::seq::index::sample(&mut rng, spec.n_existing, spec.n_injected_conflicts).into_vec();

    // (object without id, source existing id, mutation)
    let mut pending: Vec<(GeoObject, Option<(String, Mutation)>)> = Vec::with_capacity(spec.n_new);
    for (&src, &m) in sources.iter().zip(&mutations) {
        let orig = &existing[src];
        let name = mutate_name(orig.field("name").expect("generated"), m, &mut rng);
        let crate::geo::Geometry::Point(p) = orig.geometry else {
            unreachable!("generator emits points")
        };
        let obj = GeoObject::new(String::new(), jitter(p, spec.jitter_max_m, &mut rng))
            .with_field("name", name)
            .with_source("new");
        pending.push((obj, Some((orig.id.clone(), m))));
    }
    for _ in spec.n_injected_conflicts..spec.n_new {
        let obj = GeoObject::new(String::new(), random_point(&area, &mut rng))
            .with_field("name", names.fresh(&mut rng)?)
            .with_source("new");
        pending.push((obj, None));
    }
    pending.shuffle(&mut rng);

    let mut new = Vec::with_capacity(spec.n_new);
    let mut injections = Vec::new();
    for ((mut obj, origin), id) in pending.into_iter().zip(ids("N", spec.n_new)) {
        obj.id = id;
        if let Some((existing_id, mutation)) = origin {
            injections.push(Injection {
                new_id: obj.id.clone(),
                existing_id,
                mutation,
            });
        }
        new.push(obj);
    }
    let truth = GroundTruth::from_pairs(injections.iter().map(|i| (i.new_id.clone(), i.existing_id.clone())))?;
    Ok(SyntheticBenchmark {
        existing: Dataset {
            objects: existing,
            source_label: "existing".into(),
            ingest_warnings: Vec::new(),
        },
        new: Dataset {
            objects: new,
            source_label: "new".into(),
            ingest_warnings: Vec::new(),
        },
        truth,
        injections,
    })
}

/// Mutation counts among injected pairs.
pub fn mutation_counts(injections: &[Injection]) -> BTreeMap<Mutation, usize> {
    let mut m = BTreeMap::new();
    for i in injections {
        *m.entry(i.mutation).or_insert(0) += 1;
    }
    m
}
