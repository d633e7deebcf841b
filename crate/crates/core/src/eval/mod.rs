//! Precision/recall bookkeeping against labeled conflicts, radius sweeps,
//! SDI-vs-baseline comparison, and table output.
//!
//! Percentages are truncated toward zero at two decimals, computed in
//! integer hundredths of a percent so no floating-point rounding can push a
//! cell across a boundary.

mod synth;
mod tables;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{detect, detect_baseline, ConflictReport, DetectorConfig, GeoObject, SystemIndex};
use crate::error::{EvalError, IngestError};

pub use synth::{
    generate_synthetic, mutate_name, mutation_counts, Area, Injection, Mutation, MutationMix, SyntheticBenchmark,
    SyntheticSpec, CATALOG_VERSION,
};
pub use tables::{
    results_csv, results_text, tuning_csv, tuning_text, Method, ResultRow, TuningRow, PAPER_RADIUS_TUNING,
    PAPER_RESULTS, RESULTS_HEADINGS, TUNING_HEADINGS,
};

/// Labeled true conflicts: `new_id -> existing_id`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pairs: BTreeMap<String, String>,
}

impl GroundTruth {
    pub fn from_pairs<I, A, B>(pairs: I) -> Result<Self, EvalError>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (n, e) in pairs {
            let n = n.into();
            if map.contains_key(&n) {
                return Err(EvalError::DuplicateTruth(n));
            }
            map.insert(n, e.into());
        }
        Ok(Self { pairs: map })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, new_id: &str) -> Option<&str> {
        self.pairs.get(new_id).map(String::as_str)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    /// Truth limited to the given incoming ids.
    pub fn restrict<'a>(&self, new_ids: impl IntoIterator<Item = &'a str>) -> Self {
        let keep: BTreeSet<&str> = new_ids.into_iter().collect();
        Self {
            pairs: self
                .pairs
                .iter()
                .filter(|(n, _)| keep.contains(n.as_str()))
                .map(|(a, b)| (a.clone(), b.clone()))
                .collect(),
        }
    }

    /// Reads a CSV file with header `new_id,existing_id`.
    pub fn load(path: &Path) -> Result<Self, EvalError> {
        let csv_err = |source| IngestError::Csv {
            path: path.to_owned(),
            source,
        };
        let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
        let headers = reader.headers().map_err(csv_err)?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| IngestError::MissingColumn {
                    path: path.to_owned(),
                    column: name.to_owned(),
                })
        };
        let (nc, ec) = (col("new_id")?, col("existing_id")?);
        let mut pairs = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(csv_err)?;
            let get = |i| rec.get(i).unwrap_or("").trim().to_owned();
            pairs.push((get(nc), get(ec)));
        }
        Self::from_pairs(pairs)
    }

    pub fn write(&self, path: &Path) -> Result<(), EvalError> {
        let csv_err = |source| IngestError::Csv {
            path: path.to_owned(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["new_id", "existing_id"]).map_err(csv_err)?;
        for (n, e) in self.pairs() {
            w.write_record([n, e]).map_err(csv_err)?;
        }
        w.flush().map_err(|source| IngestError::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(())
    }

    /// Truth entries naming objects absent from the datasets.
    pub fn orphans(&self, existing: &[GeoObject], new: &[GeoObject]) -> Vec<String> {
        let e: BTreeSet<&str> = existing.iter().map(|o| o.id.as_str()).collect();
        let n: BTreeSet<&str> = new.iter().map(|o| o.id.as_str()).collect();
        let mut out = Vec::new();
        for (ni, ei) in self.pairs() {
            if !n.contains(ni) {
                out.push(format!("new_id `{ni}`"));
            }
            if !e.contains(ei) {
                out.push(format!("existing_id `{ei}`"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvalCounts {
    pub total_conflicts: u32,
    pub correctly_detected: u32,
    pub wrongly_detected: u32,
    pub missed: u32,
}

impl EvalCounts {
    pub const fn new(total: u32, correct: u32, wrong: u32, missed: u32) -> Self {
        Self {
            total_conflicts: total,
            correctly_detected: correct,
            wrongly_detected: wrong,
            missed,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.correctly_detected + self.missed == self.total_conflicts
    }
}

/// A percentage stored in hundredths of a percent, already truncated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Percent(u32);

impl Percent {
    /// `num / den` as a percentage truncated to two decimals.
    pub fn truncated(num: u32, den: u32) -> Self {
        assert!(den > 0 && num <= den);
        Self((u64::from(num) * 10_000 / u64::from(den)) as u32)
    }

    pub fn hundredths(self) -> u32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricRow {
    /// `None` when nothing was reported (precision undefined).
    pub precision: Option<Percent>,
    pub recall: Percent,
}

impl MetricRow {
    pub fn precision_cell(&self) -> String {
        self.precision.map_or_else(|| "—".to_owned(), |p| p.to_string())
    }
}

pub fn score_run(reports: &[ConflictReport], truth: &GroundTruth) -> EvalCounts {
    let mut correct = 0;
    let mut wrong = 0;
    for r in reports {
        let Some(matched) = r.matched_existing_id.as_deref().filter(|_| r.is_conflict()) else {
            continue;
        };
        if truth.get(&r.new_id) == Some(matched) {
            correct += 1;
        } else {
            wrong += 1;
        }
    }
    let total = truth.len() as u32;
    EvalCounts::new(total, correct, wrong, total - correct)
}

pub fn metrics(c: &EvalCounts) -> Result<MetricRow, EvalError> {
    if c.total_conflicts == 0 {
        return Err(EvalError::NoTruth);
    }
    let reported = c.correctly_detected + c.wrongly_detected;
    Ok(MetricRow {
        precision: (reported > 0).then(|| Percent::truncated(c.correctly_detected, reported)),
        recall: Percent::truncated(c.correctly_detected, c.total_conflicts),
    })
}

/// One detect-and-score run per radius, everything else held fixed.
pub fn tune_radius(
    existing: &[GeoObject],
    new: &[GeoObject],
    truth: &GroundTruth,
    radii: &[f64],
    cfg: &DetectorConfig,
) -> Result<Vec<TuningRow>, EvalError> {
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::BadRadii);
    }
    let index = SystemIndex::build(existing.to_vec(), cfg)?;
    radii
        .par_iter()
        .map(|&radius_m| {
            let run_cfg = DetectorConfig {
                epsilon_m: radius_m,
                ..cfg.clone()
            };
            let reports = detect(new, &index, &run_cfg)?;
            let counts = score_run(&reports, truth);
            Ok(TuningRow {
                radius_m,
                counts,
                metrics: metrics(&counts)?,
            })
        })
        .collect()
}

/// Outcome of running both matchers on the same inputs.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub reports: Vec<ConflictReport>,
    pub counts: EvalCounts,
    pub metrics: MetricRow,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub sdi: MethodRun,
    pub baseline: MethodRun,
}

impl Comparison {
    pub fn rows(&self, exp: &str) -> [ResultRow; 2] {
        [
            ResultRow {
                exp: exp.to_owned(),
                method: Method::OurApproach,
                counts: self.sdi.counts,
                metrics: self.sdi.metrics,
            },
            ResultRow {
                exp: exp.to_owned(),
                method: Method::Baseline,
                counts: self.baseline.counts,
                metrics: self.baseline.metrics,
            },
        ]
    }
}

pub fn compare_methods(
    existing: &[GeoObject],
    new: &[GeoObject],
    truth: &GroundTruth,
    cfg: &DetectorConfig,
) -> Result<Comparison, EvalError> {
    let index = SystemIndex::build(existing.to_vec(), cfg)?;
    let run = |reports: Vec<ConflictReport>| -> Result<MethodRun, EvalError> {
        let counts = score_run(&reports, truth);
        Ok(MethodRun {
            metrics: metrics(&counts)?,
            counts,
            reports,
        })
    };
    Ok(Comparison {
        sdi: run(detect(new, &index, cfg)?)?,
        baseline: run(detect_baseline(new, &index, cfg)?)?,
    })
}

/// Scores `reports` on the subset of truth whose new ids are in `new_ids`.
pub fn subset_counts<'a>(
    reports: &[ConflictReport],
    truth: &GroundTruth,
    new_ids: impl IntoIterator<Item = &'a str>,
) -> EvalCounts {
    let sub = truth.restrict(new_ids);
    let relevant: Vec<ConflictReport> = reports
        .iter()
        .filter(|r| sub.get(&r.new_id).is_some())
        .cloned()
        .collect();
    score_run(&relevant, &sub)
}
