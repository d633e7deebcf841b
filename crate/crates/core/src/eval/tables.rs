use std::fmt::Write;

use super::{EvalCounts, MetricRow};

pub const TUNING_HEADINGS: [&str; 7] = [
    "Radius (meters)",
    "Total Number of conflicts",
    "Conflicts correctly Detected",
    "Conflicts Wrongly Detected",
    "Missed conflicts",
    "Precision (%)",
    "Recall (%)",
];

pub const RESULTS_HEADINGS: [&str; 8] = [
    "EXP#",
    "Method",
    "Total Number of conflicts",
    "Conflicts correctly Detected",
    "Conflicts Wrongly Detected",
    "Missed conflicts",
    "Precision (%)",
    "Recall (%)",
];

/// Published raw counts of the radius sweep on the Montreal restaurants merge.
pub const PAPER_RADIUS_TUNING: [(u32, EvalCounts); 4] = [
    (100, EvalCounts::new(254, 242, 0, 12)),
    (150, EvalCounts::new(254, 243, 0, 11)),
    (200, EvalCounts::new(254, 245, 0, 9)),
    (250, EvalCounts::new(254, 243, 2, 11)),
];

/// Published raw counts of the four experiments, both methods. EXP2 and
/// EXP4 carry identical counts in the source table.
pub const PAPER_RESULTS: [(&str, Method, EvalCounts); 8] = [
    ("EXP1", Method::OurApproach, EvalCounts::new(254, 245, 0, 9)),
    ("EXP1", Method::Baseline, EvalCounts::new(254, 184, 0, 70)),
    ("EXP2", Method::OurApproach, EvalCounts::new(124, 119, 3, 5)),
    ("EXP2", Method::Baseline, EvalCounts::new(124, 111, 0, 13)),
    ("EXP3", Method::OurApproach, EvalCounts::new(340, 339, 5, 1)),
    ("EXP3", Method::Baseline, EvalCounts::new(340, 326, 0, 14)),
    ("EXP4", Method::OurApproach, EvalCounts::new(124, 119, 3, 5)),
    ("EXP4", Method::Baseline, EvalCounts::new(124, 111, 0, 13)),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    OurApproach,
    Baseline,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::OurApproach => "Our Approach",
            Method::Baseline => "Baseline",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningRow {
    pub radius_m: f64,
    pub counts: EvalCounts,
    pub metrics: MetricRow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub exp: String,
    pub method: Method,
    pub counts: EvalCounts,
    pub metrics: MetricRow,
}

fn count_cells(c: &EvalCounts, m: &MetricRow) -> [String; 6] {
    [
        c.total_conflicts.to_string(),
        c.correctly_detected.to_string(),
        c.wrongly_detected.to_string(),
        c.missed.to_string(),
        m.precision_cell(),
        m.recall.to_string(),
    ]
}

fn tuning_cells(r: &TuningRow) -> Vec<String> {
    let mut v = vec![r.radius_m.to_string()];
    v.extend(count_cells(&r.counts, &r.metrics));
    v
}

fn result_cells(r: &ResultRow) -> Vec<String> {
    let mut v = vec![r.exp.clone(), r.method.label().to_owned()];
    v.extend(count_cells(&r.counts, &r.metrics));
    v
}

/// Space-aligned table: text columns left-aligned, numbers right-aligned.
fn aligned(headings: &[&str], rows: &[Vec<String>], text_cols: usize) -> String {
    let mut widths: Vec<usize> = headings.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: Vec<&str>, left_all: bool| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| {
                let pad = w - c.chars().count();
                if left_all || i < text_cols {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, headings.to_vec(), true);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for row in rows {
        line(&mut out, row.iter().map(String::as_str).collect(), false);
    }
    out
}

fn csv_table(headings: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headings).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}

pub fn tuning_text(rows: &[TuningRow]) -> String {
    let cells: Vec<_> = rows.iter().map(tuning_cells).collect();
    aligned(&TUNING_HEADINGS, &cells, 0)
}

pub fn tuning_csv(rows: &[TuningRow]) -> String {
    let cells: Vec<_> = rows.iter().map(tuning_cells).collect();
    csv_table(&TUNING_HEADINGS, &cells)
}

pub fn results_text(rows: &[ResultRow]) -> String {
    let cells: Vec<_> = rows.iter().map(result_cells).collect();
    aligned(&RESULTS_HEADINGS, &cells, 2)
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let cells: Vec<_> = rows.iter().map(result_cells).collect();
    csv_table(&RESULTS_HEADINGS, &cells)
}
