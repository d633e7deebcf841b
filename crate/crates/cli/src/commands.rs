use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use geoconflict::engine::{check_internal_consistency, detect, many_to_one, Category, ConflictReport, SystemIndex};
use geoconflict::eval::{
    compare_methods, generate_synthetic, metrics, mutation_counts, results_csv, results_text, tune_radius, tuning_csv,
    tuning_text, GroundTruth, ResultRow, TuningRow, PAPER_RADIUS_TUNING, PAPER_RESULTS,
};
use geoconflict::ingest::{self, Dataset};

use crate::config::{DataFormat, DatasetConfig, RunConfig, SynthConfig};

/// How a successful command finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    ConsistencyWarnings,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("{}: cannot write", path.display()))
}

/// Prints to stdout, ignoring a closed pipe.
pub fn emit(text: &str) {
    let _ = std::io::Write::write_all(&mut std::io::stdout().lock(), text.as_bytes());
}

fn prepare_output(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("{}: cannot create output directory", dir.display()))
}

struct Inputs {
    existing: Dataset,
    new: Dataset,
}

fn load_dataset(cfg: &RunConfig, which: &str, ds: &DatasetConfig) -> Result<Dataset> {
    let mapping = ds.mapping(&cfg.detector, which);
    ingest::load(&ds.path, &mapping).with_context(|| format!("dataset `{which}`"))
}

fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    Ok(Inputs {
        existing: load_dataset(cfg, "existing", &cfg.existing)?,
        new: load_dataset(cfg, "new", &cfg.new)?,
    })
}

fn load_truth(
    cfg: &RunConfig,
    config_path: &Path,
    override_path: Option<&Path>,
    inputs: &Inputs,
) -> Result<GroundTruth> {
    let Some(path) = override_path.map(Path::to_path_buf).or_else(|| cfg.truth.clone()) else {
        bail!("{}: field `truth` is required for this command", config_path.display());
    };
    let truth = GroundTruth::load(&path).with_context(|| format!("{}: cannot load ground truth", path.display()))?;
    let orphans = truth.orphans(&inputs.existing.objects, &inputs.new.objects);
    if !orphans.is_empty() {
        bail!(
            "{}: {} ground truth id(s) not found in the datasets: {}",
            path.display(),
            orphans.len(),
            orphans.join(", ")
        );
    }
    Ok(truth)
}

fn report_jsonl(reports: &[ConflictReport]) -> Result<String> {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

fn summary(
    inputs: &Inputs,
    reports: &[ConflictReport],
    existing_pairs: &[(String, String)],
    new_pairs: &[(String, String)],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "existing objects: {}", inputs.existing.objects.len());
    let _ = writeln!(s, "new objects: {}", inputs.new.objects.len());
    for (label, ds) in [("existing", &inputs.existing), ("new", &inputs.new)] {
        let _ = writeln!(s, "{label} ingest warnings: {}", ds.ingest_warnings.len());
        for w in &ds.ingest_warnings {
            let _ = writeln!(s, "  {w}");
        }
    }

    let mut by_category: BTreeMap<&str, usize> = Category::ALL.iter().map(|c| (c.as_str(), 0)).collect();
    for r in reports {
        *by_category.entry(r.category.as_str()).or_default() += 1;
    }
    let conflicts = reports.iter().filter(|r| r.is_conflict()).count();
    let _ = writeln!(s, "conflicts: {conflicts}");
    for c in Category::ALL {
        let _ = writeln!(s, "  {}: {}", c.as_str(), by_category[c.as_str()]);
    }

    let considered: Vec<usize> = reports.iter().map(|r| r.candidates_considered).collect();
    let total: usize = considered.iter().sum();
    let mean = if considered.is_empty() {
        0.0
    } else {
        total as f64 / considered.len() as f64
    };
    let _ = writeln!(
        s,
        "candidates per new object: min {} mean {:.2} max {}",
        considered.iter().min().copied().unwrap_or(0),
        mean,
        considered.iter().max().copied().unwrap_or(0)
    );
    let without = considered.iter().filter(|&&n| n == 0).count();
    let _ = writeln!(s, "new objects without candidates: {without}");

    for (label, pairs) in [("existing", existing_pairs), ("new", new_pairs)] {
        let _ = writeln!(s, "{label} internal consistency violations: {}", pairs.len());
        for (a, b) in pairs {
            let _ = writeln!(s, "  {a} ~ {b}");
        }
    }
    let shared = many_to_one(reports);
    let _ = writeln!(s, "existing objects matched by several new objects: {}", shared.len());
    for (existing, news) in &shared {
        let _ = writeln!(s, "  {existing}: {}", news.join(", "));
    }
    s
}

pub fn cmd_detect(config_path: &Path) -> Result<Outcome> {
    let cfg = RunConfig::load(config_path)?;
    let det = cfg.detector.build(config_path)?;
    let inputs = load_inputs(&cfg)?;
    prepare_output(&cfg.output_dir)?;

    let index = SystemIndex::build(inputs.existing.objects.clone(), &det).context("dataset `existing`")?;
    let reports = detect(&inputs.new.objects, &index, &det)?;
    let existing_pairs = check_internal_consistency(&inputs.existing.objects, &det)?;
    let new_pairs = check_internal_consistency(&inputs.new.objects, &det)?;

    write(&cfg.output_dir.join("report.jsonl"), &report_jsonl(&reports)?)?;
    let text = summary(&inputs, &reports, &existing_pairs, &new_pairs);
    write(&cfg.output_dir.join("summary.txt"), &text)?;
    emit(&text);
    Ok(if existing_pairs.is_empty() && new_pairs.is_empty() {
        Outcome::Clean
    } else {
        Outcome::ConsistencyWarnings
    })
}

pub fn cmd_tune(config_path: &Path, radii: Option<Vec<f64>>) -> Result<Outcome> {
    let cfg = RunConfig::load(config_path)?;
    let det = cfg.detector.build(config_path)?;
    let radii = radii.unwrap_or_else(|| cfg.radii.clone());
    if radii.is_empty() {
        bail!("{}: field `radii` is empty and no --radii given", config_path.display());
    }
    let inputs = load_inputs(&cfg)?;
    let truth = load_truth(&cfg, config_path, None, &inputs)?;
    prepare_output(&cfg.output_dir)?;
    let rows = tune_radius(&inputs.existing.objects, &inputs.new.objects, &truth, &radii, &det)?;
    write(&cfg.output_dir.join("tuning.txt"), &tuning_text(&rows))?;
    write(&cfg.output_dir.join("tuning.csv"), &tuning_csv(&rows))?;
    emit(&tuning_text(&rows));
    Ok(Outcome::Clean)
}

pub fn cmd_eval(config_path: &Path, truth_path: Option<&Path>) -> Result<Outcome> {
    let cfg = RunConfig::load(config_path)?;
    let det = cfg.detector.build(config_path)?;
    let inputs = load_inputs(&cfg)?;
    let truth = load_truth(&cfg, config_path, truth_path, &inputs)?;
    prepare_output(&cfg.output_dir)?;
    let cmp = compare_methods(&inputs.existing.objects, &inputs.new.objects, &truth, &det)?;
    let rows = cmp.rows(&cfg.experiment);
    write(&cfg.output_dir.join("results.txt"), &results_text(&rows))?;
    write(&cfg.output_dir.join("results.csv"), &results_csv(&rows))?;
    emit(&results_text(&rows));
    Ok(Outcome::Clean)
}

/// Recomputes the published tables from their raw counts alone.
pub fn cmd_eval_paper_counts(output_dir: Option<&Path>) -> Result<Outcome> {
    let tuning: Vec<TuningRow> = PAPER_RADIUS_TUNING
        .iter()
        .map(|&(radius, counts)| {
            Ok(TuningRow {
                radius_m: f64::from(radius),
                counts,
                metrics: metrics(&counts)?,
            })
        })
        .collect::<Result<_>>()?;
    let results: Vec<ResultRow> = PAPER_RESULTS
        .iter()
        .map(|&(exp, method, counts)| {
            Ok(ResultRow {
                exp: exp.to_owned(),
                method,
                counts,
                metrics: metrics(&counts)?,
            })
        })
        .collect::<Result<_>>()?;
    if let Some(dir) = output_dir {
        prepare_output(dir)?;
        write(&dir.join("tuning.txt"), &tuning_text(&tuning))?;
        write(&dir.join("tuning.csv"), &tuning_csv(&tuning))?;
        write(&dir.join("results.txt"), &results_text(&results))?;
        write(&dir.join("results.csv"), &results_csv(&results))?;
    }
    emit(&format!("{}\n{}", tuning_text(&tuning), results_text(&results)));
    Ok(Outcome::Clean)
}

pub fn cmd_synth(spec_path: &Path) -> Result<Outcome> {
    let cfg = SynthConfig::load(spec_path)?;
    let bench = generate_synthetic(&cfg.spec).with_context(|| format!("{}: section `spec`", spec_path.display()))?;
    let dir = &cfg.output_dir;
    prepare_output(dir)?;

    let ext = cfg.format.extension();
    let existing_file = PathBuf::from(format!("existing.{ext}"));
    let new_file = PathBuf::from(format!("new.{ext}"));
    for (file, ds) in [(&existing_file, &bench.existing), (&new_file, &bench.new)] {
        let path = dir.join(file);
        match cfg.format {
            DataFormat::Geojson => ingest::write_geojson(&path, &ds.objects)?,
            DataFormat::Csv => ingest::write_csv(&path, &ds.objects)?,
        }
    }
    bench.truth.write(&dir.join("truth.csv"))?;
    let mut inj = String::from("new_id,existing_id,mutation\n");
    for i in &bench.injections {
        let _ = writeln!(inj, "{},{},{}", i.new_id, i.existing_id, i.mutation.as_str());
    }
    write(&dir.join("injections.csv"), &inj)?;

    let dataset = |path: PathBuf, label: &str| DatasetConfig {
        path,
        id_field: "id".to_owned(),
        similarity_fields: Vec::new(),
        lon_field: "lon".to_owned(),
        lat_field: "lat".to_owned(),
        source_label: Some(label.to_owned()),
    };
    let run = RunConfig {
        existing: dataset(existing_file, "existing"),
        new: dataset(new_file, "new"),
        truth: Some("truth.csv".into()),
        output_dir: "run".into(),
        experiment: "SYNTH".to_owned(),
        radii: vec![100.0, 150.0, 200.0, 250.0],
        detector: cfg.detector.clone(),
    };
    write(&dir.join("run.toml"), &toml::to_string(&run)?)?;

    let mut out = format!(
        "existing {} new {} injected {}\n",
        bench.existing.objects.len(),
        bench.new.objects.len(),
        bench.injections.len()
    );
    for (m, n) in mutation_counts(&bench.injections) {
        let _ = writeln!(out, "  {}: {n}", m.as_str());
    }
    emit(&out);
    Ok(Outcome::Clean)
}
