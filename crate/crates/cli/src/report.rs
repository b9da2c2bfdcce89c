//! Report bundle assembly from the persisted artifacts of a run.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use pufbench::curve::{build_comparison, curves_csv, NormalizedCurve};
use pufbench::learn::{container, Family};
use pufbench::metrics::{bit_stats, BitStats, EvalReport, PufQualityReport};
use pufbench::trace::TrainingTrace;
use pufbench::Error;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::manifest::ExperimentManifest;
use crate::run::{
    attack, evaluate_splits, generate, load_manifest, load_split, parse_trace_csv, quality, read_text, write_file, RunDir,
    SplitEvaluation,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelSummary {
    pub model: String,
    pub family: String,
    pub label: String,
    pub train: EvalReport,
    pub validation: EvalReport,
    pub test: EvalReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct BitStatsRow {
    pub row: String,
    #[serde(flatten)]
    pub stats: BitStats,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub run_id: String,
    pub models: Vec<ModelSummary>,
    pub failed: Vec<String>,
    pub bit_stats: Vec<BitStatsRow>,
    pub curves: Vec<NormalizedCurve>,
    pub quality: PufQualityReport,
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

impl Report {
    pub fn summary_csv(&self) -> String {
        let mut s = String::from(
            "model,family,train_accuracy,validation_accuracy,test_accuracy,train_exact_match,validation_exact_match,test_exact_match,test_hamming_loss\n",
        );
        for m in &self.models {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                m.model,
                m.label,
                pct(m.train.bitwise_accuracy),
                pct(m.validation.bitwise_accuracy),
                pct(m.test.bitwise_accuracy),
                pct(m.train.exact_match),
                pct(m.validation.exact_match),
                pct(m.test.exact_match),
                pct(m.test.hamming_loss)
            );
        }
        s
    }

    pub fn bit_stats_csv(&self) -> String {
        let mut s = format!("row,{}\n", BitStats::csv_header());
        for r in &self.bit_stats {
            let _ = writeln!(s, "{},{}", r.row, r.stats.csv_row());
        }
        s
    }

    /// Final test accuracy per model, the bar-chart data.
    pub fn test_accuracy_csv(&self) -> String {
        let mut s = String::from("model,test_accuracy\n");
        for m in &self.models {
            let _ = writeln!(s, "{},{}", m.model, pct(m.test.bitwise_accuracy));
        }
        s
    }

    pub fn quality_csv(&self) -> String {
        format!("{}\n{}\n", PufQualityReport::csv_header(), self.quality.csv_row())
    }

    /// File name and contents of every bundle file.
    pub fn files(&self, format: ReportFormat) -> Vec<(&'static str, String)> {
        match format {
            ReportFormat::Csv => vec![
                ("summary.csv", self.summary_csv()),
                ("bit_stats.csv", self.bit_stats_csv()),
                ("curves.csv", curves_csv(&self.curves)),
                ("test_accuracy.csv", self.test_accuracy_csv()),
                ("quality.csv", self.quality_csv()),
            ],
            ReportFormat::Json => {
                let tests: Vec<(String, f64)> = self.models.iter().map(|m| (m.model.clone(), m.test.bitwise_accuracy)).collect();
                vec![
                    ("summary.json", json(&(&self.run_id, &self.models, &self.failed))),
                    ("bit_stats.json", json(&self.bit_stats)),
                    ("curves.json", json(&self.curves)),
                    ("test_accuracy.json", json(&tests)),
                    ("quality.json", json(&self.quality)),
                ]
            }
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes") + "\n"
}

/// Rebuilds every table from the dataset, model containers, traces and the
/// quality file. Learners with an error file are listed as failed.
pub fn build_report(dir: &RunDir) -> CliResult<Report> {
    let manifest = load_manifest(dir)?;
    let split = load_split(dir)?;
    let quality_text = read_text(dir, &dir.quality())?;
    let quality: PufQualityReport = serde_json::from_str(&quality_text).map_err(|e| CliError::Artifact {
        path: dir.quality(),
        source: Error::Parse { line: e.line(), msg: e.to_string() },
    })?;

    let target = split.test.response_matrix();
    let mut bit_rows = vec![BitStatsRow {
        row: "target".into(),
        stats: bit_stats(&target).map_err(CliError::artifact(dir.dataset()))?,
    }];
    let mut models = Vec::new();
    let mut failed = Vec::new();
    let mut traces: Vec<(String, TrainingTrace)> = Vec::new();
    for entry in &manifest.learners {
        let name = &entry.name;
        let model_path = dir.model(name);
        if !model_path.exists() {
            if dir.error(name).exists() {
                failed.push(name.clone());
                continue;
            }
            return Err(CliError::IncompleteRun {
                dir: dir.root().to_path_buf(),
                missing: format!("models/{name}.pbm"),
            });
        }
        let set = container::load(&model_path).map_err(CliError::artifact(&model_path))?;
        let SplitEvaluation { train, validation, test } =
            evaluate_splits(&set, &split).map_err(CliError::artifact(&model_path))?;
        let pred = set.predict_matrix(&split.test.challenge_matrix()).map_err(CliError::artifact(&model_path))?;
        bit_rows.push(BitStatsRow {
            row: name.clone(),
            stats: bit_stats(&pred).map_err(CliError::artifact(&model_path))?,
        });
        let trace_path: PathBuf = dir.trace(name);
        let trace = parse_trace_csv(&read_text(dir, &trace_path)?).map_err(CliError::artifact(&trace_path))?;
        traces.push((name.clone(), trace));
        let family: Family = entry.config.family;
        models.push(ModelSummary {
            model: name.clone(),
            family: family.to_string(),
            label: family.display_name().to_string(),
            train,
            validation,
            test,
        });
    }
    // Single-point traces (capacity 1) have no curve.
    let curve_input: Vec<(String, TrainingTrace)> = traces.into_iter().filter(|(_, t)| t.len() >= 2).collect();
    let curves = build_comparison(&curve_input).map_err(CliError::artifact(dir.root().join("traces")))?;
    Ok(Report { run_id: manifest.run_id(), models, failed, bit_stats: bit_rows, curves, quality })
}

/// Writes the bundle under `<run>/report/` and returns it.
pub fn report(dir: &RunDir, format: ReportFormat) -> CliResult<Report> {
    let r = build_report(dir)?;
    for (name, contents) in r.files(format) {
        write_file(&dir.report().join(name), contents.as_bytes())?;
    }
    Ok(r)
}

/// Every stage in order. Failed learners are listed in `Report::failed`
/// rather than returned as an error, so the bundle is always written.
pub fn run_all(
    manifest: &ExperimentManifest,
    dir: &RunDir,
    format: ReportFormat,
    progress: impl FnMut(&str),
) -> CliResult<Report> {
    generate(manifest, dir)?;
    attack(dir, None, progress)?;
    quality(dir)?;
    report(dir, format)
}
