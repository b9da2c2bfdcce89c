//! The generate, attack and quality stages, and the on-disk run layout.
//!
//! ```text
//! <run>/manifest.txt        explicit manifest, first line `# run <id>`
//! <run>/dataset.crp         CRP1 dataset
//! <run>/split.csv           partition,record
//! <run>/models/<name>.pbm   trained model container
//! <run>/traces/<name>.csv   capacity sweep
//! <run>/eval/<name>.json    train/validation/test EvalReports
//! <run>/errors/<name>.txt   present instead of the three above if training failed
//! <run>/quality.json        PUF quality of a device population
//! <run>/report/             report bundle
//! ```

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use pufbench::bits::BitVector;
use pufbench::dataset::{self, CrpDataset, DatasetFormat, SplitDataset};
use pufbench::learn::{container, train_model, ModelSet};
use pufbench::metrics::{puf_quality, EvalReport, PufQualityReport};
use pufbench::mix;
use pufbench::puf::{device_population, PufInstance};
use pufbench::trace::{StepAxis, TrainingTrace};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::manifest::ExperimentManifest;

#[derive(Clone, Debug)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.txt")
    }

    pub fn dataset(&self) -> PathBuf {
        self.root.join("dataset.crp")
    }

    pub fn split(&self) -> PathBuf {
        self.root.join("split.csv")
    }

    pub fn model(&self, name: &str) -> PathBuf {
        self.root.join("models").join(format!("{name}.pbm"))
    }

    pub fn trace(&self, name: &str) -> PathBuf {
        self.root.join("traces").join(format!("{name}.csv"))
    }

    pub fn eval(&self, name: &str) -> PathBuf {
        self.root.join("eval").join(format!("{name}.json"))
    }

    pub fn error(&self, name: &str) -> PathBuf {
        self.root.join("errors").join(format!("{name}.txt"))
    }

    pub fn quality(&self) -> PathBuf {
        self.root.join("quality.json")
    }

    pub fn report(&self) -> PathBuf {
        self.root.join("report")
    }
}

/// Writes through a sibling temporary file so readers never see a partial file.
pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(CliError::io(parent))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(CliError::io(&tmp))?;
    fs::rename(&tmp, path).map_err(CliError::io(path))
}

fn remove_if_present(path: &Path) -> CliResult<()> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != ErrorKind::NotFound => Err(CliError::io(path)(e)),
        _ => Ok(()),
    }
}

pub(crate) fn read_text(dir: &RunDir, path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => CliError::IncompleteRun {
            dir: dir.root().to_path_buf(),
            missing: path.strip_prefix(dir.root()).unwrap_or(path).display().to_string(),
        },
        _ => CliError::io(path)(e),
    })
}

pub fn load_manifest(dir: &RunDir) -> CliResult<ExperimentManifest> {
    let text = read_text(dir, &dir.manifest())?;
    ExperimentManifest::parse(&text).map_err(CliError::artifact(dir.manifest()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerateSummary {
    pub run_id: String,
    pub records: usize,
    /// SHA-256 of the encoded dataset file.
    pub dataset_sha256: String,
}

/// Draws the dataset, partitions it and writes manifest, dataset and split index.
pub fn generate(manifest: &ExperimentManifest, dir: &RunDir) -> CliResult<GenerateSummary> {
    let instance = PufInstance::create(&manifest.puf).map_err(CliError::Manifest)?;
    let ds = dataset::generate(&instance, manifest.dataset_size, manifest.dataset_seed).map_err(CliError::Manifest)?;
    let split = dataset::split(&ds, manifest.split_seed).map_err(CliError::Manifest)?;
    let run_id = manifest.run_id();
    write_file(&dir.manifest(), format!("# run {run_id}\n{}", manifest.render()).as_bytes())?;
    let bytes = dataset::encode_binary(&ds).map_err(CliError::Manifest)?;
    write_file(&dir.dataset(), &bytes)?;
    write_file(&dir.split(), split_csv(&split).as_bytes())?;
    Ok(GenerateSummary { run_id, records: ds.len(), dataset_sha256: hex::encode(Sha256::digest(&bytes)) })
}

fn split_csv(split: &SplitDataset) -> String {
    let mut s = String::from("partition,record\n");
    for (name, idx) in [
        ("train", &split.train_indices),
        ("validation", &split.validation_indices),
        ("test", &split.test_indices),
    ] {
        for i in idx {
            s.push_str(&format!("{name},{i}\n"));
        }
    }
    s
}

/// Reloads the dataset and rebuilds the persisted partitions.
pub fn load_split(dir: &RunDir) -> CliResult<SplitDataset> {
    let path = dir.dataset();
    if !path.exists() {
        return Err(CliError::IncompleteRun { dir: dir.root().to_path_buf(), missing: "dataset.crp".into() });
    }
    let ds: CrpDataset = dataset::read_dataset(&path, DatasetFormat::Binary).map_err(CliError::artifact(&path))?;
    let text = read_text(dir, &dir.split())?;
    let bad = |line: usize, msg: String| CliError::Artifact {
        path: dir.split(),
        source: pufbench::Error::Parse { line, msg },
    };
    let (mut train, mut validation, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for (n, line) in text.lines().enumerate().skip(1) {
        let (part, idx) = line.split_once(',').ok_or_else(|| bad(n + 1, "expected partition,record".into()))?;
        let idx: usize = idx.parse().map_err(|_| bad(n + 1, format!("bad record index {idx:?}")))?;
        if idx >= ds.len() {
            return Err(bad(n + 1, format!("record {idx} out of range")));
        }
        match part {
            "train" => train.push(idx),
            "validation" => validation.push(idx),
            "test" => test.push(idx),
            other => return Err(bad(n + 1, format!("unknown partition {other:?}"))),
        }
    }
    let split_seed = load_manifest(dir)?.split_seed;
    Ok(SplitDataset {
        train: ds.select(&train),
        validation: ds.select(&validation),
        test: ds.select(&test),
        split_seed,
        train_indices: train,
        validation_indices: validation,
        test_indices: test,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitEvaluation {
    pub train: EvalReport,
    pub validation: EvalReport,
    pub test: EvalReport,
}

pub fn evaluate_splits(models: &ModelSet, split: &SplitDataset) -> pufbench::Result<SplitEvaluation> {
    let eval = |ds: &CrpDataset| EvalReport::evaluate(&models.predict_matrix(&ds.challenge_matrix())?, &ds.response_matrix());
    Ok(SplitEvaluation { train: eval(&split.train)?, validation: eval(&split.validation)?, test: eval(&split.test)? })
}

pub fn trace_csv(trace: &TrainingTrace) -> String {
    let mut s = String::from("axis,step,train_accuracy,validation_accuracy\n");
    for p in trace.points() {
        s.push_str(&format!("{},{},{},{}\n", trace.axis, p.step, p.train_accuracy, p.validation_accuracy));
    }
    s
}

pub fn parse_trace_csv(text: &str) -> pufbench::Result<TrainingTrace> {
    let bad = |line: usize, msg: &str| pufbench::Error::Parse { line, msg: msg.into() };
    let mut axis = None;
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad(n + 1, "expected 4 fields"));
        }
        let a: StepAxis = serde_json::from_value(serde_json::Value::String(f[0].into()))
            .map_err(|_| bad(n + 1, "unknown step axis"))?;
        axis.get_or_insert(a);
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(n + 1, "bad number"));
        let step = f[1].parse::<usize>().map_err(|_| bad(n + 1, "bad step"))?;
        points.push(pufbench::trace::TracePoint { step, train_accuracy: num(f[2])?, validation_accuracy: num(f[3])? });
    }
    let axis = axis.ok_or_else(|| bad(1, "empty trace"))?;
    TrainingTrace::from_points(axis, points)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AttackSummary {
    pub completed: Vec<String>,
    /// Learner name and error message.
    pub failed: Vec<(String, String)>,
}

/// Trains every listed learner (all of them when `only` is `None`).
///
/// A failing learner leaves only `errors/<name>.txt`; the others proceed.
pub fn attack(dir: &RunDir, only: Option<&[String]>, mut progress: impl FnMut(&str)) -> CliResult<AttackSummary> {
    let manifest = load_manifest(dir)?;
    if let Some(names) = only {
        if let Some(unknown) = names.iter().find(|n| manifest.learner(n).is_none()) {
            return Err(CliError::Manifest(pufbench::Error::InvalidConfig(format!(
                "learner {unknown:?} is not in the run manifest"
            ))));
        }
    }
    let split = load_split(dir)?;
    let mut summary = AttackSummary::default();
    for entry in &manifest.learners {
        if only.is_some_and(|names| !names.contains(&entry.name)) {
            continue;
        }
        let name = &entry.name;
        for p in [dir.model(name), dir.trace(name), dir.eval(name), dir.error(name)] {
            remove_if_present(&p)?;
        }
        progress(&format!("training {name} ({})", entry.config.family));
        let outcome = train_model(&split, &entry.config).and_then(|(models, trace)| {
            let eval = evaluate_splits(&models, &split)?;
            Ok((models, trace, eval))
        });
        match outcome {
            Ok((models, trace, eval)) => {
                let bytes = container::encode(&models).map_err(CliError::artifact(dir.model(name)))?;
                write_file(&dir.model(name), &bytes)?;
                write_file(&dir.trace(name), trace_csv(&trace).as_bytes())?;
                let json = serde_json::to_string_pretty(&eval).expect("plain data serializes") + "\n";
                write_file(&dir.eval(name), json.as_bytes())?;
                progress(&format!(
                    "{name}: train {:.4} validation {:.4} test {:.4} exact {:.4}",
                    eval.train.bitwise_accuracy, eval.validation.bitwise_accuracy, eval.test.bitwise_accuracy, eval.test.exact_match
                ));
                summary.completed.push(name.clone());
            }
            Err(e) => {
                write_file(&dir.error(name), format!("{e}\n").as_bytes())?;
                progress(&format!("{name}: failed: {e}"));
                summary.failed.push((name.clone(), e.to_string()));
            }
        }
    }
    Ok(summary)
}

/// Quality report of a population built from the run's PUF configuration.
pub fn quality_for(manifest: &ExperimentManifest) -> pufbench::Result<PufQualityReport> {
    let q = &manifest.quality;
    let population = device_population(&manifest.puf, q.devices)?;
    let mut rng = mix::rng(mix::child_seed(q.seed, 0));
    let challenges: Vec<_> = (0..q.challenges).map(|_| BitVector::random(&mut rng, manifest.puf.challenge_bits)).collect();
    puf_quality(&population, &challenges, q.repeats, q.flip_rate, mix::child_seed(q.seed, 1))
}

pub fn quality(dir: &RunDir) -> CliResult<PufQualityReport> {
    let manifest = load_manifest(dir)?;
    let report = quality_for(&manifest).map_err(CliError::Manifest)?;
    let json = serde_json::to_string_pretty(&report).expect("plain data serializes") + "\n";
    write_file(&dir.quality(), json.as_bytes())?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pufbench::trace::StepAxis;

    #[test]
    fn trace_csv_round_trips_exactly() {
        let mut t = TrainingTrace::new(StepAxis::BoostingRound);
        t.push(1, 0.1 + 0.2, 1.0 / 3.0).unwrap();
        t.push(2, 0.5, 0.25).unwrap();
        assert_eq!(parse_trace_csv(&trace_csv(&t)).unwrap(), t);
    }
}
