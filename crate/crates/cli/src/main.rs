use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pufbench_cli::{
    attack, generate, quality, report, run_all, CliError, CliResult, ExperimentManifest, Overrides, ReportFormat, RunDir,
    Scale, DEFAULT_MANIFEST,
};

#[derive(Parser)]
#[command(name = "pufbench", version, about = "PUF modeling-attack experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the manifest, dataset and split into the run directory.
    Generate(Common),
    /// Train the manifest's learners on a generated run.
    Attack(Common),
    /// Compute PUF quality metrics for the run's device population.
    Quality(Common),
    /// Build the report bundle from a run's artifacts.
    Report(Common),
    /// Generate, attack, quality and report in one go.
    All(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// Manifest file; the built-in negative control when omitted.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Run directory; defaults to `runs/<run id prefix>`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
    /// Comma-separated learner names.
    #[arg(long)]
    learners: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            scale: self.scale.map(|s| match s {
                ScaleArg::Desk => Scale::Desk,
                ScaleArg::Paper => Scale::Paper,
            }),
            learners: self.learners.clone(),
            out: self.out.clone(),
        }
    }

    fn format(&self) -> ReportFormat {
        match self.format {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }

    fn manifest(&self) -> CliResult<ExperimentManifest> {
        let text = match &self.manifest {
            Some(path) => fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?,
            None => DEFAULT_MANIFEST.to_string(),
        };
        ExperimentManifest::parse_with(&text, &self.overrides()).map_err(CliError::Manifest)
    }

    fn run_dir(&self, manifest: &ExperimentManifest) -> RunDir {
        match &manifest.out {
            Some(out) => RunDir::new(out),
            None => RunDir::new(Path::new("runs").join(&manifest.run_id()[..12])),
        }
    }

    /// Existing runs only need `--out`; otherwise the directory follows from
    /// the manifest.
    fn existing_dir(&self) -> CliResult<RunDir> {
        match &self.out {
            Some(out) => Ok(RunDir::new(out)),
            None => self.manifest().map(|m| self.run_dir(&m)),
        }
    }
}

fn progress(msg: &str) {
    eprintln!("{msg}");
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Generate(c) => {
            let manifest = c.manifest()?;
            let dir = c.run_dir(&manifest);
            let s = generate(&manifest, &dir)?;
            println!("run {} -> {}", s.run_id, dir.root().display());
            println!("{} records, dataset sha256 {}", s.records, s.dataset_sha256);
        }
        Command::Attack(c) => {
            let dir = c.existing_dir()?;
            let only: Option<Vec<String>> =
                c.learners.as_deref().map(|l| l.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect());
            let s = attack(&dir, only.as_deref(), progress)?;
            if !s.failed.is_empty() {
                return Err(CliError::LearnerFailures(s.failed.into_iter().map(|(n, _)| n).collect()));
            }
        }
        Command::Quality(c) => {
            let dir = c.existing_dir()?;
            let q = quality(&dir)?;
            println!(
                "uniqueness {:.4} reliability {:.4} uniformity {:.4} randomness {:.4}",
                q.uniqueness, q.reliability, q.uniformity, q.randomness_score
            );
        }
        Command::Report(c) => {
            let dir = c.existing_dir()?;
            let r = report(&dir, c.format())?;
            print!("{}", r.summary_csv());
        }
        Command::All(c) => {
            let manifest = c.manifest()?;
            let dir = c.run_dir(&manifest);
            let r = run_all(&manifest, &dir, c.format(), progress)?;
            print!("{}", r.summary_csv());
            println!("report written to {}", dir.report().display());
            if !r.failed.is_empty() {
                return Err(CliError::LearnerFailures(r.failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
