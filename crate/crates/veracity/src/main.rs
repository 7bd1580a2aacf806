//! `veracity` CLI: evaluate explanation logs against ground truth,
//! simulate synthetic datasets, run the four-case experiment, or dump
//! per-record classifications.
//!
//! Exit codes: 0 success (warnings included), 1 usage error, 2 input
//! parse error, 3 internal invariant violation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use veracity::error::Error;
use veracity::harness::{
    classify_bytes, evaluate_bytes, experiment, simulate, EvalOptions, ExperimentOptions, RecordRow,
};
use veracity::outcome::CombinerMode;
use veracity::synthesis::CasePreset;

#[derive(Parser)]
#[command(
    name = "veracity",
    version,
    about = "Information-quality metrics for recommender explanations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct CommonOpts {
    /// Combiner modes, comma-separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "restrictive,permissive,balanced"
    )]
    modes: Vec<String>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Args)]
struct InputOpts {
    /// items.tsv: item_id <TAB> feature_id.
    #[arg(long)]
    items: PathBuf,
    /// ratings.tsv: user_id <TAB> item_id <TAB> rating [<TAB> ignored].
    #[arg(long)]
    ratings: PathBuf,
    /// explanations.jsonl: one record object per line.
    #[arg(long)]
    explanations: PathBuf,
    /// Minimum rating that marks an item's features as liked.
    #[arg(long, default_value_t = 3)]
    threshold: u8,
}

#[derive(Args)]
struct SeedOpt {
    /// RNG seed; falls back to $VERACITY_SEED, then 0.
    #[arg(long, env = "VERACITY_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Score an explanation log against ground-truth files.
    Evaluate {
        #[command(flatten)]
        inputs: InputOpts,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Generate a synthetic dataset and score it through the same pipeline.
    Simulate {
        /// Quality case preset: case1..case4.
        #[arg(long)]
        preset: String,
        /// Number of explanation records to generate.
        #[arg(long, default_value_t = 30)]
        records: usize,
        #[command(flatten)]
        seed: SeedOpt,
        /// Also persist items.tsv, ratings.tsv, and explanations.jsonl here.
        #[arg(long)]
        dataset_dir: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run all four case presets with replicates and the paired t-test.
    Experiment {
        #[arg(long)]
        replicates: u32,
        #[arg(long, default_value_t = 1000)]
        records: usize,
        #[command(flatten)]
        seed: SeedOpt,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Emit one classified line per input record.
    Classify {
        #[command(flatten)]
        inputs: InputOpts,
        #[command(flatten)]
        common: CommonOpts,
    },
}

enum CliError {
    Usage(String),
    Input(String),
    Internal(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Io { .. } => CliError::Input(e.to_string()),
            Error::Invariant(_) => CliError::Internal(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn parse_modes(modes: &[String]) -> Result<Vec<CombinerMode>, CliError> {
    let mut parsed = Vec::new();
    for mode in modes {
        let m: CombinerMode = mode.parse().map_err(CliError::Usage)?;
        if !parsed.contains(&m) {
            parsed.push(m);
        }
    }
    if parsed.is_empty() {
        return Err(CliError::Usage(
            "at least one combiner mode required".into(),
        ));
    }
    Ok(parsed)
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            std::io::stdout()
                .flush()
                .map_err(|e| CliError::Internal(e.to_string()))
        }
    }
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evaluate { inputs, common } => {
            let modes = parse_modes(&common.modes)?;
            let opts = EvalOptions {
                modes,
                like_threshold: inputs.threshold,
            };
            let items = read_input(&inputs.items)?;
            let ratings = read_input(&inputs.ratings)?;
            let explanations = read_input(&inputs.explanations)?;
            let report = evaluate_bytes(
                &items,
                &ratings,
                &explanations,
                [
                    &path_str(&inputs.items),
                    &path_str(&inputs.ratings),
                    &path_str(&inputs.explanations),
                ],
                &opts,
            )?;
            warn_on_counts(&report.counts);
            let rendered = match common.format {
                OutputFormat::Json => report.to_json(),
                OutputFormat::Csv => report.to_csv(),
            };
            write_output(common.out.as_deref(), &rendered)
        }
        Command::Simulate {
            preset,
            records,
            seed,
            dataset_dir,
            common,
        } => {
            let preset: CasePreset = preset.parse().map_err(CliError::Usage)?;
            let modes = parse_modes(&common.modes)?;
            let opts = EvalOptions {
                modes,
                like_threshold: 3,
            };
            let params = preset.params(records, seed.seed);
            let (report, dataset) = simulate(&params, Some(preset), &opts)?;
            if let Some(dir) = dataset_dir {
                fs::create_dir_all(&dir).map_err(|e| {
                    CliError::Input(format!("cannot create {}: {e}", dir.display()))
                })?;
                for (name, bytes) in [
                    ("items.tsv", dataset.items_tsv()),
                    ("ratings.tsv", dataset.ratings_tsv()),
                    ("explanations.jsonl", dataset.explanations_jsonl()),
                ] {
                    let path = dir.join(name);
                    fs::write(&path, bytes).map_err(|e| {
                        CliError::Input(format!("cannot write {}: {e}", path.display()))
                    })?;
                }
            }
            let rendered = match common.format {
                OutputFormat::Json => report.to_json(),
                OutputFormat::Csv => report.to_csv(),
            };
            write_output(common.out.as_deref(), &rendered)
        }
        Command::Experiment {
            replicates,
            records,
            seed,
            common,
        } => {
            let modes = parse_modes(&common.modes)?;
            let result = experiment(&ExperimentOptions {
                replicates,
                n_records: records,
                base_seed: seed.seed,
                modes,
                like_threshold: 3,
            })?;
            let rendered = match common.format {
                OutputFormat::Json => result.to_json(),
                OutputFormat::Csv => result.to_csv(),
            };
            write_output(common.out.as_deref(), &rendered)
        }
        Command::Classify { inputs, common } => {
            let modes = parse_modes(&common.modes)?;
            let opts = EvalOptions {
                modes: modes.clone(),
                like_threshold: inputs.threshold,
            };
            let items = read_input(&inputs.items)?;
            let ratings = read_input(&inputs.ratings)?;
            let explanations = read_input(&inputs.explanations)?;
            let rows = classify_bytes(
                &items,
                &ratings,
                &explanations,
                [
                    &path_str(&inputs.items),
                    &path_str(&inputs.ratings),
                    &path_str(&inputs.explanations),
                ],
                &opts,
            )?;
            let mut rendered = String::new();
            match common.format {
                OutputFormat::Json => {
                    for row in &rows {
                        rendered.push_str(
                            &serde_json::to_string(row)
                                .map_err(|e| CliError::Internal(e.to_string()))?,
                        );
                        rendered.push('\n');
                    }
                }
                OutputFormat::Csv => {
                    rendered.push_str(&RecordRow::csv_header(&modes));
                    rendered.push('\n');
                    for row in &rows {
                        rendered.push_str(&row.to_csv_row(&modes));
                        rendered.push('\n');
                    }
                }
            }
            write_output(common.out.as_deref(), &rendered)
        }
    }
}

fn warn_on_counts(counts: &veracity::report::Counts) {
    if counts.total_records == 0 {
        eprintln!("warning: explanation log is empty; all metrics undefined");
    }
    if counts.unknown_items > 0 {
        eprintln!(
            "warning: {} record(s) reference items absent from the feature store",
            counts.unknown_items
        );
    }
    if counts.orphaned_ratings > 0 {
        eprintln!(
            "warning: {} rating(s) reference items absent from the feature store",
            counts.orphaned_ratings
        );
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
