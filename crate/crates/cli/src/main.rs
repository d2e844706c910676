//! Command-line front end for the anchor-based zero-shot recognition
//! pipeline.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or
//! validation error, 3 numerical failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use anchorzsl::Error;
use commands::EvalMode;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "anchorzsl", version, about = "Graph-diffusion anchor embeddings and distribution alignment for zero-shot recognition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset directory.
    Synth {
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Train the anchor model (or compute PCA anchors) for a dataset.
    Anchors {
        /// Dataset directory.
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Train the distribution-alignment model on the seen split.
    Align {
        dataset: PathBuf,
        /// Anchor checkpoint from the anchors command.
        #[arg(long)]
        anchors: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate a trained model under a ZSL protocol.
    Eval {
        dataset: PathBuf,
        #[arg(long)]
        anchors: PathBuf,
        /// Alignment checkpoint from the align command.
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the full pipeline once per alpha and tabulate conventional MCA.
    SweepAlpha {
        dataset: PathBuf,
        /// Comma-separated alphas in [0, 1).
        #[arg(long)]
        alphas: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Export anchors as a text matrix plus a node-kind sidecar.
    ExportAnchors {
        #[arg(long)]
        anchors: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Conventional,
    Generalized,
}

/// Config file plus per-key flag overrides; flags beat file values.
#[derive(Args)]
struct Overrides {
    /// key=value configuration file with # comments.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    anchor_dim: Option<usize>,
    /// Named dataset (awa2, cub, sun, apy) supplying the default anchor_dim.
    #[arg(long)]
    dataset_name: Option<String>,
    #[arg(long)]
    anchor_epochs: Option<usize>,
    #[arg(long)]
    align_epochs: Option<usize>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    anchor_lr: Option<f64>,
    #[arg(long)]
    align_lr: Option<f64>,
    /// linear, tanh or relu.
    #[arg(long)]
    hidden_activation: Option<String>,
    #[arg(long)]
    output_activation: Option<String>,
    #[arg(long)]
    tied_weights: bool,
    #[arg(long)]
    normalize_anchors: bool,
    #[arg(long)]
    cosine_scores: bool,
    /// Drop the relation-regularization term (lambda2 forced to 0).
    #[arg(long)]
    no_reg: bool,
    /// Replace anchor training with the PCA baseline.
    #[arg(long)]
    pca_anchors: bool,
    /// Drop all-zero attribute columns at load time with a warning.
    #[arg(long)]
    drop_empty_attributes: bool,
    /// Use unnormalized (raw) loss sums instead of per-sample means.
    #[arg(long)]
    raw_loss: bool,
    /// Repeated runs per sweep point, averaged (seeds seed, seed+1, ...).
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    synth_classes: Option<usize>,
    #[arg(long)]
    synth_attrs: Option<usize>,
    #[arg(long)]
    synth_samples_per_class: Option<usize>,
    #[arg(long)]
    synth_noise: Option<f64>,
    #[arg(long)]
    synth_density: Option<f64>,
    #[arg(long)]
    synth_feature_dim: Option<usize>,
}

impl Overrides {
    fn resolve(&self) -> anchorzsl::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        macro_rules! opt {
            ($field:ident, $key:literal) => {
                if let Some(v) = &self.$field {
                    cfg.set($key, &v.to_string())?;
                }
            };
        }
        opt!(alpha, "alpha");
        opt!(p, "p");
        opt!(anchor_dim, "anchor_dim");
        opt!(dataset_name, "dataset");
        opt!(anchor_epochs, "anchor_epochs");
        opt!(align_epochs, "align_epochs");
        opt!(lambda1, "lambda1");
        opt!(lambda2, "lambda2");
        opt!(batch_size, "batch_size");
        opt!(seed, "seed");
        opt!(anchor_lr, "anchor_lr");
        opt!(align_lr, "align_lr");
        opt!(hidden_activation, "hidden_activation");
        opt!(output_activation, "output_activation");
        if self.tied_weights {
            cfg.tied_weights = true;
        }
        if self.normalize_anchors {
            cfg.normalize_anchors = true;
        }
        if self.cosine_scores {
            cfg.cosine_scores = true;
        }
        if self.no_reg {
            cfg.no_reg = true;
        }
        if self.pca_anchors {
            cfg.pca_anchors = true;
        }
        if self.drop_empty_attributes {
            cfg.drop_empty_attributes = true;
        }
        if self.raw_loss {
            cfg.raw_loss = true;
        }
        opt!(repeats, "repeats");
        opt!(synth_classes, "synth_classes");
        opt!(synth_attrs, "synth_attrs");
        opt!(synth_samples_per_class, "synth_samples_per_class");
        opt!(synth_noise, "synth_noise");
        opt!(synth_density, "synth_density");
        opt!(synth_feature_dim, "synth_feature_dim");
        Ok(cfg)
    }
}

fn parse_alphas(spec: &str) -> anchorzsl::Result<Vec<f64>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("invalid alpha {s:?} in --alphas")))
        })
        .collect()
}

fn run(cli: Cli) -> anchorzsl::Result<()> {
    match cli.command {
        Command::Synth { out, overrides } => commands::cmd_synth(&overrides.resolve()?, &out),
        Command::Anchors { dataset, out, overrides } => {
            commands::cmd_anchors(&dataset, &overrides.resolve()?, &out)
        }
        Command::Align { dataset, anchors, out, overrides } => {
            commands::cmd_align(&dataset, &anchors, &overrides.resolve()?, &out)
        }
        Command::Eval { dataset, anchors, model, mode, out, overrides } => {
            let mode = match mode {
                Mode::Conventional => EvalMode::Conventional,
                Mode::Generalized => EvalMode::Generalized,
            };
            commands::cmd_eval(&dataset, &anchors, &model, mode, &overrides.resolve()?, &out)
        }
        Command::SweepAlpha { dataset, alphas, out, overrides } => {
            let alphas = parse_alphas(&alphas)?;
            if alphas.is_empty() {
                return Err(Error::InvalidConfig("--alphas is empty".to_string()));
            }
            commands::cmd_sweep_alpha(&dataset, &alphas, &overrides.resolve()?, &out)
        }
        Command::ExportAnchors { anchors, out } => commands::cmd_export_anchors(&anchors, &out),
    }
}

/// 1 usage/config, 2 data/validation, 3 numerical.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) => 1,
        Error::NonFinite { .. } | Error::SolverFailure { .. } | Error::DimMismatch { .. } | Error::Domain { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version land here as non-errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
