//! Command-line flags and the optional TOML config file.
//!
//! Every setting is optional at parse time. The config file has one table
//! per subcommand (`[synth]`, `[train]`, `[predict]`, `[eval]`) using the
//! flag names with underscores; flags win over the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "gazekit",
    version,
    about = "Appearance-based gaze estimation toolkit"
)]
pub struct Cli {
    /// TOML file with per-subcommand defaults. Flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic looker and write a dataset manifest.
    Synth(SynthArgs),
    /// Train a model from a manifest.
    Train(TrainArgs),
    /// Write per-trial predictions for a manifest.
    Predict(PredictArgs),
    /// Score a model (or a predictions file) against a manifest.
    Eval(EvalArgs),
}

macro_rules! overlay {
    ($t:ty { $($f:ident),* $(,)? }) => {
        impl $t {
            /// Fills unset flags from the config file.
            pub fn overlay(mut self, file: $t) -> $t {
                $(if self.$f.is_none() { self.$f = file.$f; })*
                self
            }
        }
    };
}

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthArgs {
    /// Output directory; the manifest is written as `manifest.tsv` inside.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Looker id [default: A]
    #[arg(long)]
    pub looker_id: Option<String>,
    /// Fraction of the target angle covered by head rotation [default: 0.6]
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Number of blocks to generate [default: 3]
    #[arg(long)]
    pub blocks: Option<u32>,
    /// Id of the first generated block [default: 0]
    #[arg(long)]
    pub first_block: Option<u32>,
    /// Random seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// visible | invisible [default: visible]
    #[arg(long)]
    pub condition: Option<String>,
    /// Head pose jitter, degrees [default: 0]
    #[arg(long)]
    pub pose_jitter: Option<f64>,
    /// Gaussian pixel noise sigma on a 0..1 scale [default: 0]
    #[arg(long)]
    pub pixel_noise: Option<f64>,
    /// Head pose annotation noise, degrees [default: 0]
    #[arg(long)]
    pub annotation_noise: Option<f64>,
    /// Azimuth offset of all facial features, degrees [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub offset_az: Option<f64>,
    /// Elevation offset of all facial features, degrees [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub offset_el: Option<f64>,
    /// Iris displacement per degree of eye rotation [default: 0.2]
    #[arg(long)]
    pub iris_gain: Option<f64>,
}

overlay!(SynthArgs {
    out,
    looker_id,
    kappa,
    blocks,
    first_block,
    seed,
    condition,
    pose_jitter,
    pixel_noise,
    annotation_noise,
    offset_az,
    offset_el,
    iris_gain,
});

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainArgs {
    /// Training manifest
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Model file to write
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// face-eyes | face | kinect-linear [default: face-eyes]
    #[arg(long)]
    pub model: Option<String>,
    /// Number of neighbors [default: 5]
    #[arg(long)]
    pub k: Option<usize>,
    /// Distance offset in the 1/(d+epsilon) weights [default: 1e-6]
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// HoG cell size in pixels [default: 8]
    #[arg(long)]
    pub cell_size: Option<usize>,
    /// HoG orientation bins [default: 9]
    #[arg(long)]
    pub bins: Option<usize>,
    /// HoG block size in cells [default: 2]
    #[arg(long)]
    pub block_size: Option<usize>,
    /// HoG L2-hys clip threshold [default: 0.2]
    #[arg(long)]
    pub clip: Option<f64>,
    /// Comma-separated block ids to use [default: all]
    #[arg(long)]
    pub select_blocks: Option<String>,
    /// Allow a training set with several lookers
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub cross_looker: Option<bool>,
}

overlay!(TrainArgs {
    manifest,
    out,
    model,
    k,
    epsilon,
    cell_size,
    bins,
    block_size,
    clip,
    select_blocks,
    cross_looker,
});

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictArgs {
    /// Manifest to predict
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Trained model file
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// visible | invisible [default: visible]
    #[arg(long)]
    pub condition: Option<String>,
    /// Predictions file to write
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated block ids to use [default: all]
    #[arg(long)]
    pub select_blocks: Option<String>,
}

overlay!(PredictArgs {
    manifest,
    model_file,
    condition,
    out,
    select_blocks,
});

#[derive(Debug, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalArgs {
    /// Test manifest (ground truth)
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Trained model file; optional when --predictions is given
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// Score this predictions file instead of running the model
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// visible | invisible [default: visible]
    #[arg(long)]
    pub condition: Option<String>,
    /// Directory for report.txt and report.json
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated block ids to use [default: all]
    #[arg(long)]
    pub select_blocks: Option<String>,
    /// camera | 1 | 2 | 3 | 4 [default: camera]
    #[arg(long)]
    pub viewpoint: Option<String>,
    /// Fail instead of warning when test lookers were not in training
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub strict_lookers: Option<bool>,
}

overlay!(EvalArgs {
    manifest,
    model_file,
    predictions,
    condition,
    out,
    select_blocks,
    viewpoint,
    strict_lookers,
});

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub synth: SynthArgs,
    #[serde(default)]
    pub train: TrainArgs,
    #[serde(default)]
    pub predict: PredictArgs,
    #[serde(default)]
    pub eval: EvalArgs,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::new("config", format!("{}: {}", path.display(), e.message())))
    }
}

/// Unwraps a setting that has no default.
pub fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::new("usage", format!("--{flag} is required")))
}

pub fn parse_blocks(list: &str) -> Result<Vec<u32>, CliError> {
    list.split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| {
                CliError::new("usage", format!("bad block id {s:?} in --select-blocks"))
            })
        })
        .collect()
}
