use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hardest::estimators::{Method, DEFAULT_ETA, DEFAULT_NUM_SAMPLES};
use hardest::matching::{CrowdPolicy, Matcher};
use hardest::metrics::DEFAULT_HARD_RATIOS;
use hardest::model::DEFAULT_FLOOR;
use hardest::ScoreMode;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "hardest", version, about = "Annotation-free hard image mining for object detectors")]
pub struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank images by estimated hardness.
    Rank(RankArgs),
    /// Hard-vs-easy classification quality at several hard ratios.
    Classify(ClassifyArgs),
    /// nDCG and mAUROC grid of ss, entropy and ds over a query list.
    Evaluate(EvaluateArgs),
    /// Spearman correlation between queries.
    Correlate(CorrelateArgs),
    /// Ranking quality as a function of the number of samples.
    Sensitivity(SensitivityArgs),
    /// Confidence, score variance and hardness histograms.
    Diagnostics(DiagnosticsArgs),
    /// Dump the detection to ground truth matching.
    Match(MatchArgs),
    /// Generate a calibrated synthetic dataset.
    #[command(hide = true)]
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Detection results in COCO result format.
    #[arg(long)]
    pub detections: PathBuf,
    /// COCO annotation file; supplies image metadata and ground truth.
    #[arg(long)]
    pub annotations: Option<PathBuf>,
    /// COCO file used only for image metadata; its annotations are ignored.
    #[arg(long, conflicts_with = "annotations")]
    pub images: Option<PathBuf>,
    /// Class remapping JSON (name -> name or null), or `nuimages`.
    #[arg(long)]
    pub remap: Option<String>,
    /// Detections scoring below this are dropped at ingest.
    #[arg(long, default_value_t = DEFAULT_FLOOR)]
    pub floor: f64,
    /// How class score vectors are interpreted: softmax or one_vs_all.
    #[arg(long, default_value_t = ScoreMode::OneVsAll)]
    pub score_mode: ScoreMode,
    /// Skip detections referencing unknown images instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QueryArgs {
    /// Hardness query, e.g. `pixeladj(fp) + total(fn, class=person)`.
    /// Repeatable; defaults to the nine standard queries.
    #[arg(long)]
    pub query: Vec<String>,
    /// File with one `name = expression` per line.
    #[arg(long)]
    pub query_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SamplerArgs {
    /// Monte Carlo samples per image.
    #[arg(long, default_value_t = DEFAULT_NUM_SAMPLES)]
    pub samples: usize,
    /// Detections scoring above this are positives.
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub iou_threshold: f64,
    #[arg(long, default_value_t = Matcher::Hungarian)]
    pub matcher: Matcher,
    #[arg(long, default_value_t = CrowdPolicy::Ignore)]
    pub crowd_policy: CrowdPolicy,
    #[arg(long, env = "HARDEST_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Clip boxes to the image frame for area computations.
    #[arg(long)]
    pub clip_boxes: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RankArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub queries: QueryArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, default_value_t = Method::Ss)]
    pub method: Method,
    /// Bins of the estimate histogram.
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// Unit-width histogram bins centred on integers.
    #[arg(long)]
    pub integer_bins: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub queries: QueryArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, default_value_t = Method::Ss)]
    pub method: Method,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_HARD_RATIOS)]
    pub hard_ratios: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub queries: QueryArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_HARD_RATIOS)]
    pub hard_ratios: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub queries: QueryArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, default_value_t = Method::Ss)]
    pub method: Method,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub queries: QueryArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Ascending sample counts to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 5, 10, 20, 50, 100])]
    pub sample_counts: Vec<usize>,
    /// Independent seeds per sample count.
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_HARD_RATIOS)]
    pub hard_ratios: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiagnosticsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub queries: QueryArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    /// Unit-width hardness bins centred on integers.
    #[arg(long)]
    pub integer_bins: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MatchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    pub num_images: usize,
    #[arg(long, env = "HARDEST_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 12)]
    pub max_detections: usize,
    #[arg(long, default_value_t = 2)]
    pub num_classes: usize,
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 0.0)]
    pub miss_rate: f64,
    /// Round scores to 0 or 1.
    #[arg(long)]
    pub binary_scores: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}
