use std::path::PathBuf;

use amyloid_core::{Label, SubsetPolicy};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Explainable amyloid PET classification: regional SUVR features, a cubic
/// SVM, cross-validated metrics and LIME region weights.
#[derive(Debug, Parser)]
#[command(name = "amyloid", version, propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regional cerebellum-normalized SUVR for every scan in a directory.
    Extract(ExtractArgs),
    /// Inter-reader agreement rate and Cohen's kappa.
    Kappa(KappaArgs),
    /// Train a model on the labeled cohort.
    Train(TrainArgs),
    /// Stratified k-fold cross-validation: metrics, ROC curve and plot.
    Evaluate(EvaluateArgs),
    /// Per-scan LIME explanations and their per-class aggregate.
    Explain(ExplainArgs),
    /// Paint aggregate region weights into atlas space.
    Render(RenderArgs),
    /// Generate a synthetic cohort with known ground truth.
    Phantom(PhantomArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// key = value settings file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory receiving the outputs.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AtlasArgs {
    /// Label volume (NIfTI-1).
    #[arg(long)]
    pub atlas: Option<PathBuf>,
    /// Region table CSV (`id,name,cerebellar`); the AAL1 table when omitted.
    #[arg(long)]
    pub regions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CohortArgs {
    /// Features CSV written by `extract`.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Reader labels CSV (`scan_id,reader1,reader2[,adjudicated]`).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Which scans enter training.
    #[arg(long, value_enum)]
    pub subset: Option<SubsetArg>,
}

#[derive(Debug, Args)]
pub struct SvmArgs {
    /// Box constraint.
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// Kernel scale s in (offset + <x,z>/s^2)^3; sqrt(feature count) when omitted.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub offset: Option<f64>,
    /// KKT tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// SMO pass budget; 10 x training rows when omitted.
    #[arg(long)]
    pub max_passes: Option<usize>,
    /// Fit Platt calibration.
    #[arg(long)]
    pub calibrate: Option<bool>,
}

#[derive(Debug, Args)]
pub struct LimeArgs {
    #[arg(long)]
    pub n_samples: Option<usize>,
    /// Exponential kernel width; 0.75 x sqrt(feature count) when omitted.
    #[arg(long)]
    pub kernel_width: Option<f64>,
    #[arg(long)]
    pub ridge_lambda: Option<f64>,
    #[arg(long)]
    pub top_k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub atlas: AtlasArgs,
    /// Directory of `*.nii` / `*.nii.gz` scans; the file stem is the scan id.
    #[arg(long)]
    pub scans: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KappaArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub cohort: CohortArgs,
    #[command(flatten)]
    pub svm: SvmArgs,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub cohort: CohortArgs,
    #[command(flatten)]
    pub svm: SvmArgs,
    /// Ground-truth labels (`scan_id,true_label`) to score held-out predictions against.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Number of folds.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub cohort: CohortArgs,
    #[command(flatten)]
    pub svm: SvmArgs,
    #[command(flatten)]
    pub lime: LimeArgs,
    /// Explain this model instead of training one on the cohort.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Region table used for region names in the CSVs.
    #[arg(long)]
    pub regions: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub atlas: AtlasArgs,
    /// Aggregate CSV written by `explain`.
    #[arg(long)]
    pub aggregate: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub class: Option<ClassArg>,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    #[command(flatten)]
    pub common: Common,
    /// Atlas to generate on; the bundled 16^3 test atlas when omitted.
    #[command(flatten)]
    pub atlas: AtlasArgs,
    #[arg(long)]
    pub n_scans: Option<usize>,
    #[arg(long)]
    pub pos_fraction: Option<f64>,
    /// Comma-separated region ids; keyword defaults when omitted.
    #[arg(long, value_delimiter = ',')]
    pub signal_regions: Option<Vec<u32>>,
    #[arg(long)]
    pub suvr_pos: Option<f64>,
    #[arg(long)]
    pub suvr_neg: Option<f64>,
    #[arg(long)]
    pub baseline: Option<f64>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    #[arg(long)]
    pub reader_flip_prob: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SubsetArg {
    ConcordantOnly,
    Adjudicated,
}

impl From<SubsetArg> for SubsetPolicy {
    fn from(s: SubsetArg) -> Self {
        match s {
            SubsetArg::ConcordantOnly => SubsetPolicy::ConcordantOnly,
            SubsetArg::Adjudicated => SubsetPolicy::Adjudicated,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ClassArg {
    Pos,
    Neg,
}

impl From<ClassArg> for Label {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::Pos => Label::Pos,
            ClassArg::Neg => Label::Neg,
        }
    }
}
