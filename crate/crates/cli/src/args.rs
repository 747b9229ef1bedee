use std::path::PathBuf;

use bhadv_core::attack::{Adversary, Metric, SourceRule};
use bhadv_core::bounds::McVariant;
use bhadv_core::conformal::Denominator;
use bhadv_core::sim::AttackKind;
use bhadv_core::TailRegion;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

const EXIT_CODES: &str = "Exit codes: 0 success, 2 usage or domain error, 3 I/O error.";

#[derive(Debug, Parser)]
#[command(name = "bhadv", version, about = "BH under adversarial p-value perturbation", after_help = EXIT_CODES)]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "BHADV_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Paired before/after attack replications on Gaussian instances.
    Simulate(SimulateArgs),
    /// Exact and Monte Carlo bound calculators.
    Bound(BoundArgs),
    /// FDR increase of INCREASE-1 against its lower bound over a grid of q.
    Qsweep(QsweepArgs),
    /// INCREASE-c on conformal outlier-detection p-values.
    Conformal(ConformalArgs),
    /// Attack a single labeled p-value CSV.
    Attack(AttackArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackArg {
    Increase,
    Move1,
    Both,
}

impl From<AttackArg> for AttackKind {
    fn from(a: AttackArg) -> Self {
        match a {
            AttackArg::Increase => AttackKind::Increase,
            AttackArg::Move1 => AttackKind::Move1,
            AttackArg::Both => AttackKind::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdversaryArg {
    Omniscient,
    Oblivious,
}

impl From<AdversaryArg> for Adversary {
    fn from(a: AdversaryArg) -> Self {
        match a {
            AdversaryArg::Omniscient => Adversary::Omniscient,
            AdversaryArg::Oblivious => Adversary::Oblivious,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceRuleArg {
    LargestP,
    SmallestP,
}

impl From<SourceRuleArg> for SourceRule {
    fn from(s: SourceRuleArg) -> Self {
        match s {
            SourceRuleArg::LargestP => SourceRule::LargestP,
            SourceRuleArg::SmallestP => SourceRule::SmallestP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailArg {
    /// `(q, 1]`.
    Complement,
    /// `[1 - q, 1]`.
    Upper,
}

impl From<TailArg> for TailRegion {
    fn from(t: TailArg) -> Self {
        match t {
            TailArg::Complement => TailRegion::Complement,
            TailArg::Upper => TailRegion::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    P,
    Z,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::P => Metric::P,
            MetricArg::Z => Metric::Z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantArg {
    AsPrinted,
    Exact,
}

impl From<VariantArg> for McVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::AsPrinted => McVariant::AsPrinted,
            VariantArg::Exact => McVariant::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DenominatorArg {
    /// `n_cal + 1`.
    CalPlusOne,
    /// `n_cal`, capped at 1.
    Printed,
}

impl From<DenominatorArg> for Denominator {
    fn from(d: DenominatorArg) -> Self {
        match d {
            DenominatorArg::CalPlusOne => Denominator::CalPlusOne,
            DenominatorArg::Printed => Denominator::Printed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    /// Lower bound `L_c` on the FDR increase with all its components.
    Lc,
    /// Monte Carlo check of the rejection-count increase bound.
    Thm1,
    /// Upper bound on the FDR increase and lower bound on `k_{+c}` under strong signal.
    Thm3,
    /// Law of the rejection count under uniform p-values.
    Rejectzero,
    /// Ballot probability `1 - x/n`.
    Ballot,
    /// `P(k_{+c} = c | tail nulls)` under uniform p-values.
    Kplusc,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub n0: usize,
    #[arg(long)]
    pub q: f64,
    /// Alternative mean; a comma-separated list with --move1-table.
    #[arg(long, value_delimiter = ',', required = true)]
    pub mu1: Vec<f64>,
    #[arg(long)]
    pub c: usize,
    #[arg(long)]
    pub reps: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "increase")]
    pub attack: AttackArg,
    #[arg(long, value_enum, default_value = "omniscient")]
    pub adversary: AdversaryArg,
    #[arg(long, value_enum, default_value = "largest-p")]
    pub source_rule: SourceRuleArg,
    #[arg(long, value_enum, default_value = "complement")]
    pub tail: TailArg,
    /// Compare MOVE-1 with INCREASE-1 for every --mu1 value.
    #[arg(long)]
    pub move1_table: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub which: Which,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub n0: Option<usize>,
    #[arg(long)]
    pub mu1: Option<f64>,
    #[arg(long)]
    pub c: Option<usize>,
    /// Balls for the ballot probability.
    #[arg(long)]
    pub x: Option<usize>,
    /// Rejection count for a single probability; the whole law otherwise.
    #[arg(long)]
    pub ell: Option<usize>,
    /// Null p-values in the tail.
    #[arg(long)]
    pub b0_tail: Option<usize>,
    #[arg(long, value_enum, default_value = "as-printed")]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value = "complement")]
    pub tail: TailArg,
    /// Monte Carlo replications; 0 skips the simulation where it is optional.
    #[arg(long, default_value_t = 10_000)]
    pub mc_reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QsweepArgs {
    #[arg(long)]
    pub mu1: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 900)]
    pub n0: usize,
    #[arg(long, default_value_t = 1000)]
    pub reps_per_q: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated levels; 0.01, 0.02, ..., 0.99 by default.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "complement")]
    pub tail: TailArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConformalArgs {
    /// Outlier noise inflation factors.
    #[arg(long, value_delimiter = ',', default_value = "1,1.5,2,2.5,3")]
    pub a: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,5,10,50")]
    pub c: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    #[arg(long, default_value_t = 1000)]
    pub n_train: usize,
    #[arg(long, default_value_t = 1000)]
    pub n_cal: usize,
    #[arg(long, default_value_t = 1000)]
    pub n_test: usize,
    #[arg(long, default_value_t = 0.1)]
    pub outlier_fraction: f64,
    /// Neighbours averaged by the score.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub q: f64,
    #[arg(long, value_enum, default_value = "cal-plus-one")]
    pub denominator: DenominatorArg,
    /// Precomputed scores (`id,score,label,split`) instead of synthetic data.
    #[arg(long)]
    pub ingest: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AttackArgs {
    /// Labeled p-values (`test_id,p_value,label`).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub q: f64,
    #[arg(long, value_enum)]
    pub attack: AttackArg,
    #[arg(long, default_value_t = 1)]
    pub c: usize,
    #[arg(long, value_enum, default_value = "omniscient")]
    pub adversary: AdversaryArg,
    #[arg(long, value_enum, default_value = "largest-p")]
    pub source_rule: SourceRuleArg,
    #[arg(long, value_enum, default_value = "p")]
    pub metric: MetricArg,
    /// Drives the oblivious adversary's choice of sources.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
