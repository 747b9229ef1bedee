//! Paired before/after replication studies under the Gaussian model.

use serde::{Deserialize, Serialize};

use crate::attack::{
    increase_c_with, k_plus_c, move_1_with, Adversary, IncreaseOptions, Metric, PerturbationPlan, SourceRule,
};
use crate::bh::{bh_bins, fdp_ratio};
use crate::bins::{BinLoads, TailRegion};
use crate::bounds::{l_c_bound, McVariant};
use crate::collection::{LabeledPValues, TestEntry, TestLabel};
use crate::error::{Error, Result};
use crate::gauss::GaussianAltModel;
use crate::rng::replicate;
use crate::stats::MeanSe;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    #[default]
    Increase,
    Move1,
    Both,
}

impl AttackKind {
    fn runs_increase(self) -> bool {
        matches!(self, AttackKind::Increase | AttackKind::Both)
    }

    fn runs_move1(self) -> bool {
        matches!(self, AttackKind::Move1 | AttackKind::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub n0: usize,
    pub q: f64,
    pub mu1: f64,
    pub c: usize,
    pub reps: usize,
    pub master_seed: u64,
    pub attack: AttackKind,
    pub adversary: Adversary,
    pub source_rule: SourceRule,
    pub tail: TailRegion,
}

impl SimConfig {
    /// INCREASE-c against an omniscient adversary with default conventions.
    pub fn new(n: usize, n0: usize, q: f64, mu1: f64, c: usize, reps: usize, master_seed: u64) -> Self {
        Self {
            n,
            n0,
            q,
            mu1,
            c,
            reps,
            master_seed,
            attack: AttackKind::default(),
            adversary: Adversary::default(),
            source_rule: SourceRule::default(),
            tail: TailRegion::default(),
        }
    }

    pub fn model(&self) -> Result<GaussianAltModel> {
        Ok(GaussianAltModel::new(self.mu1, self.q, self.n, self.n0)?.with_tail(self.tail))
    }

    pub fn validate(&self) -> Result<()> {
        self.model()?;
        if self.reps == 0 {
            return Err(Error::domain("need at least one replication"));
        }
        if self.c == 0 {
            return Err(Error::domain("attack budget c must be at least 1"));
        }
        Ok(())
    }
}

/// One attack's effect on one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub k_after: usize,
    pub fdp_after: f64,
    pub moved: usize,
    pub z_l1_distance: f64,
}

impl From<&PerturbationPlan> for AttackOutcome {
    fn from(plan: &PerturbationPlan) -> Self {
        Self {
            k_after: plan.induced_k,
            fdp_after: plan.fdp_after,
            moved: plan.l0_distance,
            z_l1_distance: plan.z_l1_distance.unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub rep: u64,
    pub k: usize,
    pub fdp_before: f64,
    pub tail_null: usize,
    pub tail_total: usize,
    /// `k_{+c}` read off the unperturbed loads.
    pub k_plus_c: usize,
    /// Null load of bins `1..=k_{+c}` on the unperturbed loads.
    pub prefix_null_at_k_plus_c: usize,
    pub increase: Option<AttackOutcome>,
    pub move1: Option<AttackOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackSummary {
    pub fdp_after: MeanSe,
    /// `k_after - k`.
    pub k_increase: MeanSe,
    pub z_l1_distance: MeanSe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimAggregates {
    pub fdp_before: MeanSe,
    pub k: MeanSe,
    pub increase: Option<AttackSummary>,
    pub move1: Option<AttackSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub records: Vec<RepRecord>,
    pub aggregates: SimAggregates,
}

impl SimResult {
    /// Share of replications whose post-attack FDP exceeds `level`.
    pub fn share_increase_fdp_above(&self, level: f64) -> f64 {
        let hits = self
            .records
            .iter()
            .filter(|r| r.increase.is_some_and(|o| o.fdp_after > level))
            .count();
        hits as f64 / self.records.len() as f64
    }
}

fn summarize(records: &[RepRecord], pick: impl Fn(&RepRecord) -> Option<AttackOutcome>) -> Option<AttackSummary> {
    let outs: Vec<(usize, AttackOutcome)> = records.iter().filter_map(|r| pick(r).map(|o| (r.k, o))).collect();
    if outs.is_empty() {
        return None;
    }
    Some(AttackSummary {
        fdp_after: MeanSe::of_iter(outs.iter().map(|(_, o)| o.fdp_after)),
        k_increase: MeanSe::of_iter(outs.iter().map(|(k, o)| o.k_after as f64 - *k as f64)),
        z_l1_distance: MeanSe::of_iter(outs.iter().map(|(_, o)| o.z_l1_distance)),
    })
}

fn collection(p: &[f64], n0: usize) -> LabeledPValues {
    let entries = p
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let label = if i < n0 {
                TestLabel::Null
            } else {
                TestLabel::Alternative
            };
            TestEntry::new(i as u64, x, label)
        })
        .collect();
    LabeledPValues::from_checked(entries)
}

/// Draws `reps` instances, attacks each one and records BH before and after.
pub fn run_paired(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let model = config.model()?;
    let bins = model.bins();
    let opts = IncreaseOptions {
        adversary: config.adversary,
        source_rule: config.source_rule,
        metric: Metric::Z,
    };
    let records: Vec<Result<RepRecord>> = replicate(config.master_seed, config.reps, |rep, rng| {
        let (mut z, mut p) = (Vec::with_capacity(model.n), Vec::with_capacity(model.n));
        model.draw_into(rng, &mut z, &mut p);
        let loads = BinLoads::from_split(&p, model.n0, &bins);
        let k = bh_bins(&loads);
        let kp = k_plus_c(&loads, config.c);
        let pv = collection(&p, model.n0);
        let increase = if config.attack.runs_increase() {
            Some(AttackOutcome::from(&increase_c_with(&pv, &bins, config.c, &opts, rng)?))
        } else {
            None
        };
        let move1 = if config.attack.runs_move1() {
            Some(AttackOutcome::from(&move_1_with(&pv, &bins, Metric::Z)?))
        } else {
            None
        };
        Ok(RepRecord {
            rep,
            k,
            fdp_before: fdp_ratio(loads.prefix_null(k), k),
            tail_null: loads.tail_null,
            tail_total: loads.tail_total(),
            k_plus_c: kp,
            prefix_null_at_k_plus_c: loads.prefix_null(kp),
            increase,
            move1,
        })
    });
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    let aggregates = SimAggregates {
        fdp_before: MeanSe::of_iter(records.iter().map(|r| r.fdp_before)),
        k: MeanSe::of_iter(records.iter().map(|r| r.k as f64)),
        increase: summarize(&records, |r| r.increase),
        move1: summarize(&records, |r| r.move1),
    };
    Ok(SimResult {
        config: *config,
        records,
        aggregates,
    })
}

/// One row of the MOVE-1 versus INCREASE-1 comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Move1Row {
    pub mu1: f64,
    pub move1_fdp: MeanSe,
    pub increase_fdp: MeanSe,
    pub move1_z_l1: MeanSe,
    pub increase_z_l1: MeanSe,
    /// Replications where MOVE-1 did worse than INCREASE-1; always zero.
    pub dominance_violations: usize,
}

/// Runs MOVE-1 and INCREASE-1 on the same instances for each `mu1`.
/// INCREASE-1 moves the tail null nearest the bins, which is also the
/// cheapest one in z-distance.
pub fn run_move1_table(base: &SimConfig, mus: &[f64]) -> Result<Vec<Move1Row>> {
    mus.iter()
        .map(|&mu1| {
            let config = SimConfig {
                mu1,
                c: 1,
                attack: AttackKind::Both,
                adversary: Adversary::Omniscient,
                source_rule: SourceRule::SmallestP,
                ..*base
            };
            let res = run_paired(&config)?;
            let (inc, mv) = (
                res.aggregates.increase.expect("both attacks ran"),
                res.aggregates.move1.expect("both attacks ran"),
            );
            let dominance_violations = res
                .records
                .iter()
                .filter(|r| r.move1.unwrap().fdp_after < r.increase.unwrap().fdp_after)
                .count();
            Ok(Move1Row {
                mu1,
                move1_fdp: mv.fdp_after,
                increase_fdp: inc.fdp_after,
                move1_z_l1: mv.z_l1_distance,
                increase_z_l1: inc.z_l1_distance,
                dominance_violations,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QsweepRow {
    pub q: f64,
    pub delta1_hat: f64,
    pub delta1_se: f64,
    pub l1_as_printed: f64,
    pub l1_exact: f64,
}

/// The default sweep `0.01, 0.02, ..., 0.99`.
pub fn default_q_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

/// For each `q`, the paired FDP increase of INCREASE-1 next to `L_1`. Every
/// grid point reuses the same replication streams.
pub fn run_qsweep(grid: &[f64], base: &SimConfig) -> Result<Vec<QsweepRow>> {
    grid.iter()
        .map(|&q| {
            let config = SimConfig {
                q,
                c: 1,
                attack: AttackKind::Increase,
                ..*base
            };
            let res = run_paired(&config)?;
            let diff = MeanSe::of_iter(
                res.records
                    .iter()
                    .map(|r| r.increase.expect("increase ran").fdp_after - r.fdp_before),
            );
            let model = config.model()?;
            Ok(QsweepRow {
                q,
                delta1_hat: diff.mean,
                delta1_se: diff.se,
                l1_as_printed: l_c_bound(&model, 1, McVariant::AsPrinted)?.l_c,
                l1_exact: l_c_bound(&model, 1, McVariant::Exact)?.l_c,
            })
        })
        .collect()
}
