use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use bhadv_core::attack::{increase_c_with, move_1_with, IncreaseOptions};
use bhadv_core::bounds::{
    ballot_prob, increase_mc, k_plus_c_eq_c_mc, k_plus_c_eq_c_prob, l_c_bound, reject_zero_law, reject_zero_pmf,
    rejection_count_law_mc, thm1_rhs_mc, thm3_bounds, ClampedProb, IncreaseMc, McEstimate, Thm1Report, Thm3Report,
};
use bhadv_core::conformal::{ingested_pvalues, read_score_csv, run_conformal_attack, ConformalConfig};
use bhadv_core::gauss::GaussianAltModel;
use bhadv_core::rng::stream;
use bhadv_core::sim::{default_q_grid, run_move1_table, run_paired, run_qsweep, Move1Row, SimAggregates, SimConfig};
use bhadv_core::{BinSystem, LabeledPValues};
use serde::Serialize;

use crate::args::{AttackArg, AttackArgs, BoundArgs, ConformalArgs, QsweepArgs, SimulateArgs, Which};
use crate::error::{CliError, Result};
use crate::report::{sig10, to_csv, to_json, OutputDir};

type Stdout<'a> = &'a mut (dyn Write + Send);

/// Prints `shown` and, with an output directory, writes `files` plus a manifest.
#[allow(clippy::too_many_arguments)]
fn emit<C: Serialize>(
    stdout: Stdout,
    out: Option<&Path>,
    subcommand: &str,
    config: &C,
    seed: Option<u64>,
    start: Instant,
    files: &[(&str, &str)],
    shown: &str,
) -> Result<()> {
    stdout
        .write_all(shown.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))?;
    if let Some(dir) = out {
        let mut od = OutputDir::create(dir)?;
        for (name, contents) in files {
            od.write(name, contents)?;
        }
        od.finish(subcommand, config, seed, start.elapsed())?;
    }
    Ok(())
}

fn opt_cell<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    config: &'a SimConfig,
    master_seed: u64,
    aggregates: &'a SimAggregates,
}

#[derive(Serialize)]
struct Move1Report<'a> {
    config: &'a SimConfig,
    master_seed: u64,
    rows: &'a [Move1Row],
}

const RECORD_HEADER: [&str; 15] = [
    "rep",
    "k",
    "fdp_before",
    "tail_null",
    "tail_total",
    "k_plus_c",
    "prefix_null_at_k_plus_c",
    "increase_k_after",
    "increase_fdp_after",
    "increase_moved",
    "increase_z_l1",
    "move1_k_after",
    "move1_fdp_after",
    "move1_moved",
    "move1_z_l1",
];

const MOVE1_HEADER: [&str; 10] = [
    "mu1",
    "move1_fdp",
    "move1_fdp_se",
    "increase_fdp",
    "increase_fdp_se",
    "move1_z_l1",
    "move1_z_l1_se",
    "increase_z_l1",
    "increase_z_l1_se",
    "dominance_violations",
];

pub fn simulate(args: &SimulateArgs, stdout: Stdout) -> Result<()> {
    let start = Instant::now();
    let mut cfg = SimConfig::new(args.n, args.n0, args.q, args.mu1[0], args.c, args.reps, args.seed);
    cfg.attack = args.attack.into();
    cfg.adversary = args.adversary.into();
    cfg.source_rule = args.source_rule.into();
    cfg.tail = args.tail.into();

    if args.move1_table {
        if args.c != 1 {
            return Err(CliError::usage("--move1-table compares single moves and needs --c 1"));
        }
        let rows = run_move1_table(&cfg, &args.mu1)?;
        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    sig10(r.mu1),
                    sig10(r.move1_fdp.mean),
                    sig10(r.move1_fdp.se),
                    sig10(r.increase_fdp.mean),
                    sig10(r.increase_fdp.se),
                    sig10(r.move1_z_l1.mean),
                    sig10(r.move1_z_l1.se),
                    sig10(r.increase_z_l1.mean),
                    sig10(r.increase_z_l1.se),
                    r.dominance_violations.to_string(),
                ]
            })
            .collect();
        let csv = to_csv(&MOVE1_HEADER, &csv_rows);
        let json = to_json(&Move1Report {
            config: &cfg,
            master_seed: args.seed,
            rows: &rows,
        });
        let files = [("move1_table.csv", csv.as_str()), ("move1_table.json", json.as_str())];
        return emit(
            stdout,
            args.out.as_deref(),
            "simulate",
            args,
            Some(args.seed),
            start,
            &files,
            &json,
        );
    }

    if args.mu1.len() != 1 {
        return Err(CliError::usage("several --mu1 values need --move1-table"));
    }
    let res = run_paired(&cfg)?;
    let rows: Vec<Vec<String>> = res
        .records
        .iter()
        .map(|r| {
            let mut row = vec![
                r.rep.to_string(),
                r.k.to_string(),
                sig10(r.fdp_before),
                r.tail_null.to_string(),
                r.tail_total.to_string(),
                r.k_plus_c.to_string(),
                r.prefix_null_at_k_plus_c.to_string(),
            ];
            for o in [r.increase, r.move1] {
                row.push(opt_cell(o, |o| o.k_after.to_string()));
                row.push(opt_cell(o, |o| sig10(o.fdp_after)));
                row.push(opt_cell(o, |o| o.moved.to_string()));
                row.push(opt_cell(o, |o| sig10(o.z_l1_distance)));
            }
            row
        })
        .collect();
    let csv = to_csv(&RECORD_HEADER, &rows);
    let json = to_json(&SimulateReport {
        config: &res.config,
        master_seed: args.seed,
        aggregates: &res.aggregates,
    });
    let files = [
        ("simulate_records.csv", csv.as_str()),
        ("simulate_aggregate.json", json.as_str()),
    ];
    emit(
        stdout,
        args.out.as_deref(),
        "simulate",
        args,
        Some(args.seed),
        start,
        &files,
        &json,
    )
}

fn need<T>(value: Option<T>, flag: &str, which: Which) -> Result<T> {
    value.ok_or_else(|| {
        let name = serde_json::to_value(which)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned));
        CliError::usage(format!("--which {} needs --{flag}", name.unwrap_or_default()))
    })
}

fn model(args: &BoundArgs) -> Result<GaussianAltModel> {
    let w = args.which;
    let m = GaussianAltModel::new(
        need(args.mu1, "mu1", w)?,
        need(args.q, "q", w)?,
        need(args.n, "n", w)?,
        need(args.n0, "n0", w)?,
    )?;
    Ok(m.with_tail(args.tail.into()))
}

#[derive(Serialize)]
struct Thm1Output {
    report: Thm1Report,
    holds_within_3se: bool,
}

#[derive(Serialize)]
struct Thm3Output {
    bounds: Thm3Report,
    mc: Option<IncreaseMc>,
    /// `delta_c <= upper + 3 SE`.
    upper_holds_3se: Option<bool>,
    /// `E[k_{+c} | tail >= c] >= lower - 3 SE`.
    lower_holds_3se: Option<bool>,
}

#[derive(Serialize)]
struct RejectZeroOutput {
    n: usize,
    q: f64,
    ell: Option<usize>,
    pmf: Option<f64>,
    law: Option<Vec<f64>>,
    mc_law: Option<Vec<f64>>,
    total_variation: Option<f64>,
}

#[derive(Serialize)]
struct BallotOutput {
    n: usize,
    x: usize,
    prob: f64,
}

#[derive(Serialize)]
struct KPlusCOutput {
    n: usize,
    n0: usize,
    q: f64,
    c: usize,
    b0_tail: usize,
    exact: ClampedProb,
    mc: Option<McEstimate>,
}

pub fn bound(args: &BoundArgs, stdout: Stdout) -> Result<()> {
    let start = Instant::now();
    let w = args.which;
    let mc = (args.mc_reps > 0).then_some(args.mc_reps);
    let (json, name) = match w {
        Which::Lc => {
            let report = l_c_bound(&model(args)?, need(args.c, "c", w)?, args.variant.into())?;
            (to_json(&report), "bound_lc.json")
        }
        Which::Thm1 => {
            let reps = need(mc, "mc-reps", w)?;
            let report = thm1_rhs_mc(&model(args)?, need(args.c, "c", w)?, reps, args.seed)?;
            let holds_within_3se = report.holds_within(3.0);
            (
                to_json(&Thm1Output {
                    report,
                    holds_within_3se,
                }),
                "bound_thm1.json",
            )
        }
        Which::Thm3 => {
            let m = model(args)?;
            let c = need(args.c, "c", w)?;
            let bounds = thm3_bounds(&m, c)?;
            let mc = mc.map(|reps| increase_mc(&m, c, reps, args.seed)).transpose()?;
            let upper = mc
                .as_ref()
                .map(|e| e.delta_c.mean <= bounds.upper_on_delta_c + 3.0 * e.delta_c.std_error);
            let lower = mc.as_ref().map(|e| {
                let k = e.k_plus_c_given_tail;
                k.mean >= bounds.lower_on_k_plus_c - 3.0 * k.std_error
            });
            let out = Thm3Output {
                bounds,
                mc,
                upper_holds_3se: upper,
                lower_holds_3se: lower,
            };
            (to_json(&out), "bound_thm3.json")
        }
        Which::Rejectzero => {
            let n = need(args.n, "n", w)?;
            let q = need(args.q, "q", w)?;
            let out = match args.ell {
                Some(ell) => RejectZeroOutput {
                    n,
                    q,
                    ell: Some(ell),
                    pmf: Some(reject_zero_pmf(n, q, ell)?),
                    law: None,
                    mc_law: None,
                    total_variation: None,
                },
                None => {
                    let law = reject_zero_law(n, q)?;
                    let mc_law = mc
                        .map(|reps| rejection_count_law_mc(n, q, reps, args.seed))
                        .transpose()?;
                    let tv = mc_law
                        .as_ref()
                        .map(|m| law.iter().zip(m).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0);
                    RejectZeroOutput {
                        n,
                        q,
                        ell: None,
                        pmf: None,
                        law: Some(law),
                        mc_law,
                        total_variation: tv,
                    }
                }
            };
            (to_json(&out), "bound_rejectzero.json")
        }
        Which::Ballot => {
            let n = need(args.n, "n", w)?;
            let x = need(args.x, "x", w)?;
            (
                to_json(&BallotOutput {
                    n,
                    x,
                    prob: ballot_prob(n, x)?,
                }),
                "bound_ballot.json",
            )
        }
        Which::Kplusc => {
            let n = need(args.n, "n", w)?;
            let n0 = need(args.n0, "n0", w)?;
            let q = need(args.q, "q", w)?;
            let c = need(args.c, "c", w)?;
            let b0_tail = need(args.b0_tail, "b0-tail", w)?;
            let exact = k_plus_c_eq_c_prob(n, n0, q, c, b0_tail)?;
            let mc = mc
                .map(|reps| k_plus_c_eq_c_mc(n, n0, q, c, b0_tail, reps, args.seed))
                .transpose()?;
            let out = KPlusCOutput {
                n,
                n0,
                q,
                c,
                b0_tail,
                exact,
                mc,
            };
            (to_json(&out), "bound_kplusc.json")
        }
    };
    emit(
        stdout,
        args.out.as_deref(),
        "bound",
        args,
        Some(args.seed),
        start,
        &[(name, json.as_str())],
        &json,
    )
}

pub fn qsweep(args: &QsweepArgs, stdout: Stdout) -> Result<()> {
    let start = Instant::now();
    let grid = args.grid.clone().unwrap_or_else(default_q_grid);
    if grid.is_empty() {
        return Err(CliError::usage("--grid needs at least one level"));
    }
    let mut base = SimConfig::new(args.n, args.n0, grid[0], args.mu1, 1, args.reps_per_q, args.seed);
    base.tail = args.tail.into();
    let rows: Vec<Vec<String>> = run_qsweep(&grid, &base)?
        .iter()
        .map(|r| {
            [r.q, r.delta1_hat, r.delta1_se, r.l1_as_printed, r.l1_exact]
                .into_iter()
                .map(sig10)
                .collect()
        })
        .collect();
    let csv = to_csv(&["q", "delta1_hat", "delta1_se", "l1_as_printed", "l1_exact"], &rows);
    emit(
        stdout,
        args.out.as_deref(),
        "qsweep",
        args,
        Some(args.seed),
        start,
        &[("qsweep.csv", csv.as_str())],
        &csv,
    )
}

fn read_file(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| CliError::io(path, e))
}

pub fn conformal(args: &ConformalArgs, stdout: Stdout) -> Result<()> {
    let start = Instant::now();
    if let Some(path) = &args.ingest {
        return conformal_ingest(args, path, stdout, start);
    }
    let config = ConformalConfig {
        dim: args.dim,
        n_train: args.n_train,
        n_cal: args.n_cal,
        n_test: args.n_test,
        a_values: args.a.clone(),
        outlier_fraction: args.outlier_fraction,
        c_values: args.c.clone(),
        q: args.q,
        reps: args.reps,
        master_seed: args.seed,
        k_neighbors: args.k,
        denominator: args.denominator.into(),
    };
    let rows: Vec<Vec<String>> = run_conformal_attack(&config)?
        .iter()
        .map(|r| {
            vec![
                sig10(r.a),
                r.c.to_string(),
                sig10(r.fdp_before.mean),
                sig10(r.fdp_before.se),
                sig10(r.fdp_after.mean),
                sig10(r.fdp_after.se),
                sig10(r.k_increase.mean),
                sig10(r.k_increase.se),
                r.identity_violations.to_string(),
            ]
        })
        .collect();
    let header = [
        "a",
        "c",
        "fdp_before",
        "fdp_before_se",
        "fdp_after",
        "fdp_after_se",
        "k_increase",
        "k_increase_se",
        "identity_violations",
    ];
    let csv = to_csv(&header, &rows);
    emit(
        stdout,
        args.out.as_deref(),
        "conformal",
        args,
        Some(args.seed),
        start,
        &[("conformal.csv", csv.as_str())],
        &csv,
    )
}

fn conformal_ingest(args: &ConformalArgs, path: &Path, stdout: Stdout, start: Instant) -> Result<()> {
    let records = read_score_csv(read_file(path)?)?;
    let pv = ingested_pvalues(&records, args.denominator.into())?;
    let bins = BinSystem::new(pv.len(), args.q)?;
    let mut rng = stream(args.seed, 0);
    let mut rows = Vec::new();
    for &c in &args.c {
        let plan = increase_c_with(&pv, &bins, c, &IncreaseOptions::default(), &mut rng)?;
        rows.push(vec![
            c.to_string(),
            plan.k_before.to_string(),
            sig10(plan.fdp_before),
            plan.induced_k.to_string(),
            sig10(plan.fdp_after),
            plan.l0_distance.to_string(),
        ]);
    }
    let csv = to_csv(&["c", "k_before", "fdp_before", "k_after", "fdp_after", "moved"], &rows);
    let files = [("conformal_ingest.csv", csv.as_str())];
    emit(
        stdout,
        args.out.as_deref(),
        "conformal",
        args,
        Some(args.seed),
        start,
        &files,
        &csv,
    )
}

pub fn attack(args: &AttackArgs, stdout: Stdout) -> Result<()> {
    let start = Instant::now();
    if args.c == 0 {
        return Err(CliError::usage("--c must be at least 1"));
    }
    let pv = LabeledPValues::read_csv(read_file(&args.input)?)?;
    let bins = BinSystem::new(pv.len(), args.q)?;
    let plan = match args.attack {
        AttackArg::Increase => {
            let opts = IncreaseOptions {
                adversary: args.adversary.into(),
                source_rule: args.source_rule.into(),
                metric: args.metric.into(),
            };
            increase_c_with(&pv, &bins, args.c, &opts, &mut stream(args.seed, 0))?
        }
        AttackArg::Move1 if args.c == 1 => move_1_with(&pv, &bins, args.metric.into())?,
        AttackArg::Move1 => return Err(CliError::usage("move1 perturbs one p-value; use --c 1")),
        AttackArg::Both => return Err(CliError::usage("--attack takes increase or move1 here")),
    };
    let json = to_json(&plan);
    let mut perturbed = Vec::new();
    plan.apply(&pv)?.write_csv(&mut perturbed)?;
    let perturbed = String::from_utf8(perturbed).expect("CSV writer emits UTF-8");
    let files = [
        ("attack_plan.json", json.as_str()),
        ("perturbed.csv", perturbed.as_str()),
    ];
    emit(
        stdout,
        args.out.as_deref(),
        "attack",
        args,
        Some(args.seed),
        start,
        &files,
        &json,
    )
}
