use std::fs;
use std::path::Path;

use bhadv_cli::main_with;
use bhadv_core::bh::bh_sorted;
use bhadv_core::LabeledPValues;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn bhadv(args: &[&str]) -> Run {
    let full = std::iter::once("bhadv").chain(args.iter().copied());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with(full, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(run: &Run) -> Value {
    assert_eq!(run.code, 0, "{}", run.stderr);
    serde_json::from_str(&run.stdout).unwrap()
}

const FIVE_TESTS: &str = "test_id,p_value,label\n1,0.05,1\n2,0.2,1\n3,0.35,0\n4,0.77,0\n5,0.9,0\n";

#[test]
fn ballot_and_reject_zero_closed_forms() {
    let r = json(&bhadv(&["bound", "--which", "ballot", "--n", "5", "--x", "2"]));
    assert!((r["prob"].as_f64().unwrap() - 0.6).abs() < 1e-15);
    let r = json(&bhadv(&[
        "bound",
        "--which",
        "rejectzero",
        "--n",
        "50",
        "--q",
        "0.1",
        "--ell",
        "0",
    ]));
    assert!((r["pmf"].as_f64().unwrap() - 0.9).abs() < 1e-12);
}

#[test]
fn lower_bound_without_signal_has_no_divergence_term() {
    let r = json(&bhadv(&[
        "bound", "--which", "lc", "--q", "0.1", "--n", "1000", "--n0", "900", "--mu1", "0", "--c", "1",
    ]));
    assert_eq!(r["v_c"].as_f64(), Some(0.0));
    assert_eq!(r["variant"], "as_printed");
}

#[test]
fn lower_bound_reports_the_empty_bin() {
    let r = bhadv(&[
        "bound", "--which", "lc", "--q", "0.1", "--n", "1000", "--n0", "900", "--mu1", "40", "--c", "1",
    ]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("bin"), "{}", r.stderr);
}

#[test]
fn bound_flags_are_checked_per_quantity() {
    let r = bhadv(&["bound", "--which", "ballot", "--n", "5"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--x"));
}

#[test]
fn usage_and_domain_errors_exit_two() {
    let sim = [
        "simulate", "--n", "100", "--n0", "90", "--mu1", "1", "--c", "1", "--reps", "5", "--seed", "1",
    ];
    let mut bad_q = sim.to_vec();
    bad_q.extend(["--q", "1.5"]);
    assert_eq!(bhadv(&bad_q).code, 2);
    let r = bhadv(&["qsweep", "--n", "100"]);
    assert_eq!(r.code, 2);
    assert_eq!(r.stderr.lines().count(), 1);
    assert!(r.stderr.contains("--mu1"));
    assert_eq!(bhadv(&["conformal", "--a", "0.5", "--reps", "2"]).code, 2);
    assert_eq!(
        bhadv(&["--threads", "0", "bound", "--which", "ballot", "--n", "2", "--x", "1"]).code,
        2
    );
}

#[test]
fn help_exits_zero() {
    let r = bhadv(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("Exit codes"));
}

#[test]
fn attacks_on_the_five_test_instance() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("five.csv");
    fs::write(&input, FIVE_TESTS).unwrap();
    let input = input.to_str().unwrap();
    for attack in ["increase", "move1"] {
        let r = json(&bhadv(&[
            "attack", "--input", input, "--q", "0.5", "--attack", attack, "--c", "1",
        ]));
        assert_eq!(r["fdp_after"].as_f64(), Some(0.5), "{attack}");
    }
    assert_eq!(
        bhadv(&["attack", "--input", input, "--q", "0.5", "--attack", "increase", "--c", "0"]).code,
        2
    );
    assert_eq!(
        bhadv(&["attack", "--input", input, "--q", "0.5", "--attack", "move1", "--c", "2"]).code,
        2
    );
    let missing = tmp.path().join("missing.csv");
    assert_eq!(
        bhadv(&[
            "attack",
            "--input",
            missing.to_str().unwrap(),
            "--q",
            "0.5",
            "--attack",
            "increase"
        ])
        .code,
        3
    );
}

#[test]
fn schema_violations_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("bad.csv");
    fs::write(&input, "test_id,p_value,label\n1,1.5,0\n").unwrap();
    let r = bhadv(&[
        "attack",
        "--input",
        input.to_str().unwrap(),
        "--q",
        "0.5",
        "--attack",
        "increase",
    ]);
    assert_eq!(r.code, 2);
}

#[test]
fn perturbed_output_round_trips_through_bh() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("five.csv");
    fs::write(&input, FIVE_TESTS).unwrap();
    let out = tmp.path().join("run");
    let r = json(&bhadv(&[
        "attack",
        "--input",
        input.to_str().unwrap(),
        "--q",
        "0.5",
        "--attack",
        "increase",
        "--out",
        out.to_str().unwrap(),
    ]));
    let pv = LabeledPValues::read_csv(fs::File::open(out.join("perturbed.csv")).unwrap()).unwrap();
    let bh = bh_sorted(&pv, 0.5).unwrap();
    assert_eq!(bh.k as u64, r["induced_k"].as_u64().unwrap());
    assert_eq!(Some(bh.fdp), r["fdp_after"].as_f64());
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("attack_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["subcommand"], "attack");
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| !p.to_string_lossy().ends_with("_manifest.json"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn simulate_is_reproducible_across_runs_and_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    for (dir, threads) in dirs.iter().zip(["1", "1", "4"]) {
        let r = bhadv(&[
            "--threads",
            threads,
            "simulate",
            "--n",
            "200",
            "--n0",
            "180",
            "--q",
            "0.1",
            "--mu1",
            "2",
            "--c",
            "3",
            "--reps",
            "300",
            "--seed",
            "7",
            "--attack",
            "both",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(r.code, 0, "{}", r.stderr);
    }
    let first = read_dir_sorted(&dirs[0]);
    assert_eq!(first.len(), 2);
    assert_eq!(first, read_dir_sorted(&dirs[1]));
    assert_eq!(first, read_dir_sorted(&dirs[2]));
    let records = String::from_utf8(first[1].1.clone()).unwrap();
    assert_eq!(records.lines().count(), 301);
}

#[test]
fn single_level_grid_gives_one_row() {
    let r = bhadv(&[
        "qsweep",
        "--mu1",
        "0",
        "--n",
        "100",
        "--n0",
        "90",
        "--reps-per-q",
        "50",
        "--grid",
        "0.1",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "q,delta1_hat,delta1_se,l1_as_printed,l1_exact");
    assert!(lines[1].starts_with("0.1,"));
}

#[test]
fn move1_table_needs_single_moves() {
    let r = bhadv(&[
        "simulate",
        "--move1-table",
        "--n",
        "100",
        "--n0",
        "90",
        "--q",
        "0.1",
        "--mu1",
        "0,1",
        "--c",
        "2",
        "--reps",
        "5",
        "--seed",
        "1",
    ]);
    assert_eq!(r.code, 2);
    let r = json(&bhadv(&[
        "simulate",
        "--move1-table",
        "--n",
        "100",
        "--n0",
        "90",
        "--q",
        "0.1",
        "--mu1",
        "0,1",
        "--c",
        "1",
        "--reps",
        "20",
        "--seed",
        "1",
    ]));
    assert_eq!(r["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn conformal_ingest_path() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("scores.csv");
    let mut text = String::from("id,score,label,split\n");
    for i in 0..60 {
        text.push_str(&format!("{i},{},0,cal\n", (i * 7 % 60) as f64 / 10.0));
    }
    for i in 0..40 {
        let (score, label) = if i < 4 {
            (100.0 + i as f64, 1)
        } else {
            ((i * 11 % 40) as f64 / 7.0, 0)
        };
        text.push_str(&format!("{},{score},{label},test\n", 100 + i));
    }
    fs::write(&path, text).unwrap();
    let r = bhadv(&["conformal", "--ingest", path.to_str().unwrap(), "--c", "5"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r
        .stdout
        .starts_with("c,k_before,fdp_before,k_after,fdp_after,moved\n5,"));

    fs::write(&path, "id,score,label,split\n1,0.5,0,cal\n2,oops,0,test\n").unwrap();
    let r = bhadv(&["conformal", "--ingest", path.to_str().unwrap(), "--c", "5"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 3"), "{}", r.stderr);
}

#[test]
fn small_conformal_run_writes_table_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("conf");
    let r = bhadv(&[
        "conformal",
        "--a",
        "1,3",
        "--c",
        "1,5",
        "--reps",
        "5",
        "--dim",
        "4",
        "--n-train",
        "100",
        "--n-cal",
        "100",
        "--n-test",
        "100",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.lines().count(), 5);
    assert!(out.join("conformal.csv").exists());
    assert!(out.join("conformal_manifest.json").exists());
}

#[test]
fn binary_reads_threads_from_environment() {
    let bin = env!("CARGO_BIN_EXE_bhadv");
    let args = ["bound", "--which", "ballot", "--n", "3", "--x", "1"];
    let bad = std::process::Command::new(bin)
        .args(args)
        .env("BHADV_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let good = std::process::Command::new(bin)
        .args(args)
        .env("BHADV_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(good.status.code(), Some(0));
    let flag_wins = std::process::Command::new(bin)
        .args(["--threads", "1"])
        .args(args)
        .env("BHADV_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(flag_wins.status.code(), Some(0));
}

#[test]
fn fuzz_seed_arguments_parse() {
    use bhadv_cli::Cli;
    use clap::Parser;

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/cli_args");
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let args = std::iter::once("bhadv").chain(text.split('\0'));
        assert!(Cli::try_parse_from(args).is_ok(), "{}", path.display());
    }
}
