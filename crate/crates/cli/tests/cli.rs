//! End-to-end tests of the `tn` binary: exit codes, output schemas, config
//! precedence, and agreement with the library computed in-process.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use serde_json::Value;

use tn_core::gaussian::{fill_gaussian, sample_gaussian_tn, GaussianEnsembleSpec};
use tn_core::io::{load_tn, save_tn};
use tn_core::network::build_grid;
use tn_core::statmech::{kaufman_ln_partition, second_moment_exact, MomentParams};
use tn_core::swallow::contract_exact;

fn tn_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tn"))
}

fn run(args: &[&str]) -> Output {
    tn_bin().args(args).output().expect("spawn tn")
}

fn run_ok(args: &[&str]) -> (Value, String) {
    let out = run(args);
    assert!(
        out.status.success(),
        "tn {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).expect("utf-8 stdout");
    let doc: Value = serde_json::from_str(&stdout).expect("JSON stdout");
    (doc, String::from_utf8_lossy(&out.stderr).into_owned())
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tn-cli-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("create temp dir");
    dir
}

fn write_positive_grid(path: &Path, seed: u64) {
    let mut tn = build_grid(2, 3, 2).unwrap();
    fill_gaussian(&mut tn, Complex64::new(0.0, 0.0), seed);
    let entries_abs: Vec<Vec<Complex64>> = tn
        .tensors()
        .iter()
        .map(|t| {
            t.entries()
                .iter()
                .map(|e| Complex64::new(e.norm(), 0.0))
                .collect()
        })
        .collect();
    for (v, entries) in entries_abs.into_iter().enumerate() {
        let rank = tn.tensor(v).rank();
        tn.set_tensor(v, tn_core::tensor::Tensor::new(2, rank, entries).unwrap())
            .unwrap();
    }
    std::fs::write(path, save_tn(&tn).unwrap()).unwrap();
}

#[test]
fn generate_is_deterministic_and_matches_library_ensemble() {
    let dir = temp_dir("generate");
    let net = dir.join("net.json");
    let args = [
        "generate", "--L1", "2", "--L2", "2", "--d", "3", "--mu", "1.0", "--seed", "42",
    ];
    let out1 = run(&args);
    assert!(out1.status.success());
    let out2 = run(&args);
    assert_eq!(out1.stdout, out2.stdout, "same (config, seed), same bytes");

    let mut with_output: Vec<&str> = args.to_vec();
    let net_str = net.to_str().unwrap();
    with_output.extend_from_slice(&["-o", net_str]);
    assert!(run(&with_output).status.success());
    let text = std::fs::read_to_string(&net).unwrap();
    assert_eq!(text.as_bytes(), out1.stdout.as_slice());
    assert!(
        text.contains("\"meta\""),
        "header records the resolved config"
    );
    assert!(text.contains("\"seed\":42"));

    // The document is exactly the library's Gaussian torus ensemble.
    let loaded = load_tn(&text).unwrap();
    let reference = sample_gaussian_tn(&GaussianEnsembleSpec {
        l1: 2,
        l2: 2,
        bond_dim: 3,
        mean: Complex64::new(1.0, 0.0),
        seed: 42,
    })
    .unwrap();
    for v in 0..reference.num_vertices() {
        assert_eq!(loaded.tensor(v).entries(), reference.tensor(v).entries());
    }
}

#[test]
fn contract_exact_agrees_with_library() {
    let dir = temp_dir("exact");
    let net = dir.join("net.json");
    let net_str = net.to_str().unwrap();
    assert!(run(&[
        "generate", "--L1", "2", "--L2", "3", "--d", "2", "--mu", "0.8", "--seed", "5", "-o",
        net_str
    ])
    .status
    .success());

    let (doc, stderr) = run_ok(&["contract", "exact", "--input", net_str]);
    let tn = load_tn(&std::fs::read_to_string(&net).unwrap()).unwrap();
    let chi = contract_exact(&tn, None).unwrap();
    assert_eq!(doc["chi"]["re"].as_f64().unwrap(), chi.re);
    assert_eq!(doc["chi"]["im"].as_f64().unwrap(), chi.im);
    assert_eq!(doc["config"]["order"], "greedy");
    assert!(doc["config"]["budget"].as_u64().is_some());
    assert!(stderr.contains("chi ="), "human summary on stderr");

    // An explicit order gives the same value.
    let (doc2, _) = run_ok(&[
        "contract",
        "exact",
        "--input",
        net_str,
        "--order",
        "5,4,3,2,1,0",
    ]);
    let re2 = doc2["chi"]["re"].as_f64().unwrap();
    assert!((re2 - chi.re).abs() <= 1e-10 * chi.re.abs());
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["contract", "exact", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = run(&["contract", "exact"]);
    assert_eq!(out.status.code(), Some(2), "missing --input is usage");

    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_refusal_exits_3() {
    let dir = temp_dir("budget");
    let net = dir.join("net.json");
    let net_str = net.to_str().unwrap();
    assert!(
        run(&["generate", "--L1", "2", "--L2", "2", "--d", "2", "--seed", "1", "-o", net_str])
            .status
            .success()
    );

    let out = tn_bin()
        .args(["contract", "exact", "--input", net_str])
        .env("TN_BUDGET", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));

    let out = run(&["contract", "exact", "--input", net_str, "--budget", "2"]);
    assert_eq!(out.status.code(), Some(3));

    let out = tn_bin()
        .args(["contract", "exact", "--input", net_str])
        .env("TN_BUDGET", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "malformed TN_BUDGET is usage");
}

#[test]
fn barvinok_per_order_table_is_truncation_consistent() {
    let dir = temp_dir("barvinok");
    let net = dir.join("net.json");
    let net_str = net.to_str().unwrap();
    assert!(run(&[
        "generate", "--L1", "2", "--L2", "4", "--d", "4", "--mu", "0.5", "--seed", "7", "-o",
        net_str
    ])
    .status
    .success());

    let (doc2, _) = run_ok(&[
        "contract", "barvinok", "--input", net_str, "--mu", "0.5", "--m", "2",
    ]);
    let (doc6, _) = run_ok(&[
        "contract", "barvinok", "--input", net_str, "--mu", "0.5", "--m", "6",
    ]);
    let orders2 = doc2["per_order"].as_array().unwrap();
    let orders6 = doc6["per_order"].as_array().unwrap();
    assert_eq!(orders2.len(), 3);
    assert_eq!(orders6.len(), 7);
    // Lower-order estimates are prefixes of the deeper run.
    for k in 0..=2 {
        assert_eq!(orders2[k]["estimate"], orders6[k]["estimate"]);
    }
    assert_eq!(doc2["chi_hat"], orders2[2]["estimate"]);
    assert_eq!(doc6["certified"], Value::Bool(false));
    assert_eq!(doc6["embedding_degree"].as_u64().unwrap(), 60);

    // CSV carries the config header and one row per order.
    let out = run(&[
        "contract", "barvinok", "--input", net_str, "--mu", "0.5", "--m", "4", "--exact",
        "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# command: contract barvinok"));
    assert!(lines[1].starts_with("# config: {"));
    assert_eq!(lines[2], "order,estimate_re,estimate_im,rel_err");
    assert_eq!(lines.len(), 3 + 5);
}

#[test]
fn positive_mc_respects_additive_bound() {
    let dir = temp_dir("positive-mc");
    let net = dir.join("grid.json");
    write_positive_grid(&net, 31);
    let net_str = net.to_str().unwrap();

    let tn = load_tn(&std::fs::read_to_string(&net).unwrap()).unwrap();
    let chi = contract_exact(&tn, None).unwrap().re;

    let (doc, _) = run_ok(&[
        "contract",
        "positive-mc",
        "--input",
        net_str,
        "--eps",
        "0.1",
        "--seed",
        "1",
    ]);
    let chi_hat = doc["chi_hat"].as_f64().unwrap();
    let delta1 = doc["delta1"].as_f64().unwrap();
    assert_eq!(doc["num_trials"].as_u64().unwrap(), 1000);
    assert!(delta1 >= chi);
    assert!(
        (chi_hat - chi).abs() <= 0.1 * delta1,
        "chi_hat {chi_hat} vs chi {chi} (Delta_1 {delta1})"
    );

    // Determinism across reruns.
    let (doc2, _) = run_ok(&[
        "contract",
        "positive-mc",
        "--input",
        net_str,
        "--eps",
        "0.1",
        "--seed",
        "1",
    ]);
    assert_eq!(doc["chi_hat"], doc2["chi_hat"]);
}

#[test]
fn config_file_merges_with_flag_precedence() {
    let dir = temp_dir("config");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"l1": 3, "l2": 4, "beta_j": 0.3}"#).unwrap();
    let cfg_str = cfg.to_str().unwrap();

    let (doc, _) = run_ok(&["statmech", "kaufman", "--config", cfg_str]);
    assert_eq!(
        doc["ln_z"].as_f64().unwrap(),
        kaufman_ln_partition(3, 4, 0.3).unwrap()
    );

    // An explicit flag overrides the config value.
    let (doc, _) = run_ok(&["statmech", "kaufman", "--config", cfg_str, "--L2", "6"]);
    assert_eq!(doc["config"]["l2"].as_u64().unwrap(), 6);
    assert_eq!(
        doc["ln_z"].as_f64().unwrap(),
        kaufman_ln_partition(3, 6, 0.3).unwrap()
    );

    // Keys that do not apply to the subcommand are usage errors.
    std::fs::write(&cfg, r#"{"l1": 3, "l2": 4, "rho": 0.5}"#).unwrap();
    let out = run(&["statmech", "kaufman", "--config", cfg_str]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho"));
}

#[test]
fn moment_reports_both_exact_forms() {
    let (doc, _) = run_ok(&[
        "statmech", "moment", "--L1", "2", "--L2", "2", "--d", "2", "--z", "0.5",
    ]);
    let exact = second_moment_exact(&MomentParams {
        l1: 2,
        l2: 2,
        bond_dim: 2,
        z: Complex64::new(0.5, 0.0),
    })
    .unwrap();
    assert_eq!(doc["spin_sum"].as_f64().unwrap(), exact.spin_sum);
    assert_eq!(doc["ising_form"].as_f64().unwrap(), exact.ising_form);

    // Sweep CSV: one row per point, config header records the sweep.
    let out = run(&[
        "statmech",
        "moment",
        "--sweep-z",
        "0.25,0.5",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines.len(),
        2 + 1 + 2,
        "two header lines, columns, two rows"
    );
    assert!(lines[1].contains("\"sweep_z\":\"0.25,0.5\""));
    assert!(lines[3].starts_with("0.25,"));
}

#[test]
fn roots_ensemble_csv_rows_match_aggregate() {
    let (doc, _) = run_ok(&[
        "roots",
        "ensemble",
        "--L1",
        "2",
        "--L2",
        "2",
        "--d",
        "4",
        "--samples",
        "12",
        "--seed",
        "5",
    ]);
    let frac_zero = doc["frac_zero_small_disk"].as_f64().unwrap();
    let mean_big = doc["mean_count_big_disk"].as_f64().unwrap();

    let out = run(&[
        "roots",
        "ensemble",
        "--L1",
        "2",
        "--L2",
        "2",
        "--d",
        "4",
        "--samples",
        "12",
        "--seed",
        "5",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(3).collect();
    assert_eq!(rows.len(), 12);
    let mut zero_hits = 0usize;
    let mut big_total = 0usize;
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 4);
        if cells[2] == "0" {
            zero_hits += 1;
        }
        big_total += cells[3].parse::<usize>().unwrap();
    }
    assert_eq!(zero_hits as f64 / 12.0, frac_zero);
    assert_eq!(big_total as f64 / 12.0, mean_big);
}

#[test]
fn roots_analyze_reports_converged_roots() {
    let dir = temp_dir("analyze");
    let net = dir.join("net.json");
    let net_str = net.to_str().unwrap();
    assert!(run(&[
        "generate", "--L1", "2", "--L2", "2", "--d", "4", "--mu", "0.5", "--seed", "3", "-o",
        net_str
    ])
    .status
    .success());

    let (doc, _) = run_ok(&[
        "roots", "analyze", "--input", net_str, "--mu", "0.5", "--lambda", "0.0125",
    ]);
    assert_eq!(doc["degree"].as_u64().unwrap(), 4);
    let roots = doc["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 4);
    assert!(roots.iter().all(|r| r["converged"] == Value::Bool(true)));
    assert!(doc["jensen_residual"].as_f64().unwrap() <= 1e-6);
    assert_eq!(doc["config"]["mu"].as_f64().unwrap(), 0.5);
    // Perturbations are mild at mu = 0.5, d = 4: some sector is root-free.
    assert!(doc["rootfree_sector"].as_u64().is_some());
}
