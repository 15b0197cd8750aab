//! Subcommand implementations.

use std::time::Instant;

use num_complex::Complex64;
use serde_json::{Map, Value};

use tn_core::barvinok::{
    barvinok_estimate_with_budget, choose_m, exp_series, g_taylor_coefficients, log_series_tail,
    make_family, BarvinokParams, InterpolationFamily, DEFAULT_SUBSET_BUDGET,
};
use tn_core::gaussian::{fill_gaussian, sample_shifted_ones_tn};
use tn_core::io::{load_tn, save_tn};
use tn_core::network::{
    build_grid, build_random_regular, build_torus, contract_reference_with_budget, TensorNetwork,
};
use tn_core::positive_mc::{mc_estimate, plan_trials};
use tn_core::roots::{
    analyze_roots, corollary14_stats, count_in_disk, extract_coefficients_with_budget, find_roots,
    RootEnsembleSpec,
};
use tn_core::statmech::{
    critical_coupling, ising_bruteforce, kaufman_ln_partition, second_moment_exact,
    second_moment_mc, IsingSpec, MomentParams,
};
use tn_core::swallow::{
    delta_norms, greedy_order, plan_swallowing, swallow_contract, swallow_contract_with_budget,
};
use tn_core::util::splitmix64;

use crate::emit::{complex_value, csv_document, csv_f64, json_document, Sink};
use crate::errors::{CliError, CliResult};
use crate::opts::{json_f64, parse_f64_list, parse_order, Resolver};
use crate::{
    AnalyzeArgs, BarvinokArgs, BenchArgs, EnsembleArgs, ExactArgs, GenerateArgs, KaufmanArgs,
    MomentArgs, PositiveMcArgs,
};

/// Per-sample seed derivation shared with the ensemble statistics.
const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

fn read_network(path: &std::path::Path) -> CliResult<TensorNetwork> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    Ok(load_tn(&text)?)
}

fn format_choice(r: &mut Resolver, flag: Option<&str>) -> CliResult<String> {
    let format = r.presentation_string("format", flag, "json")?;
    if format != "json" && format != "csv" {
        return Err(CliError::Usage(format!(
            "format must be json or csv, got '{format}'"
        )));
    }
    Ok(format)
}

fn complex_human(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

// ---------------------------------------------------------------- generate

pub fn generate(args: GenerateArgs, mut r: Resolver) -> CliResult<()> {
    let graph = r.string("graph", args.graph.as_deref(), "torus")?;
    let d = r.usize("d", args.d, 2)?;
    let seed = r.u64("seed", args.seed, 0)?;
    let fill = r.string("fill", args.fill.as_deref(), "gaussian")?;
    let output = r.presentation_path("output", args.output.as_deref())?;

    if fill != "gaussian" && (args.mu.is_some() || args.mu_im.is_some()) {
        return Err(CliError::Usage(
            "--mu/--mu-im apply only to --fill gaussian".into(),
        ));
    }
    if fill != "shifted-ones" && args.weight.is_some() {
        return Err(CliError::Usage(
            "--weight applies only to --fill shifted-ones".into(),
        ));
    }

    // Lattice dimensions, when the graph family has them.
    let mut lattice = None;
    let mut tn = match graph.as_str() {
        "torus" | "grid" => {
            if args.vertices.is_some() || args.degree.is_some() {
                return Err(CliError::Usage(
                    "--vertices/--degree apply only to --graph regular".into(),
                ));
            }
            let l1 = r.usize("l1", args.l1, 2)?;
            let l2 = r.usize("l2", args.l2, 2)?;
            lattice = Some((l1, l2));
            if graph == "torus" {
                build_torus(l1, l2, d)?
            } else {
                build_grid(l1, l2, d)?
            }
        }
        "regular" => {
            if args.l1.is_some() || args.l2.is_some() {
                return Err(CliError::Usage(
                    "--L1/--L2 apply only to --graph torus|grid".into(),
                ));
            }
            let vertices = r.usize("vertices", args.vertices, 6)?;
            let degree = r.usize("degree", args.degree, 4)?;
            build_random_regular(vertices, degree, d, seed)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "graph must be torus, grid, or regular, got '{other}'"
            )));
        }
    };

    match fill.as_str() {
        "gaussian" => {
            let mu = r.f64("mu", args.mu, 1.0)?;
            let mu_im = r.f64("mu_im", args.mu_im, 0.0)?;
            // Regular graphs consume `seed` for the wiring; mix a distinct
            // entry seed so wiring and entries are independent draws.
            let entry_seed = if graph == "regular" {
                splitmix64(seed)
            } else {
                seed
            };
            fill_gaussian(&mut tn, Complex64::new(mu, mu_im), entry_seed);
        }
        "shifted-ones" => {
            let Some((l1, l2)) = lattice else {
                return Err(CliError::Usage(
                    "fill shifted-ones is defined for --graph torus".into(),
                ));
            };
            if graph != "torus" {
                return Err(CliError::Usage(
                    "fill shifted-ones is defined for --graph torus".into(),
                ));
            }
            let weight = r.f64("weight", args.weight, 1.0)?;
            // Rebuild through the ensemble sampler so the document matches
            // the library ensemble exactly.
            tn = sample_shifted_ones_tn(l1, l2, d, Complex64::new(weight, 0.0), seed)?;
        }
        "ones" => {}
        other => {
            return Err(CliError::Usage(format!(
                "fill must be gaussian, shifted-ones, or ones, got '{other}'"
            )));
        }
    }

    let text = save_tn(&tn)?;
    let config = r.finish()?;
    let meta = Map::from_iter([
        ("command".to_string(), Value::String("generate".into())),
        ("config".to_string(), Value::Object(config)),
    ]);
    let meta_line = format!(
        "  \"meta\": {},\n",
        serde_json::to_string(&Value::Object(meta)).expect("JSON serialization")
    );
    // The document starts "{\n"; splice the meta header right after it.
    let mut doc = String::with_capacity(text.len() + meta_line.len());
    doc.push_str("{\n");
    doc.push_str(&meta_line);
    doc.push_str(&text[2..]);

    eprintln!(
        "generated {graph} network: {} vertices, {} edges, d = {}, fill = {fill}, seed = {seed}",
        tn.num_vertices(),
        tn.num_edges(),
        tn.bond_dim()
    );
    Sink::new(output).write(&doc)
}

// ---------------------------------------------------------- contract exact

pub fn contract_exact(args: ExactArgs, mut r: Resolver) -> CliResult<()> {
    let input = r.required_path("input", args.input.as_deref())?;
    let order_text = r.string("order", args.order.as_deref(), "greedy")?;
    let budget = r.budget(args.budget)?;
    let output = r.presentation_path("output", args.output.as_deref())?;

    let tn = read_network(&input)?;
    let order = match parse_order(&order_text)? {
        Some(order) => order,
        None => greedy_order(&tn),
    };
    let plan = plan_swallowing(&tn, &order)?;
    let chi = swallow_contract_with_budget(&tn, &plan, budget)?;
    let norms = delta_norms(&tn, &plan)?;

    let config = r.finish()?;
    let mut body = Map::new();
    body.insert("chi".to_string(), complex_value(chi));
    body.insert("num_vertices".to_string(), Value::from(tn.num_vertices()));
    body.insert("num_edges".to_string(), Value::from(tn.num_edges()));
    body.insert("peak_cut".to_string(), Value::from(plan.peak_cut));
    body.insert(
        "peak_state_entries".to_string(),
        Value::from(u64::try_from(plan.peak_state_entries(tn.bond_dim())).unwrap_or(u64::MAX)),
    );
    body.insert("delta1".to_string(), json_f64(norms.delta1));
    body.insert("delta2".to_string(), json_f64(norms.delta2));
    body.insert(
        "order_used".to_string(),
        Value::Array(order.iter().map(|&v| Value::from(v as u64)).collect()),
    );

    eprintln!(
        "chi = {} (peak cut {}, Delta_1 = {:.6e})",
        complex_human(chi),
        plan.peak_cut,
        norms.delta1
    );
    Sink::new(output).write(&json_document("contract exact", config, body))
}

// ------------------------------------------------------- contract barvinok

/// Resolves the per-vertex mean normalizers: a constant `--mu` when given,
/// otherwise the empirical entry averages.
fn resolve_means(
    r: &mut Resolver,
    mu: Option<f64>,
    mu_im: Option<f64>,
    tn: &TensorNetwork,
) -> CliResult<Option<Vec<Complex64>>> {
    match r.opt_f64("mu", mu)? {
        Some(re) => {
            let im = r.f64("mu_im", mu_im, 0.0)?;
            Ok(Some(vec![Complex64::new(re, im); tn.num_vertices()]))
        }
        None => {
            if mu_im.is_some() {
                return Err(CliError::Usage("--mu-im requires --mu".into()));
            }
            r.note("mu", Value::String("empirical".into()));
            Ok(None)
        }
    }
}

/// State and subset enumeration budgets: a user-provided budget applies to
/// both; otherwise each falls back to its own default.
fn budget_pair(r: &mut Resolver, flag: Option<u64>) -> CliResult<(u64, u64)> {
    let state = r.budget(flag)?;
    let subset = if state == crate::opts::DEFAULT_BUDGET {
        DEFAULT_SUBSET_BUDGET
    } else {
        state
    };
    r.note("subset_budget", Value::from(subset));
    Ok((state, subset))
}

pub fn contract_barvinok(args: BarvinokArgs, mut r: Resolver) -> CliResult<()> {
    let input = r.required_path("input", args.input.as_deref())?;
    let rho = r.f64("rho", args.rho, 0.5)?;
    let eps = r.f64("eps", args.eps, 0.5)?;
    let exact = r.switch("exact", args.exact)?;
    let (state_budget, subset_budget) = budget_pair(&mut r, args.budget)?;
    let format = format_choice(&mut r, args.format.as_deref())?;
    let output = r.presentation_path("output", args.output.as_deref())?;

    let tn = read_network(&input)?;
    let d = tn.bond_dim() as f64;
    let z_end = Complex64::new(
        r.f64("z_end", args.z_end, d)?,
        r.f64("z_end_im", args.z_end_im, 0.0)?,
    );
    let means = resolve_means(&mut r, args.mu, args.mu_im, &tn)?;
    let m = match r.opt_usize("m", args.m)? {
        Some(m) => m,
        None => {
            let m = choose_m(tn.num_vertices(), eps, rho)?;
            r.note("m", Value::from(m as u64));
            m
        }
    };

    let family = make_family(&tn, means.as_deref(), z_end)?;
    let params = BarvinokParams::new(rho, z_end, m, eps)?;
    let est = barvinok_estimate_with_budget(&family, &params, subset_budget, state_budget)?;
    let chi_exact = if exact {
        let plan = plan_swallowing(&tn, &greedy_order(&tn))?;
        Some(swallow_contract_with_budget(&tn, &plan, state_budget)?)
    } else {
        None
    };

    let config = r.finish()?;
    let rel_err = |value: Complex64| {
        chi_exact.map(|chi| (value - chi).norm() / chi.norm().max(f64::MIN_POSITIVE))
    };

    if format == "csv" {
        let mut rows = Vec::with_capacity(est.per_order.len());
        for (order, &value) in est.per_order.iter().enumerate() {
            let mut row = format!("{order},{},{}", csv_f64(value.re), csv_f64(value.im));
            if let Some(e) = rel_err(value) {
                row.push(',');
                row.push_str(&csv_f64(e));
            }
            rows.push(row);
        }
        let columns = if exact {
            "order,estimate_re,estimate_im,rel_err"
        } else {
            "order,estimate_re,estimate_im"
        };
        eprintln!(
            "chi_hat = {} (m = {}, K = {}, tail bound {:.3e})",
            complex_human(est.chi_hat),
            est.m,
            est.embedding_degree,
            est.taylor_tail_bound
        );
        return Sink::new(output).write(&csv_document(
            "contract barvinok",
            &config,
            columns,
            &rows,
        ));
    }

    let mut body = Map::new();
    body.insert("chi_hat".to_string(), complex_value(est.chi_hat));
    body.insert("m".to_string(), Value::from(est.m as u64));
    body.insert(
        "embedding_degree".to_string(),
        Value::from(est.embedding_degree),
    );
    body.insert("beta".to_string(), json_f64(est.beta));
    body.insert(
        "taylor_tail_bound".to_string(),
        json_f64(est.taylor_tail_bound),
    );
    // The estimate alone does not verify the root-free region the error
    // bound assumes; `roots analyze` provides that certificate.
    body.insert("certified".to_string(), Value::Bool(false));
    let per_order: Vec<Value> = est
        .per_order
        .iter()
        .enumerate()
        .map(|(order, &value)| {
            let mut entry = Map::new();
            entry.insert("order".to_string(), Value::from(order as u64));
            entry.insert("estimate".to_string(), complex_value(value));
            if let Some(e) = rel_err(value) {
                entry.insert("rel_err".to_string(), json_f64(e));
            }
            Value::Object(entry)
        })
        .collect();
    body.insert("per_order".to_string(), Value::Array(per_order));
    if let Some(chi) = chi_exact {
        body.insert("chi_exact".to_string(), complex_value(chi));
    }

    eprintln!(
        "chi_hat = {} (m = {}, K = {}, beta = {:.6}, tail bound {:.3e})",
        complex_human(est.chi_hat),
        est.m,
        est.embedding_degree,
        est.beta,
        est.taylor_tail_bound
    );
    Sink::new(output).write(&json_document("contract barvinok", config, body))
}

// ---------------------------------------------------- contract positive-mc

pub fn contract_positive_mc(args: PositiveMcArgs, mut r: Resolver) -> CliResult<()> {
    let input = r.required_path("input", args.input.as_deref())?;
    let eps = r.f64("eps", args.eps, 0.1)?;
    let seed = r.u64("seed", args.seed, 0)?;
    let order_text = r.string("order", args.order.as_deref(), "greedy")?;
    let output = r.presentation_path("output", args.output.as_deref())?;

    let tn = read_network(&input)?;
    let order = parse_order(&order_text)?;
    let plan = plan_trials(&tn, order.as_deref())?;
    let est = mc_estimate(&plan, eps, seed)?;

    let config = r.finish()?;
    let mut body = Map::new();
    body.insert("chi_hat".to_string(), json_f64(est.chi_hat));
    body.insert("delta1".to_string(), json_f64(est.delta1));
    body.insert("num_trials".to_string(), Value::from(est.num_trials));
    body.insert("successes".to_string(), Value::from(est.successes));
    body.insert("certain".to_string(), Value::Bool(est.certain));
    body.insert(
        "additive_error_bound".to_string(),
        json_f64(eps * est.delta1),
    );

    eprintln!(
        "chi_hat = {} (Delta_1 = {:.6e}, {} / {} successes{})",
        est.chi_hat,
        est.delta1,
        est.successes,
        est.num_trials,
        if est.certain { ", exact zero" } else { "" }
    );
    Sink::new(output).write(&json_document("contract positive-mc", config, body))
}

// --------------------------------------------------------- statmech kaufman

pub fn statmech_kaufman(args: KaufmanArgs, mut r: Resolver) -> CliResult<()> {
    let l1 = r.usize("l1", args.l1, 4)?;
    let l2 = r.usize("l2", args.l2, 4)?;
    let beta_j = r.f64("beta_j", args.beta_j, critical_coupling())?;
    let output = r.presentation_path("output", args.output.as_deref())?;

    let ln_z = kaufman_ln_partition(l1, l2, beta_j)?;
    let config = r.finish()?;
    let mut body = Map::new();
    body.insert("ln_z".to_string(), json_f64(ln_z));
    body.insert("num_spins".to_string(), Value::from((l1 * l2) as u64));

    eprintln!("ln Z[{l1}x{l2}, beta J = {beta_j}] = {ln_z}");
    Sink::new(output).write(&json_document("statmech kaufman", config, body))
}

// ---------------------------------------------------------- statmech moment

pub fn statmech_moment(args: MomentArgs, mut r: Resolver) -> CliResult<()> {
    let l1 = r.usize("l1", args.l1, 2)?;
    let l2 = r.usize("l2", args.l2, 2)?;
    let d = r.usize("d", args.d, 2)?;
    let z_im = r.f64("z_im", args.z_im, 0.0)?;
    let sweep = r.opt_string("sweep_z", args.sweep_z.as_deref())?;
    let samples = r.opt_usize("samples", args.samples)?;
    let seed = r.u64("seed", args.seed, 0)?;
    let format = format_choice(&mut r, args.format.as_deref())?;
    let output = r.presentation_path("output", args.output.as_deref())?;

    let z_values: Vec<Complex64> = match &sweep {
        Some(list) => {
            if args.z.is_some() {
                return Err(CliError::Usage("--z conflicts with --sweep-z".into()));
            }
            parse_f64_list(list, "sweep-z")?
                .into_iter()
                .map(|re| Complex64::new(re, z_im))
                .collect()
        }
        None => vec![Complex64::new(r.f64("z", args.z, 0.5)?, z_im)],
    };
    if z_values.is_empty() {
        return Err(CliError::Usage(
            "sweep-z must list at least one point".into(),
        ));
    }

    struct Point {
        z: Complex64,
        spin_sum: f64,
        ising_form: f64,
        mc: Option<(f64, f64, usize)>,
    }
    let mut points = Vec::with_capacity(z_values.len());
    for (idx, &z) in z_values.iter().enumerate() {
        let params = MomentParams {
            l1,
            l2,
            bond_dim: d,
            z,
        };
        let exact = second_moment_exact(&params)?;
        // Sweep points draw from consecutive seeds so rows are independent.
        let mc = match samples {
            Some(n) => {
                let mc = second_moment_mc(&params, n, seed.wrapping_add(idx as u64))?;
                Some((mc.mean, mc.std_err, mc.num_samples))
            }
            None => None,
        };
        points.push(Point {
            z,
            spin_sum: exact.spin_sum,
            ising_form: exact.ising_form,
            mc,
        });
    }

    let config = r.finish()?;
    if format == "csv" {
        let columns = if samples.is_some() {
            "z_re,z_im,spin_sum,ising_form,mc_mean,mc_std_err,mc_samples"
        } else {
            "z_re,z_im,spin_sum,ising_form"
        };
        let rows: Vec<String> = points
            .iter()
            .map(|p| {
                let mut row = format!(
                    "{},{},{},{}",
                    csv_f64(p.z.re),
                    csv_f64(p.z.im),
                    csv_f64(p.spin_sum),
                    csv_f64(p.ising_form)
                );
                if let Some((mean, std_err, n)) = p.mc {
                    row.push_str(&format!(",{},{},{n}", csv_f64(mean), csv_f64(std_err)));
                }
                row
            })
            .collect();
        eprintln!("{} moment point(s) written", points.len());
        return Sink::new(output).write(&csv_document("statmech moment", &config, columns, &rows));
    }

    let point_value = |p: &Point| {
        let mut entry = Map::new();
        entry.insert("z".to_string(), complex_value(p.z));
        entry.insert("spin_sum".to_string(), json_f64(p.spin_sum));
        entry.insert("ising_form".to_string(), json_f64(p.ising_form));
        if let Some((mean, std_err, n)) = p.mc {
            let mut mc = Map::new();
            mc.insert("mean".to_string(), json_f64(mean));
            mc.insert("std_err".to_string(), json_f64(std_err));
            mc.insert("num_samples".to_string(), Value::from(n as u64));
            entry.insert("mc".to_string(), Value::Object(mc));
        }
        Value::Object(entry)
    };
    let mut body = Map::new();
    if points.len() == 1 {
        if let Value::Object(fields) = point_value(&points[0]) {
            for (k, v) in fields {
                body.insert(k, v);
            }
        }
        eprintln!(
            "E|chi|^2 = {:.9e} (Ising form {:.9e})",
            points[0].spin_sum, points[0].ising_form
        );
    } else {
        body.insert(
            "points".to_string(),
            Value::Array(points.iter().map(point_value).collect()),
        );
        eprintln!("{} moment points written", points.len());
    }
    Sink::new(output).write(&json_document("statmech moment", config, body))
}

// ------------------------------------------------------------ roots analyze

pub fn roots_analyze(args: AnalyzeArgs, mut r: Resolver) -> CliResult<()> {
    let input = r.required_path("input", args.input.as_deref())?;
    let lambda = r.opt_f64("lambda", args.lambda)?;
    let (state_budget, subset_budget) = budget_pair(&mut r, args.budget)?;
    let output = r.presentation_path("output", args.output.as_deref())?;

    let tn = read_network(&input)?;
    let d = tn.bond_dim() as f64;
    let z_end = Complex64::new(
        r.f64("z_end", args.z_end, d)?,
        r.f64("z_end_im", args.z_end_im, 0.0)?,
    );
    let means = resolve_means(&mut r, args.mu, args.mu_im, &tn)?;
    let radii = match r.opt_string("radii", args.radii.as_deref())? {
        Some(list) => parse_f64_list(&list, "radii")?,
        None => {
            let radii = match lambda {
                Some(l) => vec![l, 1.0 - l],
                None => vec![0.5, 1.0],
            };
            r.note(
                "radii",
                Value::Array(radii.iter().map(|&x| json_f64(x)).collect()),
            );
            radii
        }
    };

    let family = make_family(&tn, means.as_deref(), z_end)?;
    let p = extract_coefficients_with_budget(&family, subset_budget, state_budget)?;
    let report = analyze_roots(&p, &radii, lambda)?;

    let config = r.finish()?;
    let mut body = Map::new();
    body.insert("degree".to_string(), Value::from(report.degree as u64));
    body.insert(
        "coefficients".to_string(),
        Value::Array(p.coefficients().iter().map(|&c| complex_value(c)).collect()),
    );
    let roots: Vec<Value> = report
        .roots
        .iter()
        .zip(&report.residuals)
        .zip(&report.converged)
        .map(|((&root, &residual), &converged)| {
            let mut entry = Map::new();
            entry.insert("re".to_string(), json_f64(root.re));
            entry.insert("im".to_string(), json_f64(root.im));
            entry.insert("residual".to_string(), json_f64(residual));
            entry.insert("converged".to_string(), Value::Bool(converged));
            Value::Object(entry)
        })
        .collect();
    body.insert("roots".to_string(), Value::Array(roots));
    body.insert(
        "disk_counts".to_string(),
        Value::Array(
            report
                .disk_counts
                .iter()
                .map(|&(radius, count)| {
                    let mut entry = Map::new();
                    entry.insert("radius".to_string(), json_f64(radius));
                    entry.insert("count".to_string(), Value::from(count as u64));
                    Value::Object(entry)
                })
                .collect(),
        ),
    );
    body.insert("jensen_radius".to_string(), json_f64(report.jensen_radius));
    body.insert(
        "jensen_residual".to_string(),
        report.jensen_residual.map(json_f64).unwrap_or(Value::Null),
    );
    body.insert(
        "rootfree_sector".to_string(),
        report
            .rootfree_sector
            .map(Value::from)
            .unwrap_or(Value::Null),
    );

    eprintln!(
        "degree {} polynomial, {} roots ({}), Jensen residual {}",
        report.degree,
        report.roots.len(),
        if report.converged.iter().all(|&c| c) {
            "all converged"
        } else {
            "NOT all converged"
        },
        report
            .jensen_residual
            .map(|x| format!("{x:.3e}"))
            .unwrap_or_else(|| "skipped".to_string())
    );
    Sink::new(output).write(&json_document("roots analyze", config, body))
}

// ----------------------------------------------------------- roots ensemble

pub fn roots_ensemble(args: EnsembleArgs, mut r: Resolver) -> CliResult<()> {
    let l1 = r.usize("l1", args.l1, 2)?;
    let l2 = r.usize("l2", args.l2, 2)?;
    let d = r.usize("d", args.d, 4)?;
    let amplitude = r.f64("amplitude", args.amplitude, 1.0)?;
    let lambda = r.f64("lambda", args.lambda, 1.0 / 80.0)?;
    let samples = r.usize("samples", args.samples, 200)?;
    let seed = r.u64("seed", args.seed, 0)?;
    let format = format_choice(&mut r, args.format.as_deref())?;
    let output = r.presentation_path("output", args.output.as_deref())?;

    let spec = RootEnsembleSpec {
        l1,
        l2,
        bond_dim: d,
        amplitude,
        seed,
    };
    let config = r.finish()?;

    if format == "csv" {
        // One row per sample, with the same per-sample seed derivation the
        // aggregate statistics use.
        let n = l1 * l2;
        let weight = Complex64::new(amplitude * d as f64, 0.0);
        let z_end = Complex64::new(d as f64, 0.0);
        let means = vec![Complex64::ONE; n];
        let mut rows = Vec::with_capacity(samples);
        for k in 0..samples {
            let sample_seed = splitmix64(seed ^ (k as u64).wrapping_mul(SEED_STRIDE));
            let tn = sample_shifted_ones_tn(l1, l2, d, weight, sample_seed)?;
            let family = make_family(&tn, Some(&means), z_end)?;
            let p = extract_coefficients_with_budget(
                &family,
                DEFAULT_SUBSET_BUDGET,
                crate::opts::DEFAULT_BUDGET,
            )?;
            let finding = find_roots(&p)?;
            if !finding.all_converged() {
                return Err(CliError::Runtime(format!(
                    "root finding stalled on sample {k}"
                )));
            }
            rows.push(format!(
                "{k},{sample_seed},{},{}",
                count_in_disk(&finding.roots, lambda),
                count_in_disk(&finding.roots, 1.0 - lambda)
            ));
        }
        eprintln!("{samples} ensemble samples written");
        return Sink::new(output).write(&csv_document(
            "roots ensemble",
            &config,
            "sample,sample_seed,count_small_disk,count_large_disk",
            &rows,
        ));
    }

    let stats = corollary14_stats(&spec, lambda, samples)?;
    let mut body = Map::new();
    body.insert("num_samples".to_string(), Value::from(stats.num_samples));
    body.insert("c".to_string(), json_f64(stats.c));
    body.insert(
        "frac_zero_small_disk".to_string(),
        json_f64(stats.frac_zero_small_disk),
    );
    body.insert(
        "frac_zero_sigma".to_string(),
        json_f64(stats.frac_zero_sigma),
    );
    body.insert(
        "mean_count_big_disk".to_string(),
        json_f64(stats.mean_count_big_disk),
    );
    body.insert(
        "mean_count_sigma".to_string(),
        json_f64(stats.mean_count_sigma),
    );
    body.insert(
        "prob_nonzero_bound".to_string(),
        json_f64(stats.prob_nonzero_bound),
    );
    body.insert("mean_bound".to_string(), json_f64(stats.mean_bound));

    eprintln!(
        "Pr[N({lambda}) >= 1] = {:.4} (bound {:.4}); mean N({}) = {:.4} (bound {:.4})",
        1.0 - stats.frac_zero_small_disk,
        stats.prob_nonzero_bound,
        1.0 - lambda,
        stats.mean_count_big_disk,
        stats.mean_bound
    );
    Sink::new(output).write(&json_document("roots ensemble", config, body))
}

// ------------------------------------------------------------------- bench

pub fn bench(args: BenchArgs, mut r: Resolver) -> CliResult<()> {
    let suite = r.string("suite", args.suite.as_deref(), "all")?;
    let repeat = r.usize("repeat", args.repeat, 3)?.max(1);
    let format = format_choice(&mut r, args.format.as_deref())?;
    let output = r.presentation_path("output", args.output.as_deref())?;
    let known = ["all", "swallow", "series", "kaufman"];
    if !known.contains(&suite.as_str()) {
        return Err(CliError::Usage(format!(
            "suite must be one of {known:?}, got '{suite}'"
        )));
    }

    struct Workload {
        name: &'static str,
        group: &'static str,
        run: Box<dyn Fn() -> CliResult<()>>,
    }
    let mut workloads: Vec<Workload> = Vec::new();

    {
        let mut tn = build_torus(3, 4, 2)?;
        fill_gaussian(&mut tn, Complex64::new(1.0, 0.0), 1);
        let plan = plan_swallowing(&tn, &greedy_order(&tn))?;
        workloads.push(Workload {
            name: "swallow_torus_3x4_d2",
            group: "swallow",
            run: Box::new(move || {
                swallow_contract(&tn, &plan)?;
                Ok(())
            }),
        });
    }
    {
        let mut tn = build_torus(2, 4, 4)?;
        fill_gaussian(&mut tn, Complex64::new(1.0, 0.0), 2);
        let plan = plan_swallowing(&tn, &greedy_order(&tn))?;
        workloads.push(Workload {
            name: "swallow_torus_2x4_d4",
            group: "swallow",
            run: Box::new(move || {
                swallow_contract(&tn, &plan)?;
                Ok(())
            }),
        });
    }
    {
        let mut tn = build_torus(2, 3, 2)?;
        fill_gaussian(&mut tn, Complex64::new(1.0, 0.0), 3);
        workloads.push(Workload {
            name: "reference_torus_2x3_d2",
            group: "swallow",
            run: Box::new(move || {
                contract_reference_with_budget(&tn, crate::opts::DEFAULT_BUDGET)?;
                Ok(())
            }),
        });
    }
    {
        let series: Vec<Complex64> = (0..64)
            .map(|k| {
                let x = splitmix64(k) as f64 / u64::MAX as f64 - 0.5;
                Complex64::new(if k == 0 { 2.0 + x } else { x }, 0.3 * x)
            })
            .collect();
        workloads.push(Workload {
            name: "series_log_exp_roundtrip_64",
            group: "series",
            run: Box::new(move || {
                for _ in 0..100 {
                    let f = log_series_tail(&series, 63)?;
                    exp_series(&f, 63)?;
                }
                Ok(())
            }),
        });
    }
    {
        let tn = sample_shifted_ones_tn(2, 4, 3, Complex64::new(0.5, 0.0), 4)?;
        let family: InterpolationFamily = make_family(&tn, None, Complex64::new(3.0, 0.0))?;
        workloads.push(Workload {
            name: "g_coefficients_2x4_d3_m8",
            group: "series",
            run: Box::new(move || {
                g_taylor_coefficients(&family, 8)?;
                Ok(())
            }),
        });
    }
    workloads.push(Workload {
        name: "kaufman_512x512",
        group: "kaufman",
        run: Box::new(|| {
            kaufman_ln_partition(512, 512, critical_coupling())?;
            Ok(())
        }),
    });
    workloads.push(Workload {
        name: "ising_bruteforce_4x4",
        group: "kaufman",
        run: Box::new(|| {
            ising_bruteforce(&IsingSpec {
                l1: 4,
                l2: 4,
                beta_j: critical_coupling(),
                beta_h: 0.1,
            })?;
            Ok(())
        }),
    });

    let mut results = Vec::new();
    for w in workloads
        .iter()
        .filter(|w| suite == "all" || suite == w.group)
    {
        let mut times_ms = Vec::with_capacity(repeat);
        for _ in 0..repeat {
            let start = Instant::now();
            (w.run)()?;
            times_ms.push(start.elapsed().as_secs_f64() * 1e3);
        }
        let min = times_ms.iter().cloned().fold(f64::INFINITY, f64::min);
        let mean = times_ms.iter().sum::<f64>() / times_ms.len() as f64;
        eprintln!("{:<28} min {min:9.3} ms   mean {mean:9.3} ms", w.name);
        results.push((w.name, min, mean));
    }

    let config = r.finish()?;
    if format == "csv" {
        let rows: Vec<String> = results
            .iter()
            .map(|(name, min, mean)| {
                format!("{name},{repeat},{},{}", csv_f64(*min), csv_f64(*mean))
            })
            .collect();
        return Sink::new(output).write(&csv_document(
            "bench",
            &config,
            "name,repeat,min_ms,mean_ms",
            &rows,
        ));
    }
    let mut body = Map::new();
    body.insert(
        "results".to_string(),
        Value::Array(
            results
                .iter()
                .map(|(name, min, mean)| {
                    let mut entry = Map::new();
                    entry.insert("name".to_string(), Value::String(name.to_string()));
                    entry.insert("repeat".to_string(), Value::from(repeat as u64));
                    entry.insert("min_ms".to_string(), json_f64(*min));
                    entry.insert("mean_ms".to_string(), json_f64(*mean));
                    Value::Object(entry)
                })
                .collect(),
        ),
    );
    Sink::new(output).write(&json_document("bench", config, body))
}
