//! Library half of the `cssp` command-line tool.

pub mod config;
pub mod error;
pub mod io;
pub mod report;

use std::time::Instant;

use cssp::bounds::{self, hard_instance_bounds};
use cssp::{oracle, select, InstanceSpec, Matrix};
use serde_json::json;

use crate::config::{CommandKind, RunConfig, Source, Threads};
use crate::error::{exit, CliError};
use crate::report::{join_subset, num, one_based, opt, Report, Table};

/// Rendered output plus the exit code it should be reported with.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub exit_code: i32,
}

/// Runs a validated configuration on a worker pool sized by `--threads`.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Threads::Fixed(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| execute(cfg))
}

fn load(source: &Source) -> Result<Matrix, CliError> {
    match source {
        Source::File { path, transpose } => io::ingest(path, *transpose),
        Source::Instance { spec, transpose } => {
            let a = spec.build::<f64>()?;
            Ok(if *transpose { a.transpose() } else { a })
        }
    }
}

fn hard_params(source: &Source) -> Option<(usize, f64)> {
    match source {
        Source::Instance { spec: InstanceSpec::Hard { d, delta }, transpose: false } => Some((*d, *delta)),
        _ => None,
    }
}

fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let start = Instant::now();
    if cfg.command == CommandKind::Gen {
        return generate(cfg);
    }
    let a = load(&cfg.source)?;
    let mut report = Report {
        command: cfg.command.name(),
        input: cfg.source.label(),
        k: cfg.k,
        eps: cfg.eps,
        subset: None,
        residual_sq: None,
        bound: None,
        applicable: None,
        identities: None,
        timing_ms: None,
        details: json!({}),
        table: Table::default(),
    };
    let mut exit_code = exit::OK;
    let hard = hard_params(&cfg.source);
    match cfg.command {
        CommandKind::Select => run_select(cfg, &a, &mut report)?,
        CommandKind::Bound => run_bound(cfg, &a, hard, &mut report)?,
        CommandKind::Verify => {
            if !run_verify(cfg, &a, &mut report)? {
                exit_code = exit::VERIFICATION;
            }
        }
        CommandKind::Bench => run_bench(cfg, &a, hard, &mut report)?,
        CommandKind::Gen => unreachable!(),
    }
    if cfg.timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(Outcome { stdout: report.render(cfg.format), exit_code })
}

fn k_of(cfg: &RunConfig) -> usize {
    cfg.k.expect("validated in RunConfig::from_cli")
}

fn run_select(cfg: &RunConfig, a: &Matrix, report: &mut Report) -> Result<(), CliError> {
    let k = k_of(cfg);
    let res = select(a, k, cfg.eps)?;
    let b = bounds::from_matrix(a, k)?;
    let ceiling = if b.applicable { b.bound } else { res.expected_root.value };
    let certified = res.residual_sq <= ceiling + 2.0 * k as f64 * cfg.eps + 1e-7 * (1.0 + b.lambda_max);
    let subset = one_based(&res.subset);
    report.subset = Some(subset.clone());
    report.residual_sq = Some(res.residual_sq);
    report.bound = Some(b.bound);
    report.applicable = Some(b.applicable);
    report.details = json!({
        "n": a.n_rows(),
        "d": a.n_cols(),
        "rank": res.rank,
        "branch": res.branch,
        "iteration_roots": res.iteration_roots,
        "expected_root": res.expected_root,
        "certified": certified,
    });
    if cfg.sqrt {
        report.details["residual"] = json!(res.residual_sq.sqrt());
        report.details["bound_sqrt"] = json!(b.bound.sqrt());
    }
    let mut table = Table::new(vec!["k", "residual_sq", "bound", "applicable", "subset"]);
    table.push(vec![
        k.to_string(),
        num(res.residual_sq),
        num(b.bound),
        b.applicable.to_string(),
        join_subset(&subset),
    ]);
    report.table = table;
    Ok(())
}

fn run_bound(
    cfg: &RunConfig,
    a: &Matrix,
    hard: Option<(usize, f64)>,
    report: &mut Report,
) -> Result<(), CliError> {
    let k = k_of(cfg);
    let mut b = bounds::from_matrix(a, k)?;
    let closed_form = hard.and_then(|(d, delta)| hard_instance_bounds(d, delta, k).ok());
    b.lower_bound_hard_instance = closed_form.map(|(_, lower)| lower);
    report.bound = Some(b.bound);
    report.applicable = Some(b.applicable);
    report.details = json!({
        "n": a.n_rows(),
        "d": a.n_cols(),
        "t": b.t,
        "lambda_max": b.lambda_max,
        "alpha": b.alpha,
        "beta": b.beta,
        "gamma": b.gamma,
        "lower_bound": b.lower_bound_hard_instance,
        "hard_instance_upper": closed_form.map(|(upper, _)| upper),
    });
    if cfg.sqrt {
        report.details["bound_sqrt"] = json!(b.bound.sqrt());
    }
    let mut table =
        Table::new(vec!["k", "t", "lambda_max", "alpha", "beta", "gamma", "bound", "applicable", "lower_bound"]);
    table.push(vec![
        k.to_string(),
        b.t.to_string(),
        num(b.lambda_max),
        num(b.alpha),
        num(b.beta),
        num(b.gamma),
        num(b.bound),
        b.applicable.to_string(),
        opt(b.lower_bound_hard_instance),
    ]);
    report.table = table;
    Ok(())
}

fn run_verify(cfg: &RunConfig, a: &Matrix, report: &mut Report) -> Result<bool, CliError> {
    let k = k_of(cfg);
    let r = oracle::verify(a, k, cfg.eps)?;
    let b = bounds::from_matrix(a, k)?;
    report.subset = Some(one_based(&r.select_subset));
    report.residual_sq = Some(r.select_residual_sq);
    report.bound = Some(b.bound);
    report.applicable = Some(b.applicable);
    report.details = json!({
        "n": a.n_rows(),
        "d": a.n_cols(),
        "best_subset": one_based(&r.best_subset),
        "best_residual_sq": r.best_residual_sq,
        "ck": r.ck,
        "expected_poly": r.expected_poly.coeffs(),
        "passed": r.passed(),
    });
    let mut table = Table::new(vec!["identity", "error", "tolerance", "pass"]);
    for (name, c) in &r.identity_errors {
        table.push(vec![name.clone(), num(c.error), num(c.tolerance), c.pass.to_string()]);
    }
    report.table = table;
    let passed = r.passed();
    report.identities = Some(r.identity_errors);
    Ok(passed)
}

fn run_bench(
    cfg: &RunConfig,
    a: &Matrix,
    hard: Option<(usize, f64)>,
    report: &mut Report,
) -> Result<(), CliError> {
    let info = bounds::spectrum_of(a)?;
    let k_max = cfg.k.unwrap_or(info.t.saturating_sub(1).max(1));
    if k_max == 0 || k_max > info.t {
        return Err(cssp::Error::RankExceeded { k: k_max, rank: info.t }.into());
    }
    let mut table = Table::new(vec!["k", "residual_sq", "bound", "applicable", "lower_bound", "subset"]);
    let mut rows = Vec::new();
    for k in 1..=k_max {
        let res = select(a, k, cfg.eps)?;
        let b = bounds::theorem_bound(&info, k);
        let lower = hard.and_then(|(d, delta)| hard_instance_bounds(d, delta, k).ok()).map(|(_, l)| l);
        let subset = one_based(&res.subset);
        table.push(vec![
            k.to_string(),
            num(res.residual_sq),
            num(b.bound),
            b.applicable.to_string(),
            opt(lower),
            join_subset(&subset),
        ]);
        rows.push(json!({
            "k": k,
            "residual_sq": res.residual_sq,
            "bound": b.bound,
            "applicable": b.applicable,
            "lower_bound": lower,
            "subset": subset,
        }));
    }
    report.k = Some(k_max);
    report.details = json!({ "n": a.n_rows(), "d": a.n_cols(), "t": info.t, "rows": rows });
    report.table = table;
    Ok(())
}

fn generate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let a = load(&cfg.source)?;
    let label = cfg.source.label();
    let mm = io::to_matrix_market(&a, &format!("generated instance {label}"));
    let Some(path) = &cfg.output else {
        return Ok(Outcome { stdout: mm, exit_code: exit::OK });
    };
    std::fs::write(path, mm).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let mut table = Table::new(vec!["n", "d", "output"]);
    table.push(vec![a.n_rows().to_string(), a.n_cols().to_string(), path.display().to_string()]);
    let report = Report {
        command: "gen",
        input: label,
        k: None,
        eps: cfg.eps,
        subset: None,
        residual_sq: None,
        bound: None,
        applicable: None,
        identities: None,
        timing_ms: None,
        details: json!({ "n": a.n_rows(), "d": a.n_cols(), "output": path.display().to_string() }),
        table,
    };
    Ok(Outcome { stdout: report.render(cfg.format), exit_code: exit::OK })
}
