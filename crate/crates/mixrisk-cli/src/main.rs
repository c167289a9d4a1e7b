//! `mixrisk` — VaR/ES reports, standardized quantiles, reference-table
//! reproduction, Monte-Carlo cross-checks, and two-market aggregation for
//! mixture-elliptic portfolio models.
//!
//! Exit codes: 0 success; 2 input/validation error; 3 solver or quadrature
//! non-convergence; 4 reproduction mismatch (a match-required table cell
//! failed, or a Monte-Carlo z-score exceeded 3).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mixrisk::error::Error;
use mixrisk::es::{
    aggregate_es, es_delta_theta, es_general_moments, es_generic, es_multiplier,
    es_student_mixture, EsConvention, EsRoute,
};
use mixrisk::mc::{empirical_es, empirical_var, sample_mixture, write_batch};
use mixrisk::model::{GeneratorKind, MixtureModel, Portfolio, ValidatedModel};
use mixrisk::schema;
use mixrisk::tables::{discrepancy_report, reproduce_table, TableReport};
use mixrisk::var::{
    aggregate_var, solve_quantile, var_common_moments, var_delta_theta, var_general, RiskReport,
};

#[derive(Parser)]
#[command(
    name = "mixrisk",
    version,
    about = "VaR and expected shortfall for linear portfolios under elliptic mixtures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Value-at-Risk report for a model/portfolio file.
    Var(ReportArgs),
    /// Expected-shortfall report (includes the VaR) for a model/portfolio file.
    Es(ReportArgs),
    /// Standardized mixture quantile q with Σ βⱼ Gⱼ(q) = α.
    Quantile(ReportArgs),
    /// Reproduce the embedded reference tables and report deviations.
    Tables(TablesArgs),
    /// Cross-check analytic VaR/ES against the Monte-Carlo oracle.
    McCheck(McArgs),
    /// Aggregate VaR/ES across two markets sharing one generator mixture.
    Aggregate(AggregateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Convention {
    /// Tail-average coefficient (default), verified by integration and simulation.
    Validated,
    /// The published coefficient — exactly twice the validated one.
    AsPublished,
}

impl From<Convention> for EsConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Validated => EsConvention::Validated,
            Convention::AsPublished => EsConvention::AsPublished,
        }
    }
}

#[derive(Args)]
struct ReportArgs {
    /// Model/portfolio JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Confidence tail levels in (0, 0.5); repeatable.
    #[arg(long = "alpha", default_values_t = vec![0.01])]
    alphas: Vec<f64>,
    /// ES coefficient convention (es command only).
    #[arg(long, value_enum, default_value_t = Convention::Validated)]
    es_convention: Convention,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct TablesArgs {
    /// Restrict to tables at this tail level (default: all embedded tables).
    #[arg(long)]
    alpha: Option<f64>,
    /// json: cells plus summary; csv: cell rows to stdout, summary to stderr.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct McArgs {
    /// Model/portfolio JSON file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long = "alpha", default_values_t = vec![0.01])]
    alphas: Vec<f64>,
    /// Draw count (at least 10000).
    #[arg(long, default_value_t = 1_000_000)]
    draws: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// ES coefficient convention for the analytic side.
    #[arg(long, value_enum, default_value_t = Convention::Validated)]
    es_convention: Convention,
    /// Dump the raw P&L batch to this file (32-byte header + f64 LE payload).
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct AggregateArgs {
    /// Two-market aggregation JSON file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Convention::Validated)]
    es_convention: Convention,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn main() -> ExitCode {
    // die quietly when a downstream pipe closes (e.g. `mixrisk tables | head`)
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::NonConvergence { .. } => 3,
        _ => 2,
    }
}

/// MIXRISK_THREADS caps the rayon worker count for sampling and tables.
fn configure_threads() -> Result<(), String> {
    match std::env::var("MIXRISK_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| format!("MIXRISK_THREADS must be a positive integer, got {raw:?}"))?;
            if n == 0 {
                return Err("MIXRISK_THREADS must be at least 1".into());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| format!("thread pool: {e}"))
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Var(args) => cmd_var(args),
        Command::Es(args) => cmd_es(args),
        Command::Quantile(args) => cmd_quantile(args),
        Command::Tables(args) => cmd_tables(args),
        Command::McCheck(args) => cmd_mc_check(args),
        Command::Aggregate(args) => cmd_aggregate(args),
    }
}

// The generator mixture of a validated model, as (weight, generator) pairs.
fn mixture_of(model: &ValidatedModel<f64>) -> Vec<(f64, GeneratorKind<f64>)> {
    model
        .components()
        .iter()
        .map(|c| (c.weight, c.generator.clone()))
        .collect()
}

/// VaR by the applicable route: common moments use the standardized quantile
/// (plus the carry term when Θ·t ≠ 0); distinct moments use the general
/// fixed-point solve, which does not support a carry term.
fn compute_var(
    model: &ValidatedModel<f64>,
    p: &Portfolio<f64>,
    alpha: f64,
) -> Result<RiskReport<f64>, Error> {
    if model.common_moments() {
        if p.carry() != 0.0 {
            var_delta_theta(p, model, alpha)
        } else {
            var_common_moments(p, model, alpha)
        }
    } else if p.carry() != 0.0 {
        Err(Error::Unsupported(
            "carry (theta × horizon) is only supported for common-moment models".into(),
        ))
    } else {
        var_general(p, model, alpha)
    }
}

/// ES by the applicable route, on top of [`compute_var`]'s report.
fn compute_es(
    model: &ValidatedModel<f64>,
    p: &Portfolio<f64>,
    alpha: f64,
    convention: EsConvention,
) -> Result<RiskReport<f64>, Error> {
    let var = compute_var(model, p, alpha)?;
    if model.common_moments() {
        if p.carry() != 0.0 {
            return es_delta_theta(p, model, alpha, &var, convention);
        }
        let all_student = model
            .components()
            .iter()
            .all(|c| matches!(c.generator, GeneratorKind::StudentT { .. }));
        if all_student {
            es_student_mixture(p, model, alpha, &var, convention)
        } else {
            es_generic(p, model, alpha, &var, convention)
        }
    } else {
        es_general_moments(p, model, alpha, &var, convention)
    }
}

fn print_reports(reports: &[RiskReport<f64>], format: Format, command: &str) {
    match format {
        Format::Json => {
            let doc = json!({ "command": command, "results": reports });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serialize"));
        }
        Format::Csv => {
            // {:?} on floats prints the shortest round-trip form
            println!("alpha,var,es,q_alpha,residual,iterations");
            for r in reports {
                let (q, res, it) = match &r.quantile {
                    Some(s) => (
                        format!("{:?}", s.q_alpha),
                        format!("{:?}", s.residual),
                        s.iterations.to_string(),
                    ),
                    None => (String::new(), String::new(), String::new()),
                };
                let es = r.es.map(|e| format!("{e:?}")).unwrap_or_default();
                println!("{},{:?},{},{},{},{}", r.alpha, r.var, es, q, res, it);
            }
        }
    }
}

fn cmd_var(args: ReportArgs) -> Result<u8, Error> {
    let (model, p) = schema::load_model(&args.input)?;
    let reports = args
        .alphas
        .iter()
        .map(|&a| compute_var(&model, &p, a))
        .collect::<Result<Vec<_>, _>>()?;
    print_reports(&reports, args.format, "var");
    Ok(0)
}

fn cmd_es(args: ReportArgs) -> Result<u8, Error> {
    let (model, p) = schema::load_model(&args.input)?;
    let reports = args
        .alphas
        .iter()
        .map(|&a| compute_es(&model, &p, a, args.es_convention.into()))
        .collect::<Result<Vec<_>, _>>()?;
    print_reports(&reports, args.format, "es");
    Ok(0)
}

fn cmd_quantile(args: ReportArgs) -> Result<u8, Error> {
    let (model, _) = schema::load_model(&args.input)?;
    let mix = mixture_of(&model);
    let solutions = args
        .alphas
        .iter()
        .map(|&a| solve_quantile(&mix, a, model.dimension()))
        .collect::<Result<Vec<_>, _>>()?;
    match args.format {
        Format::Json => {
            let results: Vec<_> = args
                .alphas
                .iter()
                .zip(&solutions)
                .map(|(a, s)| json!({ "alpha": a, "solution": s }))
                .collect();
            let doc = json!({ "command": "quantile", "results": results });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serialize"));
        }
        Format::Csv => {
            println!("alpha,q_alpha,residual,iterations");
            for (a, s) in args.alphas.iter().zip(&solutions) {
                println!("{},{:?},{:?},{}", a, s.q_alpha, s.residual, s.iterations);
            }
        }
    }
    Ok(0)
}

fn cmd_tables(args: TablesArgs) -> Result<u8, Error> {
    let reports: Vec<TableReport> = mixrisk::tables::builtin_tables()
        .iter()
        .filter(|t| args.alpha.map_or(true, |a| t.alpha == a))
        .map(reproduce_table)
        .collect();
    if reports.is_empty() {
        return Err(Error::domain(
            "tables",
            format!("no embedded table has alpha = {}", args.alpha.unwrap_or(f64::NAN)),
        ));
    }
    let summary = discrepancy_report(&reports);
    match args.format {
        Format::Json => {
            let tables: Vec<_> = reports
                .iter()
                .map(|r| {
                    json!({
                        "name": r.name,
                        "alpha": r.alpha,
                        "required_all_pass": r.required_all_pass(),
                        "cells": r.cells,
                    })
                })
                .collect();
            let doc = json!({ "command": "tables", "tables": tables, "summary": summary });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serialize"));
        }
        Format::Csv => {
            for (i, r) in reports.iter().enumerate() {
                let csv = r.to_csv();
                if i == 0 {
                    print!("{csv}");
                } else {
                    // one shared header line across tables
                    print!("{}", csv.splitn(2, '\n').nth(1).unwrap_or(""));
                }
            }
            eprint!("{summary}");
        }
    }
    Ok(if reports.iter().all(TableReport::required_all_pass) { 0 } else { 4 })
}

fn cmd_mc_check(args: McArgs) -> Result<u8, Error> {
    if args.draws < 10_000 {
        return Err(Error::domain(
            "mc-check",
            format!("draws must be at least 10000, got {}", args.draws),
        ));
    }
    let (model, p) = schema::load_model(&args.input)?;
    let batch = sample_mixture(&model, &p, args.draws, args.seed)?;
    if let Some(path) = &args.dump {
        write_batch(&batch, path)?;
    }

    let mut rows = Vec::new();
    let mut all_pass = true;
    for &alpha in &args.alphas {
        let analytic = compute_es(&model, &p, alpha, args.es_convention.into())?;
        let emp_var = empirical_var(&batch, alpha)?;
        let emp_es = empirical_es(&batch, alpha)?;
        let z_var = (analytic.var - emp_var.value) / emp_var.std_error;
        let z_es = (analytic.es.expect("es computed") - emp_es.value) / emp_es.std_error;
        let pass = z_var.abs() <= 3.0 && z_es.abs() <= 3.0;
        all_pass &= pass;
        rows.push(json!({
            "alpha": alpha,
            "analytic": { "var": analytic.var, "es": analytic.es },
            "empirical": { "var": emp_var, "es": emp_es },
            "z_scores": { "var": z_var, "es": z_es },
            "pass": pass,
        }));
    }

    match args.format {
        Format::Json => {
            let doc = json!({
                "command": "mc-check",
                "draws": args.draws,
                "seed": args.seed,
                "results": rows,
                "pass": all_pass,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serialize"));
        }
        Format::Csv => {
            println!(
                "alpha,analytic_var,empirical_var,var_se,var_z,analytic_es,empirical_es,es_se,es_z,pass"
            );
            for row in &rows {
                println!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    row["alpha"],
                    row["analytic"]["var"],
                    row["empirical"]["var"]["value"],
                    row["empirical"]["var"]["std_error"],
                    row["z_scores"]["var"],
                    row["analytic"]["es"],
                    row["empirical"]["es"]["value"],
                    row["empirical"]["es"]["std_error"],
                    row["z_scores"]["es"],
                    row["pass"],
                );
            }
        }
    }
    Ok(if all_pass { 0 } else { 4 })
}

fn cmd_aggregate(args: AggregateArgs) -> Result<u8, Error> {
    let file = schema::load_aggregate(&args.input)?;
    let n1 = file.market1.delta.len();
    let n2 = file.market2.delta.len();
    if file.cross_scale.len() != n1 || file.cross_scale.iter().any(|r| r.len() != n2) {
        return Err(Error::DimensionMismatch {
            message: format!("cross_scale must be {n1}x{n2} to match the market deltas"),
        });
    }

    // per-market single-market models sharing the generator mixture (zero mean)
    let market_model = |m: &schema::MarketFile| -> Result<_, Error> {
        let dim = m.delta.len();
        let components = file
            .components
            .iter()
            .map(|c| {
                Ok(mixrisk::model::EllipticComponent {
                    weight: c.weight,
                    mean: vec![0.0; dim],
                    scale: mixrisk::model::Matrix::from_rows(&m.scale)?,
                    generator: (&c.generator).into(),
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let model = MixtureModel { components, dimension: dim }.validate()?;
        let p = Portfolio::new(m.delta.clone())?;
        Ok((model, p))
    };
    let (model1, p1) = market_model(&file.market1)?;
    let (model2, p2) = market_model(&file.market2)?;

    let mix = mixture_of(&model1);
    let dim = n1 + n2;
    let q = solve_quantile(&mix, args.alpha, dim)?;
    let sigma1 = mixrisk::model::portfolio_stdev(&p1, &model1.components()[0])?;
    let sigma2 = mixrisk::model::portfolio_stdev(&p2, &model2.components()[0])?;
    let cross: f64 = (0..n1)
        .map(|i| {
            (0..n2)
                .map(|j| p1.delta[i] * file.cross_scale[i][j] * p2.delta[j])
                .sum::<f64>()
        })
        .sum();

    let var1 = q.q_alpha * sigma1;
    let var2 = q.q_alpha * sigma2;
    let var_agg = aggregate_var(var1, var2, q.q_alpha, cross)?;
    let phi_var = mixrisk::var::implied_var_correlation(var1, var2, q.q_alpha, cross)?;

    let k = es_multiplier(
        &mix,
        q.q_alpha,
        args.alpha,
        dim,
        EsRoute::ClosedForm,
        args.es_convention.into(),
    )?;
    let es1 = k.value * sigma1;
    let es2 = k.value * sigma2;
    let es_agg = aggregate_es(es1, es2, k.value, cross)?;
    let phi_es = mixrisk::es::implied_es_correlation(es1, es2, k.value, cross)?;

    match args.format {
        Format::Json => {
            let doc = json!({
                "command": "aggregate",
                "alpha": args.alpha,
                "q_alpha": q.q_alpha,
                "es_multiplier": k.value,
                "cross": cross,
                "market1": { "var": var1, "es": es1 },
                "market2": { "var": var2, "es": es2 },
                "aggregated": {
                    "var": var_agg,
                    "es": es_agg,
                    "implied_var_correlation": phi_var,
                    "implied_es_correlation": phi_es,
                },
                "convention": "VaR/ES reported as positive currency losses",
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serialize"));
        }
        Format::Csv => {
            println!(
                "alpha,q_alpha,es_multiplier,cross,var1,es1,var2,es2,var_agg,es_agg,phi_var,phi_es"
            );
            println!(
                "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                args.alpha, q.q_alpha, k.value, cross, var1, es1, var2, es2, var_agg, es_agg,
                phi_var, phi_es
            );
        }
    }
    Ok(0)
}
