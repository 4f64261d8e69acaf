use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use subbotin::bench::{run_experiment_with_threads, summarize, write_failures, write_results, write_summary};
use subbotin::config::{parse_json, sha256_hex, Rule, RunConfig, SimulateConfig};
use subbotin::io::{self, format_f64, IoError};
use subbotin::core::baselines::{copula_transform, quantile_graph};
use subbotin::core::estimator::{
    default_graph_grid, edge_path_with_loss, fit_neighborhood_with_loss, assemble_graph, SelectionOptions,
};
use subbotin::core::score::f1_score;
use subbotin::core::solver::RegressionLoss;
use subbotin::core::stability::{stability_grid, tune_with_losses, StabilityOptions, DEFAULT_REPLICATES, DEFAULT_STABILITY_GRID_SIZE};
use subbotin::core::{CombinationRule, Dataset, ShapeParam};

#[derive(Parser)]
#[command(name = "subbotin", version, about = "Subbotin graphical models: simulate, fit, stability selection, benchmark, score")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset and its true graph from a JSON generator config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Standardize a CSV dataset and estimate its graph.
    Fit {
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        nu: u32,
        /// A penalty, or `auto` for the default path.
        #[arg(long, default_value = "auto")]
        lambda: String,
        #[arg(long, value_enum, default_value = "and")]
        rule: RuleArg,
        /// Use the quantile graphical model at this level instead of the ℓν loss.
        #[arg(long)]
        quantile: Option<f64>,
        /// Use the block-maxima GEV-copula model with this block size.
        #[arg(long)]
        block_size: Option<usize>,
    },
    /// Choose (ν, λ) by block-bootstrap stability selection.
    Stability {
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated candidate shapes.
        #[arg(long, default_value = "2,4,6,8", value_delimiter = ',')]
        nu: Vec<u32>,
        #[arg(long, default_value_t = 0.9)]
        threshold: f64,
        #[arg(long, default_value_t = DEFAULT_REPLICATES)]
        replicates: usize,
        #[arg(long, default_value_t = DEFAULT_STABILITY_GRID_SIZE)]
        grid_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "and")]
        rule: RuleArg,
    },
    /// Run a benchmark experiment from a JSON run config.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print `f1,tpr,fdr` of an estimated edge list against the truth.
    Score {
        estimate: PathBuf,
        truth: PathBuf,
        #[arg(long)]
        p: usize,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum RuleArg {
    And,
    Or,
}

impl From<RuleArg> for CombinationRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::And => CombinationRule::And,
            RuleArg::Or => CombinationRule::Or,
        }
    }
}

impl RuleArg {
    fn name(self) -> &'static str {
        match self {
            RuleArg::And => "and",
            RuleArg::Or => "or",
        }
    }
}

fn category(e: &anyhow::Error) -> &'static str {
    for cause in e.chain() {
        if let Some(c) = cause.downcast_ref::<subbotin::core::Error>() {
            return c.category();
        }
        if let Some(c) = cause.downcast_ref::<IoError>() {
            return c.category();
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return "config";
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
    }
    "usage"
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error[{}]: {msg}", category(&e));
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads;
    match cli.command {
        Command::Simulate { config, out, seed } => simulate(&config, &out, seed),
        Command::Fit { data, out, nu, lambda, rule, quantile, block_size } => {
            fit(&data, &out, nu, &lambda, rule, quantile, block_size)
        }
        Command::Stability { data, out, nu, threshold, replicates, grid_size, seed, rule } => {
            stability(&data, &out, &nu, threshold, replicates, grid_size, seed, rule, threads)
        }
        Command::Benchmark { config, out, seed } => benchmark(&config, &out, seed, threads),
        Command::Score { estimate, truth, p } => {
            let s = f1_score(&io::load_edges(&estimate, p)?, &io::load_edges(&truth, p)?)?;
            println!("{:?},{:?},{:?}", s.f1, s.tpr, s.fdr);
            Ok(())
        }
    }
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(T, String)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = parse_json(&text).with_context(|| format!("invalid config {}", path.display()))?;
    Ok((parsed, text))
}

fn file_hash(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).with_context(|| format!("reading {}", path.display()))?))
}

fn write_metadata(out: &Path, command: &str, seed: Option<u64>, config_hash: &str, params: serde_json::Value) -> Result<()> {
    let doc = json!({
        "tool": "subbotin",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "config_hash": config_hash,
        "parameters": params,
    });
    io::save_text(&out.join("metadata.json"), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok(())
}

fn simulate(config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let (mut cfg, _) = read_config::<SimulateConfig>(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.generator.validate()?;
    let g = subbotin::bench::generate(&cfg.generator, cfg.seed)?;
    fs::create_dir_all(out)?;
    let header: Vec<String> = (0..g.raw.p()).map(|j| format!("x{j}")).collect();
    io::save_csv(&out.join("data.csv"), &g.raw, Some(&header))?;
    io::save_edges(&out.join("truth.csv"), &g.truth)?;
    let canonical = serde_json::to_string(&cfg)?;
    write_metadata(
        out,
        "simulate",
        Some(cfg.seed),
        &sha256_hex(canonical.as_bytes()),
        json!({ "generator": cfg.generator, "standardized": g.raw.is_standardized(), "edges": g.truth.len() }),
    )
}

fn load_standardized(path: &Path) -> Result<Dataset> {
    Ok(io::load_csv(path)?.standardize()?)
}

fn fit(
    data_path: &Path,
    out: &Path,
    nu: u32,
    lambda: &str,
    rule: RuleArg,
    quantile: Option<f64>,
    block_size: Option<usize>,
) -> Result<()> {
    let raw = io::load_csv(data_path)?;
    let (data, loss, model) = match (quantile, block_size) {
        (Some(_), Some(_)) => bail!("--quantile and --block-size are mutually exclusive"),
        (Some(tau), None) => (raw.standardize()?, RegressionLoss::check(tau)?, format!("quantile({tau})")),
        (None, Some(b)) => (copula_transform(&raw, b)?.0, RegressionLoss::Power(ShapeParam::GAUSSIAN), format!("copula({b})")),
        (None, None) => (raw.standardize()?, RegressionLoss::Power(ShapeParam::new(nu)?), format!("subbotin({nu})")),
    };
    let options = SelectionOptions::default();
    let comb: CombinationRule = rule.into();
    fs::create_dir_all(out)?;
    let params;
    if lambda == "auto" {
        let grid = default_graph_grid(&data, &loss)?;
        let path = edge_path_with_loss(&data, &loss, &grid, comb, &options)?;
        let mut table = String::from("lambda,edge_count\n");
        let mut edges = String::from("lambda,i,j\n");
        for pt in &path {
            table.push_str(&format!("{},{}\n", format_f64(pt.lambda), pt.edge_count()));
            for (i, j) in pt.graph.edges() {
                edges.push_str(&format!("{},{i},{j}\n", format_f64(pt.lambda)));
            }
            println!("{},{}", format_f64(pt.lambda), pt.edge_count());
        }
        io::save_text(&out.join("path.csv"), &table)?;
        io::save_text(&out.join("path_edges.csv"), &edges)?;
        params = json!({ "model": model, "lambda": "auto", "rule": rule.name(), "grid": grid });
    } else {
        let lam: f64 = lambda.parse().map_err(|_| anyhow!("--lambda must be a number or `auto`, got {lambda:?}"))?;
        let coefs = (0..data.p())
            .map(|i| fit_neighborhood_with_loss(&data, i, lam, &loss, &options, None).map(|f| f.coefficients))
            .collect::<Result<Vec<_>, _>>()?;
        let graph = if quantile.is_some() {
            quantile_graph(&data, quantile.unwrap_or(0.5), lam, comb, &options)?
        } else {
            assemble_graph(&coefs, comb, options.zero_tol)?
        };
        io::save_edges(&out.join("edges.csv"), &graph)?;
        io::save_coefficients(&out.join("coefficients.csv"), &coefs)?;
        println!("{} edges", graph.len());
        params = json!({ "model": model, "lambda": lam, "rule": rule.name(), "edges": graph.len() });
    }
    write_metadata(out, "fit", None, &file_hash(data_path)?, params)
}

#[allow(clippy::too_many_arguments)]
fn stability(
    data_path: &Path,
    out: &Path,
    nus: &[u32],
    threshold: f64,
    replicates: usize,
    grid_size: usize,
    seed: u64,
    rule: RuleArg,
    threads: Option<usize>,
) -> Result<()> {
    let data = load_standardized(data_path)?;
    let mut shapes = nus.iter().map(|&v| ShapeParam::new(v)).collect::<Result<Vec<_>, _>>()?;
    shapes.sort();
    shapes.dedup();
    let losses: Vec<RegressionLoss> = shapes.iter().map(|&s| RegressionLoss::Power(s)).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build()?;
    let outcome = pool.install(|| -> Result<_> {
        let grids = losses.iter().map(|l| stability_grid(&data, l, grid_size, seed)).collect::<Result<Vec<_>, _>>()?;
        let opts = StabilityOptions::default();
        Ok((tune_with_losses(&data, &losses, &grids, replicates, threshold, rule.into(), seed, &opts)?, grids))
    })?;
    let (tuned, grids) = outcome;
    fs::create_dir_all(out)?;
    let chosen = tuned
        .profiles
        .iter()
        .flatten()
        .find(|p| p.loss() == tuned.loss && p.lambda() == tuned.lambda)
        .ok_or_else(|| anyhow!("chosen profile missing"))?;
    io::save_profile(&out.join("profile.csv"), chosen)?;
    io::save_edges(&out.join("edges.csv"), &tuned.graph)?;
    let mut all = String::from("nu,lambda,i,j,frequency\n");
    for prof in tuned.profiles.iter().flatten() {
        for (i, j, f) in prof.entries() {
            if f > 0.0 {
                all.push_str(&format!(
                    "{},{},{i},{j},{}\n",
                    prof.nu().map(|v| v.get()).unwrap_or(0),
                    format_f64(prof.lambda()),
                    format_f64(f)
                ));
            }
        }
    }
    io::save_text(&out.join("profiles.csv"), &all)?;
    let nu = tuned.nu().map(|v| v.get());
    println!("nu={},lambda={},edges={}", nu.unwrap_or(0), format_f64(tuned.lambda), tuned.graph.len());
    write_metadata(
        out,
        "stability",
        Some(seed),
        &file_hash(data_path)?,
        json!({
            "nu_grid": nus, "threshold": threshold, "replicates": replicates, "rule": rule.name(),
            "lambda_grids": grids, "selected_nu": nu, "selected_lambda": tuned.lambda,
            "stable_edges": tuned.graph.len(),
        }),
    )
}

fn benchmark(config: &Path, out: &Path, seed: Option<u64>, threads: Option<usize>) -> Result<()> {
    let (mut cfg, _) = read_config::<RunConfig>(config)?;
    if let Some(s) = seed {
        cfg.experiment.seed = s;
    }
    let threads = threads.or(cfg.threads);
    cfg.experiment.validate()?;
    let rows = run_experiment_with_threads(&cfg.experiment, threads)?;
    let summary = summarize(&cfg.experiment, &rows);
    fs::create_dir_all(out)?;
    let mut buf = Vec::new();
    write_results(&mut buf, &rows)?;
    fs::write(out.join("results.csv"), &buf)?;
    buf.clear();
    write_summary(&mut buf, &summary)?;
    fs::write(out.join("summary.csv"), &buf)?;
    let failures = rows.iter().filter(|r| r.failed()).count();
    if failures > 0 {
        buf.clear();
        write_failures(&mut buf, &rows)?;
        fs::write(out.join("failures.csv"), &buf)?;
    }
    for s in &summary {
        println!("{},{:.4},{:.4},{}", s.method, s.mean_f1, s.sd_f1, s.replicates);
    }
    let rule = match cfg.experiment.rule {
        Rule::And => "and",
        Rule::Or => "or",
    };
    write_metadata(
        out,
        "benchmark",
        Some(cfg.experiment.seed),
        &cfg.experiment.hash(),
        json!({ "experiment": cfg.experiment, "rule": rule, "failed_rows": failures }),
    )
}
