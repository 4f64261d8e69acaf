//! Experiment runner: generate replicate datasets, tune and fit every
//! method, score against the truth and summarize.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use subbotin_core::baselines::copula_transform;
use subbotin_core::estimator::{oracle_tune_with_loss, CombinationRule, SelectionOptions};
use subbotin_core::score::f1_score;
use subbotin_core::seed::derive_seed;
use subbotin_core::simgen::{gen_block_maxima, gen_pot, gen_subbotin};
use subbotin_core::solver::RegressionLoss;
use subbotin_core::stability::{stability_grid, tune_with_losses, StabilityOptions};
use subbotin_core::{Dataset, Error, Graph, ShapeParam};

use crate::config::{ExperimentConfig, GeneratorConfig, MethodConfig, Scenario, Tuning};
use crate::io::format_f64;

pub const RESULT_HEADER: &str = "scenario,method,replicate,f1,tpr,fdr,selected_lambda,selected_nu,edge_count,wall_time_ms,seed";
pub const SUMMARY_HEADER: &str = "method,mean_f1,sd_f1,mean_tpr,mean_fdr,replicates";

/// One replicate dataset: raw values, the standardized copy used by the
/// regression methods, and the true graph.
#[derive(Debug, Clone)]
pub struct Generated {
    pub raw: Dataset,
    pub standardized: Dataset,
    pub truth: Graph,
}

pub fn generate(gen: &GeneratorConfig, seed: u64) -> Result<Generated, Error> {
    gen.validate()?;
    let gspec = gen.graph.spec(gen.p)?;
    let (raw, truth) = match gen.scenario {
        Scenario::Subbotin { n, nu } => gen_subbotin(n, ShapeParam::new(nu)?, &gspec, &gen.theta.spec(), seed)?,
        Scenario::BlockMaxima { n_blocks, block_size } => {
            gen_block_maxima(n_blocks, block_size, &gspec, &gen.theta.spec(), seed)?
        }
        Scenario::Pot { n, threshold, hawkes } => gen_pot(n, threshold, &gspec, &hawkes.params(), seed)?,
    };
    let standardized = if raw.is_standardized() { raw.clone() } else { raw.standardize()? };
    Ok(Generated { raw, standardized, truth })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub graph: Graph,
    pub lambda: f64,
    pub nu: Option<u32>,
}

fn nu_of(loss: &RegressionLoss) -> Option<u32> {
    match loss {
        RegressionLoss::Power(nu) => Some(nu.get()),
        RegressionLoss::SmoothedCheck { .. } => None,
    }
}

/// Candidate losses for a method, and the dataset they are fitted to.
fn method_inputs(method: &MethodConfig, g: &Generated) -> Result<(Vec<RegressionLoss>, Option<Dataset>), Error> {
    Ok(match method {
        MethodConfig::Subbotin { nu } => (vec![RegressionLoss::Power(ShapeParam::new(*nu)?)], None),
        MethodConfig::SubbotinTuned { nu_grid } => {
            let mut shapes = nu_grid.iter().map(|&v| ShapeParam::new(v)).collect::<Result<Vec<_>, _>>()?;
            shapes.sort();
            (shapes.into_iter().map(RegressionLoss::Power).collect(), None)
        }
        MethodConfig::Gaussian => (vec![RegressionLoss::Power(ShapeParam::GAUSSIAN)], None),
        MethodConfig::Quantile { tau } => (vec![RegressionLoss::check(*tau)?], None),
        MethodConfig::Copula { block_size } => {
            let (scores, _) = copula_transform(&g.raw, *block_size)?;
            (vec![RegressionLoss::Power(ShapeParam::GAUSSIAN)], Some(scores))
        }
    })
}

/// Tune and fit one method on one replicate.
pub fn run_method(
    method: &MethodConfig,
    g: &Generated,
    tuning: &Tuning,
    rule: CombinationRule,
    seed: u64,
    options: &SelectionOptions,
) -> Result<MethodOutcome, Error> {
    let (losses, transformed) = method_inputs(method, g)?;
    let data = transformed.as_ref().unwrap_or(&g.standardized);
    match *tuning {
        Tuning::Oracle => {
            let loss = match losses.as_slice() {
                [one] => *one,
                _ => return Err(Error::InvalidParameter("oracle tuning needs a single loss".into())),
            };
            let tuned = oracle_tune_with_loss(data, &loss, g.truth.len(), rule, options)?;
            Ok(MethodOutcome { graph: tuned.graph, lambda: tuned.lambda, nu: nu_of(&loss) })
        }
        Tuning::Stability { threshold, replicates, grid_size, mean_block_len } => {
            let grids = losses
                .iter()
                .map(|l| stability_grid(data, l, grid_size, seed))
                .collect::<Result<Vec<_>, _>>()?;
            let opts = StabilityOptions { selection: *options, mean_block_len };
            let out = tune_with_losses(data, &losses, &grids, replicates, threshold, rule, seed, &opts)?;
            Ok(MethodOutcome { nu: nu_of(&out.loss), graph: out.graph, lambda: out.lambda })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub method: String,
    pub replicate: usize,
    /// `None` when the method failed on this replicate.
    pub f1: Option<f64>,
    pub tpr: Option<f64>,
    pub fdr: Option<f64>,
    pub selected_lambda: Option<f64>,
    pub selected_nu: Option<u32>,
    pub edge_count: Option<usize>,
    pub wall_time_ms: Option<f64>,
    pub seed: u64,
    pub error: Option<String>,
}

impl ResultRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn to_csv_line(&self) -> String {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        fn optf(v: Option<f64>) -> String {
            v.map(format_f64).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.method,
            self.replicate,
            optf(self.f1),
            optf(self.tpr),
            optf(self.fdr),
            optf(self.selected_lambda),
            opt(self.selected_nu),
            opt(self.edge_count),
            optf(self.wall_time_ms),
            self.seed
        )
    }
}

/// Seed of replicate `r`; independent of the method list.
pub fn replicate_seed(config: &ExperimentConfig, replicate: usize) -> u64 {
    derive_seed(config.seed, &[config.generator.scenario.code(), replicate as u64])
}

/// Seed used by one method within a replicate, keyed by the method's name.
pub fn method_seed(replicate_seed: u64, method: &MethodConfig) -> u64 {
    let key: Vec<u64> = method.name().bytes().map(u64::from).collect();
    derive_seed(replicate_seed, &key)
}

pub fn run_replicate(config: &ExperimentConfig, replicate: usize) -> Vec<ResultRow> {
    let seed = replicate_seed(config, replicate);
    let scenario = config.generator.scenario.name().to_string();
    let rule: CombinationRule = config.rule.into();
    let options = SelectionOptions::default();
    let row = |method: &MethodConfig| ResultRow {
        scenario: scenario.clone(),
        method: method.name(),
        replicate,
        f1: None,
        tpr: None,
        fdr: None,
        selected_lambda: None,
        selected_nu: None,
        edge_count: None,
        wall_time_ms: None,
        seed,
        error: None,
    };
    let generated = match generate(&config.generator, seed) {
        Ok(g) => g,
        Err(e) => {
            let msg = format!("generator: {e}");
            return config.methods.iter().map(|m| ResultRow { error: Some(msg.clone()), ..row(m) }).collect();
        }
    };
    config
        .methods
        .iter()
        .map(|m| {
            let start = Instant::now();
            let outcome = run_method(m, &generated, &config.tuning, rule, method_seed(seed, m), &options)
                .and_then(|o| f1_score(&o.graph, &generated.truth).map(|s| (o, s)));
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let mut r = row(m);
            if config.record_wall_time {
                r.wall_time_ms = Some(elapsed);
            }
            match outcome {
                Ok((o, s)) => ResultRow {
                    f1: Some(s.f1),
                    tpr: Some(s.tpr),
                    fdr: Some(s.fdr),
                    selected_lambda: Some(o.lambda),
                    selected_nu: o.nu,
                    edge_count: Some(o.graph.len()),
                    ..r
                },
                Err(e) => ResultRow { error: Some(format!("{}: {e}", e.category())), ..r },
            }
        })
        .collect()
}

/// Run every replicate (in parallel on the current rayon pool); rows are
/// ordered by replicate, then by the configured method order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>, Error> {
    config.validate()?;
    let per_rep: Vec<Vec<ResultRow>> = (0..config.replicates).into_par_iter().map(|r| run_replicate(config, r)).collect();
    Ok(per_rep.into_iter().flatten().collect())
}

/// [`run_experiment`] on a dedicated pool with `threads` workers (`None`:
/// all cores).
pub fn run_experiment_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<ResultRow>, Error> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| run_experiment(config))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub mean_f1: f64,
    pub sd_f1: f64,
    pub mean_tpr: f64,
    pub mean_fdr: f64,
    /// Successful replicates.
    pub replicates: usize,
}

/// Per-method mean and sample standard deviation over successful rows, in
/// configured method order.
pub fn summarize(config: &ExperimentConfig, rows: &[ResultRow]) -> Vec<SummaryRow> {
    config
        .methods
        .iter()
        .map(|m| {
            let name = m.name();
            let ok: Vec<&ResultRow> = rows.iter().filter(|r| r.method == name && !r.failed()).collect();
            let k = ok.len();
            let mean = |f: fn(&ResultRow) -> f64| if k == 0 { f64::NAN } else { ok.iter().map(|r| f(r)).sum::<f64>() / k as f64 };
            let mean_f1 = mean(|r| r.f1.unwrap_or(f64::NAN));
            let sd_f1 = if k < 2 {
                0.0
            } else {
                (ok.iter().map(|r| (r.f1.unwrap_or(f64::NAN) - mean_f1).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
            };
            SummaryRow {
                method: name,
                mean_f1,
                sd_f1,
                mean_tpr: mean(|r| r.tpr.unwrap_or(f64::NAN)),
                mean_fdr: mean(|r| r.fdr.unwrap_or(f64::NAN)),
                replicates: k,
            }
        })
        .collect()
}

pub fn write_results<W: Write>(out: &mut W, rows: &[ResultRow]) -> std::io::Result<()> {
    writeln!(out, "{RESULT_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.to_csv_line())?;
    }
    Ok(())
}

pub fn write_summary<W: Write>(out: &mut W, summary: &[SummaryRow]) -> std::io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for s in summary {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            s.method,
            format_f64(s.mean_f1),
            format_f64(s.sd_f1),
            format_f64(s.mean_tpr),
            format_f64(s.mean_fdr),
            s.replicates
        )?;
    }
    Ok(())
}

/// Rows `scenario,method,replicate,error` for failed method runs.
pub fn write_failures<W: Write>(out: &mut W, rows: &[ResultRow]) -> std::io::Result<()> {
    writeln!(out, "scenario,method,replicate,error")?;
    for r in rows.iter().filter(|r| r.failed()) {
        let msg = r.error.as_deref().unwrap_or_default().replace('"', "'");
        writeln!(out, "{},{},{},\"{}\"", r.scenario, r.method, r.replicate, msg)?;
    }
    Ok(())
}
