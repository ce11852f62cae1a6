use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Algorithm, RunConfig};
use super::persist::{ModelArtifact, Scenario, FORMAT_VERSION, MODEL_FILE};
use crate::baselines::{GreedyMapper, RankingCriteria, TopsisMapper, DEFAULT_K_PATHS};
use crate::error::{Result, VneError};
use crate::metrics::{write_record, MetricsSeries, WindowRecord, CSV_HEADER};
use crate::policy::{self, PolicyParams, TrainingCurve};
use crate::scenario::{generate_requests, generate_substrate};
use crate::simulation::run_metrics;

pub const TRAINING_CSV: &str = "training.csv";
pub const COMPARISON_CSV: &str = "comparison.csv";
pub const SUMMARY_CSV: &str = "summary.csv";

pub fn metrics_file_name(algorithm: Algorithm) -> String {
    format!("metrics-{algorithm}.csv")
}

/// Draws the substrate and request stream for `cfg.scenario`.
pub fn generate(cfg: &RunConfig) -> Result<Scenario> {
    cfg.validate()?;
    let scenario = &cfg.scenario;
    Ok(Scenario {
        config: scenario.clone(),
        substrate: generate_substrate(scenario, &mut scenario.substrate_rng())?,
        stream: generate_requests(scenario, &mut scenario.request_rng())?,
    })
}

pub fn cmd_generate(cfg: &RunConfig, out: &Path) -> Result<Scenario> {
    let scenario = generate(cfg)?;
    scenario.save(out)?;
    Ok(scenario)
}

fn policy_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Initializes the policy from the scenario seed and trains it on the
/// training part of the stream.
pub fn train_model(cfg: &RunConfig, scenario: &Scenario) -> Result<(ModelArtifact, TrainingCurve)> {
    cfg.validate()?;
    let seed = scenario.config.seed;
    let t = &cfg.training;
    let mut params =
        PolicyParams::<f64>::init_normal(&mut policy_rng(seed, 2), t.init_std, t.learning_rate, t.batch_size)?;
    let (train_stream, _) = scenario.split();
    let curve = policy::train(
        &mut params,
        &scenario.substrate,
        &train_stream,
        t.epochs,
        &mut policy_rng(seed, 3),
    )?;
    let model = ModelArtifact {
        format_version: FORMAT_VERSION,
        kernel: params.kernel,
        bias: params.bias,
        learning_rate: params.learning_rate,
        batch_size: params.batch_size,
        init_std: t.init_std,
        seed,
        epochs: t.epochs,
        batch_updates: curve.updates,
    };
    Ok((model, curve))
}

/// Trains on the scenario stored in `scenario_dir` and writes
/// `model.toml` and `training.csv` into `out`.
pub fn cmd_train(cfg: &RunConfig, scenario_dir: &Path, out: &Path) -> Result<ModelArtifact> {
    let scenario = Scenario::load(scenario_dir)?;
    let (model, curve) = train_model(cfg, &scenario)?;
    fs::create_dir_all(out).map_err(|e| VneError::io(out, e))?;
    model.save(&out.join(MODEL_FILE))?;
    let csv = out.join(TRAINING_CSV);
    fs::write(&csv, curve.to_csv()).map_err(|e| VneError::io(&csv, e))?;
    Ok(model)
}

/// Replays the test part of the stream with `algorithm`.
pub fn evaluate(scenario: &Scenario, algorithm: Algorithm, model: Option<&ModelArtifact>) -> Result<MetricsSeries> {
    let (_, test) = scenario.split();
    let net = &scenario.substrate;
    match (algorithm, model) {
        (Algorithm::CssRl, Some(model)) => policy::evaluate(&model.params()?, net, &test),
        (Algorithm::CssRl, None) => Err(VneError::config("model", "css-rl evaluation needs a trained model")),
        (_, Some(_)) => Err(VneError::config(
            "model",
            format!("{algorithm} is a heuristic and takes no model"),
        )),
        (Algorithm::Greedy, None) => run_metrics(net, &test, &mut GreedyMapper),
        (Algorithm::TopsisTa, None) => run_metrics(
            net,
            &test,
            &mut TopsisMapper::new(net, RankingCriteria::<f64>::trust_aware(), DEFAULT_K_PATHS),
        ),
        (Algorithm::TopsisNta, None) => run_metrics(
            net,
            &test,
            &mut TopsisMapper::new(net, RankingCriteria::<f64>::non_trust_aware(), DEFAULT_K_PATHS),
        ),
    }
}

pub fn cmd_evaluate(scenario_dir: &Path, algorithm: Algorithm, model: Option<&Path>, out: &Path) -> Result<PathBuf> {
    let scenario = Scenario::load(scenario_dir)?;
    let model = model.map(ModelArtifact::load).transpose()?;
    let series = evaluate(&scenario, algorithm, model.as_ref())?;
    fs::create_dir_all(out).map_err(|e| VneError::io(out, e))?;
    let path = out.join(metrics_file_name(algorithm));
    crate::metrics::export_csv(&series, &path)?;
    Ok(path)
}

/// Final indicators of one (algorithm, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub records: Vec<WindowRecord>,
}

impl RunSummary {
    pub fn final_record(&self) -> Option<&WindowRecord> {
        self.records.last()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub mean_acc: f64,
    pub mean_rc: f64,
    pub mean_avg_revenue: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Comparison {
    pub runs: Vec<RunSummary>,
    pub failures: Vec<(Algorithm, u64, String)>,
}

impl Comparison {
    /// Mean over seeds of each run's final acceptance ratio, revenue/cost
    /// ratio and average revenue.
    pub fn summary(&self) -> Vec<AlgorithmSummary> {
        let mut grouped: BTreeMap<Algorithm, Vec<&WindowRecord>> = BTreeMap::new();
        for run in &self.runs {
            if let Some(last) = run.final_record() {
                grouped.entry(run.algorithm).or_default().push(last);
            }
        }
        grouped
            .into_iter()
            .map(|(algorithm, finals)| {
                let n = finals.len() as f64;
                AlgorithmSummary {
                    algorithm,
                    runs: finals.len(),
                    mean_acc: finals.iter().map(|r| r.acc_ratio).sum::<f64>() / n,
                    mean_rc: finals.iter().map(|r| r.rc_ratio).sum::<f64>() / n,
                    mean_avg_revenue: finals.iter().map(|r| r.avg_revenue).sum::<f64>() / n,
                }
            })
            .collect()
    }

    pub fn merged_csv(&self) -> String {
        let mut out = format!("algorithm,seed,{CSV_HEADER}\n");
        for run in &self.runs {
            for r in &run.records {
                let _ = write!(out, "{},{},", run.algorithm, run.seed);
                write_record(&mut out, r);
                out.push('\n');
            }
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("algorithm,runs,mean_acc,mean_rc,mean_avg_revenue\n");
        for s in self.summary() {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6}",
                s.algorithm, s.runs, s.mean_acc, s.mean_rc, s.mean_avg_revenue
            );
        }
        out
    }
}

type SeedRuns = Vec<(Algorithm, Result<MetricsSeries>)>;

/// Runs every algorithm on the same per-seed scenario.
///
/// Each seed's scenario is written under `out/seed-<seed>/` and read back,
/// so all algorithms consume the same files. Seeds run in parallel; a
/// failed run is recorded without stopping the others.
pub fn cmd_compare(cfg: &RunConfig, algorithms: &[Algorithm], seeds: &[u64], out: &Path) -> Result<Comparison> {
    let mut distinct = algorithms.to_vec();
    distinct.sort();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(VneError::config(
            "algorithm",
            "compare needs at least two distinct algorithms",
        ));
    }
    if seeds.is_empty() {
        return Err(VneError::config("seeds", "compare needs at least one seed"));
    }
    cfg.validate()?;
    fs::create_dir_all(out).map_err(|e| VneError::io(out, e))?;

    let per_seed: Vec<Result<SeedRuns>> = seeds
        .par_iter()
        .map(|&seed| {
            let seeded = cfg.with_seed(seed);
            let dir = out.join(format!("seed-{seed}"));
            cmd_generate(&seeded, &dir)?;
            let scenario = Scenario::load(&dir)?;
            let mut results = Vec::new();
            for &algorithm in algorithms {
                let result = if algorithm.needs_model() {
                    train_model(&seeded, &scenario).and_then(|(model, curve)| {
                        model.save(&dir.join(MODEL_FILE))?;
                        let csv = dir.join(TRAINING_CSV);
                        fs::write(&csv, curve.to_csv()).map_err(|e| VneError::io(&csv, e))?;
                        evaluate(&scenario, algorithm, Some(&model))
                    })
                } else {
                    evaluate(&scenario, algorithm, None)
                };
                results.push((algorithm, result));
            }
            Ok(results)
        })
        .collect();

    let mut comparison = Comparison::default();
    for (&seed, outcome) in seeds.iter().zip(per_seed) {
        match outcome {
            Ok(results) => {
                for (algorithm, result) in results {
                    match result {
                        Ok(series) => comparison.runs.push(RunSummary {
                            algorithm,
                            seed,
                            records: series.records().to_vec(),
                        }),
                        Err(e) => comparison.failures.push((algorithm, seed, e.to_string())),
                    }
                }
            }
            Err(e) => {
                for &algorithm in algorithms {
                    comparison.failures.push((algorithm, seed, e.to_string()));
                }
            }
        }
    }
    let merged = out.join(COMPARISON_CSV);
    fs::write(&merged, comparison.merged_csv()).map_err(|e| VneError::io(&merged, e))?;
    let summary = out.join(SUMMARY_CSV);
    fs::write(&summary, comparison.summary_csv()).map_err(|e| VneError::io(&summary, e))?;
    Ok(comparison)
}
