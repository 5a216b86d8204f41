//! Running a learner over one or several seeds and writing its logs.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envs::Instance;
use crate::error::{Error, Result};
use crate::rfe::{rfe_advice_record, EmpiricalModel, RfeConfig};
use crate::sim::baseline::{baseline_record, BaselineConfig};
use crate::sim::metrics::{CsvSchema, MetricsLog, Recorder};
use crate::ucb::{ucb_ad_record, UcbConfig};

/// A learner and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "kebab-case")]
pub enum AlgorithmConfig {
    UcbAd(UcbConfig),
    RfeAdvice(RfeConfig),
    Baseline(BaselineConfig),
}

impl AlgorithmConfig {
    pub fn schema(&self) -> CsvSchema {
        match self {
            AlgorithmConfig::RfeAdvice(_) => CsvSchema::Exploration,
            _ => CsvSchema::Regret,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AlgorithmConfig::UcbAd(c) => c.validate(),
            AlgorithmConfig::RfeAdvice(c) => c.validate(),
            AlgorithmConfig::Baseline(c) => c.validate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: AlgorithmConfig,
    /// First seed; further runs use `seed + 1, seed + 2, …`.
    pub seed: u64,
    /// Number of independent seeded runs, averaged row-wise.
    pub num_seeds: u64,
    /// CSV destination. With several seeds this receives the mean log and
    /// each run is written next to it as `<stem>.seed<k>.csv`.
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.num_seeds).map(move |k| self.seed.wrapping_add(k))
    }
}

/// One learner run, streaming rows into `recorder`. Reward-free runs return
/// their final empirical model.
pub fn run_single(
    inst: &Instance,
    algo: &AlgorithmConfig,
    seed: u64,
    recorder: &mut Recorder,
) -> Result<Option<EmpiricalModel>> {
    let (mdp, pi, theta) = (&inst.mdp, &inst.pi, &inst.theta);
    match algo {
        AlgorithmConfig::UcbAd(c) => ucb_ad_record(mdp, pi, theta, c, seed, recorder).map(|_| None),
        AlgorithmConfig::RfeAdvice(c) => {
            rfe_advice_record(mdp, pi, theta, c, seed, recorder).map(Some)
        }
        AlgorithmConfig::Baseline(c) => {
            baseline_record(mdp, pi, theta, c, seed, recorder).map(|_| None)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    /// Row-wise mean over seeds.
    pub mean: MetricsLog,
    /// Final empirical model per seed, in seed order.
    pub models: Vec<Option<EmpiricalModel>>,
}

fn seed_path(output: &Path, seed: u64) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    output.with_file_name(format!("{stem}.seed{seed}.csv"))
}

fn recorder_for(path: Option<&Path>, schema: CsvSchema) -> Result<Recorder> {
    match path {
        None => Ok(Recorder::new()),
        Some(p) => {
            let file = File::create(p).map_err(|e| Error::io(p, e))?;
            Recorder::streaming(schema, Box::new(BufWriter::new(file))).map_err(|e| with_path(e, p))
        }
    }
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

/// Runs every seed (in parallel when there are several). Files listed by
/// [`output_files`] are written.
pub fn run_experiment(inst: &Instance, cfg: &RunConfig) -> Result<Experiment> {
    cfg.algorithm.validate()?;
    if cfg.num_seeds == 0 {
        return Err(Error::config("num_seeds", "must be at least 1"));
    }
    let schema = cfg.algorithm.schema();
    if cfg.num_seeds == 1 {
        let mut rec = recorder_for(cfg.output.as_deref(), schema)?;
        let model = run_single(inst, &cfg.algorithm, cfg.seed, &mut rec)?;
        let mean = rec
            .finish()
            .map_err(|e| with_path(e, cfg.output.as_deref().unwrap_or(Path::new(""))))?;
        return Ok(Experiment {
            mean,
            models: vec![model],
        });
    }

    let seeds: Vec<u64> = cfg.seeds().collect();
    let runs: Vec<Result<(MetricsLog, Option<EmpiricalModel>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                scope.spawn(move || {
                    let path = cfg.output.as_deref().map(|p| seed_path(p, seed));
                    let mut rec = recorder_for(path.as_deref(), schema)?;
                    let model = run_single(inst, &cfg.algorithm, seed, &mut rec)?;
                    Ok((rec.finish()?, model))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("seed worker panicked"))
            .collect()
    });
    let (logs, models): (Vec<_>, Vec<_>) = runs
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let mean = MetricsLog::mean(&logs);
    if let Some(p) = &cfg.output {
        std::fs::write(p, mean.to_csv(schema)).map_err(|e| Error::io(p, e))?;
    }
    Ok(Experiment { mean, models })
}

/// Paths [`run_experiment`] writes for `cfg`.
pub fn output_files(cfg: &RunConfig) -> Vec<PathBuf> {
    let Some(out) = &cfg.output else {
        return Vec::new();
    };
    let mut files = vec![out.clone()];
    if cfg.num_seeds > 1 {
        files.extend(cfg.seeds().map(|s| seed_path(out, s)));
    }
    files
}

/// Provenance record written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest<C> {
    pub config: C,
    pub git_revision: String,
    pub seed: Option<u64>,
    pub outputs: Vec<PathBuf>,
}

impl<C: Serialize> RunManifest<C> {
    pub fn new(config: C, seed: Option<u64>, outputs: Vec<PathBuf>) -> Self {
        RunManifest {
            config,
            git_revision: git_revision(),
            seed,
            outputs,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Parse {
            context: path.display().to_string(),
            message: e.to_string(),
        })?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }
}

/// `git rev-parse HEAD` of the working directory, or `"unknown"`.
pub fn git_revision() -> String {
    std::process::Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_config_json_is_tagged() {
        let algo = AlgorithmConfig::UcbAd(UcbConfig::default());
        let json = serde_json::to_string(&algo).unwrap();
        assert!(json.starts_with(r#"{"algo":"ucb-ad","#), "{json}");
        let back: AlgorithmConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, algo);
    }

    #[test]
    fn seed_files_sit_next_to_output() {
        let cfg = RunConfig {
            algorithm: AlgorithmConfig::Baseline(BaselineConfig::default()),
            seed: 3,
            num_seeds: 2,
            output: Some(PathBuf::from("out/regret.csv")),
        };
        assert_eq!(
            output_files(&cfg),
            vec![
                PathBuf::from("out/regret.csv"),
                PathBuf::from("out/regret.seed3.csv"),
                PathBuf::from("out/regret.seed4.csv")
            ]
        );
    }
}
