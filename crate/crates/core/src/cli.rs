//! Command-line front end: argument parsing, config files and output writing.

use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::envs::{load_instance, EnvSelector, HumanPolicyKind, Instance};
use crate::error::Error;
use crate::machine::{build_machine_mdp, MachineMdp};
use crate::pertinence::{beta_sweep, human_value, CmdpSolution};
use crate::planning::{
    backward_induction, expected_advice_count, mixture_advice_count, mixture_evaluation,
    policy_evaluation,
};
use crate::policy::{AdvicePolicy, MixturePolicy, PolicyFile};
use crate::rfe::{solve_budgeted, EmpiricalModel, RfeConfig, ThresholdMode};
use crate::sim::baseline::BaselineConfig;
use crate::sim::experiment::{
    output_files, run_experiment, AlgorithmConfig, RunConfig, RunManifest,
};
use crate::ucb::{UcbConfig, WidthMode};

const STAGE_HEADER: &str = "beta_or_D,value,advice_count,num_advised_state_steps";

#[derive(Debug, Parser)]
#[command(
    name = "adherence",
    version,
    about = "Plan and learn advice policies for a human who may ignore advice"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal advice policy on the true model
    Plan(Args),
    /// Online learning with optimistic adherence estimates
    LearnUcb(Args),
    /// Reward-free exploration, then penalized and budgeted planning on the learned model
    LearnRfe(Args),
    /// Penalized planning over a list of advice costs
    SweepBeta(Args),
    /// Planning under an expected advice budget
    Cmdp(Args),
    /// Evaluate a policy file on the true model
    Eval(Args),
}

impl Command {
    pub fn name(&self) -> CommandName {
        match self {
            Command::Plan(_) => CommandName::Plan,
            Command::LearnUcb(_) => CommandName::LearnUcb,
            Command::LearnRfe(_) => CommandName::LearnRfe,
            Command::SweepBeta(_) => CommandName::SweepBeta,
            Command::Cmdp(_) => CommandName::Cmdp,
            Command::Eval(_) => CommandName::Eval,
        }
    }

    fn into_args(self) -> Args {
        match self {
            Command::Plan(a)
            | Command::LearnUcb(a)
            | Command::LearnRfe(a)
            | Command::SweepBeta(a)
            | Command::Cmdp(a)
            | Command::Eval(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Plan,
    LearnUcb,
    LearnRfe,
    SweepBeta,
    Cmdp,
    Eval,
}

impl CommandName {
    fn is_randomized(self) -> bool {
        matches!(self, CommandName::LearnUcb | CommandName::LearnRfe)
    }
}

impl Display for CommandName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CommandName::Plan => "plan",
            CommandName::LearnUcb => "learn-ucb",
            CommandName::LearnRfe => "learn-rfe",
            CommandName::SweepBeta => "sweep-beta",
            CommandName::Cmdp => "cmdp",
            CommandName::Eval => "eval",
        };
        f.write_str(s)
    }
}

/// Learner run by `learn-ucb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    UcbAd,
    Baseline,
}

/// Every subcommand accepts the full flag set and ignores flags it has no use for.
#[derive(Debug, Clone, PartialEq, clap::Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Args {
    /// Subcommand that produced this configuration.
    #[arg(skip)]
    pub command: Option<CommandName>,

    /// Environment: flappy, car or file:<path>
    #[arg(long, default_value = "flappy")]
    pub env: EnvSelector,

    /// Flappy map file replacing the built-in map
    #[arg(long)]
    pub map: Option<PathBuf>,

    /// Human policy for flappy: greedy or safe
    #[arg(long, default_value = "greedy")]
    pub human_policy: HumanPolicyKind,

    /// Learner for learn-ucb
    #[arg(long, value_enum, default_value = "ucb-ad")]
    pub algo: Algo,

    /// Episode budget for learn-ucb; exploration cap for learn-rfe
    #[arg(long, default_value_t = 1000)]
    pub episodes: u64,

    /// Confidence parameter
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,

    /// Target accuracy of reward-free exploration
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,

    /// Ascending advice costs in [0, H), comma separated
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub betas: Vec<f64>,

    /// Expected advice budgets, comma separated
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub budget: Vec<f64>,

    /// Adherence confidence width: theory or practical
    #[arg(long, default_value = "practical")]
    pub width_mode: WidthMode,

    /// Scale of the practical width
    #[arg(long, default_value_t = 0.4)]
    pub width_scale: f64,

    /// Exploration bonus scale for learn-rfe and the baseline
    #[arg(long, default_value_t = 1.0)]
    pub bonus_scale: f64,

    /// Episodes between policy recomputations
    #[arg(long, default_value_t = 1)]
    pub replan_every: u64,

    /// Episodes between logged rows of learn-ucb
    #[arg(long, default_value_t = 1)]
    pub log_every: u64,

    /// Plan stage-2 policies of learn-rfe with the true reward
    #[arg(long)]
    pub known_reward: bool,

    /// Random seed, required by learn-ucb and learn-rfe
    #[arg(long)]
    pub seed: Option<u64>,

    /// Number of seeds run side by side, starting at --seed
    #[arg(long, default_value_t = 1)]
    pub parallel_seeds: u64,

    /// Policy file read by eval
    #[arg(long)]
    pub policy: Option<PathBuf>,

    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,

    /// Run manifest or config file; flags given on the command line override it
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Default for Args {
    fn default() -> Self {
        let cmd = <Args as clap::Args>::augment_args(clap::Command::new("defaults"));
        let matches = cmd.get_matches_from(["defaults"]);
        Args::from_arg_matches(&matches).expect("defaults parse")
    }
}

/// Failure of a CLI invocation.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{flag}: {message}")]
    Usage { flag: String, message: String },
    #[error(transparent)]
    Runtime(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn usage(flag: &str, message: impl Display) -> CliError {
    CliError::Usage {
        flag: flag.to_string(),
        message: message.to_string(),
    }
}

fn flag_for(field: &str) -> String {
    match field {
        "beta" | "betas" => "--betas".into(),
        "max_episodes" | "episodes" => "--episodes".into(),
        "num_seeds" => "--parallel-seeds".into(),
        other => format!("--{}", other.replace('_', "-")),
    }
}

/// Configuration errors become usage errors naming the flag.
fn classify(e: Error) -> CliError {
    match e {
        Error::Config { field, reason } => usage(&flag_for(field), reason),
        other => CliError::Runtime(other),
    }
}

#[derive(Deserialize)]
struct ConfigFile {
    config: Args,
}

/// Fills every flag not given on the command line from `file`.
fn merge(args: &mut Args, file: Args, m: &ArgMatches) {
    macro_rules! take {
        ($($field:ident),*) => {$(
            if m.value_source(stringify!($field)) != Some(ValueSource::CommandLine) {
                args.$field = file.$field;
            }
        )*};
    }
    take!(
        env,
        map,
        human_policy,
        algo,
        episodes,
        delta,
        epsilon,
        betas,
        budget,
        width_mode,
        width_scale,
        bonus_scale,
        replan_every,
        log_every,
        known_reward,
        seed,
        parallel_seeds,
        policy,
        out
    );
}

/// Parses `argv` (program name first) into the resolved configuration.
pub fn resolve(
    argv: impl IntoIterator<Item = impl Into<OsString> + Clone>,
) -> Result<Args, ResolveError> {
    let matches = Cli::command()
        .try_get_matches_from(argv)
        .map_err(ResolveError::Clap)?;
    let cli = Cli::from_arg_matches(&matches).map_err(ResolveError::Clap)?;
    let name = cli.command.name();
    let sub = matches
        .subcommand()
        .map(|(_, m)| m)
        .expect("subcommand is required");
    let mut args = cli.command.into_args();
    if let Some(path) = args.config.clone() {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| usage("--config", format!("{}: {e}", path.display())))?;
        let file: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| usage("--config", format!("{}: {e}", path.display())))?;
        if let Some(other) = file.config.command.filter(|&c| c != name) {
            return Err(usage(
                "--config",
                format!("{} was written by `{other}`, not `{name}`", path.display()),
            )
            .into());
        }
        merge(&mut args, file.config, sub);
    }
    args.command = Some(name);
    Ok(args)
}

#[derive(Debug, thiserror::Error)]
pub enum ResolveError {
    #[error(transparent)]
    Clap(clap::Error),
    #[error(transparent)]
    Cli(#[from] CliError),
}

/// Runs the CLI and returns the process exit code.
pub fn run(argv: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let args = match resolve(argv) {
        Ok(a) => a,
        Err(ResolveError::Clap(e)) => {
            let _ = e.print();
            return e.exit_code();
        }
        Err(ResolveError::Cli(e)) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match execute(&args) {
        Ok(manifest) => {
            println!("wrote {}", manifest.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Executes a resolved configuration and returns the manifest path.
pub fn execute(args: &Args) -> Result<PathBuf, CliError> {
    let command = args
        .command
        .ok_or_else(|| usage("--config", "no subcommand recorded"))?;
    if command.is_randomized() && args.seed.is_none() {
        return Err(usage("--seed", format!("required by {command}")));
    }
    if command == CommandName::Eval && args.policy.is_none() {
        return Err(usage("--policy", "required by eval"));
    }
    let inst = load(args)?;
    let out = &args.out;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let written = match command {
        CommandName::Plan => plan(&inst, out)?,
        CommandName::LearnUcb => learn(&inst, args, out, ucb_algorithm(args))?,
        CommandName::LearnRfe => learn(&inst, args, out, rfe_algorithm(args))?,
        CommandName::SweepBeta => sweep(&inst, &args.betas, out)?,
        CommandName::Cmdp => cmdp(&inst, &args.budget, out)?,
        CommandName::Eval => eval(&inst, args.policy.as_deref().expect("checked above"), out)?,
    };
    let outputs = written
        .iter()
        .map(|p| p.strip_prefix(out).unwrap_or(p).to_path_buf())
        .collect();
    let manifest_path = out.join("manifest.json");
    RunManifest::new(args.clone(), args.seed, outputs).write(&manifest_path)?;
    Ok(manifest_path)
}

fn load(args: &Args) -> Result<Instance, CliError> {
    let flag = match (&args.env, &args.map) {
        (EnvSelector::Flappy, Some(_)) => "--map",
        _ => "--env",
    };
    load_instance(&args.env, args.map.as_deref(), args.human_policy).map_err(|e| usage(flag, e))
}

fn write(path: PathBuf, contents: String) -> Result<PathBuf, CliError> {
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("finite values serialize") + "\n"
}

fn truth(inst: &Instance) -> Result<MachineMdp, CliError> {
    Ok(build_machine_mdp(&inst.mdp, &inst.pi, &inst.theta)?)
}

#[derive(Serialize)]
struct Summary {
    value: f64,
    human_value: f64,
    advice_count: f64,
    num_advised_state_steps: f64,
}

fn plan(inst: &Instance, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let m = truth(inst)?;
    let s1 = m.initial_state();
    let plan = backward_induction(&m);
    let summary = Summary {
        value: plan.root_value(&m),
        human_value: human_value(&m).get(0, s1),
        advice_count: expected_advice_count(&m, &plan.policy)?,
        num_advised_state_steps: plan.policy.num_advised_cells() as f64,
    };
    Ok(vec![
        write(out.join("policy.json"), json(&plan.policy.to_file()))?,
        write(out.join("summary.json"), json(&summary))?,
    ])
}

fn ucb_algorithm(args: &Args) -> AlgorithmConfig {
    match args.algo {
        Algo::UcbAd => AlgorithmConfig::UcbAd(UcbConfig {
            delta: args.delta,
            episodes: args.episodes,
            width_mode: args.width_mode,
            width_scale: args.width_scale,
            replan_every: args.replan_every,
            log_every: args.log_every,
        }),
        Algo::Baseline => AlgorithmConfig::Baseline(BaselineConfig {
            delta: args.delta,
            episodes: args.episodes,
            bonus_scale: args.bonus_scale,
            replan_every: args.replan_every,
            log_every: args.log_every,
        }),
    }
}

fn rfe_algorithm(args: &Args) -> AlgorithmConfig {
    AlgorithmConfig::RfeAdvice(RfeConfig {
        epsilon: args.epsilon,
        delta: args.delta,
        bonus_scale: args.bonus_scale,
        threshold_mode: ThresholdMode::Advice,
        max_episodes: args.episodes,
        replan_every: args.replan_every,
        known_reward: args.known_reward,
        ..RfeConfig::default()
    })
}

fn learn(
    inst: &Instance,
    args: &Args,
    out: &Path,
    algorithm: AlgorithmConfig,
) -> Result<Vec<PathBuf>, CliError> {
    let cfg = RunConfig {
        algorithm,
        seed: args.seed.expect("checked by execute"),
        num_seeds: args.parallel_seeds,
        output: Some(out.join("metrics.csv")),
    };
    let experiment = run_experiment(inst, &cfg).map_err(classify)?;
    let mut written = output_files(&cfg);
    if let Some(Some(model)) = experiment.models.first() {
        written.extend(stage2(inst, model, args, out)?);
    }
    Ok(written)
}

fn stage_row(label: f64, value: f64, advice: f64, cells: f64) -> String {
    format!("{label},{value},{advice},{cells}\n")
}

/// Penalized and budgeted policies of the first seed's learned model, scored on the true model.
fn stage2(
    inst: &Instance,
    model: &EmpiricalModel,
    args: &Args,
    out: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let m = truth(inst)?;
    let s1 = m.initial_state();
    let learned = if args.known_reward {
        model.machine_mdp_with_rewards(m.rewards().to_vec())?
    } else {
        model.machine_mdp()?
    };
    let mut csv = format!("{STAGE_HEADER}\n");
    let mut written = Vec::new();
    for sol in beta_sweep(&learned, &args.betas).map_err(classify)?.entries {
        let value = policy_evaluation(&m, &sol.policy)?.get(0, s1);
        let advice = expected_advice_count(&m, &sol.policy)?;
        csv += &stage_row(
            sol.beta,
            value,
            advice,
            sol.policy.num_advised_cells() as f64,
        );
        written.push(write(
            out.join(format!("policy_beta_{}.json", sol.beta)),
            json(&sol.policy.to_file()),
        )?);
    }
    for &d in &args.budget {
        let sol = solve_budgeted(&learned, d).map_err(classify)?;
        let value = mixture_evaluation(&m, &sol.policy)?.get(0, s1);
        let advice = mixture_advice_count(&m, &sol.policy)?;
        csv += &stage_row(d, value, advice, mixture_cells(&sol.policy));
        written.push(write(
            out.join(format!("policy_budget_{d}.json")),
            json(&sol.policy.to_file()),
        )?);
    }
    written.insert(0, write(out.join("stage2.csv"), csv)?);
    Ok(written)
}

fn mixture_cells(p: &MixturePolicy) -> f64 {
    let q = p.q();
    q * p.first.num_advised_cells() as f64 + (1.0 - q) * p.second.num_advised_cells() as f64
}

fn sweep(inst: &Instance, betas: &[f64], out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let m = truth(inst)?;
    let mut csv = format!("{STAGE_HEADER}\n");
    let mut written = vec![out.join("sweep.csv")];
    for sol in beta_sweep(&m, betas).map_err(classify)?.entries {
        csv += &stage_row(
            sol.beta,
            sol.value,
            sol.advice_count,
            sol.policy.num_advised_cells() as f64,
        );
        written.push(write(
            out.join(format!("policy_beta_{}.json", sol.beta)),
            json(&sol.policy.to_file()),
        )?);
    }
    write(out.join("sweep.csv"), csv)?;
    Ok(written)
}

fn cmdp(inst: &Instance, budgets: &[f64], out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let m = truth(inst)?;
    let mut csv = format!("{STAGE_HEADER}\n");
    let mut written = vec![out.join("cmdp.csv")];
    for &d in budgets {
        let CmdpSolution {
            policy,
            value,
            advice_count,
            ..
        } = solve_budgeted(&m, d).map_err(classify)?;
        csv += &stage_row(d, value, advice_count, mixture_cells(&policy));
        written.push(write(
            out.join(format!("policy_budget_{d}.json")),
            json(&policy.to_file()),
        )?);
    }
    write(out.join("cmdp.csv"), csv)?;
    Ok(written)
}

#[derive(Serialize)]
struct Evaluation {
    value: f64,
    advice_count: f64,
    optimal_value: f64,
    human_value: f64,
    value_gap: f64,
}

fn eval(inst: &Instance, policy_path: &Path, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let m = truth(inst)?;
    let s1 = m.initial_state();
    let text = std::fs::read_to_string(policy_path)
        .map_err(|e| usage("--policy", Error::io(policy_path, e)))?;
    let file: PolicyFile = serde_json::from_str(&text).map_err(|e| usage("--policy", e))?;
    let policy = AdvicePolicy::from_file(&file).map_err(|e| usage("--policy", e))?;
    let mixture = match policy {
        AdvicePolicy::Deterministic(p) => MixturePolicy::pure(p),
        AdvicePolicy::Mixture(p) => p,
    };
    let value = mixture_evaluation(&m, &mixture)
        .map_err(|e| usage("--policy", e))?
        .get(0, s1);
    let optimal_value = backward_induction(&m).root_value(&m);
    let summary = Evaluation {
        value,
        advice_count: mixture_advice_count(&m, &mixture)?,
        optimal_value,
        human_value: human_value(&m).get(0, s1),
        value_gap: optimal_value - value,
    };
    Ok(vec![write(out.join("eval.json"), json(&summary))?])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(argv: &[&str]) -> Args {
        resolve(std::iter::once("adherence").chain(argv.iter().copied())).unwrap()
    }

    #[test]
    fn defaults_match_clap() {
        let a = args(&["plan"]);
        assert_eq!(Args { command: None, ..a }, Args::default());
    }

    #[test]
    fn lists_split_on_commas() {
        let a = args(&["sweep-beta", "--betas", "0,0.2,0.4"]);
        assert_eq!(a.betas, vec![0.0, 0.2, 0.4]);
        assert_eq!(a.command, Some(CommandName::SweepBeta));
    }

    #[test]
    fn flags_override_config_file() {
        let dir = std::env::temp_dir().join(format!("adherence-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = Args {
            command: Some(CommandName::LearnUcb),
            seed: Some(5),
            episodes: 77,
            delta: 0.3,
            ..Args::default()
        };
        let path = dir.join("manifest.json");
        RunManifest::new(file, Some(5), vec![])
            .write(&path)
            .unwrap();
        let a = args(&[
            "learn-ucb",
            "--config",
            path.to_str().unwrap(),
            "--delta",
            "0.2",
        ]);
        assert_eq!((a.seed, a.episodes, a.delta), (Some(5), 77, 0.2));
        let err = resolve(["adherence", "plan", "--config", path.to_str().unwrap()]).unwrap_err();
        assert!(
            matches!(err, ResolveError::Cli(CliError::Usage { ref flag, .. }) if flag == "--config")
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn config_errors_name_flags() {
        let e = classify(Error::config("bonus_scale", "must be positive"));
        assert_eq!(e.to_string(), "--bonus-scale: must be positive");
        assert_eq!(e.exit_code(), 2);
        assert_eq!(flag_for("beta"), "--betas");
    }
}
