//! Command-line front end. Every subcommand reads an optional flat TOML file
//! whose keys are the long flag names; flags given on the command line win.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::distribution::DistributionSpec;
use crate::environments::{TwoPointInstance, ValueSchedule};
use crate::grid::{ceil_cbrt, ceil_log2, ceil_sqrt};
use crate::harness::output::{summary_rows, write_summary, SummaryRow};
use crate::harness::{
    fit_slope, named_distribution, run_replications, write_results, BatchResult, Experiment, ExperimentConfig,
    Sidecar, SlopeFit, Summary,
};
use crate::policies::{PolicyConfig, PolicyKind, DEFAULT_GAMMA};

#[derive(Debug, Parser)]
#[command(name = "fpa", version, about = "Regret experiments for bidding in repeated first-price auctions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One policy, one price distribution, one horizon.
    Run(AuctionArgs),
    /// The same experiment over several horizons, with a log-log slope fit.
    Sweep(AuctionArgs),
    /// Generic MSE on the hard instance with decreasing block contexts.
    Lowerbound(LowerBoundArgs),
    /// A policy on both two-point price distributions, regret averaged.
    Twopoint(TwoPointArgs),
    /// Inventory MSE against iid demand.
    Inventory(InventoryArgs),
    /// Small end-to-end sample that prints a regret table.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Flat TOML file; keys are the long flag names.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Horizon.
    #[arg(long = "T", value_name = "T")]
    pub horizon: Option<usize>,
    /// Comma-separated horizons.
    #[arg(long = "T-list", value_name = "T1,T2,...", value_delimiter = ',')]
    pub horizons: Option<Vec<usize>>,
    /// Replications per horizon.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Confidence multiplier.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// More progress output on stderr.
    #[arg(short, long, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Args)]
pub struct AuctionArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bidding policy.
    #[arg(long, value_enum)]
    pub policy: Option<PolicyKind>,
    /// Price distribution: uniform, two_point_g1, two_point_g2, piecewise, truncnorm.
    #[arg(long)]
    pub env: Option<String>,
    /// Values: iid_uniform, decreasing, constant:<v>, blocks:<M>, file:<path>.
    #[arg(long)]
    pub values: Option<String>,
    /// Value levels (MSE).
    #[arg(long = "M", value_name = "M")]
    pub contexts: Option<usize>,
    /// Bid grid size.
    #[arg(long = "K", value_name = "K")]
    pub grid_size: Option<usize>,
    /// Levels (ML-IS-UCB).
    #[arg(long = "L", value_name = "L")]
    pub levels: Option<usize>,
    /// Exploration rounds (ETC).
    #[arg(long = "T-explore", value_name = "ROUNDS")]
    pub explore: Option<usize>,
    /// Gap of the two-point price distributions.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct LowerBoundArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Contexts; defaults to ⌈T^(1/3)⌉.
    #[arg(long = "M", value_name = "M")]
    pub contexts: Option<usize>,
    /// Actions; defaults to 2M.
    #[arg(long = "K", value_name = "K")]
    pub actions: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TwoPointArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bidding policy.
    #[arg(long, value_enum)]
    pub policy: Option<PolicyKind>,
    /// Bid grid size.
    #[arg(long = "K", value_name = "K")]
    pub grid_size: Option<usize>,
    /// Levels (ML-IS-UCB).
    #[arg(long = "L", value_name = "L")]
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct InventoryArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Demand distribution, named as for --env.
    #[arg(long)]
    pub env: Option<String>,
    /// Unit price p.
    #[arg(long)]
    pub price: Option<f64>,
    /// Unit overage cost h.
    #[arg(long)]
    pub overage: Option<f64>,
    /// Order levels.
    #[arg(long = "K", value_name = "K")]
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    /// Also write result files here.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Base seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    #[serde(rename = "T")]
    pub horizon: Option<usize>,
    #[serde(rename = "T-list")]
    pub horizons: Option<Vec<usize>>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub gamma: Option<f64>,
    pub policy: Option<PolicyKind>,
    pub env: Option<String>,
    pub values: Option<String>,
    #[serde(rename = "M")]
    pub contexts: Option<usize>,
    #[serde(rename = "K")]
    pub grid_size: Option<usize>,
    #[serde(rename = "L")]
    pub levels: Option<usize>,
    #[serde(rename = "T-explore")]
    pub explore: Option<usize>,
    pub delta: Option<f64>,
    pub price: Option<f64>,
    pub overage: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).map_err(|e: toml::de::Error| {
            let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
            let at = line.map(|l| format!(" line {l}")).unwrap_or_default();
            anyhow::anyhow!("invalid config {}{at}: {}", path.display(), e.message().trim())
        })
    }

    fn present(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut add = |set: bool, key| {
            if set {
                keys.push(key);
            }
        };
        add(self.out.is_some(), "out");
        add(self.horizon.is_some(), "T");
        add(self.horizons.is_some(), "T-list");
        add(self.reps.is_some(), "reps");
        add(self.seed.is_some(), "seed");
        add(self.gamma.is_some(), "gamma");
        add(self.policy.is_some(), "policy");
        add(self.env.is_some(), "env");
        add(self.values.is_some(), "values");
        add(self.contexts.is_some(), "M");
        add(self.grid_size.is_some(), "K");
        add(self.levels.is_some(), "L");
        add(self.explore.is_some(), "T-explore");
        add(self.delta.is_some(), "delta");
        add(self.price.is_some(), "price");
        add(self.overage.is_some(), "overage");
        keys
    }

    /// Rejects keys the subcommand has no flag for.
    fn check_keys(&self, command: &str, allowed: &[&str]) -> anyhow::Result<()> {
        if let Some(key) = self.present().into_iter().find(|k| !allowed.contains(k)) {
            bail!("config key `{key}` does not apply to `{command}`");
        }
        Ok(())
    }
}

const COMMON_KEYS: &[&str] = &["out", "T", "T-list", "reps", "seed", "gamma"];

fn load(common: &CommonArgs, command: &str, extra: &[&str]) -> anyhow::Result<FileConfig> {
    let Some(path) = &common.config else {
        return Ok(FileConfig::default());
    };
    let file = FileConfig::load(path)?;
    let allowed: Vec<&str> = COMMON_KEYS.iter().chain(extra).copied().collect();
    file.check_keys(command, &allowed)?;
    Ok(file)
}

/// Common settings after merging flags over file values over defaults.
struct Resolved {
    out: PathBuf,
    horizons: Vec<usize>,
    reps: usize,
    seed: u64,
    gamma: f64,
    verbose: u8,
}

fn resolve(common: &CommonArgs, file: &FileConfig, command: &str, default_t: usize) -> Resolved {
    // A horizon list wins over a single horizon from the same source.
    let horizons = common
        .horizons
        .clone()
        .or(common.horizon.map(|t| vec![t]))
        .or(file.horizons.clone())
        .or(file.horizon.map(|t| vec![t]))
        .unwrap_or_else(|| vec![default_t]);
    Resolved {
        out: common.out.clone().or(file.out.clone()).unwrap_or_else(|| PathBuf::from("results").join(command)),
        horizons,
        reps: common.reps.or(file.reps).unwrap_or(10),
        seed: common.seed.or(file.seed).unwrap_or(1),
        gamma: common.gamma.or(file.gamma).unwrap_or(DEFAULT_GAMMA),
        verbose: common.verbose,
    }
}

fn single_horizon(r: &Resolved, command: &str) -> anyhow::Result<usize> {
    match r.horizons.as_slice() {
        [t] => Ok(*t),
        _ => bail!("`{command}` takes one horizon; use `sweep` for a list"),
    }
}

/// One finished horizon.
struct Outcome {
    horizon: usize,
    batch: BatchResult,
}

fn run_one(
    config: ExperimentConfig,
    dir: &Path,
    derived: &[(&str, f64)],
    verbose: u8,
) -> anyhow::Result<Outcome> {
    if verbose > 0 {
        eprintln!("running {} at T = {} with {} replications", config.experiment.label(), config.horizon, config.replications);
    }
    let batch = run_replications(&config)?;
    let mut sidecar = Sidecar::new(&config, &batch.traces);
    for (k, v) in derived {
        sidecar.derived.insert((*k).to_string(), *v);
    }
    write_results(dir, &batch.traces, &batch.summary, &sidecar)?;
    Ok(Outcome { horizon: config.horizon, batch })
}

fn horizon_dir(out: &Path, horizon: usize) -> PathBuf {
    out.join(format!("T_{horizon}"))
}

fn final_line(out: &mut impl Write, s: &Summary) -> std::io::Result<()> {
    let last = s.checkpoints.last();
    writeln!(
        out,
        "T = {:>8}  mean regret {:>12.3}  std {:>10.3}  n = {}",
        s.horizon,
        last.map_or(0.0, |c| c.mean),
        last.map_or(0.0, |c| c.std),
        last.map_or(0, |c| c.n)
    )
}

/// Writes the combined summary and, with four or more horizons, the slope.
fn finish_sweep(out_dir: &Path, outcomes: &[Outcome], out: &mut impl Write) -> anyhow::Result<Option<SlopeFit>> {
    let summaries: Vec<Summary> = outcomes.iter().map(|o| o.batch.summary.clone()).collect();
    let rows: Vec<SummaryRow> = summary_rows(&summaries);
    write_summary(&out_dir.join("summary.csv"), &rows)?;
    for s in &summaries {
        final_line(out, s)?;
    }
    if outcomes.len() < 4 {
        return Ok(None);
    }
    let horizons: Vec<usize> = outcomes.iter().map(|o| o.horizon).collect();
    let means: Vec<f64> = summaries.iter().map(|s| s.final_mean().unwrap_or(0.0)).collect();
    let fit = fit_slope(&horizons, &means)?;
    let path = out_dir.join("slope.toml");
    std::fs::write(&path, toml::to_string(&fit)?).with_context(|| format!("cannot write {}", path.display()))?;
    writeln!(out, "log-log slope {:.3} ± {:.3} (intercept {:.3})", fit.slope, fit.stderr, fit.intercept)?;
    Ok(Some(fit))
}

fn auction_experiment(a: &AuctionArgs, file: &FileConfig, r: &Resolved) -> anyhow::Result<Experiment> {
    let mut policy = PolicyConfig::new(a.policy.or(file.policy).unwrap_or(PolicyKind::Mse)).with_gamma(r.gamma);
    policy.contexts = a.contexts.or(file.contexts);
    policy.grid_size = a.grid_size.or(file.grid_size);
    policy.levels = a.levels.or(file.levels);
    policy.explore = a.explore.or(file.explore);
    let env = a.env.clone().or(file.env.clone()).unwrap_or_else(|| "uniform".into());
    let delta = a.delta.or(file.delta).unwrap_or(0.1);
    let prices = named_distribution(&env, delta, r.seed)?;
    let values: ValueSchedule = a.values.clone().or(file.values.clone()).unwrap_or_else(|| "iid_uniform".into()).parse()?;
    Ok(Experiment::Auction { policy, prices, values })
}

const AUCTION_KEYS: &[&str] = &["policy", "env", "values", "M", "K", "L", "T-explore", "delta"];

pub fn cmd_run(a: &AuctionArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let file = load(&a.common, "run", AUCTION_KEYS)?;
    let r = resolve(&a.common, &file, "run", 1 << 14);
    let t = single_horizon(&r, "run")?;
    let cfg = ExperimentConfig::new(auction_experiment(a, &file, &r)?, t, r.reps, r.seed);
    let done = run_one(cfg, &r.out, &[], r.verbose)?;
    final_line(out, &done.batch.summary)?;
    writeln!(out, "results in {}", r.out.display())?;
    Ok(())
}

pub fn cmd_sweep(a: &AuctionArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let file = load(&a.common, "sweep", AUCTION_KEYS)?;
    let mut r = resolve(&a.common, &file, "sweep", 0);
    if r.horizons == [0] {
        r.horizons = (10..=17).map(|e| 1usize << e).collect();
    }
    if r.horizons.len() < 4 {
        bail!("sweep needs at least 4 horizons, got {}", r.horizons.len());
    }
    let exp = auction_experiment(a, &file, &r)?;
    let mut outcomes = Vec::new();
    for &t in &r.horizons {
        let cfg = ExperimentConfig::new(exp.clone(), t, r.reps, r.seed ^ t as u64);
        outcomes.push(run_one(cfg, &horizon_dir(&r.out, t), &[], r.verbose)?);
    }
    finish_sweep(&r.out, &outcomes, out)?;
    writeln!(out, "results in {}", r.out.display())?;
    Ok(())
}

pub fn cmd_lowerbound(a: &LowerBoundArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let file = load(&a.common, "lowerbound", &["M", "K"])?;
    let r = resolve(&a.common, &file, "lowerbound", 1 << 12);
    let contexts = a.contexts.or(file.contexts);
    let actions = a.actions.or(file.grid_size);
    let mut outcomes = Vec::new();
    for &t in &r.horizons {
        let m = contexts.unwrap_or_else(|| ceil_cbrt(t));
        let k = actions.unwrap_or(2 * m);
        let exp = Experiment::LowerBound { gamma: r.gamma, contexts: Some(m), actions: Some(k), signs: None };
        let cfg = ExperimentConfig::new(exp, t, r.reps, r.seed ^ t as u64);
        let dir = if r.horizons.len() == 1 { r.out.clone() } else { horizon_dir(&r.out, t) };
        outcomes.push(run_one(cfg, &dir, &[("M", m as f64), ("K", k as f64)], r.verbose)?);
    }
    if r.horizons.len() > 1 {
        finish_sweep(&r.out, &outcomes, out)?;
    } else {
        final_line(out, &outcomes[0].batch.summary)?;
    }
    for o in &outcomes {
        let mean = o.batch.summary.final_mean().unwrap_or(0.0);
        writeln!(out, "T = {:>8}  regret / T^(2/3) = {:.4}", o.horizon, mean / (o.horizon as f64).powf(2.0 / 3.0))?;
    }
    writeln!(out, "results in {}", r.out.display())?;
    Ok(())
}

pub fn cmd_twopoint(a: &TwoPointArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let file = load(&a.common, "twopoint", &["policy", "K", "L"])?;
    let r = resolve(&a.common, &file, "twopoint", 10_000);
    let mut policy = PolicyConfig::new(a.policy.or(file.policy).unwrap_or(PolicyKind::MlIsUcb)).with_gamma(r.gamma);
    policy.grid_size = a.grid_size.or(file.grid_size);
    policy.levels = a.levels.or(file.levels);
    let mut outcomes = Vec::new();
    for &t in &r.horizons {
        let inst = TwoPointInstance::for_horizon(t)?;
        let floor = TwoPointInstance::regret_floor(t);
        let cfg = ExperimentConfig::new(Experiment::TwoPoint { policy: policy.clone() }, t, r.reps, r.seed ^ t as u64);
        let dir = if r.horizons.len() == 1 { r.out.clone() } else { horizon_dir(&r.out, t) };
        outcomes.push(run_one(cfg, &dir, &[("delta", inst.delta), ("regret_floor", floor)], r.verbose)?);
    }
    if r.horizons.len() > 1 {
        finish_sweep(&r.out, &outcomes, out)?;
    } else {
        final_line(out, &outcomes[0].batch.summary)?;
    }
    for o in &outcomes {
        let t = o.horizon;
        writeln!(
            out,
            "T = {:>8}  Δ = {:.6}  averaged regret {:.3}  floor √T/(24e²) = {:.3}",
            t,
            0.25 / (t as f64).sqrt(),
            o.batch.summary.final_mean().unwrap_or(0.0),
            TwoPointInstance::regret_floor(t)
        )?;
    }
    writeln!(out, "results in {}", r.out.display())?;
    Ok(())
}

pub fn cmd_inventory(a: &InventoryArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let file = load(&a.common, "inventory", &["env", "price", "overage", "K"])?;
    let r = resolve(&a.common, &file, "inventory", 1 << 14);
    let price = a.price.or(file.price).unwrap_or(1.0);
    let overage = a.overage.or(file.overage).unwrap_or(1.0);
    if !(price > 0.0 && overage > 0.0) {
        bail!("price and overage must be positive");
    }
    let demand = match a.env.clone().or(file.env.clone()) {
        Some(name) => named_distribution(&name, 0.1, r.seed)?,
        None => DistributionSpec::Uniform,
    };
    let levels = a.levels.or(file.grid_size);
    let quantile = price / (price + overage);
    let mut outcomes = Vec::new();
    for &t in &r.horizons {
        let exp = Experiment::Inventory { demand: demand.clone(), price, overage, gamma: r.gamma, levels };
        let cfg = ExperimentConfig::new(exp, t, r.reps, r.seed ^ t as u64);
        let dir = if r.horizons.len() == 1 { r.out.clone() } else { horizon_dir(&r.out, t) };
        outcomes.push(run_one(cfg, &dir, &[("critical_quantile", quantile)], r.verbose)?);
    }
    if r.horizons.len() > 1 {
        finish_sweep(&r.out, &outcomes, out)?;
    } else {
        final_line(out, &outcomes[0].batch.summary)?;
    }
    for o in &outcomes {
        let best: Vec<f64> = o.batch.traces.iter().filter_map(|tr| tr.best_level).collect();
        let mean = best.iter().sum::<f64>() / best.len().max(1) as f64;
        let tol = 2.0 / (o.horizon as f64).sqrt();
        writeln!(
            out,
            "T = {:>8}  critical quantile {quantile:.4}  mean best level {mean:.4}  levels per rep: {}  (tolerance {tol:.4})",
            o.horizon,
            best.iter().map(|b| format!("{b:.4}")).collect::<Vec<_>>().join(" ")
        )?;
    }
    writeln!(out, "results in {}", r.out.display())?;
    Ok(())
}

/// Small horizons and few replications: finishes in seconds.
pub fn cmd_demo(a: &DemoArgs, out: &mut impl Write) -> anyhow::Result<()> {
    let seed = a.seed.unwrap_or(1);
    let horizons = [1usize << 10, 1 << 11, 1 << 12, 1 << 13];
    let reps = 5;
    let rows: Vec<(String, Experiment)> = vec![
        (
            "mse, iid values".into(),
            Experiment::Auction {
                policy: PolicyConfig::new(PolicyKind::Mse),
                prices: DistributionSpec::Uniform,
                values: ValueSchedule::iid_uniform(),
            },
        ),
        (
            "ml_is_ucb, decreasing".into(),
            Experiment::Auction {
                policy: PolicyConfig::new(PolicyKind::MlIsUcb),
                prices: DistributionSpec::Uniform,
                values: ValueSchedule::Decreasing,
            },
        ),
        (
            "etc, decreasing".into(),
            Experiment::Auction {
                policy: PolicyConfig::new(PolicyKind::Etc),
                prices: DistributionSpec::Uniform,
                values: ValueSchedule::Decreasing,
            },
        ),
        (
            "is_ucb, iid values".into(),
            Experiment::Auction {
                policy: PolicyConfig::new(PolicyKind::IsUcb),
                prices: DistributionSpec::Uniform,
                values: ValueSchedule::iid_uniform(),
            },
        ),
        (
            "oracle, iid values".into(),
            Experiment::Auction {
                policy: PolicyConfig::new(PolicyKind::Oracle),
                prices: DistributionSpec::Uniform,
                values: ValueSchedule::iid_uniform(),
            },
        ),
    ];
    write!(out, "{:<24}", "mean regret")?;
    for t in horizons {
        write!(out, "{:>12}", format!("T={t}"))?;
    }
    writeln!(out, "{:>10}", "slope")?;
    for (name, exp) in rows {
        write!(out, "{name:<24}")?;
        let mut means = Vec::new();
        for &t in &horizons {
            let cfg = ExperimentConfig::new(exp.clone(), t, reps, seed ^ t as u64);
            let batch = run_replications(&cfg)?;
            if let Some(dir) = &a.out {
                let sub = dir.join(name.replace([',', ' '], "_").replace("__", "_")).join(format!("T_{t}"));
                write_results(&sub, &batch.traces, &batch.summary, &Sidecar::new(&cfg, &batch.traces))?;
            }
            let mean = batch.summary.final_mean().unwrap_or(0.0);
            write!(out, "{mean:>12.2}")?;
            means.push(mean);
        }
        match fit_slope(&horizons, &means) {
            Ok(fit) => writeln!(out, "{:>10.3}", fit.slope)?,
            Err(_) => writeln!(out, "{:>10}", "-")?,
        }
    }
    writeln!(
        out,
        "(K = ⌈√T⌉, L = ⌈log₂T⌉, γ = {DEFAULT_GAMMA}, {reps} replications, uniform prices; \
         defaults at T = 2^13: K = {}, L = {})",
        ceil_sqrt(1 << 13),
        ceil_log2(1 << 13)
    )?;
    Ok(())
}

pub fn run(cli: Cli, out: &mut impl Write) -> anyhow::Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Lowerbound(a) => cmd_lowerbound(a, out),
        Command::Twopoint(a) => cmd_twopoint(a, out),
        Command::Inventory(a) => cmd_inventory(a, out),
        Command::Demo(a) => cmd_demo(a, out),
    }
}
