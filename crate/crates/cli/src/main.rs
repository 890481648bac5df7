//! Command-line front end: generate deployment scenarios, simulate them,
//! run seed batches, and aggregate batch summaries.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use airmab::engine::experiments;
use airmab::report::{self, BoxStats};
use airmab::{
    generate_scenario, run, run_batch, toy_scenario, AgentSelection, BatchRow, Mode,
    PosteriorMemory, RunResult, Scenario, SimConfig,
};

#[derive(Parser)]
#[command(name = "airmab", version, about = "Multi-armed-bandit WLAN simulator", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a deployment scenario file (AP/station placement, channels).
    Generate(GenerateArgs),
    /// Simulate one scenario and write time series, trace, and summary.
    Run(RunArgs),
    /// Simulate many generated scenarios and write a batch summary.
    Batch(BatchArgs),
    /// Aggregate an existing batch summary into box stats and a CDF.
    Report(ReportArgs),
}

/// Configuration file plus per-key command-line overrides.
#[derive(Args)]
struct ConfigArgs {
    /// Configuration file (TOML); built-in defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Simulated horizon in seconds.
    #[arg(long)]
    t_sim: Option<f64>,
    /// Channel-agent decision period in seconds.
    #[arg(long)]
    t_dca: Option<f64>,
    /// Selection-agent decision period in seconds.
    #[arg(long)]
    t_daps: Option<f64>,
    /// Agent reward window in seconds.
    #[arg(long)]
    t_sw: Option<f64>,
    /// Satisfaction threshold for convergence.
    #[arg(long)]
    p_th: Option<f64>,
    /// Number of access points to place.
    #[arg(long)]
    n_aps: Option<usize>,
    /// Number of stations to place.
    #[arg(long)]
    n_stations: Option<usize>,
    /// Available channel numbers, comma separated (e.g. 36,40,44).
    #[arg(long, value_delimiter = ',')]
    channels: Option<Vec<u16>>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Agent kinds in adaptive mode: none, dca, daps, or both.
    #[arg(long)]
    agents: Option<String>,
    /// Posterior memory: window (rebuild from in-window reward samples) or
    /// lifetime (keep every past activation's windowed mean forever).
    #[arg(long)]
    posterior_memory: Option<String>,
    /// Time before which agents stay dormant, in seconds.
    #[arg(long)]
    agent_enable_time: Option<f64>,
    /// Metrics sampling interval in seconds.
    #[arg(long)]
    metrics_interval: Option<f64>,
    /// Cross-check incremental state every N events (0 disables).
    #[arg(long)]
    audit_every: Option<u64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(path) => SimConfig::load(path)
                .with_context(|| format!("loading config {}", path.display()))?,
            None => SimConfig::default(),
        };
        self.apply(&mut cfg)?;
        cfg.validate().context("invalid configuration")?;
        Ok(cfg)
    }

    fn apply(&self, cfg: &mut SimConfig) -> Result<()> {
        if let Some(v) = self.t_sim {
            cfg.t_sim = v;
        }
        if let Some(v) = self.t_dca {
            cfg.t_dca = v;
        }
        if let Some(v) = self.t_daps {
            cfg.t_daps = v;
        }
        if let Some(v) = self.t_sw {
            cfg.t_sw = v;
        }
        if let Some(v) = self.p_th {
            cfg.p_th = v;
        }
        if let Some(v) = self.n_aps {
            cfg.n_aps = v;
        }
        if let Some(v) = self.n_stations {
            cfg.n_stations = v;
        }
        if let Some(v) = &self.channels {
            cfg.channels = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.agents {
            cfg.agents_enabled = v.parse::<AgentSelection>()?;
        }
        if let Some(v) = &self.posterior_memory {
            cfg.posterior_memory = v.parse::<PosteriorMemory>()?;
        }
        if let Some(v) = self.agent_enable_time {
            cfg.agent_enable_time = v;
        }
        if let Some(v) = self.metrics_interval {
            cfg.metrics_interval = v;
        }
        if let Some(v) = self.audit_every {
            cfg.audit_every = Some(v);
        }
        Ok(())
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Canned experiment instead of a random deployment.
    #[arg(long, value_parser = ["toy", "toy-nonstationary"])]
    preset: Option<String>,
    /// Where to write the scenario.
    #[arg(long, default_value = "scenario.toml")]
    out: PathBuf,
    /// Also write the resolved configuration here.
    #[arg(long)]
    emit_config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file from `generate`; generated from the config when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
    /// static (keep the initial configuration) or adaptive (agents run).
    #[arg(long, default_value = "adaptive")]
    mode: String,
    /// Output directory for time_series.csv, agent_trace.csv, summary.json.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Number of generated scenarios (seeds seed, seed+1, ...).
    #[arg(long, default_value_t = 20)]
    scenarios: usize,
    /// static, adaptive, or both.
    #[arg(long, default_value = "both")]
    mode: String,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    parallelism: Option<usize>,
    /// Output directory for batch_summary.csv and aggregates.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// batch_summary.csv produced by `batch`.
    #[arg(long, default_value = "out/batch_summary.csv")]
    batch: PathBuf,
    /// Output directory; defaults to the summary's directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => generate(args),
        Command::Run(args) => run_one(args),
        Command::Batch(args) => batch(args),
        Command::Report(args) => aggregate(args),
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let (cfg, scenario) = match args.preset.as_deref() {
        None => {
            let cfg = args.config.resolve()?;
            let scenario = generate_scenario(&cfg)?;
            (cfg, scenario)
        }
        Some(preset) => {
            if args.config.config.is_some() {
                bail!("--preset and --config are mutually exclusive");
            }
            let seed = args.config.seed.unwrap_or(1);
            let mut cfg = match preset {
                "toy" => experiments::toy_config(seed, AgentSelection::Both),
                "toy-nonstationary" => {
                    experiments::nonstationary_config(seed, SimConfig::default().t_sw)
                }
                _ => unreachable!("clap validated the preset"),
            };
            args.config.apply(&mut cfg)?;
            cfg.validate().context("invalid configuration")?;
            let scenario = toy_scenario(&cfg, 40)?;
            (cfg, scenario)
        }
    };
    scenario.save(&args.out)?;
    println!(
        "wrote {} ({} APs, {} stations, channels {:?}, seed {})",
        args.out.display(),
        scenario.aps.len(),
        scenario.stations.len(),
        scenario.channels,
        scenario.seed
    );
    if let Some(path) = &args.emit_config {
        cfg.save(path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn load_or_generate(path: Option<&Path>, cfg: &SimConfig) -> Result<Scenario> {
    match path {
        Some(p) => Scenario::load(p).with_context(|| format!("loading scenario {}", p.display())),
        None => Ok(generate_scenario(cfg)?),
    }
}

fn run_one(args: RunArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let mode: Mode = args.mode.parse()?;
    let scenario = load_or_generate(args.scenario.as_deref(), &cfg)?;
    let result = run(&scenario, &cfg, mode)?;
    report::emit_run(&args.out_dir, &result)?;
    print_run(&result);
    println!(
        "wrote {dir}/time_series.csv, {dir}/agent_trace.csv, {dir}/summary.json",
        dir = args.out_dir.display()
    );
    Ok(())
}

fn print_run(r: &RunResult) {
    println!(
        "{} run over {:.0} s: mean satisfaction {:.4}, throughput {:.2} Mbit/s, drop ratio {:.4}",
        r.mode,
        r.t_sim_s,
        r.mean_satisfaction,
        r.agg_throughput_bps / 1e6,
        r.drop_ratio
    );
    match r.convergence_time_s {
        Some(t) => println!(
            "converged at {t:.0} s; {} reconfigurations",
            r.agent_trace.len()
        ),
        None => println!("did not converge; {} reconfigurations", r.agent_trace.len()),
    }
}

fn parse_modes(s: &str) -> Result<Vec<Mode>> {
    if s == "both" {
        Ok(vec![Mode::Static, Mode::Adaptive])
    } else {
        Ok(vec![s.parse()?])
    }
}

fn batch(args: BatchArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let modes = parse_modes(&args.mode)?;
    if let Some(threads) = args.parallelism {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let rows = run_batch(&cfg, args.scenarios, &modes)?;
    report::emit_batch(&args.out_dir, &rows)?;
    report::emit_aggregate(&args.out_dir, &rows)?;
    print_batch(&rows);
    println!(
        "wrote {dir}/batch_summary.csv, {dir}/box_stats.csv, {dir}/convergence_cdf.csv",
        dir = args.out_dir.display()
    );
    Ok(())
}

fn aggregate(args: ReportArgs) -> Result<()> {
    let rows = report::read_batch(&args.batch)?;
    let out_dir = match args.out_dir {
        Some(d) => d,
        None => args
            .batch
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    report::emit_aggregate(&out_dir, &rows)?;
    print_batch(&rows);
    println!(
        "wrote {dir}/box_stats.csv, {dir}/convergence_cdf.csv",
        dir = out_dir.display()
    );
    Ok(())
}

fn print_batch(rows: &[BatchRow]) {
    for mode in [Mode::Static, Mode::Adaptive] {
        let sats: Vec<f64> = rows
            .iter()
            .filter(|r| r.mode == mode)
            .map(|r| r.mean_satisfaction)
            .collect();
        let Some(stats) = BoxStats::from_samples(&sats) else {
            continue;
        };
        let converged = rows
            .iter()
            .filter(|r| r.mode == mode && r.convergence_time_s.is_some())
            .count();
        println!(
            "{:9} n={:3} mean satisfaction median {:.4} (IQR {:.4}), converged {}/{}",
            mode.to_string(),
            sats.len(),
            stats.median,
            stats.iqr(),
            converged,
            sats.len()
        );
    }
}
