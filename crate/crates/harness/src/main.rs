use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mcfusion::diagnostics::Algorithm;
use mcfusion_harness::config::ConfigSpec;
use mcfusion_harness::experiment::{self, write_json};
use mcfusion_harness::{run_experiment, run_sweep, Result, Target};

/// Exact Monte Carlo fusion experiments.
#[derive(Debug, Parser)]
#[command(name = "mcfusion", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact fusion with Brownian-bridge proposals.
    FuseBm(Common),
    /// Exact fusion with Ornstein-Uhlenbeck proposals.
    FuseOu(Common),
    /// Consensus Monte Carlo with surrogate precision weights.
    Cmc(Common),
    /// OU proposal with the Gaussian gate only (T may be `inf`).
    ApproxOu(Common),
    /// Direct draws from the fused target, for reference.
    Direct(Common),
    /// Cost per accepted draw over a grid of horizons.
    SweepT {
        #[command(flatten)]
        common: Common,
        /// Comma-separated horizons.
        #[arg(long, value_delimiter = ',', required = true)]
        t_grid: Vec<f64>,
        /// Sampler to sweep.
        #[arg(long, default_value = "bm")]
        algorithm: Algorithm,
    },
    /// Estimate and print the Gaussian surrogate (μ̂, Λ̂).
    Surrogate(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML file with any of the settings below; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    target: Option<Target>,
    /// Number of factors.
    #[arg(long)]
    c: Option<usize>,
    /// Horizon T.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Number of draws.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// KDE bandwidth on the reported scale.
    #[arg(long, allow_hyphen_values = true)]
    bandwidth: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Shared surrogate mean.
    #[arg(long, allow_hyphen_values = true)]
    mu_hat: Option<f64>,
    /// Surrogate precisions, one shared value or one per factor.
    #[arg(long, value_delimiter = ',')]
    lambda_hat: Option<Vec<f64>>,
    /// Preliminary draws per factor when estimating the surrogate.
    #[arg(long)]
    n_pre: Option<usize>,
    /// CSV of reference draws for a two-sample KS test.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Independent random streams (the output depends on this value).
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn spec(self, algorithm: Algorithm) -> Result<ConfigSpec> {
        let base = match &self.config {
            Some(path) => ConfigSpec::from_toml_file(path)?,
            None => ConfigSpec::default(),
        };
        let flags = ConfigSpec {
            target: self.target,
            algorithm: Some(algorithm),
            c: self.c,
            t: self.t,
            n: self.n,
            seed: self.seed,
            bandwidth: self.bandwidth,
            n_pre: self.n_pre,
            mu_hat: self.mu_hat,
            lambda_hat: self.lambda_hat,
            workers: self.workers,
            out: self.out,
            reference: self.reference,
            custom: None,
        };
        Ok(base.merge(flags))
    }
}

fn run(cli: Cli) -> Result<()> {
    let (common, algorithm) = match cli.command {
        Command::FuseBm(c) => (c, Algorithm::Bm),
        Command::FuseOu(c) => (c, Algorithm::Ou),
        Command::Cmc(c) => (c, Algorithm::Cmc),
        Command::ApproxOu(c) => (c, Algorithm::ApproxOu),
        Command::Direct(c) => (c, Algorithm::Direct),
        Command::SweepT {
            common,
            t_grid,
            algorithm,
        } => {
            let config = common.spec(algorithm)?.resolve()?;
            let rows = run_sweep(&config, &t_grid)?;
            for r in &rows {
                println!(
                    "T={} attempts/sample={:.3} work/sample={:.1} seconds/sample={:.3e}",
                    r.t, r.attempts_per_sample, r.work_per_sample, r.seconds_per_sample
                );
            }
            println!("wrote {}", config.out.join("sweep.csv").display());
            return Ok(());
        }
        Command::Surrogate(common) => {
            let config = common.spec(Algorithm::Ou)?.resolve()?;
            let problem = experiment::problem(&config)?;
            let params = experiment::surrogate(&config, &problem)?;
            experiment::ensure_dir(&config.out)?;
            let path = config.out.join("surrogate.json");
            write_json(&path, &params)?;
            println!("mu_hat = {:?}", params.mu_hat);
            println!("lambda_hat = {:?}", params.lambda_hat);
            println!("wrote {}", path.display());
            return Ok(());
        }
    };
    let config = common.spec(algorithm)?.resolve()?;
    let (output, summary) = run_experiment(&config)?;
    let d = &output.diagnostics;
    println!(
        "{} {}: {} draws, mean {:.5}, variance {:.5}",
        config.target.name(),
        algorithm,
        summary.n,
        summary.mean,
        summary.variance
    );
    if let (Some(r1), Some(r2)) = (d.stage1_rate(), d.stage2_rate()) {
        println!("stage-1 acceptance {r1:.4}, stage-2 acceptance {r2:.4}");
    }
    if let Some(ks) = &summary.ks {
        println!("KS vs reference: D = {:.5}, p = {:.4}", ks.statistic, ks.p_value);
    }
    println!("wrote {}", config.out.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
