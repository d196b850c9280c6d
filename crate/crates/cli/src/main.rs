use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use mfree_cli::{config::RunConfig, runner};

/// Adaptive meshless RBF-FD solver for linear-elasticity benchmark cases.
#[derive(Parser)]
#[command(name = "mfree", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case adaptively and write per-iteration artifacts.
    Run(RunArgs),
    /// Run a case once per value of a swept parameter.
    Sweep(SweepArgs),
    /// Pretty-print the per-iteration report of a finished run.
    Report {
        /// Run output directory containing report.csv.
        dir: PathBuf,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Case id: disk, hertz, fretting, boussinesq, or mwls-demo.
    #[arg(long)]
    case: String,
    /// Flat key-value config file applied over the case defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides applied last (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory root (default `./out`, or `MFREE_OUT_ROOT`).
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    dr0: Option<f64>,
    #[arg(long)]
    dr_upper: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    sigma_b: Option<f64>,
    #[arg(long)]
    stencil_n: Option<usize>,
    #[arg(long)]
    stencil_m: Option<usize>,
    #[arg(long)]
    shepard_n: Option<usize>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    node_budget: Option<usize>,
    /// Termination reduction of the indicator: mean or max.
    #[arg(long)]
    termination: Option<String>,
    /// Linear solver: direct or bicgstab.
    #[arg(long)]
    solver: Option<String>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::for_case(&self.case)?;
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        macro_rules! flag {
            ($field:expr, $key:literal) => {
                if let Some(v) = &$field {
                    cfg.apply($key, &v.to_string())?;
                }
            };
        }
        flag!(self.gamma, "gamma");
        flag!(self.seed, "seed");
        flag!(self.iters, "iters");
        flag!(self.dr0, "dr0");
        flag!(self.dr_upper, "dr_upper");
        flag!(self.epsilon, "epsilon");
        flag!(self.eta, "eta");
        flag!(self.alpha, "alpha");
        flag!(self.beta, "beta");
        flag!(self.sigma_b, "sigma_b");
        flag!(self.stencil_n, "n");
        flag!(self.stencil_m, "m");
        flag!(self.shepard_n, "shepard_n");
        flag!(self.zeta, "zeta");
        flag!(self.node_budget, "node_budget");
        flag!(self.termination, "termination");
        flag!(self.solver, "solver");
        for kv in &self.set {
            let Some((key, value)) = kv.split_once('=') else {
                anyhow::bail!("--set expects KEY=VALUE, got {kv:?}");
            };
            cfg.apply(key, value)?;
        }
        Ok(cfg)
    }

    fn out_root(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            std::env::var_os("MFREE_OUT_ROOT")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("out"))
        })
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Swept parameter: alpha, beta, epsilon, eta, sigma_b, n, or m.
    #[arg(long)]
    param: String,
    /// Comma-separated values to sweep.
    #[arg(long, value_delimiter = ',')]
    values: Vec<String>,
}

fn main() {
    if let Err(err) = dispatch() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn dispatch() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let cfg = args.common.resolve()?;
            let out = args.common.out_root().join(&cfg.case);
            let outputs = runner::run(&cfg, &out)?;
            println!(
                "{}: {} ({} iterations, {} nodes in the last); artifacts in {}",
                cfg.case,
                outputs.outcome,
                outputs.records.len(),
                outputs.final_nodes,
                out.display()
            );
            if outputs.diverged {
                println!("warning: mean indicator rose on three consecutive iterations");
            }
            Ok(())
        }
        Command::Sweep(args) => {
            let cfg = args.common.resolve()?;
            if args.values.is_empty() {
                anyhow::bail!("--values must list at least one value");
            }
            let out = args
                .common
                .out_root()
                .join(format!("{}-sweep-{}", cfg.case, args.param));
            let report = runner::sweep(&cfg, &args.param, &args.values, &out)?;
            println!("sweep report: {}", report.display());
            Ok(())
        }
        Command::Report { dir } => {
            let mut stdout = std::io::stdout().lock();
            runner::print_report(&dir, &mut stdout)
        }
    }
}
