//! Case dispatch, adaptive-run execution, and artifact emission.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use mfree_core::adaptivity::{AdaptParams, AdaptiveCase, AdaptiveRun, Outcome, Thresholds};
use mfree_core::cases::{BoussinesqCase, DiskCase, FrettingCase, HertzCase, MwlsDemo, PdeState};
use mfree_core::io::{write_indicator_csv, write_nodes_csv, write_report_csv, write_state_csv};
use mfree_core::nodegen::{NodeSet, RelaxParams};
use mfree_core::{IterationRecord, RadiusField};

use crate::config::RunConfig;

/// What one run produced, as needed by sweeps and tests.
pub struct RunOutputs {
    pub records: Vec<IterationRecord>,
    pub outcome: String,
    pub final_nodes: usize,
    pub diverged: bool,
}

/// Executes the configured case and writes all artifacts into `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunOutputs> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    match config.case.as_str() {
        "disk" => run_disk(config, out_dir),
        "hertz" => run_hertz(config, out_dir),
        "fretting" => run_fretting(config, out_dir),
        "boussinesq" => run_boussinesq(config, out_dir),
        "mwls-demo" => run_mwls(config, out_dir),
        other => anyhow::bail!("unknown case {other:?}"),
    }
}

fn adapt_params<const D: usize>(config: &RunConfig) -> Result<AdaptParams<D>> {
    Ok(AdaptParams {
        thresholds: Thresholds::new(config.epsilon, config.eta, config.alpha, config.beta)?,
        dr_upper: RadiusField::constant(config.dr_upper),
        max_iterations: config.iters,
        shepard_neighbors: config.shepard_n,
        node_budget: config.node_budget_option(),
        termination: config.termination_reduction(),
    })
}

fn relax_params(config: &RunConfig) -> RelaxParams {
    RelaxParams {
        iterations: config.relax_iters,
        initial_heat: config.relax_qi,
        final_heat: config.relax_qf,
        power: config.relax_kappa,
        neighbors: config.relax_neighbors,
    }
}

fn apply_solver_config(cfg: &mut mfree_core::cases::SolveConfig, config: &RunConfig) {
    cfg.stencil_n = config.n;
    cfg.stencil_m = config.m;
    cfg.sigma_b = config.sigma_b;
    cfg.zeta = config.zeta;
    cfg.relax = relax_params(config);
    cfg.seed = config.seed;
    cfg.linear_solver = config.linear_solver();
}

fn run_disk(config: &RunConfig, out: &Path) -> Result<RunOutputs> {
    let mut case = DiskCase::paper(config.gamma, config.seed)
        .map_err(|e| anyhow::anyhow!("disk setup: {e}"))?;
    case.dr0 = config.dr0;
    apply_solver_config(&mut case.solver, config);
    let params = adapt_params::<2>(config)?;
    let run = mfree_core::adaptive_solve(&case, &case.initial_spacing(), &params)?;
    finish_elastic(config, out, run)
}

fn run_hertz(config: &RunConfig, out: &Path) -> Result<RunOutputs> {
    let mut case = HertzCase::paper(config.seed)?;
    case.dr0 = config.dr0;
    apply_solver_config(&mut case.solver, config);
    let params = adapt_params::<2>(config)?;
    let run = mfree_core::adaptive_solve(&case, &case.initial_spacing(), &params)?;
    finish_elastic(config, out, run)
}

fn run_fretting(config: &RunConfig, out: &Path) -> Result<RunOutputs> {
    let mut case = FrettingCase::paper(config.seed)?;
    case.dr0 = config.dr0;
    apply_solver_config(&mut case.solver, config);
    let params = adapt_params::<2>(config)?;
    let run = mfree_core::adaptive_solve(&case, &case.initial_spacing(), &params)?;
    finish_elastic(config, out, run)
}

fn run_boussinesq(config: &RunConfig, out: &Path) -> Result<RunOutputs> {
    let mut case = BoussinesqCase::new(-1.0, config.gamma, 1.0, 0.33, config.seed)?;
    case.dr0 = config.dr0;
    apply_solver_config(&mut case.solver, config);
    let params = adapt_params::<3>(config)?;
    let run = mfree_core::adaptive_solve(&case, &case.initial_spacing(), &params)?;
    finish_elastic(config, out, run)
}

fn run_mwls(config: &RunConfig, out: &Path) -> Result<RunOutputs> {
    let demo = MwlsDemo {
        h0: config.dr0,
        zeta: config.zeta,
        ..MwlsDemo::default()
    };
    let params = adapt_params::<1>(config)?;
    let run = mfree_core::adaptive_solve(&demo, &demo.initial_spacing(), &params)?;

    let mut artifacts = Vec::new();
    for it in &run.iterations {
        let tag = format!("iter_{:03}", it.record.iteration);
        write_with(out, &format!("{tag}_nodes.csv"), &mut artifacts, |w| {
            write_nodes_csv(w, &it.nodes)
        })?;
        write_with(out, &format!("{tag}_approx.csv"), &mut artifacts, |w| {
            writeln!(w, "x,g,g_hat")?;
            for i in 0..it.nodes.len() {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e}",
                    it.nodes.position(i)[0],
                    it.state.exact[i],
                    it.state.approx[i]
                )?;
            }
            Ok(())
        })?;
        write_with(out, &format!("{tag}_indicator.csv"), &mut artifacts, |w| {
            write_indicator_csv(w, &it.nodes, &it.indicator)
        })?;
    }
    finalize(config, out, run.records(), outcome_text(&run.outcome), artifacts)
}

fn finish_elastic<const D: usize>(
    config: &RunConfig,
    out: &Path,
    run: AdaptiveRun<D, PdeState<D>>,
) -> Result<RunOutputs> {
    let mut artifacts = Vec::new();
    for it in &run.iterations {
        let tag = format!("iter_{:03}", it.record.iteration);
        write_with(out, &format!("{tag}_nodes.csv"), &mut artifacts, |w| {
            write_nodes_csv(w, &it.nodes)
        })?;
        write_with(out, &format!("{tag}_state.csv"), &mut artifacts, |w| {
            write_state_csv(w, &it.nodes, &it.state.state)
        })?;
        write_with(out, &format!("{tag}_indicator.csv"), &mut artifacts, |w| {
            write_indicator_csv(w, &it.nodes, &it.indicator)
        })?;
    }
    finalize(config, out, run.records(), outcome_text(&run.outcome), artifacts)
}

fn write_with(
    out: &Path,
    name: &str,
    artifacts: &mut Vec<String>,
    body: impl FnOnce(&mut BufWriter<File>) -> mfree_core::Result<()>,
) -> Result<()> {
    let path = out.join(name);
    let mut w = BufWriter::new(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    );
    body(&mut w).with_context(|| format!("writing {}", path.display()))?;
    w.flush()?;
    artifacts.push(name.to_string());
    Ok(())
}

fn outcome_text(outcome: &Outcome) -> String {
    match outcome {
        Outcome::Converged { iteration } => {
            format!("converged at iteration {iteration}")
        }
        Outcome::MaxIterations => "iteration cap reached".into(),
        Outcome::NodeBudgetExceeded { would_be } => {
            format!("node budget exceeded (next discretization: {would_be} nodes)")
        }
    }
}

/// Convergence-failure heuristic: the mean indicator rose on three
/// consecutive iterations.
pub fn diverged(records: &[IterationRecord]) -> bool {
    let mut rising = 0;
    for w in records.windows(2) {
        if w[1].mean_indicator > w[0].mean_indicator {
            rising += 1;
            if rising >= 3 {
                return true;
            }
        } else {
            rising = 0;
        }
    }
    false
}

#[derive(Serialize)]
struct SummaryIteration {
    iteration: usize,
    nodes: usize,
    refined: Option<usize>,
    no_change: Option<usize>,
    derefined: Option<usize>,
    hit_bound: Option<usize>,
    mean_indicator: f64,
    max_indicator: f64,
    e_inf: Option<f64>,
    e_1: Option<f64>,
    e_energy: Option<f64>,
    e_inf_u: Option<f64>,
    e_1_u: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    case: String,
    outcome: String,
    diverged: bool,
    parameters: std::collections::BTreeMap<String, serde_json::Value>,
    iterations: Vec<SummaryIteration>,
    artifacts: Vec<String>,
}

fn finalize(
    config: &RunConfig,
    out: &Path,
    records: Vec<IterationRecord>,
    outcome: String,
    mut artifacts: Vec<String>,
) -> Result<RunOutputs> {
    {
        let path = out.join("report.csv");
        let mut w = BufWriter::new(File::create(&path)?);
        write_report_csv(&mut w, &records)?;
        w.flush()?;
        artifacts.push("report.csv".into());
    }
    let was_divergent = diverged(&records);
    let summary = Summary {
        case: config.case.clone(),
        outcome: outcome.clone(),
        diverged: was_divergent,
        parameters: config.as_map(),
        iterations: records
            .iter()
            .map(|r| SummaryIteration {
                iteration: r.iteration,
                nodes: r.nodes,
                refined: r.categories.map(|c| c.refined),
                no_change: r.categories.map(|c| c.no_change),
                derefined: r.categories.map(|c| c.derefined),
                hit_bound: r.categories.map(|c| c.hit_bound),
                mean_indicator: r.mean_indicator,
                max_indicator: r.max_indicator,
                e_inf: r.errors.as_ref().and_then(|e| e.e_inf),
                e_1: r.errors.as_ref().and_then(|e| e.e_1),
                e_energy: r.errors.as_ref().and_then(|e| e.e_energy),
                e_inf_u: r.errors.as_ref().and_then(|e| e.e_inf_u),
                e_1_u: r.errors.as_ref().and_then(|e| e.e_1_u),
            })
            .collect(),
        artifacts,
    };
    let json = serde_json::to_string_pretty(&summary)?;
    fs::write(out.join("summary.json"), json + "\n")?;

    let final_nodes = records.last().map(|r| r.nodes).unwrap_or(0);
    Ok(RunOutputs {
        records,
        outcome,
        final_nodes,
        diverged: was_divergent,
    })
}

/// Sweep of one parameter over a list of values; failing runs are marked
/// rather than aborting the sweep.
pub fn sweep(
    base: &RunConfig,
    parameter: &str,
    values: &[String],
    out_root: &Path,
) -> Result<PathBuf> {
    if !crate::config::SWEEP_PARAMETERS.contains(&parameter) {
        anyhow::bail!(
            "parameter {parameter:?} is not sweepable; choose one of {}",
            crate::config::SWEEP_PARAMETERS.join(", ")
        );
    }
    fs::create_dir_all(out_root)?;
    let report_path = out_root.join("sweep_report.csv");
    let mut report = BufWriter::new(File::create(&report_path)?);
    writeln!(
        report,
        "parameter,value,status,iterations,final_nodes,mean_indicator,e_inf,e_1,e_energy"
    )?;
    for value in values {
        let mut config = base.clone();
        config.apply(parameter, value)?;
        let dir = out_root.join(format!("{parameter}_{value}"));
        let status;
        let mut iterations = String::new();
        let mut final_nodes = String::new();
        let mut mean_ind = String::new();
        let mut errs = [String::new(), String::new(), String::new()];
        match run(&config, &dir) {
            Ok(outputs) => {
                let converged = outputs.outcome.starts_with("converged");
                status = if outputs.diverged {
                    "diverged"
                } else if converged {
                    "converged"
                } else {
                    "not-converged"
                };
                iterations = outputs.records.len().to_string();
                final_nodes = outputs.final_nodes.to_string();
                if let Some(last) = outputs.records.last() {
                    mean_ind = format!("{:.16e}", last.mean_indicator);
                    if let Some(e) = &last.errors {
                        if let Some(v) = e.e_inf {
                            errs[0] = format!("{v:.16e}");
                        }
                        if let Some(v) = e.e_1 {
                            errs[1] = format!("{v:.16e}");
                        }
                        if let Some(v) = e.e_energy {
                            errs[2] = format!("{v:.16e}");
                        }
                    }
                }
            }
            Err(err) => {
                status = "error";
                mean_ind = format!("{err}").replace(',', ";");
            }
        }
        writeln!(
            report,
            "{parameter},{value},{status},{iterations},{final_nodes},{mean_ind},{},{},{}",
            errs[0], errs[1], errs[2]
        )?;
    }
    report.flush()?;
    Ok(report_path)
}

/// Pretty-prints a run's report.csv.
pub fn print_report(dir: &Path, out: &mut impl Write) -> Result<()> {
    let path = dir.join("report.csv");
    let text = fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))?;
    let rows: Vec<Vec<String>> = text
        .lines()
        .map(|l| l.split(',').map(|c| c.to_string()).collect())
        .collect();
    if rows.is_empty() {
        return Ok(());
    }
    let cols = rows[0].len();
    let mut widths = vec![0usize; cols];
    for row in &rows {
        for (k, cell) in row.iter().enumerate() {
            let shown = shorten(cell);
            widths[k] = widths[k].max(shown.len());
        }
    }
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(k, cell)| format!("{:>width$}", shorten(cell), width = widths[k]))
            .collect();
        writeln!(out, "{}", line.join("  "))?;
    }
    Ok(())
}

/// Full-precision CSV floats are unwieldy in a terminal; show 4 digits.
fn shorten(cell: &str) -> String {
    match cell.parse::<f64>() {
        Ok(v) if cell.contains('.') || cell.contains('e') => format!("{v:.4e}"),
        _ => cell.to_string(),
    }
}
