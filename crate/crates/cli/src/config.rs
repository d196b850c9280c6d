//! Run configuration: per-case paper defaults, flat key-value config files,
//! and command-line overrides.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use mfree_core::cases::CASE_IDS;
use mfree_core::{LinearSolver, Reduction};

/// Fully resolved configuration of one adaptive run.
///
/// Defaults are the published per-case values; a config file and then
/// command-line `key=value` overrides are applied on top.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub case: String,
    pub seed: u64,
    /// Disk: pole offset γ. Boussinesq: box offset γ.
    pub gamma: f64,
    /// Initial (constant) spacing δr⁽⁰⁾.
    pub dr0: f64,
    /// Iteration cap I_max.
    pub iters: usize,
    pub epsilon: f64,
    pub eta: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Coarseness bound δrᵘ (defaults to δr⁽⁰⁾).
    pub dr_upper: f64,
    pub shepard_n: usize,
    /// Stencil size and RBF count.
    pub n: usize,
    pub m: usize,
    pub sigma_b: f64,
    pub zeta: f64,
    pub relax_iters: usize,
    pub relax_qi: f64,
    pub relax_qf: f64,
    pub relax_kappa: f64,
    pub relax_neighbors: usize,
    /// Optional node budget; 0 disables it.
    pub node_budget: usize,
    /// `mean` or `max`.
    pub termination: String,
    /// `direct` or `bicgstab`.
    pub solver: String,
}

impl RunConfig {
    /// Paper defaults for a registered case id.
    pub fn for_case(case: &str) -> Result<Self> {
        if !CASE_IDS.contains(&case) {
            bail!(
                "unknown case {case:?}; registered cases: {}",
                CASE_IDS.join(", ")
            );
        }
        let mut cfg = Self {
            case: case.to_string(),
            seed: 42,
            gamma: 0.2,
            dr0: 0.02,
            iters: 2,
            epsilon: 1e-7,
            eta: 1e-9,
            alpha: 5.0,
            beta: 1.5,
            dr_upper: 0.02,
            shepard_n: 7,
            n: 25,
            m: 15,
            sigma_b: 100.0,
            zeta: 0.9,
            relax_iters: 10,
            relax_qi: 0.8,
            relax_qf: 0.0,
            relax_kappa: 2.0,
            relax_neighbors: 3,
            node_budget: 0,
            termination: "mean".into(),
            solver: "direct".into(),
        };
        match case {
            "disk" => {}
            "hertz" => {
                cfg.dr0 = 1e-3;
                cfg.dr_upper = 2e-3;
                cfg.iters = 6;
                cfg.epsilon = 1e5;
                cfg.eta = 1e4;
                cfg.n = 9;
                cfg.m = 9;
                cfg.termination = "max".into();
            }
            "fretting" => {
                cfg.dr0 = 0.5e-3;
                cfg.dr_upper = 0.5e-3;
                cfg.iters = 4;
                cfg.epsilon = 1e5;
                cfg.eta = 1e4;
                cfg.alpha = 10.0;
                cfg.n = 9;
                cfg.m = 9;
                cfg.termination = "max".into();
            }
            "boussinesq" => {
                cfg.gamma = 0.01;
                cfg.dr0 = 0.05;
                cfg.dr_upper = 0.05;
                cfg.iters = 4;
                cfg.epsilon = 5.0;
                cfg.eta = 0.0;
                cfg.alpha = 3.0;
                cfg.beta = 1.0;
                cfg.shepard_n = 15;
                cfg.n = 15;
                cfg.m = 15;
                cfg.relax_neighbors = 6;
                cfg.termination = "max".into();
                cfg.node_budget = 30_000;
            }
            "mwls-demo" => {
                cfg.dr0 = 0.005;
                cfg.dr_upper = 0.05;
                cfg.iters = 3;
                cfg.epsilon = 1e-3;
                cfg.eta = 1e-4;
                cfg.alpha = 4.0;
                cfg.beta = 4.0;
            }
            _ => unreachable!(),
        }
        Ok(cfg)
    }

    /// Applies one `key = value` assignment.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        macro_rules! parse {
            ($field:expr, $ty:ty) => {
                *$field = v
                    .parse::<$ty>()
                    .with_context(|| format!("invalid value {v:?} for {key}"))?
            };
        }
        match key.trim() {
            "seed" => parse!(&mut self.seed, u64),
            "gamma" => parse!(&mut self.gamma, f64),
            "dr0" => parse!(&mut self.dr0, f64),
            "iters" => parse!(&mut self.iters, usize),
            "epsilon" => parse!(&mut self.epsilon, f64),
            "eta" => parse!(&mut self.eta, f64),
            "alpha" => parse!(&mut self.alpha, f64),
            "beta" => parse!(&mut self.beta, f64),
            "dr_upper" => parse!(&mut self.dr_upper, f64),
            "shepard_n" => parse!(&mut self.shepard_n, usize),
            "n" => parse!(&mut self.n, usize),
            "m" => parse!(&mut self.m, usize),
            "sigma_b" => parse!(&mut self.sigma_b, f64),
            "zeta" => parse!(&mut self.zeta, f64),
            "relax_iters" => parse!(&mut self.relax_iters, usize),
            "relax_qi" => parse!(&mut self.relax_qi, f64),
            "relax_qf" => parse!(&mut self.relax_qf, f64),
            "relax_kappa" => parse!(&mut self.relax_kappa, f64),
            "relax_neighbors" => parse!(&mut self.relax_neighbors, usize),
            "node_budget" => parse!(&mut self.node_budget, usize),
            "termination" => {
                if v != "mean" && v != "max" {
                    bail!("termination must be `mean` or `max`, got {v:?}");
                }
                self.termination = v.to_string();
            }
            "solver" => {
                if v != "direct" && v != "bicgstab" {
                    bail!("solver must be `direct` or `bicgstab`, got {v:?}");
                }
                self.solver = v.to_string();
            }
            other => bail!("unknown configuration key {other:?}"),
        }
        Ok(())
    }

    /// Loads `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "{}:{}: expected `key = value`, got {raw:?}",
                    path.display(),
                    lineno + 1
                );
            };
            if key.trim() == "case" {
                continue; // the case is fixed before defaults are resolved
            }
            self.apply(key, value)?;
        }
        Ok(())
    }

    pub fn termination_reduction(&self) -> Reduction {
        match self.termination.as_str() {
            "max" => Reduction::Max,
            _ => Reduction::Mean,
        }
    }

    pub fn linear_solver(&self) -> LinearSolver {
        match self.solver.as_str() {
            "bicgstab" => LinearSolver::BiCgStab {
                tol: 1e-12,
                max_iters: 10_000,
            },
            _ => LinearSolver::Direct,
        }
    }

    pub fn node_budget_option(&self) -> Option<usize> {
        (self.node_budget > 0).then_some(self.node_budget)
    }

    /// Flat key-value view used by the run summary.
    pub fn as_map(&self) -> BTreeMap<String, serde_json::Value> {
        let json = serde_json::to_value(self).expect("config serializes");
        match json {
            serde_json::Value::Object(map) => map.into_iter().collect(),
            _ => unreachable!(),
        }
    }
}

/// The sweepable parameter names.
pub const SWEEP_PARAMETERS: [&str; 7] = ["alpha", "beta", "epsilon", "eta", "sigma_b", "n", "m"];
