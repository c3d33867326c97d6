//! Multi-seed experiment drivers: the fixed-budget comparison and the budget
//! sweep.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::methods::{round_robin_size, run_method, MethodKind, MethodParams, MethodSpec};
use crate::metrics::{aggregate, pearson};
use crate::model::{
    derive_seed, sample_population, EloBase, LatentPopulation, OracleConfig, RngStream,
};

/// Stream tag for population draws; method streams use the budget instead.
const POPULATION_TAG: u64 = 0x504f_5055_4c41_5445;

pub const DEFAULT_BASE_SEED: u64 = 2024;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_items: usize,
    pub n_seeds: usize,
    pub base_seed: u64,
    /// Budget for the fixed-budget experiment.
    pub budget: usize,
    pub sweep_budgets: Vec<usize>,
    pub copeland_budgets: Vec<usize>,
    pub methods: Vec<MethodKind>,
    pub oracle: OracleConfig,
    pub params: MethodParams,
    pub population_mu: f64,
    pub population_sigma: f64,
    pub confidence: f64,
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_items: 100,
            n_seeds: 100,
            base_seed: DEFAULT_BASE_SEED,
            budget: 550,
            sweep_budgets: (1..=40).map(|i| i * 500).collect(),
            copeland_budgets: vec![4950, 9900, 14850, 19800],
            methods: MethodKind::ALL.to_vec(),
            oracle: OracleConfig::default().with_base(EloBase::Ten),
            params: MethodParams::default(),
            population_mu: 1000.0,
            population_sigma: 200.0,
            confidence: 0.95,
            workers: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: &str| Err(Error::config_key(key, None, msg));
        if self.n_items < 2 {
            return bad("n_items", "must be >= 2");
        }
        if self.n_seeds == 0 {
            return bad("n_seeds", "must be >= 1");
        }
        if self.budget == 0 {
            return bad("budget", "must be positive");
        }
        if self.sweep_budgets.contains(&0) {
            return bad("sweep_budgets", "budgets must be positive");
        }
        if self.copeland_budgets.contains(&0) {
            return bad("copeland_budgets", "budgets must be positive");
        }
        if self.methods.is_empty() {
            return bad("methods", "need at least one method");
        }
        if !(self.population_sigma > 0.0) {
            return bad("population_sigma", "must be > 0");
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return bad("confidence", "must lie in (0, 1)");
        }
        self.oracle.validate()?;
        for kind in &self.methods {
            MethodSpec::calibrated(*kind, self.budget, self.n_items, &self.params).validate()?;
        }
        Ok(())
    }

    fn has(&self, kind: MethodKind) -> bool {
        self.methods.contains(&kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: String,
    /// Requested budget; 0 marks a method run to natural termination.
    pub budget_requested: usize,
    pub m_actual_mean: f64,
    pub r_mean: f64,
    pub r_ci_low: f64,
    pub r_ci_high: f64,
    pub n_seeds: usize,
}

/// One (method, budget) cell of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub kind: MethodKind,
    /// Budget used for calibration.
    pub budget: usize,
    /// Budget written to the results; 0 for natural termination.
    pub reported_budget: usize,
}

/// Per-seed outcomes of one cell, in seed order.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSamples {
    pub cell: Cell,
    pub r: Vec<f64>,
    pub m: Vec<usize>,
}

/// Population for seed index `seed_idx`, shared by every method.
pub fn population_for_seed(cfg: &ExperimentConfig, seed_idx: usize) -> Result<LatentPopulation> {
    let mut rng = RngStream::new(derive_seed(
        cfg.base_seed,
        &[seed_idx as u64, POPULATION_TAG],
    ));
    sample_population(
        cfg.n_items,
        cfg.population_mu,
        cfg.population_sigma,
        &mut rng,
    )
}

/// Seed handed to [`run_method`]; it mixes in the method tag itself.
pub fn method_seed(cfg: &ExperimentConfig, seed_idx: usize, budget: usize) -> u64 {
    derive_seed(cfg.base_seed, &[seed_idx as u64, budget as u64])
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Invariant(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs every cell on every seed. Tasks run in parallel; results come back
/// in (cell, seed) order regardless of scheduling.
pub fn run_cells(cfg: &ExperimentConfig, cells: &[Cell]) -> Result<Vec<CellSamples>> {
    cfg.validate()?;
    let populations = (0..cfg.n_seeds)
        .map(|s| population_for_seed(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.n_seeds).map(move |s| (c, s)))
        .collect();
    let outcomes = with_pool(cfg.workers, || {
        tasks
            .par_iter()
            .map(|&(c, s)| {
                let cell = cells[c];
                let spec = MethodSpec::calibrated(cell.kind, cell.budget, cfg.n_items, &cfg.params);
                let pop = &populations[s];
                let result = run_method(&spec, pop, &cfg.oracle, method_seed(cfg, s, cell.budget))?;
                if result.oracle_calls != result.m_comparisons {
                    return Err(Error::Invariant(format!(
                        "{}: {} annotator calls but {} comparisons reported",
                        cell.kind, result.oracle_calls, result.m_comparisons
                    )));
                }
                let r = pearson(pop.values(), &result.estimated)?.r;
                Ok((r, result.m_comparisons))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(cells
        .iter()
        .zip(outcomes.chunks(cfg.n_seeds))
        .map(|(cell, chunk)| CellSamples {
            cell: *cell,
            r: chunk.iter().map(|o| o.0).collect(),
            m: chunk.iter().map(|o| o.1).collect(),
        })
        .collect())
}

fn summarize(samples: &[CellSamples], confidence: f64) -> Result<Vec<ResultRow>> {
    let mut rows = samples
        .iter()
        .map(|s| {
            let stat = aggregate(&s.r, confidence)?;
            let m_mean = s.m.iter().sum::<usize>() as f64 / s.m.len() as f64;
            Ok(ResultRow {
                method: s.cell.kind.name().to_string(),
                budget_requested: s.cell.reported_budget,
                m_actual_mean: m_mean,
                r_mean: stat.mean,
                r_ci_low: stat.ci_low,
                r_ci_high: stat.ci_high,
                n_seeds: stat.n_seeds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_rows(&mut rows);
    Ok(rows)
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.budget_requested.cmp(&b.budget_requested))
    });
}

/// Cells of the fixed-budget comparison: Copeland methods get one round
/// robin, the Swiss tournament and Swiss InfoGain stop on their own, the
/// rest are calibrated to `cfg.budget`.
pub fn fixed_budget_cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    cfg.methods
        .iter()
        .map(|&kind| {
            if kind.is_copeland() {
                let b = round_robin_size(cfg.n_items);
                Cell {
                    kind,
                    budget: b,
                    reported_budget: b,
                }
            } else if kind.is_natural_budget() {
                Cell {
                    kind,
                    budget: cfg.budget,
                    reported_budget: 0,
                }
            } else {
                Cell {
                    kind,
                    budget: cfg.budget,
                    reported_budget: cfg.budget,
                }
            }
        })
        .collect()
}

pub fn fixed_budget_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let samples = run_cells(cfg, &fixed_budget_cells(cfg))?;
    summarize(&samples, cfg.confidence)
}

/// Cells of the budget sweep.
pub fn sweep_cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for kind in [
        MethodKind::BradleyTerry,
        MethodKind::BordaRnd,
        MethodKind::EloRnd,
        MethodKind::RndSwiss,
    ] {
        if cfg.has(kind) {
            cells.extend(cfg.sweep_budgets.iter().map(|&b| Cell {
                kind,
                budget: b,
                reported_budget: b,
            }));
        }
    }
    for kind in [MethodKind::BordaCopeland, MethodKind::EloCopeland] {
        if cfg.has(kind) {
            cells.extend(cfg.copeland_budgets.iter().map(|&b| Cell {
                kind,
                budget: b,
                reported_budget: b,
            }));
        }
    }
    for kind in [MethodKind::Swiss, MethodKind::SwissInfoGain] {
        if cfg.has(kind) {
            cells.push(Cell {
                kind,
                budget: cfg.budget,
                reported_budget: 0,
            });
        }
    }
    cells
}

pub fn budget_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let samples = run_cells(cfg, &sweep_cells(cfg))?;
    summarize(&samples, cfg.confidence)
}

/// Smallest budget at which `method_a` beats `reference` on mean r, or
/// `None` if it never does.
pub fn crossover_report(
    rows: &[ResultRow],
    method_a: &str,
    reference: f64,
) -> Result<Option<usize>> {
    let mut own: Vec<&ResultRow> = rows.iter().filter(|r| r.method == method_a).collect();
    if own.is_empty() {
        return Err(Error::Input(format!("no rows for method `{method_a}`")));
    }
    own.sort_by_key(|r| r.budget_requested);
    Ok(own
        .iter()
        .find(|r| r.r_mean > reference)
        .map(|r| r.budget_requested))
}

/// Mean r of the single natural-budget row of `method`.
pub fn reference_r(rows: &[ResultRow], method: &str) -> Result<f64> {
    rows.iter()
        .find(|r| r.method == method && r.budget_requested == 0)
        .map(|r| r.r_mean)
        .ok_or_else(|| Error::Input(format!("no reference row for method `{method}`")))
}
