//! Benchmark runner over (size × seed × algorithm) cells.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use rsp_core::trace::{write_records, CheckpointRecord, IterTrace, RunStatus};
use rsp_core::{Result, RspError};
use serde::{Deserialize, Serialize, Serializer};

use crate::cutting::{cutting_planes, CpConfig};
use crate::instance::gen_instance;
use crate::master::BarrierMaster;
use crate::metrics::{fill_ogr, first_feasible};
use crate::model::QpModel;
use crate::online::{fo_pess, oco_ogd, OnlineConfig};
use crate::saddle::{sgsp_qp, QpSgspConfig};

pub const ALGORITHMS: [&str; 4] = ["sgsp", "cutting-planes", "fo-pess", "oco"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// "n x K x L x m", e.g. "10x10x10x3".
    pub sizes: Vec<String>,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<String>,
    pub eps: f64,
    /// Seconds per cell.
    pub time_budget: f64,
    pub sgsp_iters: usize,
    pub online_iters: usize,
    pub online_inner_iters: usize,
    pub cp_rounds: usize,
    pub checkpoint_every: usize,
    pub step_base: f64,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec!["10x10x10x3".into()],
            seeds: (1..=5).collect(),
            algorithms: ALGORITHMS.iter().map(|s| s.to_string()).collect(),
            eps: 1e-3,
            time_budget: 600.0,
            sgsp_iters: 20_000,
            online_iters: 20_000,
            online_inner_iters: 2_000,
            cp_rounds: 1_000,
            checkpoint_every: 100,
            step_base: 2.0,
            jobs: 0,
        }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: BenchConfig = toml::from_str(text).map_err(|e| RspError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.sizes {
            parse_size(s)?;
        }
        if let Some(a) = self.algorithms.iter().find(|a| !ALGORITHMS.contains(&a.as_str())) {
            return Err(RspError::Parse(format!("unknown algorithm {a:?}")));
        }
        if !(self.eps > 0.0) {
            return Err(RspError::NonpositiveEps(self.eps));
        }
        if !(self.time_budget > 0.0)
            || self.sgsp_iters == 0
            || self.online_iters == 0
            || self.online_inner_iters == 0
            || self.cp_rounds == 0
            || self.checkpoint_every == 0
            || !(self.step_base > 0.0)
        {
            return Err(RspError::InvalidSteps("budgets and step base must be positive".into()));
        }
        Ok(())
    }
}

/// (n, K, L, m) from "n x K x L x m".
pub fn parse_size(s: &str) -> Result<(usize, usize, usize, usize)> {
    let parts: Vec<usize> = s
        .split('x')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| RspError::Parse(format!("size {s:?} is not nxKxLxm")))?;
    match parts[..] {
        [n, k, l, m] if n > 0 && k > 0 && l > 0 => Ok((n, k, l, m)),
        _ => Err(RspError::Parse(format!("size {s:?} is not nxKxLxm with n, K, L ≥ 1"))),
    }
}

/// Non-finite values as the strings "inf", "-inf", "nan".
fn ser_f64<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub t: f64,
    #[serde(serialize_with = "ser_f64")]
    pub min_fg: f64,
    #[serde(serialize_with = "ser_f64")]
    pub min_ogr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub size: String,
    pub seed: u64,
    pub algorithm: String,
    pub status: String,
    pub error: Option<String>,
    pub csv: Option<String>,
    pub checkpoints: usize,
    #[serde(serialize_with = "ser_f64")]
    pub final_fg: f64,
    #[serde(serialize_with = "ser_f64")]
    pub final_ogr: f64,
    /// Best OGR over the whole run.
    #[serde(serialize_with = "ser_f64")]
    pub min_ogr: f64,
    /// 1-based index of the first checkpoint with FG ≤ eps.
    pub first_eps_checkpoint: Option<usize>,
    pub first_eps_time: Option<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub lower_bound: f64,
    pub minima: Vec<GridPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub config: BenchConfig,
    pub cells: Vec<CellSummary>,
}

impl BenchSummary {
    pub fn cell(&self, size: &str, seed: u64, algorithm: &str) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.size == size && c.seed == seed && c.algorithm == algorithm)
    }
}

/// Log-spaced times 10^(k/4) from 1 ms up to the budget.
pub fn time_grid(budget: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = -12;
    loop {
        let t = 10f64.powf(k as f64 / 4.0);
        if t >= budget {
            out.push(budget);
            return out;
        }
        out.push(t);
        k += 1;
    }
}

/// min_{k: T_k ≤ t} FG_k and OGR_k on the grid (+∞ before the first record).
pub fn running_minima(records: &[CheckpointRecord], grid: &[f64]) -> Vec<GridPoint> {
    grid.iter()
        .map(|&t| {
            let seen = records.iter().filter(|r| r.elapsed_s <= t);
            let (fg, ogr) = seen.fold((f64::INFINITY, f64::INFINITY), |(a, b), r| (a.min(r.feas_gap), b.min(r.ogr)));
            GridPoint { t, min_fg: fg, min_ogr: ogr }
        })
        .collect()
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Completed => "completed",
        RunStatus::Converged => "converged",
        RunStatus::TimeBudgetExceeded => "time_budget_exceeded",
        RunStatus::BudgetExhausted => "budget_exhausted",
    }
}

struct CellRun {
    trace: Option<IterTrace<f64>>,
    lower_bound: f64,
    error: Option<String>,
}

fn run_cell(model: &QpModel, algo: &str, cfg: &BenchConfig) -> CellRun {
    let master = BarrierMaster::default();
    let online = OnlineConfig {
        eps: cfg.eps,
        max_iters: cfg.online_iters,
        inner_iters: cfg.online_inner_iters,
        checkpoint_every: cfg.checkpoint_every,
        check_every: 100,
        step_base: cfg.step_base,
        time_budget: Some(cfg.time_budget),
    };
    let res: Result<(IterTrace<f64>, f64)> = match algo {
        "cutting-planes" => cutting_planes(
            model,
            &CpConfig { eps: cfg.eps, max_rounds: cfg.cp_rounds, time_budget: Some(cfg.time_budget) },
            &master,
        )
        .map(|r| (r.trace, r.lower_bound)),
        "sgsp" => sgsp_qp(
            model,
            &QpSgspConfig {
                n_iters: cfg.sgsp_iters,
                checkpoint_every: cfg.checkpoint_every,
                step_base: cfg.step_base,
                time_budget: Some(cfg.time_budget),
            },
        )
        .map(|t| (t, f64::NAN)),
        "fo-pess" => fo_pess(model, &online).map(|r| (r.trace, f64::NAN)),
        "oco" => oco_ogd(model, &online).map(|r| (r.trace, f64::NAN)),
        other => Err(RspError::Parse(format!("unknown algorithm {other:?}"))),
    };
    match res {
        Ok((t, lb)) => CellRun { trace: Some(t), lower_bound: lb, error: None },
        Err(e) => CellRun { trace: None, lower_bound: f64::NAN, error: Some(e.to_string()) },
    }
}

/// Runs every cell, writes `{size}-s{seed}-{algo}.csv` per cell and
/// `summary.json` into `out_dir`. Cell errors are recorded, not raised.
pub fn run_bench(cfg: &BenchConfig, out_dir: &Path) -> Result<BenchSummary> {
    cfg.validate()?;
    fs::create_dir_all(out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| RspError::Io(e.to_string()))?;

    let mut models = Vec::new();
    for size in &cfg.sizes {
        let (n, k, l, m) = parse_size(size)?;
        for &seed in &cfg.seeds {
            models.push((size.clone(), seed, QpModel::new(gen_instance(n, k, l, m, seed)?)));
        }
    }

    // Cutting planes first: their cuts give the lower bound behind OGR.
    let cp: Vec<CellRun> = pool.install(|| models.par_iter().map(|(_, _, md)| run_cell(md, "cutting-planes", cfg)).collect());
    let others: Vec<(usize, &str)> = (0..models.len())
        .flat_map(|i| cfg.algorithms.iter().filter(|a| *a != "cutting-planes").map(move |a| (i, a.as_str())))
        .collect();
    let runs: Vec<CellRun> = pool.install(|| others.par_iter().map(|&(i, a)| run_cell(&models[i].2, a, cfg)).collect());

    let grid = time_grid(cfg.time_budget);
    let mut cells = Vec::new();
    let mut emit = |i: usize, algo: &str, run: &CellRun| -> Result<()> {
        let (size, seed, _) = &models[i];
        let lb = cp[i].lower_bound;
        let mut summary = CellSummary {
            size: size.clone(),
            seed: *seed,
            algorithm: algo.to_string(),
            status: "error".into(),
            error: run.error.clone(),
            csv: None,
            checkpoints: 0,
            final_fg: f64::NAN,
            final_ogr: f64::NAN,
            min_ogr: f64::NAN,
            first_eps_checkpoint: None,
            first_eps_time: None,
            lower_bound: lb,
            minima: Vec::new(),
        };
        if let Some(tr) = &run.trace {
            let mut recs = tr.records.clone();
            fill_ogr(&mut recs, lb, cfg.eps);
            let name = format!("{size}-s{seed}-{algo}.csv");
            write_records(&recs, fs::File::create(out_dir.join(&name))?)?;
            let first = first_feasible(&recs, cfg.eps);
            summary.status = status_name(tr.status).into();
            summary.csv = Some(name);
            summary.checkpoints = recs.len();
            summary.final_fg = recs.last().map_or(f64::NAN, |r| r.feas_gap);
            summary.final_ogr = recs.last().map_or(f64::NAN, |r| r.ogr);
            summary.min_ogr = recs.iter().map(|r| r.ogr).fold(f64::INFINITY, f64::min);
            summary.first_eps_checkpoint = first.map(|k| k + 1);
            summary.first_eps_time = first.map(|k| recs[k].elapsed_s);
            summary.minima = running_minima(&recs, &grid);
        }
        cells.push(summary);
        Ok(())
    };
    let mut rest = runs.iter();
    for (i, cp_run) in cp.iter().enumerate() {
        for algo in &cfg.algorithms {
            if algo == "cutting-planes" {
                emit(i, algo, cp_run)?;
            } else {
                emit(i, algo, rest.next().expect("one run per cell"))?;
            }
        }
    }
    let summary = BenchSummary { config: cfg.clone(), cells };
    let text = serde_json::to_string_pretty(&summary).map_err(|e| RspError::Io(e.to_string()))?;
    fs::write(out_dir.join("summary.json"), text + "\n")?;
    Ok(summary)
}
