//! Scenario generation: solve the master over the scenarios found so far,
//! pessimize, add the violated scenarios, repeat.

use std::time::Instant;

use rsp_core::problem::ScenarioCut;
use rsp_core::trace::{IterTrace, RunStatus};
use rsp_core::{Result, RspError};

use crate::master::{MasterProblem, MasterSolver};
use crate::metrics;
use crate::model::UncertainModel;

/// Scenarios per group; group 0 is the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    pub groups: Vec<Vec<Vec<f64>>>,
}

impl ScenarioSet {
    /// z = 0 for every group.
    pub fn nominal<M: UncertainModel + ?Sized>(model: &M) -> Self {
        ScenarioSet { groups: (0..=model.m()).map(|j| vec![vec![0.0; model.z_dim(j)]]).collect() }
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CpConfig {
    pub eps: f64,
    pub max_rounds: usize,
    pub time_budget: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CpResult {
    /// One record per outer round.
    pub trace: IterTrace<f64>,
    pub scenarios: ScenarioSet,
    /// Running maximum of the per-round master bounds.
    pub lb_history: Vec<f64>,
    /// Scenario count used by each round's master.
    pub scenario_counts: Vec<usize>,
    pub lower_bound: f64,
}

/// Master over (x, t): min t s.t. g₀(x, z) ≤ t, gᵢ(x, z) ≤ 0 per scenario, x ∈ X.
pub fn build_master<M: UncertainModel + ?Sized>(model: &M, scenarios: &ScenarioSet) -> Result<MasterProblem> {
    let n = model.n();
    let pad = |c: ScenarioCut<f64>, t_coef: f64| -> ScenarioCut<f64> {
        let mut a = c.a;
        a.push(t_coef);
        let hess = c.hess.map(|h| rsp_core::linalg::Matrix::from_fn(n + 1, n + 1, |i, j| if i < n && j < n { h[(i, j)] } else { 0.0 }));
        ScenarioCut { hess, a, b0: c.b0 }
    };
    let mut cuts = Vec::new();
    for (j, zs) in scenarios.groups.iter().enumerate() {
        for z in zs {
            cuts.push(pad(model.cut(j, z)?, if j == 0 { -1.0 } else { 0.0 }));
        }
    }
    for c in model.domain_cuts()? {
        cuts.push(pad(c, 0.0));
    }
    let (lo, hi) = model.objective_range();
    let mut a = vec![0.0; n + 1];
    a[n] = -1.0;
    cuts.push(ScenarioCut { hess: None, a: a.clone(), b0: lo - 1.0 });
    a[n] = 1.0;
    cuts.push(ScenarioCut { hess: None, a, b0: -(hi + 1.0) });
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    Ok(MasterProblem { obj, cuts })
}

/// Optimal value of the scenario relaxation, from below.
pub fn lower_bound_from_cuts<M: UncertainModel + ?Sized>(
    model: &M,
    scenarios: &ScenarioSet,
    master: &dyn MasterSolver,
) -> Result<f64> {
    if scenarios.is_empty() {
        return Err(RspError::MasterFailure("no scenarios".into()));
    }
    Ok(master.solve(&build_master(model, scenarios)?, None)?.lower_bound)
}

pub fn cutting_planes<M: UncertainModel + ?Sized>(model: &M, cfg: &CpConfig, master: &dyn MasterSolver) -> Result<CpResult> {
    if !(cfg.eps > 0.0) {
        return Err(RspError::NonpositiveEps(cfg.eps));
    }
    let t0 = Instant::now();
    let mut scenarios = ScenarioSet::nominal(model);
    let mut trace = IterTrace::empty(RunStatus::BudgetExhausted);
    let mut lb = f64::NEG_INFINITY;
    let mut lb_history = Vec::new();
    let mut scenario_counts = Vec::new();
    let mut warm: Option<Vec<f64>> = None;
    let n = model.n();
    for round in 1..=cfg.max_rounds {
        let sol = master.solve(&build_master(model, &scenarios)?, warm.as_deref())?;
        lb = lb.max(sol.lower_bound);
        lb_history.push(lb);
        scenario_counts.push(scenarios.len());
        let x = sol.y[..n].to_vec();
        let t = sol.y[n];
        let mut found = Vec::new();
        for j in 0..=model.m() {
            let (z, v) = model.pessimize(j, &x)?;
            let viol = if j == 0 { v - t } else { v };
            if viol > cfg.eps {
                found.push((j, z));
            }
        }
        let mut rec = metrics::record(model, &x, round as u64, t0.elapsed().as_secs_f64())?;
        rec.ogr = metrics::optimality_gap_ratio(rec.feas_gap, rec.obj, lb, cfg.eps);
        trace.records.push(rec);
        trace.checkpoint_x.push(x.clone());
        trace.x_bar = x.clone();
        trace.x_last = x;
        trace.iterations = round;
        if found.is_empty() {
            trace.status = RunStatus::Converged;
            break;
        }
        for (j, z) in found {
            scenarios.groups[j].push(z);
        }
        warm = Some(sol.y);
        if cfg.time_budget.map_or(false, |b| t0.elapsed().as_secs_f64() >= b) {
            trace.status = RunStatus::TimeBudgetExceeded;
            break;
        }
    }
    Ok(CpResult { trace, scenarios, lb_history, scenario_counts, lower_bound: lb })
}
