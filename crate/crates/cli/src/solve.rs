use std::fs;
use std::path::Path;

use rsp_core::io::{instance_from_json, Instance};
use rsp_core::papc::{compile_biaffine, papc_run, PapcConfig, PapcStart};
use rsp_core::perspective::{certificate_at, dual_bounds, uncertainty_radii, SlaterCertificate};
use rsp_core::problem::RobustProblem;
use rsp_core::sgsp::{sgsp_run, slater_search, SaddleState, SgspConfig, StepPolicy};
use rsp_core::trace::{write_records, IterTrace, RunStatus};
use rsp_core::{Result, RspError};
use rsp_qpbench::instance::{qp_from_json, QP_SCHEMA};
use rsp_qpbench::model::{RobustModel, UncertainModel};
use rsp_qpbench::saddle::{qp_bounds, qp_epigraph, sgsp_qp, QpSgspConfig};
use rsp_qpbench::{cutting_planes, fo_pess, oco_ogd, BarrierMaster, CpConfig, OnlineConfig, QpModel};

use crate::{resolve, Algo, CertifyArgs, SolveArgs, EXIT_BUDGET, EXIT_OK};

enum Loaded {
    Qp(QpModel),
    Lp(Instance),
}

fn load(path: &Path) -> Result<Loaded> {
    let text = fs::read_to_string(path)?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| RspError::Parse(e.to_string()))?;
    match v.get("schema").and_then(|s| s.as_str()) {
        Some(QP_SCHEMA) => Ok(Loaded::Qp(QpModel::new(qp_from_json(&text)?))),
        _ => Ok(Loaded::Lp(instance_from_json(&text)?)),
    }
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Completed => "completed",
        RunStatus::Converged => "converged",
        RunStatus::TimeBudgetExceeded => "time_budget_exceeded",
        RunStatus::BudgetExhausted => "budget_exhausted",
    }
}

/// The instance's x0 if it is strictly feasible, else a Slater search from
/// the projection of the origin.
fn slater(p: &RobustProblem<f64>, x0: Option<&[f64]>, delta: f64, budget: usize) -> Result<SlaterCertificate<f64>> {
    if let Some(x) = x0 {
        if let Ok(c) = certificate_at(p, x, None) {
            if c.f_hat.iter().all(|&f| f < 0.0) {
                return Ok(c);
            }
        }
    }
    let start = p.domain.project(&vec![0.0; p.n()])?;
    slater_search(p, &start, delta, budget)
}

fn run_model<M: UncertainModel>(model: &M, a: &SolveArgs) -> Result<IterTrace<f64>> {
    let mut online = OnlineConfig::new(a.eps, a.iters);
    online.checkpoint_every = a.checkpoint_every;
    online.time_budget = a.time_budget;
    match a.algo {
        Algo::CuttingPlanes => {
            let cfg = CpConfig { eps: a.eps, max_rounds: a.iters, time_budget: a.time_budget };
            Ok(cutting_planes(model, &cfg, &BarrierMaster::default())?.trace)
        }
        Algo::FoPess => Ok(fo_pess(model, &online)?.trace),
        Algo::Oco => Ok(oco_ogd(model, &online)?.trace),
        Algo::Sgsp | Algo::Papc => unreachable!("handled by the caller"),
    }
}

fn solve_lp(inst: &Instance, a: &SolveArgs) -> Result<IterTrace<f64>> {
    let p = &inst.problem;
    match a.algo {
        Algo::Sgsp => {
            let cert = slater(p, inst.x0.as_deref(), 0.1, a.slater_budget)?;
            let bounds = dual_bounds(p, &cert, &uncertainty_radii(p))?;
            let mut cfg = SgspConfig::new(a.iters, StepPolicy::theorem_default(p.m()));
            cfg.checkpoint_every = a.checkpoint_every;
            cfg.time_budget = a.time_budget;
            sgsp_run(p, &bounds, &cfg, &SaddleState::at(p, cert.x_hat))
        }
        Algo::Papc => {
            let cb = compile_biaffine(p)?;
            let mut cfg = PapcConfig::default_for(&cb, &vec![1; p.m()], a.iters, 1e-3)?;
            cfg.checkpoint_every = a.checkpoint_every;
            cfg.time_budget = a.time_budget;
            papc_run(p, &cfg, &PapcStart::zeros(&cb))
        }
        _ => run_model(&RobustModel::new(p.clone())?, a),
    }
}

fn solve_qp(model: &QpModel, a: &SolveArgs) -> Result<IterTrace<f64>> {
    match a.algo {
        Algo::Sgsp => sgsp_qp(
            model,
            &QpSgspConfig { n_iters: a.iters, checkpoint_every: a.checkpoint_every, step_base: 2.0, time_budget: a.time_budget },
        ),
        Algo::Papc => Err(RspError::NotBiaffine(0)),
        _ => run_model(model, a),
    }
}

/// Exit 0 when the last checkpoint is ε-feasible, 3 otherwise.
pub fn cmd_solve(wd: &Path, a: &SolveArgs) -> Result<i32> {
    if !(a.eps > 0.0) {
        return Err(RspError::NonpositiveEps(a.eps));
    }
    if a.iters == 0 || a.checkpoint_every == 0 || a.time_budget.map_or(false, |t| !(t > 0.0)) {
        return Err(RspError::InvalidSteps("budgets must be positive".into()));
    }
    let trace = match load(&resolve(wd, &a.instance))? {
        Loaded::Qp(model) => solve_qp(&model, a)?,
        Loaded::Lp(inst) => solve_lp(&inst, a)?,
    };
    let out = resolve(wd, &a.out);
    write_records(&trace.records, fs::File::create(&out)?)?;
    let last = trace.records.last();
    let (obj, fg) = last.map_or((f64::NAN, f64::NAN), |r| (r.obj, r.feas_gap));
    println!(
        "status={} iterations={} checkpoints={} obj={obj:.9} feas_gap={fg:.3e} trace={}",
        status_name(trace.status),
        trace.iterations,
        trace.records.len(),
        out.display()
    );
    Ok(if fg <= a.eps { EXIT_OK } else { EXIT_BUDGET })
}

pub fn cmd_certify(wd: &Path, a: &CertifyArgs) -> Result<i32> {
    match load(&resolve(wd, &a.instance))? {
        Loaded::Qp(model) => {
            let lifted = qp_epigraph(&model)?;
            let b = qp_bounds(&model, &lifted)?;
            println!("x_hat = origin, max f = {:.6e}", model.feas_gap(&vec![0.0; model.n()])?);
            println!("lambda_bar = {:.9e}", b.lambda_bar);
        }
        Loaded::Lp(inst) => {
            let p = &inst.problem;
            let cert = slater(p, inst.x0.as_deref(), a.delta, a.budget)?;
            let b = dual_bounds(p, &cert, &uncertainty_radii(p))?;
            let worst = cert.f_hat.iter().fold(f64::NEG_INFINITY, |x, &y| x.max(y));
            println!("x_hat = {:?}", cert.x_hat);
            println!("max f = {worst:.6e}");
            println!("eps_hat = {:.6e}", cert.eps_hat);
            println!("v_lower = {:.9e}", cert.v_lower);
            println!("lambda_bar = {:.9e}", b.lambda_bar);
            println!("r_w = {:.9e}", b.r_w);
        }
    }
    Ok(EXIT_OK)
}
