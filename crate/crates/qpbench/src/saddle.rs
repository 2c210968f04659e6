//! SGSP on the robust QP: the uncertain objective is epigraph-lifted, every
//! gᵢ enters through its concavification ḡᵢ, and checkpoints are rescored
//! with the shared metrics.

use std::sync::Arc;

use rsp_core::perspective::{certificate_at, dual_bounds, uncertainty_radii, DualBounds};
use rsp_core::problem::{epigraph_lift, Constraint, GeneralOracle, RobustProblem};
use rsp_core::sets::SetDescriptor;
use rsp_core::sgsp::{sgsp_run, SaddleState, SgspConfig, StepPolicy};
use rsp_core::trace::{Averaging, IterTrace};
use rsp_core::Result;

use crate::concave::{scenario_cut, ConcaveCache};
use crate::instance::QpInstance;
use crate::metrics;
use crate::model::{QpModel, UncertainModel};

/// ḡᵢ as a general oracle with TRS pessimization. Oracle failures (only
/// possible on non-finite input) surface as NaN, which the core rejects.
pub fn qp_constraint(inst: &Arc<QpInstance>, i: usize) -> Constraint<f64> {
    let cache = Arc::new(ConcaveCache::new(inst.clone(), i));
    let (a, b, c, d) = (cache.clone(), cache.clone(), cache.clone(), cache);
    let e = inst.clone();
    let oracle = GeneralOracle::new(
        inst.n,
        inst.k,
        move |x: &[f64], z: &[f64]| a.at(x).map_or(f64::NAN, |cv| cv.value(z)),
        move |x: &[f64], z: &[f64]| b.at(x).map_or_else(|_| vec![f64::NAN; x.len()], |cv| cv.grad_x(&b.inst, i, x, z)),
        move |x: &[f64], z: &[f64]| c.at(x).map_or_else(|_| vec![f64::NAN; z.len()], |cv| cv.grad_z(z).iter().map(|v| -v).collect()),
    )
    .with_pessimizer(move |x: &[f64]| match d.at(x).and_then(|cv| cv.pessimize()) {
        Ok(sol) => (sol.z, sol.value),
        Err(_) => (vec![f64::NAN; d.inst.k], f64::NAN),
    })
    .with_scenario_cut(move |z: &[f64]| scenario_cut(&e, i, z));
    Constraint::general(oracle, SetDescriptor::l2(1.0))
}

/// min t s.t. ḡ₀(x, z) ≤ t, ḡᵢ(x, z) ≤ 0, ‖x‖ ≤ 1, t ∈ [t_lo, t_hi].
pub fn qp_epigraph(model: &QpModel) -> Result<RobustProblem<f64>> {
    let inst = &model.inst;
    let cons = (1..=inst.m).map(|i| qp_constraint(inst, i)).collect();
    let base = RobustProblem::new(vec![0.0; inst.n], SetDescriptor::l2(1.0), cons);
    let (lo, hi) = model.objective_range();
    epigraph_lift(&qp_constraint(inst, 0), &base, lo - 0.05, hi + 0.05)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSgspConfig {
    pub n_iters: usize,
    pub checkpoint_every: usize,
    pub step_base: f64,
    pub time_budget: Option<f64>,
}

impl QpSgspConfig {
    pub fn new(n_iters: usize) -> Self {
        QpSgspConfig { n_iters, checkpoint_every: 100, step_base: 2.0, time_budget: None }
    }
}

/// Dual bounds from the Slater point (0, t̂): every gᵢ(0, z) = cᵢ < 0.
pub fn qp_bounds(model: &QpModel, lifted: &RobustProblem<f64>) -> Result<DualBounds<f64>> {
    let n = model.n();
    let mut x_hat = vec![0.0; n + 1];
    x_hat[n] = model.inst.c[0] - 2.0 * model.inst.c[0].min(0.0);
    let cert = certificate_at(lifted, &x_hat, None)?;
    dual_bounds(lifted, &cert, &uncertainty_radii(lifted))
}

/// Runs SGSP from the nominal optimum and rescores every checkpoint on x.
pub fn sgsp_qp(model: &QpModel, cfg: &QpSgspConfig) -> Result<IterTrace<f64>> {
    let lifted = qp_epigraph(model)?;
    let bounds = qp_bounds(model, &lifted)?;
    let n = model.n();
    let mut x0 = model.start();
    let (lo, hi) = model.objective_range();
    x0.push(model.pessimize(0, &x0)?.1.clamp(lo, hi));
    let run_cfg = SgspConfig {
        n_iters: cfg.n_iters,
        step_policy: StepPolicy::AdaptiveNormalized { base: cfg.step_base },
        averaging: Averaging::StepWeighted,
        checkpoint_every: cfg.checkpoint_every,
        time_budget: cfg.time_budget,
    };
    let mut tr = sgsp_run(&lifted, &bounds, &run_cfg, &SaddleState::at(&lifted, x0))?;
    for (rec, xc) in tr.records.iter_mut().zip(&tr.checkpoint_x) {
        let (obj, fg) = metrics::evaluate(model, &xc[..n])?;
        rec.obj = obj;
        rec.feas_gap = fg;
        rec.ogr = f64::NAN;
    }
    Ok(tr)
}
