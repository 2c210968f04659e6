//! First-order baselines. Both bisect on an objective threshold τ and, for
//! each τ, drive F(x) = max(f₀(x) − τ, f₁(x), …, fₘ(x)) below ε by projected
//! subgradient steps on x. FO-pess evaluates each fⱼ by exact pessimization;
//! OCO replaces the pessimizers by online gradient ascent players in z.

use std::time::Instant;

use rsp_core::linalg::norm;
use rsp_core::trace::{CheckpointRecord, IterTrace, RunStatus};
use rsp_core::{Result, RspError};

use crate::metrics;
use crate::model::UncertainModel;

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineConfig {
    pub eps: f64,
    /// Total subgradient steps over all bisection rounds.
    pub max_iters: usize,
    /// Steps allowed per threshold before it is declared infeasible.
    pub inner_iters: usize,
    pub checkpoint_every: usize,
    /// Inner rounds test F(x̄) ≤ ε every this many steps.
    pub check_every: usize,
    /// Steps are base/(‖g‖√k).
    pub step_base: f64,
    pub time_budget: Option<f64>,
}

impl OnlineConfig {
    pub fn new(eps: f64, max_iters: usize) -> Self {
        OnlineConfig { eps, max_iters, inner_iters: 2000, checkpoint_every: 100, check_every: 100, step_base: 2.0, time_budget: None }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(RspError::NonpositiveEps(self.eps));
        }
        if self.max_iters == 0 || self.inner_iters == 0 || self.checkpoint_every == 0 || self.check_every == 0 || !(self.step_base > 0.0) {
            return Err(RspError::InvalidSteps("budgets, checkpoint interval and step base must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OnlineResult {
    pub trace: IterTrace<f64>,
    /// Threshold interval [lo, hi] after each completed bisection round.
    pub intervals: Vec<(f64, f64)>,
    /// Best ε-feasible point seen and its worst-case objective.
    pub best: Option<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Pessimize,
    Ogd,
}

pub fn fo_pess<M: UncertainModel + ?Sized>(model: &M, cfg: &OnlineConfig) -> Result<OnlineResult> {
    run(model, cfg, Mode::Pessimize)
}

pub fn oco_ogd<M: UncertainModel + ?Sized>(model: &M, cfg: &OnlineConfig) -> Result<OnlineResult> {
    run(model, cfg, Mode::Ogd)
}

/// Step-weighted running mean.
struct Average {
    sum: Vec<f64>,
    weight: f64,
}

impl Average {
    fn new(n: usize) -> Self {
        Average { sum: vec![0.0; n], weight: 0.0 }
    }
    fn add(&mut self, w: f64, x: &[f64]) {
        self.sum.iter_mut().zip(x).for_each(|(s, &v)| *s += w * v);
        self.weight += w;
    }
    fn mean(&self) -> Option<Vec<f64>> {
        (self.weight > 0.0).then(|| self.sum.iter().map(|s| s / self.weight).collect())
    }
}

fn run<M: UncertainModel + ?Sized>(model: &M, cfg: &OnlineConfig, mode: Mode) -> Result<OnlineResult> {
    cfg.validate()?;
    let t0 = Instant::now();
    let n = model.n();
    let m = model.m();
    let groups = m + 1;
    let (mut lo, mut hi) = model.objective_range();
    // With no constraints there is nothing to bisect and F = f₀.
    let bisect = m > 0;
    let mut tau = 0.5 * (lo + hi);

    let mut trace = IterTrace::empty(RunStatus::Completed);
    let mut intervals = Vec::new();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut best_fg = f64::NAN;
    let mut x = model.project_x(&model.start())?;
    let mut zs: Vec<Vec<f64>> = (0..groups).map(|j| vec![0.0; model.z_dim(j)]).collect();
    let mut avg = Average::new(n);
    let mut k_inner = 0usize;

    for it in 1..=cfg.max_iters {
        k_inner += 1;
        let shift = if bisect { tau } else { 0.0 };
        // Pick the active piece of F and its subgradient.
        let mut top = (f64::NEG_INFINITY, 0usize);
        let grad;
        match mode {
            Mode::Pessimize => {
                let mut best_z = Vec::new();
                for j in 0..groups {
                    let (z, v) = model.pessimize(j, &x)?;
                    let v = if j == 0 { v - shift } else { v };
                    if v > top.0 || top.0 == f64::NEG_INFINITY {
                        top = (v, j);
                        best_z = z;
                    }
                }
                grad = model.grad_x(top.1, &x, &best_z)?;
            }
            Mode::Ogd => {
                let eta_k = cfg.step_base / (k_inner as f64).sqrt();
                for j in 0..groups {
                    let v = model.eval(j, &x, &zs[j])?;
                    let v = if j == 0 { v - shift } else { v };
                    if v > top.0 || top.0 == f64::NEG_INFINITY {
                        top = (v, j);
                    }
                }
                grad = model.grad_x(top.1, &x, &zs[top.1])?;
                for j in 0..groups {
                    if zs[j].is_empty() {
                        continue;
                    }
                    let gz = model.grad_z(j, &x, &zs[j])?;
                    let gn = norm(&gz);
                    if gn > 0.0 {
                        let y: Vec<f64> = zs[j].iter().zip(&gz).map(|(&a, &b)| a + eta_k / gn * b).collect();
                        zs[j] = model.project_z(j, &y)?;
                    }
                }
            }
        }
        let gn = norm(&grad);
        if gn > 0.0 {
            let eta = cfg.step_base / (gn * (k_inner as f64).sqrt());
            avg.add(eta, &x);
            let y: Vec<f64> = x.iter().zip(&grad).map(|(&a, &b)| a - eta * b).collect();
            x = model.project_x(&y)?;
        } else {
            // x minimizes the active piece; weight it like a unit step.
            avg.add(cfg.step_base / (k_inner as f64).sqrt(), &x);
        }

        let at_checkpoint = it % cfg.checkpoint_every == 0 || it == cfg.max_iters;
        let at_check = bisect && (k_inner % cfg.check_every == 0 || k_inner >= cfg.inner_iters);
        if !at_checkpoint && !at_check {
            continue;
        }
        let xbar = avg.mean().unwrap_or_else(|| x.clone());
        let (obj, fg) = metrics::evaluate(model, &xbar)?;
        if fg <= cfg.eps && best.as_ref().map_or(true, |b| obj < b.1) {
            best = Some((xbar.clone(), obj));
            best_fg = fg;
        }
        if at_checkpoint {
            let (report, robj, rfg) = match &best {
                Some(b) => (b.0.clone(), b.1, best_fg),
                None => (xbar.clone(), obj, fg),
            };
            trace.records.push(CheckpointRecord {
                iter: it as u64,
                elapsed_s: t0.elapsed().as_secs_f64(),
                obj: robj,
                feas_gap: rfg,
                ogr: f64::NAN,
                cert_bound: f64::NAN,
            });
            trace.checkpoint_x.push(report);
            trace.iterations = it;
        }

        if at_check {
            let success = fg <= cfg.eps && obj - tau <= cfg.eps;
            if success || k_inner >= cfg.inner_iters {
                if success {
                    hi = tau.min(obj);
                    // An ε-feasible point below lo overturns an earlier
                    // infeasible verdict.
                    lo = lo.min(hi);
                } else {
                    lo = tau;
                }
                intervals.push((lo, hi));
                if hi - lo <= cfg.eps {
                    trace.status = RunStatus::Converged;
                    if !at_checkpoint {
                        let b = best.as_ref().expect("a successful round stores its point");
                        trace.records.push(CheckpointRecord {
                            iter: it as u64,
                            elapsed_s: t0.elapsed().as_secs_f64(),
                            obj: b.1,
                            feas_gap: best_fg,
                            ogr: f64::NAN,
                            cert_bound: f64::NAN,
                        });
                        trace.checkpoint_x.push(b.0.clone());
                        trace.iterations = it;
                    }
                    break;
                }
                tau = 0.5 * (lo + hi);
                k_inner = 0;
                avg = Average::new(n);
                zs = (0..groups).map(|j| vec![0.0; model.z_dim(j)]).collect();
                if let Some(b) = &best {
                    x = b.0.clone();
                }
            }
        }
        if cfg.time_budget.map_or(false, |b| t0.elapsed().as_secs_f64() >= b) {
            trace.status = RunStatus::TimeBudgetExceeded;
            break;
        }
    }
    if bisect && trace.status == RunStatus::Completed {
        trace.status = RunStatus::BudgetExhausted;
    }
    trace.x_last = x;
    trace.x_bar = trace.checkpoint_x.last().cloned().unwrap_or_default();
    Ok(OnlineResult { trace, intervals, best })
}
