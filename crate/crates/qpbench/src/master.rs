//! Scenario master problems: min objᵀy s.t. hⱼ(y) ≤ 0 for convex quadratic hⱼ.

use rsp_core::linalg::{dot, norm, solve, Matrix};
use rsp_core::problem::ScenarioCut;
use rsp_core::{Result, RspError};

#[derive(Debug, Clone)]
pub struct MasterProblem {
    pub obj: Vec<f64>,
    pub cuts: Vec<ScenarioCut<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MasterSolution {
    pub y: Vec<f64>,
    pub value: f64,
    /// A certified lower bound on the optimal value.
    pub lower_bound: f64,
}

pub trait MasterSolver: Sync {
    fn solve(&self, prob: &MasterProblem, warm: Option<&[f64]>) -> Result<MasterSolution>;
}

/// Log-barrier path following with damped Newton centering and a phase I.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierMaster {
    /// Target duality gap ncuts/μ.
    pub gap_tol: f64,
    pub mu_factor: f64,
    pub max_newton: usize,
}

impl Default for BarrierMaster {
    fn default() -> Self {
        BarrierMaster { gap_tol: 1e-9, mu_factor: 8.0, max_newton: 200 }
    }
}

const BLOWUP: f64 = 1e12;

/// Every cut strictly negative at y, and max cut value.
fn worst(cuts: &[ScenarioCut<f64>], y: &[f64]) -> f64 {
    cuts.iter().map(|c| c.eval(y)).fold(f64::NEG_INFINITY, f64::max)
}

fn barrier_value(obj: &[f64], cuts: &[ScenarioCut<f64>], mu: f64, y: &[f64]) -> f64 {
    let mut v = mu * dot(obj, y);
    for c in cuts {
        let h = c.eval(y);
        if !(h < 0.0) {
            return f64::INFINITY;
        }
        v -= (-h).ln();
    }
    v
}

impl BarrierMaster {
    /// Centers at each μ until ncuts/μ ≤ gap_tol. Stops early once `stop(y)`.
    fn path(
        &self,
        obj: &[f64],
        cuts: &[ScenarioCut<f64>],
        mut y: Vec<f64>,
        stop: &dyn Fn(&[f64]) -> bool,
    ) -> Result<(Vec<f64>, f64)> {
        let d = y.len();
        let ncuts = cuts.len().max(1) as f64;
        let mut mu = 1.0;
        // Last completed centering and its gap. Deep in the path the Newton
        // system can lose all accuracy; the previous center is then returned.
        let mut last: Option<(Vec<f64>, f64)> = None;
        loop {
            for _ in 0..self.max_newton {
                let mut grad: Vec<f64> = obj.iter().map(|v| mu * v).collect();
                let mut hess = Matrix::zeros(d, d);
                for c in cuts {
                    let h = c.eval(&y);
                    let g = c.grad(&y);
                    let w = 1.0 / -h;
                    for i in 0..d {
                        grad[i] += w * g[i];
                        for j in 0..d {
                            hess[(i, j)] += w * w * g[i] * g[j];
                        }
                    }
                    if let Some(hh) = &c.hess {
                        for i in 0..d {
                            for j in 0..d {
                                hess[(i, j)] += w * hh[(i, j)];
                            }
                        }
                    }
                }
                let neg: Vec<f64> = grad.iter().map(|v| -v).collect();
                let step = solve(&hess, &neg).or_else(|| {
                    let tr = (0..d).map(|i| hess[(i, i)]).sum::<f64>().max(1.0);
                    hess.add_diag(1e-12 * tr);
                    solve(&hess, &neg)
                });
                let step = match step {
                    Some(s) if -dot(&grad, &s) >= 0.0 => s,
                    _ => {
                        return last.ok_or_else(|| RspError::MasterFailure("Newton system broke down before the first centering".into()));
                    }
                };
                let dec = -dot(&grad, &step);
                if dec * 0.5 <= 1e-12 {
                    break;
                }
                let f0 = barrier_value(obj, cuts, mu, &y);
                let mut a = 1.0;
                let mut moved = false;
                for _ in 0..80 {
                    let cand: Vec<f64> = y.iter().zip(&step).map(|(&p, &q)| p + a * q).collect();
                    if barrier_value(obj, cuts, mu, &cand) <= f0 - 0.25 * a * dec {
                        y = cand;
                        moved = true;
                        break;
                    }
                    a *= 0.5;
                }
                if !moved {
                    break;
                }
                if norm(&y) > BLOWUP {
                    return Err(RspError::MasterFailure("master problem appears unbounded".into()));
                }
                if stop(&y) {
                    return Ok((y, ncuts / mu));
                }
            }
            if ncuts / mu <= self.gap_tol {
                return Ok((y, ncuts / mu));
            }
            last = Some((y.clone(), ncuts / mu));
            mu *= self.mu_factor;
        }
    }

    /// A strictly feasible point: min s s.t. hⱼ(y) ≤ s, s ≥ −1.
    fn phase_one(&self, cuts: &[ScenarioCut<f64>], y0: &[f64]) -> Result<Vec<f64>> {
        let d = y0.len();
        let mut lifted: Vec<ScenarioCut<f64>> = cuts
            .iter()
            .map(|c| {
                let mut a = c.a.clone();
                a.push(-1.0);
                let hess = c.hess.as_ref().map(|h| Matrix::from_fn(d + 1, d + 1, |i, j| if i < d && j < d { h[(i, j)] } else { 0.0 }));
                ScenarioCut { hess, a, b0: c.b0 }
            })
            .collect();
        let mut a = vec![0.0; d + 1];
        a[d] = -1.0;
        lifted.push(ScenarioCut { hess: None, a, b0: -1.0 });
        let mut obj = vec![0.0; d + 1];
        obj[d] = 1.0;
        let mut start = y0.to_vec();
        start.push(worst(cuts, y0).max(-0.5) + 1.0);
        let stop = |v: &[f64]| worst(cuts, &v[..d]) < 0.0;
        let (v, _) = self.path(&obj, &lifted, start, &stop)?;
        if worst(cuts, &v[..d]) < 0.0 {
            Ok(v[..d].to_vec())
        } else {
            Err(RspError::MasterFailure(format!("scenario master is infeasible (min max h = {:e})", v[d])))
        }
    }
}

impl MasterSolver for BarrierMaster {
    fn solve(&self, prob: &MasterProblem, warm: Option<&[f64]>) -> Result<MasterSolution> {
        let d = prob.obj.len();
        if prob.cuts.iter().any(|c| c.a.len() != d) {
            return Err(RspError::DimensionMismatch("cut dimension differs from the objective".into()));
        }
        let y0 = warm.map(|w| w.to_vec()).unwrap_or_else(|| vec![0.0; d]);
        let y0 = if worst(&prob.cuts, &y0) < 0.0 { y0 } else { self.phase_one(&prob.cuts, &y0)? };
        let (y, gap) = self.path(&prob.obj, &prob.cuts, y0, &|_| false)?;
        let value = dot(&prob.obj, &y);
        Ok(MasterSolution { y, value, lower_bound: value - gap })
    }
}
