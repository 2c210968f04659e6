//! A common view of robust programs for the baselines: group 0 is the
//! (possibly uncertain) objective, groups 1..=m the constraints.

use std::sync::Arc;

use rsp_core::linalg::{norm, Matrix};
use rsp_core::problem::{RobustProblem, ScenarioCut};
use rsp_core::sets::{project_intersection, SetDescriptor};
use rsp_core::{Result, RspError};

use crate::concave::{scenario_cut, ConcaveCache};
use crate::instance::QpInstance;

pub trait UncertainModel: Sync {
    fn n(&self) -> usize;
    /// Number of uncertain constraints (groups 1..=m).
    fn m(&self) -> usize;
    fn z_dim(&self, j: usize) -> usize;
    /// A function concave in z with the same supremum over Z as gⱼ(x, ·).
    fn eval(&self, j: usize, x: &[f64], z: &[f64]) -> Result<f64>;
    fn grad_x(&self, j: usize, x: &[f64], z: &[f64]) -> Result<Vec<f64>>;
    /// Ascent direction of `eval` in z.
    fn grad_z(&self, j: usize, x: &[f64], z: &[f64]) -> Result<Vec<f64>>;
    /// (a maximizer of gⱼ(x, ·), fⱼ(x)).
    fn pessimize(&self, j: usize, x: &[f64]) -> Result<(Vec<f64>, f64)>;
    /// x ↦ gⱼ(x, z) as a convex quadratic.
    fn cut(&self, j: usize, z: &[f64]) -> Result<ScenarioCut<f64>>;
    fn project_x(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn project_z(&self, j: usize, z: &[f64]) -> Result<Vec<f64>>;
    /// X written as convex constraints h(x) ≤ 0.
    fn domain_cuts(&self) -> Result<Vec<ScenarioCut<f64>>>;
    /// Bounds on the worst-case objective over X.
    fn objective_range(&self) -> (f64, f64);
    /// Common starting point: the optimum of the nominal problem (every
    /// z = 0), or the projection of 0 if that master fails.
    fn start(&self) -> Vec<f64> {
        let master = crate::master::BarrierMaster::default();
        let nominal = crate::cutting::ScenarioSet::nominal(self);
        crate::cutting::build_master(self, &nominal)
            .and_then(|p| crate::master::MasterSolver::solve(&master, &p, None))
            .map(|s| s.y[..self.n()].to_vec())
            .or_else(|_| self.project_x(&vec![0.0; self.n()]))
            .unwrap_or_else(|_| vec![0.0; self.n()])
    }

    /// The trace's feas_gap column.
    fn feas_gap(&self, x: &[f64]) -> Result<f64> {
        let mut g = f64::NEG_INFINITY;
        for j in 1..=self.m() {
            g = g.max(self.pessimize(j, x)?.1);
        }
        Ok(g)
    }
}

/// The robust QP over the unit balls in x and z.
#[derive(Debug, Clone)]
pub struct QpModel {
    pub inst: Arc<QpInstance>,
    caches: Vec<ConcaveCache>,
}

impl QpModel {
    pub fn new(inst: QpInstance) -> Self {
        Self::shared(Arc::new(inst))
    }

    pub fn shared(inst: Arc<QpInstance>) -> Self {
        let caches = (0..=inst.m).map(|i| ConcaveCache::new(inst.clone(), i)).collect();
        QpModel { inst, caches }
    }
}

fn unit_ball(y: &[f64]) -> Vec<f64> {
    let r = norm(y);
    if r <= 1.0 {
        y.to_vec()
    } else {
        y.iter().map(|v| v / r).collect()
    }
}

impl UncertainModel for QpModel {
    fn n(&self) -> usize {
        self.inst.n
    }
    fn m(&self) -> usize {
        self.inst.m
    }
    fn z_dim(&self, _j: usize) -> usize {
        self.inst.k
    }
    fn eval(&self, j: usize, x: &[f64], z: &[f64]) -> Result<f64> {
        Ok(self.caches[j].at(x)?.value(z))
    }
    fn grad_x(&self, j: usize, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        Ok(self.caches[j].at(x)?.grad_x(&self.inst, j, x, z))
    }
    fn grad_z(&self, j: usize, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        Ok(self.caches[j].at(x)?.grad_z(z))
    }
    fn pessimize(&self, j: usize, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        let sol = self.caches[j].at(x)?.pessimize()?;
        Ok((sol.z, sol.value))
    }
    fn cut(&self, j: usize, z: &[f64]) -> Result<ScenarioCut<f64>> {
        Ok(scenario_cut(&self.inst, j, z))
    }
    fn project_x(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(unit_ball(x))
    }
    fn project_z(&self, _j: usize, z: &[f64]) -> Result<Vec<f64>> {
        Ok(unit_ball(z))
    }
    fn domain_cuts(&self) -> Result<Vec<ScenarioCut<f64>>> {
        Ok(vec![ball_cut(self.inst.n, 1.0)])
    }
    fn objective_range(&self) -> (f64, f64) {
        // A_z x = [P₀₀ … P₀ₖ]((1, z) ⊗ x) and the stacked matrix has norm 1, so
        // ‖A_z x‖² ≤ 2 on the unit balls; |b₀ᵀx| ≤ 1.
        let c = self.inst.c[0];
        (c - 1.0, c + 3.0)
    }
}

/// ‖x‖² ≤ r² as ½xᵀ(2I)x − r².
fn ball_cut(n: usize, r: f64) -> ScenarioCut<f64> {
    let mut h = Matrix::identity(n);
    h.scale(2.0);
    ScenarioCut { hess: Some(h), a: vec![0.0; n], b0: -r * r }
}

fn linear_cut(n: usize, j: usize, sign: f64, rhs: f64) -> ScenarioCut<f64> {
    let mut a = vec![0.0; n];
    a[j] = sign;
    ScenarioCut { hess: None, a, b0: -rhs }
}

/// Cuts for a set on the coordinates offset..offset+d of an n-vector.
fn set_cuts(s: &SetDescriptor<f64>, n: usize, offset: usize, d: usize, out: &mut Vec<ScenarioCut<f64>>) -> Result<()> {
    match s {
        SetDescriptor::L2Ball { radius } => {
            let mut h = Matrix::zeros(n, n);
            for j in offset..offset + d {
                h[(j, j)] = 2.0;
            }
            out.push(ScenarioCut { hess: Some(h), a: vec![0.0; n], b0: -radius * radius });
        }
        SetDescriptor::LinfBall { radius } => {
            for j in offset..offset + d {
                out.push(linear_cut(n, j, 1.0, *radius));
                out.push(linear_cut(n, j, -1.0, *radius));
            }
        }
        SetDescriptor::Box { lo, hi } => {
            for j in 0..d {
                if hi[j].is_finite() {
                    out.push(linear_cut(n, offset + j, 1.0, hi[j]));
                }
                if lo[j].is_finite() {
                    out.push(linear_cut(n, offset + j, -1.0, -lo[j]));
                }
            }
        }
        SetDescriptor::L1Ball { radius } => {
            if d > 12 {
                return Err(RspError::UnsupportedSet("l1 domain above 12 dimensions in the scenario master".into()));
            }
            for mask in 0..(1usize << d) {
                let mut a = vec![0.0; n];
                for j in 0..d {
                    a[offset + j] = if mask >> j & 1 == 1 { -1.0 } else { 1.0 };
                }
                out.push(ScenarioCut { hess: None, a, b0: -radius });
            }
        }
        SetDescriptor::Singleton { .. } => {
            return Err(RspError::UnsupportedSet("singleton domain has no interior".into()));
        }
        SetDescriptor::Intersection { sets } => {
            for f in sets {
                set_cuts(f, n, offset, d, out)?;
            }
        }
        SetDescriptor::Product { blocks } => {
            let mut off = offset;
            for (k, b) in blocks {
                set_cuts(b, n, off, *k, out)?;
                off += k;
            }
        }
    }
    Ok(())
}

/// A certain linear objective (group 0, no uncertainty) with the problem's
/// constraints as groups 1..=m.
#[derive(Debug, Clone)]
pub struct RobustModel {
    pub problem: RobustProblem<f64>,
}

impl RobustModel {
    pub fn new(problem: RobustProblem<f64>) -> Result<Self> {
        if problem.r() > 0 {
            return Err(RspError::UnsupportedSet("equality constraints in a scenario model".into()));
        }
        problem.domain.validate(problem.n())?;
        Ok(RobustModel { problem })
    }

    fn con(&self, j: usize) -> &rsp_core::problem::Constraint<f64> {
        &self.problem.constraints[j - 1]
    }
}

impl UncertainModel for RobustModel {
    fn n(&self) -> usize {
        self.problem.n()
    }
    fn m(&self) -> usize {
        self.problem.m()
    }
    fn z_dim(&self, j: usize) -> usize {
        if j == 0 {
            0
        } else {
            self.con(j).z_dim()
        }
    }
    fn eval(&self, j: usize, x: &[f64], z: &[f64]) -> Result<f64> {
        if j == 0 {
            Ok(self.problem.objective(x))
        } else {
            self.con(j).eval(x, z)
        }
    }
    fn grad_x(&self, j: usize, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        if j == 0 {
            Ok(self.problem.c.clone())
        } else {
            self.con(j).subgrad_x(x, z)
        }
    }
    fn grad_z(&self, j: usize, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        if j == 0 {
            Ok(Vec::new())
        } else {
            Ok(self.con(j).subgrad_negz(x, z)?.iter().map(|v| -v).collect())
        }
    }
    fn pessimize(&self, j: usize, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        if j == 0 {
            Ok((Vec::new(), self.problem.objective(x)))
        } else {
            self.con(j).pessimize(x, j - 1)
        }
    }
    fn cut(&self, j: usize, z: &[f64]) -> Result<ScenarioCut<f64>> {
        if j == 0 {
            return Ok(ScenarioCut { hess: None, a: self.problem.c.clone(), b0: 0.0 });
        }
        self.con(j)
            .scenario_cut(z)
            .ok_or_else(|| RspError::MasterFailure(format!("constraint {} has no scenario cut", j - 1)))
    }
    fn project_x(&self, x: &[f64]) -> Result<Vec<f64>> {
        project_any(&self.problem.domain, x)
    }
    fn project_z(&self, j: usize, z: &[f64]) -> Result<Vec<f64>> {
        if j == 0 {
            Ok(Vec::new())
        } else {
            project_any(&self.con(j).zset, z)
        }
    }
    fn domain_cuts(&self) -> Result<Vec<ScenarioCut<f64>>> {
        let mut out = Vec::new();
        let n = self.n();
        set_cuts(&self.problem.domain, n, 0, n, &mut out)?;
        Ok(out)
    }
    fn objective_range(&self) -> (f64, f64) {
        let s = norm(&self.problem.c) * self.problem.domain_radius();
        (-s, s)
    }
    /// Σ[fᵢ]₊ + dist(x, X), the certificate quantity.
    fn feas_gap(&self, x: &[f64]) -> Result<f64> {
        let d = rsp_core::linalg::dist(&project_any(&self.problem.domain, x)?, x);
        Ok(self.problem.infeasibility(x)? + d)
    }
}

fn project_any(s: &SetDescriptor<f64>, y: &[f64]) -> Result<Vec<f64>> {
    if s.is_intersection() {
        project_intersection(s, y, 1e-12, 10_000)
    } else {
        s.project(y)
    }
}

/// Worst-case objective f₀(x).
pub fn worst_objective<M: UncertainModel + ?Sized>(model: &M, x: &[f64]) -> Result<f64> {
    Ok(model.pessimize(0, x)?.1)
}
