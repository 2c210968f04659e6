//! Biaffine compilation and the proximal alternating predictor-corrector
//! method, plain and split.

use std::time::Instant;

use crate::cone::{project_cone_lift, prox_support, ConeLiftSpec, LiftedVar};
use crate::error::{Result, RspError};
use crate::linalg::{dot, norm, norm_sq, Matrix};
use crate::perspective::{uncertainty_radii, DualBounds};
use crate::problem::{Oracle, RobustProblem};
use crate::scalar::Real;
use crate::sgsp::{checkpoint_feas, Certificate, CertificateRow};
use crate::split::LiftedProblem;
use crate::trace::{CheckpointRecord, ConstantSteps, Ergodic, IterTrace, RunStatus, StartSummary};

/// Q̃ᵢ = [Qᵢ dᵢ], q̃ᵢ = (qᵢ; γᵢ) and the operator Q̄ = [Q̃₁ … Q̃ₘ Aᵀ I]
/// acting on y = (u₁, …, uₘ, w, π).
#[derive(Debug, Clone)]
pub struct CompiledBiaffine<T> {
    pub n: usize,
    pub c: Vec<T>,
    pub qt: Vec<Matrix<T>>,
    pub qtv: Vec<Vec<T>>,
    pub a: Matrix<T>,
    pub b: Vec<T>,
}

impl<T: Real> CompiledBiaffine<T> {
    pub fn m(&self) -> usize {
        self.qt.len()
    }

    pub fn r(&self) -> usize {
        self.b.len()
    }

    /// dᵢ + 1 per constraint.
    pub fn block_dims(&self) -> Vec<usize> {
        self.qt.iter().map(|q| q.cols).collect()
    }

    pub fn y_dim(&self) -> usize {
        self.block_dims().iter().sum::<usize>() + self.r() + self.n
    }

    /// Q̄y, blockwise.
    pub fn qbar_apply(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        let mut off = 0;
        for q in &self.qt {
            let v = q.matvec(&y[off..off + q.cols]);
            out.iter_mut().zip(&v).for_each(|(a, &b)| *a += b);
            off += q.cols;
        }
        if self.r() > 0 {
            let v = self.a.tmatvec(&y[off..off + self.r()]);
            out.iter_mut().zip(&v).for_each(|(a, &b)| *a += b);
            off += self.r();
        }
        out.iter_mut().zip(&y[off..off + self.n]).for_each(|(a, &b)| *a += b);
        out
    }

    /// Q̄ᵀx = (Q̃₁ᵀx, …, Q̃ₘᵀx, Ax, x).
    pub fn qbar_adjoint(&self, x: &[T]) -> Vec<T> {
        let mut out = Vec::with_capacity(self.y_dim());
        for q in &self.qt {
            out.extend(q.tmatvec(x));
        }
        if self.r() > 0 {
            out.extend(self.a.matvec(x));
        }
        out.extend_from_slice(x);
        out
    }

    /// Dense Q̄ (tests and small instances only).
    pub fn qbar_dense(&self) -> Matrix<T> {
        let cols = self.y_dim();
        let mut m = Matrix::zeros(self.n, cols);
        let mut off = 0;
        for q in &self.qt {
            for i in 0..self.n {
                for j in 0..q.cols {
                    m.data[i * cols + off + j] = q[(i, j)];
                }
            }
            off += q.cols;
        }
        for k in 0..self.r() {
            for i in 0..self.n {
                m.data[i * cols + off + k] = self.a[(k, i)];
            }
        }
        off += self.r();
        for i in 0..self.n {
            m.data[i * cols + off + i] = T::one();
        }
        m
    }
}

pub fn compile_biaffine<T: Real>(p: &RobustProblem<T>) -> Result<CompiledBiaffine<T>> {
    let n = p.n();
    let mut qt = Vec::with_capacity(p.m());
    let mut qtv = Vec::with_capacity(p.m());
    for (i, c) in p.constraints.iter().enumerate() {
        let Oracle::Biaffine(b) = &c.oracle else {
            return Err(RspError::NotBiaffine(i));
        };
        let d = b.q_mat.cols;
        qt.push(Matrix::from_fn(n, d + 1, |r, k| if k < d { b.q_mat[(r, k)] } else { b.d[r] }));
        let mut v = b.q.clone();
        v.push(b.gamma);
        qtv.push(v);
    }
    Ok(CompiledBiaffine { n, c: p.c.clone(), qt, qtv, a: p.eq_a.clone(), b: p.eq_b.clone() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PapcConfig<T> {
    pub tau: T,
    /// θᵢ per constraint.
    pub theta: Vec<T>,
    pub theta_w: T,
    pub theta_pi: T,
    pub n_iters: usize,
    pub checkpoint_every: usize,
    /// Required slack in λ_max(τS^{-1/2}Q̄ᵀQ̄S^{-1/2}) ≤ 1 − margin.
    pub margin: T,
    pub time_budget: Option<f64>,
}

impl<T: Real> PapcConfig<T> {
    /// Unit θ's and τ = (1 − margin)/λ_max(Q̄ᵀQ̄) for the given split sizes.
    pub fn default_for(compiled: &CompiledBiaffine<T>, splits: &[usize], n_iters: usize, margin: T) -> Result<Self> {
        let m = compiled.m();
        let mut cfg = PapcConfig {
            tau: T::one(),
            theta: vec![T::one(); m],
            theta_w: T::one(),
            theta_pi: T::one(),
            n_iters,
            checkpoint_every: (n_iters / 100).max(1),
            margin,
            time_budget: None,
        };
        let lmax = step_operator_norm(compiled, splits, &cfg)?;
        cfg.tau = (T::one() - margin) / lmax;
        Ok(cfg)
    }
}

/// Power iteration for λ_max of a symmetric PSD operator (Rayleigh quotient).
fn power_lambda_max<T: Real>(dim: usize, apply: impl Fn(&[T]) -> Vec<T>) -> T {
    if dim == 0 {
        return T::zero();
    }
    let mut v: Vec<T> = (0..dim).map(|i| T::one() + T::lit(0.01 * ((i * 7919) % 101) as f64)).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|a| *a /= nv);
    let mut lam = T::zero();
    for _ in 0..100_000 {
        let mv = apply(&v);
        let new_lam = dot(&v, &mv);
        let nm = norm(&mv);
        if nm == T::zero() {
            return T::zero();
        }
        v = mv.iter().map(|&a| a / nm).collect();
        if (new_lam - lam).abs() <= T::lit(1e-10) * new_lam.abs() {
            return new_lam;
        }
        lam = new_lam;
    }
    lam
}

/// λ_max(τ·Q̄S⁻¹Q̄ᵀ) for the (possibly split) Q̄, with S = diag(θ⁻¹ blocks).
/// Equals λ_max(S^{-1/2}τQ̄ᵀQ̄S^{-1/2}).
fn step_operator_norm<T: Real>(cb: &CompiledBiaffine<T>, splits: &[usize], cfg: &PapcConfig<T>) -> Result<T> {
    if splits.len() != cb.m() || cfg.theta.len() != cb.m() {
        return Err(RspError::DimensionMismatch("one split size and one theta per constraint".into()));
    }
    let dims = cb.block_dims();
    let omega_dim: usize = dims.iter().zip(splits).map(|(&d, &s)| d * (s - 1)).sum();
    let dim = cb.n + omega_dim;
    let apply = |v: &[T]| -> Vec<T> {
        let (vx, vw) = v.split_at(cb.n);
        // x-rows of Q̄ᵀ·v: blocks for u_{i,l}
        let mut out_x = vec![T::zero(); cb.n];
        let mut out_w = vec![T::zero(); omega_dim];
        let mut woff = 0;
        for (i, q) in cb.qt.iter().enumerate() {
            let d = dims[i];
            let s = splits[i];
            // y-block u_{i,s} = Q̃ᵢᵀvx − Σₗ v_{ω,l}; u_{i,l} = v_{ω,l}
            let mut ys = q.tmatvec(vx);
            for l in 0..s - 1 {
                let om = &vw[woff + l * d..woff + (l + 1) * d];
                ys.iter_mut().zip(om).for_each(|(a, &b)| *a -= b);
            }
            let th = cfg.theta[i];
            ys.iter_mut().for_each(|a| *a *= th);
            let qx = q.matvec(&ys);
            out_x.iter_mut().zip(&qx).for_each(|(a, &b)| *a += b);
            for l in 0..s - 1 {
                let om = &vw[woff + l * d..woff + (l + 1) * d];
                for j in 0..d {
                    out_w[woff + l * d + j] = th * om[j] - ys[j];
                }
            }
            woff += d * (s - 1);
        }
        if cb.r() > 0 {
            let av = cb.a.matvec(vx);
            let back = cb.a.tmatvec(&av);
            out_x.iter_mut().zip(&back).for_each(|(a, &b)| *a += cfg.theta_w * b);
        }
        out_x.iter_mut().zip(vx).for_each(|(a, &b)| *a += cfg.theta_pi * b);
        out_x.extend(out_w);
        out_x.iter().map(|&a| a * cfg.tau).collect()
    };
    let lam = power_lambda_max(dim, apply);
    Ok(lam / cfg.tau)
}

/// True iff H = S − τQ̄ᵀQ̄ has λ_max(τS^{-1/2}Q̄ᵀQ̄S^{-1/2}) ≤ 1 − margin.
pub fn validate_steps<T: Real>(compiled: &CompiledBiaffine<T>, cfg: &PapcConfig<T>) -> bool {
    validate_steps_split(compiled, &vec![1; compiled.m()], cfg)
}

pub fn validate_steps_split<T: Real>(compiled: &CompiledBiaffine<T>, splits: &[usize], cfg: &PapcConfig<T>) -> bool {
    let pos = |v: T| v > T::zero() && v.is_finite();
    if !pos(cfg.tau) || !pos(cfg.theta_w) || !pos(cfg.theta_pi) || !cfg.theta.iter().all(|&t| pos(t)) {
        return false;
    }
    match step_operator_norm(compiled, splits, cfg) {
        Ok(l) => cfg.tau * l <= (T::one() - cfg.margin) * (T::one() + T::lit(1e-12)),
        Err(_) => false,
    }
}

/// Start point: x, one u per constraint (copied to every split block), w, π.
#[derive(Debug, Clone, PartialEq)]
pub struct PapcStart<T> {
    pub x: Vec<T>,
    pub u: Vec<LiftedVar<T>>,
    pub w: Vec<T>,
    pub pi: Vec<T>,
}

impl<T: Real> PapcStart<T> {
    pub fn zeros(cb: &CompiledBiaffine<T>) -> Self {
        PapcStart {
            x: vec![T::zero(); cb.n],
            u: cb.qt.iter().map(|q| LiftedVar::zeros(q.cols - 1)).collect(),
            w: vec![T::zero(); cb.r()],
            pi: vec![T::zero(); cb.n],
        }
    }
}

/// PAPC on L̃ over ℝⁿ × (U × ℝʳ × ℝⁿ), with uncapped cones.
pub fn papc_run<T: Real>(p: &RobustProblem<T>, cfg: &PapcConfig<T>, start: &PapcStart<T>) -> Result<IterTrace<T>> {
    let lp = LiftedProblem::trivial(p)?;
    papc_run_split(&lp, cfg, start)
}

/// PAPC on Ľ: predictor on (x, ω), dual step on (ũ, w, π), corrector on (x, ω).
pub fn papc_run_split<T: Real>(lp: &LiftedProblem<T>, cfg: &PapcConfig<T>, start: &PapcStart<T>) -> Result<IterTrace<T>> {
    let p = &lp.base;
    let cb = compile_biaffine(p)?;
    let (n, m, r) = (cb.n, cb.m(), cb.r());
    if cfg.n_iters == 0 || cfg.checkpoint_every == 0 {
        return Err(RspError::InvalidSteps("n_iters and checkpoint_every must be positive".into()));
    }
    let splits: Vec<usize> = (0..m).map(|i| lp.s(i)).collect();
    if !validate_steps_split(&cb, &splits, cfg) {
        return Err(RspError::InvalidSteps("H = S - tau Qbar^T Qbar is not positive semidefinite with the requested margin".into()));
    }
    if start.x.len() != n || start.u.len() != m || start.w.len() != r || start.pi.len() != n {
        return Err(RspError::DimensionMismatch("start state does not match the problem".into()));
    }
    if p.domain.normalized().is_intersection() {
        return Err(RspError::UnsupportedSet("intersection domain: lift it first".into()));
    }
    let tol = T::lit(1e-12);
    let cones: Vec<Vec<ConeLiftSpec<T>>> =
        lp.factors.iter().map(|fs| fs.iter().map(|f| ConeLiftSpec::uncapped(f.clone())).collect()).collect();
    let dims = cb.block_dims();

    let mut x = start.x.clone();
    let mut u: Vec<Vec<Vec<T>>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut blocks = Vec::with_capacity(splits[i]);
        for cone in &cones[i] {
            blocks.push(project_cone_lift(cone, &start.u[i], tol)?.to_vec());
        }
        u.push(blocks);
    }
    let mut omega: Vec<Vec<Vec<T>>> = (0..m).map(|i| vec![vec![T::zero(); dims[i]]; splits[i] - 1]).collect();
    let mut w = start.w.clone();
    let mut pi = start.pi.clone();

    // c + Σ Q̃ᵢuᵢₛ + Aᵀw + π
    let x_grad = |u: &[Vec<Vec<T>>], w: &[T], pi: &[T]| -> Vec<T> {
        let mut g = cb.c.clone();
        for (i, q) in cb.qt.iter().enumerate() {
            let v = q.matvec(u[i].last().unwrap());
            g.iter_mut().zip(&v).for_each(|(a, &b)| *a += b);
        }
        if r > 0 {
            let v = cb.a.tmatvec(w);
            g.iter_mut().zip(&v).for_each(|(a, &b)| *a += b);
        }
        g.iter_mut().zip(pi).for_each(|(a, &b)| *a += b);
        g
    };

    let mut erg_x = Ergodic::new(n);
    let mut erg_u: Vec<Ergodic<T>> = dims.iter().map(|&d| Ergodic::new(d)).collect();
    let mut erg_w = Ergodic::new(r);
    let mut trace = IterTrace::empty(RunStatus::Completed);
    trace.start = Some(StartSummary {
        x0: x.clone(),
        lambda0: u.iter().map(|b| *b.last().unwrap().last().unwrap()).collect(),
        w0_norm: norm(&w),
        pi0_norm: norm(&pi),
    });
    let clock = Instant::now();
    let tau = cfg.tau;

    for k in 1..=cfg.n_iters {
        // predictor
        let g = x_grad(&u, &w, &pi);
        let px: Vec<T> = x.iter().zip(&g).map(|(&a, &b)| a - tau * b).collect();
        let pw: Vec<Vec<Vec<T>>> = (0..m)
            .map(|i| {
                let us = u[i].last().unwrap();
                (0..splits[i] - 1)
                    .map(|l| omega[i][l].iter().zip(u[i][l].iter().zip(us)).map(|(&o, (&a, &b))| o - tau * (a - b)).collect())
                    .collect()
            })
            .collect();
        // dual update
        for i in 0..m {
            let th = cfg.theta[i];
            let s = splits[i];
            for l in 0..s - 1 {
                let moved: Vec<T> = u[i][l].iter().zip(&pw[i][l]).map(|(&a, &b)| a + th * b).collect();
                u[i][l] = project_cone_lift(&cones[i][l], &LiftedVar::from_slice(&moved), tol)?.to_vec();
            }
            let mut dir = cb.qt[i].tmatvec(&px);
            dir.iter_mut().zip(&cb.qtv[i]).for_each(|(a, &b)| *a += b);
            for l in 0..s - 1 {
                dir.iter_mut().zip(&pw[i][l]).for_each(|(a, &b)| *a -= b);
            }
            let moved: Vec<T> = u[i][s - 1].iter().zip(&dir).map(|(&a, &b)| a + th * b).collect();
            u[i][s - 1] = project_cone_lift(&cones[i][s - 1], &LiftedVar::from_slice(&moved), tol)?.to_vec();
        }
        if r > 0 {
            let res: Vec<T> = cb.a.matvec(&px).iter().zip(&cb.b).map(|(&a, &b)| a - b).collect();
            w.iter_mut().zip(&res).for_each(|(a, &b)| *a += cfg.theta_w * b);
        }
        let shifted: Vec<T> = pi.iter().zip(&px).map(|(&a, &b)| a + cfg.theta_pi * b).collect();
        pi = prox_support(&p.domain, cfg.theta_pi, &shifted)?;
        // corrector
        let g = x_grad(&u, &w, &pi);
        x.iter_mut().zip(&g).for_each(|(a, &b)| *a -= tau * b);
        for i in 0..m {
            let s = splits[i];
            for l in 0..s - 1 {
                for j in 0..dims[i] {
                    omega[i][l][j] -= tau * (u[i][l][j] - u[i][s - 1][j]);
                }
            }
        }

        erg_x.add(&x, T::one());
        for i in 0..m {
            erg_u[i].add(u[i].last().unwrap(), T::one());
        }
        if r > 0 {
            erg_w.add(&w, T::one());
        }

        let out_of_time = cfg.time_budget.map_or(false, |b| clock.elapsed().as_secs_f64() > b);
        if k % cfg.checkpoint_every == 0 || k == cfg.n_iters || out_of_time {
            let xb = erg_x.mean();
            trace.records.push(CheckpointRecord {
                iter: k as u64,
                elapsed_s: clock.elapsed().as_secs_f64(),
                obj: p.objective(&xb).to_f64_lossy(),
                feas_gap: checkpoint_feas(p, &xb)?.to_f64_lossy(),
                ogr: f64::NAN,
                cert_bound: f64::NAN,
            });
            trace.checkpoint_x.push(xb);
        }
        trace.iterations = k;
        if out_of_time && k < cfg.n_iters {
            trace.status = RunStatus::TimeBudgetExceeded;
            break;
        }
    }
    trace.x_bar = erg_x.mean();
    trace.u_bar = erg_u.iter().map(|e| LiftedVar::from_slice(&e.mean())).collect();
    trace.w_bar = erg_w.mean();
    trace.dual_residual = Some(norm(&x_grad(&u, &w, &pi)));
    trace.x_last = x;
    trace.steps = Some(ConstantSteps { tau, theta: cfg.theta.clone(), theta_w: cfg.theta_w, theta_pi: Some(cfg.theta_pi) });
    Ok(trace)
}

/// Right-hand sides (feasibility incl. dist to X, optimality) after k
/// iterations, from the ergodic bound of the predictor-corrector scheme with
/// ψ(k) = 1/(2k), φ = max{2/θ_π, 2‖π⁰‖²/θ_π} and β = R_π.
pub fn papc_bounds<T: Real>(
    p: &RobustProblem<T>,
    bounds: &DualBounds<T>,
    steps: &ConstantSteps<T>,
    start: &StartSummary<T>,
    x_star: &[T],
    k: usize,
) -> Result<(T, T)> {
    let r_pi = bounds.r_pi.ok_or_else(|| RspError::InvalidSteps("R_pi bound is required".into()))?;
    let theta_pi = steps.theta_pi.ok_or_else(|| RspError::InvalidSteps("theta_pi missing".into()))?;
    let two = T::lit(2.0);
    let radii = uncertainty_radii(p);
    let dx: T = norm_sq(&x_star.iter().zip(&start.x0).map(|(&a, &b)| a - b).collect::<Vec<_>>());
    let mut d_feas = dx / steps.tau;
    let mut d_opt = d_feas;
    for (i, &th) in steps.theta.iter().enumerate() {
        let sigma = T::one() + T::lit(4.0) * radii[i] * radii[i];
        let l0 = start.lambda0[i];
        d_feas += two * sigma * (bounds.lambda_bar + T::one()).max(l0).powi(2) / th;
        d_opt += two * sigma * (two * bounds.lambda_bar).max(l0).powi(2) / th;
    }
    if p.r() > 0 {
        d_feas += two * (bounds.r_w + T::one()).max(start.w0_norm).powi(2) / steps.theta_w;
        d_opt += two * (two * bounds.r_w).max(start.w0_norm).powi(2) / steps.theta_w;
    }
    let phi = (two / theta_pi).max(two * start.pi0_norm.powi(2) / theta_pi);
    d_feas += phi * (T::one() + (T::one() + r_pi).powi(2));
    d_opt += phi * (T::one() + T::lit(4.0) * r_pi * r_pi);
    let psi = T::one() / (two * T::lit(k as f64));
    Ok((psi * d_feas, psi * d_opt))
}

/// Checks Σ[fᵢ(x̄)]₊ + ‖Ax̄ − b‖ + dist(x̄, X) and |cᵀ(x̄ − x*)| against
/// [`papc_bounds`] at every checkpoint, for a known optimal x*.
pub fn papc_certify<T: Real>(
    trace: &IterTrace<T>,
    p: &RobustProblem<T>,
    bounds: &DualBounds<T>,
    x_star: &[T],
) -> Result<Certificate<T>> {
    let steps = trace.steps.as_ref().ok_or_else(|| RspError::InvalidSteps("trace has no steps".into()))?;
    let start = trace.start.as_ref().ok_or_else(|| RspError::InvalidSteps("trace has no start summary".into()))?;
    if steps.theta.len() != p.m() || trace.x_bar.len() != p.n() {
        return Err(RspError::UnsupportedSet("certificates are available for unsplit runs only".into()));
    }
    let opt = p.objective(x_star);
    let mut rows = Vec::with_capacity(trace.records.len());
    for (rec, xb) in trace.records.iter().zip(&trace.checkpoint_x) {
        let mut feas = T::zero();
        for (i, c) in p.constraints.iter().enumerate() {
            feas += c.pessimize(xb, i)?.1.max(T::zero());
        }
        feas += norm(&p.eq_residual(xb)) + p.domain.dist(xb)?;
        let (bf, bo) = papc_bounds(p, bounds, steps, start, x_star, rec.iter as usize)?;
        let mo = (p.objective(xb) - opt).abs();
        rows.push(CertificateRow {
            iter: rec.iter as usize,
            measured_feas: feas,
            bound_feas: bf,
            measured_opt: Some(mo),
            bound_opt: bo,
            holds: feas <= bf && mo <= bo,
        });
    }
    Ok(Certificate::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Constraint;
    use crate::sets::SetDescriptor;

    #[test]
    fn layout() {
        let c: Constraint<f64> = Constraint::biaffine(
            Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]),
            vec![5.0, 6.0],
            vec![7.0, 8.0],
            9.0,
            SetDescriptor::l2(1.0),
        );
        let p = RobustProblem::new(vec![0.0, 0.0], SetDescriptor::<f64>::l2(1.0), vec![c]);
        let cb = compile_biaffine(&p).unwrap();
        assert_eq!(cb.qt[0].to_rows(), vec![vec![1.0, 2.0, 5.0], vec![3.0, 4.0, 6.0]]);
        assert_eq!(cb.qtv[0], vec![7.0, 8.0, 9.0]);
    }

    #[test]
    fn scalar_step_check() {
        let p = RobustProblem::<f64>::new(vec![0.0], SetDescriptor::l2(1.0), vec![]);
        let cb = compile_biaffine(&p).unwrap();
        let mut cfg = PapcConfig {
            tau: 1.0,
            theta: vec![],
            theta_w: 1.0,
            theta_pi: 1.0,
            n_iters: 1,
            checkpoint_every: 1,
            margin: 0.0,
            time_budget: None,
        };
        assert!(validate_steps(&cb, &cfg));
        cfg.tau = 2.0;
        assert!(!validate_steps(&cb, &cfg));
    }

    #[test]
    fn scalar_toy() {
        // min −x s.t. xz − 0.5 ≤ 0 ∀|z| ≤ 1, X = [−1, 1]
        let c: Constraint<f64> =
            Constraint::biaffine(Matrix::from_rows(&[vec![1.0]]), vec![0.0], vec![0.0], -0.5, SetDescriptor::interval(-1.0, 1.0));
        let p = RobustProblem::new(vec![-1.0], SetDescriptor::<f64>::interval(-1.0, 1.0), vec![c]);
        let cb = compile_biaffine(&p).unwrap();
        let cfg = PapcConfig::default_for(&cb, &[1], 10_000, 1e-6).unwrap();
        let tr = papc_run(&p, &cfg, &PapcStart::zeros(&cb)).unwrap();
        assert!((tr.x_bar[0] - 0.5).abs() <= 1e-3, "{:?}", tr.x_bar);
    }
}
