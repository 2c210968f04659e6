//! Subgradient saddle-point method on the lifted Lagrangian, in plain and
//! split form, plus Slater point search and the a-posteriori certificate.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cone::{project_cone_lift, project_omega, ConeLiftSpec, LiftedVar, OmegaSpec};
use crate::error::{Result, RspError};
use crate::linalg::{norm, norm_sq, op_norm};
use crate::perspective::{certificate_at, perspective_subgrad, uncertainty_radii, DualBounds, SlaterCertificate};
use crate::problem::{Constraint, RobustProblem};
use crate::scalar::Real;
use crate::sets::{sample_point, SetDescriptor};
use crate::split::LiftedProblem;
use crate::trace::{
    Averaging, CheckpointRecord, ConstantSteps, Ergodic, IterTrace, ObservedNorms, RunStatus, StartSummary,
};

#[derive(Debug, Clone, PartialEq)]
pub enum StepPolicy<T> {
    /// τ = τ̃/√N, θᵢ = θ̃ᵢ/√N, θ_w = θ̃_w/√N.
    TheoremScaled { tau: T, theta: Vec<T>, theta_w: T },
    /// base/(‖subgradient block‖·√k), per block.
    AdaptiveNormalized { base: T },
}

impl<T: Real> StepPolicy<T> {
    pub fn theorem_unit(m: usize) -> Self {
        StepPolicy::TheoremScaled { tau: T::one(), theta: vec![T::one(); m], theta_w: T::one() }
    }

    /// Dual-fast constants (τ̃ = 1, θ̃ = 100). Balanced steps make the
    /// iterates orbit bilinear saddles and the ergodic error depends on the
    /// phase at N; a fast dual damps this and approaches from the feasible side.
    pub fn theorem_default(m: usize) -> Self {
        let hundred = T::lit(100.0);
        StepPolicy::TheoremScaled { tau: T::one(), theta: vec![hundred; m], theta_w: hundred }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgspConfig<T> {
    pub n_iters: usize,
    pub step_policy: StepPolicy<T>,
    pub averaging: Averaging,
    pub checkpoint_every: usize,
    /// Wall-clock budget in seconds.
    pub time_budget: Option<f64>,
}

impl<T: Real> SgspConfig<T> {
    pub fn new(n_iters: usize, step_policy: StepPolicy<T>) -> Self {
        SgspConfig {
            n_iters,
            step_policy,
            averaging: Averaging::Uniform,
            checkpoint_every: (n_iters / 100).max(1),
            time_budget: None,
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if self.n_iters == 0 {
            return Err(RspError::InvalidSteps("n_iters must be at least 1".into()));
        }
        let pos = |v: T| v > T::zero() && v.is_finite();
        match &self.step_policy {
            StepPolicy::TheoremScaled { tau, theta, theta_w } => {
                if theta.len() != m {
                    return Err(RspError::InvalidSteps(format!("{} theta values for {m} constraints", theta.len())));
                }
                if !pos(*tau) || !pos(*theta_w) || !theta.iter().all(|&t| pos(t)) {
                    return Err(RspError::InvalidSteps("step constants must be positive".into()));
                }
            }
            StepPolicy::AdaptiveNormalized { base } => {
                if !pos(*base) {
                    return Err(RspError::InvalidSteps("adaptive base must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

/// Starting point (x, u, w).
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleState<T> {
    pub x: Vec<T>,
    pub u: Vec<LiftedVar<T>>,
    pub w: Vec<T>,
}

impl<T: Real> SaddleState<T> {
    /// x0 with zero multipliers.
    pub fn at(p: &RobustProblem<T>, x0: Vec<T>) -> Self {
        SaddleState { x: x0, u: p.constraints.iter().map(|c| LiftedVar::zeros(c.z_dim())).collect(), w: vec![T::zero(); p.r()] }
    }
}

/// Constants of the O(1/√N) bound: subgradient norms and φ = τ̃G_x² + Σθ̃ᵢGᵢ² + θ̃_wG_w².
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConstants<T> {
    pub g_x: T,
    pub g_i: Vec<T>,
    pub g_w: T,
    pub phi: T,
    /// 1 + 4Rᵢ².
    pub sigma_i: Vec<T>,
}

/// Measured feasibility (and optimality error when a reference value is
/// known) against the bound, per checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRow<T> {
    pub iter: usize,
    pub measured_feas: T,
    pub bound_feas: T,
    pub measured_opt: Option<T>,
    pub bound_opt: T,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<T> {
    pub rows: Vec<CertificateRow<T>>,
    pub holds: bool,
}

impl<T: Real> Certificate<T> {
    pub fn from_rows(rows: Vec<CertificateRow<T>>) -> Self {
        let holds = rows.iter().all(|r| r.holds);
        Certificate { rows, holds }
    }

    /// Copies bound_feas into the trace's cert_bound column.
    pub fn attach(&self, trace: &mut IterTrace<T>) {
        for (rec, row) in trace.records.iter_mut().zip(&self.rows) {
            rec.cert_bound = row.bound_feas.to_f64_lossy();
        }
    }
}

fn project_ball<T: Real>(w: &mut [T], radius: T) {
    let n = norm(w);
    if n > radius {
        let s = radius / n;
        w.iter_mut().for_each(|v| *v *= s);
    }
}

/// Σ[fᵢ(x)]₊ + ‖Ax − b‖ + dist(x, X); NaN when some fᵢ cannot be pessimized.
pub(crate) fn checkpoint_feas<T: Real>(p: &RobustProblem<T>, x: &[T]) -> Result<T> {
    let mut s = T::zero();
    for (i, c) in p.constraints.iter().enumerate() {
        match c.pessimize(x, i) {
            Ok((_, v)) => s += v.max(T::zero()),
            Err(RspError::RequiresPessimizer(_)) | Err(RspError::UnsupportedSet(_)) => return Ok(T::nan()),
            Err(e) => return Err(e),
        }
    }
    s += norm(&p.eq_residual(x));
    let d = if p.domain.is_intersection() {
        crate::sets::project_intersection(&p.domain, x, T::lit(1e-12), 10_000).map(|q| crate::linalg::dist(&q, x))?
    } else {
        p.domain.dist(x)?
    };
    Ok(s + d)
}

fn step_size<T: Real>(base: T, gnorm: T, k: usize) -> T {
    let sk = T::lit(k as f64).sqrt();
    if gnorm > T::zero() {
        base / (gnorm * sk)
    } else {
        base / sk
    }
}

struct Engine<'a, T: Real> {
    lp: &'a LiftedProblem<T>,
    cones: Vec<Vec<ConeLiftSpec<T>>>,
    omega_specs: &'a [Vec<OmegaSpec<T>>],
    w_radius: T,
}

impl<'a, T: Real> Engine<'a, T> {
    fn p(&self) -> &RobustProblem<T> {
        &self.lp.base
    }
}

/// Flattened ω for constraint i: list of (ν, μ).
type Omega<T> = Vec<Vec<(Vec<T>, T)>>;

fn run_engine<T: Real>(
    eng: &Engine<'_, T>,
    cfg: &SgspConfig<T>,
    start: &SaddleState<T>,
    bounds: &DualBounds<T>,
) -> Result<IterTrace<T>> {
    let p = eng.p();
    let (n, m, r) = (p.n(), p.m(), p.r());
    cfg.validate(m)?;
    if start.x.len() != n || start.u.len() != m || start.w.len() != r {
        return Err(RspError::DimensionMismatch("start state does not match the problem".into()));
    }
    let tol = T::lit(1e-12);
    let mut x = p.domain.project(&start.x)?;
    let mut u: Vec<Vec<LiftedVar<T>>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut blocks = Vec::with_capacity(eng.cones[i].len());
        for cone in &eng.cones[i] {
            blocks.push(project_cone_lift(cone, &start.u[i], tol)?);
        }
        u.push(blocks);
    }
    let mut omega: Omega<T> = eng
        .omega_specs
        .iter()
        .zip(p.constraints.iter())
        .map(|(specs, c)| specs.iter().map(|_| (vec![T::zero(); c.z_dim()], T::zero())).collect())
        .collect();
    let mut w = start.w.clone();
    if r > 0 {
        project_ball(&mut w, eng.w_radius);
    }

    let sqrt_n = T::lit(cfg.n_iters as f64).sqrt();
    let constant = match &cfg.step_policy {
        StepPolicy::TheoremScaled { tau, theta, theta_w } => Some(ConstantSteps {
            tau: *tau / sqrt_n,
            theta: theta.iter().map(|&t| t / sqrt_n).collect(),
            theta_w: *theta_w / sqrt_n,
            theta_pi: None,
        }),
        StepPolicy::AdaptiveNormalized { .. } => None,
    };

    let mut erg_x = Ergodic::new(n);
    let mut erg_u: Vec<Ergodic<T>> = p.constraints.iter().map(|c| Ergodic::new(c.z_dim() + 1)).collect();
    let mut erg_w = Ergodic::new(r);
    let mut obs = ObservedNorms { g_x: T::zero(), g_u: vec![T::zero(); m], g_w: T::zero() };
    let mut trace = IterTrace::empty(RunStatus::Completed);
    trace.start = Some(StartSummary {
        x0: x.clone(),
        lambda0: u.iter().map(|b| b.last().unwrap().lambda).collect(),
        w0_norm: norm(&w),
        pi0_norm: T::zero(),
    });
    let clock = Instant::now();

    let mut vu: Vec<Vec<Vec<T>>> = u.iter().map(|b| b.iter().map(|v| vec![T::zero(); v.dim() + 1]).collect()).collect();
    for k in 1..=cfg.n_iters {
        // subgradients at the current point
        let mut vx = p.c.clone();
        for (i, c) in p.constraints.iter().enumerate() {
            let s = u[i].len();
            let (dx, du) = perspective_subgrad(c, &x, &u[i][s - 1])?;
            vx.iter_mut().zip(&dx).for_each(|(a, &b)| *a += b);
            let mut last = du;
            for (l, (nu, mu)) in omega[i].iter().enumerate() {
                let d = last.len() - 1;
                for j in 0..d {
                    last[j] += nu[j];
                    vu[i][l][j] = -nu[j];
                }
                last[d] += *mu;
                vu[i][l][d] = -*mu;
            }
            vu[i][s - 1] = last;
        }
        let gw: Vec<T> = if r > 0 { p.eq_residual(&x) } else { Vec::new() };
        if r > 0 {
            let aw = p.eq_a.tmatvec(&w);
            vx.iter_mut().zip(&aw).for_each(|(a, &b)| *a += b);
        }
        let mut vomega_sq = T::zero();
        for i in 0..m {
            let s = u[i].len();
            for l in 0..s - 1 {
                vomega_sq += norm_sq(&u[i][l].to_vec().iter().zip(u[i][s - 1].to_vec()).map(|(&a, b)| a - b).collect::<Vec<_>>());
            }
        }
        let gx_norm = (norm_sq(&vx) + vomega_sq).sqrt();
        let gu_norm: Vec<T> = vu.iter().map(|b| b.iter().map(|v| norm_sq(v)).sum::<T>().sqrt()).collect();
        let gw_norm = norm(&gw);
        obs.g_x = obs.g_x.max(gx_norm);
        obs.g_w = obs.g_w.max(gw_norm);
        for i in 0..m {
            obs.g_u[i] = obs.g_u[i].max(gu_norm[i]);
        }

        let (tau, theta, theta_w): (T, Vec<T>, T) = match (&cfg.step_policy, &constant) {
            (_, Some(cs)) => (cs.tau, cs.theta.clone(), cs.theta_w),
            (StepPolicy::AdaptiveNormalized { base }, None) => (
                step_size(*base, gx_norm, k),
                gu_norm.iter().map(|&g| step_size(*base, g, k)).collect(),
                step_size(*base, gw_norm, k),
            ),
            _ => unreachable!(),
        };

        // ergodic sums of the evaluation points
        let wt = |s: T| match cfg.averaging {
            Averaging::Uniform => T::one(),
            Averaging::StepWeighted => s,
        };
        erg_x.add(&x, wt(tau));
        for i in 0..m {
            erg_u[i].add(&u[i].last().unwrap().to_vec(), wt(theta[i]));
        }
        if r > 0 {
            erg_w.add(&w, wt(theta_w));
        }

        // updates, all from the previous state
        let mut new_omega = omega.clone();
        for i in 0..m {
            let s = u[i].len();
            for l in 0..s - 1 {
                let (nu, mu) = &omega[i][l];
                let d = nu.len();
                let ul = &u[i][l];
                let us = &u[i][s - 1];
                let nu2: Vec<T> = (0..d).map(|j| nu[j] - tau * (ul.z_tilde[j] - us.z_tilde[j])).collect();
                let mu2 = *mu - tau * (ul.lambda - us.lambda);
                new_omega[i][l] = project_omega(&eng.omega_specs[i][l], &nu2, mu2, tol)?;
            }
        }
        let y: Vec<T> = x.iter().zip(&vx).map(|(&a, &b)| a - tau * b).collect();
        x = p.domain.project(&y)?;
        for i in 0..m {
            for l in 0..u[i].len() {
                let v = &vu[i][l];
                let cur = u[i][l].to_vec();
                let moved: Vec<T> = cur.iter().zip(v).map(|(&a, &b)| a - theta[i] * b).collect();
                u[i][l] = project_cone_lift(&eng.cones[i][l], &LiftedVar::from_slice(&moved), tol)?;
            }
        }
        if r > 0 {
            w.iter_mut().zip(&gw).for_each(|(a, &b)| *a += theta_w * b);
            project_ball(&mut w, eng.w_radius);
        }
        omega = new_omega;

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
    trace.x_last = x;
    trace.steps = constant;
    trace.observed = Some(obs);
    let _ = bounds;
    Ok(trace)
}

fn cones_for<T: Real>(lp: &LiftedProblem<T>, cap: T) -> Vec<Vec<ConeLiftSpec<T>>> {
    lp.factors.iter().map(|fs| fs.iter().map(|f| ConeLiftSpec::capped(f.clone(), cap)).collect()).collect()
}

/// SGSP on L̄ over X × Ũ × W, with Ũⁱ capped at λ̄ and W the ball of radius R_w + 1.
pub fn sgsp_run<T: Real>(
    p: &RobustProblem<T>,
    bounds: &DualBounds<T>,
    cfg: &SgspConfig<T>,
    start: &SaddleState<T>,
) -> Result<IterTrace<T>> {
    let lp = LiftedProblem::trivial(p)?;
    let omega: Vec<Vec<OmegaSpec<T>>> = vec![Vec::new(); p.m()];
    sgsp_run_split(&lp, bounds, &omega, cfg, start)
}

/// SGSP on L̆: ω-steps ωᵢₗ ← P_Ω(ωᵢₗ − τ(uᵢₗ − uᵢₛ)) and the coupled u-steps.
/// The trace's u_bar holds the ergodic uᵢ,ₛᵢ, so λ̄ᵢ = λ̄ᵢ,ₛᵢ.
pub fn sgsp_run_split<T: Real>(
    lp: &LiftedProblem<T>,
    bounds: &DualBounds<T>,
    omega_specs: &[Vec<OmegaSpec<T>>],
    cfg: &SgspConfig<T>,
    start: &SaddleState<T>,
) -> Result<IterTrace<T>> {
    let m = lp.base.m();
    if omega_specs.len() != m || (0..m).any(|i| omega_specs[i].len() + 1 != lp.s(i)) {
        return Err(RspError::DimensionMismatch("one omega spec per extra split block".into()));
    }
    if lp.base.domain.normalized().is_intersection() {
        return Err(RspError::UnsupportedSet("intersection domain: lift it first".into()));
    }
    let cap = if m == 0 { T::zero() } else { bounds.lambda_bar };
    if !(cap >= T::zero()) {
        return Err(RspError::InvalidSteps("lambda_bar must be nonnegative".into()));
    }
    let eng = Engine { lp, cones: cones_for(lp, cap), omega_specs, w_radius: bounds.r_w + T::one() };
    run_engine(&eng, cfg, start, bounds)
}

/// Samples x ∈ X, uᵢ ∈ Ũⁱ, w ∈ W and records the largest subgradient norms.
pub fn estimate_constants<T: Real>(
    p: &RobustProblem<T>,
    bounds: &DualBounds<T>,
    policy: &StepPolicy<T>,
    samples: usize,
    seed: u64,
) -> Result<ConvergenceConstants<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, m, r) = (p.n(), p.m(), p.r());
    let mut g_x = T::zero();
    let mut g_i = vec![T::zero(); m];
    let w_rad = bounds.r_w + T::one();
    for _ in 0..samples.max(1) {
        let x = sample_point(&p.domain, n, &mut rng)?;
        let mut vx = p.c.clone();
        for (i, c) in p.constraints.iter().enumerate() {
            let lam = T::lit(rand::Rng::gen_range(&mut rng, 0.0..=1.0)) * bounds.lambda_bar;
            let z = sample_point(&c.zset, c.z_dim(), &mut rng)?;
            let u = LiftedVar::new(z.iter().map(|&v| lam * v).collect(), lam);
            let (dx, du) = perspective_subgrad(c, &x, &u)?;
            vx.iter_mut().zip(&dx).for_each(|(a, &b)| *a += b);
            g_i[i] = g_i[i].max(norm(&du));
        }
        if r > 0 {
            let mut w: Vec<T> = (0..r).map(|_| T::lit(rand::Rng::gen_range(&mut rng, -1.0..1.0))).collect();
            let wn = norm(&w);
            if wn > T::zero() {
                let s = w_rad * T::lit(rand::Rng::gen_range(&mut rng, 0.0..=1.0)) / wn;
                w.iter_mut().for_each(|v| *v *= s);
            }
            let aw = p.eq_a.tmatvec(&w);
            vx.iter_mut().zip(&aw).for_each(|(a, &b)| *a += b);
        }
        g_x = g_x.max(norm(&vx));
    }
    let g_w = if r > 0 { op_norm(&p.eq_a) * p.domain_radius() + norm(&p.eq_b) } else { T::zero() };
    let phi = match policy {
        StepPolicy::TheoremScaled { tau, theta, theta_w } => {
            *tau * g_x * g_x + theta.iter().zip(&g_i).map(|(&t, &g)| t * g * g).sum::<T>() + *theta_w * g_w * g_w
        }
        StepPolicy::AdaptiveNormalized { .. } => T::zero(),
    };
    let sigma_i = uncertainty_radii(p).iter().map(|&r| T::one() + T::lit(4.0) * r * r).collect();
    Ok(ConvergenceConstants { g_x, g_i, g_w, phi, sigma_i })
}

/// Right-hand sides of the O(1/√N) bound (feasibility, optimality) after k of N
/// iterations with steps τ = τ̃/√N etc. At k = N this is the bound for the full run.
#[allow(clippy::too_many_arguments)]
pub fn theorem1_bounds<T: Real>(
    consts: &ConvergenceConstants<T>,
    bounds: &DualBounds<T>,
    steps: &ConstantSteps<T>,
    start: &StartSummary<T>,
    r_x: T,
    has_eq: bool,
    k: usize,
) -> (T, T) {
    let two = T::lit(2.0);
    let c_r = consts.sigma_i.iter().fold(two, |a, &b| a.max(b));
    let x0sq = norm_sq(&start.x0);
    let mut d_feas = two * x0sq.max(r_x * r_x) / steps.tau;
    let mut d_opt = d_feas;
    for (i, &th) in steps.theta.iter().enumerate() {
        let l0 = start.lambda0[i];
        d_feas += (bounds.lambda_bar + T::one()).max(l0).powi(2) / th;
        d_opt += (two * bounds.lambda_bar).max(l0).powi(2) / th;
    }
    let mut phi = steps.tau * consts.g_x.powi(2);
    for (i, &th) in steps.theta.iter().enumerate() {
        phi += th * consts.g_i[i].powi(2);
    }
    if has_eq {
        d_feas += (bounds.r_w + T::one()).max(start.w0_norm).powi(2) / steps.theta_w;
        d_opt += (two * bounds.r_w).max(start.w0_norm).powi(2) / steps.theta_w;
        phi += steps.theta_w * consts.g_w.powi(2);
    }
    let kk = T::lit(k as f64);
    let half = c_r / two;
    (half * (d_feas / kk + phi), half * (d_opt / kk + phi))
}

/// Checks the O(1/√N) feasibility and optimality bounds at every checkpoint. Subgradient bounds
/// are the larger of the sampled constants and the norms observed in the run.
pub fn certify<T: Real>(
    trace: &IterTrace<T>,
    p: &RobustProblem<T>,
    bounds: &DualBounds<T>,
    consts: &ConvergenceConstants<T>,
    reference_opt: Option<T>,
) -> Result<Certificate<T>> {
    let steps = trace
        .steps
        .as_ref()
        .ok_or_else(|| RspError::InvalidSteps("certificates need the TheoremScaled policy".into()))?;
    let start = trace.start.as_ref().ok_or_else(|| RspError::InvalidSteps("trace has no start summary".into()))?;
    if steps.theta.len() != p.m() || trace.x_bar.len() != p.n() {
        return Err(RspError::UnsupportedSet("certificates are available for unsplit runs only".into()));
    }
    let mut merged = consts.clone();
    if let Some(o) = &trace.observed {
        merged.g_x = merged.g_x.max(o.g_x);
        merged.g_w = merged.g_w.max(o.g_w);
        for (g, &og) in merged.g_i.iter_mut().zip(&o.g_u) {
            *g = g.max(og);
        }
    }
    let r_x = p.domain_radius();
    let mut rows = Vec::with_capacity(trace.records.len());
    for (rec, xb) in trace.records.iter().zip(&trace.checkpoint_x) {
        let mut feas = T::zero();
        for (i, c) in p.constraints.iter().enumerate() {
            feas += c.pessimize(xb, i)?.1.max(T::zero());
        }
        feas += norm(&p.eq_residual(xb));
        let (bf, bo) = theorem1_bounds(&merged, bounds, steps, start, r_x, p.r() > 0, rec.iter as usize);
        let opt = reference_opt.map(|v| (p.objective(xb) - v).abs());
        let holds = feas <= bf && opt.map_or(true, |o| o <= bo);
        rows.push(CertificateRow { iter: rec.iter as usize, measured_feas: feas, bound_feas: bf, measured_opt: opt, bound_opt: bo, holds });
    }
    Ok(Certificate::from_rows(rows))
}

/// min t s.t. gᵢ(x, z) ≤ t, Ax = b, x ∈ X, t ∈ [−1, t̄], solved by SGSP with
/// doubling inner budgets until some ergodic x has maxᵢ fᵢ(x) < 0.
pub fn slater_search<T: Real>(p: &RobustProblem<T>, x0: &[T], delta: T, budget: usize) -> Result<SlaterCertificate<T>> {
    if !(delta > T::zero()) {
        return Err(RspError::InvalidSteps("delta must be positive".into()));
    }
    if !p.domain.contains(x0, T::lit(1e-9)) {
        return Err(RspError::InvalidSet("x0 must lie in X".into()));
    }
    let worst = |x: &[T]| -> Result<T> {
        Ok(p.constraint_values(x)?.iter().fold(T::neg_infinity(), |a, &b| a.max(b)))
    };
    let mut x = x0.to_vec();
    let mut t0 = worst(&x)?;
    if p.m() == 0 || t0 < T::zero() {
        return certificate_at(p, &x, None);
    }
    let n = p.n();
    let mut t_bar = t0 + delta;
    let mut k = 2usize;
    let mut used = 0usize;
    loop {
        if used + k > budget {
            return Err(RspError::BudgetExhausted(format!(
                "no strictly feasible point after {used} iterations (best max f = {})",
                t0.to_f64_lossy()
            )));
        }
        let aux = slater_aux(p, t_bar)?;
        let mut c_aux = vec![T::zero(); n + 1];
        c_aux[n] = T::one();
        // Slater point of the auxiliary problem: (x, t̄) with gᵢ − t̄ ≤ −δ.
        let lam = (t_bar + T::one() + delta) / delta;
        let r_w = if p.r() > 0 {
            let mut xs = x.clone();
            xs.push(t_bar - delta * T::lit(0.5));
            let cert = certificate_at(&aux, &xs, Some(-T::one() - delta))?;
            crate::perspective::dual_bounds(&aux, &cert, &uncertainty_radii(&aux))?.r_w
        } else {
            T::zero()
        };
        let bounds = DualBounds { lambda_bar: lam, r_w, r_u: vec![T::zero(); p.m()], r_pi: None };
        let mut xs = x.clone();
        xs.push(t_bar);
        let start = SaddleState::at(&aux, xs);
        let base = aux.domain_radius().max(T::one());
        let cfg = SgspConfig {
            n_iters: k,
            step_policy: StepPolicy::AdaptiveNormalized { base },
            averaging: Averaging::StepWeighted,
            checkpoint_every: k,
            time_budget: None,
        };
        let tr = sgsp_run(&aux, &bounds, &cfg, &start)?;
        used += k;
        let cand = tr.x_bar[..n].to_vec();
        let tk = worst(&cand)?;
        if tk < T::zero() {
            return certificate_at(p, &cand, None);
        }
        if tk < t0 {
            t0 = tk;
            x = cand;
        }
        t_bar = t_bar.min(t0 + delta);
        k *= 2;
    }
}

/// Auxiliary problem of the Slater search over X × [−1, t̄].
fn slater_aux<T: Real>(p: &RobustProblem<T>, t_bar: T) -> Result<RobustProblem<T>> {
    let n = p.n();
    let mut minus_t = vec![T::zero(); n + 1];
    minus_t[n] = -T::one();
    let cons: Vec<Constraint<T>> = p.constraints.iter().map(|c| c.embed(n + 1, 0).plus_linear(&minus_t)).collect();
    let mut c = vec![T::zero(); n + 1];
    c[n] = T::one();
    let domain = SetDescriptor::Product { blocks: vec![(n, p.domain.clone()), (1, SetDescriptor::interval(-T::one(), t_bar))] };
    let mut aux = RobustProblem::new(c, domain, cons);
    if p.r() > 0 {
        let a = crate::linalg::Matrix::from_fn(p.r(), n + 1, |i, j| if j < n { p.eq_a[(i, j)] } else { T::zero() });
        aux = aux.with_equalities(a, p.eq_b.clone());
    }
    Ok(aux)
}
