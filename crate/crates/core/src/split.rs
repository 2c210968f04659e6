//! Splitting for intersection sets: x copies for X = ∩Xⱼ, duplicated lifted
//! variables with ω multipliers for Zⁱ = ∩Zⁱˡ.

use crate::cone::{LiftedVar, OmegaSpec};
use crate::error::{Result, RspError};
use crate::linalg::{dot, norm, sigma_min, singular_values, Matrix};
use crate::perspective::perspective_value;
use crate::problem::{Constraint, RobustProblem};
use crate::scalar::Real;
use crate::sets::SetDescriptor;

#[derive(Debug, Clone)]
pub struct LiftedProblem<T> {
    /// Problem over the stacked copies (x₁, …, x_q). Constraints keep their
    /// original (possibly intersection) uncertainty sets for pessimization.
    pub base: RobustProblem<T>,
    /// Dimension of the original x.
    pub orig_n: usize,
    pub x_copies: usize,
    /// Simple factors Zⁱ¹ … Zⁱˢⁱ per constraint.
    pub factors: Vec<Vec<SetDescriptor<T>>>,
}

impl<T: Real> LiftedProblem<T> {
    /// sᵢ = 1 everywhere, one copy. Fails on intersections.
    pub fn trivial(p: &RobustProblem<T>) -> Result<Self> {
        if p.domain.normalized().is_intersection() {
            return Err(RspError::UnsupportedSet("intersection domain: lift it first".into()));
        }
        let mut factors = Vec::with_capacity(p.m());
        for (i, c) in p.constraints.iter().enumerate() {
            let z = c.zset.normalized();
            if z.is_intersection() {
                return Err(RspError::UnsupportedSet(format!("constraint {i}: intersection uncertainty set, lift it first")));
            }
            factors.push(vec![z]);
        }
        Ok(LiftedProblem { base: p.clone(), orig_n: p.n(), x_copies: 1, factors })
    }

    pub fn s(&self, i: usize) -> usize {
        self.factors[i].len()
    }

    pub fn is_split(&self) -> bool {
        self.x_copies > 1 || self.factors.iter().any(|f| f.len() > 1)
    }

    /// Drops the copies: x₁.
    pub fn unlift_x(&self, x: &[T]) -> Vec<T> {
        x[..self.orig_n].to_vec()
    }
}

fn simple_factors<T: Real>(s: &SetDescriptor<T>) -> Result<Vec<SetDescriptor<T>>> {
    let SetDescriptor::Intersection { sets } = s else {
        return Ok(vec![s.clone()]);
    };
    for f in sets {
        if let SetDescriptor::Intersection { .. } = f {
            return Err(RspError::UnsupportedSet("nested intersections are not supported".into()));
        }
    }
    Ok(sets.clone())
}

/// X = X₁ ∩ … ∩ X_q becomes X₁ × … × X_q with x₁ = xⱼ appended to (A, b).
/// Objective, constraints and the original equalities live on copy 1.
pub fn lift_domain_intersection<T: Real>(p: &RobustProblem<T>) -> Result<LiftedProblem<T>> {
    let doms = simple_factors(&p.domain)?;
    let q = doms.len();
    let n = p.n();
    let nn = n * q;
    let mut c = vec![T::zero(); nn];
    c[..n].copy_from_slice(&p.c);
    let constraints: Vec<Constraint<T>> = p.constraints.iter().map(|k| k.embed(nn, 0)).collect();
    let r0 = p.r();
    let rows = r0 + n * (q - 1);
    let mut a = Matrix::zeros(rows, nn);
    let mut b = vec![T::zero(); rows];
    for i in 0..r0 {
        for j in 0..n {
            a.data[i * nn + j] = p.eq_a[(i, j)];
        }
        b[i] = p.eq_b[i];
    }
    for cp in 1..q {
        for j in 0..n {
            let row = r0 + (cp - 1) * n + j;
            a.data[row * nn + j] = T::one();
            a.data[row * nn + cp * n + j] = -T::one();
        }
    }
    if rows > 0 {
        let sv = singular_values(&a);
        let lo = *sv.last().unwrap();
        if !(lo > T::lit(1e-10) * sv[0].max(T::one())) {
            return Err(RspError::RankDeficient { sigma_min: lo.to_f64_lossy() });
        }
    }
    let domain = if q == 1 {
        doms.into_iter().next().unwrap()
    } else {
        SetDescriptor::Product { blocks: doms.into_iter().map(|d| (n, d)).collect() }
    };
    let mut base = RobustProblem::new(c, domain, constraints);
    if rows > 0 {
        base = base.with_equalities(a, b);
    }
    let factors = p.constraints.iter().map(|k| vec![k.zset.clone()]).collect();
    Ok(LiftedProblem { base, orig_n: n, x_copies: q, factors })
}

/// Splits every Zⁱ = ∩ₗZⁱˡ into its sᵢ simple factors (domain untouched).
pub fn lift_uncertainty_intersection<T: Real>(p: &RobustProblem<T>) -> Result<LiftedProblem<T>> {
    let factors = p.constraints.iter().map(|c| simple_factors(&c.zset.normalized())).collect::<Result<Vec<_>>>()?;
    Ok(LiftedProblem { base: p.clone(), orig_n: p.n(), x_copies: 1, factors })
}

/// Both lifts, as needed.
pub fn lift<T: Real>(p: &RobustProblem<T>) -> Result<LiftedProblem<T>> {
    let mut lp = if p.domain.normalized().is_intersection() {
        lift_domain_intersection(&RobustProblem { domain: p.domain.normalized(), ..p.clone() })?
    } else {
        LiftedProblem { base: p.clone(), orig_n: p.n(), x_copies: 1, factors: vec![] }
    };
    lp.factors = p.constraints.iter().map(|c| simple_factors(&c.zset.normalized())).collect::<Result<Vec<_>>>()?;
    Ok(lp)
}

/// Inscribed-ball radius εᵢ of each uncertainty set.
pub fn default_eps<T: Real>(p: &RobustProblem<T>) -> Vec<T> {
    p.constraints.iter().map(|c| c.zset.normalized().inscribed_radius(c.z_dim())).collect()
}

/// Ωⁱˡ = {−μ̄ᵢ ≤ μ ≤ 0, ‖ν‖ ≤ −μ/εᵢ} for each l < sᵢ.
pub fn omega_bounds<T: Real>(lp: &LiftedProblem<T>, eps: &[T], mu_bar: &[T]) -> Result<Vec<Vec<OmegaSpec<T>>>> {
    let m = lp.factors.len();
    if eps.len() != m || mu_bar.len() != m {
        return Err(RspError::DimensionMismatch(format!("need {m} eps and mu_bar values")));
    }
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let s = lp.s(i);
        if s > 1 && !(eps[i] > T::zero()) {
            return Err(RspError::NonpositiveEps(eps[i].to_f64_lossy()));
        }
        out.push(vec![OmegaSpec { mu_bar: mu_bar[i], eps: eps[i] }; s - 1]);
    }
    Ok(out)
}

/// μ̄ᵢ ≥ −gᵢ(x, 0) on the nominal feasible set, estimated by projected
/// subgradient on gᵢ(·,0) + ρΣ_{j≠i}[gⱼ(·,0)]₊ with 10% slack.
pub fn verify_assumption5<T: Real>(p: &RobustProblem<T>, budget: usize) -> Result<Vec<T>> {
    let n = p.n();
    let rho = T::lit(10.0);
    let big = T::lit(1e8);
    let mut start = p.domain.project(&vec![T::zero(); n])?;
    if start.iter().any(|v| !v.is_finite()) {
        start = vec![T::zero(); n];
    }
    let scale = p.domain_radius().min(T::lit(1e3)).max(T::one());
    let mut out = Vec::with_capacity(p.m());
    for i in 0..p.m() {
        let nominal = |j: usize, x: &[T]| -> Result<T> {
            let c = &p.constraints[j];
            c.eval(x, &vec![T::zero(); c.z_dim()])
        };
        let mut x = start.clone();
        let mut best = nominal(i, &x)?;
        for k in 1..=budget.max(1) {
            let ci = &p.constraints[i];
            let mut g = ci.subgrad_x(&x, &vec![T::zero(); ci.z_dim()])?;
            for j in 0..p.m() {
                if j != i && nominal(j, &x)? > T::zero() {
                    let cj = &p.constraints[j];
                    let gj = cj.subgrad_x(&x, &vec![T::zero(); cj.z_dim()])?;
                    g.iter_mut().zip(&gj).for_each(|(a, &b)| *a += rho * b);
                }
            }
            let gn = norm(&g);
            if gn == T::zero() {
                break;
            }
            let step = scale / (gn * T::lit(k as f64).sqrt());
            let y: Vec<T> = x.iter().zip(&g).map(|(&a, &b)| a - step * b).collect();
            x = p.domain.project(&y)?;
            if norm(&x) > big {
                return Err(RspError::Unbounded(format!("nominal constraint {i} decreases without bound")));
            }
            let v = nominal(i, &x)?;
            if v < best {
                best = v;
            }
        }
        if !best.is_finite() {
            return Err(RspError::Unbounded(format!("nominal constraint {i}")));
        }
        let slack = T::lit(1.1);
        out.push((-best * slack).max(T::lit(0.1)));
    }
    Ok(out)
}

/// L̆ restricted to constraint i: g̃ᵢ(x, uᵢ,ₛ) + Σₗ ωᵢₗᵀ(uᵢₗ − uᵢ,ₛ).
pub fn lifted_constraint_value<T: Real>(
    c: &Constraint<T>,
    x: &[T],
    u: &[LiftedVar<T>],
    omega: &[(Vec<T>, T)],
) -> Result<T> {
    let last = u.last().ok_or_else(|| RspError::DimensionMismatch("no lifted copies".into()))?;
    let mut v = perspective_value(c, x, last)?;
    for (ul, (nu, mu)) in u.iter().zip(omega) {
        let diff: Vec<T> = ul.z_tilde.iter().zip(&last.z_tilde).map(|(&a, &b)| a - b).collect();
        v += dot(nu, &diff) + *mu * (ul.lambda - last.lambda);
    }
    Ok(v)
}

/// σ_min of the lifted equality system (0 when there are no equalities).
pub fn lifted_rank_margin<T: Real>(lp: &LiftedProblem<T>) -> T {
    if lp.base.r() == 0 {
        T::zero()
    } else {
        sigma_min(&lp.base.eq_a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp2() -> RobustProblem<f64> {
        let c: Constraint<f64> = Constraint::biaffine(
            Matrix::identity(2),
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            -1.0,
            SetDescriptor::Intersection { sets: vec![SetDescriptor::linf(1.0), SetDescriptor::l1(1.0)] },
        );
        RobustProblem::new(vec![-1.0, -1.0], SetDescriptor::<f64>::linf(1.0), vec![c])
    }

    #[test]
    fn budgeted_split_has_two_blocks() {
        let lp = lift_uncertainty_intersection(&lp2()).unwrap();
        assert_eq!(lp.s(0), 2);
        assert!(lp.is_split());
        assert!(LiftedProblem::trivial(&lp2()).is_err());
    }

    #[test]
    fn domain_copies() {
        let mut p = lp2();
        p.constraints[0].zset = SetDescriptor::linf(1.0);
        p.domain = SetDescriptor::Intersection { sets: vec![SetDescriptor::l2(1.0), SetDescriptor::linf(0.8)] };
        let lp = lift_domain_intersection(&p).unwrap();
        assert_eq!(lp.base.n(), 4);
        assert_eq!(lp.base.r(), 2);
        assert_eq!(lp.unlift_x(&[1.0, 2.0, 3.0, 4.0]), vec![1.0, 2.0]);
    }

    #[test]
    fn coupling_vanishes_on_equal_copies() {
        let p = lp2();
        let u = LiftedVar::new(vec![0.3, -0.2], 0.7);
        let x = [0.1, 0.4];
        let with = lifted_constraint_value(&p.constraints[0], &x, &[u.clone(), u.clone()], &[(vec![5.0, -3.0], -2.0)]).unwrap();
        let plain = perspective_value(&p.constraints[0], &x, &u).unwrap();
        assert!((with - plain).abs() < 1e-15);
    }

    #[test]
    fn assumption5_examples() {
        let c: Constraint<f64> =
            Constraint::biaffine(Matrix::zeros(1, 1), vec![1.0], vec![0.0], 0.0, SetDescriptor::interval(-1.0, 1.0));
        let p = RobustProblem::new(vec![0.0], SetDescriptor::interval(-2.0, 2.0), vec![c]);
        let mu = verify_assumption5(&p, 2000).unwrap();
        assert!((mu[0] - 2.2).abs() < 1e-2, "{mu:?}");
    }
}
