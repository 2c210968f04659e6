//! Projections onto lifted perspective cones {(z̃, λ): z̃ ∈ λZ, 0 ≤ λ ≤ λ̄},
//! prox of support functions and the ω-multiplier sets.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RspError};
use crate::linalg::{dot, norm, norm1, norm_inf, norm_sq};
use crate::scalar::Real;
use crate::sets::SetDescriptor;

/// A lifted uncertainty variable u = (z̃, λ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedVar<T> {
    pub z_tilde: Vec<T>,
    pub lambda: T,
}

impl<T: Real> LiftedVar<T> {
    pub fn new(z_tilde: Vec<T>, lambda: T) -> Self {
        LiftedVar { z_tilde, lambda }
    }

    pub fn zeros(d: usize) -> Self {
        LiftedVar { z_tilde: vec![T::zero(); d], lambda: T::zero() }
    }

    /// Flattened (z̃, λ).
    pub fn to_vec(&self) -> Vec<T> {
        let mut v = self.z_tilde.clone();
        v.push(self.lambda);
        v
    }

    pub fn from_slice(v: &[T]) -> Self {
        let (z, l) = v.split_at(v.len() - 1);
        LiftedVar { z_tilde: z.to_vec(), lambda: l[0] }
    }

    pub fn dim(&self) -> usize {
        self.z_tilde.len()
    }
}

/// The cone over `base`, capped at `lambda_cap` (may be +∞).
#[derive(Debug, Clone, PartialEq)]
pub struct ConeLiftSpec<T> {
    pub base: SetDescriptor<T>,
    pub lambda_cap: T,
}

impl<T: Real> ConeLiftSpec<T> {
    pub fn uncapped(base: SetDescriptor<T>) -> Self {
        ConeLiftSpec { base, lambda_cap: T::infinity() }
    }

    pub fn capped(base: SetDescriptor<T>, lambda_cap: T) -> Self {
        ConeLiftSpec { base, lambda_cap }
    }

    pub fn contains(&self, u: &LiftedVar<T>, tol: T) -> bool {
        if u.lambda < -tol || u.lambda > self.lambda_cap + tol {
            return false;
        }
        if u.lambda <= T::zero() {
            return norm(&u.z_tilde) <= tol;
        }
        let z: Vec<T> = u.z_tilde.iter().map(|&v| v / u.lambda).collect();
        self.base.contains(&z, tol / u.lambda)
    }
}

/// Ω = {(ν, μ): −μ̄ ≤ μ ≤ 0, ‖ν‖ ≤ −μ/ε}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaSpec<T> {
    pub mu_bar: T,
    pub eps: T,
}

/// ψ(μ) = μ‖P_Z(z̃/μ)‖² − z̃ᵀP_Z(z̃/μ) + μ − λ for μ > 0.
pub fn mu_residual<T: Real>(s: &SetDescriptor<T>, z_tilde: &[T], lambda: T, mu: T) -> Result<T> {
    if mu <= T::zero() {
        return Ok(-s.support(z_tilde)? - lambda);
    }
    let y: Vec<T> = z_tilde.iter().map(|&v| v / mu).collect();
    let p = s.project(&y)?;
    Ok(mu * norm_sq(&p) - dot(z_tilde, &p) + mu - lambda)
}

/// Root μ̃ of the scalar equation by bracketing bisection; 0 in the polar case
/// σ_Z(z̃) ≤ −λ.
pub fn scalar_root_mu<T: Real>(s: &SetDescriptor<T>, z_tilde: &[T], lambda: T, tol: T) -> Result<T> {
    if s.is_intersection() {
        return Err(RspError::UnsupportedSet("cone over an intersection".into()));
    }
    let f0 = mu_residual(s, z_tilde, lambda, T::zero())?;
    if f0 >= T::zero() {
        return Ok(T::zero());
    }
    let nz = norm(z_tilde);
    let eps_in = s.inscribed_radius(z_tilde.len());
    let reach = if eps_in > T::zero() { nz / eps_in + lambda } else { s.radius(z_tilde.len()) * nz + lambda };
    let mut hi = lambda.max(reach).max(T::one());
    let mut f_hi = mu_residual(s, z_tilde, lambda, hi)?;
    let mut doublings = 0;
    while f_hi < T::zero() {
        doublings += 1;
        if doublings > 200 || !hi.is_finite() {
            return Err(RspError::NoConvergence("could not bracket the cone root".into()));
        }
        hi = hi + hi;
        f_hi = mu_residual(s, z_tilde, lambda, hi)?;
    }
    let mut lo = T::zero();
    let mut f_lo = f0;
    if f_hi.abs() <= tol {
        return Ok(hi);
    }
    let two = T::lit(2.0);
    for _ in 0..200 {
        let mid = (lo + hi) / two;
        let fm = mu_residual(s, z_tilde, lambda, mid)?;
        // ψ is nondecreasing; allow rounding noise proportional to the bracket values.
        let slack = T::lit(64.0) * T::epsilon() * (f_lo.abs() + f_hi.abs() + nz * nz / mid.max(T::min_positive_value()));
        debug_assert!(fm >= f_lo - slack && fm <= f_hi + slack, "cone residual not monotone");
        if fm.abs() <= tol {
            return Ok(mid);
        }
        if fm < T::zero() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
        if hi - lo <= T::lit(4.0) * T::epsilon() * hi {
            break;
        }
    }
    // Machine-precision bracket: return the endpoint with the smaller residual.
    Ok(if f_lo.abs() < f_hi.abs() && lo > T::zero() { lo } else { hi })
}

/// Closed-form root for ℓ2/ℓ1/ℓ∞ balls (the sorted-index and radial rules),
/// `None` for other sets. Returns μ̃ ≥ 0 before capping.
pub fn mu_closed_form<T: Real>(s: &SetDescriptor<T>, z_tilde: &[T], lambda: T) -> Option<T> {
    match s {
        SetDescriptor::L2Ball { radius } => {
            let r = *radius;
            let nz = norm(z_tilde);
            if nz <= r * lambda {
                Some(lambda)
            } else if r * nz <= -lambda {
                Some(T::zero())
            } else {
                Some((lambda + r * nz) / (T::one() + r * r))
            }
        }
        SetDescriptor::LinfBall { radius } => {
            let r = *radius;
            if norm_inf(z_tilde) <= r * lambda {
                return Some(lambda);
            }
            if r * norm1(z_tilde) <= -lambda {
                return Some(T::zero());
            }
            let a = sorted_abs_desc(z_tilde);
            let mut cum = T::zero();
            let mut best: Option<T> = None;
            for (j, &aj) in a.iter().enumerate() {
                cum += aj;
                let k = T::lit((j + 1) as f64);
                let mu = (lambda + r * cum) / (T::one() + r * r * k);
                if aj >= r * mu {
                    best = Some(mu);
                }
            }
            // No index qualifies: the in-cone branch, μ̃ = λ.
            Some(best.unwrap_or(lambda).max(T::zero()))
        }
        SetDescriptor::L1Ball { radius } => {
            let r = *radius;
            if norm1(z_tilde) <= r * lambda {
                return Some(lambda);
            }
            if r * norm_inf(z_tilde) <= -lambda {
                return Some(T::zero());
            }
            let a = sorted_abs_desc(z_tilde);
            let mut cum = T::zero();
            let mut best: Option<T> = None;
            for (j, &aj) in a.iter().enumerate() {
                cum += aj;
                let k = T::lit((j + 1) as f64);
                let mu = (k * lambda + r * cum) / (k + r * r);
                let t = (cum - r * mu) / k;
                if aj > t {
                    best = Some(mu);
                }
            }
            Some(best.unwrap_or(lambda).max(T::zero()))
        }
        _ => None,
    }
}

fn sorted_abs_desc<T: Real>(z: &[T]) -> Vec<T> {
    let mut a: Vec<T> = z.iter().map(|v| v.abs()).collect();
    a.sort_by(|p, q| q.partial_cmp(p).unwrap_or(std::cmp::Ordering::Equal));
    a
}

/// Euclidean projection onto the capped cone.
pub fn project_cone_lift<T: Real>(spec: &ConeLiftSpec<T>, u: &LiftedVar<T>, tol: T) -> Result<LiftedVar<T>> {
    let s = &spec.base;
    if spec.contains(u, T::zero()) {
        return Ok(u.clone());
    }
    let mu_t = match mu_closed_form(s, &u.z_tilde, u.lambda) {
        Some(m) => {
            #[cfg(debug_assertions)]
            {
                let b = scalar_root_mu(s, &u.z_tilde, u.lambda, tol)?;
                let scale = T::one() + m.abs() + norm(&u.z_tilde);
                debug_assert!((b - m).abs() <= T::lit(1e-6) * scale, "closed form {m} vs bisection {b}");
            }
            m
        }
        None => scalar_root_mu(s, &u.z_tilde, u.lambda, tol)?,
    };
    let mu = mu_t.max(T::zero()).min(spec.lambda_cap);
    if mu <= T::zero() {
        return Ok(LiftedVar::zeros(u.dim()));
    }
    let y: Vec<T> = u.z_tilde.iter().map(|&v| v / mu).collect();
    let p = s.project(&y)?;
    Ok(LiftedVar { z_tilde: p.iter().map(|&v| v * mu).collect(), lambda: mu })
}

/// Optimality residual of a candidate projection `p` of `u`: one-sided
/// stationarity of the scalar problem in μ plus membership violation.
pub fn cone_lift_residual<T: Real>(spec: &ConeLiftSpec<T>, u: &LiftedVar<T>, p: &LiftedVar<T>) -> Result<T> {
    let s = &spec.base;
    let mu = p.lambda;
    let stat = if mu <= T::zero() {
        (-mu_residual(s, &u.z_tilde, u.lambda, T::zero())?).max(T::zero())
    } else if mu >= spec.lambda_cap {
        mu_residual(s, &u.z_tilde, u.lambda, mu)?.max(T::zero())
    } else {
        mu_residual(s, &u.z_tilde, u.lambda, mu)?.abs()
    };
    let member = if mu <= T::zero() {
        norm(&p.z_tilde)
    } else {
        let y: Vec<T> = p.z_tilde.iter().map(|&v| v / mu).collect();
        mu * s.dist(&y)?
    };
    // z̃' must be μ·P_Z(z̃/μ).
    let expect = if mu <= T::zero() {
        vec![T::zero(); u.dim()]
    } else {
        let y: Vec<T> = u.z_tilde.iter().map(|&v| v / mu).collect();
        s.project(&y)?.iter().map(|&v| v * mu).collect()
    };
    let mismatch = crate::linalg::dist(&expect, &p.z_tilde);
    Ok(stat.max(member).max(mismatch))
}

/// prox_{θσ_X}(y) = y − θ·P_X(y/θ).
pub fn prox_support<T: Real>(x: &SetDescriptor<T>, theta: T, y: &[T]) -> Result<Vec<T>> {
    if !(theta > T::zero()) {
        return Err(RspError::InvalidSteps(format!("prox step must be positive, got {theta}")));
    }
    if x.is_intersection() {
        return Err(RspError::UnsupportedSet("prox of the support of an intersection".into()));
    }
    let scaled: Vec<T> = y.iter().map(|&v| v / theta).collect();
    let p = x.project(&scaled)?;
    Ok(y.iter().zip(&p).map(|(&a, &b)| a - theta * b).collect())
}

/// Projection onto Ω via the reflected cone with base L2Ball(1/ε) and cap μ̄.
pub fn project_omega<T: Real>(spec: &OmegaSpec<T>, nu: &[T], mu: T, tol: T) -> Result<(Vec<T>, T)> {
    if !(spec.eps > T::zero()) {
        return Err(RspError::NonpositiveEps(spec.eps.to_f64_lossy()));
    }
    let cone = ConeLiftSpec::capped(SetDescriptor::l2(T::one() / spec.eps), spec.mu_bar);
    let p = project_cone_lift(&cone, &LiftedVar::new(nu.to_vec(), -mu), tol)?;
    Ok((p.z_tilde, -p.lambda))
}
