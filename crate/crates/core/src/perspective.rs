//! Perspective functions g̃(x, u) = λ·g(x, z̃/λ), their subgradients, and the
//! dual-variable bounds obtained from a Slater point.

use crate::error::{Result, RspError};
use crate::linalg::{dot, norm, op_norm, sigma_min};
use crate::papc::CompiledBiaffine;
use crate::problem::{Constraint, RobustProblem};
use crate::scalar::Real;

pub use crate::cone::LiftedVar;

/// λ·g(x, z̃/λ), and 0 at λ = 0.
pub fn perspective_value<T: Real>(c: &Constraint<T>, x: &[T], u: &LiftedVar<T>) -> Result<T> {
    if u.lambda <= T::zero() {
        return Ok(T::zero());
    }
    let z: Vec<T> = u.z_tilde.iter().map(|&v| v / u.lambda).collect();
    Ok(u.lambda * c.eval(x, &z)?)
}

/// (d_x, d_u) with d_x ∈ ∂ₓg̃ and d_u ∈ ∂_u(−g̃): for z = z̃/λ (or 0 when
/// λ = 0), d_x = λ·∂ₓg(x,z) and d_u = (d_z, −g(x,z) − zᵀd_z), d_z ∈ ∂_z(−g).
pub fn perspective_subgrad<T: Real>(c: &Constraint<T>, x: &[T], u: &LiftedVar<T>) -> Result<(Vec<T>, Vec<T>)> {
    let lam = u.lambda.max(T::zero());
    let z: Vec<T> = if lam > T::zero() {
        u.z_tilde.iter().map(|&v| v / lam).collect()
    } else {
        vec![T::zero(); u.dim()]
    };
    let dx = if lam > T::zero() {
        c.subgrad_x(x, &z)?.iter().map(|&v| lam * v).collect()
    } else {
        vec![T::zero(); x.len()]
    };
    let dz = c.subgrad_negz(x, &z)?;
    let g = c.eval(x, &z)?;
    let last = -g - dot(&z, &dz);
    let mut du = dz;
    du.push(last);
    Ok((dx, du))
}

/// A strictly feasible point with the data needed for the dual bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaterCertificate<T> {
    pub x_hat: Vec<T>,
    /// fᵢ(x̂), all negative.
    pub f_hat: Vec<T>,
    /// Radius of a ball around x̂ inside X on which every fᵢ stays negative.
    pub eps_hat: T,
    /// Strict lower bound on the optimal value.
    pub v_lower: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualBounds<T> {
    /// Bound on ‖λ*‖₁, used as the cap λ̄ of every lifted cone.
    pub lambda_bar: T,
    pub r_w: T,
    /// λ̄√(1 + Rᵢ²) per constraint.
    pub r_u: Vec<T>,
    /// Bound on ‖π*‖ (biaffine problems only).
    pub r_pi: Option<T>,
}

impl<T: Real> DualBounds<T> {
    /// Bounds for a problem without constraints or equalities.
    pub fn trivial(m: usize) -> Self {
        DualBounds { lambda_bar: T::zero(), r_w: T::zero(), r_u: vec![T::zero(); m], r_pi: None }
    }
}

/// −‖c‖·R_X − 1, a strict lower bound on cᵀx over a bounded X.
pub fn default_v_lower<T: Real>(p: &RobustProblem<T>) -> T {
    -norm(&p.c) * p.domain_radius() - T::one()
}

/// λ̄ = (cᵀx̂ − v̲)/(−maxᵢ f̂ᵢ), R_w = ((cᵀx̂ − v̲)/ε + ‖c‖)/σ_min(A),
/// r_uᵢ = λ̄√(1 + Rᵢ²).
pub fn dual_bounds<T: Real>(p: &RobustProblem<T>, cert: &SlaterCertificate<T>, radii: &[T]) -> Result<DualBounds<T>> {
    let worst = cert.f_hat.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    if p.m() > 0 && !(worst < T::zero()) {
        return Err(RspError::NotStrictlyFeasible(worst.to_f64_lossy()));
    }
    if radii.len() != p.m() {
        return Err(RspError::DimensionMismatch(format!("{} radii for {} constraints", radii.len(), p.m())));
    }
    let gap = p.objective(&cert.x_hat) - cert.v_lower;
    if !(gap > T::zero()) {
        return Err(RspError::InvalidSteps("v_lower must be strictly below the objective at x_hat".into()));
    }
    let lambda_bar = if p.m() == 0 { T::zero() } else { gap / (-worst) };
    let r_w = if p.r() == 0 {
        T::zero()
    } else {
        if !(cert.eps_hat > T::zero()) {
            return Err(RspError::NonpositiveEps(cert.eps_hat.to_f64_lossy()));
        }
        (gap / cert.eps_hat + norm(&p.c)) / sigma_min(&p.eq_a)
    };
    let r_u = radii.iter().map(|&r| lambda_bar * (T::one() + r * r).sqrt()).collect();
    Ok(DualBounds { lambda_bar, r_w, r_u, r_pi: None })
}

/// ‖c‖ + λ̄ Σᵢ ‖Q̃ᵢ‖(Rᵢ + 1).
pub fn r_pi_bound<T: Real>(compiled: &CompiledBiaffine<T>, bounds: &DualBounds<T>, radii: &[T]) -> T {
    let s: T = compiled.qt.iter().zip(radii).map(|(q, &r)| op_norm(q) * (r + T::one())).sum();
    norm(&compiled.c) + bounds.lambda_bar * s
}

/// Largest ρ with x̂ ± ρeⱼ ∈ X and every fᵢ < 0 for all 2n axis points, found
/// by bisection, divided by √n: by convexity the ℓ2 ball of that radius is
/// inside the hull of the axis points.
pub fn estimate_slater_radius<T: Real>(p: &RobustProblem<T>, x_hat: &[T]) -> Result<T> {
    let n = p.n();
    let ok = |rho: T| -> Result<bool> {
        for j in 0..n {
            for sgn in [T::one(), -T::one()] {
                let mut x = x_hat.to_vec();
                x[j] += sgn * rho;
                if !p.domain.contains(&x, T::zero()) {
                    return Ok(false);
                }
                if p.constraint_values(&x)?.iter().any(|&f| !(f < T::zero())) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };
    if !ok(T::zero())? {
        return Ok(T::zero());
    }
    let mut hi = T::lit(2.0) * p.domain_radius() + T::one();
    if !hi.is_finite() {
        hi = T::lit(1e6);
    }
    let mut lo = T::zero();
    if ok(hi)? {
        lo = hi;
    } else {
        for _ in 0..60 {
            let mid = T::lit(0.5) * (lo + hi);
            if ok(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(lo / T::lit(n.max(1) as f64).sqrt())
}

/// Certificate for a given interior point: evaluates fᵢ(x̂), estimates ε and
/// uses the default v̲ unless one is supplied.
pub fn certificate_at<T: Real>(p: &RobustProblem<T>, x_hat: &[T], v_lower: Option<T>) -> Result<SlaterCertificate<T>> {
    let f_hat = p.constraint_values(x_hat)?;
    let worst = f_hat.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    if p.m() > 0 && !(worst < T::zero()) {
        return Err(RspError::NotStrictlyFeasible(worst.to_f64_lossy()));
    }
    let eps_hat = estimate_slater_radius(p, x_hat)?;
    Ok(SlaterCertificate {
        x_hat: x_hat.to_vec(),
        f_hat,
        eps_hat,
        v_lower: v_lower.unwrap_or_else(|| default_v_lower(p)),
    })
}

/// max ‖z‖ over each constraint's uncertainty set.
pub fn uncertainty_radii<T: Real>(p: &RobustProblem<T>) -> Vec<T> {
    p.constraints.iter().map(|c| c.zset.radius(c.z_dim())).collect()
}
