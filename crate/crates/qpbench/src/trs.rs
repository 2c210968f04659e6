//! max zᵀMz + 2rᵀz + s over ‖z‖ ≤ R for M ⪯ 0.
//!
//! With H = −M = V diag(h) Vᵀ and r̂ = Vᵀr the maximizer is
//! z(σ) = V diag(1/(h + σ)) r̂ for the σ ≥ 0 with ‖z(σ)‖ = R, or σ = 0 when
//! the unconstrained maximizer already lies in the ball. The secular
//! equation 1/‖z(σ)‖ = 1/R is concave and increasing in σ, so Newton from
//! the left converges monotonically; a bracket guards it anyway.

use rsp_core::linalg::{norm, sym_eigen, Matrix};
use rsp_core::{Result, RspError};

use crate::concave::ConcaveQuadratic;

#[derive(Debug, Clone, PartialEq)]
pub struct TrsSolution {
    pub z: Vec<f64>,
    pub value: f64,
    /// Multiplier of ‖z‖ ≤ R.
    pub sigma: f64,
}

/// ‖(M − σI)z + r‖, the stationarity residual.
pub fn kkt_residual(cq: &ConcaveQuadratic, sol: &TrsSolution) -> f64 {
    let mz = cq.m.matvec(&sol.z);
    let v: Vec<f64> = mz.iter().zip(&sol.z).zip(&cq.r).map(|((&a, &z), &r)| a - sol.sigma * z + r).collect();
    norm(&v)
}

pub fn trs_solve(cq: &ConcaveQuadratic, radius: f64) -> Result<TrsSolution> {
    let k = cq.r.len();
    if cq.m.rows != k || cq.m.cols != k {
        return Err(RspError::DimensionMismatch("M must be K × K with K = len(r)".into()));
    }
    let mut h_mat = cq.m.clone();
    h_mat.scale(-1.0);
    let (vals, vecs) = sym_eigen(&h_mat);
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    if vals.first().map_or(false, |&v| v < -1e-8 * scale) {
        return Err(RspError::NoConvergence(format!("M is not negative semidefinite (eigenvalue {:e})", -vals[0])));
    }
    let h: Vec<f64> = vals.iter().map(|&v| v.max(0.0)).collect();
    trs_in_basis(cq, &h, &vecs, radius)
}

/// As [`trs_solve`] given −M = V diag(h) Vᵀ with h ≥ 0.
pub fn trs_in_basis(cq: &ConcaveQuadratic, h: &[f64], vecs: &Matrix<f64>, radius: f64) -> Result<TrsSolution> {
    let k = cq.r.len();
    if !(radius > 0.0) {
        return Err(RspError::InvalidSet("trust region radius must be positive".into()));
    }
    let rh = vecs.tmatvec(&cq.r);
    let z_of = |sigma: f64| -> Vec<f64> {
        let w: Vec<f64> = rh.iter().zip(h).map(|(&r, &hh)| if r == 0.0 { 0.0 } else { r / (hh + sigma) }).collect();
        vecs.matvec(&w)
    };
    let norm_of = |sigma: f64| -> f64 {
        rh.iter().zip(h).map(|(&r, &hh)| if r == 0.0 { 0.0 } else { (r / (hh + sigma)).powi(2) }).sum::<f64>().sqrt()
    };
    let finish = |z: Vec<f64>, sigma: f64| -> TrsSolution {
        let value = cq.eval(&z);
        TrsSolution { z, value, sigma }
    };
    let rn = norm(&cq.r);
    if rn == 0.0 {
        return Ok(finish(vec![0.0; k], 0.0));
    }
    // Interior: σ = 0 is admissible when every direction with r̂ ≠ 0 is curved
    // and the Newton point lies in the ball.
    let zero_ok = rh.iter().zip(h).all(|(&r, &hh)| r == 0.0 || hh > 0.0);
    if zero_ok && norm_of(0.0) <= radius {
        return Ok(finish(z_of(0.0), 0.0));
    }
    // ‖z(σ)‖ ≤ ‖r‖/(h_min + σ), so the root lies below ‖r‖/R − h_min.
    let h_min = h.iter().cloned().fold(f64::INFINITY, f64::min);
    let h_max = h.iter().cloned().fold(0.0f64, f64::max);
    let mut lo = (rn / radius - h_max).max(0.0);
    let mut hi = (rn / radius - h_min).max(lo);
    let mut sigma = if lo > 0.0 { lo } else { hi * 1e-12 };
    for _ in 0..200 {
        let nz = norm_of(sigma);
        if (nz - radius).abs() <= 1e-14 * radius {
            return Ok(finish(z_of(sigma), sigma));
        }
        if nz > radius {
            lo = lo.max(sigma);
        } else {
            hi = hi.min(sigma);
        }
        // φ(σ) = 1/‖z‖ − 1/R, φ' = Σ r̂²/(h + σ)³ / ‖z‖³
        let d: f64 = rh.iter().zip(h).map(|(&r, &hh)| if r == 0.0 { 0.0 } else { r * r / (hh + sigma).powi(3) }).sum();
        let phi = 1.0 / nz - 1.0 / radius;
        let mut next = sigma - phi * nz.powi(3) / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - sigma).abs() <= f64::EPSILON * sigma.max(f64::MIN_POSITIVE) || hi - lo <= f64::EPSILON * hi {
            return Ok(finish(z_of(next), next));
        }
        sigma = next;
    }
    Err(RspError::NoConvergence("secular equation did not converge in 200 steps".into()))
}
