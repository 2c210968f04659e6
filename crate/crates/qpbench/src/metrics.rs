//! The shared FG / OGR code path. Every algorithm builds its checkpoint rows
//! here, so two runs that report the same x report the same numbers.

use rsp_core::trace::CheckpointRecord;
use rsp_core::Result;

use crate::instance::QpInstance;
use crate::model::{QpModel, UncertainModel};

/// Floor on |LB| in the OGR denominator.
pub const OGR_FLOOR: f64 = 1e-6;

/// maxᵢ≥1 max_{‖z‖≤1} gᵢ(x, z); −∞ when m = 0.
pub fn feasibility_gap(inst: &QpInstance, x: &[f64]) -> Result<f64> {
    QpModel::new(inst.clone()).feas_gap(x)
}

/// +∞ when fg > eps, else (obj − lb)/max(|lb|, 1e-6).
pub fn optimality_gap_ratio(fg: f64, obj: f64, lb: f64, eps: f64) -> f64 {
    if !(fg <= eps) || !lb.is_finite() {
        return f64::INFINITY;
    }
    (obj - lb) / lb.abs().max(OGR_FLOOR)
}

/// (worst-case objective, feas_gap) of x.
pub fn evaluate<M: UncertainModel + ?Sized>(model: &M, x: &[f64]) -> Result<(f64, f64)> {
    let obj = model.pessimize(0, x)?.1;
    Ok((obj, model.feas_gap(x)?))
}

/// A trace row for x; ogr is NaN until a lower bound is known.
pub fn record<M: UncertainModel + ?Sized>(model: &M, x: &[f64], iter: u64, elapsed_s: f64) -> Result<CheckpointRecord> {
    let (obj, fg) = evaluate(model, x)?;
    Ok(CheckpointRecord { iter, elapsed_s, obj, feas_gap: fg, ogr: f64::NAN, cert_bound: f64::NAN })
}

/// Rewrites the ogr column against a lower bound.
pub fn fill_ogr(records: &mut [CheckpointRecord], lb: f64, eps: f64) {
    for r in records {
        r.ogr = optimality_gap_ratio(r.feas_gap, r.obj, lb, eps);
    }
}

/// Index of the first record with feas_gap ≤ eps.
pub fn first_feasible(records: &[CheckpointRecord], eps: f64) -> Option<usize> {
    records.iter().position(|r| r.feas_gap <= eps)
}
