//! Checkpointed run traces, ergodic averaging and the trace CSV format.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::cone::LiftedVar;
use crate::error::{Result, RspError};
use crate::scalar::Real;

/// One CSV row: iter, elapsed_s, obj, feas_gap, ogr, cert_bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub iter: u64,
    pub elapsed_s: f64,
    pub obj: f64,
    pub feas_gap: f64,
    pub ogr: f64,
    pub cert_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    /// Ran the requested number of iterations.
    Completed,
    /// Stopped early on a tolerance.
    Converged,
    /// Wall-clock budget hit; the trace is partial.
    TimeBudgetExceeded,
    /// Iteration budget hit before the tolerance was met.
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Averaging {
    Uniform,
    StepWeighted,
}

/// Constant step sizes of a run (`TheoremScaled` policies only).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSteps<T> {
    pub tau: T,
    pub theta: Vec<T>,
    pub theta_w: T,
    pub theta_pi: Option<T>,
}

/// Largest subgradient norms seen during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedNorms<T> {
    pub g_x: T,
    pub g_u: Vec<T>,
    pub g_w: T,
}

/// Norms of the starting point, needed by the certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct StartSummary<T> {
    pub x0: Vec<T>,
    pub lambda0: Vec<T>,
    pub w0_norm: T,
    pub pi0_norm: T,
}

#[derive(Debug, Clone)]
pub struct IterTrace<T> {
    pub records: Vec<CheckpointRecord>,
    /// Ergodic x at each checkpoint (same order as `records`).
    pub checkpoint_x: Vec<Vec<T>>,
    /// Final ergodic point: the solver output.
    pub x_bar: Vec<T>,
    /// Ergodic lifted variables (the constraint-carrying copy for split runs).
    pub u_bar: Vec<LiftedVar<T>>,
    pub w_bar: Vec<T>,
    pub x_last: Vec<T>,
    pub iterations: usize,
    pub status: RunStatus,
    pub steps: Option<ConstantSteps<T>>,
    pub observed: Option<ObservedNorms<T>>,
    pub start: Option<StartSummary<T>>,
    /// ‖c + Q̄y‖ at the last dual iterate (PAPC only).
    pub dual_residual: Option<T>,
}

impl<T: Real> IterTrace<T> {
    pub fn empty(status: RunStatus) -> Self {
        IterTrace {
            records: Vec::new(),
            checkpoint_x: Vec::new(),
            x_bar: Vec::new(),
            u_bar: Vec::new(),
            w_bar: Vec::new(),
            x_last: Vec::new(),
            iterations: 0,
            status,
            steps: None,
            observed: None,
            start: None,
            dual_residual: None,
        }
    }

    /// λ̄ᵢ of the final ergodic point.
    pub fn lambda_bar(&self) -> Vec<T> {
        self.u_bar.iter().map(|u| u.lambda).collect()
    }

    pub fn last_record(&self) -> Option<&CheckpointRecord> {
        self.records.last()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_records(&self.records, w)
    }
}

pub fn write_records<W: Write>(records: &[CheckpointRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r).map_err(|e| RspError::Io(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<CheckpointRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|row| row.map_err(|e| RspError::Parse(e.to_string()))).collect()
}

/// Running (weighted) mean of vectors.
#[derive(Debug, Clone)]
pub struct Ergodic<T> {
    sum: Vec<T>,
    weight: T,
}

impl<T: Real> Ergodic<T> {
    pub fn new(dim: usize) -> Self {
        Ergodic { sum: vec![T::zero(); dim], weight: T::zero() }
    }

    pub fn add(&mut self, x: &[T], w: T) {
        for (s, &v) in self.sum.iter_mut().zip(x) {
            *s += w * v;
        }
        self.weight += w;
    }

    pub fn mean(&self) -> Vec<T> {
        if self.weight <= T::zero() {
            return self.sum.clone();
        }
        self.sum.iter().map(|&s| s / self.weight).collect()
    }

    pub fn weight(&self) -> T {
        self.weight
    }
}

/// Uniform: (1/N)Σxᵏ. StepWeighted: Στₖxᵏ/Στₖ (requires `steps`).
pub fn ergodic_average<T: Real>(iterates: &[Vec<T>], steps: Option<&[T]>, mode: Averaging) -> Result<Vec<T>> {
    let first = iterates.first().ok_or_else(|| RspError::DimensionMismatch("no iterates".into()))?;
    let mut acc = Ergodic::new(first.len());
    match mode {
        Averaging::Uniform => iterates.iter().for_each(|x| acc.add(x, T::one())),
        Averaging::StepWeighted => {
            let steps = steps.ok_or_else(|| RspError::DimensionMismatch("step-weighted average needs steps".into()))?;
            if steps.len() != iterates.len() {
                return Err(RspError::DimensionMismatch("one step per iterate".into()));
            }
            iterates.iter().zip(steps).for_each(|(x, &t)| acc.add(x, t));
        }
    }
    Ok(acc.mean())
}
