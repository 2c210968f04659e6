//! Instance files (schema "rsp-1"): JSON with every number written as a
//! 17-significant-digit decimal so a load/save/load cycle is lossless.

use std::fs;
use std::path::Path;

use serde::de::Deserializer;
use serde::ser::{Error as _, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Result, RspError};
use crate::linalg::Matrix;
use crate::problem::{Constraint, Oracle, RobustProblem};
use crate::sets::SetDescriptor;

pub const SCHEMA: &str = "rsp-1";

/// An f64 that serializes as `{:.16e}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exact(pub f64);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!("non-finite number {}", self.0)));
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(Exact)
    }
}

pub fn exact_vec(v: &[f64]) -> Vec<Exact> {
    v.iter().map(|&x| Exact(x)).collect()
}

pub fn plain_vec(v: &[Exact]) -> Vec<f64> {
    v.iter().map(|x| x.0).collect()
}

pub fn exact_rows(m: &Matrix<f64>) -> Vec<Vec<Exact>> {
    (0..m.rows).map(|i| exact_vec(m.row(i))).collect()
}

/// Rows to a matrix; `cols` fixes the width when there are no rows.
pub fn matrix_from_rows(rows: &[Vec<Exact>], cols: usize) -> Result<Matrix<f64>> {
    if rows.iter().any(|r| r.len() != cols) {
        return Err(RspError::Parse(format!("matrix rows must have {cols} entries")));
    }
    let mut m = Matrix::zeros(rows.len(), cols);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            m[(i, j)] = v.0;
        }
    }
    Ok(m)
}

fn set_out(s: &SetDescriptor<f64>) -> SetDescriptor<Exact> {
    match s {
        SetDescriptor::L2Ball { radius } => SetDescriptor::L2Ball { radius: Exact(*radius) },
        SetDescriptor::L1Ball { radius } => SetDescriptor::L1Ball { radius: Exact(*radius) },
        SetDescriptor::LinfBall { radius } => SetDescriptor::LinfBall { radius: Exact(*radius) },
        SetDescriptor::Box { lo, hi } => SetDescriptor::Box { lo: exact_vec(lo), hi: exact_vec(hi) },
        SetDescriptor::Singleton { point } => SetDescriptor::Singleton { point: exact_vec(point) },
        SetDescriptor::Intersection { sets } => SetDescriptor::Intersection { sets: sets.iter().map(set_out).collect() },
        SetDescriptor::Product { blocks } => {
            SetDescriptor::Product { blocks: blocks.iter().map(|(k, b)| (*k, set_out(b))).collect() }
        }
    }
}

fn set_in(s: &SetDescriptor<Exact>) -> SetDescriptor<f64> {
    match s {
        SetDescriptor::L2Ball { radius } => SetDescriptor::L2Ball { radius: radius.0 },
        SetDescriptor::L1Ball { radius } => SetDescriptor::L1Ball { radius: radius.0 },
        SetDescriptor::LinfBall { radius } => SetDescriptor::LinfBall { radius: radius.0 },
        SetDescriptor::Box { lo, hi } => SetDescriptor::Box { lo: plain_vec(lo), hi: plain_vec(hi) },
        SetDescriptor::Singleton { point } => SetDescriptor::Singleton { point: plain_vec(point) },
        SetDescriptor::Intersection { sets } => SetDescriptor::Intersection { sets: sets.iter().map(set_in).collect() },
        SetDescriptor::Product { blocks } => {
            SetDescriptor::Product { blocks: blocks.iter().map(|(k, b)| (*k, set_in(b))).collect() }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ConstraintFile {
    Biaffine {
        #[serde(rename = "Q")]
        q_mat: Vec<Vec<Exact>>,
        d: Vec<Exact>,
        q: Vec<Exact>,
        gamma: Exact,
        zset: SetDescriptor<Exact>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    schema: String,
    n: usize,
    m: usize,
    r: usize,
    c: Vec<Exact>,
    #[serde(rename = "A")]
    a: Vec<Vec<Exact>>,
    b: Vec<Exact>,
    domain: SetDescriptor<Exact>,
    constraints: Vec<ConstraintFile>,
    /// Optional strictly feasible starting point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x0: Option<Vec<Exact>>,
}

/// A problem together with the optional interior-point hint stored beside it.
#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: RobustProblem<f64>,
    pub x0: Option<Vec<f64>>,
}

pub fn instance_to_json(inst: &Instance) -> Result<String> {
    let p = &inst.problem;
    let mut constraints = Vec::with_capacity(p.m());
    for (i, c) in p.constraints.iter().enumerate() {
        let Oracle::Biaffine(b) = &c.oracle else {
            return Err(RspError::NotBiaffine(i));
        };
        constraints.push(ConstraintFile::Biaffine {
            q_mat: exact_rows(&b.q_mat),
            d: exact_vec(&b.d),
            q: exact_vec(&b.q),
            gamma: Exact(b.gamma),
            zset: set_out(&c.zset),
        });
    }
    let file = InstanceFile {
        schema: SCHEMA.into(),
        n: p.n(),
        m: p.m(),
        r: p.r(),
        c: exact_vec(&p.c),
        a: exact_rows(&p.eq_a),
        b: exact_vec(&p.eq_b),
        domain: set_out(&p.domain),
        constraints,
        x0: inst.x0.as_deref().map(exact_vec),
    };
    let mut s = serde_json::to_string_pretty(&file).map_err(|e| RspError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let f: InstanceFile = serde_json::from_str(text).map_err(|e| RspError::Parse(e.to_string()))?;
    if f.schema != SCHEMA {
        return Err(RspError::Parse(format!("schema {:?}, expected {SCHEMA:?}", f.schema)));
    }
    if f.c.len() != f.n || f.b.len() != f.r || f.a.len() != f.r || f.constraints.len() != f.m {
        return Err(RspError::DimensionMismatch("header counts disagree with the arrays".into()));
    }
    let mut constraints = Vec::with_capacity(f.m);
    for cf in &f.constraints {
        let ConstraintFile::Biaffine { q_mat, d, q, gamma, zset } = cf;
        let q_mat = matrix_from_rows(q_mat, q.len())?;
        constraints.push(Constraint::biaffine(q_mat, plain_vec(d), plain_vec(q), gamma.0, set_in(zset)));
    }
    let problem = RobustProblem::new(plain_vec(&f.c), set_in(&f.domain), constraints)
        .with_equalities(matrix_from_rows(&f.a, f.n)?, plain_vec(&f.b));
    Ok(Instance { problem, x0: f.x0.as_deref().map(plain_vec) })
}

pub fn save_instance(inst: &Instance, path: &Path) -> Result<()> {
    fs::write(path, instance_to_json(inst)?)?;
    Ok(())
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    instance_from_json(&fs::read_to_string(path)?)
}
