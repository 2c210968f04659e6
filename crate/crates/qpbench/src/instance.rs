//! Random robust QP instances: gᵢ(x, z) = ‖(Pᵢ₀ + Σₖ zₖPᵢₖ)x‖² + bᵢᵀx + cᵢ,
//! i = 0 the objective, over the unit balls in x and z.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsp_core::io::{exact_rows, exact_vec, matrix_from_rows, plain_vec, Exact};
use rsp_core::linalg::{norm, op_norm, Matrix};
use rsp_core::{Result, RspError};
use serde::{Deserialize, Serialize};

pub const QP_SCHEMA: &str = "rsp-qp-1";
pub const C_CONST: f64 = -0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct QpInstance {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub seed: u64,
    /// p[i][k] is L × n, i ∈ 0..=m, k ∈ 0..=K.
    pub p: Vec<Vec<Matrix<f64>>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

impl QpInstance {
    /// [Pᵢ₀; …; Pᵢₖ] stacked vertically.
    pub fn stacked(&self, i: usize) -> Matrix<f64> {
        let rows = self.l * (self.k + 1);
        Matrix::from_fn(rows, self.n, |r, j| self.p[i][r / self.l][(r % self.l, j)])
    }
}

/// Uniform [−1, 1] entries, then Pᵢₖ /= ‖[Pᵢ₀; …; Pᵢₖ]‖₂ and bᵢ /= ‖bᵢ‖.
pub fn gen_instance(n: usize, k: usize, l: usize, m: usize, seed: u64) -> Result<QpInstance> {
    if n == 0 || k == 0 || l == 0 {
        return Err(RspError::DimensionMismatch("n, K and L must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = QpInstance { n, k, l, m, seed, p: Vec::new(), b: Vec::new(), c: vec![C_CONST; m + 1] };
    for _ in 0..=m {
        let mats: Vec<Matrix<f64>> = (0..=k).map(|_| Matrix::from_fn(l, n, |_, _| rng.gen_range(-1.0..=1.0))).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        inst.p.push(mats);
        inst.b.push(b);
    }
    for i in 0..=m {
        let s1 = op_norm(&inst.stacked(i));
        let s2 = norm(&inst.b[i]);
        if s1 > 0.0 {
            inst.p[i].iter_mut().for_each(|pk| pk.scale(1.0 / s1));
        }
        if s2 > 0.0 {
            inst.b[i].iter_mut().for_each(|v| *v /= s2);
        }
    }
    Ok(inst)
}

#[derive(Serialize, Deserialize)]
struct QpFile {
    schema: String,
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L")]
    l: usize,
    m: usize,
    seed: u64,
    #[serde(rename = "P")]
    p: Vec<Vec<Vec<Vec<Exact>>>>,
    b: Vec<Vec<Exact>>,
    c: Vec<Exact>,
}

pub fn qp_to_json(inst: &QpInstance) -> Result<String> {
    let f = QpFile {
        schema: QP_SCHEMA.into(),
        n: inst.n,
        k: inst.k,
        l: inst.l,
        m: inst.m,
        seed: inst.seed,
        p: inst.p.iter().map(|ps| ps.iter().map(exact_rows).collect()).collect(),
        b: inst.b.iter().map(|b| exact_vec(b)).collect(),
        c: exact_vec(&inst.c),
    };
    let mut s = serde_json::to_string_pretty(&f).map_err(|e| RspError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn qp_from_json(text: &str) -> Result<QpInstance> {
    let f: QpFile = serde_json::from_str(text).map_err(|e| RspError::Parse(e.to_string()))?;
    if f.schema != QP_SCHEMA {
        return Err(RspError::Parse(format!("schema {:?}, expected {QP_SCHEMA:?}", f.schema)));
    }
    let bad = f.p.len() != f.m + 1
        || f.b.len() != f.m + 1
        || f.c.len() != f.m + 1
        || f.p.iter().any(|ps| ps.len() != f.k + 1 || ps.iter().any(|rows| rows.len() != f.l))
        || f.b.iter().any(|b| b.len() != f.n);
    if bad {
        return Err(RspError::DimensionMismatch("QP tensor shapes disagree with (n, K, L, m)".into()));
    }
    let mut p = Vec::with_capacity(f.m + 1);
    for ps in &f.p {
        p.push(ps.iter().map(|rows| matrix_from_rows(rows, f.n)).collect::<Result<Vec<_>>>()?);
    }
    Ok(QpInstance {
        n: f.n,
        k: f.k,
        l: f.l,
        m: f.m,
        seed: f.seed,
        p,
        b: f.b.iter().map(|b| plain_vec(b)).collect(),
        c: plain_vec(&f.c),
    })
}

pub fn save_qp(inst: &QpInstance, path: &Path) -> Result<()> {
    fs::write(path, qp_to_json(inst)?)?;
    Ok(())
}

pub fn load_qp(path: &Path) -> Result<QpInstance> {
    qp_from_json(&fs::read_to_string(path)?)
}
