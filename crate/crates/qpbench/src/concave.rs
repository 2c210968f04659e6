//! gᵢ(x, ·) is convex in z. On the unit ball it has the same maximum as the
//! concave ḡᵢ(x, z) = zᵀ(Q − λ_max(Q)I)z + 2rᵀz + s + λ_max(Q), where
//! g = zᵀQz + 2rᵀz + s with Q = P(x)ᵀP(x), r = P(x)ᵀPᵢ₀x and
//! s = ‖Pᵢ₀x‖² + bᵢᵀx + cᵢ; the columns of P(x) are Pᵢₖx.

use std::sync::{Arc, Mutex};

use rsp_core::linalg::{dot, norm_sq, sym_eigen, Matrix};
use rsp_core::problem::ScenarioCut;
use rsp_core::{Result, RspError};

use crate::instance::QpInstance;
use crate::trs::{trs_in_basis, TrsSolution};

/// zᵀMz + 2rᵀz + s with M ⪯ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcaveQuadratic {
    pub m: Matrix<f64>,
    pub r: Vec<f64>,
    pub s: f64,
}

impl ConcaveQuadratic {
    pub fn eval(&self, z: &[f64]) -> f64 {
        dot(z, &self.m.matvec(z)) + 2.0 * dot(&self.r, z) + self.s
    }

    /// 2(Mz + r)
    pub fn grad(&self, z: &[f64]) -> Vec<f64> {
        self.m.matvec(z).iter().zip(&self.r).map(|(&a, &b)| 2.0 * (a + b)).collect()
    }
}

/// The concave data of gᵢ at x together with Q(x), its eigendecomposition
/// and the pieces the x-gradient needs.
#[derive(Debug, Clone)]
pub struct Concavified {
    pub cq: ConcaveQuadratic,
    pub q: Matrix<f64>,
    pub lambda: f64,
    /// Unit eigenvector of λ_max(Q).
    pub top: Vec<f64>,
    pub s_raw: f64,
    /// Eigenvalues of Q, ascending, and eigenvectors as columns.
    pub eig_vals: Vec<f64>,
    pub eig_vecs: Matrix<f64>,
    /// P(x), L × K.
    px: Matrix<f64>,
}

/// (P(x) as L × K, Pᵢ₀x).
fn parts(inst: &QpInstance, i: usize, x: &[f64]) -> (Matrix<f64>, Vec<f64>) {
    let p0x = inst.p[i][0].matvec(x);
    let cols: Vec<Vec<f64>> = (1..=inst.k).map(|k| inst.p[i][k].matvec(x)).collect();
    (Matrix::from_fn(inst.l, inst.k, |r, k| cols[k][r]), p0x)
}

/// λ_max comes from the full Jacobi decomposition of Q, since the
/// trust-region solve needs the same eigenbasis (M shares Q's eigenvectors).
pub fn concavify_full(inst: &QpInstance, i: usize, x: &[f64]) -> Result<Concavified> {
    if x.len() != inst.n || i > inst.m {
        return Err(RspError::DimensionMismatch(format!("concavify: group {i}, x of dim {}", x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(RspError::NoConvergence("non-finite x".into()));
    }
    let (px, p0x) = parts(inst, i, x);
    let q = px.gram_cols();
    let r = px.tmatvec(&p0x);
    let s_raw = norm_sq(&p0x) + dot(&inst.b[i], x) + inst.c[i];
    let (eig_vals, eig_vecs) = sym_eigen(&q);
    let k = eig_vals.len();
    let lambda = eig_vals[k - 1].max(0.0);
    let top = eig_vecs.col(k - 1);
    let mut m = q.clone();
    m.add_diag(-lambda);
    Ok(Concavified { cq: ConcaveQuadratic { m, r, s: s_raw + lambda }, q, lambda, top, s_raw, eig_vals, eig_vecs, px })
}

pub fn concavify(inst: &QpInstance, i: usize, x: &[f64]) -> Result<ConcaveQuadratic> {
    concavify_full(inst, i, x).map(|c| c.cq)
}

impl Concavified {
    /// ḡ(x, z)
    pub fn value(&self, z: &[f64]) -> f64 {
        self.cq.eval(z)
    }

    /// ∇_zḡ = 2(Q − λ_max I)z + 2r.
    pub fn grad_z(&self, z: &[f64]) -> Vec<f64> {
        self.cq.grad(z)
    }

    /// ∇ₓḡ = 2A_zᵀA_z x + b + 2(1 − ‖z‖²)P_vᵀP_v x, v the top eigenvector.
    pub fn grad_x(&self, inst: &QpInstance, i: usize, x: &[f64], z: &[f64]) -> Vec<f64> {
        let ax = az_x(inst, i, x, z);
        let mut g = az_t(inst, i, z, &ax);
        g.iter_mut().for_each(|v| *v *= 2.0);
        g.iter_mut().zip(&inst.b[i]).for_each(|(a, &b)| *a += b);
        let w = 1.0 - norm_sq(z);
        if w != 0.0 {
            let pvx = self.px.matvec(&self.top);
            for (k, &vk) in self.top.iter().enumerate() {
                if vk != 0.0 {
                    let u = inst.p[i][k + 1].tmatvec(&pvx);
                    g.iter_mut().zip(&u).for_each(|(a, &b)| *a += 2.0 * w * vk * b);
                }
            }
        }
        g
    }

    /// max over ‖z‖ ≤ radius of ḡ, in Q's eigenbasis.
    pub fn trs(&self, radius: f64) -> Result<TrsSolution> {
        let h: Vec<f64> = self.eig_vals.iter().map(|&q| (self.lambda - q).max(0.0)).collect();
        trs_in_basis(&self.cq, &h, &self.eig_vecs, radius)
    }

    /// A maximizer of g over the unit ball and sup g. When the ḡ-maximizer is
    /// interior it is moved along the top eigenvector onto the sphere, where
    /// g = ḡ and ḡ is unchanged along that direction.
    pub fn pessimize(&self) -> Result<TrsSolution> {
        let mut sol = self.trs(1.0)?;
        let nz2 = norm_sq(&sol.z);
        if nz2 < 1.0 - 1e-12 {
            let zv = dot(&sol.z, &self.top);
            let t = -zv + (zv * zv + 1.0 - nz2).sqrt();
            sol.z.iter_mut().zip(&self.top).for_each(|(a, &b)| *a += t * b);
            sol.value = sol.value.max(self.cq.eval(&sol.z));
        }
        Ok(sol)
    }
}

/// Remembers the concavification at the last x, for oracles that ask for
/// several quantities at one point.
#[derive(Debug)]
pub struct ConcaveCache {
    pub inst: Arc<QpInstance>,
    pub i: usize,
    last: Mutex<Option<(Vec<f64>, Arc<Concavified>)>>,
}

impl ConcaveCache {
    pub fn new(inst: Arc<QpInstance>, i: usize) -> Self {
        ConcaveCache { inst, i, last: Mutex::new(None) }
    }

    pub fn at(&self, x: &[f64]) -> Result<Arc<Concavified>> {
        let mut guard = self.last.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((y, c)) = guard.as_ref() {
            if y.as_slice() == x {
                return Ok(c.clone());
            }
        }
        let c = Arc::new(concavify_full(&self.inst, self.i, x)?);
        *guard = Some((x.to_vec(), c.clone()));
        Ok(c)
    }
}

impl Clone for ConcaveCache {
    fn clone(&self) -> Self {
        ConcaveCache::new(self.inst.clone(), self.i)
    }
}

/// (Pᵢ₀ + Σ zₖPᵢₖ)x
fn az_x(inst: &QpInstance, i: usize, x: &[f64], z: &[f64]) -> Vec<f64> {
    let mut v = inst.p[i][0].matvec(x);
    for (k, &zk) in z.iter().enumerate() {
        if zk != 0.0 {
            let w = inst.p[i][k + 1].matvec(x);
            v.iter_mut().zip(&w).for_each(|(a, &b)| *a += zk * b);
        }
    }
    v
}

/// (Pᵢ₀ + Σ zₖPᵢₖ)ᵀw
fn az_t(inst: &QpInstance, i: usize, z: &[f64], w: &[f64]) -> Vec<f64> {
    let mut v = inst.p[i][0].tmatvec(w);
    for (k, &zk) in z.iter().enumerate() {
        if zk != 0.0 {
            let u = inst.p[i][k + 1].tmatvec(w);
            v.iter_mut().zip(&u).for_each(|(a, &b)| *a += zk * b);
        }
    }
    v
}

/// The original gᵢ(x, z).
pub fn g_value(inst: &QpInstance, i: usize, x: &[f64], z: &[f64]) -> f64 {
    norm_sq(&az_x(inst, i, x, z)) + dot(&inst.b[i], x) + inst.c[i]
}

/// ḡᵢ(x, z) = gᵢ(x, z) + λ_max(Q(x))(1 − ‖z‖²).
pub fn gbar_value(inst: &QpInstance, i: usize, x: &[f64], z: &[f64]) -> Result<f64> {
    Ok(concavify_full(inst, i, x)?.value(z))
}

pub fn gbar_grad_x(inst: &QpInstance, i: usize, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    Ok(concavify_full(inst, i, x)?.grad_x(inst, i, x, z))
}

pub fn gbar_grad_z(inst: &QpInstance, i: usize, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    Ok(concavify_full(inst, i, x)?.grad_z(z))
}

/// x ↦ gᵢ(x, z) = ½xᵀ(2A_zᵀA_z)x + bᵢᵀx + cᵢ.
pub fn scenario_cut(inst: &QpInstance, i: usize, z: &[f64]) -> ScenarioCut<f64> {
    let az = Matrix::from_fn(inst.l, inst.n, |r, j| {
        inst.p[i][0][(r, j)] + z.iter().enumerate().map(|(k, &zk)| zk * inst.p[i][k + 1][(r, j)]).sum::<f64>()
    });
    let mut h = az.gram_cols();
    h.scale(2.0);
    ScenarioCut { hess: Some(h), a: inst.b[i].clone(), b0: inst.c[i] }
}
