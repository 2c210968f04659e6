//! Reference implementations used as test oracles. Written independently of
//! the library: slow, brute force, small dimensions only.
#![allow(dead_code)]

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[k][p], m[k][q]);
                    m[k][p] = c * akp - s * akq;
                    m[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * apk - s * aqk;
                    m[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Singular values of a dense r × n matrix via eigenvalues of AAᵀ.
pub fn singular_values(a: &[Vec<f64>]) -> Vec<f64> {
    let r = a.len();
    let g: Vec<Vec<f64>> = (0..r).map(|i| (0..r).map(|j| a[i].iter().zip(&a[j]).map(|(x, y)| x * y).sum()).collect()).collect();
    jacobi_eigenvalues(&g).into_iter().map(|v| v.max(0.0).sqrt()).collect()
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Projection onto {z : Gz ≤ h} by enumerating active sets of size ≤ dim.
pub fn project_polytope(g: &[Vec<f64>], h: &[f64], y: &[f64]) -> Vec<f64> {
    let d = y.len();
    let rows = g.len();
    let feasible = |z: &[f64]| (0..rows).all(|i| g[i].iter().zip(z).map(|(a, b)| a * b).sum::<f64>() <= h[i] + 1e-9);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |z: Vec<f64>| {
        if feasible(&z) {
            let dd: f64 = z.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().map_or(true, |b| dd < b.0) {
                best = Some((dd, z));
            }
        }
    };
    consider(y.to_vec());
    let mut stack: Vec<Vec<usize>> = (0..rows).map(|i| vec![i]).collect();
    while let Some(act) = stack.pop() {
        // z = y − Gₐᵀν with Gₐz = hₐ.
        let k = act.len();
        let gg: Vec<Vec<f64>> = act.iter().map(|&i| act.iter().map(|&j| g[i].iter().zip(&g[j]).map(|(a, b)| a * b).sum()).collect()).collect();
        let rhs: Vec<f64> = act.iter().map(|&i| g[i].iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - h[i]).collect();
        if let Some(nu) = solve_dense(gg, rhs) {
            let mut z = y.to_vec();
            for (t, &i) in act.iter().enumerate() {
                for j in 0..d {
                    z[j] -= nu[t] * g[i][j];
                }
            }
            consider(z);
        }
        if k < d {
            let last = *act.last().unwrap();
            for nxt in last + 1..rows {
                let mut a2 = act.clone();
                a2.push(nxt);
                stack.push(a2);
            }
        }
    }
    best.expect("nonempty polytope").1
}

/// Rows of the ℓ1 ball of radius r in d dims (all sign patterns).
pub fn l1_rows(d: usize, r: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut g = Vec::new();
    for mask in 0..(1usize << d) {
        g.push((0..d).map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 }).collect());
    }
    let h = vec![r; g.len()];
    (g, h)
}

pub fn box_rows(lo: &[f64], hi: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let d = lo.len();
    let mut g = Vec::new();
    let mut h = Vec::new();
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        g.push(e.clone());
        h.push(hi[j]);
        e[j] = -1.0;
        g.push(e);
        h.push(-lo[j]);
    }
    (g, h)
}

/// Minimizes a convex function on [lo, hi] by golden section.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..iters {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Projection onto the cone {(z̃, λ): z̃ ∈ λZ, 0 ≤ λ ≤ cap} given P_Z:
/// minimizes the convex h(μ) = μ²dist(z̃/μ, Z)² + (λ − μ)² over μ.
pub fn cone_project(pz: &dyn Fn(&[f64]) -> Vec<f64>, z: &[f64], lambda: f64, cap: f64) -> (Vec<f64>, f64) {
    let nz: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = |mu: f64| -> f64 {
        if mu <= 0.0 {
            return nz * nz + lambda * lambda;
        }
        let y: Vec<f64> = z.iter().map(|v| v / mu).collect();
        let p = pz(&y);
        let d2: f64 = y.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum();
        mu * mu * d2 + (lambda - mu) * (lambda - mu)
    };
    let hi = cap.min((nz * nz + lambda * lambda).sqrt() + 1e-9);
    let mu = golden_min(h, 0.0, hi, 90);
    if mu <= 1e-13 {
        return (vec![0.0; z.len()], 0.0);
    }
    let y: Vec<f64> = z.iter().map(|v| v / mu).collect();
    (pz(&y).iter().map(|v| v * mu).collect(), mu)
}

/// Plain PAPC for one biaffine constraint xᵀQz + dᵀx + qᵀz + γ ≤ 0 with a
/// user-supplied P_Z, domain given by its projection. Returns the uniform
/// average of the corrected x.
pub struct RefPapc<'a> {
    pub c: Vec<f64>,
    pub q_mat: Vec<Vec<f64>>,
    pub d: Vec<f64>,
    pub q: Vec<f64>,
    pub gamma: f64,
    pub pz: &'a dyn Fn(&[f64]) -> Vec<f64>,
    pub px: &'a dyn Fn(&[f64]) -> Vec<f64>,
}

impl RefPapc<'_> {
    pub fn run(&self, iters: usize) -> Vec<f64> {
        let n = self.c.len();
        let dz = self.q.len();
        // Q̃ = [Q d], Q̄ = [Q̃ I]; λmax(Q̄Q̄ᵀ) = λmax(Q̃Q̃ᵀ + I).
        let qt: Vec<Vec<f64>> = (0..n).map(|i| {
            let mut r = self.q_mat[i].clone();
            r.push(self.d[i]);
            r
        }).collect();
        let gram: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| qt[i].iter().zip(&qt[j]).map(|(a, b)| a * b).sum::<f64>() + if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let lmax = *jacobi_eigenvalues(&gram).last().unwrap();
        let tau = (1.0 - 1e-6) / lmax;
        let mut x = vec![0.0; n];
        let mut u = vec![0.0; dz + 1];
        let mut pi = vec![0.0; n];
        let mut acc = vec![0.0; n];
        let grad = |u: &[f64], pi: &[f64]| -> Vec<f64> {
            (0..n).map(|i| self.c[i] + qt[i].iter().zip(u).map(|(a, b)| a * b).sum::<f64>() + pi[i]).collect()
        };
        for _ in 0..iters {
            let g = grad(&u, &pi);
            let p: Vec<f64> = (0..n).map(|i| x[i] - tau * g[i]).collect();
            let mut v = u.clone();
            for j in 0..=dz {
                let qtp: f64 = (0..n).map(|i| qt[i][j] * p[i]).sum();
                let lin = if j < dz { self.q[j] } else { self.gamma };
                v[j] += qtp + lin;
            }
            let (zz, lam) = cone_project(self.pz, &v[..dz], v[dz], f64::INFINITY);
            u[..dz].copy_from_slice(&zz);
            u[dz] = lam;
            let s: Vec<f64> = (0..n).map(|i| pi[i] + p[i]).collect();
            let proj = (self.px)(&s);
            for i in 0..n {
                pi[i] = s[i] - proj[i];
            }
            let g = grad(&u, &pi);
            for i in 0..n {
                x[i] -= tau * g[i];
                acc[i] += x[i];
            }
        }
        acc.iter().map(|v| v / iters as f64).collect()
    }
}
