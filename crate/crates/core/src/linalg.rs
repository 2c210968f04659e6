//! Small dense linear algebra: vectors as slices, a row-major matrix, a cyclic
//! Jacobi eigensolver, Gaussian elimination and power iteration.

use crate::error::{Result, RspError};
use crate::scalar::Real;

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm_sq<T: Real>(a: &[T]) -> T {
    a.iter().map(|&x| x * x).sum()
}

pub fn norm<T: Real>(a: &[T]) -> T {
    norm_sq(a).sqrt()
}

pub fn norm1<T: Real>(a: &[T]) -> T {
    a.iter().map(|x| x.abs()).sum()
}

pub fn norm_inf<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

/// y += a * x
pub fn axpy<T: Real>(a: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn scaled<T: Real>(a: T, x: &[T]) -> Vec<T> {
    x.iter().map(|&v| a * v).collect()
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds from row vectors; all rows must have the same length.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.iter().flatten().copied().collect() }
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// M x
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// Mᵀ y
    pub fn tmatvec(&self, y: &[T]) -> Vec<T> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != T::zero() {
                axpy(yi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// M Mᵀ
    pub fn gram_rows(&self) -> Self {
        let mut g = Self::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in 0..=i {
                let v = dot(self.row(i), self.row(j));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Mᵀ M
    pub fn gram_cols(&self) -> Self {
        self.transpose().gram_rows()
    }

    pub fn frobenius(&self) -> T {
        norm(&self.data)
    }

    pub fn scale(&mut self, a: T) {
        for v in &mut self.data {
            *v *= a;
        }
    }

    pub fn add_diag(&mut self, a: T) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += a;
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// Returns eigenvalues in ascending order and the matching eigenvectors as columns.
pub fn sym_eigen<T: Real>(m: &Matrix<T>) -> (Vec<T>, Matrix<T>) {
    let n = m.rows;
    assert_eq!(n, m.cols, "sym_eigen needs a square matrix");
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let eps = T::epsilon();
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        let diag: T = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off.sqrt() <= eps * eps.sqrt() * (diag + off).sqrt() || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = idx.iter().map(|&i| a[(i, i)]).collect();
    let vecs = Matrix::from_fn(n, n, |r, c| v[(r, idx[c])]);
    (vals, vecs)
}

/// Solves M x = b by Gaussian elimination with partial pivoting.
/// Returns None when a pivot vanishes.
pub fn solve<T: Real>(m: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = m.rows;
    assert_eq!(n, m.cols);
    assert_eq!(n, b.len());
    let mut a = m.clone();
    let mut x = b.to_vec();
    let scale = a.data.iter().fold(T::zero(), |s, v| s.max(v.abs()));
    let tiny = scale * T::epsilon() * T::lit(n as f64);
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, a[(i, k)].abs()))
            .fold((k, -T::one()), |best, c| if c.1 > best.1 { c } else { best });
        if pmax <= tiny || pmax == T::zero() {
            return None;
        }
        if piv != k {
            for j in 0..n {
                a.data.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        for i in (k + 1)..n {
            let f = a[(i, k)] / a[(k, k)];
            if f == T::zero() {
                continue;
            }
            for j in k..n {
                let akj = a[(k, j)];
                a[(i, j)] -= f * akj;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in (k + 1)..n {
            s -= a[(k, j)] * x[j];
        }
        x[k] = s / a[(k, k)];
    }
    Some(x)
}

/// Singular values in descending order (via the smaller Gram matrix).
pub fn singular_values<T: Real>(a: &Matrix<T>) -> Vec<T> {
    if a.rows == 0 || a.cols == 0 {
        return Vec::new();
    }
    let g = if a.rows <= a.cols { a.gram_rows() } else { a.gram_cols() };
    let (vals, _) = sym_eigen(&g);
    vals.iter().rev().map(|&l| l.max(T::zero()).sqrt()).collect()
}

/// Smallest of the min(r, c) singular values; 0 for an empty matrix.
pub fn sigma_min<T: Real>(a: &Matrix<T>) -> T {
    singular_values(a).last().copied().unwrap_or(T::zero())
}

/// Largest eigenvalue of a symmetric matrix with its unit eigenvector.
///
/// Shifted power iteration with a Rayleigh-quotient residual test. If the
/// iteration stalls (clustered top eigenvalues), falls back to Jacobi.
pub fn lambda_max<T: Real>(m: &Matrix<T>) -> Result<(T, Vec<T>)> {
    let n = m.rows;
    if n != m.cols {
        return Err(RspError::DimensionMismatch(format!("lambda_max on {}x{}", m.rows, m.cols)));
    }
    let start: Vec<T> = (0..n).map(|j| T::one() + T::lit(0.1 * j as f64 / n.max(1) as f64)).collect();
    lambda_max_from(m, &start)
}

/// As [`lambda_max`] with a caller-provided start vector (warm start).
pub fn lambda_max_from<T: Real>(m: &Matrix<T>, start: &[T]) -> Result<(T, Vec<T>)> {
    let n = m.rows;
    if n == 0 {
        return Err(RspError::DimensionMismatch("lambda_max of empty matrix".into()));
    }
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(RspError::NoConvergence("non-finite matrix entry".into()));
    }
    let fro = m.frobenius();
    if fro == T::zero() {
        let mut e = vec![T::zero(); n];
        e[0] = T::one();
        return Ok((T::zero(), e));
    }
    // Gershgorin lower bound: shifting by it makes M + sI positive semidefinite.
    let mut gmin = T::infinity();
    for i in 0..n {
        let r: T = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
        gmin = gmin.min(m[(i, i)] - r);
    }
    let shift = (-gmin).max(T::zero());
    let mut v = start.to_vec();
    let mut nv = norm(&v);
    if nv == T::zero() || !nv.is_finite() {
        v = vec![T::one(); n];
        nv = norm(&v);
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let tol = T::lit(1e-11).max(T::epsilon() * T::lit(16.0));
    for _ in 0..20_000 {
        let mv = m.matvec(&v);
        let rho = dot(&v, &mv);
        let res: T = mv.iter().zip(&v).map(|(&a, &b)| (a - rho * b) * (a - rho * b)).sum::<T>().sqrt();
        if res <= tol * fro {
            return Ok((rho, v));
        }
        let mut w: Vec<T> = mv.iter().zip(&v).map(|(&a, &b)| a + shift * b).collect();
        let nw = norm(&w);
        if nw == T::zero() {
            break;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        v = w;
    }
    let (vals, vecs) = sym_eigen(m);
    Ok((vals[n - 1], vecs.col(n - 1)))
}

/// Operator 2-norm.
pub fn op_norm<T: Real>(a: &Matrix<T>) -> T {
    singular_values(a).first().copied().unwrap_or(T::zero())
}
