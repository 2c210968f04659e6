//! Convex set descriptors and Euclidean projections onto them.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RspError};
use crate::linalg::{dot, norm, norm1, norm_inf};
use crate::scalar::Real;

/// A projectable convex set. Balls are centred at the origin and apply in any
/// dimension; `Box` and `Singleton` carry their dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetDescriptor<T> {
    L2Ball { radius: T },
    L1Ball { radius: T },
    LinfBall { radius: T },
    Box { lo: Vec<T>, hi: Vec<T> },
    Singleton { point: Vec<T> },
    Intersection { sets: Vec<SetDescriptor<T>> },
    /// Cartesian product of blocks with explicit block dimensions.
    Product { blocks: Vec<(usize, SetDescriptor<T>)> },
}

impl<T: Real> SetDescriptor<T> {
    pub fn l2(radius: T) -> Self {
        SetDescriptor::L2Ball { radius }
    }
    pub fn l1(radius: T) -> Self {
        SetDescriptor::L1Ball { radius }
    }
    pub fn linf(radius: T) -> Self {
        SetDescriptor::LinfBall { radius }
    }
    pub fn boxed(lo: Vec<T>, hi: Vec<T>) -> Self {
        SetDescriptor::Box { lo, hi }
    }
    pub fn interval(lo: T, hi: T) -> Self {
        SetDescriptor::Box { lo: vec![lo], hi: vec![hi] }
    }

    /// Fixed dimension if the descriptor pins one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            SetDescriptor::Box { lo, .. } => Some(lo.len()),
            SetDescriptor::Singleton { point } => Some(point.len()),
            SetDescriptor::Intersection { sets } => sets.iter().find_map(|s| s.dim()),
            SetDescriptor::Product { blocks } => Some(blocks.iter().map(|b| b.0).sum()),
            _ => None,
        }
    }

    pub fn is_simple(&self) -> bool {
        !matches!(self, SetDescriptor::Intersection { .. } | SetDescriptor::Product { .. })
    }

    pub fn is_intersection(&self) -> bool {
        matches!(self, SetDescriptor::Intersection { .. })
    }

    /// Checks radii, box ordering, dimensions against `d`, and intersection depth.
    pub fn validate(&self, d: usize) -> Result<()> {
        let bad = |m: String| Err(RspError::InvalidSet(m));
        match self {
            SetDescriptor::L2Ball { radius } | SetDescriptor::L1Ball { radius } | SetDescriptor::LinfBall { radius } => {
                if !(*radius > T::zero()) || !radius.is_finite() {
                    return bad(format!("radius must be positive and finite, got {radius}"));
                }
            }
            SetDescriptor::Box { lo, hi } => {
                if lo.len() != d || hi.len() != d {
                    return Err(RspError::DimensionMismatch(format!("box of dim {} in R^{d}", lo.len())));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h) || !l.is_finite() || !h.is_finite()) {
                    return bad("box needs finite lo <= hi".into());
                }
            }
            SetDescriptor::Singleton { point } => {
                if point.len() != d {
                    return Err(RspError::DimensionMismatch(format!("singleton of dim {} in R^{d}", point.len())));
                }
            }
            SetDescriptor::Intersection { sets } => {
                if sets.is_empty() {
                    return bad("empty intersection".into());
                }
                for s in sets {
                    if !s.is_simple() {
                        return bad("nested intersections and products inside intersections are not supported".into());
                    }
                    s.validate(d)?;
                }
            }
            SetDescriptor::Product { blocks } => {
                let total: usize = blocks.iter().map(|b| b.0).sum();
                if total != d {
                    return Err(RspError::DimensionMismatch(format!("product of dim {total} in R^{d}")));
                }
                for (k, s) in blocks {
                    if s.is_intersection() {
                        return bad("intersections inside products are not supported".into());
                    }
                    s.validate(*k)?;
                }
            }
        }
        Ok(())
    }

    /// Flattens nested intersections one level and unwraps singleton lists.
    pub fn normalized(&self) -> Self {
        match self {
            SetDescriptor::Intersection { sets } => {
                let mut flat = Vec::new();
                for s in sets {
                    match s.normalized() {
                        SetDescriptor::Intersection { sets: inner } => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                if flat.len() == 1 {
                    flat.pop().unwrap()
                } else {
                    SetDescriptor::Intersection { sets: flat }
                }
            }
            SetDescriptor::Product { blocks } => SetDescriptor::Product {
                blocks: blocks.iter().map(|(k, s)| (*k, s.normalized())).collect(),
            },
            other => other.clone(),
        }
    }

    /// Factors of an intersection (or the set itself).
    pub fn factors(&self) -> Vec<SetDescriptor<T>> {
        match self.normalized() {
            SetDescriptor::Intersection { sets } => sets,
            s => vec![s],
        }
    }

    /// Support function σ_S(y) = max_{z∈S} yᵀz. Intersections are not supported.
    pub fn support(&self, y: &[T]) -> Result<T> {
        Ok(match self {
            SetDescriptor::L2Ball { radius } => *radius * norm(y),
            SetDescriptor::L1Ball { radius } => *radius * norm_inf(y),
            SetDescriptor::LinfBall { radius } => *radius * norm1(y),
            SetDescriptor::Box { lo, hi } => {
                y.iter().zip(lo.iter().zip(hi)).map(|(&v, (&l, &h))| (v * l).max(v * h)).sum()
            }
            SetDescriptor::Singleton { point } => dot(point, y),
            SetDescriptor::Product { blocks } => {
                let mut off = 0;
                let mut s = T::zero();
                for (k, b) in blocks {
                    s += b.support(&y[off..off + k])?;
                    off += k;
                }
                s
            }
            SetDescriptor::Intersection { .. } => {
                return Err(RspError::UnsupportedSet("support function of an intersection".into()))
            }
        })
    }

    /// max ‖z‖ over the set (an upper bound for intersections).
    pub fn radius(&self, d: usize) -> T {
        match self {
            SetDescriptor::L2Ball { radius } | SetDescriptor::L1Ball { radius } => *radius,
            SetDescriptor::LinfBall { radius } => *radius * T::lit(d as f64).sqrt(),
            SetDescriptor::Box { lo, hi } => {
                lo.iter().zip(hi).map(|(&l, &h)| (l * l).max(h * h)).sum::<T>().sqrt()
            }
            SetDescriptor::Singleton { point } => norm(point),
            SetDescriptor::Intersection { sets } => {
                sets.iter().map(|s| s.radius(d)).fold(T::infinity(), |a, b| a.min(b))
            }
            SetDescriptor::Product { blocks } => {
                blocks.iter().map(|(k, s)| s.radius(*k).powi(2)).sum::<T>().sqrt()
            }
        }
    }

    /// Radius of the largest origin-centred ball inside the set (0 if none).
    pub fn inscribed_radius(&self, d: usize) -> T {
        match self {
            SetDescriptor::L2Ball { radius } | SetDescriptor::LinfBall { radius } => *radius,
            SetDescriptor::L1Ball { radius } => *radius / T::lit(d.max(1) as f64).sqrt(),
            SetDescriptor::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(&l, &h)| (-l).min(h))
                .fold(T::infinity(), |a, b| a.min(b))
                .max(T::zero()),
            SetDescriptor::Singleton { .. } => T::zero(),
            SetDescriptor::Intersection { sets } => {
                sets.iter().map(|s| s.inscribed_radius(d)).fold(T::infinity(), |a, b| a.min(b))
            }
            SetDescriptor::Product { blocks } => blocks
                .iter()
                .map(|(k, s)| s.inscribed_radius(*k))
                .fold(T::infinity(), |a, b| a.min(b)),
        }
    }

    pub fn contains(&self, z: &[T], tol: T) -> bool {
        match self {
            SetDescriptor::L2Ball { radius } => norm(z) <= *radius + tol,
            SetDescriptor::L1Ball { radius } => norm1(z) <= *radius + tol,
            SetDescriptor::LinfBall { radius } => norm_inf(z) <= *radius + tol,
            SetDescriptor::Box { lo, hi } => {
                z.iter().zip(lo.iter().zip(hi)).all(|(&v, (&l, &h))| v >= l - tol && v <= h + tol)
            }
            SetDescriptor::Singleton { point } => z.iter().zip(point).all(|(&a, &b)| (a - b).abs() <= tol),
            SetDescriptor::Intersection { sets } => sets.iter().all(|s| s.contains(z, tol)),
            SetDescriptor::Product { blocks } => {
                let mut off = 0;
                blocks.iter().all(|(k, s)| {
                    let ok = s.contains(&z[off..off + k], tol);
                    off += k;
                    ok
                })
            }
        }
    }

    /// Euclidean projection. Products project blockwise; intersections are
    /// rejected here (see [`project_intersection`] or the splitting lifter).
    pub fn project(&self, y: &[T]) -> Result<Vec<T>> {
        match self {
            SetDescriptor::Product { blocks } => {
                let mut out = Vec::with_capacity(y.len());
                let mut off = 0;
                for (k, s) in blocks {
                    out.extend(s.project(&y[off..off + k])?);
                    off += k;
                }
                Ok(out)
            }
            _ => project_simple(self, y),
        }
    }

    /// Distance from y to the set.
    pub fn dist(&self, y: &[T]) -> Result<T> {
        let p = match self {
            SetDescriptor::Intersection { .. } => project_intersection(self, y, T::lit(1e-12), 10_000)?,
            _ => self.project(y)?,
        };
        Ok(crate::linalg::dist(&p, y))
    }
}

impl<T: Real> SetDescriptor<T> {
    /// A maximizer of aᵀz over the set (first maximal index on ties).
    /// Intersections are supported for box/ℓ∞ factors with one ℓ1 budget.
    pub fn argmax_linear(&self, a: &[T]) -> Result<Vec<T>> {
        let d = a.len();
        Ok(match self {
            SetDescriptor::L2Ball { radius } => {
                let n = norm(a);
                if n == T::zero() {
                    vec![T::zero(); d]
                } else {
                    a.iter().map(|&v| *radius * v / n).collect()
                }
            }
            SetDescriptor::L1Ball { radius } => {
                let mut z = vec![T::zero(); d];
                let mut best = 0;
                for j in 1..d {
                    if a[j].abs() > a[best].abs() {
                        best = j;
                    }
                }
                if d > 0 && a[best] != T::zero() {
                    z[best] = *radius * a[best].signum();
                }
                z
            }
            SetDescriptor::LinfBall { radius } => a
                .iter()
                .map(|&v| if v == T::zero() { T::zero() } else { *radius * v.signum() })
                .collect(),
            SetDescriptor::Box { lo, hi } => a
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&v, (&l, &h))| {
                    if v > T::zero() {
                        h
                    } else if v < T::zero() {
                        l
                    } else {
                        T::zero().max(l).min(h)
                    }
                })
                .collect(),
            SetDescriptor::Singleton { point } => point.clone(),
            SetDescriptor::Product { blocks } => {
                let mut out = Vec::with_capacity(d);
                let mut off = 0;
                for (k, s) in blocks {
                    out.extend(s.argmax_linear(&a[off..off + k])?);
                    off += k;
                }
                out
            }
            SetDescriptor::Intersection { .. } => return budgeted_argmax(&self.factors(), a),
        })
    }
}

/// Greedy LP over {box or ℓ∞ ball} ∩ Γ·ℓ1 ball (a fractional knapsack).
fn budgeted_argmax<T: Real>(factors: &[SetDescriptor<T>], a: &[T]) -> Result<Vec<T>> {
    let d = a.len();
    let mut lo = vec![T::neg_infinity(); d];
    let mut hi = vec![T::infinity(); d];
    let mut budget = T::infinity();
    for f in factors {
        match f {
            SetDescriptor::Box { lo: l, hi: h } => {
                for j in 0..d {
                    lo[j] = lo[j].max(l[j]);
                    hi[j] = hi[j].min(h[j]);
                }
            }
            SetDescriptor::LinfBall { radius } => {
                for j in 0..d {
                    lo[j] = lo[j].max(-*radius);
                    hi[j] = hi[j].min(*radius);
                }
            }
            SetDescriptor::L1Ball { radius } => budget = budget.min(*radius),
            _ => {
                return Err(RspError::UnsupportedSet(
                    "linear maximization over this intersection (only box/linf with an l1 budget)".into(),
                ))
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[j].abs().partial_cmp(&a[i].abs()).unwrap_or(std::cmp::Ordering::Equal));
    let mut z = vec![T::zero(); d];
    for &j in &order {
        if a[j] == T::zero() || budget <= T::zero() {
            break;
        }
        let cap = if a[j] > T::zero() { hi[j] } else { -lo[j] };
        if !cap.is_finite() && !budget.is_finite() {
            return Err(RspError::InvalidSet("unbounded intersection".into()));
        }
        let step = cap.min(budget).max(T::zero());
        z[j] = step * a[j].signum();
        budget -= step;
    }
    Ok(z)
}

/// A random point of the set: uniform in a bounding cube, then projected.
pub fn sample_point<T: Real, R: rand::Rng + ?Sized>(s: &SetDescriptor<T>, d: usize, rng: &mut R) -> Result<Vec<T>> {
    let rad = s.radius(d).to_f64_lossy();
    let rad = if rad.is_finite() && rad > 0.0 { rad } else { 1.0 };
    let y: Vec<T> = (0..d).map(|_| T::lit(rng.gen_range(-1.25..1.25) * rad)).collect();
    match s {
        SetDescriptor::Intersection { .. } => project_intersection(s, &y, T::lit(1e-12), 10_000),
        _ => s.project(&y),
    }
}

/// Projection onto a simple (non-intersection, non-product) set.
pub fn project_simple<T: Real>(s: &SetDescriptor<T>, y: &[T]) -> Result<Vec<T>> {
    Ok(match s {
        SetDescriptor::L2Ball { radius } => {
            let n = norm(y);
            if n <= *radius {
                y.to_vec()
            } else {
                let f = *radius / n;
                y.iter().map(|&v| v * f).collect()
            }
        }
        SetDescriptor::L1Ball { radius } => project_l1(y, *radius),
        SetDescriptor::LinfBall { radius } => y.iter().map(|&v| v.max(-*radius).min(*radius)).collect(),
        SetDescriptor::Box { lo, hi } => {
            if lo.len() != y.len() {
                return Err(RspError::DimensionMismatch(format!("box dim {} vs point dim {}", lo.len(), y.len())));
            }
            y.iter().zip(lo.iter().zip(hi)).map(|(&v, (&l, &h))| v.max(l).min(h)).collect()
        }
        SetDescriptor::Singleton { point } => point.clone(),
        SetDescriptor::Intersection { .. } => {
            return Err(RspError::UnsupportedSet("intersection needs the splitting lifter".into()))
        }
        SetDescriptor::Product { .. } => return s.project(y),
    })
}

/// ℓ1-ball projection by sorted soft thresholding.
fn project_l1<T: Real>(y: &[T], radius: T) -> Vec<T> {
    if norm1(y) <= radius {
        return y.to_vec();
    }
    let theta = l1_threshold(y, radius);
    y.iter().map(|&v| v.signum() * (v.abs() - theta).max(T::zero())).collect()
}

/// Threshold θ with Σ max(|y_j| − θ, 0) = radius (assumes ‖y‖₁ > radius).
pub(crate) fn l1_threshold<T: Real>(y: &[T], radius: T) -> T {
    let mut a: Vec<T> = y.iter().map(|v| v.abs()).collect();
    a.sort_by(|p, q| q.partial_cmp(p).unwrap_or(std::cmp::Ordering::Equal));
    let mut cum = T::zero();
    let mut theta = T::zero();
    for (j, &v) in a.iter().enumerate() {
        cum += v;
        let t = (cum - radius) / T::lit((j + 1) as f64);
        if v > t {
            theta = t;
        } else {
            break;
        }
    }
    theta.max(T::zero())
}

/// Projection onto an intersection of simple sets by Dykstra's algorithm.
pub fn project_intersection<T: Real>(s: &SetDescriptor<T>, y: &[T], tol: T, max_iter: usize) -> Result<Vec<T>> {
    let sets = s.factors();
    if sets.len() == 1 {
        return sets[0].project(y);
    }
    let n = y.len();
    let mut x = y.to_vec();
    let mut incr = vec![vec![T::zero(); n]; sets.len()];
    for _ in 0..max_iter {
        let prev = x.clone();
        for (k, set) in sets.iter().enumerate() {
            let shifted: Vec<T> = x.iter().zip(&incr[k]).map(|(&a, &b)| a + b).collect();
            let p = set.project(&shifted)?;
            for j in 0..n {
                incr[k][j] = shifted[j] - p[j];
            }
            x = p;
        }
        if crate::linalg::dist(&x, &prev) <= tol && sets.iter().all(|t| t.contains(&x, tol.sqrt())) {
            return Ok(x);
        }
    }
    Err(RspError::NoConvergence("Dykstra projection".into()))
}
