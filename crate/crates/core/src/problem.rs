//! Robust problem data: objective, domain, uncertain constraints and equalities.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, RspError};
use crate::linalg::{dot, sigma_min, singular_values, Matrix};
use crate::scalar::Real;
use crate::sets::{sample_point, SetDescriptor};

pub type EvalFn<T> = Arc<dyn Fn(&[T], &[T]) -> T + Send + Sync>;
pub type GradFn<T> = Arc<dyn Fn(&[T], &[T]) -> Vec<T> + Send + Sync>;
/// x ↦ (argmax_z g(x,z), max value).
pub type PessimizeFn<T> = Arc<dyn Fn(&[T]) -> (Vec<T>, T) + Send + Sync>;
/// z ↦ the function x ↦ g(x, z) as a quadratic.
pub type CutFn<T> = Arc<dyn Fn(&[T]) -> ScenarioCut<T> + Send + Sync>;

/// x ↦ ½xᵀHx + aᵀx + b0 (H absent means affine).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioCut<T> {
    pub hess: Option<Matrix<T>>,
    pub a: Vec<T>,
    pub b0: T,
}

impl<T: Real> ScenarioCut<T> {
    pub fn eval(&self, x: &[T]) -> T {
        let mut v = dot(&self.a, x) + self.b0;
        if let Some(h) = &self.hess {
            v += T::lit(0.5) * dot(x, &h.matvec(x));
        }
        v
    }

    pub fn grad(&self, x: &[T]) -> Vec<T> {
        match &self.hess {
            Some(h) => h.matvec(x).iter().zip(&self.a).map(|(&p, &q)| p + q).collect(),
            None => self.a.clone(),
        }
    }
}

/// Black-box constraint g(x, z), convex in x and concave in z.
#[derive(Clone)]
pub struct GeneralOracle<T> {
    pub x_dim: usize,
    pub z_dim: usize,
    pub eval: EvalFn<T>,
    /// An element of ∂ₓg(x, z).
    pub subgrad_x: GradFn<T>,
    /// An element of ∂_z(−g)(x, z).
    pub subgrad_negz: GradFn<T>,
    /// Exact maximization over the constraint's uncertainty set.
    pub pessimize: Option<PessimizeFn<T>>,
    pub scenario_cut: Option<CutFn<T>>,
}

impl<T> fmt::Debug for GeneralOracle<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralOracle")
            .field("x_dim", &self.x_dim)
            .field("z_dim", &self.z_dim)
            .field("pessimize", &self.pessimize.is_some())
            .finish()
    }
}

impl<T: Real> GeneralOracle<T> {
    pub fn new(
        x_dim: usize,
        z_dim: usize,
        eval: impl Fn(&[T], &[T]) -> T + Send + Sync + 'static,
        subgrad_x: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static,
        subgrad_negz: impl Fn(&[T], &[T]) -> Vec<T> + Send + Sync + 'static,
    ) -> Self {
        GeneralOracle {
            x_dim,
            z_dim,
            eval: Arc::new(eval),
            subgrad_x: Arc::new(subgrad_x),
            subgrad_negz: Arc::new(subgrad_negz),
            pessimize: None,
            scenario_cut: None,
        }
    }

    pub fn with_pessimizer(mut self, f: impl Fn(&[T]) -> (Vec<T>, T) + Send + Sync + 'static) -> Self {
        self.pessimize = Some(Arc::new(f));
        self
    }

    pub fn with_scenario_cut(mut self, f: impl Fn(&[T]) -> ScenarioCut<T> + Send + Sync + 'static) -> Self {
        self.scenario_cut = Some(Arc::new(f));
        self
    }
}

/// g(x, z) = xᵀQz + dᵀx + qᵀz + γ.
#[derive(Debug, Clone, PartialEq)]
pub struct BiaffineConstraint<T> {
    /// n × d
    pub q_mat: Matrix<T>,
    pub d: Vec<T>,
    pub q: Vec<T>,
    pub gamma: T,
}

impl<T: Real> BiaffineConstraint<T> {
    pub fn eval(&self, x: &[T], z: &[T]) -> T {
        dot(x, &self.q_mat.matvec(z)) + dot(&self.d, x) + dot(&self.q, z) + self.gamma
    }

    /// Qz + d
    pub fn grad_x(&self, z: &[T]) -> Vec<T> {
        self.q_mat.matvec(z).iter().zip(&self.d).map(|(&a, &b)| a + b).collect()
    }

    /// −(Qᵀx + q)
    pub fn grad_negz(&self, x: &[T]) -> Vec<T> {
        self.q_mat.tmatvec(x).iter().zip(&self.q).map(|(&a, &b)| -(a + b)).collect()
    }
}

#[derive(Debug, Clone)]
pub enum Oracle<T> {
    General(GeneralOracle<T>),
    Biaffine(BiaffineConstraint<T>),
}

/// sup_{z ∈ zset} g(x, z) ≤ 0.
#[derive(Debug, Clone)]
pub struct Constraint<T> {
    pub oracle: Oracle<T>,
    pub zset: SetDescriptor<T>,
}

fn check_finite<T: Real>(v: T, what: &str) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(RspError::OracleFailure(format!("{what} returned {v}")))
    }
}

fn check_finite_vec<T: Real>(v: Vec<T>, len: usize, what: &str) -> Result<Vec<T>> {
    if v.len() != len {
        return Err(RspError::OracleFailure(format!("{what} returned length {} (expected {len})", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(RspError::OracleFailure(format!("{what} returned a non-finite entry")));
    }
    Ok(v)
}

impl<T: Real> Constraint<T> {
    pub fn biaffine(q_mat: Matrix<T>, d: Vec<T>, q: Vec<T>, gamma: T, zset: SetDescriptor<T>) -> Self {
        Constraint { oracle: Oracle::Biaffine(BiaffineConstraint { q_mat, d, q, gamma }), zset }
    }

    pub fn general(oracle: GeneralOracle<T>, zset: SetDescriptor<T>) -> Self {
        Constraint { oracle: Oracle::General(oracle), zset }
    }

    pub fn x_dim(&self) -> usize {
        match &self.oracle {
            Oracle::General(g) => g.x_dim,
            Oracle::Biaffine(b) => b.q_mat.rows,
        }
    }

    pub fn z_dim(&self) -> usize {
        match &self.oracle {
            Oracle::General(g) => g.z_dim,
            Oracle::Biaffine(b) => b.q_mat.cols,
        }
    }

    pub fn is_biaffine(&self) -> bool {
        matches!(self.oracle, Oracle::Biaffine(_))
    }

    fn check_dims(&self, x: &[T], z: &[T]) -> Result<()> {
        if x.len() != self.x_dim() || z.len() != self.z_dim() {
            return Err(RspError::DimensionMismatch(format!(
                "constraint expects (x, z) in R^{} x R^{}, got R^{} x R^{}",
                self.x_dim(),
                self.z_dim(),
                x.len(),
                z.len()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: &[T], z: &[T]) -> Result<T> {
        self.check_dims(x, z)?;
        match &self.oracle {
            Oracle::General(g) => check_finite((g.eval)(x, z), "eval"),
            Oracle::Biaffine(b) => Ok(b.eval(x, z)),
        }
    }

    pub fn subgrad_x(&self, x: &[T], z: &[T]) -> Result<Vec<T>> {
        self.check_dims(x, z)?;
        match &self.oracle {
            Oracle::General(g) => check_finite_vec((g.subgrad_x)(x, z), self.x_dim(), "subgrad_x"),
            Oracle::Biaffine(b) => Ok(b.grad_x(z)),
        }
    }

    pub fn subgrad_negz(&self, x: &[T], z: &[T]) -> Result<Vec<T>> {
        self.check_dims(x, z)?;
        match &self.oracle {
            Oracle::General(g) => check_finite_vec((g.subgrad_negz)(x, z), self.z_dim(), "subgrad_negz"),
            Oracle::Biaffine(b) => Ok(b.grad_negz(x)),
        }
    }

    /// (argmax_z g(x, z), f(x) = max value). Exact for biaffine constraints over
    /// supported sets; general oracles need a pessimization callback.
    pub fn pessimize(&self, x: &[T], index: usize) -> Result<(Vec<T>, T)> {
        if x.len() != self.x_dim() {
            return Err(RspError::DimensionMismatch(format!("pessimize: x of dim {}", x.len())));
        }
        match &self.oracle {
            Oracle::Biaffine(b) => {
                let a: Vec<T> = b.q_mat.tmatvec(x).iter().zip(&b.q).map(|(&p, &q)| p + q).collect();
                let z = self.zset.argmax_linear(&a)?;
                let v = b.eval(x, &z);
                Ok((z, v))
            }
            Oracle::General(g) => {
                let f = g.pessimize.as_ref().ok_or(RspError::RequiresPessimizer(index))?;
                let (z, v) = f(x);
                Ok((check_finite_vec(z, self.z_dim(), "pessimize")?, check_finite(v, "pessimize")?))
            }
        }
    }

    /// The function x ↦ g(x, z) for a fixed scenario z, when available.
    pub fn scenario_cut(&self, z: &[T]) -> Option<ScenarioCut<T>> {
        match &self.oracle {
            Oracle::Biaffine(b) => Some(ScenarioCut { hess: None, a: b.grad_x(z), b0: dot(&b.q, z) + b.gamma }),
            Oracle::General(g) => g.scenario_cut.as_ref().map(|f| f(z)),
        }
    }

    /// Re-expresses the constraint on a larger vector whose slice
    /// `offset..offset + n` is the original x.
    pub fn embed(&self, n_new: usize, offset: usize) -> Constraint<T> {
        let n = self.x_dim();
        assert!(offset + n <= n_new);
        let oracle = match &self.oracle {
            Oracle::Biaffine(b) => {
                let q_mat = Matrix::from_fn(n_new, b.q_mat.cols, |i, j| {
                    if i >= offset && i < offset + n {
                        b.q_mat[(i - offset, j)]
                    } else {
                        T::zero()
                    }
                });
                let mut d = vec![T::zero(); n_new];
                d[offset..offset + n].copy_from_slice(&b.d);
                Oracle::Biaffine(BiaffineConstraint { q_mat, d, q: b.q.clone(), gamma: b.gamma })
            }
            Oracle::General(g) => {
                let slice = move |x: &[T]| x[offset..offset + n].to_vec();
                let pad = move |v: Vec<T>| {
                    let mut out = vec![T::zero(); n_new];
                    out[offset..offset + n].copy_from_slice(&v);
                    out
                };
                let (e, sx, sz) = (g.eval.clone(), g.subgrad_x.clone(), g.subgrad_negz.clone());
                let mut o = GeneralOracle::new(
                    n_new,
                    g.z_dim,
                    move |x, z| e(&slice(x), z),
                    move |x, z| pad(sx(&slice(x), z)),
                    move |x, z| sz(&slice(x), z),
                );
                if let Some(p) = g.pessimize.clone() {
                    o = o.with_pessimizer(move |x| p(&slice(x)));
                }
                if let Some(cf) = g.scenario_cut.clone() {
                    o = o.with_scenario_cut(move |z| {
                        let cut = cf(z);
                        let hess = cut.hess.map(|h| {
                            Matrix::from_fn(n_new, n_new, |i, j| {
                                if i >= offset && i < offset + n && j >= offset && j < offset + n {
                                    h[(i - offset, j - offset)]
                                } else {
                                    T::zero()
                                }
                            })
                        });
                        ScenarioCut { hess, a: pad(cut.a), b0: cut.b0 }
                    });
                }
                Oracle::General(o)
            }
        };
        Constraint { oracle, zset: self.zset.clone() }
    }

    /// g(x, z) + aᵀx.
    pub fn plus_linear(&self, a: &[T]) -> Constraint<T> {
        assert_eq!(a.len(), self.x_dim());
        let oracle = match &self.oracle {
            Oracle::Biaffine(b) => {
                let mut nb = b.clone();
                for (di, &ai) in nb.d.iter_mut().zip(a) {
                    *di += ai;
                }
                Oracle::Biaffine(nb)
            }
            Oracle::General(g) => {
                let a: Arc<Vec<T>> = Arc::new(a.to_vec());
                let (e, sx) = (g.eval.clone(), g.subgrad_x.clone());
                let (a1, a2) = (a.clone(), a.clone());
                let mut o = GeneralOracle {
                    eval: Arc::new(move |x: &[T], z: &[T]| e(x, z) + dot(&a1, x)),
                    subgrad_x: Arc::new(move |x: &[T], z: &[T]| {
                        sx(x, z).iter().zip(a2.iter()).map(|(&p, &q)| p + q).collect()
                    }),
                    pessimize: None,
                    scenario_cut: None,
                    ..g.clone()
                };
                if let Some(p) = g.pessimize.clone() {
                    let a3 = a.clone();
                    o.pessimize = Some(Arc::new(move |x: &[T]| {
                        let (z, v) = p(x);
                        (z, v + dot(&a3, x))
                    }));
                }
                if let Some(cf) = g.scenario_cut.clone() {
                    let a4 = a.clone();
                    o.scenario_cut = Some(Arc::new(move |z: &[T]| {
                        let mut cut = cf(z);
                        for (ci, &ai) in cut.a.iter_mut().zip(a4.iter()) {
                            *ci += ai;
                        }
                        cut
                    }));
                }
                Oracle::General(o)
            }
        };
        Constraint { oracle, zset: self.zset.clone() }
    }

    /// Substitutes z = z0 + z' so that the new uncertainty set contains the
    /// origin. Only sets that carry a position (box, singleton, intersections
    /// of those with origin-centred balls excluded) can be translated.
    pub fn translated(&self, z0: &[T]) -> Result<Constraint<T>> {
        let shift_set = |s: &SetDescriptor<T>| -> Result<SetDescriptor<T>> {
            match s {
                SetDescriptor::Box { lo, hi } => Ok(SetDescriptor::Box {
                    lo: lo.iter().zip(z0).map(|(&l, &c)| l - c).collect(),
                    hi: hi.iter().zip(z0).map(|(&h, &c)| h - c).collect(),
                }),
                SetDescriptor::Singleton { point } => {
                    Ok(SetDescriptor::Singleton { point: point.iter().zip(z0).map(|(&p, &c)| p - c).collect() })
                }
                _ => Err(RspError::UnsupportedSet("only boxes and singletons can be translated".into())),
            }
        };
        let zset = match &self.zset {
            SetDescriptor::Intersection { sets } => {
                SetDescriptor::Intersection { sets: sets.iter().map(shift_set).collect::<Result<_>>()? }
            }
            s => shift_set(s)?,
        };
        let oracle = match &self.oracle {
            Oracle::Biaffine(b) => {
                let mut nb = b.clone();
                let qz = b.q_mat.matvec(z0);
                for (di, &v) in nb.d.iter_mut().zip(&qz) {
                    *di += v;
                }
                nb.gamma += dot(&b.q, z0);
                Oracle::Biaffine(nb)
            }
            Oracle::General(g) => {
                let c: Arc<Vec<T>> = Arc::new(z0.to_vec());
                let shift = move |z: &[T], c: &[T]| -> Vec<T> { z.iter().zip(c).map(|(&a, &b)| a + b).collect() };
                let (e, sx, sz) = (g.eval.clone(), g.subgrad_x.clone(), g.subgrad_negz.clone());
                let (c1, c2, c3) = (c.clone(), c.clone(), c.clone());
                let mut o = GeneralOracle::new(
                    g.x_dim,
                    g.z_dim,
                    move |x, z| e(x, &shift(z, &c1)),
                    move |x, z| sx(x, &shift(z, &c2)),
                    move |x, z| sz(x, &shift(z, &c3)),
                );
                if let Some(p) = g.pessimize.clone() {
                    let c4 = c.clone();
                    o = o.with_pessimizer(move |x| {
                        let (z, v) = p(x);
                        (z.iter().zip(c4.iter()).map(|(&a, &b)| a - b).collect(), v)
                    });
                }
                if let Some(cf) = g.scenario_cut.clone() {
                    let c5 = c.clone();
                    o = o.with_scenario_cut(move |z| cf(&shift(z, &c5)));
                }
                Oracle::General(o)
            }
        };
        Ok(Constraint { oracle, zset })
    }
}

/// Convenience wrapper mirroring the module's operation list.
pub fn eval_constraint<T: Real>(c: &Constraint<T>, x: &[T], z: &[T]) -> Result<T> {
    c.eval(x, z)
}

/// min cᵀx s.t. sup_{z∈Zⁱ} gᵢ(x,z) ≤ 0, Ax = b, x ∈ X.
#[derive(Debug, Clone)]
pub struct RobustProblem<T> {
    pub c: Vec<T>,
    pub domain: SetDescriptor<T>,
    pub constraints: Vec<Constraint<T>>,
    /// r × n
    pub eq_a: Matrix<T>,
    pub eq_b: Vec<T>,
}

impl<T: Real> RobustProblem<T> {
    pub fn new(c: Vec<T>, domain: SetDescriptor<T>, constraints: Vec<Constraint<T>>) -> Self {
        let n = c.len();
        RobustProblem { c, domain, constraints, eq_a: Matrix::zeros(0, n), eq_b: Vec::new() }
    }

    pub fn with_equalities(mut self, a: Matrix<T>, b: Vec<T>) -> Self {
        self.eq_a = a;
        self.eq_b = b;
        self
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn r(&self) -> usize {
        self.eq_b.len()
    }

    pub fn objective(&self, x: &[T]) -> T {
        dot(&self.c, x)
    }

    /// fᵢ(x) for every constraint.
    pub fn constraint_values(&self, x: &[T]) -> Result<Vec<T>> {
        self.constraints.iter().enumerate().map(|(i, c)| c.pessimize(x, i).map(|p| p.1)).collect()
    }

    /// Ax − b
    pub fn eq_residual(&self, x: &[T]) -> Vec<T> {
        self.eq_a.matvec(x).iter().zip(&self.eq_b).map(|(&a, &b)| a - b).collect()
    }

    /// Σᵢ[fᵢ(x)]₊ + ‖Ax − b‖.
    pub fn infeasibility(&self, x: &[T]) -> Result<T> {
        let pos: T = self.constraint_values(x)?.iter().map(|&f| f.max(T::zero())).sum();
        Ok(pos + crate::linalg::norm(&self.eq_residual(x)))
    }

    /// The domain's radius max_{x∈X} ‖x‖.
    pub fn domain_radius(&self) -> T {
        self.domain.radius(self.n())
    }
}

/// Outcome of [`validate_problem`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    /// σ_min(A), or None when r = 0.
    pub sigma_min: Option<f64>,
    pub sigma_max: Option<f64>,
    pub origin_in_z: Vec<bool>,
    /// Randomized Jensen-midpoint spot check for general oracles (advisory only).
    pub convexity_spot_check: Vec<Option<bool>>,
    pub ok: bool,
}

/// Checks dimensions, the rank of A (relative tolerance) and 0 ∈ Zⁱ.
pub fn validate_problem<T: Real>(p: &RobustProblem<T>, rank_tol: T) -> Result<ValidationReport> {
    let n = p.n();
    let r = p.r();
    let mism = |m: String| Err(RspError::DimensionMismatch(m));
    if p.eq_a.rows != r || (r > 0 && p.eq_a.cols != n) {
        return mism(format!("A is {}x{}, b has {} entries, n = {n}", p.eq_a.rows, p.eq_a.cols, r));
    }
    p.domain.validate(n)?;
    for (i, c) in p.constraints.iter().enumerate() {
        if c.x_dim() != n {
            return mism(format!("constraint {i} has x-dimension {} (n = {n})", c.x_dim()));
        }
        if let Oracle::Biaffine(b) = &c.oracle {
            if b.d.len() != n || b.q.len() != b.q_mat.cols {
                return mism(format!("constraint {i}: biaffine data has inconsistent sizes"));
            }
        }
        c.zset.validate(c.z_dim())?;
    }
    let (mut smin, mut smax) = (None, None);
    if r > 0 {
        let sv = singular_values(&p.eq_a);
        let hi = sv.first().copied().unwrap_or(T::zero());
        let lo = if r > n { T::zero() } else { sigma_min(&p.eq_a) };
        smin = Some(lo.to_f64_lossy());
        smax = Some(hi.to_f64_lossy());
        if !(lo > rank_tol * hi.max(T::one())) {
            return Err(RspError::RankDeficient { sigma_min: lo.to_f64_lossy() });
        }
    }
    let mut origin = Vec::with_capacity(p.m());
    for (i, c) in p.constraints.iter().enumerate() {
        let ok = c.zset.contains(&vec![T::zero(); c.z_dim()], T::lit(1e-12));
        if !ok {
            return Err(RspError::OriginNotInZ(i));
        }
        origin.push(ok);
    }
    let spot = p
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| match c.oracle {
            Oracle::General(_) => Some(spot_check_convex_concave(p, c, 64, i as u64).unwrap_or(false)),
            Oracle::Biaffine(_) => None,
        })
        .collect();
    Ok(ValidationReport {
        n,
        m: p.m(),
        r,
        sigma_min: smin,
        sigma_max: smax,
        origin_in_z: origin,
        convexity_spot_check: spot,
        ok: true,
    })
}

/// Jensen-midpoint checks: convex in x, concave in z, at random points.
pub fn spot_check_convex_concave<T: Real>(p: &RobustProblem<T>, c: &Constraint<T>, samples: usize, seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.n();
    let d = c.z_dim();
    let half = T::lit(0.5);
    for _ in 0..samples {
        let x1 = sample_point(&p.domain, n, &mut rng)?;
        let x2 = sample_point(&p.domain, n, &mut rng)?;
        let z1 = sample_point(&c.zset, d, &mut rng)?;
        let z2 = sample_point(&c.zset, d, &mut rng)?;
        let xm: Vec<T> = x1.iter().zip(&x2).map(|(&a, &b)| half * (a + b)).collect();
        let zm: Vec<T> = z1.iter().zip(&z2).map(|(&a, &b)| half * (a + b)).collect();
        let gx = [c.eval(&x1, &z1)?, c.eval(&x2, &z1)?, c.eval(&xm, &z1)?];
        let gz = [c.eval(&x1, &z1)?, c.eval(&x1, &z2)?, c.eval(&x1, &zm)?];
        let tol = T::lit(1e-9) * (T::one() + gx[0].abs() + gx[1].abs() + gz[1].abs());
        if gx[2] > half * (gx[0] + gx[1]) + tol || gz[2] < half * (gz[0] + gz[1]) - tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Epigraph form of an uncertain objective: variables (x, t), objective t,
/// constraint 0 becomes g₀(x,z) + cᵀx − t ≤ 0 and the remaining constraints
/// are carried over. The domain becomes X × [t_lo, t_hi].
pub fn epigraph_lift<T: Real>(objective: &Constraint<T>, p: &RobustProblem<T>, t_lo: T, t_hi: T) -> Result<RobustProblem<T>> {
    let n = p.n();
    if objective.x_dim() != n {
        return Err(RspError::DimensionMismatch(format!("objective oracle has x-dimension {}", objective.x_dim())));
    }
    if !(t_lo <= t_hi) {
        return Err(RspError::InvalidSet("epigraph bounds need t_lo <= t_hi".into()));
    }
    let mut lin = p.c.clone();
    lin.push(-T::one());
    let obj = objective.embed(n + 1, 0).plus_linear(&lin);
    let mut constraints = vec![obj];
    constraints.extend(p.constraints.iter().map(|c| c.embed(n + 1, 0)));
    let mut c = vec![T::zero(); n + 1];
    c[n] = T::one();
    let domain = SetDescriptor::Product {
        blocks: vec![(n, p.domain.clone()), (1, SetDescriptor::interval(t_lo, t_hi))],
    };
    let eq_a = Matrix::from_fn(p.r(), n + 1, |i, j| if j < n { p.eq_a[(i, j)] } else { T::zero() });
    Ok(RobustProblem { c, domain, constraints, eq_a, eq_b: p.eq_b.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_biaffine(q: f64, d: f64, qq: f64, gamma: f64) -> Constraint<f64> {
        Constraint::biaffine(Matrix::from_rows(&[vec![q]]), vec![d], vec![qq], gamma, SetDescriptor::interval(-1.0, 1.0))
    }

    #[test]
    fn eval_examples() {
        assert_eq!(scalar_biaffine(0.0, 0.0, 0.0, -1.0).eval(&[5.0], &[0.3]).unwrap(), -1.0);
        assert_eq!(scalar_biaffine(1.0, 0.0, 0.0, 0.0).eval(&[2.0], &[3.0]).unwrap(), 6.0);
        assert!(scalar_biaffine(1.0, 0.0, 0.0, 0.0).eval(&[2.0, 1.0], &[3.0]).is_err());
    }

    #[test]
    fn rank_checks() {
        let p = RobustProblem::new(vec![1.0, 0.0], SetDescriptor::l2(1.0), vec![]);
        let ok = p.clone().with_equalities(Matrix::identity(2), vec![0.0, 0.0]);
        let rep = validate_problem(&ok, 1e-8).unwrap();
        assert!((rep.sigma_min.unwrap() - 1.0).abs() < 1e-12 && rep.ok);
        let bad = p.with_equalities(Matrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]), vec![0.0, 0.0]);
        assert!(matches!(validate_problem(&bad, 1e-8), Err(RspError::RankDeficient { .. })));
    }

    #[test]
    fn origin_check_and_translation() {
        let c: Constraint<f64> = Constraint::biaffine(
            Matrix::from_rows(&[vec![1.0]]),
            vec![0.0],
            vec![1.0],
            0.0,
            SetDescriptor::interval(1.0, 2.0),
        );
        let p = RobustProblem::new(vec![1.0], SetDescriptor::interval(-1.0, 1.0), vec![c.clone()]);
        assert!(matches!(validate_problem(&p, 1e-8), Err(RspError::OriginNotInZ(0))));
        let t = c.translated(&[1.5]).unwrap();
        let p2 = RobustProblem::new(vec![1.0], SetDescriptor::interval(-1.0, 1.0), vec![t.clone()]);
        assert!(validate_problem(&p2, 1e-8).is_ok());
        for &x in &[-0.7, 0.2, 0.9] {
            let (_, f) = c.pessimize(&[x], 0).unwrap();
            let (_, ft) = t.pessimize(&[x], 0).unwrap();
            assert!((f - ft).abs() < 1e-14);
        }
    }

    #[test]
    fn epigraph_counts() {
        let p = RobustProblem::<f64>::new(vec![1.0], SetDescriptor::interval(-1.0, 1.0), vec![]);
        let obj = scalar_biaffine(0.0, 0.0, 0.0, 0.0);
        let lifted = epigraph_lift(&obj, &p, -2.0, 2.0).unwrap();
        assert_eq!(lifted.m(), 1);
        assert_eq!(lifted.n(), 2);
        // certain objective: x − t ≤ 0
        let (_, v) = lifted.constraints[0].pessimize(&[0.5, 0.25], 0).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }
}
