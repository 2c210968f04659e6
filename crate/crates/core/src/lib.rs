//! Robust convex programs min cᵀx s.t. sup_{z∈Zⁱ} gᵢ(x,z) ≤ 0, Ax = b, x ∈ X,
//! solved through the perspective-lifted convex-concave Lagrangian.
//!
//! The numerical core is generic over [`Real`]; the aliases below fix f64.

pub mod cone;
pub mod error;
pub mod io;
pub mod linalg;
pub mod papc;
pub mod perspective;
pub mod problem;
pub mod scalar;
pub mod sets;
pub mod sgsp;
pub mod split;
pub mod trace;

pub use error::{Result, RspError};
pub use scalar::Real;

pub type Problem = problem::RobustProblem<f64>;
pub type Set = sets::SetDescriptor<f64>;
pub type Mat = linalg::Matrix<f64>;
pub type Lifted = cone::LiftedVar<f64>;
pub type Bounds = perspective::DualBounds<f64>;
pub type Trace = trace::IterTrace<f64>;
pub type Lifting = split::LiftedProblem<f64>;
pub type Compiled = papc::CompiledBiaffine<f64>;
