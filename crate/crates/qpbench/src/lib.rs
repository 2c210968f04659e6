//! The robust quadratic program benchmark: random instances, concavification
//! and trust-region pessimization, the cutting-plane, FO-pess and OCO
//! baselines, SGSP on the lifted problem, and a parallel bench runner.

pub mod bench;
pub mod concave;
pub mod cutting;
pub mod instance;
pub mod master;
pub mod metrics;
pub mod model;
pub mod online;
pub mod saddle;
pub mod trs;

pub use concave::{concavify, ConcaveQuadratic};
pub use cutting::{cutting_planes, lower_bound_from_cuts, CpConfig, CpResult, ScenarioSet};
pub use instance::{gen_instance, QpInstance};
pub use master::{BarrierMaster, MasterSolver};
pub use metrics::{feasibility_gap, optimality_gap_ratio};
pub use model::{QpModel, RobustModel, UncertainModel};
pub use online::{fo_pess, oco_ogd, OnlineConfig};
pub use rsp_core::linalg::lambda_max;
pub use trs::{trs_solve, TrsSolution};
