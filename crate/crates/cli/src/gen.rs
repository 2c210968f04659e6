use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsp_core::io::{save_instance, Instance};
use rsp_core::linalg::{norm, op_norm, Matrix};
use rsp_core::problem::{Constraint, RobustProblem};
use rsp_core::sets::SetDescriptor;
use rsp_core::{Result, RspError};
use rsp_qpbench::instance::{gen_instance, save_qp};

use crate::{resolve, GenArgs, Kind, EXIT_OK};

/// min cᵀx over ‖x‖∞ ≤ 1 s.t. xᵀQᵢz + dᵢᵀx − ½ ≤ 0 for all ‖z‖ ≤ 1, with
/// uniform entries and Qᵢ scaled by 1/√n. x = 0 is strictly feasible.
pub fn random_lp(n: usize, k: usize, m: usize, seed: u64) -> Result<Instance> {
    if n == 0 || k == 0 {
        return Err(RspError::DimensionMismatch("n and K must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (n as f64).sqrt();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let mut cons = Vec::with_capacity(m);
    for _ in 0..m {
        let q = Matrix::from_fn(n, k, |_, _| scale * rng.gen_range(-1.0..=1.0));
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        cons.push(Constraint::biaffine(q, d, vec![0.0; k], -0.5, SetDescriptor::l2(1.0)));
    }
    let problem = RobustProblem::new(c, SetDescriptor::linf(1.0), cons);
    Ok(Instance { problem, x0: Some(vec![0.0; n]) })
}

pub fn cmd_gen(wd: &Path, a: &GenArgs) -> Result<i32> {
    let out = resolve(wd, &a.out);
    match a.kind {
        Kind::Qp => {
            let l = a.l.ok_or_else(|| RspError::Parse("--L is required for QP instances".into()))?;
            let inst = gen_instance(a.n, a.k, l, a.m, a.seed)?;
            save_qp(&inst, &out)?;
            println!("wrote {}", out.display());
            for i in 0..=inst.m {
                let total: f64 = inst.p[i].iter().map(|p| p.data.iter().sum::<f64>()).sum();
                println!("i={i} |P|_2={:.12} |b|={:.12} sum(P)={total:.12e}", op_norm(&inst.stacked(i)), norm(&inst.b[i]));
            }
        }
        Kind::Lp => {
            let inst = random_lp(a.n, a.k, a.m, a.seed)?;
            save_instance(&inst, &out)?;
            println!("wrote {}", out.display());
            println!("|c|={:.12} m={}", norm(&inst.problem.c), inst.problem.m());
        }
    }
    Ok(EXIT_OK)
}
