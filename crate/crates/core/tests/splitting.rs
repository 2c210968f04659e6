mod common;

use common::{box_rows, l1_rows, project_polytope, RefPapc};
use rsp_core::cone::LiftedVar;
use rsp_core::linalg::Matrix;
use rsp_core::papc::{compile_biaffine, papc_run, papc_run_split, PapcConfig, PapcStart};
use rsp_core::perspective::{certificate_at, dual_bounds, perspective_value, uncertainty_radii, DualBounds};
use rsp_core::problem::{Constraint, RobustProblem};
use rsp_core::sets::SetDescriptor;
use rsp_core::sgsp::{sgsp_run, sgsp_run_split, SaddleState, SgspConfig, StepPolicy};
use rsp_core::split::*;
use rsp_core::RspError;
use std::sync::OnceLock;

fn budgeted(gamma: f64) -> SetDescriptor<f64> {
    SetDescriptor::Intersection { sets: vec![SetDescriptor::linf(1.0), SetDescriptor::l1(gamma)] }
}

/// min −x₁ − x₂ s.t. ½xᵀz + x₁ + x₂ − 1 ≤ 0 for z in `zset`, ‖x‖∞ ≤ 1.
fn lp(zset: SetDescriptor<f64>) -> RobustProblem<f64> {
    let c = Constraint::biaffine(Matrix::from_diag(&[0.5, 0.5]), vec![1.0, 1.0], vec![0.0, 0.0], -1.0, zset);
    RobustProblem::new(vec![-1.0, -1.0], SetDescriptor::linf(1.0), vec![c])
}

fn bounds(p: &RobustProblem<f64>) -> DualBounds<f64> {
    let cert = certificate_at(p, &[0.0, 0.0], None).unwrap();
    dual_bounds(p, &cert, &uncertainty_radii(p)).unwrap()
}

fn omega(p: &RobustProblem<f64>, lp: &LiftedProblem<f64>) -> Vec<Vec<rsp_core::cone::OmegaSpec<f64>>> {
    let mu = verify_assumption5(p, 2000).unwrap();
    omega_bounds(lp, &default_eps(p), &mu).unwrap()
}

fn reference(gamma: f64, iters: usize) -> Vec<f64> {
    let (mut g, mut h) = box_rows(&[-1.0, -1.0], &[1.0, 1.0]);
    let (g1, h1) = l1_rows(2, gamma);
    g.extend(g1);
    h.extend(h1);
    let pz = move |y: &[f64]| project_polytope(&g, &h, y);
    let px = |y: &[f64]| y.iter().map(|v| v.clamp(-1.0, 1.0)).collect::<Vec<_>>();
    RefPapc {
        c: vec![-1.0, -1.0],
        q_mat: vec![vec![0.5, 0.0], vec![0.0, 0.5]],
        d: vec![1.0, 1.0],
        q: vec![0.0, 0.0],
        gamma: -1.0,
        pz: &pz,
        px: &px,
    }
    .run(iters)
}

/// Direct solve of the Γ = 1.5 instance, shared across tests.
fn direct() -> &'static [f64] {
    static X: OnceLock<Vec<f64>> = OnceLock::new();
    X.get_or_init(|| reference(1.5, 10_000))
}

fn linf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn reference_solver_hits_analytic_optimum() {
    // Worst case ½(|x|₍₁₎ + ½|x|₍₂₎) at Γ = 1.5, so x* = (1/2.75, 1/2.75).
    let x = direct();
    assert!(linf_dist(x, &[1.0 / 2.75; 2]) < 2e-4, "{x:?}");
}

#[test]
fn budgeted_set_splits_into_two_blocks() {
    let lp = lift(&lp(budgeted(1.0))).unwrap();
    assert_eq!(lp.s(0), 2);
    assert!(lp.is_split());
    let plain = lift(&lp_plain()).unwrap();
    assert_eq!(plain.s(0), 1);
    assert!(!plain.is_split());
}

fn lp_plain() -> RobustProblem<f64> {
    lp(SetDescriptor::linf(1.0))
}

#[test]
fn papc_split_matches_direct() {
    let p = lp(budgeted(1.5));
    let lifted = lift(&p).unwrap();
    let cb = compile_biaffine(&lifted.base).unwrap();
    let cfg = PapcConfig::default_for(&cb, &[2], 10_000, 1e-6).unwrap();
    let tr = papc_run_split(&lifted, &cfg, &PapcStart::zeros(&cb)).unwrap();
    let direct = direct();
    assert!(linf_dist(&tr.x_bar, direct) < 1e-3, "{:?} vs {direct:?}", tr.x_bar);
}

#[test]
fn sgsp_split_matches_direct() {
    let p = lp(budgeted(1.5));
    let lifted = lift(&p).unwrap();
    let cfg = SgspConfig::new(1_000_000, StepPolicy::theorem_default(1));
    let tr = sgsp_run_split(&lifted, &bounds(&p), &omega(&p, &lifted), &cfg, &SaddleState::at(&p, vec![0.0, 0.0])).unwrap();
    let direct = direct();
    assert!(linf_dist(&tr.x_bar, direct) < 1e-3, "{:?} vs {direct:?}", tr.x_bar);
}

#[test]
fn degenerate_split_reproduces_plain_trajectory() {
    let p = lp_plain();
    let lifted = lift(&p).unwrap();
    let b = bounds(&p);
    let cfg = SgspConfig::new(5_000, StepPolicy::theorem_default(1));
    let start = SaddleState::at(&p, vec![0.2, -0.1]);
    let a = sgsp_run(&p, &b, &cfg, &start).unwrap();
    let s = sgsp_run_split(&lifted, &b, &[vec![]], &cfg, &start).unwrap();
    for (x, y) in a.checkpoint_x.iter().zip(&s.checkpoint_x) {
        assert!(linf_dist(x, y) <= 1e-12);
    }
    assert!(linf_dist(&a.x_last, &s.x_last) <= 1e-12);

    let cb = compile_biaffine(&p).unwrap();
    let pc = PapcConfig::default_for(&cb, &[1], 5_000, 1e-6).unwrap();
    let a = papc_run(&p, &pc, &PapcStart::zeros(&cb)).unwrap();
    let s = papc_run_split(&lifted, &pc, &PapcStart::zeros(&cb)).unwrap();
    for (x, y) in a.checkpoint_x.iter().zip(&s.checkpoint_x) {
        assert!(linf_dist(x, y) <= 1e-12);
    }
}

#[test]
fn inactive_budget_equals_box_run() {
    // Γ ≥ d: the ℓ1 cap never binds.
    let p = lp(budgeted(2.0));
    let lifted = lift(&p).unwrap();
    let plain = lp_plain();
    let cb = compile_biaffine(&lifted.base).unwrap();
    let cfg = PapcConfig::default_for(&cb, &[2], 10_000, 1e-6).unwrap();
    let split = papc_run_split(&lifted, &cfg, &PapcStart::zeros(&cb)).unwrap();
    let cb0 = compile_biaffine(&plain).unwrap();
    let cfg0 = PapcConfig::default_for(&cb0, &[1], 10_000, 1e-6).unwrap();
    let direct = papc_run(&plain, &cfg0, &PapcStart::zeros(&cb0)).unwrap();
    assert!(linf_dist(&split.x_bar, &direct.x_bar) < 1e-3);

    let cfg = SgspConfig::new(1_000_000, StepPolicy::theorem_default(1));
    let s = sgsp_run_split(&lifted, &bounds(&p), &omega(&p, &lifted), &cfg, &SaddleState::at(&p, vec![0.0, 0.0])).unwrap();
    // Box worst case ½(|x₁| + |x₂|): x* = 1/3 each.
    assert!(linf_dist(&s.x_bar, &[1.0 / 3.0; 2]) < 1e-3, "{:?}", s.x_bar);
}

#[test]
fn coupling_vanishes_at_equal_copies() {
    let p = lp(budgeted(1.0));
    let x = [0.3, -0.2];
    let u = LiftedVar::new(vec![0.4, -0.3], 0.8);
    let direct = perspective_value(&p.constraints[0], &x, &u).unwrap();
    for w in [(vec![0.0, 0.0], 0.0), (vec![1.5, -2.0], -0.7)] {
        let v = lifted_constraint_value(&p.constraints[0], &x, &[u.clone(), u.clone()], &[w]).unwrap();
        assert!((v - direct).abs() < 1e-14);
    }
}

#[test]
fn eps_values() {
    let d = 3;
    let bx = SetDescriptor::<f64>::boxed(vec![-1.0; d], vec![1.0; d]);
    assert!((bx.inscribed_radius(d) - 1.0).abs() < 1e-15);
    // Inscribed radius of Γ·B₁ is min over unit u of σ(u) = Γ‖u‖∞, i.e. Γ/√d.
    let g = 1.7;
    let l1 = SetDescriptor::<f64>::l1(g);
    let oracle = (0..20_000)
        .map(|k| {
            let t = k as f64 * 0.000_314_159;
            let u = [t.cos() * 0.8f64.sqrt(), t.sin() * 0.8f64.sqrt(), 0.2f64.sqrt()];
            l1.support(&u).unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    assert!((l1.inscribed_radius(d) - g / (d as f64).sqrt()).abs() < 1e-12);
    assert!(l1.inscribed_radius(d) <= oracle + 1e-9);
    let lp = lift(&lp(budgeted(1.0))).unwrap();
    let spec = omega_bounds(&lp, &[0.5], &[2.0]).unwrap();
    assert_eq!((spec[0][0].mu_bar, spec[0][0].eps), (2.0, 0.5));
    assert!(matches!(omega_bounds(&lp, &[0.0], &[2.0]), Err(RspError::NonpositiveEps(_))));
}

#[test]
fn assumption5_matches_grid() {
    // g(x, 0) = x on [−2, 2]: min −2 ⇒ μ̄ ≈ 2.2.
    let c = Constraint::biaffine(Matrix::zeros(1, 1), vec![1.0], vec![0.0], 0.0, SetDescriptor::interval(-1.0, 1.0));
    let p = RobustProblem::new(vec![0.0], SetDescriptor::interval(-2.0, 2.0), vec![c]);
    let grid_min = (0..=4000).map(|k| -2.0 + k as f64 * 1e-3).fold(f64::INFINITY, f64::min);
    let mu = verify_assumption5(&p, 2000).unwrap();
    assert!((mu[0] - 1.1 * -grid_min).abs() < 1e-2);
    // Constant −1 ⇒ 1.1.
    let c = Constraint::biaffine(Matrix::zeros(1, 1), vec![0.0], vec![0.0], -1.0, SetDescriptor::interval(-1.0, 1.0));
    let p = RobustProblem::new(vec![0.0], SetDescriptor::interval(-2.0, 2.0), vec![c]);
    let mu: f64 = verify_assumption5(&p, 100).unwrap()[0];
    assert!((mu - 1.1).abs() < 1e-12);
}

#[test]
fn domain_copies_match_alternating_projection() {
    // min −x₁ − 2x₂ over ‖x‖₂ ≤ 1 ∩ ‖x‖∞ ≤ 0.8, no uncertain constraints.
    let dom = SetDescriptor::Intersection { sets: vec![SetDescriptor::l2(1.0), SetDescriptor::linf(0.8)] };
    let p = RobustProblem::<f64>::new(vec![-1.0, -2.0], dom, vec![]);
    let lifted = lift_domain_intersection(&p).unwrap();
    assert_eq!((lifted.base.n(), lifted.base.r(), lifted.x_copies), (4, 2, 2));
    assert!(lifted_rank_margin(&lifted) > 0.0);

    // Oracle: projected gradient with alternating projections to 1e-10.
    let alt = |y: &[f64]| -> Vec<f64> {
        // Dykstra: alternating projections with correction terms.
        let (mut z, mut p, mut q) = (y.to_vec(), vec![0.0; 2], vec![0.0; 2]);
        for _ in 0..10_000 {
            let prev = z.clone();
            let a: Vec<f64> = (0..2).map(|i| z[i] + p[i]).collect();
            let na = (a[0] * a[0] + a[1] * a[1]).sqrt().max(1.0);
            let b: Vec<f64> = a.iter().map(|v| v / na).collect();
            p = (0..2).map(|i| a[i] - b[i]).collect();
            let c: Vec<f64> = (0..2).map(|i| b[i] + q[i]).collect();
            z = c.iter().map(|v| v.clamp(-0.8, 0.8)).collect();
            q = (0..2).map(|i| c[i] - z[i]).collect();
            if (z[0] - prev[0]).abs() + (z[1] - prev[1]).abs() < 1e-12 {
                break;
            }
        }
        z
    };
    let mut x: Vec<f64> = vec![0.0, 0.0];
    for _ in 0..2000 {
        x = alt(&[x[0] + 0.05, x[1] + 0.1]);
    }
    // x* = (0.6, 0.8): objective −2.2.
    let direct_obj: f64 = -x[0] - 2.0 * x[1];
    assert!((direct_obj + 2.2).abs() < 1e-6, "{x:?}");

    let start = vec![0.0; 4];
    let cfg = PapcConfig::default_for(&compile_biaffine(&lifted.base).unwrap(), &[], 100_000, 1e-6).unwrap();
    let tr = papc_run_split(&lifted, &cfg, &PapcStart { x: start, u: vec![], w: vec![0.0; 2], pi: vec![0.0; 4] }).unwrap();
    let xs = lifted.unlift_x(&tr.x_bar);
    assert!((-xs[0] - 2.0 * xs[1] - direct_obj).abs() < 1e-3, "{xs:?}");
}

#[test]
fn nested_intersections_are_flattened() {
    let inner = SetDescriptor::Intersection { sets: vec![SetDescriptor::l2(1.0), SetDescriptor::l1(1.0)] };
    let z = SetDescriptor::Intersection { sets: vec![inner, SetDescriptor::linf(1.0)] };
    assert_eq!(lift(&lp(z)).unwrap().s(0), 3);
    assert!(matches!(LiftedProblem::trivial(&lp(budgeted(1.0))), Err(RspError::UnsupportedSet(_))));
}
