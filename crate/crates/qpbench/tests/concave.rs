mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use common::{grid_sup_g, random_x};
use rsp_core::linalg::{norm, norm_sq, op_norm, sym_eigen, Matrix};
use rsp_qpbench::concave::{concavify, concavify_full, g_value, gbar_grad_x, gbar_grad_z, gbar_value, scenario_cut};
use rsp_qpbench::instance::{gen_instance, qp_from_json, qp_to_json, C_CONST};
use rsp_qpbench::lambda_max;

#[test]
fn lambda_max_against_known_spectra() {
    let d: Matrix<f64> = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]);
    let (l, v): (f64, Vec<f64>) = lambda_max(&d).unwrap();
    assert!((l - 3.0).abs() < 1e-10);
    assert!((v[2].abs() - 1.0).abs() < 1e-6);

    let q = [1.0f64, -2.0, 0.5, 3.0];
    let qq = Matrix::from_fn(4, 4, |i, j| q[i] * q[j]);
    let (l, _): (f64, _) = lambda_max(&qq).unwrap();
    assert!((l - norm_sq(&q)).abs() < 1e-9);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let b = Matrix::from_fn(8, 8, |_, _| rng.gen_range(-1.0..1.0));
        let s = Matrix::from_fn(8, 8, |i, j| b[(i, j)] + b[(j, i)]);
        let (vals, _) = sym_eigen(&s);
        let (l, _): (f64, _) = lambda_max(&s).unwrap();
        assert!((l - vals[7]).abs() < 1e-8, "{l} vs {}", vals[7]);
    }
}

#[test]
fn generation_is_deterministic_and_normalized() {
    let a = gen_instance(6, 3, 4, 2, 42).unwrap();
    let b = gen_instance(6, 3, 4, 2, 42).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, gen_instance(6, 3, 4, 2, 43).unwrap());
    for i in 0..=a.m {
        assert!((op_norm(&a.stacked(i)) - 1.0).abs() < 1e-8);
        assert!((norm(&a.b[i]) - 1.0).abs() < 1e-12);
        assert_eq!(a.c[i], C_CONST);
        assert_eq!(a.p[i].len(), a.k + 1);
        assert!(a.p[i].iter().all(|p| p.rows == 4 && p.cols == 6));
    }
    assert!(gen_instance(0, 1, 1, 0, 1).is_err());
}

#[test]
fn json_round_trip_is_exact() {
    let a = gen_instance(4, 2, 3, 1, 9).unwrap();
    let text = qp_to_json(&a).unwrap();
    assert_eq!(qp_from_json(&text).unwrap(), a);
    assert!(qp_from_json(&text.replace("rsp-qp-1", "rsp-qp-0")).is_err());
    assert!(qp_from_json("{").is_err());
}

#[test]
fn scalar_uncertainty_matches_hand_expansion() {
    // K = 1: Q = ‖P₁x‖², r = (P₁x)ᵀP₀x, ḡ = g + Q(1 − z²).
    let inst = gen_instance(5, 1, 3, 0, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = random_x(&mut rng, 5);
    let p0x = inst.p[0][0].matvec(&x);
    let p1x = inst.p[0][1].matvec(&x);
    let q = norm_sq(&p1x);
    let r: f64 = p0x.iter().zip(&p1x).map(|(a, b)| a * b).sum();
    let cq = concavify(&inst, 0, &x).unwrap();
    assert!((cq.m[(0, 0)]).abs() < 1e-12);
    assert!((cq.r[0] - r).abs() < 1e-12);
    for z in [-1.0, -0.3, 0.0, 0.7, 1.0] {
        let want = g_value(&inst, 0, &x, &[z]) + q * (1.0 - z * z);
        assert!((cq.eval(&[z]) - want).abs() < 1e-12);
    }
}

#[test]
fn origin_gives_the_constant() {
    let inst = gen_instance(5, 3, 4, 2, 3).unwrap();
    for i in 0..=2 {
        let c = concavify_full(&inst, i, &[0.0; 5]).unwrap();
        assert_eq!(c.lambda, 0.0);
        assert!(c.cq.r.iter().all(|&v| v == 0.0));
        assert_eq!(c.pessimize().unwrap().value, -0.05);
    }
}

#[test]
fn sup_equivalence_against_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for t in 0..100 {
        let k = 1 + t % 3;
        let inst = gen_instance(5, k, 4, 1, 1000 + t as u64).unwrap();
        let i = t % 2;
        let x = random_x(&mut rng, 5);
        let c = concavify_full(&inst, i, &x).unwrap();
        let sup_bar = c.trs(1.0).unwrap().value;
        let sup_g = grid_sup_g(&inst, i, &x);
        worst = worst.max((sup_bar - sup_g).abs());
        assert!(sup_g <= sup_bar + 1e-10, "pair {t}: grid above ḡ");
        assert!(sup_bar - sup_g <= 1e-3, "pair {t}: {sup_bar} vs {sup_g}");
    }
    println!("worst sup gap {worst:e}");
}

#[test]
fn pessimizer_attains_the_sup_of_g() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for t in 0..200 {
        let inst = gen_instance(6, 1 + t % 5, 4, 0, t as u64).unwrap();
        let x = random_x(&mut rng, 6);
        let sol = concavify_full(&inst, 0, &x).unwrap().pessimize().unwrap();
        assert!((norm(&sol.z) - 1.0).abs() < 1e-9);
        assert!((g_value(&inst, 0, &x, &sol.z) - sol.value).abs() < 1e-9, "instance {t}");
    }
}

#[test]
fn scenario_cut_reproduces_g() {
    let inst = gen_instance(5, 3, 4, 2, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..=2 {
        let z = random_x(&mut rng, 3);
        let cut = scenario_cut(&inst, i, &z);
        for _ in 0..5 {
            let x = random_x(&mut rng, 5);
            assert!((cut.eval(&x) - g_value(&inst, i, &x, &z)).abs() < 1e-12);
        }
    }
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = 1e-6;
    for t in 0..100 {
        let inst = gen_instance(5, 3, 4, 0, 500 + t).unwrap();
        let x = random_x(&mut rng, 5);
        let z = random_x(&mut rng, 3);
        let gx = gbar_grad_x(&inst, 0, &x, &z).unwrap();
        let gz = gbar_grad_z(&inst, 0, &x, &z).unwrap();
        let fd = |pick: &dyn Fn(usize, f64) -> f64, d: usize| (0..d).map(|j| (pick(j, h) - pick(j, -h)) / (2.0 * h)).collect::<Vec<f64>>();
        let fdx = fd(
            &|j, s| {
                let mut y = x.clone();
                y[j] += s;
                gbar_value(&inst, 0, &y, &z).unwrap()
            },
            5,
        );
        let fdz = fd(
            &|j, s| {
                let mut w = z.clone();
                w[j] += s;
                gbar_value(&inst, 0, &x, &w).unwrap()
            },
            3,
        );
        for (a, b) in [(&gx, &fdx), (&gz, &fdz)] {
            let err: Vec<f64> = a.iter().zip(b.iter()).map(|(p, q)| p - q).collect();
            assert!(norm(&err) <= 1e-4 * norm(b).max(1e-3), "point {t}: {a:?} vs {b:?}");
        }
    }
}

proptest! {
    #[test]
    fn gbar_dominates_g_and_agrees_on_the_sphere(seed in 0u64..10_000, k in 1usize..5, w in proptest::collection::vec(-1.0f64..1.0, 4)) {
        let inst = gen_instance(4, k, 3, 0, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_x(&mut rng, 4);
        let mut z = w[..k].to_vec();
        let n = norm(&z);
        if n > 1.0 {
            z.iter_mut().for_each(|v| *v /= n);
        }
        let cq = concavify(&inst, 0, &x).unwrap();
        let (g, gb) = (g_value(&inst, 0, &x, &z), cq.eval(&z));
        prop_assert!(gb >= g - 1e-12);
        if n > 0.0 {
            let zs: Vec<f64> = z.iter().map(|v| v / norm(&z)).collect();
            prop_assert!((cq.eval(&zs) - g_value(&inst, 0, &x, &zs)).abs() < 1e-12);
        }
        // M ⪯ 0
        let (vals, _) = sym_eigen(&cq.m);
        prop_assert!(*vals.last().unwrap() <= 1e-12);
    }
}
