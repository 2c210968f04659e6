//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rsp_core::linalg::{norm, Matrix};
use rsp_qpbench::concave::{g_value, ConcaveQuadratic};
use rsp_qpbench::instance::QpInstance;

/// M = −BᵀB with B of random rank, r and s uniform.
pub fn random_cq(rng: &mut ChaCha8Rng, k: usize) -> ConcaveQuadratic {
    let rank = rng.gen_range(0..=k);
    let b = Matrix::from_fn(rank.max(1), k, |_, _| if rank == 0 { 0.0 } else { rng.gen_range(-2.0..2.0) });
    let mut m = b.gram_cols();
    m.scale(-1.0);
    let r = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
    ConcaveQuadratic { m, r, s: rng.gen_range(-1.0..1.0) }
}

/// Grid oracle for max cq over ‖z‖ ≤ R at K ∈ {2, 3}: a dense Cartesian
/// grid of the enclosing cube, then repeated local grids around the best
/// point, shrinking the width each time. Points are pulled radially into the
/// ball, so every evaluation is feasible.
pub fn grid_max(cq: &ConcaveQuadratic, radius: f64) -> f64 {
    let k = cq.r.len();
    let clip = |z: Vec<f64>| -> Vec<f64> {
        let n = norm(&z);
        if n > radius {
            z.iter().map(|v| v * radius / n).collect()
        } else {
            z
        }
    };
    let search = |center: &[f64], half: f64, per_axis: usize, best: &mut (f64, Vec<f64>)| {
        let total = per_axis.pow(k as u32);
        for idx in 0..total {
            let mut rem = idx;
            let z: Vec<f64> = (0..k)
                .map(|a| {
                    let i = rem % per_axis;
                    rem /= per_axis;
                    center[a] + half * (2.0 * i as f64 / (per_axis - 1) as f64 - 1.0)
                })
                .collect();
            let z = clip(z);
            let v = cq.eval(&z);
            if v > best.0 {
                *best = (v, z);
            }
        }
    };
    let mut best = (f64::NEG_INFINITY, vec![0.0; k]);
    let coarse = if k == 2 { 1001 } else { 101 };
    search(&vec![0.0; k], radius, coarse, &mut best);
    let mut half = 4.0 * radius / (coarse - 1) as f64;
    for _ in 0..40 {
        let c = best.1.clone();
        search(&c, half, 9, &mut best);
        half *= 0.6;
    }
    best.0
}

pub fn random_x(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s = rng.gen_range(0.1..1.0) / norm(&x);
    x.iter().map(|v| v * s).collect()
}

/// max over ‖z‖ ≤ 1 of g(x, ·) on a grid; g is convex in z, so the sphere
/// carries the maximum, but a coarse interior grid is scanned as well.
pub fn grid_sup_g(inst: &QpInstance, i: usize, x: &[f64]) -> f64 {
    let g = |z: &[f64]| g_value(inst, i, x, z);
    let mut best = f64::NEG_INFINITY;
    match inst.k {
        1 => {
            for j in 0..=20_000 {
                best = best.max(g(&[-1.0 + j as f64 / 10_000.0]));
            }
        }
        2 => {
            for j in 0..100_000 {
                let a = std::f64::consts::TAU * j as f64 / 100_000.0;
                best = best.max(g(&[a.cos(), a.sin()]));
            }
            for a in -20..=20 {
                for b in -20..=20 {
                    let z = [a as f64 / 20.0, b as f64 / 20.0];
                    if norm(&z) <= 1.0 {
                        best = best.max(g(&z));
                    }
                }
            }
        }
        3 => {
            let (nt, np) = (300, 600);
            for j in 0..=nt {
                let t = std::f64::consts::PI * j as f64 / nt as f64;
                for l in 0..np {
                    let p = std::f64::consts::TAU * l as f64 / np as f64;
                    best = best.max(g(&[t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]));
                }
            }
        }
        _ => unreachable!("grid oracle only for K ≤ 3"),
    }
    best
}
