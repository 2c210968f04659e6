mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsp_core::linalg::{norm, sym_eigen, Matrix};
use common::{grid_max, random_cq};
use rsp_qpbench::concave::ConcaveQuadratic;
use rsp_qpbench::trs::{kkt_residual, trs_solve};

#[test]
fn negative_identity_with_axis_linear_term() {
    let cq = ConcaveQuadratic { m: Matrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, -1.0]]), r: vec![1.0, 0.0], s: 0.0 };
    let sol = trs_solve(&cq, 1.0).unwrap();
    assert!((sol.z[0] - 1.0).abs() < 1e-12 && sol.z[1].abs() < 1e-12);
    assert!((sol.value - 1.0).abs() < 1e-12);
    assert!(sol.sigma.abs() < 1e-12);
}

#[test]
fn zero_curvature_goes_to_the_boundary_along_r() {
    let cq = ConcaveQuadratic { m: Matrix::zeros(3, 3), r: vec![3.0, -4.0, 0.0], s: 0.5 };
    let sol = trs_solve(&cq, 2.0).unwrap();
    let want = [1.2, -1.6, 0.0];
    for (a, b) in sol.z.iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((sol.value - (0.5 + 2.0 * 10.0)).abs() < 1e-10);
    assert!((sol.sigma - 2.5).abs() < 1e-10);
}

#[test]
fn interior_maximizer_is_the_newton_point() {
    // −2z² + 2z: maximizer 0.5, inside the unit interval.
    let cq = ConcaveQuadratic { m: Matrix::from_rows(&[vec![-2.0]]), r: vec![1.0], s: 0.0 };
    let sol = trs_solve(&cq, 1.0).unwrap();
    assert!((sol.z[0] - 0.5).abs() < 1e-14 && sol.sigma == 0.0);
}

#[test]
fn zero_linear_term_gives_origin() {
    let cq = ConcaveQuadratic { m: Matrix::zeros(2, 2), r: vec![0.0, 0.0], s: 1.0 };
    let sol = trs_solve(&cq, 1.0).unwrap();
    assert_eq!(sol.z, vec![0.0, 0.0]);
    assert_eq!(sol.value, 1.0);
}

#[test]
fn rejects_indefinite_and_bad_radius() {
    let cq = ConcaveQuadratic { m: Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]), r: vec![1.0, 0.0], s: 0.0 };
    assert!(trs_solve(&cq, 1.0).is_err());
    let cq = ConcaveQuadratic { m: Matrix::zeros(1, 1), r: vec![1.0], s: 0.0 };
    assert!(trs_solve(&cq, 0.0).is_err());
    assert!(trs_solve(&cq, f64::NAN).is_err());
    let bad = ConcaveQuadratic { m: Matrix::zeros(2, 2), r: vec![1.0], s: 0.0 };
    assert!(trs_solve(&bad, 1.0).is_err());
}

#[test]
fn kkt_conditions_on_a_thousand_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for t in 0..1000 {
        let k = 1 + t % 8;
        let cq = random_cq(&mut rng, k);
        let radius = rng.gen_range(0.1..3.0);
        let sol = trs_solve(&cq, radius).unwrap();
        let res = kkt_residual(&cq, &sol);
        worst = worst.max(res);
        assert!(res <= 1e-8, "instance {t}: residual {res:e}");
        let nz = norm(&sol.z);
        assert!(sol.sigma >= 0.0);
        assert!(nz <= radius * (1.0 + 1e-10), "instance {t}: ‖z‖ = {nz}");
        // complementarity: σ > 0 only on the sphere
        assert!(sol.sigma * (radius - nz).abs() <= 1e-8 * (1.0 + sol.sigma), "instance {t}");
        // second order: M − σI ⪯ 0
        let (vals, _) = sym_eigen(&cq.m);
        assert!(vals.last().unwrap() - sol.sigma <= 1e-9);
    }
    println!("worst TRS KKT residual {worst:e}");
}

#[test]
fn matches_dense_grid_in_two_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for t in 0..20 {
        let cq = random_cq(&mut rng, 2);
        let radius = rng.gen_range(0.5..1.5);
        let sol = trs_solve(&cq, radius).unwrap();
        let g = grid_max(&cq, radius);
        assert!(g <= sol.value + 1e-10, "instance {t}: grid {g} above solver {}", sol.value);
        assert!(sol.value - g <= 1e-4, "instance {t}: solver {} grid {g}", sol.value);
    }
}

#[test]
fn matches_dense_grid_in_three_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for t in 0..20 {
        let cq = random_cq(&mut rng, 3);
        let sol = trs_solve(&cq, 1.0).unwrap();
        let g = grid_max(&cq, 1.0);
        assert!(g <= sol.value + 1e-10, "instance {t}");
        assert!(sol.value - g <= 1e-4, "instance {t}: solver {} grid {g}", sol.value);
    }
}

proptest! {
    #[test]
    fn no_feasible_point_beats_the_solution(
        seed in 0u64..1_000_000,
        probes in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 4), 20),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cq = random_cq(&mut rng, 4);
        let sol = trs_solve(&cq, 1.0).unwrap();
        for p in probes {
            let n = norm(&p);
            let z: Vec<f64> = if n > 1.0 { p.iter().map(|v| v / n).collect() } else { p };
            prop_assert!(cq.eval(&z) <= sol.value + 1e-9);
        }
    }
}
