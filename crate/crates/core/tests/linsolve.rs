use emacfem::linsolve::{newton_solve, sparse_solve, SparseLu};
use emacfem::{NewtonConfig, SolveError, SparseMatrix};
use proptest::prelude::*;

/// Dense Gaussian elimination with partial pivoting.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

fn poisson_1d(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match i.abs_diff(j) {
                    0 => 2.0,
                    1 => -1.0,
                    _ => 0.0,
                })
                .collect()
        })
        .collect()
}

fn residual_ok(a: &SparseMatrix, x: &[f64], b: &[f64]) -> bool {
    let r = a.mul_vec(x);
    let rn = r.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let xn = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let bn = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    rn <= 1e-10 * (a.norm_inf() * xn + bn)
}

#[test]
fn tridiagonal_matches_dense_oracle() {
    let dense = poisson_1d(5);
    let b = vec![1.0; 5];
    let x = sparse_solve(&SparseMatrix::from_dense(&dense), &b).unwrap();
    let oracle = dense_solve(dense, b);
    // closed form i (n + 1 - i) / 2
    for (i, (a, o)) in x.iter().zip(&oracle).enumerate() {
        let k = (i + 1) as f64;
        assert!((a - o).abs() < 1e-13);
        assert!((o - k * (6.0 - k) / 2.0).abs() < 1e-13);
    }
}

#[test]
fn singular_and_malformed_systems() {
    let a = SparseMatrix::from_dense(&[vec![1.0, 2.0, 0.0], vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 1.0]]);
    assert!(matches!(sparse_solve(&a, &[1.0, 1.0, 1.0]), Err(SolveError::Singular { .. })));
    let rect = SparseMatrix::from_triplets(2, 3, &[(0, 0, 1.0)]);
    assert!(matches!(sparse_solve(&rect, &[1.0, 1.0]), Err(SolveError::NotSquare { .. })));
    let id = SparseMatrix::identity(3);
    assert!(matches!(sparse_solve(&id, &[1.0]), Err(SolveError::DimensionMismatch { .. })));
}

#[test]
fn newton_scalar_square_root() {
    let cfg = NewtonConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        ..NewtonConfig::default()
    };
    let r = newton_solve(
        |x| (vec![x[0] * x[0] - 4.0], SparseMatrix::from_dense(&[vec![2.0 * x[0]]])),
        vec![3.0],
        &cfg,
    )
    .unwrap();
    assert!(r.iterations <= 6, "{}", r.iterations);
    assert!((r.solution[0] - 2.0).abs() < 1e-12);

    // replay the iteration by hand and check e_{k+1} / e_k^2 stays near 1/4
    let mut x: f64 = 3.0;
    let mut errs = vec![(x - 2.0).abs()];
    for _ in 0..r.iterations {
        x -= (x * x - 4.0) / (2.0 * x);
        errs.push((x - 2.0).abs());
    }
    assert!((x - r.solution[0]).abs() < 1e-15);
    for w in errs.windows(2).filter(|w| w[1] > 1e-14) {
        let ratio = w[1] / (w[0] * w[0]);
        assert!(ratio < 0.3, "{ratio}");
    }
}

#[test]
fn newton_linear_in_one_step() {
    let a = SparseMatrix::from_dense(&poisson_1d(4));
    let b = vec![1.0, -2.0, 0.5, 3.0];
    let r = newton_solve(
        |x| {
            let mut f = a.mul_vec(x);
            f.iter_mut().zip(&b).for_each(|(fi, bi)| *fi -= bi);
            (f, a.clone())
        },
        vec![0.0; 4],
        &NewtonConfig::default(),
    )
    .unwrap();
    assert_eq!(r.iterations, 1);
    assert_eq!(r.history.len(), 2);
}

#[test]
fn newton_zero_jacobian_is_singular() {
    let r = newton_solve(
        |x| (vec![x[0] - 1.0], SparseMatrix::from_dense(&[vec![0.0]])),
        vec![0.0],
        &NewtonConfig::default(),
    );
    assert!(matches!(r, Err(SolveError::Singular { .. })), "{r:?}");
}

#[test]
fn newton_reports_divergence() {
    let cfg = NewtonConfig {
        max_iter: 3,
        ..NewtonConfig::default()
    };
    // x^2 + 1 has no real root
    let r = newton_solve(
        |x| (vec![x[0] * x[0] + 1.0], SparseMatrix::from_dense(&[vec![2.0 * x[0]]])),
        vec![0.5],
        &cfg,
    );
    match r {
        Err(SolveError::NewtonDiverged { iterations, history, .. }) => {
            assert_eq!(iterations, 3);
            assert_eq!(history.len(), 4);
        }
        other => panic!("{other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_diagonally_dominant_systems(n in 1usize..30, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut trip = Vec::new();
        for i in 0..n {
            let mut off = 0.0;
            for _ in 0..3 {
                let j = rng.gen_range(0..n);
                if j != i {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    off += v.abs();
                    trip.push((i, j, v));
                }
            }
            trip.push((i, i, off + rng.gen_range(0.5..2.0)));
        }
        let a = SparseMatrix::from_triplets(n, n, &trip);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = sparse_solve(&a, &b).unwrap();
        prop_assert!(residual_ok(&a, &x, &b));
        let oracle = dense_solve(a.to_dense(), b.clone());
        for (p, q) in x.iter().zip(&oracle) {
            prop_assert!((p - q).abs() < 1e-10);
        }
        // a cached factorization gives the same answer on a second matrix
        let mut lu = SparseLu::new();
        let x1 = lu.solve(&a, &b).unwrap();
        let mut a2 = a.clone();
        a2.scale(2.0);
        let x2 = lu.solve(&a2, &b).unwrap();
        for (p, q) in x1.iter().zip(&x2) {
            prop_assert!((p - 2.0 * q).abs() < 1e-10);
        }
    }
}
