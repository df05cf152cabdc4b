//! Least-squares and block OMP behaviour on random systems, plus an SVD
//! input that once made the factorization fail.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use smrs_core::{block_omp, solve_direct, Complex64, Field, Posedness, ReducedSystem, SolveConfig};

fn system(a: DMatrix<Complex64>, b: DVector<Complex64>) -> ReducedSystem<Complex64> {
    let (m, n) = a.shape();
    ReducedSystem {
        matrix: a,
        rhs: b,
        column_map: (0..n as i64).collect(),
        row_map: (0..m as i64).map(|r| (0, r)).collect(),
    }
}

fn cplx(v: &[(f64, f64)]) -> Vec<Complex64> {
    v.iter().map(|&(r, i)| Complex64::new(r, i)).collect()
}

fn tall() -> impl Strategy<Value = (DMatrix<Complex64>, DVector<Complex64>)> {
    (2usize..8, 0usize..6).prop_flat_map(|(n, extra)| {
        let m = n + extra;
        (
            prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), m * n),
            prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), m),
        )
            .prop_map(move |(a, b)| {
                (
                    DMatrix::from_vec(m, n, cplx(&a)),
                    DVector::from_vec(cplx(&b)),
                )
            })
    })
}

/// Wide 0/1-pattern system with `blocks` blocks of `len` columns and a
/// right-hand side generated by two of them.
fn wide() -> impl Strategy<Value = (ReducedSystem<Complex64>, Vec<Vec<usize>>)> {
    (3usize..7, 2usize..4, 6usize..14).prop_flat_map(|(nb, len, m)| {
        let n = nb * len;
        (
            prop::collection::vec(prop::bool::weighted(0.4), m * n),
            prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 2 * len),
            0..nb,
            0..nb,
        )
            .prop_map(move |(pattern, coeffs, j1, j2)| {
                let a = DMatrix::from_vec(
                    m,
                    n,
                    pattern
                        .iter()
                        .map(|&on| Complex64::new(if on { 3.0 } else { 0.0 }, 0.0))
                        .collect(),
                );
                let mut x = DVector::zeros(n);
                let c = cplx(&coeffs);
                for t in 0..len {
                    x[j1 * len + t] += c[t];
                    x[j2 * len + t] += c[len + t];
                }
                let b = &a * x;
                let blocks = (0..nb)
                    .map(|j| (j * len..(j + 1) * len).collect())
                    .collect();
                (system(a, b), blocks)
            })
    })
}

proptest! {
    #[test]
    fn direct_solution_meets_normal_equations((a, b) in tall()) {
        let s = system(a.clone(), b.clone());
        let out = solve_direct(&s, &SolveConfig::default()).unwrap();
        let gradient = a.adjoint() * (&a * &out.solution - &b);
        prop_assert!(gradient.norm() <= 1e-9 * (1.0 + a.norm() * b.norm()));
        prop_assert_eq!(out.posedness, Posedness::WellPosed);
    }

    #[test]
    fn omp_residual_never_grows((s, blocks) in wide()) {
        let out = block_omp(&s, &blocks, &SolveConfig::default()).unwrap();
        let h = &out.residual_history;
        prop_assert_eq!(h.len(), out.iterations + 1);
        prop_assert!(out.selected_blocks.len() <= out.iterations);
        for w in h.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        let mut seen = out.selected_blocks.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), out.selected_blocks.len());
    }

    #[test]
    fn omp_is_equivariant_under_scaling((s, blocks) in wide(), re in 0.1..10.0f64, im in -10.0..10.0f64) {
        let c = Complex64::new(re, im);
        let scaled = ReducedSystem { rhs: s.rhs.map(|v| v * c), ..s.clone() };
        let base = block_omp(&s, &blocks, &SolveConfig::default()).unwrap();
        let out = block_omp(&scaled, &blocks, &SolveConfig::default()).unwrap();
        if base.converged {
            prop_assert_eq!(&out.selected_blocks, &base.selected_blocks);
            let diff = (&out.solution - base.solution.map(|v| v * c)).norm();
            prop_assert!(diff <= 1e-8 * (1.0 + out.solution.norm()));
        }
    }

    #[test]
    fn omp_is_deterministic((s, blocks) in wide()) {
        let a = block_omp(&s, &blocks, &SolveConfig::default()).unwrap();
        let b = block_omp(&s, &blocks, &SolveConfig::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn f32_and_f64_solves_agree() {
    let a = DMatrix::<f64>::from_fn(6, 3, |i, j| ((i * 5 + j * 3) % 7) as f64 - 3.0);
    let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
    let b = &a * &x;
    let sys64 = ReducedSystem {
        matrix: a.clone(),
        rhs: b.clone(),
        column_map: vec![0, 1, 2],
        row_map: (0..6).map(|r| (0, r)).collect(),
    };
    let sys32 = ReducedSystem {
        matrix: a.map(|v| v as f32),
        rhs: b.map(|v| v as f32),
        column_map: sys64.column_map.clone(),
        row_map: sys64.row_map.clone(),
    };
    let x64 = solve_direct(&sys64, &SolveConfig::default())
        .unwrap()
        .solution;
    let x32 = solve_direct(
        &sys32,
        &SolveConfig {
            rank_tolerance: 1e-5,
            ..SolveConfig::default()
        },
    )
    .unwrap()
    .solution;
    assert!((&x64 - &x).norm() < 1e-12);
    assert!((x32.map(f64::from) - &x).norm() < 1e-4);
}

fn load_fixture() -> DMatrix<f64> {
    let text = include_str!("data/svd_regression.txt");
    let mut lines = text.lines();
    let dims: Vec<usize> = lines
        .next()
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    let mut a = DMatrix::zeros(dims[0], dims[1]);
    for line in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        a[(f[0].parse().unwrap(), f[1].parse().unwrap())] = f[2].parse().unwrap();
    }
    a
}

#[test]
fn structured_split_matrix_factors() {
    // split-system matrix with zero rows and entries from {0, ±3.8e9, ±4e9,
    // ±4.2e9}; the plain factorization failed to converge on it
    let a = load_fixture();
    let svd = f64::thin_svd(&a).unwrap();
    let back = &svd.u * DMatrix::from_diagonal(&svd.s) * svd.v.transpose();
    assert!((back - &a).norm() <= 1e-12 * a.norm());
    let sv = f64::singular_values(&a).unwrap();
    assert_eq!(sv.len(), a.nrows().min(a.ncols()));
    assert!(sv.as_slice().windows(2).all(|w| w[0] >= w[1]));
    let leading = sv.rows(0, svd.s.len());
    assert!((leading - &svd.s).norm() <= 1e-12 * svd.s[0]);
}
