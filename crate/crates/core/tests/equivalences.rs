mod common;

use std::sync::Arc;

use pivchol::gp::{pgreedy_select, GpPosterior, PowerFunction};
use pivchol::kernels::build_catalog_for;
use pivchol::matrix::{matrix_pivoted_cholesky, MatrixFactorization, SpdMatrix};
use pivchol::{run, tensor_grid, CholeskyState, Domain, KernelSpec, MaternNu, PivotSet, PivotStrategy, RunConfig};

#[test]
fn pgreedy_picks_the_complete_pivots() {
    for dim in 1..=2 {
        let m = if dim == 1 { 501 } else { 31 };
        for kernel in build_catalog_for(dim) {
            let domain = kernel.spec().unwrap().canonical_domain(dim).unwrap();
            let grid = tensor_grid(&domain, m).unwrap();
            let out = run(&RunConfig::new(kernel.clone(), domain, m, PivotStrategy::Complete, 15)).unwrap();
            let n = out.state.rank();
            let greedy = pgreedy_select(&kernel, &grid, n).unwrap();
            assert_eq!(greedy.indices, out.state.pivots(), "{} d={dim}", kernel.name());
        }
    }
}

#[test]
fn posterior_covariance_is_the_residual_kernel() {
    let k = KernelSpec::Matern { nu: MaternNu::ThreeHalves, lengthscale: 0.5 }.build_canonical(1).unwrap();
    let grid = Arc::new(tensor_grid(&Domain::cube(1, -1.0, 1.0).unwrap(), 401).unwrap());
    let state = CholeskyState::from_pivots(k.clone(), Arc::clone(&grid), &[0, 80, 200, 310, 400]).unwrap();
    let sites = PivotSet::from_grid(&grid, state.pivots()).unwrap();
    let gp = GpPosterior::fit(&k, &sites, &[0.0; 5]).unwrap();
    for i in 0..100 {
        let x = [-1.0 + 2.0 * ((i as f64) * 0.754_877_666).fract()];
        let y = [-1.0 + 2.0 * ((i as f64) * 0.569_840_291 + 0.3).fract()];
        let r = state.residual_eval(&x, &y).unwrap();
        assert!((gp.posterior_cov(&x, &y) - r).abs() <= 1e-8, "pair {i}");
    }
}

#[test]
fn squared_power_function_is_the_residual_diagonal() {
    let k = KernelSpec::Gaussian { sigma: 0.5 }.build_canonical(2).unwrap();
    let grid = Arc::new(tensor_grid(&Domain::cube(2, -1.0, 1.0).unwrap(), 21).unwrap());
    let mut state = CholeskyState::init(k.clone(), Arc::clone(&grid)).unwrap();
    for _ in 0..10 {
        state.step(state.max_diag().0).unwrap();
    }
    let power = PowerFunction::new(&k, &PivotSet::from_grid(&grid, state.pivots()).unwrap()).unwrap();
    for j in 0..200 {
        let i = (j * 37) % grid.len();
        let p = power.eval(grid.point(i));
        assert!((p * p - state.diag_residual()[i]).abs() <= 1e-8);
    }
}

#[test]
fn matrix_route_matches_kernel_route_on_a_gram_matrix() {
    for kernel in build_catalog_for(1) {
        let domain = kernel.spec().unwrap().canonical_domain(1).unwrap();
        let grid = Arc::new(tensor_grid(&domain, 101).unwrap());
        let a = SpdMatrix::new_unchecked_spectrum(nalgebra::DMatrix::from_fn(101, 101, |i, j| {
            kernel.eval(grid.point(i), grid.point(j))
        }))
        .unwrap();
        let mut state = CholeskyState::init(kernel.clone(), Arc::clone(&grid)).unwrap();
        let mut f = MatrixFactorization::new(&a);
        for _ in 0..12 {
            if f.max_diag().1 <= f.breakdown_threshold() {
                break;
            }
            f.step_complete(&a).unwrap();
        }
        for _ in 0..f.rank() {
            state.step(state.max_diag().0).unwrap();
        }
        assert_eq!(f.pivots(), state.pivots(), "{}", kernel.name());
        assert!(common::max_gap(f.diag_residual(), state.diag_residual()) <= 1e-10 * state.k_max());
    }
}

#[test]
fn brownian_matrix_is_the_brownian_kernel_on_an_integer_grid() {
    let m = 64;
    let a = SpdMatrix::brownian(m).unwrap();
    let k = pivchol::Kernel::custom("scaled-min", 1, move |x: &[f64], y: &[f64]| x[0].min(y[0]) / m as f64);
    let pts: Vec<Vec<f64>> = (1..=m).map(|i| vec![i as f64]).collect();
    let grid = Arc::new(pivchol::CandidateGrid::from_points(&pts, 0.5).unwrap());
    let f = matrix_pivoted_cholesky(&a, 20).unwrap();
    let mut state = CholeskyState::init(k, grid).unwrap();
    for _ in 0..20 {
        state.step(state.max_diag().0).unwrap();
    }
    assert_eq!(f.pivots(), state.pivots());
    assert!(common::max_gap(f.diag_residual(), state.diag_residual()) <= 1e-12);
}

#[test]
fn permuting_the_matrix_permutes_the_factor() {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
    let a = SpdMatrix::random(40, 40, 1e-3, &mut rng).unwrap();
    let mut perm: Vec<usize> = (0..40).collect();
    common::shuffle(&mut perm, 5);
    let b = a.permuted(&perm).unwrap();
    let fa = matrix_pivoted_cholesky(&a, 10).unwrap();
    let fb = matrix_pivoted_cholesky(&b, 10).unwrap();
    // b[i][j] = a[perm[i]][perm[j]], so pivot p of b is pivot perm[p] of a
    let mapped: Vec<usize> = fb.pivots().iter().map(|&p| perm[p]).collect();
    assert_eq!(mapped, fa.pivots());
    for (i, &p) in perm.iter().enumerate() {
        assert!((fb.diag_residual()[i] - fa.diag_residual()[p]).abs() <= 1e-10 * a.max_abs());
    }
}
