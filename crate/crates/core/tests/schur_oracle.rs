mod common;

use std::sync::Arc;

use pivchol::kernels::build_catalog_for;
use pivchol::{tensor_grid, CholeskyState, Domain, Kernel, KernelSpec, MaternNu};

fn complete_steps(kernel: &Kernel, grid: &Arc<pivchol::CandidateGrid>, n: usize) -> CholeskyState {
    let mut s = CholeskyState::init(kernel.clone(), Arc::clone(grid)).unwrap();
    for _ in 0..n {
        let (i, v) = s.max_diag();
        // stop while the pivot set is still well conditioned for the dense oracle
        if v < 1e-6 * s.k_max() {
            break;
        }
        s.step(i).unwrap();
    }
    s
}

fn pivot_points(s: &CholeskyState) -> Vec<Vec<f64>> {
    s.pivots().iter().map(|&i| s.grid().point(i).to_vec()).collect()
}

#[test]
fn incremental_diagonal_matches_dense_schur_for_every_catalog_kernel() {
    for dim in 1..=2 {
        let m = if dim == 1 { 401 } else { 21 };
        for kernel in build_catalog_for(dim) {
            let spec = kernel.spec().unwrap().clone();
            let domain = spec.canonical_domain(dim).unwrap();
            let grid = Arc::new(tensor_grid(&domain, m).unwrap());
            for n in [1, 5, 12, 20] {
                let s = complete_steps(&kernel, &grid, n);
                let sites = pivot_points(&s);
                let oracle: Vec<f64> = grid.points().map(|x| common::schur(&kernel, &sites, x, x)).collect();
                let gap = common::max_gap(s.diag_residual(), &oracle);
                assert!(gap <= 1e-8 * s.k_max(), "{} d={dim} n={}: gap {gap:e}", kernel.name(), s.rank());
            }
        }
    }
}

#[test]
fn off_grid_residual_matches_dense_schur() {
    let k = KernelSpec::Matern { nu: MaternNu::One, lengthscale: 0.5 }.build_canonical(1).unwrap();
    let grid = Arc::new(tensor_grid(&Domain::cube(1, -1.0, 1.0).unwrap(), 201).unwrap());
    let s = complete_steps(&k, &grid, 15);
    let sites = pivot_points(&s);
    for i in 0..50 {
        let x = [-1.0 + 2.0 * ((i as f64) * 0.618_033_988_7).fract()];
        let y = [-1.0 + 2.0 * ((i as f64) * 0.414_213_562_3 + 0.1).fract()];
        let got = s.residual_eval(&x, &y).unwrap();
        assert!((got - common::schur(&k, &sites, &x, &y)).abs() <= 1e-8);
    }
}

#[test]
fn brownian_two_pivot_closed_form() {
    // min(x+1, y+1) with pivots at 1 then 0: R_2(x,x) = x+1 − (x+1)²/2 − R_1(x,0)²/R_1(0,0)
    let k = KernelSpec::Brownian { shift: 1.0 }.build_canonical(1).unwrap();
    let grid = Arc::new(tensor_grid(&Domain::cube(1, -1.0, 1.0).unwrap(), 41).unwrap());
    let s = complete_steps(&k, &grid, 2);
    assert_eq!(s.pivots(), &[40, 20]);
    for (x, r) in grid.points().zip(s.diag_residual()) {
        let x = x[0];
        let r1 = |a: f64, b: f64| (a + 1.0).min(b + 1.0) - (a + 1.0) * (b + 1.0) / 2.0;
        let expected = r1(x, x) - r1(x, 0.0).powi(2) / r1(0.0, 0.0);
        assert!((r - expected.max(0.0)).abs() < 1e-14, "x={x}");
    }
}

#[test]
fn green_kernel_residual_is_piecewise_linear_bridge() {
    // min(x,y) − xy with a pivot at 1/2 splits into two independent bridges
    let k = KernelSpec::Green1d.build_canonical(1).unwrap();
    let grid = Arc::new(tensor_grid(&Domain::cube(1, 0.0, 1.0).unwrap(), 101).unwrap());
    let mut s = CholeskyState::init(k, Arc::clone(&grid)).unwrap();
    assert_eq!(s.max_diag().0, 50);
    s.step(50).unwrap();
    for (x, r) in grid.points().zip(s.diag_residual()) {
        let x = x[0];
        let (a, b) = if x <= 0.5 { (0.0, 0.5) } else { (0.5, 1.0) };
        let expected = (x - a) * (b - x) / (b - a);
        assert!((r - expected).abs() < 1e-14);
    }
}
