//! Independent dense oracles shared by the integration tests and the
//! acceptance runner. Nothing here calls into the factorisation code.

#![allow(dead_code)]

use pivchol::Kernel;

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(row);
            for (r, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *r -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut d = 1.0;
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if p != col {
            a.swap(col, p);
            d = -d;
        }
        if a[col][col] == 0.0 {
            return 0.0;
        }
        d *= a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(row);
            for (r, p) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *r -= f * p;
            }
        }
    }
    d
}

pub fn gram(kernel: &Kernel, sites: &[Vec<f64>]) -> Vec<Vec<f64>> {
    sites.iter().map(|x| sites.iter().map(|y| kernel.eval(x, y)).collect()).collect()
}

/// `K(x, y) − k(x)ᵀ K(S, S)⁻¹ k(y)` by a dense solve.
pub fn schur(kernel: &Kernel, sites: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    if sites.is_empty() {
        return kernel.eval(x, y);
    }
    let ky: Vec<f64> = sites.iter().map(|s| kernel.eval(s, y)).collect();
    let w = solve(gram(kernel, sites), ky);
    kernel.eval(x, y) - sites.iter().zip(&w).map(|(s, wi)| kernel.eval(x, s) * wi).sum::<f64>()
}

/// Largest entrywise gap between two slices.
pub fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Fisher–Yates shuffle driven by a small LCG, so permutations do not depend
/// on the crate's own RNG plumbing.
pub fn shuffle(v: &mut [usize], seed: u64) {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    for i in (1..v.len()).rev() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let j = ((s >> 33) % (i as u64 + 1)) as usize;
        v.swap(i, j);
    }
}
