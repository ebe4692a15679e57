//! Pivoted Cholesky of an SPD matrix with the a-priori entrywise bound
//! 4(m−1)G_A/(n−1), on the discretised Brownian covariance.

use std::error::Error;

use pivchol::bounds::BOUND_SLACK;
use pivchol::experiments::rate::fit_power_law;
use pivchol::matrix::{matrix_convergence, SpdMatrix};

pub fn run() -> Result<(), Box<dyn Error>> {
    let a = SpdMatrix::brownian(200)?;
    let out = matrix_convergence(&a, 100, BOUND_SLACK)?;
    println!("G_A = {:.4e}", out.g_a);
    for r in out.records.iter().filter(|r| [1, 2, 5, 10, 25, 50, 100].contains(&r.n)) {
        let bound = r.bound.map_or("-".into(), |b| format!("{b:.4e}"));
        println!("n={:>3} pivot {:>3}  max|A-A_n| {:.4e}  bound {bound}", r.n, r.pivot, r.residual_max);
    }
    let data: Vec<(usize, f64)> = out.records.iter().map(|r| (r.n, r.residual_max)).collect();
    println!("slope {:.3}, violations {}", fit_power_law(&data, 5, 100, 0.0)?.slope, out.violations);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
