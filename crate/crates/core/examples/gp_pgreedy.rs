//! P-greedy site selection for GP regression. The squared power function is
//! the posterior variance, so the greedy sites are the complete pivots.

use std::error::Error;
use std::sync::Arc;

use pivchol::gp::{pgreedy_select, GpPosterior};
use pivchol::{tensor_grid, CholeskyState, Domain, KernelSpec, MaternNu};

pub fn run() -> Result<(), Box<dyn Error>> {
    let domain = Domain::cube(1, -1.0, 1.0)?;
    let kernel = KernelSpec::Matern { nu: MaternNu::ThreeHalves, lengthscale: 0.5 }.build(&domain)?;
    let grid = Arc::new(tensor_grid(&domain, 501)?);
    let n = 12;

    let greedy = pgreedy_select(&kernel, &grid, n)?;
    let mut state = CholeskyState::init(kernel.clone(), Arc::clone(&grid))?;
    for _ in 0..n {
        state.step(state.max_diag().0)?;
    }
    assert_eq!(greedy.indices, state.pivots());
    println!("greedy sites: {:?}", greedy.sites.iter().map(|x| x[0]).collect::<Vec<_>>());

    let f = |x: &[f64]| (3.0 * x[0]).sin();
    let values: Vec<f64> = greedy.sites.iter().map(f).collect();
    let gp = GpPosterior::fit(&kernel, &greedy.sites, &values)?;
    let mut err: f64 = 0.0;
    let mut sd: f64 = 0.0;
    for x in grid.points() {
        err = err.max((gp.posterior_mean(x) - f(x)).abs());
        sd = sd.max(gp.posterior_sd(x));
    }
    println!("max |mean - f| {err:.3e}, max sd {sd:.3e}, sqrt sup residual {:.3e}", state.residual_sup_norm().sqrt());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
