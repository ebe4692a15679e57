//! Smoother Matérn kernels converge faster under complete pivoting.

use std::error::Error;

use pivchol::experiments::fit_rate;
use pivchol::{run as factorise, Domain, KernelSpec, MaternNu, PivotStrategy, RunConfig};

pub fn run() -> Result<(), Box<dyn Error>> {
    let domain = Domain::cube(1, -1.0, 1.0)?;
    for nu in [MaternNu::Half, MaternNu::One, MaternNu::ThreeHalves] {
        let kernel = KernelSpec::Matern { nu, lengthscale: 0.5 }.build(&domain)?;
        let out = factorise(&RunConfig::new(kernel, domain.clone(), 2001, PivotStrategy::Complete, 150))?;
        let fit = fit_rate(&out.records, 10, 150)?;
        println!("nu={:<4} slope {:.3}  (guide {:.1})", nu.value(), fit.slope, -2.0 * nu.value());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
