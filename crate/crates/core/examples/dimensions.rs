//! How the Matérn ν=1/2 rate degrades with dimension (roughly n^{−1/d}).

use std::error::Error;

use pivchol::experiments::fit_rate;
use pivchol::{run as factorise, Domain, KernelSpec, MaternNu, PivotStrategy, RunConfig};

pub fn run() -> Result<(), Box<dyn Error>> {
    for (dim, m, n) in [(1, 1001, 150), (2, 61, 150), (3, 21, 150)] {
        let domain = Domain::cube(dim, -1.0, 1.0)?;
        let kernel = KernelSpec::Matern { nu: MaternNu::Half, lengthscale: 0.5 }.build(&domain)?;
        let out = factorise(&RunConfig::new(kernel, domain, m, PivotStrategy::Complete, n))?;
        let fit = fit_rate(&out.records, 10, n)?;
        let last = out.records.last().ok_or("empty run")?;
        println!(
            "d={dim}: grid {m}^{dim}, sup after {n} pivots {:.3e}, slope {:.3}, guide {:.3}",
            last.sup_residual,
            fit.slope,
            -1.0 / dim as f64
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
