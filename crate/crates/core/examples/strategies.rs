//! Every pivoting strategy on the same kernel and grid, with its bound report.

use std::error::Error;

use pivchol::{run as factorise, Domain, KernelSpec, MaternNu, PivotStrategy, RunConfig};

pub fn run() -> Result<(), Box<dyn Error>> {
    let domain = Domain::cube(1, -1.0, 1.0)?;
    let kernel = KernelSpec::Matern { nu: MaternNu::One, lengthscale: 0.5 }.build(&domain)?;
    let strategies = ["complete", "delta:0.5", "uniform:40", "random:3", "maxvol:20"];
    println!("{:<12} {:>4} {:>12} {:>10} {:>10}", "strategy", "n", "sup", "fill", "violations");
    for s in strategies {
        let strategy: PivotStrategy = s.parse()?;
        let mut cfg = RunConfig::new(kernel.clone(), domain.clone(), 401, strategy, 40);
        cfg.seed = 11;
        let out = factorise(&cfg)?;
        let last = out.records.last().ok_or("empty run")?;
        println!(
            "{s:<12} {:>4} {:>12.4e} {:>10.4} {:>10}",
            last.n,
            last.sup_residual,
            last.fill,
            out.report.total_violations()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
