//! The per-bound report of a run: checks, violations and the worst ratio of
//! value to bound, for a smooth kernel where the quadratic bounds apply.

use std::error::Error;

use pivchol::{run as factorise, Domain, KernelSpec, PivotStrategy, RunConfig};

pub fn run() -> Result<(), Box<dyn Error>> {
    let domain = Domain::cube(2, -1.0, 1.0)?;
    let kernel = KernelSpec::Gaussian { sigma: 1.0 }.build(&domain)?;
    let out = factorise(&RunConfig::new(kernel, domain, 61, PivotStrategy::Complete, 60))?;
    println!("{} steps, stopped: {:?}", out.records.len(), out.termination);
    println!("{:<20} {:>7} {:>10} {:>10} {:>6}", "bound", "checks", "violations", "worst", "at n");
    for (kind, stat) in out.report.iter() {
        println!(
            "{:<20} {:>7} {:>10} {:>10.4} {:>6}",
            kind.label(),
            stat.checks,
            stat.violations,
            stat.worst_ratio,
            stat.worst_step
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
