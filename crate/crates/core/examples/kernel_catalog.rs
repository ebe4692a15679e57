//! Lists the built-in kernels with their constants and checks each certified
//! diagonal Lipschitz constant against a random-pair estimate.

use std::error::Error;

use pivchol::kernels::{build_catalog_for, estimate_diag_lipschitz};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("{:<32} {:>3} {:>12} {:>12} {:>6}", "kernel", "d", "L", "estimate", "C11");
    for dim in 1..=2 {
        for kernel in build_catalog_for(dim) {
            let spec = kernel.spec().ok_or("catalog kernel without spec")?;
            let domain = spec.canonical_domain(dim)?;
            let params: Vec<String> = spec.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
            let label = format!("{} {}", kernel.name(), params.join(","));
            let est = estimate_diag_lipschitz(&kernel, &domain, 20_000, &mut rng);
            let l = kernel.diag_lipschitz();
            if let Some(l) = l {
                assert!(est.value <= l * (1.0 + 1e-6), "{}: estimate above certificate", kernel.name());
            }
            println!(
                "{:<32} {:>3} {:>12} {:>12.6} {:>6}",
                label,
                dim,
                l.map_or("-".into(), |l| format!("{l:.6}")),
                est.value,
                if kernel.c11_constants().is_some() { "yes" } else { "no" }
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
