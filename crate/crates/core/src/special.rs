//! Modified Bessel functions of the second kind, orders 0 and 1.
//!
//! Only what the Matérn ν = 1 kernel needs. Small arguments use the
//! ascending series; larger ones use the trapezoidal rule on
//! `K_ν(x) = ∫₀^∞ exp(−x cosh t) cosh(νt) dt`, which converges
//! geometrically fast because the integrand is entire and decays
//! doubly exponentially.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_CUTOFF: f64 = 2.0;
const QUAD_STEP: f64 = 0.125;
const QUAD_TAIL: f64 = 50.0;

/// `K_0(x)` for `x > 0`.
pub fn bessel_k0(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= SERIES_CUTOFF {
        k0_series(x)
    } else {
        k_integral(x, 0.0)
    }
}

/// `K_1(x)` for `x > 0`.
pub fn bessel_k1(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= SERIES_CUTOFF {
        k1_series(x)
    } else {
        k_integral(x, 1.0)
    }
}

fn k0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut term = 1.0; // q^k / (k!)^2
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut tail = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += harmonic * term;
        if term < 1e-18 * i0 {
            break;
        }
    }
    -log_term * i0 + tail
}

fn k1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    // term_k = q^k / (k! (k+1)!)
    let mut term = 1.0;
    let mut psi_k1 = -EULER_GAMMA; // psi(k+1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // psi(k+2)
    let mut i1_sum = 1.0;
    let mut psi_sum = psi_k1 + psi_k2;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * (kf + 1.0));
        psi_k1 += 1.0 / kf;
        psi_k2 += 1.0 / (kf + 1.0);
        i1_sum += term;
        psi_sum += (psi_k1 + psi_k2) * term;
        if term < 1e-18 * i1_sum {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    1.0 / x + (0.5 * x).ln() * i1 - 0.25 * x * psi_sum
}

fn k_integral(x: f64, order: f64) -> f64 {
    let mut sum = 0.5; // t = 0 endpoint, half weight
    let mut k = 1;
    loop {
        let t = k as f64 * QUAD_STEP;
        let s = (0.5 * t).sinh();
        let exponent = 2.0 * x * s * s; // x (cosh t - 1)
        if exponent > QUAD_TAIL {
            break;
        }
        sum += (-exponent).exp() * (order * t).cosh();
        k += 1;
    }
    (-x).exp() * QUAD_STEP * sum
}
