//! SPD kernels with diagonal-Lipschitz and C^{1,1} metadata.
//!
//! Every catalog constructor certifies its constants on a concrete box
//! domain, because several of them (Brownian, rational) depend on how far
//! the box reaches from the origin.
//!
//! The 2D/3D Laplace Green's functions are not in the catalog: they are
//! singular on the diagonal and so have no diagonal Lipschitz constant.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{dist, dist2, Domain};
use crate::special::bessel_k1;

/// `max_{s>0} s K_0(s)`, rounded up; gives the Matérn ν = 1 slope bound.
const MAX_S_K0: f64 = 0.466_523_634_782_75;

pub type KernelFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// Matérn smoothness values with closed-form evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaternNu {
    Half,
    One,
    ThreeHalves,
}

impl MaternNu {
    pub fn from_value(nu: f64) -> Result<Self> {
        match nu {
            0.5 => Ok(MaternNu::Half),
            1.0 => Ok(MaternNu::One),
            1.5 => Ok(MaternNu::ThreeHalves),
            _ => Err(Error::arg(format!("Matérn ν = {nu} unsupported (use 0.5, 1 or 1.5)"))),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            MaternNu::Half => 0.5,
            MaternNu::One => 1.0,
            MaternNu::ThreeHalves => 1.5,
        }
    }
}

/// Constructor parameters of a built-in kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `α exp(−‖x−y‖/ℓ)`.
    Ou {
        alpha: f64,
        lengthscale: f64,
    },
    Matern {
        nu: MaternNu,
        lengthscale: f64,
    },
    /// `∏ min(x_i + shift, y_i + shift)`.
    Brownian {
        shift: f64,
    },
    /// `min(x, y) − xy` on a subset of `[0, 1]`.
    Green1d,
    /// `exp(−‖x−y‖² / (2σ²))`.
    Gaussian {
        sigma: f64,
    },
    /// `1 / (1 + c (‖x‖² − ‖y‖²)²)`, `c = 100` in the catalog.
    RationalA {
        scale: f64,
    },
    /// `1 / (1 + ‖x‖² + ‖y‖²)`.
    RationalB,
}

impl KernelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Ou { .. } => "ou",
            KernelSpec::Matern { .. } => "matern",
            KernelSpec::Brownian { .. } => "brownian",
            KernelSpec::Green1d => "green1d",
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::RationalA { .. } => "rational-a",
            KernelSpec::RationalB => "rational-b",
        }
    }

    /// Looks up a catalog kernel by name; missing parameters take their defaults
    /// (ν = 1/2, ℓ = 1/2, α = 1, σ = 1, shift = 1, c = 100).
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        let spec = match name {
            "ou" => KernelSpec::Ou { alpha: get("alpha", 1.0), lengthscale: get("lengthscale", 0.5) },
            "matern" => {
                KernelSpec::Matern { nu: MaternNu::from_value(get("nu", 0.5))?, lengthscale: get("lengthscale", 0.5) }
            }
            "brownian" => KernelSpec::Brownian { shift: get("shift", 1.0) },
            "green1d" => KernelSpec::Green1d,
            "gaussian" => KernelSpec::Gaussian { sigma: get("sigma", 1.0) },
            "rational-a" => KernelSpec::RationalA { scale: get("scale", 100.0) },
            "rational-b" => KernelSpec::RationalB,
            other => return Err(Error::Config(format!("unknown kernel '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let positive = |what: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::arg(format!("{what} must be positive, got {v}")))
            }
        };
        match *self {
            KernelSpec::Ou { alpha, lengthscale } => {
                positive("alpha", alpha)?;
                positive("lengthscale", lengthscale)
            }
            KernelSpec::Matern { lengthscale, .. } => positive("lengthscale", lengthscale),
            KernelSpec::Brownian { shift } => {
                if shift.is_finite() {
                    Ok(())
                } else {
                    Err(Error::arg("shift must be finite"))
                }
            }
            KernelSpec::Gaussian { sigma } => positive("sigma", sigma),
            KernelSpec::RationalA { scale } => positive("scale", scale),
            KernelSpec::Green1d | KernelSpec::RationalB => Ok(()),
        }
    }

    /// The domain the catalog uses: `[0,1]` for `green1d`, `[−1,1]^d` otherwise.
    /// Named parameters, in the keys accepted by [`KernelSpec::from_name`].
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            KernelSpec::Ou { alpha, lengthscale } => vec![("alpha", alpha), ("lengthscale", lengthscale)],
            KernelSpec::Matern { nu, lengthscale } => vec![("nu", nu.value()), ("lengthscale", lengthscale)],
            KernelSpec::Brownian { shift } => vec![("shift", shift)],
            KernelSpec::Gaussian { sigma } => vec![("sigma", sigma)],
            KernelSpec::RationalA { scale } => vec![("scale", scale)],
            KernelSpec::Green1d | KernelSpec::RationalB => Vec::new(),
        }
    }

    pub fn canonical_domain(&self, dim: usize) -> Result<Domain> {
        match self {
            KernelSpec::Green1d => Domain::cube(dim, 0.0, 1.0),
            _ => Domain::cube(dim, -1.0, 1.0),
        }
    }

    pub fn supports_dim(&self, dim: usize) -> bool {
        dim >= 1 && (dim == 1 || !matches!(self, KernelSpec::Green1d))
    }

    /// Whether every Gram matrix on distinct interior points is nonsingular.
    /// The rational kernels only see `‖x‖`, so `x` and `−x` give identical rows.
    pub fn strictly_positive_definite(&self) -> bool {
        !matches!(self, KernelSpec::RationalA { .. } | KernelSpec::RationalB)
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Ou { alpha, lengthscale } => alpha * (-dist(x, y) / lengthscale).exp(),
            KernelSpec::Matern { nu, lengthscale } => matern(nu, dist(x, y) / lengthscale),
            KernelSpec::Brownian { shift } => x.iter().zip(y).map(|(a, b)| (a + shift).min(b + shift)).product(),
            KernelSpec::Green1d => x[0].min(y[0]) - x[0] * y[0],
            KernelSpec::Gaussian { sigma } => (-dist2(x, y) / (2.0 * sigma * sigma)).exp(),
            KernelSpec::RationalA { scale } => {
                let u = norm2(x) - norm2(y);
                1.0 / (1.0 + scale * u * u)
            }
            KernelSpec::RationalB => 1.0 / (1.0 + norm2(x) + norm2(y)),
        }
    }

    /// Certified `L` with `|K(x,x) − K(x,y)| ≤ L‖x − y‖` on `domain`.
    fn diag_lipschitz(&self, domain: &Domain) -> Result<f64> {
        let d = domain.dim() as f64;
        Ok(match *self {
            KernelSpec::Ou { alpha, lengthscale } => alpha / lengthscale,
            KernelSpec::Matern { nu, lengthscale } => match nu {
                MaternNu::Half => 1.0 / lengthscale,
                MaternNu::One => 2f64.sqrt() / lengthscale * MAX_S_K0,
                MaternNu::ThreeHalves => 3f64.sqrt() / lengthscale * (-1f64).exp(),
            },
            KernelSpec::Brownian { shift } => {
                if domain.lower().iter().any(|l| l + shift < 0.0) {
                    return Err(Error::arg("Brownian kernel needs x + shift >= 0 on the domain"));
                }
                let reach = domain.upper().iter().map(|u| u + shift).fold(0.0, f64::max);
                reach.powf(d - 1.0) * d.sqrt()
            }
            KernelSpec::Green1d => {
                if domain.lower()[0] < 0.0 || domain.upper()[0] > 1.0 {
                    return Err(Error::arg("green1d lives on a subset of [0, 1]"));
                }
                1.0
            }
            KernelSpec::Gaussian { sigma } => (-0.5f64).exp() / sigma,
            KernelSpec::RationalA { scale } => scale.sqrt() * domain.max_norm(),
            KernelSpec::RationalB => 0.5 + 0.5 / 2f64.sqrt(),
        })
    }

    fn c11(&self) -> Option<C11Constants> {
        match *self {
            KernelSpec::Gaussian { sigma } => Some(C11Constants {
                deriv_lipschitz: 1.0 / (sigma * sigma),
                value_lipschitz: (-0.5f64).exp() / sigma,
                min_diag: 1.0,
            }),
            KernelSpec::Matern { nu: MaternNu::ThreeHalves, lengthscale } => {
                let a = 3f64.sqrt() / lengthscale;
                Some(C11Constants { deriv_lipschitz: a * a, value_lipschitz: a * (-1f64).exp(), min_diag: 1.0 })
            }
            _ => None,
        }
    }

    /// Builds the kernel with constants certified on `domain`.
    pub fn build(&self, domain: &Domain) -> Result<Kernel> {
        self.validate()?;
        let dim = domain.dim();
        if !self.supports_dim(dim) {
            return Err(Error::arg(format!("{} is not defined in dimension {dim}", self.name())));
        }
        let diag_lipschitz = Some(self.diag_lipschitz(domain)?);
        Ok(Kernel {
            name: self.name().to_string(),
            dim,
            eval: Evaluator::Catalog(self.clone()),
            diag_lipschitz,
            c11: self.c11(),
            strictly_pd: self.strictly_positive_definite(),
        })
    }

    /// Builds the kernel on its canonical domain.
    pub fn build_canonical(&self, dim: usize) -> Result<Kernel> {
        self.build(&self.canonical_domain(dim)?)
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Matérn correlation at scaled distance `t = r/ℓ`.
fn matern(nu: MaternNu, t: f64) -> f64 {
    match nu {
        MaternNu::Half => (-t).exp(),
        MaternNu::One => {
            let s = 2f64.sqrt() * t;
            if s == 0.0 {
                1.0
            } else {
                s * bessel_k1(s)
            }
        }
        MaternNu::ThreeHalves => {
            let s = 3f64.sqrt() * t;
            (1.0 + s) * (-s).exp()
        }
    }
}

/// Constants of a C^{1,1} kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct C11Constants {
    /// `L`: `|∂ʲK(x,y) − ∂ʲK(x,x)| ≤ L‖x−y‖` for both arguments.
    pub deriv_lipschitz: f64,
    /// `L0`: `|K(x,y) − K(x',y)| ≤ L0‖x−x'‖`.
    pub value_lipschitz: f64,
    /// `K_min = min_x K(x,x) > 0`.
    pub min_diag: f64,
}

impl C11Constants {
    /// `√d (2L + L0²/K_min)`, the coefficient of the quadratic diagonal bound.
    pub fn quadratic_coefficient(&self, dim: usize) -> f64 {
        (dim as f64).sqrt() * (2.0 * self.deriv_lipschitz + self.value_lipschitz * self.value_lipschitz / self.min_diag)
    }
}

#[derive(Clone)]
enum Evaluator {
    Catalog(KernelSpec),
    Custom(Arc<KernelFn>),
}

/// An evaluatable SPD kernel plus its smoothness metadata. Cheap to clone.
#[derive(Clone)]
pub struct Kernel {
    name: String,
    dim: usize,
    eval: Evaluator,
    diag_lipschitz: Option<f64>,
    c11: Option<C11Constants>,
    strictly_pd: bool,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("diag_lipschitz", &self.diag_lipschitz)
            .field("c11", &self.c11)
            .finish()
    }
}

impl Kernel {
    /// Wraps a user function. It must be symmetric and positive semidefinite;
    /// no constants are attached until [`Kernel::with_diag_lipschitz`].
    pub fn custom<F>(name: impl Into<String>, dim: usize, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Kernel {
            name: name.into(),
            dim,
            eval: Evaluator::Custom(Arc::new(f)),
            diag_lipschitz: None,
            c11: None,
            strictly_pd: false,
        }
    }

    /// Attaches a diagonal Lipschitz constant the caller vouches for.
    pub fn with_diag_lipschitz(mut self, l: f64) -> Self {
        self.diag_lipschitz = Some(l);
        self
    }

    pub fn with_c11(mut self, c: C11Constants) -> Self {
        self.c11 = Some(c);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Certified diagonal Lipschitz constant, if any.
    pub fn diag_lipschitz(&self) -> Option<f64> {
        self.diag_lipschitz
    }

    pub fn c11_constants(&self) -> Option<C11Constants> {
        self.c11
    }

    pub fn is_strictly_pd(&self) -> bool {
        self.strictly_pd
    }

    pub fn spec(&self) -> Option<&KernelSpec> {
        match &self.eval {
            Evaluator::Catalog(s) => Some(s),
            Evaluator::Custom(_) => None,
        }
    }

    /// `K(x, y)` without dimension checks; the hot path.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.eval {
            Evaluator::Catalog(s) => s.eval(x, y),
            Evaluator::Custom(f) => f(x, y),
        }
    }

    /// `K(x, y)` with dimension checks.
    pub fn try_eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.dim || y.len() != self.dim {
            return Err(Error::arg(format!(
                "kernel {} expects dimension {}, got {} and {}",
                self.name,
                self.dim,
                x.len(),
                y.len()
            )));
        }
        Ok(self.eval(x, y))
    }
}

/// The built-in kernels in dimension 1 on their canonical domains.
pub fn build_catalog() -> Vec<Kernel> {
    build_catalog_for(1)
}

/// Catalog specs with the parameters used throughout the experiments.
pub fn catalog_specs() -> Vec<KernelSpec> {
    vec![
        KernelSpec::Ou { alpha: 1.0, lengthscale: 0.5 },
        KernelSpec::Matern { nu: MaternNu::Half, lengthscale: 0.5 },
        KernelSpec::Matern { nu: MaternNu::One, lengthscale: 0.5 },
        KernelSpec::Matern { nu: MaternNu::ThreeHalves, lengthscale: 0.5 },
        KernelSpec::Brownian { shift: 1.0 },
        KernelSpec::Green1d,
        KernelSpec::Gaussian { sigma: 1.0 },
        KernelSpec::RationalA { scale: 100.0 },
        KernelSpec::RationalB,
    ]
}

/// Every catalog kernel defined in dimension `dim`, each on its canonical domain.
pub fn build_catalog_for(dim: usize) -> Vec<Kernel> {
    catalog_specs()
        .into_iter()
        .filter(|s| s.supports_dim(dim))
        .map(|s| s.build_canonical(dim).expect("catalog parameters are valid"))
        .collect()
}

/// Non-certified estimate of the diagonal Lipschitz constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzEstimate {
    pub value: f64,
    pub pairs: usize,
}

/// Maximises `|K(x,x) − K(x,y)| / ‖x − y‖` over random pairs in `domain`.
///
/// Half of the pairs are close (log-uniform separation down to 1e-6 of the
/// diameter) because the supremum is often approached as `y → x`. The
/// result is a lower bound on the true constant and is never certified.
pub fn estimate_diag_lipschitz<R: Rng>(
    kernel: &Kernel,
    domain: &Domain,
    pairs: usize,
    rng: &mut R,
) -> LipschitzEstimate {
    let dim = domain.dim();
    let diam = domain.diameter();
    let mut best = 0.0f64;
    let mut x = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    for k in 0..pairs {
        for (a, xa) in x.iter_mut().enumerate() {
            *xa = rng.random_range(domain.lower()[a]..=domain.upper()[a]);
        }
        if k % 2 == 0 {
            for (a, ya) in y.iter_mut().enumerate() {
                *ya = rng.random_range(domain.lower()[a]..=domain.upper()[a]);
            }
        } else {
            let scale = diam * 10f64.powf(rng.random_range(-6.0..0.0));
            for a in 0..dim {
                let v = x[a] + scale * rng.random_range(-1.0..1.0);
                y[a] = v.clamp(domain.lower()[a], domain.upper()[a]);
            }
        }
        let r = dist(&x, &y);
        if r > 0.0 {
            best = best.max((kernel.eval(&x, &x) - kernel.eval(&x, &y)).abs() / r);
        }
    }
    LipschitzEstimate { value: best, pairs }
}
