//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # Figure-1 setting
//! kernel = matern
//! nu = 0.5
//! lengthscale = 0.5
//! dim = 1
//! lower = -1
//! upper = 1
//! grid = 2001
//! strategy = complete
//! n_max = 200
//! ```
//!
//! Other keys: `alpha`, `sigma`, `shift`, `scale` (kernel parameters), `seed`,
//! `tol`, `fit_lo`, `fit_hi`, `refine` (δ target for grid refinement),
//! `lipschitz` (override the certified constant), `timing`, `grid_cap`,
//! `function` and `eval_grid` (GP demo).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Domain, DEFAULT_GRID_CAP};
use crate::kernels::{Kernel, KernelSpec};
use crate::pivoting::{PivotStrategy, RunConfig};

const KERNEL_PARAMS: [&str; 6] = ["nu", "lengthscale", "alpha", "sigma", "shift", "scale"];

/// Default points per axis for `dim = 1, 2, 3`.
pub fn default_grid(dim: usize) -> Option<usize> {
    match dim {
        1 => Some(2001),
        2 => Some(201),
        3 => Some(41),
        _ => None,
    }
}

/// Target functions for the GP demo.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// `sin(π Σ x_a)`
    Sine,
    /// `1/(1 + 25‖x‖²)`
    Runge,
    /// `Σ |x_a|`
    Abs,
}

impl TestFunction {
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Sine => (std::f64::consts::PI * x.iter().sum::<f64>()).sin(),
            TestFunction::Runge => 1.0 / (1.0 + 25.0 * x.iter().map(|v| v * v).sum::<f64>()),
            TestFunction::Abs => x.iter().map(|v| v.abs()).sum(),
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(TestFunction::Sine),
            "runge" => Ok(TestFunction::Runge),
            "abs" => Ok(TestFunction::Abs),
            other => Err(Error::Config(format!("unknown test function '{other}' (sine, runge, abs)"))),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestFunction::Sine => "sine",
            TestFunction::Runge => "runge",
            TestFunction::Abs => "abs",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    pub domain: Domain,
    pub grid: usize,
    pub strategy: PivotStrategy,
    pub n_max: usize,
    pub seed: u64,
    pub tol: f64,
    pub fit_lo: usize,
    pub fit_hi: usize,
    /// Run with grid refinement towards this δ instead of a fixed grid.
    pub refine: Option<f64>,
    pub timing: bool,
    pub grid_cap: usize,
    pub function: TestFunction,
    /// Evaluation points per axis for the GP demo.
    pub eval_grid: usize,
    /// Replaces the kernel's certified diagonal Lipschitz constant.
    pub lipschitz: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::parse("").expect("empty configuration is valid")
    }
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn parse_bounds(key: &str, v: &str, dim: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = v.split(',').map(|t| parse_value(key, t.trim())).collect::<Result<_>>()?;
    match vals.len() {
        1 => Ok(vec![vals[0]; dim]),
        n if n == dim => Ok(vals),
        n => Err(Error::Config(format!("{key}: {n} values for dimension {dim}"))),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if map.insert(k.clone(), v).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key '{k}'", lineno + 1)));
            }
        }
        Self::from_map(map)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn from_map(mut map: BTreeMap<String, String>) -> Result<Self> {
        let mut take = |k: &str| map.remove(k);
        let kernel_name = take("kernel").unwrap_or_else(|| "matern".into());
        let mut params = BTreeMap::new();
        for p in KERNEL_PARAMS {
            if let Some(v) = take(p) {
                params.insert(p.to_string(), parse_value(p, &v)?);
            }
        }
        let kernel = KernelSpec::from_name(&kernel_name, &params)?;
        let dim: usize = take("dim").map(|v| parse_value("dim", &v)).transpose()?.unwrap_or(1);
        if dim == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        if !kernel.supports_dim(dim) {
            return Err(Error::Config(format!("kernel '{kernel_name}' is not available in dimension {dim}")));
        }
        let canonical = kernel.canonical_domain(dim)?;
        let lower = match take("lower") {
            Some(v) => parse_bounds("lower", &v, dim)?,
            None => canonical.lower().to_vec(),
        };
        let upper = match take("upper") {
            Some(v) => parse_bounds("upper", &v, dim)?,
            None => canonical.upper().to_vec(),
        };
        let domain = Domain::new(lower, upper).map_err(|e| Error::Config(e.to_string()))?;
        let grid = match take("grid") {
            Some(v) => parse_value("grid", &v)?,
            None => default_grid(dim).ok_or_else(|| Error::Config(format!("set grid for dimension {dim}")))?,
        };
        let strategy = match take("strategy") {
            Some(v) => v.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            None => PivotStrategy::Complete,
        };
        let n_max: usize = take("n_max").map(|v| parse_value("n_max", &v)).transpose()?.unwrap_or(100);
        let seed = take("seed").map(|v| parse_value("seed", &v)).transpose()?.unwrap_or(0);
        let tol: f64 = take("tol").map(|v| parse_value("tol", &v)).transpose()?.unwrap_or(0.0);
        let fit_lo = take("fit_lo").map(|v| parse_value("fit_lo", &v)).transpose()?.unwrap_or(10);
        let fit_hi = take("fit_hi").map(|v| parse_value("fit_hi", &v)).transpose()?.unwrap_or(n_max);
        let lipschitz: Option<f64> = take("lipschitz").map(|v| parse_value("lipschitz", &v)).transpose()?;
        if lipschitz.is_some_and(|l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Config("lipschitz must be positive and finite".into()));
        }
        let refine = take("refine").map(|v| parse_value("refine", &v)).transpose()?;
        let timing = take("timing").map(|v| parse_value("timing", &v)).transpose()?.unwrap_or(false);
        let grid_cap = take("grid_cap").map(|v| parse_value("grid_cap", &v)).transpose()?.unwrap_or(DEFAULT_GRID_CAP);
        let function = take("function").map(|v| v.parse()).transpose()?.unwrap_or(TestFunction::Sine);
        let eval_grid = match take("eval_grid") {
            Some(v) => parse_value("eval_grid", &v)?,
            None => match dim {
                1 => 201,
                2 => 41,
                _ => 11,
            },
        };
        if let Some(k) = map.keys().next() {
            return Err(Error::Config(format!("unknown key '{k}'")));
        }
        if n_max == 0 {
            return Err(Error::Config("n_max must be positive".into()));
        }
        if tol < 0.0 || !tol.is_finite() {
            return Err(Error::Config("tol must be finite and nonnegative".into()));
        }
        Ok(ExperimentConfig {
            kernel,
            domain,
            grid,
            strategy,
            n_max,
            seed,
            tol,
            fit_lo,
            fit_hi,
            refine,
            timing,
            grid_cap,
            function,
            eval_grid,
            lipschitz,
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn build_kernel(&self) -> Result<Kernel> {
        let k = self.kernel.build(&self.domain)?;
        Ok(match self.lipschitz {
            Some(l) => k.with_diag_lipschitz(l),
            None => k,
        })
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg =
            RunConfig::new(self.build_kernel()?, self.domain.clone(), self.grid, self.strategy.clone(), self.n_max);
        cfg.stop_tol = self.tol;
        cfg.seed = self.seed;
        cfg.grid_cap = self.grid_cap;
        cfg.timing = self.timing;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::MaternNu;

    #[test]
    fn defaults_are_the_matern_line_setting() {
        let c = ExperimentConfig::default();
        assert_eq!(c.kernel, KernelSpec::Matern { nu: MaternNu::Half, lengthscale: 0.5 });
        assert_eq!(c.domain, Domain::cube(1, -1.0, 1.0).unwrap());
        assert_eq!(c.grid, 2001);
        assert_eq!(c.strategy, PivotStrategy::Complete);
    }

    #[test]
    fn parses_every_key() {
        let c = ExperimentConfig::parse(
            "kernel = gaussian\nsigma = 2 # wide\n\ndim = 2\nlower = -1, 0\nupper = 1\ngrid = 51\n\
             strategy = delta:0.5\nn_max = 30\nseed = 4\ntol = 1e-6\nfit_lo = 5\nfit_hi = 25\n\
             refine = 0.5\nlipschitz = 3\ntiming = true\nfunction = runge\neval_grid = 9\ngrid_cap = 10000",
        )
        .unwrap();
        assert_eq!(c.kernel, KernelSpec::Gaussian { sigma: 2.0 });
        assert_eq!(c.domain, Domain::new(vec![-1.0, 0.0], vec![1.0, 1.0]).unwrap());
        assert_eq!((c.grid, c.n_max, c.seed, c.fit_lo, c.fit_hi, c.eval_grid), (51, 30, 4, 5, 25, 9));
        assert_eq!(c.strategy, PivotStrategy::DeltaComplete { delta: 0.5 });
        assert_eq!(c.refine, Some(0.5));
        assert_eq!(c.lipschitz, Some(3.0));
        assert_eq!(c.build_kernel().unwrap().diag_lipschitz(), Some(3.0));
        assert!(c.timing);
        assert_eq!(c.function, TestFunction::Runge);
        assert_eq!(c.grid_cap, 10000);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "kernel = nope",
            "colour = red",
            "dim = 2\nlower = 0,0,0",
            "n_max = many",
            "n_max = 0",
            "kernel = green1d\ndim = 2",
            "strategy = delta:2",
            "grid = 5\ngrid = 6",
            "just words",
            "dim = 4",
            "lipschitz = -1",
        ] {
            assert!(matches!(ExperimentConfig::parse(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn green_kernel_defaults_to_unit_interval() {
        let c = ExperimentConfig::parse("kernel = green1d").unwrap();
        assert_eq!(c.domain, Domain::cube(1, 0.0, 1.0).unwrap());
    }
}
