//! The experiment subcommands. Each writes its CSV product to `csv` and a
//! human-readable summary to `log`.

use std::io::Write;
use std::path::Path;

use crate::bounds::{BoundReport, ConvergenceRecord};
use crate::cholesky::BREAKDOWN_TOLERANCE;
use crate::error::{Error, Result};
use crate::experiments::config::ExperimentConfig;
use crate::experiments::rate::{fit_power_law, fit_rate, RateFit};
use crate::experiments::trace;
use crate::geometry::{tensor_grid, PivotSet};
use crate::gp::GpPosterior;
use crate::kernels::catalog_specs;
use crate::matrix::{matrix_convergence, SpdMatrix};
use crate::pivoting::{refine_grid_run, run, PivotStrategy};

/// Process exit codes.
pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_BREAKDOWN: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Success,
    /// Bound checks failed this many times.
    Violations(usize),
    /// The run stopped on a numeric failure; partial output was written.
    Breakdown(String),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Success => EXIT_SUCCESS,
            Outcome::Violations(_) => EXIT_VIOLATION,
            Outcome::Breakdown(_) => EXIT_BREAKDOWN,
        }
    }
}

/// Exit code for an error that aborted a command.
pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_numeric() {
        EXIT_BREAKDOWN
    } else {
        EXIT_INPUT
    }
}

/// Result of a factorisation experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub records: Vec<ConvergenceRecord>,
    pub report: BoundReport,
    pub fit: Option<RateFit>,
    pub outcome: Outcome,
}

fn execute(cfg: &ExperimentConfig, csv: &mut dyn Write) -> Result<Experiment> {
    let rc = cfg.run_config()?;
    let result = match cfg.refine {
        Some(delta) => refine_grid_run(&rc, delta),
        None => run(&rc),
    };
    let (records, report, failure) = match result {
        Ok(out) => (out.records, out.report, None),
        Err(e) => (e.records, e.report, Some(e.error)),
    };
    if let Some(e) = &failure {
        if !e.is_numeric() && records.is_empty() {
            return Err(e.clone());
        }
    }
    trace::write_records(csv, cfg.dim(), &records)?;
    let outcome = match failure {
        Some(e) if e.is_numeric() => {
            trace::write_warning(csv, &e.to_string())?;
            Outcome::Breakdown(e.to_string())
        }
        Some(e) => {
            trace::write_warning(csv, &e.to_string())?;
            return Err(e);
        }
        None if !report.is_clean() => Outcome::Violations(report.total_violations()),
        None => Outcome::Success,
    };
    let fit = fit_rate(&records, cfg.fit_lo, cfg.fit_hi).ok();
    Ok(Experiment { records, report, fit, outcome })
}

fn describe(cfg: &ExperimentConfig) -> String {
    let params: Vec<String> = cfg.kernel.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!(
        "kernel={} {} dim={} grid={}^{} strategy={} n_max={}",
        cfg.kernel.name(),
        params.join(" "),
        cfg.dim(),
        cfg.grid,
        cfg.dim(),
        cfg.strategy,
        cfg.n_max
    )
}

fn write_summary(log: &mut dyn Write, cfg: &ExperimentConfig, exp: &Experiment) -> Result<()> {
    writeln!(log, "{}", describe(cfg))?;
    writeln!(log, "steps={}", exp.records.len())?;
    if let Some(last) = exp.records.last() {
        writeln!(
            log,
            "final sup_residual={:.6e} fill={:.6e} grid_size={}",
            last.sup_residual, last.fill, last.grid_size
        )?;
    }
    match &exp.fit {
        Some(f) => writeln!(
            log,
            "rate: slope={:.4} intercept={:.4} r_squared={:.4} over n in [{}, {}] ({} points)",
            f.slope, f.intercept, f.r_squared, f.n_lo, f.n_hi, f.points
        )?,
        None => writeln!(log, "rate: not enough points in [{}, {}]", cfg.fit_lo, cfg.fit_hi)?,
    }
    write!(log, "{}", exp.report)?;
    match &exp.outcome {
        Outcome::Success => writeln!(log, "bounds: no violations")?,
        Outcome::Violations(v) => writeln!(log, "bounds: {v} violations")?,
        Outcome::Breakdown(msg) => writeln!(log, "stopped early: {msg}")?,
    }
    Ok(())
}

/// Runs one configured experiment, writes its trace, and reports the fitted
/// rate and the worst ratio per bound.
pub fn cmd_convergence(cfg: &ExperimentConfig, csv: &mut dyn Write, log: &mut dyn Write) -> Result<Experiment> {
    let exp = execute(cfg, csv)?;
    write_summary(log, cfg, &exp)?;
    Ok(exp)
}

/// Like [`cmd_convergence`], but requires a certified Lipschitz constant and
/// treats the bound report as the product.
pub fn cmd_bounds(cfg: &ExperimentConfig, csv: &mut dyn Write, log: &mut dyn Write) -> Result<Experiment> {
    if cfg.build_kernel()?.diag_lipschitz().is_none() {
        return Err(Error::Config(format!("kernel '{}' has no certified Lipschitz constant", cfg.kernel.name())));
    }
    cmd_convergence(cfg, csv, log)
}

/// Complete pivoting on a matrix file, with the `4(m−1)G_A/(n−1)` check.
pub fn cmd_matrix(path: &Path, n_max: Option<usize>, csv: &mut dyn Write, log: &mut dyn Write) -> Result<Outcome> {
    let a = SpdMatrix::read(path)?;
    let m = a.order();
    let run = matrix_convergence(&a, n_max.unwrap_or(m), crate::bounds::BOUND_SLACK)?;
    writeln!(csv, "n,pivot,residual_max,bound")?;
    for r in &run.records {
        let bound = r.bound.map(|b| format!("{b:.16e}")).unwrap_or_default();
        writeln!(csv, "{},{},{:.16e},{}", r.n, r.pivot, r.residual_max, bound)?;
    }
    writeln!(log, "matrix order={m} G_A={:.6e} steps={}", run.g_a, run.records.len())?;
    if run.exhausted {
        writeln!(log, "residual vanished after {} steps", run.records.len())?;
    }
    let data: Vec<(usize, f64)> = run.records.iter().map(|r| (r.n, r.residual_max)).collect();
    if let Ok(f) = fit_power_law(&data, 2, m, 10.0 * BREAKDOWN_TOLERANCE * a.max_abs()) {
        writeln!(log, "rate: slope={:.4} r_squared={:.4} ({} points)", f.slope, f.r_squared, f.points)?;
    }
    let worst =
        run.records.iter().filter_map(|r| r.bound.map(|b| r.residual_max / b)).fold(f64::NEG_INFINITY, f64::max);
    if worst.is_finite() {
        writeln!(log, "worst residual/bound ratio={worst:.6}")?;
    }
    writeln!(log, "violations={}", run.violations)?;
    Ok(if run.violations > 0 { Outcome::Violations(run.violations) } else { Outcome::Success })
}

/// Summary of a GP fit at complete-pivoting sites.
#[derive(Debug, Clone, PartialEq)]
pub struct GpDemo {
    pub sites: usize,
    pub max_abs_error: f64,
    pub max_sd: f64,
    pub min_variance: f64,
}

/// Fits a noise-free GP to the configured test function at the first
/// `n_max` complete-pivoting sites and tabulates it on an evaluation grid.
pub fn cmd_gp_demo(cfg: &ExperimentConfig, csv: &mut dyn Write, log: &mut dyn Write) -> Result<GpDemo> {
    let mut rc = cfg.run_config()?;
    rc.strategy = PivotStrategy::Complete;
    let out = run(&rc).map_err(|e| e.error)?;
    let grid = out.state.grid();
    let sites = PivotSet::from_grid(grid, out.state.pivots())?;
    let values: Vec<f64> = sites.iter().map(|x| cfg.function.eval(x)).collect();
    let gp = GpPosterior::fit(out.state.kernel(), &sites, &values)?;

    let eval = tensor_grid(&cfg.domain, cfg.eval_grid)?;
    let dim = cfg.dim();
    let mut head: Vec<String> = (0..dim).map(|a| format!("x{a}")).collect();
    head.extend(["mean", "sd", "truth"].map(String::from));
    writeln!(csv, "{}", head.join(","))?;
    let mut demo = GpDemo { sites: sites.len(), max_abs_error: 0.0, max_sd: 0.0, min_variance: f64::INFINITY };
    for x in eval.points() {
        let mean = gp.posterior_mean(x);
        let var = gp.posterior_variance(x);
        let sd = var.max(0.0).sqrt();
        let truth = cfg.function.eval(x);
        demo.max_abs_error = demo.max_abs_error.max((mean - truth).abs());
        demo.max_sd = demo.max_sd.max(sd);
        demo.min_variance = demo.min_variance.min(var);
        let mut row: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
        row.extend([mean, sd, truth].map(|v| format!("{v:.16e}")));
        writeln!(csv, "{}", row.join(","))?;
    }
    writeln!(log, "{} function={}", describe(cfg), cfg.function)?;
    writeln!(
        log,
        "sites={} eval_points={} max_abs_error={:.6e} max_sd={:.6e} min_variance={:.3e}",
        demo.sites,
        eval.len(),
        demo.max_abs_error,
        demo.max_sd,
        demo.min_variance
    )?;
    if demo.min_variance < -1e-10 {
        writeln!(log, "warning: negative posterior variance")?;
    }
    Ok(demo)
}

/// Lists the built-in kernels in dimension `dim` with their certified constants.
pub fn cmd_catalog(dim: usize, out: &mut dyn Write) -> Result<()> {
    if dim == 0 {
        return Err(Error::arg("dimension must be positive"));
    }
    writeln!(
        out,
        "{:<11} {:<24} {:<22} {:>12} {:>12} {:>9}",
        "kernel", "params", "domain", "L", "c11_coef", "strict_pd"
    )?;
    for spec in catalog_specs().into_iter().filter(|s| s.supports_dim(dim)) {
        let domain = spec.canonical_domain(dim)?;
        let k = spec.build(&domain)?;
        let params: Vec<String> = spec.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        let dom = format!("[{}, {}]^{}", domain.lower()[0], domain.upper()[0], dim);
        let l = k.diag_lipschitz().map_or("-".into(), |v| format!("{v:.6}"));
        let c = k.c11_constants().map_or("-".into(), |c| format!("{:.6}", c.quadratic_coefficient(dim)));
        writeln!(
            out,
            "{:<11} {:<24} {:<22} {:>12} {:>12} {:>9}",
            spec.name(),
            params.join(","),
            dom,
            l,
            c,
            k.is_strictly_pd()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn convergence_writes_one_row_per_step() {
        let cfg = config("grid = 201\nn_max = 30\nfit_lo = 5");
        let (mut csv, mut log) = (Vec::new(), Vec::new());
        let exp = cmd_convergence(&cfg, &mut csv, &mut log).unwrap();
        assert_eq!(exp.outcome, Outcome::Success);
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 31);
        assert!(exp.fit.is_some());
        assert!(String::from_utf8(log).unwrap().contains("rate: slope="));
    }

    #[test]
    fn rank_deficient_kernel_stops_cleanly() {
        // K(x, y) = K(−x, y) for this kernel, so half the grid is redundant
        let cfg = config("kernel = rational-a\ngrid = 21\nn_max = 21\nstrategy = random:1");
        let (mut csv, mut log) = (Vec::new(), Vec::new());
        let exp = cmd_convergence(&cfg, &mut csv, &mut log).unwrap();
        assert_eq!(exp.outcome, Outcome::Success);
        assert!(exp.records.len() <= 11);
    }

    #[test]
    fn catalog_lists_constants() {
        let mut out = Vec::new();
        cmd_catalog(1, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(text.contains("green1d"));
        let mut out = Vec::new();
        cmd_catalog(2, &mut out).unwrap();
        assert!(!String::from_utf8(out).unwrap().contains("green1d"));
    }

    #[test]
    fn gp_demo_interpolates() {
        let cfg = config("grid = 401\nn_max = 20\neval_grid = 41\nfunction = runge");
        let (mut csv, mut log) = (Vec::new(), Vec::new());
        let demo = cmd_gp_demo(&cfg, &mut csv, &mut log).unwrap();
        assert_eq!(demo.sites, 20);
        assert!(demo.min_variance >= -1e-10);
        assert!(demo.max_abs_error < 0.2);
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 42);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code_for(&Error::Config("x".into())), EXIT_INPUT);
        assert_eq!(exit_code_for(&Error::Numeric("x".into())), EXIT_BREAKDOWN);
        assert_eq!(Outcome::Violations(3).exit_code(), EXIT_VIOLATION);
    }
}
