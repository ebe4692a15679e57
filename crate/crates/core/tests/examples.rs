//! Runs every example's `run()` so the examples stay working.

#[path = "../examples/bound_report.rs"]
mod bound_report;
#[path = "../examples/convergence.rs"]
mod convergence;
#[path = "../examples/dimensions.rs"]
mod dimensions;
#[path = "../examples/gp_pgreedy.rs"]
mod gp_pgreedy;
#[path = "../examples/grid_refinement.rs"]
mod grid_refinement;
#[path = "../examples/kernel_catalog.rs"]
mod kernel_catalog;
#[path = "../examples/local_maxvol.rs"]
mod local_maxvol;
#[path = "../examples/matrix_bound.rs"]
mod matrix_bound;
#[path = "../examples/smoothness.rs"]
mod smoothness;
#[path = "../examples/strategies.rs"]
mod strategies;

macro_rules! example {
    ($($name:ident),*) => {
        $(
            #[test]
            fn $name() {
                $name::run().unwrap();
            }
        )*
    };
}

example!(
    bound_report,
    convergence,
    dimensions,
    gp_pgreedy,
    grid_refinement,
    kernel_catalog,
    local_maxvol,
    matrix_bound,
    smoothness,
    strategies
);
