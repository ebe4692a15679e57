use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use pivchol::experiments::rate::fit_power_law;
use pivchol::matrix::SpdMatrix;

fn pivchol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pivchol")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pivchol-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, text: &str) -> String {
    let p = scratch(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn catalog_lists_every_kernel() {
    let out = pivchol(&["catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["ou", "matern", "gaussian", "brownian", "green", "rational"] {
        assert!(text.contains(name), "missing {name} in\n{text}");
    }
}

#[test]
fn convergence_is_byte_reproducible() {
    let cfg = write("conv.cfg", "kernel = matern\nnu = 0.5\ngrid = 301\nn_max = 60\nstrategy = delta:0.5\n");
    let a = scratch("a.csv");
    let b = scratch("b.csv");
    for p in [&a, &b] {
        let out = pivchol(&["convergence", "--config", &cfg, "--seed", "7", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("n,pivot_x0,pivot_value,sup_residual"));
    assert_eq!(text.lines().count(), 61);
}

#[test]
fn seed_changes_a_randomised_trace() {
    let cfg = write("seed.cfg", "grid = 201\nn_max = 20\n");
    let run = |seed: &str| pivchol(&["convergence", "--config", &cfg, "--strategy", "random:0", "--seed", seed]).stdout;
    assert_ne!(run("1"), run("2"));
}

#[test]
fn bounds_exit_codes() {
    let ok = write("ok.cfg", "grid = 401\nn_max = 50\n");
    assert_eq!(pivchol(&["bounds", "--config", &ok]).status.code(), Some(0));
    let bad = write("bad.cfg", "grid = 401\nn_max = 50\nlipschitz = 1e-6\n");
    let out = pivchol(&["bounds", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(pivchol(&["convergence", "--strategy", "sideways"]).status.code(), Some(1));
    assert_eq!(pivchol(&["convergence", "--config", "/nonexistent/x.cfg"]).status.code(), Some(1));
    let unknown = write("unknown.cfg", "kernal = matern\n");
    assert_eq!(pivchol(&["convergence", "--config", &unknown]).status.code(), Some(1));
    assert_eq!(pivchol(&["frobnicate"]).status.code(), Some(1));
    let not_spd = write("neg.txt", "2\n1 2\n2 1\n");
    assert_eq!(pivchol(&["matrix", &not_spd]).status.code(), Some(1));
}

fn matrix_csv(a: &SpdMatrix, name: &str, extra: &[&str]) -> Vec<(usize, f64, Option<f64>)> {
    let path = write(name, &a.to_text());
    let mut args = vec!["matrix", path.as_str()];
    args.extend_from_slice(extra);
    let out = pivchol(&args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,pivot,residual_max,bound"));
    lines
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().ok())
        })
        .collect()
}

#[test]
fn matrix_brownian_decays_like_one_over_n() {
    let rows = matrix_csv(&SpdMatrix::brownian(200).unwrap(), "brownian.txt", &["--n-max", "100"]);
    assert_eq!(rows.len(), 100);
    for &(_, r, b) in &rows {
        if let Some(b) = b {
            assert!(r <= b + 1e-10);
        }
    }
    let data: Vec<(usize, f64)> = rows.iter().map(|&(n, r, _)| (n, r)).collect();
    assert!(fit_power_law(&data, 5, 100, 0.0).unwrap().slope <= -0.9);
}

#[test]
fn matrix_identity_and_low_rank() {
    let id = SpdMatrix::from_fn(10, |i, j| if i == j { 1.0 } else { 0.0 }).unwrap();
    let rows = matrix_csv(&id, "identity.txt", &[]);
    assert_eq!(rows.len(), 10);
    assert!(rows[..9].iter().all(|r| r.1 == 1.0));
    assert_eq!(rows[9].1, 0.0);

    let low = SpdMatrix::from_fn(50, |i, j| {
        let (x, y) = (i as f64 / 49.0, j as f64 / 49.0);
        1.0 + x * y + (x * y).powi(2)
    })
    .unwrap();
    let rows = matrix_csv(&low, "rank3.txt", &[]);
    assert!(rows.len() <= 3, "rank three stops after three steps, got {}", rows.len());
    assert!(rows.last().unwrap().1 <= 1e-10);
}

#[test]
fn gp_demo_tabulates_mean_and_sd() {
    let cfg = write("gp.cfg", "kernel = matern\nnu = 1.5\ngrid = 201\nn_max = 15\neval_grid = 51\n");
    let out = pivchol(&["gp-demo", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x0,mean,sd,truth"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 51);
    assert!(rows.iter().all(|r| r[2] >= 0.0));
}
