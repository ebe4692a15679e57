//! CSV traces of convergence records.
//!
//! Floats are written as `{:.16e}` (17 significant digits, exact round trip);
//! absent optional values are empty fields. Lines starting with `#` are
//! warnings and are skipped on read.

use std::io::Write;

use crate::bounds::ConvergenceRecord;
use crate::error::{Error, Result};

pub fn header(dim: usize) -> String {
    let mut cols = vec!["n".to_string()];
    cols.extend((0..dim).map(|a| format!("pivot_x{a}")));
    cols.extend(
        [
            "pivot_value",
            "sup_residual",
            "fill",
            "eta",
            "min_sep",
            "bound_fill",
            "bound_pack",
            "bound_c11",
            "grid_size",
            "wall_time_ms",
        ]
        .map(String::from),
    );
    cols.join(",")
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn format_record(r: &ConvergenceRecord) -> String {
    let mut f = vec![r.n.to_string()];
    f.extend(r.pivot.iter().map(|&x| num(x)));
    f.extend([
        num(r.pivot_value),
        num(r.sup_residual),
        num(r.fill),
        num(r.eta),
        opt(r.min_sep),
        opt(r.bound_fill),
        opt(r.bound_pack),
        opt(r.bound_c11),
        r.grid_size.to_string(),
        num(r.wall_time_ms),
    ]);
    f.join(",")
}

pub fn write_records<W: Write + ?Sized>(out: &mut W, dim: usize, records: &[ConvergenceRecord]) -> Result<()> {
    writeln!(out, "{}", header(dim))?;
    for r in records {
        writeln!(out, "{}", format_record(r))?;
    }
    Ok(())
}

pub fn write_warning<W: Write + ?Sized>(out: &mut W, message: &str) -> Result<()> {
    writeln!(out, "# warning: {}", message.replace('\n', " "))?;
    Ok(())
}

/// Reads a trace written by [`write_records`].
pub fn parse_records(text: &str) -> Result<Vec<ConvergenceRecord>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let head = lines.next().ok_or_else(|| Error::Parse("empty trace".into()))?;
    let dim = head.split(',').filter(|c| c.starts_with("pivot_x")).count();
    if head != header(dim) {
        return Err(Error::Parse("unexpected trace header".into()));
    }
    let bad = |line: usize, what: &str| Error::Parse(format!("trace line {line}: bad {what}"));
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != dim + 11 {
            return Err(bad(i + 2, "field count"));
        }
        let p = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 2, "number"));
        let o = |s: &str| if s.is_empty() { Ok(None) } else { p(s).map(Some) };
        let k = dim + 1;
        out.push(ConvergenceRecord {
            n: f[0].parse().map_err(|_| bad(i + 2, "step"))?,
            pivot: f[1..k].iter().map(|s| p(s)).collect::<Result<_>>()?,
            pivot_value: p(f[k])?,
            sup_residual: p(f[k + 1])?,
            fill: p(f[k + 2])?,
            eta: p(f[k + 3])?,
            min_sep: o(f[k + 4])?,
            bound_fill: o(f[k + 5])?,
            bound_pack: o(f[k + 6])?,
            bound_c11: o(f[k + 7])?,
            grid_size: f[k + 8].parse().map_err(|_| bad(i + 2, "grid size"))?,
            wall_time_ms: p(f[k + 9])?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> ConvergenceRecord {
        ConvergenceRecord {
            n: 3,
            pivot: vec![0.1, -1.0 / 3.0],
            pivot_value: 0.7,
            sup_residual: std::f64::consts::PI / 10.0,
            fill: 0.25,
            eta: 1e-3,
            min_sep: Some(0.5),
            bound_fill: Some(2.0),
            bound_pack: None,
            bound_c11: None,
            grid_size: 401,
            wall_time_ms: 0.0,
        }
    }

    #[test]
    fn header_names_every_field() {
        assert_eq!(
            header(1),
            "n,pivot_x0,pivot_value,sup_residual,fill,eta,min_sep,bound_fill,bound_pack,bound_c11,grid_size,wall_time_ms"
        );
    }

    #[test]
    fn round_trip_is_exact() {
        let mut buf = Vec::new();
        write_records(&mut buf, 2, &[record(), record()]).unwrap();
        write_warning(&mut buf, "stopped").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(",,,"));
        let back = parse_records(&text).unwrap();
        assert_eq!(back, vec![record(), record()]);
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(parse_records("").is_err());
        assert!(parse_records("a,b\n").is_err());
        let text = format!("{}\n1,2\n", header(1));
        assert!(parse_records(&text).is_err());
    }
}
