//! CSV rendering. Floats use the shortest representation that round-trips.

use std::fmt::Write;

use paracone::derivative::ScanReport;
use paracone::Point;

/// Columns `t, raw_1..raw_m, corrected_1..corrected_m`, one row per step.
pub fn quotient_csv(ts: &[f64], raw: &[Point], corrected: &[Point]) -> String {
    let m = raw.first().map_or(0, |r| r.dim());
    let mut out = String::from("t");
    for prefix in ["raw", "corrected"] {
        for i in 1..=m {
            write!(out, ",{prefix}_{i}").unwrap();
        }
    }
    out.push('\n');
    for ((t, r), c) in ts.iter().zip(raw).zip(corrected) {
        write!(out, "{t}").unwrap();
        for v in r.coords().iter().chain(c.coords()) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Columns `x_1..x_d, pass, defect`, one row per scanned point.
pub fn scan_csv(r: &ScanReport) -> String {
    let d = r.points.first().map_or(0, |p| p.x.dim());
    let mut out = String::new();
    for i in 1..=d {
        write!(out, "x_{i},").unwrap();
    }
    out.push_str("pass,defect\n");
    for p in &r.points {
        for v in p.x.coords() {
            write!(out, "{v},").unwrap();
        }
        writeln!(out, "{},{}", p.pass, p.defect).unwrap();
    }
    out
}
