//! CSV report emission.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};

use gwv_core::io::fmt_f64;
use gwv_core::registry::{PointSet, Row};

pub struct Output {
    path: Option<PathBuf>,
}

impl Output {
    pub fn new(path: Option<PathBuf>) -> Self {
        Self { path }
    }

    fn points_path(&self) -> Option<PathBuf> {
        self.path.as_ref().map(|p| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            p.with_file_name(format!("{stem}.points.csv"))
        })
    }
}

pub struct Report {
    rows: Vec<Row>,
    points: Vec<PointSet>,
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        fmt_f64(x)
    }
}

fn rows_csv(rows: &[Row]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "value", "expected", "provenance", "tolerance", "pass"])?;
    for r in rows {
        let checked = !r.expected.is_nan();
        w.write_record([
            r.quantity.clone(),
            num(r.value),
            num(r.expected),
            if checked { r.provenance.to_string() } else { String::new() },
            num(r.tolerance),
            if checked { r.pass.to_string() } else { String::new() },
        ])?;
    }
    Ok(w.into_inner()?)
}

fn points_csv(points: &[PointSet]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "x", "y", "w"])?;
    for set in points {
        for p in &set.points {
            w.write_record([set.label.clone(), fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2])])?;
        }
    }
    Ok(w.into_inner()?)
}

impl Report {
    pub fn new(rows: Vec<Row>) -> Self {
        Self {
            rows,
            points: Vec::new(),
        }
    }

    pub fn with_points(mut self, points: Vec<PointSet>) -> Self {
        self.points = points;
        self
    }

    /// Writes the report (and points, if any) and lists failing rows on stderr. Returns whether
    /// every row passed.
    pub fn emit(self, out: &Output) -> Result<bool> {
        let body = rows_csv(&self.rows)?;
        match &out.path {
            Some(p) => std::fs::write(p, &body).with_context(|| format!("cannot write {}", p.display()))?,
            None => std::io::stdout().write_all(&body)?,
        }
        if !self.points.is_empty() {
            let pts = points_csv(&self.points)?;
            match out.points_path() {
                Some(p) => std::fs::write(&p, &pts).with_context(|| format!("cannot write {}", p.display()))?,
                None => {
                    let mut so = std::io::stdout();
                    so.write_all(b"\n")?;
                    so.write_all(&pts)?;
                }
            }
        }
        let mut ok = true;
        for r in self.rows.iter().filter(|r| !r.pass) {
            ok = false;
            eprintln!(
                "FAIL {}: value {} expected {} tolerance {}",
                r.quantity,
                fmt_f64(r.value),
                fmt_f64(r.expected),
                fmt_f64(r.tolerance)
            );
        }
        Ok(ok)
    }
}
