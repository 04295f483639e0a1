//! Data files: CSV with a `#` metadata line and a header row, and JSON.
//!
//! Numbers are written with 17 significant digits so that doubles round-trip exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::reconstruct::{PointDiagnostics, PointFailure, SolutionField};
use crate::verify::VerificationReport;
use crate::volterra::{BoundarySideData, Side};

/// Provenance written at the top of every file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub d: f64,
    #[serde(rename = "L")]
    pub width: f64,
    pub generated_unix: u64,
}

impl RunMetadata {
    pub fn new(command: &str, params: &ProblemParams) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            d: params.d,
            width: params.width,
            generated_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|t| t.as_secs())
                .unwrap_or(0),
        }
    }

    fn comment_line(&self) -> String {
        format!(
            "# {} {} {} d={} L={} generated_unix={}",
            self.tool, self.version, self.command, self.d, self.width, self.generated_unix
        )
    }
}

/// Full-precision decimal form of `v`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_csv(path: &Path, meta: &RunMetadata, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{}", meta.comment_line())?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header).map_err(csv_error)?;
        for r in rows {
            w.write_record(&r).map_err(csv_error)?;
        }
        w.flush()?;
    }
    out.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("{what}: cannot parse {s:?} as a number")))
}

/// Columns `x, y, q, q_alt, residual, iterations`.
pub fn write_field_csv(path: &Path, field: &SolutionField, meta: &RunMetadata) -> Result<()> {
    let mut rows = Vec::with_capacity(field.q.len());
    for (ix, &x) in field.xs.iter().enumerate() {
        for (iy, &y) in field.ys.iter().enumerate() {
            let k = field.index(ix, iy);
            let (res, it) = match &field.diagnostics[k] {
                Some(dg) => (fmt_f64(dg.residual), dg.iterations.to_string()),
                None => (fmt_f64(f64::NAN), "0".into()),
            };
            rows.push(vec![fmt_f64(x), fmt_f64(y), fmt_f64(field.q[k]), fmt_f64(field.q_alt[k]), res, it]);
        }
    }
    write_csv(path, meta, &["x", "y", "q", "q_alt", "residual", "iterations"], rows)
}

/// Reads a field written by [`write_field_csv`]; rows may come in any order but must
/// cover a full rectangular grid.
pub fn read_field_csv(path: &Path, params: ProblemParams) -> Result<SolutionField> {
    let mut rd = reader(path)?;
    let headers = rd.headers().map_err(csv_error)?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("missing column {name:?}")))
    };
    let (cx, cy, cq) = (col("x")?, col("y")?, col("q")?);
    let cq_alt = col("q_alt").ok();
    let mut pts = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_error)?;
        let get = |c: usize| parse_f64(rec.get(c).unwrap_or(""), "field row");
        let alt = match cq_alt {
            Some(c) => get(c)?,
            None => f64::NAN,
        };
        pts.push((get(cx)?, get(cy)?, get(cq)?, alt));
    }
    if pts.is_empty() {
        return Err(Error::Parse("field file has no rows".into()));
    }
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    if xs.len() * ys.len() != pts.len() {
        return Err(Error::Parse(format!(
            "{} rows do not form a {}x{} grid",
            pts.len(),
            xs.len(),
            ys.len()
        )));
    }
    let ny = ys.len();
    let mut q = vec![f64::NAN; pts.len()];
    let mut q_alt = vec![f64::NAN; pts.len()];
    for (x, y, v, a) in pts {
        let ix = xs.partition_point(|&t| t < x);
        let iy = ys.partition_point(|&t| t < y);
        q[ix * ny + iy] = v;
        q_alt[ix * ny + iy] = a;
    }
    let n = q.len();
    Ok(SolutionField {
        params,
        xs,
        ys,
        q,
        q_alt,
        imag_leak: 0.0,
        diagnostics: vec![None; n],
        failures: Vec::new(),
    })
}

#[derive(Serialize)]
struct FieldJson<'a> {
    metadata: &'a RunMetadata,
    xs: &'a [f64],
    ys: &'a [f64],
    /// Column-major, index `ix * ny + iy`.
    q: &'a [f64],
    q_alt: &'a [f64],
    imag_leak: f64,
}

pub fn write_field_json(path: &Path, field: &SolutionField, meta: &RunMetadata) -> Result<()> {
    write_json(
        path,
        &FieldJson {
            metadata: meta,
            xs: &field.xs,
            ys: &field.ys,
            q: &field.q,
            q_alt: &field.q_alt,
            imag_leak: field.imag_leak,
        },
    )
}

#[derive(Serialize)]
struct PointEntry<'a> {
    x: f64,
    y: f64,
    #[serde(flatten)]
    diagnostics: &'a PointDiagnostics,
}

#[derive(Serialize)]
struct DiagnosticsJson<'a> {
    metadata: &'a RunMetadata,
    points: Vec<PointEntry<'a>>,
    failures: &'a [PointFailure],
}

pub fn write_diagnostics_json(path: &Path, field: &SolutionField, meta: &RunMetadata) -> Result<()> {
    let mut points = Vec::new();
    for (ix, &x) in field.xs.iter().enumerate() {
        for (iy, &y) in field.ys.iter().enumerate() {
            if let Some(dg) = &field.diagnostics[field.index(ix, iy)] {
                points.push(PointEntry { x, y, diagnostics: dg });
            }
        }
    }
    write_json(
        path,
        &DiagnosticsJson {
            metadata: meta,
            points,
            failures: &field.failures,
        },
    )
}

#[derive(Serialize)]
struct VerificationJson<'a> {
    metadata: &'a RunMetadata,
    pass: bool,
    #[serde(flatten)]
    report: &'a VerificationReport,
}

pub fn write_verification_json(path: &Path, report: &VerificationReport, meta: &RunMetadata) -> Result<()> {
    write_json(
        path,
        &VerificationJson {
            metadata: meta,
            pass: report.all_pass(),
            report,
        },
    )
}

/// One row of the spectral dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRow {
    pub side: Side,
    pub lambda: Complex64,
    pub a: Complex64,
    pub b: Complex64,
}

/// Columns `lambda_re, lambda_im, a_re, a_im, b_re, b_im, side`.
pub fn write_spectral_csv(path: &Path, rows: &[SpectralRow], meta: &RunMetadata) -> Result<()> {
    let rows = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.lambda.re),
                fmt_f64(r.lambda.im),
                fmt_f64(r.a.re),
                fmt_f64(r.a.im),
                fmt_f64(r.b.re),
                fmt_f64(r.b.im),
                r.side.index().to_string(),
            ]
        })
        .collect();
    write_csv(
        path,
        meta,
        &["lambda_re", "lambda_im", "a_re", "a_im", "b_re", "b_im", "side"],
        rows,
    )
}

/// Columns `lambda, G_im, lnh_re, lnh_im` on the positive real axis.
pub fn write_function_table_csv(
    path: &Path,
    rows: &[(f64, Complex64, Complex64)],
    meta: &RunMetadata,
) -> Result<()> {
    let rows = rows
        .iter()
        .map(|(l, g, lnh)| vec![fmt_f64(*l), fmt_f64(g.im), fmt_f64(lnh.re), fmt_f64(lnh.im)])
        .collect();
    write_csv(path, meta, &["lambda", "G_im", "lnh_re", "lnh_im"], rows)
}

/// Reads `side,node,dirichlet,neumann` rows; sides are 1, 2, 3 and each side's rows are
/// taken in file order.
pub fn read_boundary_csv(path: &Path) -> Result<Vec<BoundarySideData>> {
    let mut rd = reader(path)?;
    let headers = rd.headers().map_err(csv_error)?.clone();
    let expected = ["side", "node", "dirichlet", "neumann"];
    if headers.len() != 4 || headers.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(Error::Parse(format!(
            "expected header side,node,dirichlet,neumann, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut cols: [(Vec<f64>, Vec<f64>, Vec<f64>); 3] = Default::default();
    let mut order: Vec<usize> = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_error)?;
        let idx: u8 = rec[0]
            .parse()
            .map_err(|_| Error::Parse(format!("side {:?} is not 1, 2 or 3", &rec[0])))?;
        let side = Side::from_index(idx).map_err(|e| Error::Parse(e.to_string()))?;
        let k = side.index() as usize - 1;
        if !order.contains(&k) {
            order.push(k);
        }
        cols[k].0.push(parse_f64(&rec[1], "node")?);
        cols[k].1.push(parse_f64(&rec[2], "dirichlet")?);
        cols[k].2.push(parse_f64(&rec[3], "neumann")?);
    }
    if order.is_empty() {
        return Err(Error::Parse("boundary file has no rows".into()));
    }
    order
        .into_iter()
        .map(|k| {
            let (n, dv, nv) = std::mem::take(&mut cols[k]);
            let side = Side::from_index(k as u8 + 1)?;
            BoundarySideData::new(side, n, dv, nv)
        })
        .collect()
}
