//! Comma-separated text formats: raw matrices (no header), score tables and
//! angle histograms.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::alignment::AlignmentScore;
use crate::error::{Error, Result};
use crate::infogeo::{self, AngleHistogram, BinPosterior};
use crate::matrix::DenseMatrix;

/// Shortest text that parses back to the same `f64`. Integral values print
/// without a fractional part; very large or small magnitudes use exponents.
pub fn format_f64(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:?}")
    }
}

pub fn write_matrix<W: Write>(m: &DenseMatrix, mut out: W) -> Result<()> {
    if m.is_empty() {
        return Err(Error::EmptyInput("cannot write an empty matrix".into()));
    }
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).into_iter().map(format_f64).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_matrix_csv(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_matrix(m, BufWriter::new(File::create(path)?))
}

pub fn read_matrix<R: Read>(input: R) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format(e.to_string()))?;
        let line = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("line {line}: cannot parse {field:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Format(format!(
                    "line {line}: {} fields, expected {}",
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("matrix file has no rows".into()));
    }
    DenseMatrix::from_rows(&rows)
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    read_matrix(File::open(path)?)
}

pub const SCORE_HEADER: &str = "theta_rad,a,b,frame_residual,mass_r,mass_k,mass_t,non_relational";

pub fn write_scores<W: Write>(scores: &[AlignmentScore], mut out: W) -> Result<()> {
    writeln!(out, "{SCORE_HEADER}")?;
    for s in scores {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            format_f64(s.theta),
            format_f64(s.a),
            format_f64(s.b),
            format_f64(s.frame_residual),
            format_f64(s.mass_r),
            format_f64(s.mass_k),
            format_f64(s.mass_t),
            s.non_relational
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_scores_csv(scores: &[AlignmentScore], path: impl AsRef<Path>) -> Result<()> {
    write_scores(scores, BufWriter::new(File::create(path)?))
}

/// One histogram: `bin_lo_deg,bin_hi_deg,mass`.
pub fn write_histogram<W: Write>(h: &AngleHistogram, mut out: W) -> Result<()> {
    writeln!(out, "bin_lo_deg,bin_hi_deg,mass")?;
    let e = h.edges();
    for (i, m) in h.masses().iter().enumerate() {
        writeln!(
            out,
            "{},{},{}",
            format_f64(e[i].to_degrees()),
            format_f64(e[i + 1].to_degrees()),
            format_f64(*m)
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_histogram_csv(h: &AngleHistogram, path: impl AsRef<Path>) -> Result<()> {
    write_histogram(h, BufWriter::new(File::create(path)?))
}

/// Reads a single-histogram table. Edges that match the uniform grid to
/// within 1e-9 rad are snapped onto it, so files written by this crate load
/// with bit-identical edges.
pub fn read_histogram<R: Read>(input: R) -> Result<AngleHistogram> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("histogram table lacks column {name:?}")))
    };
    let (lo, hi, mass) = (col("bin_lo_deg")?, col("bin_hi_deg")?, col("mass")?);
    let mut edges: Vec<f64> = Vec::new();
    let mut masses: Vec<f64> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Format(format!("line {line}: bad field {i}")))
        };
        let (l, h) = (field(lo)?.to_radians(), field(hi)?.to_radians());
        if let Some(prev) = edges.last() {
            if (prev - l).abs() > 1e-9 {
                return Err(Error::Format(format!("line {line}: bins are not contiguous")));
            }
        } else {
            edges.push(l);
        }
        edges.push(h);
        masses.push(field(mass)?);
    }
    if masses.is_empty() {
        return Err(Error::EmptyInput("histogram table has no bins".into()));
    }
    let uniform = infogeo::uniform_edges(masses.len());
    if edges.iter().zip(&uniform).all(|(a, b)| (a - b).abs() <= 1e-9) {
        edges = uniform;
    }
    AngleHistogram::from_parts(edges, masses, 0)
}

pub fn read_histogram_csv(path: impl AsRef<Path>) -> Result<AngleHistogram> {
    read_histogram(File::open(path)?)
}

/// Two-class table `bin_lo_deg,bin_hi_deg,mass_a,mass_b,r_i,m_i`; `r_i` is
/// left empty in bins where neither class has mass.
pub fn write_class_histograms<W: Write>(
    p: &AngleHistogram,
    q: &AngleHistogram,
    posterior: &BinPosterior,
    mut out: W,
) -> Result<()> {
    writeln!(out, "bin_lo_deg,bin_hi_deg,mass_a,mass_b,r_i,m_i")?;
    let e = p.edges();
    for i in 0..p.masses().len() {
        let r = posterior.r[i].map(format_f64).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            format_f64(e[i].to_degrees()),
            format_f64(e[i + 1].to_degrees()),
            format_f64(p.masses()[i]),
            format_f64(q.masses()[i]),
            r,
            format_f64(posterior.mass[i])
        )?;
    }
    out.flush()?;
    Ok(())
}
