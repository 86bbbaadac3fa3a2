use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use gsvd_align::alignment::batch_angles;
use gsvd_align::classifier::{ClassifierModel, Prediction};
use gsvd_align::dataio::{json, read_idx_filtered, tables};
use gsvd_align::gsvd::{self, GsvdFactors};
use gsvd_align::{infogeo, procrustes};

use crate::error::{check_flagged, CliError};

pub fn decompose(a: &Path, b: &Path, tol: f64, out: &Path) -> Result<(), CliError> {
    let a = tables::read_matrix_csv(a)?;
    let b = tables::read_matrix_csv(b)?;
    let f = gsvd::gsvd(&a, &b, tol)?;
    json::write_json(&f, out)?;
    let (r, k, t) = f.blocks();
    println!("r={r} k={k} t={t} rank={}", f.rank());
    Ok(())
}

pub fn score(factors: &Path, z: &Path, tol: f64, out: &Path, allow: bool) -> Result<(), CliError> {
    let f: GsvdFactors = json::read_json(factors)?;
    let z = tables::read_matrix_csv(z)?;
    let scores = batch_angles(&f, &z, tol)?;
    tables::write_scores_csv(&scores, out)?;
    let flagged = scores.iter().filter(|s| s.non_relational).count();
    let defined: Vec<f64> = scores.iter().filter(|s| s.is_defined()).map(|s| s.theta).collect();
    if !defined.is_empty() {
        let mean = defined.iter().sum::<f64>() / defined.len() as f64;
        println!(
            "samples={} flagged={flagged} mean_theta={mean:.9} rad ({:.4} deg)",
            scores.len(),
            mean.to_degrees()
        );
    } else {
        println!("samples={} flagged={flagged}", scores.len());
    }
    check_flagged(flagged, scores.len(), allow)
}

pub fn frdist(hist_a: &Path, hist_b: &Path, prior_a: f64) -> Result<(), CliError> {
    let p = tables::read_histogram_csv(hist_a)?;
    let q = tables::read_histogram_csv(hist_b)?;
    let bc = infogeo::bhattacharyya(&p, &q)?;
    let fr = infogeo::fisher_rao(&p, &q)?;
    let h2 = infogeo::hellinger_sq(&p, &q)?;
    let fr_post = infogeo::fr_via_posterior(&infogeo::bin_posteriors(&p, &q, prior_a)?);
    println!("bhattacharyya={}", tables::format_f64(bc));
    println!("fisher_rao={}", tables::format_f64(fr));
    println!("hellinger_sq={}", tables::format_f64(h2));
    println!("fisher_rao_posterior={}", tables::format_f64(fr_post));
    println!("routes_agree={}", (fr - fr_post).abs() <= 1e-12);
    Ok(())
}

pub fn procrustes(factors: &Path, x: &Path, y: &Path, threshold: f64, out: &Path) -> Result<(), CliError> {
    let f: GsvdFactors = json::read_json(factors)?;
    let x = tables::read_matrix_csv(x)?;
    let y = tables::read_matrix_csv(y)?;
    let fit = procrustes::relative_procrustes(&f, &x, &y, threshold)?;
    tables::write_matrix_csv(&fit.rotation, out)?;
    println!("mask={} of {}", fit.mask.indices.len(), f.rank());
    println!("residual_before={}", tables::format_f64(fit.residual_before()?));
    println!("residual_after={}", tables::format_f64(fit.residual_after()?));
    Ok(())
}

/// Thresholds `(j + 1) (pi/2) / (n + 1)` for `j = 0..n`, strictly inside
/// `(0, pi/2)`.
pub fn tau_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| (j + 1) as f64 * FRAC_PI_2 / (n + 1) as f64).collect()
}

pub fn tau_sweep(
    factors: &Path,
    images: &Path,
    labels: &Path,
    grid: usize,
    label_a: Option<&str>,
    label_b: Option<&str>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if grid == 0 {
        return Err(CliError::Input("grid must have at least one point".into()));
    }
    let mut model: ClassifierModel = json::read_json(factors)?;
    let la = label_a.unwrap_or(model.label_a()).to_string();
    let lb = label_b.unwrap_or(model.label_b()).to_string();
    model = model.with_labels(la.clone(), lb.clone());
    let mut val = read_idx_filtered(images, labels, |l| l == la || l == lb)?;
    if val.is_empty() {
        return Err(CliError::Input(format!("no validation samples labelled {la} or {lb}")));
    }
    if let Some(center) = model.center() {
        val = val.centered_with(center)?;
    }
    let preds = model.predict_columns(val.features())?;

    let mut rows = Vec::with_capacity(grid);
    for tau in tau_grid(grid) {
        let m = model.with_tau(tau)?;
        let repredicted: Vec<Prediction> = preds
            .iter()
            .map(|p| Prediction {
                decision: m.decide(&p.score),
                score: p.score,
            })
            .collect();
        let metrics = m.metrics(val.labels(), &repredicted)?;
        rows.push((tau, metrics.accuracy, metrics.abstained));
    }
    let best = rows
        .iter()
        .fold(rows[0], |best, r| if r.1 > best.1 { *r } else { best });
    println!(
        "best_tau={} rad ({:.4} deg) accuracy={}",
        tables::format_f64(best.0),
        best.0.to_degrees(),
        tables::format_f64(best.1)
    );

    let mut sink: Box<dyn Write> = match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(sink, "tau_rad,tau_deg,accuracy,abstained")?;
    for (tau, acc, abst) in rows {
        writeln!(
            sink,
            "{},{},{},{abst}",
            tables::format_f64(tau),
            tables::format_f64(tau.to_degrees()),
            tables::format_f64(acc)
        )?;
    }
    sink.flush()?;
    Ok(())
}
