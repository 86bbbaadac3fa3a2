//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes and returns JSON strings so the page needs no glue
//! beyond the generated loader. The plain functions underneath are ordinary
//! Rust and are tested natively.

// `!(x >= 0.0)` is how parameter checks reject NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::Deserialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use gsvd_align::alignment::{Scorer, AlignmentOptions};
use gsvd_align::extremes::{extreme_directions, shared_direction_angles};
use gsvd_align::gsvd::{gsvd, DEFAULT_RANK_TOL};
use gsvd_align::infogeo;
use gsvd_align::matrix::{DenseMatrix, TRUNCATION_TOL};
use gsvd_align::procrustes::relative_procrustes;
use gsvd_align::rng::SplitMix64;
use gsvd_align::{Error, Result};

/// Half-width of the square the angle field is sampled on.
const FIELD_EXTENT: f64 = 1.0;

fn columns(points: &[[f64; 2]]) -> Result<DenseMatrix> {
    if points.is_empty() {
        return Err(Error::Contract("need at least one point per side".into()));
    }
    let cols: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
    DenseMatrix::from_columns(2, &cols)
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Contract(format!("{what}: {e}")))
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// Angle field of a planar pair.
///
/// `a_points` and `b_points` are the columns of `A` and `B`. The result holds
/// `theta` on a `grid x grid` lattice over `[-1, 1]^2` (row-major, y from top),
/// whether each point leans on directions only one side owns, the block
/// sizes and, when a shared block exists, the extreme directions.
pub fn angle_field_json(a_points: &[[f64; 2]], b_points: &[[f64; 2]], grid: usize) -> Result<Value> {
    if !(2..=256).contains(&grid) {
        return Err(Error::Range(format!("grid {grid} outside 2..=256")));
    }
    let f = gsvd(&columns(a_points)?, &columns(b_points)?, DEFAULT_RANK_TOL)?;
    let scorer = Scorer::new(&f, AlignmentOptions::with_trunc_tol(TRUNCATION_TOL))?;
    let step = 2.0 * FIELD_EXTENT / (grid - 1) as f64;
    let mut thetas = Vec::with_capacity(grid * grid);
    let mut flagged = Vec::with_capacity(grid * grid);
    for row in 0..grid {
        let y = FIELD_EXTENT - row as f64 * step;
        for col in 0..grid {
            let x = -FIELD_EXTENT + col as f64 * step;
            let (theta, flag) = match scorer.score_or_flag(&[x, y]) {
                Ok(s) => (s.theta, s.non_relational),
                Err(_) => (f64::NAN, true),
            };
            thetas.push(finite_or_null(theta));
            flagged.push(flag);
        }
    }
    let (r, k, t) = f.blocks();
    let extremes = match extreme_directions(&f) {
        Ok((lo, hi)) => json!({
            "min": { "z": lo.z, "theta": lo.theta },
            "max": { "z": hi.z, "theta": hi.theta },
        }),
        Err(_) => Value::Null,
    };
    let shared: Vec<f64> = shared_direction_angles(&f).into_iter().map(|(_, a)| a).collect();
    Ok(json!({
        "grid": grid,
        "thetas": thetas,
        "flagged": flagged,
        "blocks": [r, k, t],
        "shared_angles": shared,
        "extremes": extremes,
    }))
}

/// Histograms of two angle samples and the distances between them.
pub fn histogram_distance_json(thetas_a: &[f64], thetas_b: &[f64], bins: usize, prior_a: f64) -> Result<Value> {
    let p = infogeo::histogram(thetas_a, bins)?;
    let q = infogeo::histogram(thetas_b, bins)?;
    let posterior = infogeo::bin_posteriors(&p, &q, prior_a)?;
    Ok(json!({
        "edges": p.edges(),
        "masses_a": p.masses(),
        "masses_b": q.masses(),
        "fisher_rao": infogeo::fisher_rao(&p, &q)?,
        "fisher_rao_posterior": infogeo::fr_via_posterior(&posterior),
        "hellinger_sq": infogeo::hellinger_sq(&p, &q)?,
        "bhattacharyya": infogeo::bhattacharyya(&p, &q)?,
    }))
}

fn rotation(angle: f64) -> DenseMatrix {
    let (s, c) = angle.sin_cos();
    DenseMatrix::from_rows(&[vec![c, -s], vec![s, c]]).expect("2x2")
}

/// Plants a rotation of `angle_deg` in the shared frame of a random planar
/// pair `(A, A)`, perturbs the target by `noise` and recovers it.
pub fn procrustes_demo_json(angle_deg: f64, noise: f64, n: usize, seed: u64) -> Result<Value> {
    if n == 0 || n > 2000 {
        return Err(Error::Range(format!("point count {n} outside 1..=2000")));
    }
    if !(noise >= 0.0) {
        return Err(Error::Range(format!("noise {noise} < 0")));
    }
    let mut rng = SplitMix64::new(seed);
    let a = rng.gaussian_matrix(2, 2);
    let f = gsvd(&a, &a, DEFAULT_RANK_TOL)?;
    let planted = rotation(angle_deg.to_radians());
    let to_ambient = |r: &DenseMatrix, m: &DenseMatrix| -> Result<DenseMatrix> {
        f.h().matmul(r)?.matmul(f.h_pinv())?.matmul(m)
    };

    let x = rng.gaussian_matrix(2, n);
    let mut y = to_ambient(&planted, &x)?.to_rows();
    for row in &mut y {
        for v in row.iter_mut() {
            *v += noise * rng.next_gaussian();
        }
    }
    let y = DenseMatrix::from_rows(&y)?;

    let fit = relative_procrustes(&f, &x, &y, 0.5)?;
    let r = &fit.rotation;
    let det = r.get(0, 0) * r.get(1, 1) - r.get(0, 1) * r.get(1, 0);
    let cols = |m: &DenseMatrix| -> Vec<[f64; 2]> { (0..m.cols()).map(|j| [m.get(0, j), m.get(1, j)]).collect() };
    Ok(json!({
        "x": cols(&x),
        "y": cols(&y),
        "aligned": cols(&to_ambient(r, &x)?),
        "planted_deg": angle_deg,
        "recovered_deg": r.get(1, 0).atan2(r.get(0, 0)).to_degrees(),
        "determinant": det,
        "residual_before": fit.residual_before()?,
        "residual_after": fit.residual_after()?,
    }))
}

fn to_js(v: Result<Value>) -> std::result::Result<String, JsValue> {
    v.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e.to_string()))
}

fn from_js<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> std::result::Result<T, JsValue> {
    parse(text, what).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn angle_field(a_points: &str, b_points: &str, grid: usize) -> std::result::Result<String, JsValue> {
    let a: Vec<[f64; 2]> = from_js(a_points, "A points")?;
    let b: Vec<[f64; 2]> = from_js(b_points, "B points")?;
    to_js(angle_field_json(&a, &b, grid))
}

#[wasm_bindgen]
pub fn histogram_distance(thetas_a: &[f64], thetas_b: &[f64], bins: usize, prior_a: f64) -> std::result::Result<String, JsValue> {
    to_js(histogram_distance_json(thetas_a, thetas_b, bins, prior_a))
}

#[wasm_bindgen]
pub fn procrustes_demo(angle_deg: f64, noise: f64, n: usize, seed: u32) -> std::result::Result<String, JsValue> {
    to_js(procrustes_demo_json(angle_deg, noise, n, seed as u64))
}
