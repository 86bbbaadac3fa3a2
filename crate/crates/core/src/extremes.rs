//! Shared directions with extreme alignment angle.
//!
//! Inside the shared block the angle of `z = H (0, w, 0)` is the arctangent
//! of a ratio of weighted norms of `w`, so it is bracketed by the smallest
//! and largest of the ratios `s~_i / c~_i`. These are attained at the frame
//! columns `h_{r+1}` and `h_{r+k}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gsvd::GsvdFactors;
use crate::matrix;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremeDirection {
    /// Unit vector in the ambient space.
    pub z: Vec<f64>,
    pub theta: f64,
    /// 1-based position inside the shared block.
    pub shared_index: usize,
    /// Coefficients with `A x = sigma z`.
    pub x_coeff: Vec<f64>,
    /// Coefficients with `B y = sigma z`.
    pub y_coeff: Vec<f64>,
    pub sigma: f64,
}

/// Angles `atan(s~_i / c~_i)` for `i = 1..=k`, non-decreasing.
pub fn shared_direction_angles(f: &GsvdFactors) -> Vec<(usize, f64)> {
    f.s_tilde()
        .iter()
        .zip(f.c_tilde())
        .enumerate()
        .map(|(i, (s, c))| (i + 1, s.atan2(*c)))
        .collect()
}

/// The extreme direction at shared position `i` (1-based).
///
/// With `j = r + i - 1` the frame column, `x = (s_j / c_j) U^T e_j` and
/// `y = V^T e_{j + q - rank}` both map onto `s_j h_j`, so `sigma = s_j |h_j|`.
pub fn shared_direction(f: &GsvdFactors, i: usize) -> Result<ExtremeDirection> {
    let (r, k, _) = f.blocks();
    if i == 0 || i > k {
        return Err(Error::Range(format!("shared index {i} outside 1..={k}")));
    }
    let j = r + i - 1;
    let (c, s) = (f.c_diag()[j], f.s_diag()[j]);
    let h = f.h().column(j);
    let hn = matrix::norm2(h);
    let z: Vec<f64> = h.iter().map(|x| x / hn).collect();

    let u_row = f.u_row_for(j).expect("shared columns have a cosine");
    let v_row = f.v_row_for(j).expect("shared columns have a sine");
    let ratio = s / c;
    let x_coeff: Vec<f64> = f.u().row(u_row).into_iter().map(|x| x * ratio).collect();
    let y_coeff = f.v().row(v_row);
    Ok(ExtremeDirection {
        z,
        theta: s.atan2(c),
        shared_index: i,
        x_coeff,
        y_coeff,
        sigma: s * hn,
    })
}

/// `(z_min, z_max)`. Under ties the minimizer takes the smallest shared
/// index and the maximizer the largest.
pub fn extreme_directions(f: &GsvdFactors) -> Result<(ExtremeDirection, ExtremeDirection)> {
    let (_, k, _) = f.blocks();
    if k == 0 {
        return Err(Error::NoSharedBlock);
    }
    Ok((shared_direction(f, 1)?, shared_direction(f, k)?))
}

/// The first `n` maximizers under successive orthogonality to earlier ones:
/// shared indices `k, k-1, ..., k-n+1`.
pub fn deflation_sequence(f: &GsvdFactors, n: usize) -> Result<Vec<ExtremeDirection>> {
    let (_, k, _) = f.blocks();
    if n > k {
        return Err(Error::Range(format!("{n} deflation steps but only {k} shared directions")));
    }
    (0..n).map(|step| shared_direction(f, k - step)).collect()
}
