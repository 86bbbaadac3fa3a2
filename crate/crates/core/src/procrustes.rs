//! Orthogonal Procrustes alignment of paired instance sets, plain and in the
//! shared frame of a decomposition with weakly shared directions masked out.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gsvd::GsvdFactors;
use crate::matrix::{self, DenseMatrix};

/// Frame columns whose smaller generalized singular value exceeds a threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharedMask {
    /// 0-based frame columns, ascending.
    pub indices: Vec<usize>,
    pub threshold: f64,
}

/// Orthogonal `R` minimizing `|R X - Y|_F`: the polar factor of `Y X^T`.
/// Reflections are allowed; see [`orthogonal_procrustes_rotation`].
pub fn orthogonal_procrustes(x: &DenseMatrix, y: &DenseMatrix) -> Result<DenseMatrix> {
    polar(x, y, false)
}

/// As [`orthogonal_procrustes`] but constrained to `det R = +1`.
pub fn orthogonal_procrustes_rotation(x: &DenseMatrix, y: &DenseMatrix) -> Result<DenseMatrix> {
    polar(x, y, true)
}

fn polar(x: &DenseMatrix, y: &DenseMatrix, proper: bool) -> Result<DenseMatrix> {
    if x.shape() != y.shape() {
        return Err(Error::Contract(format!(
            "instance sets of shapes {:?} and {:?}",
            x.shape(),
            y.shape()
        )));
    }
    let m = y.matmul(&x.transpose())?;
    let f = matrix::svd(&m)?;
    let n = m.rows();
    let mut left = f.left.as_slice().to_vec();
    let mut right = f.right.as_slice().to_vec();
    // Deterministic signs per singular pair: largest-magnitude entry of the
    // left vector positive. Flipping both halves leaves the product intact.
    for j in 0..n {
        let col = &left[j * n..(j + 1) * n];
        let pivot = col.iter().fold(0.0f64, |p, &v| if v.abs() > p.abs() { v } else { p });
        if pivot < 0.0 {
            left[j * n..(j + 1) * n].iter_mut().for_each(|v| *v = -*v);
            right[j * n..(j + 1) * n].iter_mut().for_each(|v| *v = -*v);
        }
    }
    let left = DenseMatrix::new(n, n, left)?;
    let right = DenseMatrix::new(n, n, right)?;
    let mut r = left.matmul(&right.transpose())?;
    if proper && determinant_sign(&r) < 0.0 {
        // Flip the pair with the smallest singular value.
        let mut l = left.as_slice().to_vec();
        l[(n - 1) * n..].iter_mut().for_each(|v| *v = -*v);
        r = DenseMatrix::new(n, n, l)?.matmul(&right.transpose())?;
    }
    Ok(r)
}

fn determinant_sign(m: &DenseMatrix) -> f64 {
    m.dmatrix().clone().lu().determinant().signum()
}

/// `|R X - Y|_F`.
pub fn procrustes_residual(r: &DenseMatrix, x: &DenseMatrix, y: &DenseMatrix) -> Result<f64> {
    Ok(r.matmul(x)?.sub(y)?.frobenius_norm())
}

pub fn shared_mask(f: &GsvdFactors, threshold: f64) -> Result<SharedMask> {
    if !(threshold >= 0.0) {
        return Err(Error::Range(format!("threshold {threshold} < 0")));
    }
    let indices = f
        .c_diag()
        .iter()
        .zip(f.s_diag())
        .enumerate()
        .filter(|(_, (c, s))| c.min(**s) > threshold)
        .map(|(i, _)| i)
        .collect();
    Ok(SharedMask { indices, threshold })
}

/// Result of aligning two instance sets in the shared frame.
#[derive(Clone, Debug)]
pub struct RelativeAlignment {
    /// Orthogonal, `rank x rank`; identity outside the mask.
    pub rotation: DenseMatrix,
    pub mask: SharedMask,
    /// Frame coordinates `H^+ X` and `H^+ Y` with unmasked rows zeroed.
    pub x_shared: DenseMatrix,
    pub y_shared: DenseMatrix,
}

impl RelativeAlignment {
    pub fn residual_before(&self) -> Result<f64> {
        Ok(self.x_shared.sub(&self.y_shared)?.frobenius_norm())
    }

    pub fn residual_after(&self) -> Result<f64> {
        procrustes_residual(&self.rotation, &self.x_shared, &self.y_shared)
    }
}

/// Procrustes in frame coordinates restricted to strongly shared directions.
pub fn relative_procrustes(
    f: &GsvdFactors,
    x: &DenseMatrix,
    y: &DenseMatrix,
    threshold: f64,
) -> Result<RelativeAlignment> {
    if x.rows() != f.d() || y.rows() != f.d() {
        return Err(Error::Contract(format!(
            "instance sets must have {} rows, got {} and {}",
            f.d(),
            x.rows(),
            y.rows()
        )));
    }
    let mask = shared_mask(f, threshold)?;
    if mask.indices.is_empty() {
        return Err(Error::DegenerateAlignment { threshold });
    }
    let hp = f.h_pinv();
    let xt = hp.matmul(x)?;
    let yt = hp.matmul(y)?;
    let keep = |m: &DenseMatrix| -> Result<DenseMatrix> {
        let mut rows = vec![vec![0.0; m.cols()]; m.rows()];
        for &i in &mask.indices {
            rows[i] = m.row(i);
        }
        if m.cols() == 0 {
            return Ok(DenseMatrix::zeros(m.rows(), 0));
        }
        DenseMatrix::from_rows(&rows)
    };
    let (x_shared, y_shared) = (keep(&xt)?, keep(&yt)?);

    // Solve on the masked rows only and embed; the zeroed rows carry no
    // information, so the identity is the natural choice there.
    let pick = |m: &DenseMatrix| {
        DenseMatrix::from_rows(&mask.indices.iter().map(|&i| m.row(i)).collect::<Vec<_>>())
    };
    let sub = orthogonal_procrustes(&pick(&x_shared)?, &pick(&y_shared)?)?;
    let rank = f.rank();
    let mut rot = DenseMatrix::identity(rank).to_rows();
    for (a, &i) in mask.indices.iter().enumerate() {
        for (b, &j) in mask.indices.iter().enumerate() {
            rot[i][j] = sub.get(a, b);
        }
    }
    Ok(RelativeAlignment {
        rotation: DenseMatrix::from_rows(&rot)?,
        mask,
        x_shared,
        y_shared,
    })
}
