//! Dense real matrices and the factorizations the rest of the crate is built on.
//!
//! Storage is column-major so that dataset columns (observations) are
//! contiguous slices.

use std::fmt;

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Reconstruction tolerance used by factorization self-checks.
pub const RECONSTRUCTION_TOL: f64 = 1e-12;
/// Orthogonality tolerance used by factorization self-checks.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
/// Relative threshold below which diagonal entries are treated as zero.
pub const TRUNCATION_TOL: f64 = 1e-12;

/// Immutable column-major real matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Contract(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_vec(rows, cols, data))
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Contract(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, data))
    }

    /// Builds a matrix from a list of rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
            return Err(Error::Contract(format!(
                "row {i} has {} entries, expected {ncols}",
                r.len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(rows.len(), ncols, &flat)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(nrows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        if let Some((j, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != nrows) {
            return Err(Error::Contract(format!(
                "column {j} has {} entries, expected {nrows}",
                c.len()
            )));
        }
        let flat: Vec<f64> = columns.iter().flatten().copied().collect();
        Self::new(nrows, columns.len(), flat)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        Self::from_dmatrix(m)
    }

    pub(crate) fn from_dmatrix(inner: DMatrix<f64>) -> Result<Self> {
        if let Some(pos) = inner.iter().position(|v| !v.is_finite()) {
            let rows = inner.nrows().max(1);
            return Err(Error::NonFinite {
                row: pos % rows,
                col: pos / rows,
            });
        }
        Ok(Self { inner })
    }

    pub(crate) fn dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    pub fn is_empty(&self) -> bool {
        self.rows() == 0 || self.cols() == 0
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    /// Column-major backing storage.
    pub fn as_slice(&self) -> &[f64] {
        self.inner.as_slice()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.rows();
        &self.as_slice()[j * n..(j + 1) * n]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols()).map(|j| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows()).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::Contract(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Self::from_dmatrix(&self.inner * &other.inner)
    }

    /// Matrix-vector product with a fixed summation order (column sweep), so
    /// results do not depend on the caller's batching.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return Err(Error::Contract(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols()
            )));
        }
        let mut y = vec![0.0; self.rows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (yi, aij) in y.iter_mut().zip(self.column(j)) {
                *yi += aij * xj;
            }
        }
        Ok(y)
    }

    /// `self^T * x`, one dot product per column.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows() {
            return Err(Error::Contract(format!(
                "vector of length {} against {} rows",
                x.len(),
                self.rows()
            )));
        }
        Ok((0..self.cols()).map(|j| dot(self.column(j), x)).collect())
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::from_dmatrix(&self.inner * alpha)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Contract(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Self::from_dmatrix(&self.inner - &other.inner)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(self.as_slice())
    }

    /// Copies the listed columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        let n = self.rows();
        let mut data = Vec::with_capacity(n * indices.len());
        for &j in indices {
            if j >= self.cols() {
                return Err(Error::Range(format!("column {j} of {}", self.cols())));
            }
            data.extend_from_slice(self.column(j));
        }
        Self::new(n, indices.len(), data)
    }

    /// Horizontal concatenation `[self other]`.
    pub fn hstack(&self, other: &DenseMatrix) -> Result<Self> {
        if self.rows() != other.rows() {
            return Err(Error::Contract(format!(
                "cannot stack {} rows beside {} rows",
                self.rows(),
                other.rows()
            )));
        }
        let mut data = self.as_slice().to_vec();
        data.extend_from_slice(other.as_slice());
        Self::new(self.rows(), self.cols() + other.cols(), data)
    }

    /// `max |self^T self - I|`; zero for orthonormal columns.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.inner.transpose() * &self.inner;
        let mut worst = 0.0f64;
        for j in 0..g.ncols() {
            for i in 0..g.nrows() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).abs());
            }
        }
        worst
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix {}x{} ", self.rows(), self.cols())?;
        f.debug_list().entries(self.to_rows()).finish()
    }
}

/// Row-major nested arrays, the layout used by every JSON document we write.
impl Serialize for DenseMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DenseMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        DenseMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    // Scaled accumulation so tiny and huge vectors do not under/overflow.
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let ss: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * ss.sqrt()
}

/// Thin singular value decomposition `m = left * diag(singulars) * right^T`.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub left: DenseMatrix,
    pub singulars: Vec<f64>,
    pub right: DenseMatrix,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> Result<DenseMatrix> {
        let mut scaled = self.left.dmatrix().clone();
        for (j, s) in self.singulars.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        DenseMatrix::from_dmatrix(scaled * self.right.dmatrix().transpose())
    }

    /// Number of singular values above `tol * max`.
    pub fn rank(&self, tol: f64) -> usize {
        let max = self.singulars.first().copied().unwrap_or(0.0);
        self.singulars.iter().filter(|&&s| s > tol * max && s > 0.0).count()
    }
}

/// Thin SVD with singular values sorted non-increasingly.
///
/// The bidiagonal kernel comes from `faer`; nalgebra's iteration can return
/// an inaccurate factorization when the input is exactly rank deficient.
pub fn svd(m: &DenseMatrix) -> Result<SvdFactors> {
    if m.is_empty() {
        return Err(Error::EmptyInput(format!(
            "svd of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let dm = m.dmatrix();
    let src = faer::Mat::<f64>::from_fn(dm.nrows(), dm.ncols(), |i, j| dm[(i, j)]);
    let raw = src
        .thin_svd()
        .map_err(|_| Error::FactorizationFailure { routine: "svd" })?;
    let (u, v) = (raw.U(), raw.V());
    let s = raw.S().column_vector();

    let n = s.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));

    let singulars: Vec<f64> = order.iter().map(|&i| s[i].max(0.0)).collect();
    let left = DMatrix::from_fn(u.nrows(), n, |i, j| u[(i, order[j])]);
    let right = DMatrix::from_fn(v.nrows(), n, |i, j| v[(i, order[j])]);
    Ok(SvdFactors {
        left: DenseMatrix::from_dmatrix(left)?,
        singulars,
        right: DenseMatrix::from_dmatrix(right)?,
    })
}

/// Thin QR factors `m = q * r` with a non-negative diagonal in `r`.
#[derive(Clone, Debug)]
pub struct QrFactors {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

struct Householder {
    rows: usize,
    /// Reflector vectors, each stored over the full row range.
    vectors: Vec<Vec<f64>>,
    betas: Vec<f64>,
    /// Upper trapezoid, column-major, `rows x cols`.
    r: Vec<f64>,
    cols: usize,
}

impl Householder {
    fn factor(m: &DenseMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut a = m.as_slice().to_vec();
        let steps = rows.min(cols);
        let mut vectors = Vec::with_capacity(steps);
        let mut betas = Vec::with_capacity(steps);
        for k in 0..steps {
            let col = &a[k * rows..(k + 1) * rows];
            let alpha = norm2(&col[k..]);
            let mut v = vec![0.0; rows];
            if alpha == 0.0 {
                vectors.push(v);
                betas.push(0.0);
                continue;
            }
            let x0 = col[k];
            let sign = if x0 >= 0.0 { 1.0 } else { -1.0 };
            v[k..].copy_from_slice(&col[k..]);
            v[k] += sign * alpha;
            let vnorm2 = v[k..].iter().map(|x| x * x).sum::<f64>();
            let beta = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };
            for j in k..cols {
                let cj = &mut a[j * rows..(j + 1) * rows];
                let proj = beta * dot(&v[k..], &cj[k..]);
                for (ci, vi) in cj[k..].iter_mut().zip(&v[k..]) {
                    *ci -= proj * vi;
                }
            }
            vectors.push(v);
            betas.push(beta);
        }
        Self {
            rows,
            vectors,
            betas,
            r: a,
            cols,
        }
    }

    /// Applies `Q = H_0 H_1 ... H_{s-1}` to the first `ncols` identity columns.
    fn form_q(&self, ncols: usize) -> Vec<f64> {
        let rows = self.rows;
        let mut q = vec![0.0; rows * ncols];
        for j in 0..ncols {
            q[j * rows + j] = 1.0;
        }
        for (k, (v, &beta)) in self.vectors.iter().zip(&self.betas).enumerate().rev() {
            if beta == 0.0 {
                continue;
            }
            for j in 0..ncols {
                let qj = &mut q[j * rows..(j + 1) * rows];
                let proj = beta * dot(&v[k..], &qj[k..]);
                for (qi, vi) in qj[k..].iter_mut().zip(&v[k..]) {
                    *qi -= proj * vi;
                }
            }
        }
        q
    }
}

/// Thin Householder QR: `q` is `rows x min(rows, cols)`, `r` is
/// `min(rows, cols) x cols` upper triangular with a non-negative diagonal.
pub fn qr(m: &DenseMatrix) -> Result<QrFactors> {
    if m.is_empty() {
        return Err(Error::EmptyInput(format!(
            "qr of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let h = Householder::factor(m);
    let (rows, cols) = (h.rows, h.cols);
    let kdim = rows.min(cols);
    let mut q = h.form_q(kdim);
    let mut r = vec![0.0; kdim * cols];
    for j in 0..cols {
        for i in 0..=j.min(kdim - 1) {
            r[j * kdim + i] = h.r[j * rows + i];
        }
    }
    for i in 0..kdim {
        if r[i * kdim + i] < 0.0 {
            for j in 0..cols {
                r[j * kdim + i] = -r[j * kdim + i];
            }
            for x in &mut q[i * rows..(i + 1) * rows] {
                *x = -*x;
            }
        }
    }
    Ok(QrFactors {
        q: DenseMatrix::new(rows, kdim, q)?,
        r: DenseMatrix::new(kdim, cols, r)?,
    })
}

/// Extends orthonormal columns to a square orthogonal matrix whose leading
/// columns are exactly `basis`.
pub fn complete_orthonormal(basis: &DenseMatrix) -> Result<DenseMatrix> {
    let (n, k) = basis.shape();
    if k > n {
        return Err(Error::Contract(format!(
            "cannot complete {k} columns in dimension {n}"
        )));
    }
    if k == n {
        return Ok(basis.clone());
    }
    let mut data = basis.as_slice().to_vec();
    if k == 0 {
        return Ok(DenseMatrix::identity(n));
    }
    let h = Householder::factor(basis);
    let full = h.form_q(n);
    data.extend_from_slice(&full[k * n..]);
    DenseMatrix::new(n, n, data)
}

/// Moore-Penrose inverse of a non-negative diagonal: entries at or below
/// `tol * max(diag)` map to zero.
pub fn truncated_pinv_diag(diag: &[f64], tol: f64) -> Result<Vec<f64>> {
    if !(tol >= 0.0) {
        return Err(Error::Contract(format!("truncation tolerance {tol} < 0")));
    }
    if let Some(bad) = diag.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
        return Err(Error::Contract(format!("diagonal entry {bad} is not >= 0")));
    }
    let max = diag.iter().fold(0.0f64, |m, &d| m.max(d));
    let cutoff = tol * max;
    Ok(diag
        .iter()
        .map(|&d| if d > cutoff && d > 0.0 { 1.0 / d } else { 0.0 })
        .collect())
}

/// Truncated pseudoinverse `m^+` built from the SVD.
pub fn pinv(m: &DenseMatrix, tol: f64) -> Result<DenseMatrix> {
    let (rows, cols) = m.shape();
    if m.is_empty() {
        return Ok(DenseMatrix::zeros(cols, rows));
    }
    let f = svd(m)?;
    let inv = truncated_pinv_diag(&f.singulars, tol)?;
    let mut right = f.right.dmatrix().clone();
    for (j, s) in inv.iter().enumerate() {
        right.column_mut(j).scale_mut(*s);
    }
    DenseMatrix::from_dmatrix(right * f.left.dmatrix().transpose())
}

/// Minimum-norm least-squares solution `m^+ z` with the default truncation.
pub fn min_norm_solve(m: &DenseMatrix, z: &[f64]) -> Result<Vec<f64>> {
    min_norm_solve_with_tol(m, z, TRUNCATION_TOL)
}

pub fn min_norm_solve_with_tol(m: &DenseMatrix, z: &[f64], tol: f64) -> Result<Vec<f64>> {
    if z.len() != m.rows() {
        return Err(Error::Contract(format!(
            "right-hand side of length {} for {} rows",
            z.len(),
            m.rows()
        )));
    }
    if m.is_empty() {
        return Ok(vec![0.0; m.cols()]);
    }
    let f = svd(m)?;
    let inv = truncated_pinv_diag(&f.singulars, tol)?;
    let mut coeffs = f.left.tr_mul_vec(z)?;
    for (c, s) in coeffs.iter_mut().zip(&inv) {
        *c *= s;
    }
    f.right.mul_vec(&coeffs)
}
