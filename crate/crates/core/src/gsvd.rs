//! Joint decomposition `A = H C U`, `B = H S V` of two matrices that share a
//! row dimension, with `C^T C + S^T S = I`.
//!
//! The frame is the reduced one: `H` has as many columns as the numerical
//! rank of `[A B]`, which keeps `H^+` well posed when the two datasets do not
//! fill the ambient space.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{self, DenseMatrix};

/// Default relative rank threshold for the stacked factorization.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "FactorsDocument")]
pub struct GsvdFactors {
    d: usize,
    p: usize,
    q: usize,
    rank: usize,
    r: usize,
    k: usize,
    t: usize,
    c_diag: Vec<f64>,
    s_diag: Vec<f64>,
    h: DenseMatrix,
    u: DenseMatrix,
    v: DenseMatrix,
    tol_used: f64,
    #[serde(skip)]
    h_pinv: OnceLock<DenseMatrix>,
}

/// Wire layout of the factors; validated on the way in.
#[derive(Deserialize)]
struct FactorsDocument {
    d: usize,
    p: usize,
    q: usize,
    rank: usize,
    r: usize,
    k: usize,
    t: usize,
    c_diag: Vec<f64>,
    s_diag: Vec<f64>,
    h: DenseMatrix,
    u: DenseMatrix,
    v: DenseMatrix,
    #[serde(default = "default_tol")]
    tol_used: f64,
}

fn default_tol() -> f64 {
    DEFAULT_RANK_TOL
}

impl TryFrom<FactorsDocument> for GsvdFactors {
    type Error = Error;

    fn try_from(doc: FactorsDocument) -> Result<Self> {
        let FactorsDocument {
            d,
            p,
            q,
            rank,
            r,
            k,
            t,
            c_diag,
            s_diag,
            h,
            u,
            v,
            tol_used,
        } = doc;
        let h = if rank == 0 && h.rows() == 0 {
            DenseMatrix::zeros(d, 0)
        } else {
            h
        };
        let checks = [
            (h.shape() == (d, rank), "h must be d x rank"),
            (u.shape() == (p, p), "u must be p x p"),
            (v.shape() == (q, q), "v must be q x q"),
            (c_diag.len() == rank, "c_diag must have rank entries"),
            (s_diag.len() == rank, "s_diag must have rank entries"),
            (r + k + t == rank, "r + k + t must equal rank"),
        ];
        if let Some((_, msg)) = checks.iter().find(|(ok, _)| !ok) {
            return Err(Error::Format(format!("gsvd document: {msg}")));
        }
        Ok(Self {
            d,
            p,
            q,
            rank,
            r,
            k,
            t,
            c_diag,
            s_diag,
            h,
            u,
            v,
            tol_used,
            h_pinv: OnceLock::new(),
        })
    }
}

impl PartialEq for GsvdFactors {
    fn eq(&self, other: &Self) -> bool {
        (self.d, self.p, self.q, self.rank, self.r, self.k, self.t)
            == (other.d, other.p, other.q, other.rank, other.r, other.k, other.t)
            && self.c_diag == other.c_diag
            && self.s_diag == other.s_diag
            && self.h == other.h
            && self.u == other.u
            && self.v == other.v
            && self.tol_used.to_bits() == other.tol_used.to_bits()
    }
}

impl GsvdFactors {
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn q(&self) -> usize {
        self.q
    }
    pub fn rank(&self) -> usize {
        self.rank
    }
    /// Block sizes `(r, k, t)`: A-only, shared and B-only directions.
    pub fn blocks(&self) -> (usize, usize, usize) {
        (self.r, self.k, self.t)
    }
    pub fn c_diag(&self) -> &[f64] {
        &self.c_diag
    }
    pub fn s_diag(&self) -> &[f64] {
        &self.s_diag
    }
    pub fn h(&self) -> &DenseMatrix {
        &self.h
    }
    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }
    pub fn v(&self) -> &DenseMatrix {
        &self.v
    }
    pub fn tol_used(&self) -> f64 {
        self.tol_used
    }

    /// Frame columns belonging to the shared block.
    pub fn shared_range(&self) -> std::ops::Range<usize> {
        self.r..self.r + self.k
    }

    /// Cosines of the shared block.
    pub fn c_tilde(&self) -> &[f64] {
        &self.c_diag[self.shared_range()]
    }

    /// Sines of the shared block.
    pub fn s_tilde(&self) -> &[f64] {
        &self.s_diag[self.shared_range()]
    }

    /// Row of `V` paired with frame column `i` (the sine carrier is aligned
    /// to the trailing columns of `S`).
    pub fn v_row_for(&self, i: usize) -> Option<usize> {
        (i + self.q).checked_sub(self.rank)
    }

    /// Row of `U` paired with frame column `i`.
    pub fn u_row_for(&self, i: usize) -> Option<usize> {
        (i < self.p).then_some(i)
    }

    /// Pseudoinverse of the frame, computed once on first use.
    pub fn h_pinv(&self) -> &DenseMatrix {
        self.h_pinv.get_or_init(|| {
            matrix::pinv(&self.h, matrix::TRUNCATION_TOL)
                .expect("pseudoinverse of validated finite frame")
        })
    }

    /// `(H C U, H S V)` with `C` (rank x p) carrying `c_diag` on its leading
    /// diagonal and `S` (rank x q) carrying `s_diag` on its trailing diagonal.
    pub fn reconstruct(&self) -> Result<(DenseMatrix, DenseMatrix)> {
        let mut hc = vec![0.0; self.d * self.p];
        let mut hs = vec![0.0; self.d * self.q];
        for i in 0..self.rank {
            let h = self.h.column(i);
            if let Some(row) = self.u_row_for(i) {
                let dst = &mut hc[row * self.d..(row + 1) * self.d];
                for (o, x) in dst.iter_mut().zip(h) {
                    *o = x * self.c_diag[i];
                }
            }
            if let Some(row) = self.v_row_for(i) {
                let dst = &mut hs[row * self.d..(row + 1) * self.d];
                for (o, x) in dst.iter_mut().zip(h) {
                    *o = x * self.s_diag[i];
                }
            }
        }
        let hc = DenseMatrix::new(self.d, self.p, hc)?;
        let hs = DenseMatrix::new(self.d, self.q, hs)?;
        Ok((hc.matmul(&self.u)?, hs.matmul(&self.v)?))
    }
}

/// Joint decomposition of `a` (d x p) and `b` (d x q); `tol` is the relative
/// threshold for both rank detection and block detection.
pub fn gsvd(a: &DenseMatrix, b: &DenseMatrix, tol: f64) -> Result<GsvdFactors> {
    let (d, p) = a.shape();
    let q = b.cols();
    if d == 0 || p == 0 || q == 0 || b.rows() == 0 {
        return Err(Error::EmptyInput(format!(
            "gsvd of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if b.rows() != d {
        return Err(Error::Contract(format!(
            "row dimensions differ: {d} vs {}",
            b.rows()
        )));
    }
    if !(tol >= 0.0) {
        return Err(Error::Contract(format!("tolerance {tol} < 0")));
    }

    // Z = [A^T; B^T] = P diag(sigma) W^T, truncated to the numerical rank.
    let z = a.hstack(b)?.transpose();
    let zf = matrix::svd(&z)?;
    let rank = zf.rank(tol);
    if rank == 0 {
        return Ok(GsvdFactors {
            d,
            p,
            q,
            rank,
            r: 0,
            k: 0,
            t: 0,
            c_diag: Vec::new(),
            s_diag: Vec::new(),
            h: DenseMatrix::zeros(d, 0),
            u: DenseMatrix::identity(p),
            v: DenseMatrix::identity(q),
            tol_used: tol,
            h_pinv: OnceLock::new(),
        });
    }

    let q_top = take_block(&zf.left, 0..p, rank)?;
    let q_bottom = take_block(&zf.left, p..p + q, rank)?;

    // Cosines from the SVD of the A-side block of the orthonormal basis.
    let cs = matrix::svd(&q_top)?;
    let m = cs.singulars.len();
    let mut c_diag = vec![0.0; rank];
    for (dst, &c) in c_diag.iter_mut().zip(&cs.singulars) {
        *dst = c.clamp(0.0, 1.0);
    }
    let w = matrix::complete_orthonormal(&cs.right)?;
    let u = matrix::complete_orthonormal(&cs.left)?.transpose();

    // Sines from the B-side residual; its columns are mutually orthogonal
    // with norms sqrt(1 - c^2).
    let m2 = q_bottom.matmul(&w)?;
    let mut s_diag: Vec<f64> = (0..rank)
        .map(|i| matrix::norm2(m2.column(i)).clamp(0.0, 1.0))
        .collect();
    for i in 1..rank {
        // Restore the ordering where rounding broke it by an ulp or two.
        if s_diag[i] < s_diag[i - 1] {
            s_diag[i] = s_diag[i - 1];
        }
    }
    let v = sine_basis(&m2, q, rank)?;

    // H = R^T W with R = diag(sigma) W_z^T.
    let mut scaled = zf.right.select_columns(&(0..rank).collect::<Vec<_>>())?;
    let mut data = scaled.as_slice().to_vec();
    for (j, s) in zf.singulars[..rank].iter().enumerate() {
        for x in &mut data[j * d..(j + 1) * d] {
            *x *= s;
        }
    }
    scaled = DenseMatrix::new(d, rank, data)?;
    let h = scaled.matmul(&w)?;
    debug_assert!(m <= rank);

    let (r, k, t) = detect_blocks(&c_diag, &s_diag, tol)?;
    let mut f = GsvdFactors {
        d,
        p,
        q,
        rank,
        r,
        k,
        t,
        c_diag,
        s_diag,
        h,
        u,
        v,
        tol_used: tol,
        h_pinv: OnceLock::new(),
    };
    normalize_signs(&mut f)?;
    Ok(f)
}

/// Rows `rows` and the first `ncols` columns of `m`.
fn take_block(m: &DenseMatrix, rows: std::ops::Range<usize>, ncols: usize) -> Result<DenseMatrix> {
    let nrows = rows.len();
    let mut data = Vec::with_capacity(nrows * ncols);
    for j in 0..ncols {
        data.extend_from_slice(&m.column(j)[rows.clone()]);
    }
    DenseMatrix::new(nrows, ncols, data)
}

/// Orthogonal `V` (q x q) whose row `i + q - rank` is the normalized column
/// `i` of `m2`. Columns are orthonormalized largest-sine first so that the
/// well-determined directions are reproduced most faithfully.
fn sine_basis(m2: &DenseMatrix, q: usize, rank: usize) -> Result<DenseMatrix> {
    let used = q.min(rank);
    let order: Vec<usize> = (0..used).map(|j| rank - 1 - j).collect();
    let n = m2.select_columns(&order)?;
    let thin = matrix::qr(&n)?.q;
    let full = matrix::complete_orthonormal(&thin)?;
    // Column j of `full` becomes row q-1-j of V.
    let mut v = vec![0.0; q * q];
    for j in 0..q {
        let row = q - 1 - j;
        for (col, &x) in full.column(j).iter().enumerate() {
            v[col * q + row] = x;
        }
    }
    DenseMatrix::new(q, q, v)
}

/// Flips each frame column so its largest-magnitude entry is positive,
/// compensating in the paired rows of `U` and `V`.
fn normalize_signs(f: &mut GsvdFactors) -> Result<()> {
    let (d, p, q) = (f.d, f.p, f.q);
    let mut h = f.h.as_slice().to_vec();
    let mut u = f.u.as_slice().to_vec();
    let mut v = f.v.as_slice().to_vec();
    for i in 0..f.rank {
        let col = &mut h[i * d..(i + 1) * d];
        let mut pivot = 0.0f64;
        for &x in col.iter() {
            if x.abs() > pivot.abs() {
                pivot = x;
            }
        }
        if pivot >= 0.0 {
            continue;
        }
        col.iter_mut().for_each(|x| *x = -*x);
        if let Some(row) = f.u_row_for(i) {
            for j in 0..p {
                u[j * p + row] = -u[j * p + row];
            }
        }
        if let Some(row) = f.v_row_for(i) {
            for j in 0..q {
                v[j * q + row] = -v[j * q + row];
            }
        }
    }
    f.h = DenseMatrix::new(d, f.rank, h)?;
    f.u = DenseMatrix::new(p, p, u)?;
    f.v = DenseMatrix::new(q, q, v)?;
    Ok(())
}

/// Block sizes `(r, k, t)` of an ordered cosine/sine spectrum: `r` leading
/// entries with vanishing sine, `t` trailing entries with vanishing cosine.
pub fn detect_blocks(c_diag: &[f64], s_diag: &[f64], tol: f64) -> Result<(usize, usize, usize)> {
    if c_diag.len() != s_diag.len() {
        return Err(Error::Contract(format!(
            "spectra of different lengths {} and {}",
            c_diag.len(),
            s_diag.len()
        )));
    }
    if c_diag.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Contract("c_diag is not non-increasing".into()));
    }
    if s_diag.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Contract("s_diag is not non-decreasing".into()));
    }
    if c_diag.iter().chain(s_diag).any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::Contract("spectrum entries must lie in [0, 1]".into()));
    }
    let n = c_diag.len();
    let r = s_diag.iter().take_while(|&&s| s <= tol).count();
    let t = c_diag.iter().rev().take_while(|&&c| c <= tol).count().min(n - r);
    Ok((r, n - r - t, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn rel(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    fn eye2() -> DenseMatrix {
        DenseMatrix::identity(2)
    }

    #[test]
    fn identical_identities() {
        let f = gsvd(&eye2(), &eye2(), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.blocks(), (0, 2, 0));
        for (&c, &s) in f.c_diag().iter().zip(f.s_diag()) {
            assert!((c - FRAC_1_SQRT_2).abs() < 1e-12);
            assert!((s - FRAC_1_SQRT_2).abs() < 1e-12);
        }
        // H = sqrt(2) times a signed permutation; the sign convention makes
        // it an unsigned one.
        for x in f.h().as_slice() {
            assert!(x.abs() < 1e-12 || (x - 2f64.sqrt()).abs() < 1e-12, "{x}");
        }
        let (a, b) = f.reconstruct().unwrap();
        assert!(a.sub(&eye2()).unwrap().frobenius_norm() < 1e-10);
        assert!(b.sub(&eye2()).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn scaled_identity() {
        let b = eye2().scaled(2.0).unwrap();
        let f = gsvd(&eye2(), &b, DEFAULT_RANK_TOL).unwrap();
        let (c5, s5) = (1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt());
        for (&c, &s) in f.c_diag().iter().zip(f.s_diag()) {
            assert!((c - c5).abs() < 1e-12 && (s - s5).abs() < 1e-12);
        }
        for x in f.h().as_slice() {
            assert!(x.abs() < 1e-12 || (x - 5f64.sqrt()).abs() < 1e-12, "{x}");
        }
        let (ra, rb) = f.reconstruct().unwrap();
        assert!(ra.sub(&eye2()).unwrap().frobenius_norm() < 1e-10);
        assert!(rb.sub(&b).unwrap().frobenius_norm() < 1e-10);
    }

    #[test]
    fn disjoint_columns() {
        let a = DenseMatrix::new(2, 1, vec![1.0, 0.0]).unwrap();
        let b = DenseMatrix::new(2, 1, vec![0.0, 1.0]).unwrap();
        let f = gsvd(&a, &b, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.blocks(), (1, 0, 1));
        assert!((f.c_diag()[0] - 1.0).abs() < 1e-15 && f.c_diag()[1].abs() < 1e-15);
        assert!(f.s_diag()[0].abs() < 1e-15 && (f.s_diag()[1] - 1.0).abs() < 1e-15);
        let (ra, rb) = f.reconstruct().unwrap();
        assert!(ra.sub(&a).unwrap().frobenius_norm() < 1e-12);
        assert!(rb.sub(&b).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn random_pair_round_trips() {
        let mut rng = crate::rng::SplitMix64::new(11);
        let a = rng.gaussian_matrix(50, 30);
        let b = rng.gaussian_matrix(50, 40);
        let f = gsvd(&a, &b, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank(), 50);
        let (ra, rb) = f.reconstruct().unwrap();
        assert!(rel(&ra, &a) <= 1e-9);
        assert!(rel(&rb, &b) <= 1e-9);
        assert!(f.u().orthonormality_error() <= 1e-10);
        assert!(f.v().orthonormality_error() <= 1e-10);
        for (c, s) in f.c_diag().iter().zip(f.s_diag()) {
            assert!((c * c + s * s - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn wide_and_rank_deficient_pairs() {
        let mut rng = crate::rng::SplitMix64::new(4);
        // p + q < d and p > rank share.
        let basis = rng.gaussian_matrix(40, 6);
        let a = basis.matmul(&rng.gaussian_matrix(6, 9)).unwrap();
        let b = rng.gaussian_matrix(40, 3);
        let f = gsvd(&a, &b, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank(), 9);
        let (ra, rb) = f.reconstruct().unwrap();
        assert!(rel(&ra, &a) <= 1e-9, "{}", rel(&ra, &a));
        assert!(rel(&rb, &b) <= 1e-9);
        assert_eq!(f.blocks(), (6, 0, 3));
    }

    #[test]
    fn rejects_empty_and_mismatched() {
        assert!(matches!(
            gsvd(&DenseMatrix::zeros(2, 0), &eye2(), 1e-10),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            gsvd(&DenseMatrix::identity(3), &eye2(), 1e-10),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn block_detection_examples() {
        assert_eq!(
            detect_blocks(&[1.0, 0.8, 0.0], &[0.0, 0.6, 1.0], 1e-10).unwrap(),
            (1, 1, 1)
        );
        let h = FRAC_1_SQRT_2;
        assert_eq!(detect_blocks(&[h, h], &[h, h], 1e-10).unwrap(), (0, 2, 0));
        assert_eq!(detect_blocks(&[1.0, 1.0], &[0.0, 0.0], 1e-10).unwrap(), (2, 0, 0));
        assert!(detect_blocks(&[0.5, 0.9], &[0.8, 0.4], 1e-10).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let mut rng = crate::rng::SplitMix64::new(2);
        let f = gsvd(&rng.gaussian_matrix(8, 3), &rng.gaussian_matrix(8, 4), 1e-10).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        let back: GsvdFactors = serde_json::from_str(&text).unwrap();
        assert_eq!(f, back);
    }
}
