//! Per-sample alignment angle `theta(z) = atan(a(z) / b(z))`, where `a` and
//! `b` are the minimum-norm costs of representing `z` with columns of `A`
//! and of `B`. Near 0 the sample is explained more cheaply by `A`, near
//! pi/2 by `B`, and pi/4 marks structure both explain equally well.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gsvd::GsvdFactors;
use crate::matrix::{self, DenseMatrix, TRUNCATION_TOL};

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;
pub const DEFAULT_BLOCK_MASS_TOL: f64 = 1e-6;
/// Floor for relative-residual denominators.
pub const EPS_FLOOR: f64 = 1e-300;
/// Relative residual above which the oracle refuses a sample.
pub const ORACLE_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignmentScore {
    /// Radians in `[0, pi/2]`; NaN when both costs vanish (batch output only).
    pub theta: f64,
    pub a: f64,
    pub b: f64,
    pub frame_residual: f64,
    pub mass_r: f64,
    pub mass_k: f64,
    pub mass_t: f64,
    pub non_relational: bool,
}

impl AlignmentScore {
    pub fn is_defined(&self) -> bool {
        !self.theta.is_nan()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlignmentOptions {
    pub trunc_tol: f64,
    pub residual_tol: f64,
    pub block_mass_tol: f64,
}

impl Default for AlignmentOptions {
    fn default() -> Self {
        Self {
            trunc_tol: TRUNCATION_TOL,
            residual_tol: DEFAULT_RESIDUAL_TOL,
            block_mass_tol: DEFAULT_BLOCK_MASS_TOL,
        }
    }
}

impl AlignmentOptions {
    pub fn with_trunc_tol(trunc_tol: f64) -> Self {
        Self {
            trunc_tol,
            ..Self::default()
        }
    }
}

/// `c = H^+ z` and the relative residual `|H c - z| / max(|z|, eps)`.
pub fn frame_coordinates(f: &GsvdFactors, z: &[f64]) -> Result<(Vec<f64>, f64)> {
    check_len(f, z)?;
    Ok(coordinates_unchecked(f, z))
}

fn check_len(f: &GsvdFactors, z: &[f64]) -> Result<()> {
    if z.len() != f.d() {
        return Err(Error::Contract(format!(
            "sample of length {} in dimension {}",
            z.len(),
            f.d()
        )));
    }
    Ok(())
}

fn coordinates_unchecked(f: &GsvdFactors, z: &[f64]) -> (Vec<f64>, f64) {
    let c = f.h_pinv().mul_vec(z).expect("length checked");
    let back = f.h().mul_vec(&c).expect("length checked");
    let diff: Vec<f64> = back.iter().zip(z).map(|(x, y)| x - y).collect();
    let residual = matrix::norm2(&diff) / matrix::norm2(z).max(EPS_FLOOR);
    (c, residual)
}

/// Precomputed inverse spectra for repeated scoring against one frame.
pub struct Scorer<'a> {
    factors: &'a GsvdFactors,
    inv_c: Vec<f64>,
    inv_s: Vec<f64>,
    pruned: Vec<bool>,
    opts: AlignmentOptions,
}

impl<'a> Scorer<'a> {
    pub fn new(factors: &'a GsvdFactors, opts: AlignmentOptions) -> Result<Self> {
        Self::with_pruned(factors, opts, &[])
    }

    /// Frame coordinates listed in `pruned` are zeroed before costs are taken.
    pub fn with_pruned(factors: &'a GsvdFactors, opts: AlignmentOptions, pruned: &[usize]) -> Result<Self> {
        let mut mask = vec![false; factors.rank()];
        for &i in pruned {
            *mask
                .get_mut(i)
                .ok_or_else(|| Error::Range(format!("pruned index {i} beyond rank {}", factors.rank())))? = true;
        }
        Ok(Self {
            factors,
            inv_c: matrix::truncated_pinv_diag(factors.c_diag(), opts.trunc_tol)?,
            inv_s: matrix::truncated_pinv_diag(factors.s_diag(), opts.trunc_tol)?,
            pruned: mask,
            opts,
        })
    }

    pub fn factors(&self) -> &GsvdFactors {
        self.factors
    }

    pub fn score(&self, z: &[f64]) -> Result<AlignmentScore> {
        check_len(self.factors, z)?;
        let (mut c, residual) = coordinates_unchecked(self.factors, z);
        for (ci, &p) in c.iter_mut().zip(&self.pruned) {
            if p {
                *ci = 0.0;
            }
        }
        let (r, k, _) = self.factors.blocks();
        let sq = |range: std::ops::Range<usize>| c[range].iter().map(|x| x * x).sum::<f64>();
        let (er, ek, et) = (sq(0..r), sq(r..r + k), sq(r + k..c.len()));
        let total = er + ek + et;
        let (mass_r, mass_k, mass_t) = if total > 0.0 {
            (er / total, ek / total, et / total)
        } else {
            (0.0, 0.0, 0.0)
        };
        let cost = |inv: &[f64]| {
            let v: Vec<f64> = c.iter().zip(inv).map(|(x, w)| x * w).collect();
            matrix::norm2(&v)
        };
        let (a, b) = (cost(&self.inv_c), cost(&self.inv_s));
        if a == 0.0 && b == 0.0 {
            return Err(Error::NonRelational {
                mass_r,
                mass_k,
                mass_t,
            });
        }
        let non_relational =
            residual > self.opts.residual_tol || mass_r + mass_t > self.opts.block_mass_tol;
        Ok(AlignmentScore {
            theta: a.atan2(b),
            a,
            b,
            frame_residual: residual,
            mass_r,
            mass_k,
            mass_t,
            non_relational,
        })
    }

    /// Like [`Scorer::score`], but an undefined angle becomes a flagged score
    /// with `theta = NaN` instead of an error.
    pub fn score_or_flag(&self, z: &[f64]) -> Result<AlignmentScore> {
        match self.score(z) {
            Err(Error::NonRelational {
                mass_r,
                mass_k,
                mass_t,
            }) => {
                let (_, residual) = coordinates_unchecked(self.factors, z);
                Ok(AlignmentScore {
                    theta: f64::NAN,
                    a: 0.0,
                    b: 0.0,
                    frame_residual: residual,
                    mass_r,
                    mass_k,
                    mass_t,
                    non_relational: true,
                })
            }
            other => other,
        }
    }

    /// Scores every column of `zs`, in order.
    pub fn score_columns(&self, zs: &DenseMatrix) -> Result<Vec<AlignmentScore>> {
        if zs.cols() > 0 && zs.rows() != self.factors.d() {
            return Err(Error::Contract(format!(
                "samples of dimension {} against frame dimension {}",
                zs.rows(),
                self.factors.d()
            )));
        }
        // Force the cached pseudoinverse before fanning out.
        let _ = self.factors.h_pinv();
        let one = |j: usize| self.score_or_flag(zs.column(j));
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..zs.cols()).into_par_iter().map(one).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..zs.cols()).map(one).collect()
        }
    }
}

/// Alignment angle of `z` in the frame of `f`, with `tol` the relative
/// truncation threshold for the inverse spectra.
pub fn alignment_angle(f: &GsvdFactors, z: &[f64], tol: f64) -> Result<AlignmentScore> {
    Scorer::new(f, AlignmentOptions::with_trunc_tol(tol))?.score(z)
}

/// Scores every column of `zs`; undefined angles are recorded as flagged
/// scores rather than aborting the batch.
pub fn batch_angles(f: &GsvdFactors, zs: &DenseMatrix, tol: f64) -> Result<Vec<AlignmentScore>> {
    Scorer::new(f, AlignmentOptions::with_trunc_tol(tol))?.score_columns(zs)
}

/// The angle computed straight from minimum-norm solves against `a` and `b`,
/// with no joint decomposition involved.
pub fn alignment_angle_oracle(a: &DenseMatrix, b: &DenseMatrix, z: &[f64]) -> Result<f64> {
    let x = matrix::min_norm_solve(a, z)?;
    let y = matrix::min_norm_solve(b, z)?;
    let zn = matrix::norm2(z).max(EPS_FLOOR);
    let residual = |m: &DenseMatrix, w: &[f64]| -> Result<f64> {
        let back = m.mul_vec(w)?;
        let diff: Vec<f64> = back.iter().zip(z).map(|(p, q)| p - q).collect();
        Ok(matrix::norm2(&diff) / zn)
    };
    let (residual_a, residual_b) = (residual(a, &x)?, residual(b, &y)?);
    if residual_a > ORACLE_RESIDUAL_TOL || residual_b > ORACLE_RESIDUAL_TOL {
        return Err(Error::OutsideColumnSpace {
            residual_a,
            residual_b,
        });
    }
    Ok(matrix::norm2(&x).atan2(matrix::norm2(&y)))
}
