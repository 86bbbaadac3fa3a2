#![allow(dead_code)]

use gsvd_align::matrix::{self, DenseMatrix};
use gsvd_align::rng::SplitMix64;

/// Two matrices whose column spaces meet exactly in `span(shared)`.
pub struct Planted {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub shared: DenseMatrix,
}

/// `A = [S, R_a] G_a` and `B = [S, R_b] G_b` with `S` of width `k`. Each
/// mixing matrix has `extra` surplus columns, giving A and B kernels.
pub fn planted(rng: &mut SplitMix64, d: usize, k: usize, ra: usize, rb: usize, extra: usize) -> Planted {
    let shared = rng.gaussian_matrix(d, k);
    let mut side = |own: usize| {
        let basis = shared.hstack(&rng.gaussian_matrix(d, own)).unwrap();
        basis.matmul(&rng.gaussian_matrix(k + own, k + own + extra)).unwrap()
    };
    let a = side(ra);
    let b = side(rb);
    Planted { a, b, shared }
}

pub fn rel_err(got: &DenseMatrix, want: &DenseMatrix) -> f64 {
    got.sub(want).unwrap().frobenius_norm() / want.frobenius_norm().max(f64::MIN_POSITIVE)
}

/// Angle between two vectors that stays accurate near zero.
pub fn vector_angle(u: &[f64], v: &[f64]) -> f64 {
    let vn = matrix::norm2(v);
    let along = matrix::dot(u, v) / vn;
    let perp: Vec<f64> = u.iter().zip(v).map(|(x, y)| x - along * y / vn).collect();
    matrix::norm2(&perp).atan2(along)
}

pub fn scaled_vec(v: &[f64], alpha: f64) -> Vec<f64> {
    v.iter().map(|x| x * alpha).collect()
}
