//! Seeded SplitMix64 stream.
//!
//! The algorithm is fixed so that column selections reproduce across
//! implementations: the state advances by the golden-ratio increment
//! `0x9E3779B97F4A7C15`, and each output is the state passed through the
//! mixer
//!
//! ```text
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z =  z ^ (z >> 31)
//! ```
//!
//! with wrapping arithmetic. Bounded integers use rejection sampling on the
//! raw output (reject while `x < 2^64 mod n`, then `x mod n`), so they are
//! exactly uniform.

use crate::matrix::DenseMatrix;

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % n;
            }
        }
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (Box-Muller, one value per call).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Matrix of independent standard normal entries, filled column by column.
    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        let data = (0..rows * cols).map(|_| self.next_gaussian()).collect();
        DenseMatrix::new(rows, cols, data).expect("finite gaussian draws")
    }

    /// Unit vector uniformly distributed on the sphere in `R^n`.
    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.next_gaussian()).collect();
            let norm = crate::matrix::norm2(&v);
            if norm > 0.0 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }

    /// Orthogonal `n x n` matrix from the QR factor of a Gaussian matrix.
    pub fn orthogonal_matrix(&mut self, n: usize) -> DenseMatrix {
        let g = self.gaussian_matrix(n, n);
        crate::matrix::qr(&g).expect("non-empty").q
    }
}
