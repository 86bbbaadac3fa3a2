//! Compare two datasets that live in the same feature space through their
//! joint (generalized singular value) decomposition.
//!
//! The decomposition `A = H C U`, `B = H S V` gives both datasets one frame
//! `H`. Each sample `z` then gets an alignment angle `theta(z)` in
//! `[0, pi/2]` measuring whether `A` or `B` explains it more cheaply. Angle
//! histograms are compared with the Fisher-Rao distance, extreme shared
//! directions are read straight off the frame, and a threshold on `theta`
//! gives a minimal binary classifier.
//!
//! ```
//! use gsvd_align::{gsvd, alignment, DenseMatrix};
//!
//! let a = DenseMatrix::identity(2);
//! let b = a.scaled(2.0).unwrap();
//! let f = gsvd::gsvd(&a, &b, gsvd::DEFAULT_RANK_TOL).unwrap();
//! let s = alignment::alignment_angle(&f, &[1.0, 0.5], 1e-12).unwrap();
//! assert!((s.theta - 2f64.atan()).abs() < 1e-12);
//! ```

// `!(x >= 0.0)` is how parameter checks reject NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alignment;
pub mod classifier;
pub mod dataio;
pub mod error;
pub mod extremes;
pub mod gsvd;
pub mod infogeo;
pub mod matrix;
pub mod procrustes;

pub use dataio::rng;

pub use alignment::AlignmentScore;
pub use classifier::ClassifierModel;
pub use dataio::LabeledDataset;
pub use error::{Error, Result};
pub use gsvd::GsvdFactors;
pub use infogeo::AngleHistogram;
pub use matrix::DenseMatrix;
