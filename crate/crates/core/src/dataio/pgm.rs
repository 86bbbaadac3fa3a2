//! Binary greyscale PGM (P5) export.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Min-max scales `v` into bytes; a constant vector maps to mid-grey 128.
pub fn to_grey(v: &[f64]) -> Vec<u8> {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !(hi > lo) {
        return vec![128; v.len()];
    }
    let span = hi - lo;
    v.iter()
        .map(|&x| ((x - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect()
}

pub fn encode_pgm(v: &[f64], rows: usize, cols: usize) -> Result<Vec<u8>> {
    if v.len() != rows * cols {
        return Err(Error::Contract(format!(
            "{} values for a {rows}x{cols} image",
            v.len()
        )));
    }
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(to_grey(v));
    Ok(out)
}

/// Writes `v` (row-major) as a `rows x cols` image.
pub fn write_pgm(v: &[f64], rows: usize, cols: usize, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(v, rows, cols)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_mid_grey() {
        let bytes = encode_pgm(&[0.3; 4], 2, 2).unwrap();
        assert!(bytes.ends_with(&[128, 128, 128, 128]));
    }

    #[test]
    fn extremes() {
        let bytes = encode_pgm(&[0.0, 1.0], 1, 2).unwrap();
        assert_eq!(bytes, b"P5\n2 1\n255\n\x00\xff".to_vec());
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(encode_pgm(&[0.0; 3], 2, 2), Err(Error::Contract(_))));
    }
}
