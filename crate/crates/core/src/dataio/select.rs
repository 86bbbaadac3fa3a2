//! Seeded column selection and mean-centering.

use crate::dataio::rng::SplitMix64;
use crate::dataio::LabeledDataset;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Picks `count` samples labelled `label` uniformly without replacement and
/// returns their indices in ascending order.
///
/// A partial Fisher-Yates shuffle over the matching indices (in stored
/// order) draws from `rng`; when every matching sample is requested the
/// stream is left untouched and the stored order is returned.
pub fn select_indices(
    ds: &LabeledDataset,
    label: &str,
    count: usize,
    rng: &mut SplitMix64,
) -> Result<Vec<usize>> {
    let mut pool = ds.indices_of(label);
    if pool.len() < count {
        return Err(Error::Range(format!(
            "requested {count} samples of label {label:?}, only {} available",
            pool.len()
        )));
    }
    if count == pool.len() {
        return Ok(pool);
    }
    let n = pool.len();
    for i in 0..count {
        let j = i + rng.below((n - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool.sort_unstable();
    Ok(pool)
}

/// Disjoint selections of the given sizes from the samples labelled
/// `label`: one partial shuffle draws `sum(counts)` indices, which are cut
/// in draw order and each part sorted ascending.
pub fn select_disjoint(
    ds: &LabeledDataset,
    label: &str,
    counts: &[usize],
    rng: &mut SplitMix64,
) -> Result<Vec<Vec<usize>>> {
    let mut pool = ds.indices_of(label);
    let total: usize = counts.iter().sum();
    if pool.len() < total {
        return Err(Error::Range(format!(
            "requested {total} samples of label {label:?}, only {} available",
            pool.len()
        )));
    }
    let n = pool.len();
    for i in 0..total {
        let j = i + rng.below((n - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut out = Vec::with_capacity(counts.len());
    let mut start = 0;
    for &c in counts {
        let mut part = pool[start..start + c].to_vec();
        part.sort_unstable();
        out.push(part);
        start += c;
    }
    Ok(out)
}

pub fn column_mean(m: &DenseMatrix) -> Vec<f64> {
    let mut mean = vec![0.0; m.rows()];
    if m.cols() == 0 {
        return mean;
    }
    for j in 0..m.cols() {
        for (acc, x) in mean.iter_mut().zip(m.column(j)) {
            *acc += x;
        }
    }
    let n = m.cols() as f64;
    mean.iter_mut().for_each(|x| *x /= n);
    mean
}

pub fn subtract_mean(m: &DenseMatrix, mean: &[f64]) -> Result<DenseMatrix> {
    if mean.len() != m.rows() {
        return Err(Error::Contract(format!(
            "mean of length {} for {} rows",
            mean.len(),
            m.rows()
        )));
    }
    let mut data = m.as_slice().to_vec();
    for col in data.chunks_mut(m.rows().max(1)) {
        for (x, mu) in col.iter_mut().zip(mean) {
            *x -= mu;
        }
    }
    DenseMatrix::new(m.rows(), m.cols(), data)
}

/// Selects `count` samples of `label` with a fresh stream seeded by `seed`
/// and centers them with `mean`, or with their own mean when none is given.
pub fn center_and_select(
    ds: &LabeledDataset,
    label: &str,
    count: usize,
    seed: u64,
    mean: Option<&[f64]>,
) -> Result<LabeledDataset> {
    let mut rng = SplitMix64::new(seed);
    let idx = select_indices(ds, label, count, &mut rng)?;
    let mut picked = ds.subset(&idx)?;
    picked.provenance.seed = Some(seed);
    let mean = match mean {
        Some(m) => m.to_vec(),
        None => column_mean(picked.features()),
    };
    let mut out = picked.centered_with(&mean)?;
    out.provenance.selection = Some(idx);
    Ok(out)
}
