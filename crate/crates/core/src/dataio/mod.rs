//! Dataset ingestion, preprocessing and the on-disk formats the CLI speaks.

pub mod idx;
pub mod json;
pub mod pgm;
pub mod rng;
pub mod select;
pub mod tables;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub use idx::{read_idx, read_idx_filtered};
pub use select::{center_and_select, column_mean, select_disjoint, select_indices, subtract_mean};

/// Where a dataset came from and what was done to it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    /// Divisor applied to raw pixel bytes, if any.
    pub pixel_scale: Option<f64>,
    pub centered: bool,
    pub mean: Option<Vec<f64>>,
    pub seed: Option<u64>,
    /// Indices into the source dataset, ascending.
    pub selection: Option<Vec<usize>>,
}

/// Feature matrix (columns are samples) with one opaque label per column.
#[derive(Clone, Debug)]
pub struct LabeledDataset {
    features: DenseMatrix,
    labels: Vec<String>,
    pub provenance: Provenance,
}

impl LabeledDataset {
    pub fn new(features: DenseMatrix, labels: Vec<String>, provenance: Provenance) -> Result<Self> {
        if labels.len() != features.cols() {
            return Err(Error::Consistency(format!(
                "{} labels for {} samples",
                labels.len(),
                features.cols()
            )));
        }
        Ok(Self {
            features,
            labels,
            provenance,
        })
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.rows()
    }

    /// Indices of samples carrying `label`, in stored order.
    pub fn indices_of(&self, label: &str) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.as_str() == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// Sub-dataset of the listed samples, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let features = self.features.select_columns(indices)?;
        let labels = indices.iter().map(|&i| self.labels[i].clone()).collect();
        let mut provenance = self.provenance.clone();
        provenance.selection = Some(indices.to_vec());
        Self::new(features, labels, provenance)
    }

    /// Samples carrying either of the given labels.
    pub fn filter_labels(&self, keep: &[&str]) -> Result<Self> {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| keep.contains(&self.labels[i].as_str()))
            .collect();
        self.subset(&idx)
    }

    /// Subtracts `mean` from every sample and records it.
    pub fn centered_with(&self, mean: &[f64]) -> Result<Self> {
        let features = subtract_mean(&self.features, mean)?;
        let mut provenance = self.provenance.clone();
        provenance.centered = true;
        provenance.mean = Some(mean.to_vec());
        Self::new(features, self.labels.clone(), provenance)
    }
}
