//! Threshold classifier on the alignment angle: a sample goes to class A when
//! `theta(z) <= tau` and to class B otherwise.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::alignment::{AlignmentOptions, AlignmentScore, Scorer};
use crate::dataio::LabeledDataset;
use crate::error::{Error, Result};
use crate::gsvd::{self, GsvdFactors};
use crate::matrix::{DenseMatrix, TRUNCATION_TOL};

pub const DEFAULT_TAU: f64 = FRAC_PI_4;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassifierModel {
    #[serde(flatten)]
    factors: GsvdFactors,
    #[serde(default = "default_tau")]
    tau: f64,
    #[serde(default = "default_label_a")]
    label_a: String,
    #[serde(default = "default_label_b")]
    label_b: String,
    #[serde(default = "default_trunc_tol")]
    trunc_tol: f64,
    /// Frame columns (0-based, inside the shared block) ignored when scoring.
    #[serde(default)]
    pruned_indices: Vec<usize>,
    /// Mean subtracted from raw samples before scoring, when the model was
    /// fitted on centered data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    center: Option<Vec<f64>>,
}

// Defaults let a bare factors document load as a model.
fn default_tau() -> f64 {
    DEFAULT_TAU
}
fn default_label_a() -> String {
    "A".into()
}
fn default_label_b() -> String {
    "B".into()
}
fn default_trunc_tol() -> f64 {
    TRUNCATION_TOL
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    A,
    B,
    Abstain,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub decision: Decision,
    pub score: AlignmentScore,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metrics {
    pub total: usize,
    pub correct: usize,
    pub abstained: usize,
    /// `correct / total`; abstentions count as not correct.
    pub accuracy: f64,
    /// `confusion[true][predicted]` over `{A, B}`; abstentions excluded.
    pub confusion: [[usize; 2]; 2],
    pub flagged: usize,
    pub mean_theta_a: Option<f64>,
    pub mean_theta_b: Option<f64>,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::Range(format!("tau {tau} outside (0, pi/2)")))
    }
}

impl ClassifierModel {
    /// Decomposes the two training matrices with `trunc_tol` as the rank
    /// threshold and wraps the frame with threshold `tau`.
    pub fn fit(samples_a: &DenseMatrix, samples_b: &DenseMatrix, tau: f64, trunc_tol: f64) -> Result<Self> {
        check_tau(tau)?;
        let factors = gsvd::gsvd(samples_a, samples_b, trunc_tol)?;
        Self::from_factors(factors, tau, trunc_tol)
    }

    pub fn from_factors(factors: GsvdFactors, tau: f64, trunc_tol: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self {
            factors,
            tau,
            label_a: "A".into(),
            label_b: "B".into(),
            trunc_tol,
            pruned_indices: Vec::new(),
            center: None,
        })
    }

    pub fn with_labels(mut self, label_a: impl Into<String>, label_b: impl Into<String>) -> Self {
        self.label_a = label_a.into();
        self.label_b = label_b.into();
        self
    }

    pub fn with_center(mut self, center: Option<Vec<f64>>) -> Self {
        self.center = center;
        self
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self { tau, ..self.clone() })
    }

    pub fn factors(&self) -> &GsvdFactors {
        &self.factors
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn label_a(&self) -> &str {
        &self.label_a
    }
    pub fn label_b(&self) -> &str {
        &self.label_b
    }
    pub fn trunc_tol(&self) -> f64 {
        self.trunc_tol
    }
    pub fn pruned_indices(&self) -> &[usize] {
        &self.pruned_indices
    }
    pub fn center(&self) -> Option<&[f64]> {
        self.center.as_deref()
    }

    pub fn label_of(&self, d: Decision) -> Option<&str> {
        match d {
            Decision::A => Some(&self.label_a),
            Decision::B => Some(&self.label_b),
            Decision::Abstain => None,
        }
    }

    fn scorer(&self) -> Result<Scorer<'_>> {
        Scorer::with_pruned(
            &self.factors,
            AlignmentOptions::with_trunc_tol(self.trunc_tol),
            &self.pruned_indices,
        )
    }

    /// Decision for an already computed score.
    pub fn decide(&self, score: &AlignmentScore) -> Decision {
        if score.theta.is_nan() {
            Decision::Abstain
        } else if score.theta <= self.tau {
            Decision::A
        } else {
            Decision::B
        }
    }

    /// Classifies `z`. Samples whose angle is undefined abstain and carry
    /// the flagged score for auditing.
    pub fn predict(&self, z: &[f64]) -> Result<Prediction> {
        let score = self.scorer()?.score_or_flag(z)?;
        Ok(Prediction {
            decision: self.decide(&score),
            score,
        })
    }

    /// Classifies every column of `zs`, in order.
    pub fn predict_columns(&self, zs: &DenseMatrix) -> Result<Vec<Prediction>> {
        let scores = self.scorer()?.score_columns(zs)?;
        Ok(scores
            .into_iter()
            .map(|score| Prediction {
                decision: self.decide(&score),
                score,
            })
            .collect())
    }

    pub fn evaluate(&self, test: &LabeledDataset) -> Result<Metrics> {
        let preds = self.predict_columns(test.features())?;
        self.metrics(test.labels(), &preds)
    }

    /// Tallies predictions against true labels.
    pub fn metrics(&self, labels: &[String], preds: &[Prediction]) -> Result<Metrics> {
        if labels.is_empty() {
            return Err(Error::EmptyInput("empty test set".into()));
        }
        if labels.len() != preds.len() {
            return Err(Error::Consistency(format!(
                "{} labels for {} predictions",
                labels.len(),
                preds.len()
            )));
        }
        let mut m = Metrics {
            total: labels.len(),
            correct: 0,
            abstained: 0,
            accuracy: 0.0,
            confusion: [[0; 2]; 2],
            flagged: 0,
            mean_theta_a: None,
            mean_theta_b: None,
        };
        let mut sums = [(0.0, 0usize); 2];
        for (label, p) in labels.iter().zip(preds) {
            let truth = if *label == self.label_a {
                0
            } else if *label == self.label_b {
                1
            } else {
                return Err(Error::Contract(format!(
                    "test label {label:?} is neither {:?} nor {:?}",
                    self.label_a, self.label_b
                )));
            };
            m.flagged += usize::from(p.score.non_relational);
            let predicted = match p.decision {
                Decision::A => 0,
                Decision::B => 1,
                Decision::Abstain => {
                    m.abstained += 1;
                    continue;
                }
            };
            sums[truth].0 += p.score.theta;
            sums[truth].1 += 1;
            m.confusion[truth][predicted] += 1;
            m.correct += usize::from(truth == predicted);
        }
        m.accuracy = m.correct as f64 / m.total as f64;
        let mean = |(s, n): (f64, usize)| (n > 0).then(|| s / n as f64);
        m.mean_theta_a = mean(sums[0]);
        m.mean_theta_b = mean(sums[1]);
        Ok(m)
    }

    /// Marks shared directions with `|c~_i - s~_i| <= ratio_band` as pruned.
    /// A band of zero prunes nothing, even exact ties.
    pub fn prune_shared_directions(&self, ratio_band: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&ratio_band) {
            return Err(Error::Range(format!("ratio band {ratio_band} outside [0, 1)")));
        }
        let pruned_indices = if ratio_band == 0.0 {
            Vec::new()
        } else {
            let (c, s) = (self.factors.c_diag(), self.factors.s_diag());
            self.factors
                .shared_range()
                .filter(|&i| (c[i] - s[i]).abs() <= ratio_band)
                .collect()
        };
        Ok(Self {
            pruned_indices,
            ..self.clone()
        })
    }
}

/// `fit` with the default threshold and truncation.
pub fn fit_default(samples_a: &DenseMatrix, samples_b: &DenseMatrix) -> Result<ClassifierModel> {
    ClassifierModel::fit(samples_a, samples_b, DEFAULT_TAU, TRUNCATION_TOL)
}
