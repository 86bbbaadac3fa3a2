//! Angle histograms and the information geometry used to compare them.
//!
//! Reading `cos^2 theta` and `sin^2 theta` as class evidences turns each
//! angle into a point on the probability simplex. The square-root embedding
//! maps that simplex onto a sphere, where the Fisher-Rao distance is twice
//! the arc between the embedded points.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 30;
/// Edges closer than this (in radians) are treated as the same grid.
pub const EDGE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleHistogram {
    edges: Vec<f64>,
    masses: Vec<f64>,
    count: usize,
}

/// `m + 1` uniform edges over `[0, pi/2]`.
pub fn uniform_edges(m: usize) -> Vec<f64> {
    (0..=m)
        .map(|i| if i == m { FRAC_PI_2 } else { FRAC_PI_2 * i as f64 / m as f64 })
        .collect()
}

impl AngleHistogram {
    /// Validates explicit edges and masses (masses must already sum to one).
    pub fn from_parts(edges: Vec<f64>, masses: Vec<f64>, count: usize) -> Result<Self> {
        if masses.is_empty() || edges.len() != masses.len() + 1 {
            return Err(Error::Contract(format!(
                "{} edges for {} bins",
                edges.len(),
                masses.len()
            )));
        }
        if edges[0] != 0.0 || edges[edges.len() - 1] != FRAC_PI_2 {
            return Err(Error::Contract("edges must span [0, pi/2]".into()));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Contract("edges must increase strictly".into()));
        }
        if masses.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::Contract("masses must be finite and non-negative".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Contract(format!("masses sum to {total}, not 1")));
        }
        Ok(Self {
            edges,
            masses,
            count,
        })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }
    pub fn count(&self) -> usize {
        self.count
    }
    pub fn bins(&self) -> usize {
        self.masses.len()
    }

    fn check_compatible(&self, other: &AngleHistogram) -> Result<()> {
        let same = self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| (a - b).abs() <= EDGE_TOL);
        if same {
            Ok(())
        } else {
            Err(Error::Contract("histograms have different bin edges".into()))
        }
    }
}

/// Bins angles on `bins` uniform half-open intervals `[lo, hi)`; the last
/// interval also takes `pi/2`.
pub fn histogram(thetas: &[f64], bins: usize) -> Result<AngleHistogram> {
    if thetas.is_empty() {
        return Err(Error::EmptyInput("no angles to bin".into()));
    }
    if bins == 0 {
        return Err(Error::Range("histogram needs at least one bin".into()));
    }
    let edges = uniform_edges(bins);
    let mut counts = vec![0usize; bins];
    for &t in thetas {
        if !(0.0..=FRAC_PI_2).contains(&t) {
            return Err(Error::Contract(format!("angle {t} outside [0, pi/2]")));
        }
        let mut i = ((t / FRAC_PI_2) * bins as f64) as usize;
        i = i.min(bins - 1);
        // Settle rounding against the stored edges.
        while i > 0 && t < edges[i] {
            i -= 1;
        }
        while i + 1 < bins && t >= edges[i + 1] {
            i += 1;
        }
        counts[i] += 1;
    }
    let n = thetas.len() as f64;
    let masses = counts.iter().map(|&c| c as f64 / n).collect();
    Ok(AngleHistogram {
        edges,
        masses,
        count: thetas.len(),
    })
}

fn check_angle(theta: f64) -> Result<()> {
    if (0.0..=FRAC_PI_2).contains(&theta) {
        Ok(())
    } else {
        Err(Error::Contract(format!("angle {theta} outside [0, pi/2]")))
    }
}

/// Class posteriors `(cos^2 theta, sin^2 theta)` under equal priors.
pub fn posterior_from_theta(theta: f64) -> Result<(f64, f64)> {
    check_angle(theta)?;
    let (s, c) = theta.sin_cos();
    Ok((c * c, s * s))
}

/// Fisher-Rao distance between the posteriors of two angles: `2 |t1 - t2|`.
pub fn per_sample_fr(theta1: f64, theta2: f64) -> f64 {
    2.0 * (theta1 - theta2).abs()
}

/// `sum_i sqrt(P_i Q_i)`, normalized by the total masses so that rounding in
/// the inputs cannot push identical histograms away from exactly one.
pub fn bhattacharyya(p: &AngleHistogram, q: &AngleHistogram) -> Result<f64> {
    p.check_compatible(q)?;
    let overlap: f64 = p
        .masses
        .iter()
        .zip(&q.masses)
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    let sp: f64 = p.masses.iter().sum();
    let sq: f64 = q.masses.iter().sum();
    Ok((overlap / (sp * sq).sqrt()).clamp(0.0, 1.0))
}

/// `2 arccos BC(P, Q)`, in `[0, pi]`.
pub fn fisher_rao(p: &AngleHistogram, q: &AngleHistogram) -> Result<f64> {
    Ok(2.0 * bhattacharyya(p, q)?.acos())
}

/// Squared Hellinger distance `1 - BC(P, Q)`.
pub fn hellinger_sq(p: &AngleHistogram, q: &AngleHistogram) -> Result<f64> {
    Ok(1.0 - bhattacharyya(p, q)?)
}

pub fn fr_from_hellinger(h2: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h2) {
        return Err(Error::Contract(format!("squared Hellinger {h2} outside [0, 1]")));
    }
    Ok(2.0 * (1.0 - h2).acos())
}

/// Per-bin class posteriors under priors `(prior_a, 1 - prior_a)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinPosterior {
    /// `P(A | bin)`; `None` where the mixture has no mass.
    pub r: Vec<Option<f64>>,
    /// Mixture mass `pi_A P_i + pi_B Q_i`.
    pub mass: Vec<f64>,
    pub prior_a: f64,
    pub prior_b: f64,
}

pub fn bin_posteriors(p: &AngleHistogram, q: &AngleHistogram, prior_a: f64) -> Result<BinPosterior> {
    p.check_compatible(q)?;
    if !(prior_a > 0.0 && prior_a < 1.0) {
        return Err(Error::Range(format!("prior {prior_a} outside (0, 1)")));
    }
    let prior_b = 1.0 - prior_a;
    let (r, mass) = p
        .masses
        .iter()
        .zip(&q.masses)
        .map(|(&pa, &qb)| {
            let ea = prior_a * pa;
            let m = ea + prior_b * qb;
            ((m > 0.0).then(|| ea / m), m)
        })
        .unzip();
    Ok(BinPosterior {
        r,
        mass,
        prior_a,
        prior_b,
    })
}

/// Fisher-Rao distance recovered from the expected posterior standard
/// deviation, `2 arccos( sum_i m_i sqrt(r_i (1 - r_i) / (pi_A pi_B)) )`.
/// Normalized by the populated mixture mass, matching [`bhattacharyya`].
pub fn fr_via_posterior(bp: &BinPosterior) -> f64 {
    let scale = bp.prior_a * bp.prior_b;
    let (mut acc, mut total) = (0.0, 0.0);
    for (r, m) in bp.r.iter().zip(&bp.mass) {
        if let Some(r) = r {
            acc += m * (r * (1.0 - r) / scale).sqrt();
            total += m;
        }
    }
    if total == 0.0 {
        return PI;
    }
    2.0 * (acc / total).clamp(0.0, 1.0).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn hist(masses: &[f64]) -> AngleHistogram {
        AngleHistogram::from_parts(uniform_edges(masses.len()), masses.to_vec(), 0).unwrap()
    }

    #[test]
    fn edge_conventions() {
        assert_eq!(histogram(&[FRAC_PI_4], 2).unwrap().masses(), &[0.0, 1.0]);
        assert_eq!(histogram(&[0.0, FRAC_PI_2], 2).unwrap().masses(), &[0.5, 0.5]);
        assert!(matches!(histogram(&[], 3), Err(Error::EmptyInput(_))));
        assert!(histogram(&[1.7], 3).is_err());
    }

    #[test]
    fn uniform_angles_fill_bins_evenly() {
        let mut rng = crate::rng::SplitMix64::new(1);
        let t: Vec<f64> = (0..100_000).map(|_| rng.next_f64() * FRAC_PI_2).collect();
        let h = histogram(&t, 30).unwrap();
        assert!(h.masses().iter().all(|m| (m - 1.0 / 30.0).abs() < 0.01));
        assert!((h.masses().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn posteriors_from_angles() {
        assert_eq!(posterior_from_theta(0.0).unwrap(), (1.0, 0.0));
        let (a, b) = posterior_from_theta(FRAC_PI_4).unwrap();
        assert!((a - 0.5).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        let (a, b) = posterior_from_theta(FRAC_PI_3).unwrap();
        assert!((a - 0.25).abs() < 1e-15 && (b - 0.75).abs() < 1e-15);
        assert!(posterior_from_theta(-0.1).is_err());
    }

    #[test]
    fn per_sample_distance() {
        assert_eq!(per_sample_fr(0.4, 0.4), 0.0);
        assert_eq!(per_sample_fr(0.0, FRAC_PI_2), PI);
        assert!((per_sample_fr(0.3, 0.7) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn coefficient_and_distance() {
        let p = hist(&[0.5, 0.5]);
        let q = hist(&[0.9, 0.1]);
        assert!((bhattacharyya(&p, &q).unwrap() - (0.45f64.sqrt() + 0.05f64.sqrt())).abs() < 1e-15);
        assert_eq!(bhattacharyya(&p, &p).unwrap(), 1.0);
        assert_eq!(fisher_rao(&p, &p).unwrap(), 0.0);
        let (x, y) = (hist(&[1.0, 0.0]), hist(&[0.0, 1.0]));
        assert_eq!(bhattacharyya(&x, &y).unwrap(), 0.0);
        assert_eq!(fisher_rao(&x, &y).unwrap(), PI);
        assert!(fisher_rao(&p, &hist(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn posterior_examples() {
        let p = hist(&[0.2, 0.3, 0.5, 0.0]);
        let bp = bin_posteriors(&p, &p, 0.5).unwrap();
        assert_eq!(&bp.r[..3], &[Some(0.5); 3]);
        assert_eq!(bp.r[3], None);
        assert_eq!(fr_via_posterior(&bp), 0.0);

        let q = hist(&[0.2, 0.3, 0.0, 0.5]);
        assert_eq!(bin_posteriors(&p, &q, 0.5).unwrap().r[2], Some(1.0));

        let bp = bin_posteriors(&hist(&[0.8, 0.2]), &hist(&[0.2, 0.8]), 0.5).unwrap();
        assert!((bp.r[0].unwrap() - 0.8).abs() < 1e-15 && (bp.r[1].unwrap() - 0.2).abs() < 1e-15);

        let bp = bin_posteriors(&hist(&[1.0, 0.0]), &hist(&[0.0, 1.0]), 0.3).unwrap();
        assert_eq!(fr_via_posterior(&bp), PI);
    }

    #[test]
    fn hellinger_examples() {
        let p = hist(&[0.5, 0.5]);
        assert_eq!(hellinger_sq(&p, &p).unwrap(), 0.0);
        assert_eq!(hellinger_sq(&hist(&[1.0, 0.0]), &hist(&[0.0, 1.0])).unwrap(), 1.0);
        assert_eq!(fr_from_hellinger(0.0).unwrap(), 0.0);
        assert_eq!(fr_from_hellinger(1.0).unwrap(), PI);
        assert!((fr_from_hellinger(0.5).unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!(fr_from_hellinger(1.5).is_err());
    }
}
