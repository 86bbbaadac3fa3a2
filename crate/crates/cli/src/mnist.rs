//! The MNIST experiment: sample two digit classes from the training set,
//! center, decompose, score every test image of both digits, and export
//! histograms, distances, classifier metrics and extreme-direction images.

use std::fs;
use std::path::{Path, PathBuf};

use gsvd_align::classifier::{ClassifierModel, Metrics};
use gsvd_align::dataio::{
    column_mean, json, pgm, read_idx_filtered, rng::SplitMix64, select_disjoint, select_indices,
    subtract_mean, tables,
};
use gsvd_align::extremes::{self, ExtremeDirection};
use gsvd_align::{infogeo, AlignmentScore};
use serde::Serialize;

use crate::error::{check_flagged, CliError};
use crate::{Centering, MnistArgs};

const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

fn resolve(explicit: &Option<PathBuf>, dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    let path = explicit.clone().unwrap_or_else(|| dir.join(name));
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::Input(format!(
            "MNIST file not found: {} (pass --data-dir or set GSVD_ALIGN_MNIST_DIR)",
            path.display()
        )))
    }
}

#[derive(Serialize)]
struct Separation<'a> {
    digit_a: &'a str,
    digit_b: &'a str,
    seed: u64,
    p: usize,
    q: usize,
    bins: usize,
    centering: &'a str,
    rank: usize,
    r: usize,
    k: usize,
    t: usize,
    test_a: usize,
    test_b: usize,
    binned_a: usize,
    binned_b: usize,
    prior_a: f64,
    bhattacharyya: f64,
    fisher_rao: f64,
    hellinger_sq: f64,
    fisher_rao_posterior: f64,
}

#[derive(Serialize)]
struct PrunedReport {
    band: f64,
    pruned: usize,
    metrics: Metrics,
}

#[derive(Serialize)]
struct ClassifierReport {
    tau: f64,
    label_a: String,
    label_b: String,
    #[serde(flatten)]
    metrics: Metrics,
    pruned: Option<PrunedReport>,
}

#[derive(Serialize)]
struct ExtremeReport {
    shared_index: usize,
    theta: f64,
    theta_deg: f64,
}

impl From<&ExtremeDirection> for ExtremeReport {
    fn from(e: &ExtremeDirection) -> Self {
        Self {
            shared_index: e.shared_index,
            theta: e.theta,
            theta_deg: e.theta.to_degrees(),
        }
    }
}

fn image_shape(d: usize) -> (usize, usize) {
    let side = (d as f64).sqrt().round() as usize;
    if side * side == d {
        (side, side)
    } else {
        (1, d)
    }
}

pub fn run(args: &MnistArgs) -> Result<(), CliError> {
    let train_images = resolve(&args.images, &args.data_dir, TRAIN_IMAGES)?;
    let train_labels = resolve(&args.labels, &args.data_dir, TRAIN_LABELS)?;
    let test_images = resolve(&args.test_images, &args.data_dir, TEST_IMAGES)?;
    let test_labels = resolve(&args.test_labels, &args.data_dir, TEST_LABELS)?;
    let (la, lb) = (args.digit_a.as_str(), args.digit_b.as_str());
    let same = la == lb;

    // Selection: one seeded stream, class A first.
    let train = read_idx_filtered(&train_images, &train_labels, |l| l == la || l == lb)?;
    let mut rng = SplitMix64::new(args.seed);
    let (ia, ib) = if same {
        let mut parts = select_disjoint(&train, la, &[args.p, args.q], &mut rng)?;
        let ib = parts.pop().expect("two parts");
        (parts.pop().expect("two parts"), ib)
    } else {
        (
            select_indices(&train, la, args.p, &mut rng)?,
            select_indices(&train, lb, args.q, &mut rng)?,
        )
    };
    let raw_a = train.features().select_columns(&ia)?;
    let raw_b = train.features().select_columns(&ib)?;
    drop(train);

    let (a, b, test_mean) = match args.center {
        Centering::Shared => {
            let mean = column_mean(&raw_a.hstack(&raw_b)?);
            (subtract_mean(&raw_a, &mean)?, subtract_mean(&raw_b, &mean)?, mean)
        }
        Centering::PerClass => {
            let (ma, mb) = (column_mean(&raw_a), column_mean(&raw_b));
            let avg: Vec<f64> = ma.iter().zip(&mb).map(|(x, y)| 0.5 * (x + y)).collect();
            (subtract_mean(&raw_a, &ma)?, subtract_mean(&raw_b, &mb)?, avg)
        }
    };
    drop((raw_a, raw_b));

    let model = ClassifierModel::fit(&a, &b, args.tau, args.trunc_tol)?
        .with_labels(la, lb)
        .with_center(Some(test_mean.clone()));
    drop((a, b));
    let f = model.factors();
    let (r, k, t) = f.blocks();

    let test = read_idx_filtered(&test_images, &test_labels, |l| l == la || l == lb)?
        .centered_with(&test_mean)?;
    let preds = model.predict_columns(test.features())?;

    // Per-class scores. A same-digit run splits the test images alternately.
    let mut side_a: Vec<AlignmentScore> = Vec::new();
    let mut side_b: Vec<AlignmentScore> = Vec::new();
    for (i, (label, p)) in test.labels().iter().zip(&preds).enumerate() {
        let to_a = if same { i % 2 == 0 } else { label == la };
        if to_a {
            side_a.push(p.score);
        } else {
            side_b.push(p.score);
        }
    }
    let defined = |s: &[AlignmentScore]| -> Vec<f64> {
        s.iter().filter(|x| x.is_defined()).map(|x| x.theta).collect()
    };
    let (theta_a, theta_b) = (defined(&side_a), defined(&side_b));
    let hist_a = infogeo::histogram(&theta_a, args.bins)?;
    let hist_b = infogeo::histogram(&theta_b, args.bins)?;
    let prior_a = args
        .prior_a
        .unwrap_or(side_a.len() as f64 / (side_a.len() + side_b.len()) as f64);
    let posterior = infogeo::bin_posteriors(&hist_a, &hist_b, prior_a)?;

    let separation = Separation {
        digit_a: la,
        digit_b: lb,
        seed: args.seed,
        p: args.p,
        q: args.q,
        bins: args.bins,
        centering: match args.center {
            Centering::Shared => "shared",
            Centering::PerClass => "per-class",
        },
        rank: f.rank(),
        r,
        k,
        t,
        test_a: side_a.len(),
        test_b: side_b.len(),
        binned_a: theta_a.len(),
        binned_b: theta_b.len(),
        prior_a,
        bhattacharyya: infogeo::bhattacharyya(&hist_a, &hist_b)?,
        fisher_rao: infogeo::fisher_rao(&hist_a, &hist_b)?,
        hellinger_sq: infogeo::hellinger_sq(&hist_a, &hist_b)?,
        fisher_rao_posterior: infogeo::fr_via_posterior(&posterior),
    };

    let metrics = model.metrics(test.labels(), &preds)?;
    let pruned = match args.prune_band {
        Some(band) => {
            let pm = model.prune_shared_directions(band)?;
            Some(PrunedReport {
                band,
                pruned: pm.pruned_indices().len(),
                metrics: pm.evaluate(&test)?,
            })
        }
        None => None,
    };
    let report = ClassifierReport {
        tau: model.tau(),
        label_a: la.to_string(),
        label_b: lb.to_string(),
        metrics,
        pruned,
    };

    let out = &args.outdir;
    fs::create_dir_all(out)?;
    let mut file = fs::File::create(out.join("histogram.csv"))?;
    tables::write_class_histograms(&hist_a, &hist_b, &posterior, &mut file)?;
    tables::write_histogram_csv(&hist_a, out.join("hist_a.csv"))?;
    tables::write_histogram_csv(&hist_b, out.join("hist_b.csv"))?;
    tables::write_scores_csv(&side_a, out.join("scores_a.csv"))?;
    tables::write_scores_csv(&side_b, out.join("scores_b.csv"))?;
    json::write_json_pretty(&separation, out.join("fisher_rao.json"))?;
    json::write_json_pretty(&report, out.join("metrics.json"))?;

    if k > 0 {
        let (rows, cols) = image_shape(f.d());
        let (lo, hi) = extremes::extreme_directions(f)?;
        let mid = extremes::shared_direction(f, k.div_ceil(2))?;
        pgm::write_pgm(&lo.z, rows, cols, out.join("extreme_min.pgm"))?;
        pgm::write_pgm(&mid.z, rows, cols, out.join("extreme_mid.pgm"))?;
        pgm::write_pgm(&hi.z, rows, cols, out.join("extreme_max.pgm"))?;
        let angles: Vec<ExtremeReport> = [&lo, &mid, &hi].into_iter().map(ExtremeReport::from).collect();
        json::write_json_pretty(&angles, out.join("extremes.json"))?;
    } else {
        eprintln!("warning: no shared block, extreme directions skipped");
    }
    if args.save_model {
        json::write_json(&model, out.join("model.json"))?;
    }

    println!("pair=({la},{lb}) seed={} rank={} r={r} k={k} t={t}", args.seed, f.rank());
    for (name, th) in [(la, &theta_a), (lb, &theta_b)] {
        if !th.is_empty() {
            let mean = th.iter().sum::<f64>() / th.len() as f64;
            println!("mean_theta[{name}]={mean:.6} rad ({:.3} deg)", mean.to_degrees());
        }
    }
    println!(
        "fisher_rao={:.6} bhattacharyya={:.6} accuracy={:.4}",
        separation.fisher_rao, separation.bhattacharyya, report.metrics.accuracy
    );
    if let Some(p) = &report.pruned {
        println!("pruned={} accuracy_pruned={:.4}", p.pruned, p.metrics.accuracy);
    }
    let flagged = preds.iter().filter(|p| p.score.non_relational).count();
    check_flagged(flagged, preds.len(), args.allow_non_relational)
}
