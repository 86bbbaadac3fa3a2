//! Randomized invariants across the public API.

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use gsvd_align::alignment::{alignment_angle, AlignmentOptions, Scorer};
use gsvd_align::classifier::ClassifierModel;
use gsvd_align::dataio::{column_mean, select_indices, subtract_mean, tables, LabeledDataset, Provenance};
use gsvd_align::extremes::{extreme_directions, shared_direction_angles};
use gsvd_align::gsvd::{gsvd, DEFAULT_RANK_TOL};
use gsvd_align::infogeo::{self, AngleHistogram};
use gsvd_align::matrix::{self, DenseMatrix, TRUNCATION_TOL};
use gsvd_align::procrustes::{orthogonal_procrustes, procrustes_residual, relative_procrustes, shared_mask};
use gsvd_align::rng::SplitMix64;
use proptest::prelude::*;

use common::{planted, rel_err, scaled_vec, vector_angle};

fn histogram_from(raw: &[f64]) -> AngleHistogram {
    let total: f64 = raw.iter().sum();
    let masses = raw.iter().map(|m| m / total).collect();
    AngleHistogram::from_parts(infogeo::uniform_edges(raw.len()), masses, 100).unwrap()
}

fn mass_vector(bins: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.001f64..1.0], bins)
        .prop_filter("needs some mass", |v| v.iter().any(|m| *m > 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn svd_reconstructs_up_to_200(seed in any::<u64>(), rows in 1usize..=200, cols in 1usize..=200) {
        let m = SplitMix64::new(seed).gaussian_matrix(rows, cols);
        let f = matrix::svd(&m).unwrap();
        prop_assert!(rel_err(&f.reconstruct().unwrap(), &m) <= 1e-11);
        prop_assert!(f.singulars.windows(2).all(|w| w[0] >= w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn min_norm_solution_is_shortest(seed in any::<u64>(), rows in 2usize..20, rank in 1usize..6, extra in 1usize..6) {
        let mut rng = SplitMix64::new(seed);
        let rank = rank.min(rows);
        let cols = rank + extra;
        let m = rng.gaussian_matrix(rows, rank).matmul(&rng.gaussian_matrix(rank, cols)).unwrap();
        let z: Vec<f64> = (0..rows).map(|_| rng.next_gaussian()).collect();
        let x = matrix::min_norm_solve(&m, &z).unwrap();
        let xn = matrix::norm2(&x);

        let f = matrix::svd(&m).unwrap();
        let r = f.rank(1e-10);
        let row_space = f.right.select_columns(&(0..r).collect::<Vec<_>>()).unwrap();
        let full = matrix::complete_orthonormal(&row_space).unwrap();
        for j in r..cols {
            let t = rng.next_gaussian();
            let shifted: Vec<f64> = x.iter().zip(full.column(j)).map(|(a, n)| a + t * n).collect();
            // Same residual, never shorter.
            prop_assert!(matrix::norm2(&shifted) >= xn - 1e-12);
        }
    }

    #[test]
    fn truncated_inverse_twice_restores(diag in prop::collection::vec(prop_oneof![Just(0.0), 1e-16f64..1e3], 1..12), tol in 1e-14f64..1e-2) {
        let once = matrix::truncated_pinv_diag(&diag, tol).unwrap();
        let twice = matrix::truncated_pinv_diag(&once, tol).unwrap();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        for (d, back) in diag.iter().zip(&twice) {
            if *d > tol * max {
                prop_assert!((back - d).abs() <= 1e-12 * d);
            } else {
                prop_assert_eq!(*back, 0.0);
            }
        }
    }

    #[test]
    fn gsvd_constraint_and_round_trip(seed in any::<u64>(), d in 1usize..40, p in 1usize..30, q in 1usize..30) {
        let mut rng = SplitMix64::new(seed);
        let a = rng.gaussian_matrix(d, p);
        let b = rng.gaussian_matrix(d, q);
        let f = gsvd(&a, &b, DEFAULT_RANK_TOL).unwrap();
        for (c, s) in f.c_diag().iter().zip(f.s_diag()) {
            prop_assert!((c * c + s * s - 1.0).abs() <= 1e-10);
        }
        let (ra, rb) = f.reconstruct().unwrap();
        prop_assert!(rel_err(&ra, &a) <= 1e-9 && rel_err(&rb, &b) <= 1e-9);
    }

    #[test]
    fn co_span_parameterization(seed in any::<u64>(), d in 15usize..30, k in 1usize..5, ra in 0usize..4, rb in 0usize..4, extra in 0usize..4) {
        let mut rng = SplitMix64::new(seed);
        let inst = planted(&mut rng, d, k, ra, rb, extra);
        let f = gsvd(&inst.a, &inst.b, DEFAULT_RANK_TOL).unwrap();
        let (r, kk, _) = f.blocks();
        prop_assert_eq!(kk, k);
        let w = rng.unit_vector(kk);
        let mut x = vec![0.0; f.p()];
        let mut y = vec![0.0; f.q()];
        for (i, wi) in w.iter().enumerate() {
            let j = r + i;
            for (xl, u) in x.iter_mut().zip(f.u().row(f.u_row_for(j).unwrap())) {
                *xl += f.s_diag()[j] * wi * u;
            }
            for (yl, v) in y.iter_mut().zip(f.v().row(f.v_row_for(j).unwrap())) {
                *yl += f.c_diag()[j] * wi * v;
            }
        }
        let ax = inst.a.mul_vec(&x).unwrap();
        let by = inst.b.mul_vec(&y).unwrap();
        let gap: Vec<f64> = ax.iter().zip(&by).map(|(p, q)| p - q).collect();
        prop_assert!(matrix::norm2(&gap) <= 1e-9 * inst.a.frobenius_norm() * matrix::norm2(&x));

        let sv = matrix::svd(&inst.a).unwrap();
        let rank = sv.rank(DEFAULT_RANK_TOL);
        let full = matrix::complete_orthonormal(&sv.right.select_columns(&(0..rank).collect::<Vec<_>>()).unwrap()).unwrap();
        for j in rank..f.p() {
            prop_assert!(matrix::dot(&x, full.column(j)).abs() <= 1e-9);
        }
    }

    #[test]
    fn scaling_one_side_keeps_blocks(seed in any::<u64>(), alpha in 0.05f64..20.0, k in 1usize..4, ra in 0usize..3, rb in 0usize..3) {
        let mut rng = SplitMix64::new(seed);
        let inst = planted(&mut rng, 20, k, ra, rb, 0);
        let f = gsvd(&inst.a, &inst.b, DEFAULT_RANK_TOL).unwrap();
        let g = gsvd(&inst.a.scaled(alpha).unwrap(), &inst.b, DEFAULT_RANK_TOL).unwrap();
        prop_assert_eq!(f.blocks(), g.blocks());
    }

    #[test]
    fn angle_ignores_sample_scale(seed in any::<u64>(), pow in -20i32..20, negate in any::<bool>(), alpha in 1e-3f64..1e3) {
        let mut rng = SplitMix64::new(seed);
        let inst = planted(&mut rng, 16, 3, 2, 2, 1);
        let f = gsvd(&inst.a, &inst.b, DEFAULT_RANK_TOL).unwrap();
        let scorer = Scorer::new(&f, AlignmentOptions::default()).unwrap();
        let z: Vec<f64> = (0..16).map(|_| rng.next_gaussian()).collect();
        let base = scorer.score(&z).unwrap().theta;
        let exact = 2f64.powi(pow) * if negate { -1.0 } else { 1.0 };
        prop_assert_eq!(scorer.score(&scaled_vec(&z, exact)).unwrap().theta, base);
        prop_assert!((scorer.score(&scaled_vec(&z, alpha)).unwrap().theta - base).abs() <= 1e-13);
    }

    #[test]
    fn swapping_the_pair_reflects_the_angle(seed in any::<u64>(), k in 1usize..5, ra in 0usize..4, rb in 0usize..4) {
        let mut rng = SplitMix64::new(seed);
        let inst = planted(&mut rng, 24, k, ra, rb, 0);
        let z = inst.shared.mul_vec(&rng.unit_vector(k)).unwrap();
        let ab = gsvd(&inst.a, &inst.b, DEFAULT_RANK_TOL).unwrap();
        let ba = gsvd(&inst.b, &inst.a, DEFAULT_RANK_TOL).unwrap();
        let t1 = alignment_angle(&ab, &z, TRUNCATION_TOL).unwrap().theta;
        let t2 = alignment_angle(&ba, &z, TRUNCATION_TOL).unwrap().theta;
        prop_assert!((t1 + t2 - FRAC_PI_2).abs() <= 1e-8);
    }

    #[test]
    fn scaled_identity_pair_is_constant(beta in 1e-3f64..1e3, n in 1usize..6, seed in any::<u64>()) {
        let eye = DenseMatrix::identity(n);
        let f = gsvd(&eye, &eye.scaled(beta).unwrap(), DEFAULT_RANK_TOL).unwrap();
        let mut rng = SplitMix64::new(seed);
        let z: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
        let th = alignment_angle(&f, &z, TRUNCATION_TOL).unwrap().theta;
        prop_assert!((th - beta.atan()).abs() <= 1e-12);
    }

    #[test]
    fn extremes_dominate_and_are_feasible(seed in any::<u64>(), k in 2usize..6, ra in 1usize..4, rb in 1usize..4) {
        let mut rng = SplitMix64::new(seed);
        let inst = planted(&mut rng, 24, k, ra, rb, 0);
        let f = gsvd(&inst.a, &inst.b, DEFAULT_RANK_TOL).unwrap();
        let (r, kk, _) = f.blocks();
        let (lo, hi) = extreme_directions(&f).unwrap();
        let scorer = Scorer::new(&f, AlignmentOptions::default()).unwrap();
        for _ in 0..500 {
            let w = rng.unit_vector(kk);
            let mut z = vec![0.0; f.d()];
            for (i, wi) in w.iter().enumerate() {
                for (zl, h) in z.iter_mut().zip(f.h().column(r + i)) {
                    *zl += wi * h;
                }
            }
            let th = scorer.score(&z).unwrap().theta;
            prop_assert!(th >= lo.theta - 1e-9 && th <= hi.theta + 1e-9);
        }
        for e in [&lo, &hi] {
            let ax = inst.a.mul_vec(&e.x_coeff).unwrap();
            let by = inst.b.mul_vec(&e.y_coeff).unwrap();
            prop_assert!(vector_angle(&ax, &by) <= 1e-8);
        }
        let expected = (f.s_tilde()[kk - 1] / f.c_tilde()[kk - 1]).atan();
        prop_assert!((alignment_angle(&f, &hi.z, TRUNCATION_TOL).unwrap().theta - expected).abs() <= 1e-9);
        let angles: Vec<f64> = shared_direction_angles(&f).into_iter().map(|(_, t)| t).collect();
        prop_assert!(angles.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn classifier_ignores_training_scale(seed in any::<u64>(), alpha in 0.01f64..100.0) {
        let mut rng = SplitMix64::new(seed);
        let inst = planted(&mut rng, 20, 3, 3, 3, 0);
        let m1 = ClassifierModel::fit(&inst.a, &inst.b, FRAC_PI_4, TRUNCATION_TOL).unwrap();
        let m2 = ClassifierModel::fit(&inst.a.scaled(alpha).unwrap(), &inst.b.scaled(alpha).unwrap(), FRAC_PI_4, TRUNCATION_TOL).unwrap();
        let zs = inst.shared.matmul(&rng.gaussian_matrix(3, 30)).unwrap();
        let p1 = m1.predict_columns(&zs).unwrap();
        let p2 = m2.predict_columns(&zs).unwrap();
        for (x, y) in p1.iter().zip(&p2) {
            prop_assert!((x.score.theta - y.score.theta).abs() <= 1e-9);
            if (x.score.theta - FRAC_PI_4).abs() > 1e-8 {
                prop_assert_eq!(x.decision, y.decision);
            }
        }
    }

    #[test]
    fn classifier_swap_symmetry(seed in any::<u64>(), tau in 0.1f64..1.4) {
        let mut rng = SplitMix64::new(seed);
        let inst = planted(&mut rng, 20, 3, 3, 3, 0);
        let m1 = ClassifierModel::fit(&inst.a, &inst.b, tau, TRUNCATION_TOL).unwrap().with_labels("a", "b");
        let m2 = ClassifierModel::fit(&inst.b, &inst.a, FRAC_PI_2 - tau, TRUNCATION_TOL).unwrap().with_labels("b", "a");
        let zs = inst.shared.matmul(&rng.gaussian_matrix(3, 30)).unwrap();
        let p1 = m1.predict_columns(&zs).unwrap();
        let p2 = m2.predict_columns(&zs).unwrap();
        for (x, y) in p1.iter().zip(&p2) {
            if (x.score.theta - tau).abs() > 1e-8 {
                prop_assert_eq!(m1.label_of(x.decision), m2.label_of(y.decision));
            }
        }
    }

    #[test]
    fn pruning_grows_with_band(seed in any::<u64>(), b1 in 0.0f64..0.99, b2 in 0.0f64..0.99) {
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let mut rng = SplitMix64::new(seed);
        let inst = planted(&mut rng, 20, 5, 2, 2, 0);
        let m = ClassifierModel::fit(&inst.a, &inst.b, FRAC_PI_4, TRUNCATION_TOL).unwrap();
        let small = m.prune_shared_directions(lo).unwrap();
        let large = m.prune_shared_directions(hi).unwrap();
        prop_assert!(small.pruned_indices().iter().all(|i| large.pruned_indices().contains(i)));
    }

    #[test]
    fn histogram_distances(p in mass_vector(12), q in mass_vector(12), prior in 0.01f64..0.99) {
        let (hp, hq) = (histogram_from(&p), histogram_from(&q));
        let fr = infogeo::fisher_rao(&hp, &hq).unwrap();
        prop_assert_eq!(fr.to_bits(), infogeo::fisher_rao(&hq, &hp).unwrap().to_bits());
        prop_assert!((0.0..=std::f64::consts::PI).contains(&fr));
        let bc = infogeo::bhattacharyya(&hp, &hq).unwrap();
        prop_assert!((0.0..=1.0).contains(&bc));
        let h2 = infogeo::hellinger_sq(&hp, &hq).unwrap();
        prop_assert!((0.0..=1.0).contains(&h2));
        prop_assert!((infogeo::fr_from_hellinger(h2).unwrap() - fr).abs() <= 1e-12);
        let via = infogeo::fr_via_posterior(&infogeo::bin_posteriors(&hp, &hq, prior).unwrap());
        prop_assert!((via - fr).abs() <= 1e-12);
        prop_assert_eq!(infogeo::fisher_rao(&hp, &hp).unwrap(), 0.0);
        if hp.masses() != hq.masses() {
            prop_assert!(fr > 0.0);
        }
    }

    #[test]
    fn per_sample_distance(t1 in 0.0f64..=FRAC_PI_2, t2 in 0.0f64..=FRAC_PI_2) {
        prop_assume!((t1 - t2).abs() > 1e-3);
        let oracle = 2.0 * (t1 - t2).cos().acos();
        prop_assert!((infogeo::per_sample_fr(t1, t2) - oracle).abs() <= 1e-12);
    }

    #[test]
    fn procrustes_is_optimal(seed in any::<u64>(), n in 2usize..7, eps in 1e-4f64..0.5) {
        let mut rng = SplitMix64::new(seed);
        let x = rng.gaussian_matrix(n, 3 * n);
        let y = rng.gaussian_matrix(n, 3 * n);
        let r = orthogonal_procrustes(&x, &y).unwrap();
        let best = procrustes_residual(&r, &x, &y).unwrap();
        for _ in 0..10 {
            let jitter = DenseMatrix::identity(n).sub(&rng.gaussian_matrix(n, n).scaled(-eps).unwrap()).unwrap();
            let nudge = matrix::qr(&jitter).unwrap().q;
            let other = r.matmul(&nudge).unwrap();
            prop_assert!(procrustes_residual(&other, &x, &y).unwrap() >= best - 1e-9);
        }
    }

    #[test]
    fn relative_procrustes_is_optimal(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let inst = planted(&mut rng, 14, 4, 2, 2, 0);
        let f = gsvd(&inst.a, &inst.b, DEFAULT_RANK_TOL).unwrap();
        let x = rng.gaussian_matrix(14, 20);
        let y = rng.gaussian_matrix(14, 20);
        let fit = relative_procrustes(&f, &x, &y, 0.05).unwrap();
        let best = fit.residual_after().unwrap();
        for _ in 0..10 {
            let other = rng.orthogonal_matrix(f.rank());
            prop_assert!(procrustes_residual(&other, &fit.x_shared, &fit.y_shared).unwrap() >= best - 1e-9);
        }
    }

    #[test]
    fn masks_shrink_with_threshold(seed in any::<u64>(), t1 in 0.0f64..0.8, t2 in 0.0f64..0.8) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let mut rng = SplitMix64::new(seed);
        let inst = planted(&mut rng, 16, 4, 3, 3, 0);
        let f = gsvd(&inst.a, &inst.b, DEFAULT_RANK_TOL).unwrap();
        let wide = shared_mask(&f, lo).unwrap().indices;
        let narrow = shared_mask(&f, hi).unwrap().indices;
        prop_assert!(narrow.iter().all(|i| wide.contains(i)));
    }

    #[test]
    fn procrustes_commutes_with_right_rotation(seed in any::<u64>(), n in 2usize..6) {
        let mut rng = SplitMix64::new(seed);
        let m = 2 * n + 2;
        let x = rng.gaussian_matrix(n, m);
        let y = rng.gaussian_matrix(n, m);
        let q = rng.orthogonal_matrix(m);
        let r1 = orthogonal_procrustes(&x, &y).unwrap();
        let r2 = orthogonal_procrustes(&x.matmul(&q).unwrap(), &y.matmul(&q).unwrap()).unwrap();
        prop_assert!(r1.sub(&r2).unwrap().frobenius_norm() <= 1e-9);
    }

    #[test]
    fn matrix_csv_round_trip_is_bitwise(seed in any::<u64>(), rows in 1usize..30, cols in 1usize..20, scale in -300i32..300) {
        let m = SplitMix64::new(seed).gaussian_matrix(rows, cols).scaled(10f64.powi(scale / 10)).unwrap();
        let mut buf = Vec::new();
        tables::write_matrix(&m, &mut buf).unwrap();
        let back = tables::read_matrix(buf.as_slice()).unwrap();
        prop_assert_eq!(back.shape(), m.shape());
        prop_assert!(back.as_slice().iter().zip(m.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn selection_is_reproducible(seed in any::<u64>(), count in 0usize..20) {
        let labels: Vec<String> = (0..40).map(|i| (i % 3).to_string()).collect();
        let ds = LabeledDataset::new(DenseMatrix::zeros(2, 40), labels, Provenance::default()).unwrap();
        let first = select_indices(&ds, "1", count.min(13), &mut SplitMix64::new(seed)).unwrap();
        let second = select_indices(&ds, "1", count.min(13), &mut SplitMix64::new(seed)).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert!(first.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(first.iter().all(|&i| ds.labels()[i] == "1"));
    }

    #[test]
    fn centering_is_idempotent(seed in any::<u64>(), rows in 1usize..10, cols in 1usize..30) {
        let m = SplitMix64::new(seed).gaussian_matrix(rows, cols);
        let centered = subtract_mean(&m, &column_mean(&m)).unwrap();
        prop_assert!(column_mean(&centered).iter().all(|v| v.abs() <= 1e-12));
        let again = subtract_mean(&centered, &column_mean(&centered)).unwrap();
        prop_assert!(again.sub(&centered).unwrap().frobenius_norm() <= 1e-12 * (1.0 + centered.frobenius_norm()));
    }
}
