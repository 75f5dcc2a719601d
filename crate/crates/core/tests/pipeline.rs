//! End-to-end behaviour on generated data.

use kreg::datagen::{add_outliers, generate_ideal, IdealSpec};
use kreg::dataset::Dataset;
use kreg::kmeans::{purity, sweep_algorithm1, sweep_algorithm2};
use kreg::preprocess::{dct_features, density_cull, moment_features, two_texture_image, DEFAULT_CULL_NEIGHBORS};
use kreg::regularization::{estimate, estimate_k_additive, local_minima};
use kreg::{EstimateConfig, SweepAlgorithm, Verdict};

fn scaled(data: &Dataset<f64>, s: f64) -> Dataset<f64> {
    Dataset::new(data.dim(), data.coords().iter().map(|x| x * s).collect()).unwrap()
}

#[test]
fn candidate_set_is_scale_invariant() {
    let data = generate_ideal::<f64>(&IdealSpec::new(2, 6, 60, 4)).unwrap();
    for alg in [SweepAlgorithm::Alg1, SweepAlgorithm::Alg2] {
        let base = estimate_k_additive(&data, 15, alg).unwrap();
        // powers of two scale every float exactly
        for s in [2.0, 0.5] {
            let other = estimate_k_additive(&scaled(&data, s), 15, alg).unwrap();
            assert_eq!(base.candidates, other.candidates, "{} at scale {s}", alg.name());
        }
    }
}

#[test]
fn ideal_sweeps_split_and_decrease_as_expected() {
    for seed in 0..10 {
        let spec = IdealSpec::new(2, 5, 200, seed);
        let k = spec.clusters;
        let data = generate_ideal::<f64>(&spec).unwrap();
        let truth = data.true_labels().unwrap();
        let centers = data.true_centroids().unwrap().to_vec();
        for sweep in [sweep_algorithm1(&data, k + 2, 500).unwrap(), sweep_algorithm2(&data, k + 2, 500).unwrap()] {
            let at_k = &sweep[k - 1];
            assert_eq!(purity(&at_k.labels, truth), 1.0, "seed {seed}");
            for c in &at_k.centroids {
                let nearest = centers
                    .iter()
                    .map(|t| kreg::scalar::squared_distance(c, t).sqrt())
                    .fold(f64::INFINITY, f64::min);
                assert!(nearest < 0.15, "seed {seed}: centroid {nearest} from truth");
            }
            let errors: Vec<f64> = sweep.iter().map(|a| a.error).collect();
            assert!(errors.windows(2).all(|w| w[1] < w[0]), "seed {seed}: {errors:?}");
        }
    }
}

#[test]
fn seed_after_true_count_splits_one_cluster_in_halves() {
    let trials = 20;
    let mut balanced = 0;
    for seed in 0..trials {
        let spec = IdealSpec::new(2, 5, 200, seed);
        let data = generate_ideal::<f64>(&spec).unwrap();
        let a = &sweep_algorithm1(&data, 6, 500).unwrap()[5];
        let mut counts = a.counts.clone();
        counts.sort_unstable();
        // four intact clusters, one shared by the two smallest
        assert_eq!(&counts[2..], &[200; 4], "seed {seed}: {counts:?}");
        assert_eq!(counts[0] + counts[1], 200, "seed {seed}: {counts:?}");
        // each part within 10% of an exact half
        if counts[0] >= 90 {
            balanced += 1;
        }
    }
    // Lloyd stops at the first diameter split it reaches; with 200 sampled
    // points most, not all, land within 10% of an even split
    assert!(balanced * 4 >= trials as usize * 3, "{balanced}/{trials} balanced splits");
}

#[test]
fn culling_outliers_restores_the_consensus() {
    let spec = IdealSpec::new(2, 10, 100, 6);
    let clean = generate_ideal::<f64>(&spec).unwrap();
    let outliers = 60;
    let noisy = add_outliers(&clean, outliers, 99);
    let config = EstimateConfig::new(20, SweepAlgorithm::Alg1);
    let before = estimate(&noisy, config).unwrap();
    let culled = density_cull(&noisy, DEFAULT_CULL_NEIGHBORS, outliers as f64 / noisy.len() as f64).unwrap();
    let after = estimate(&culled, config).unwrap();
    assert_ne!(before.report.verdict, Verdict::Unique(10), "outliers should disturb the estimate");
    assert_eq!(after.report.verdict, Verdict::Unique(10));
}

#[test]
fn two_texture_image_gives_two_clusters() {
    let img = two_texture_image(256, 128, 5).unwrap();
    for alg in [SweepAlgorithm::Alg1, SweepAlgorithm::Alg2] {
        let feats = dct_features::<f64>(&img, 2000, 8, 9, 17).unwrap();
        let culled = density_cull(&feats, DEFAULT_CULL_NEIGHBORS, 0.15).unwrap();
        let est = estimate(&culled, EstimateConfig::new(12, alg)).unwrap();
        assert_eq!(est.report.verdict, Verdict::Unique(2), "dct {}: {:?}", alg.name(), est.report);

        // the two moment clusters also split symmetrically, so k = 2 is
        // agreed on but not alone
        let feats = moment_features::<f64>(&img, 2000, 9, 17).unwrap();
        let culled = density_cull(&feats, DEFAULT_CULL_NEIGHBORS, 0.15).unwrap();
        let est = estimate(&culled, EstimateConfig::new(12, alg)).unwrap();
        assert!(est.report.consensus.contains(&2), "moments {}: {:?}", alg.name(), est.report);
        assert!(local_minima(&est.multiplicative, 1).unwrap().contains(&2));
    }
}
