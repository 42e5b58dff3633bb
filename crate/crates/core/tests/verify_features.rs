use proptest::prelude::*;
use scriptrace::features::{Family, FeatureVector};
use scriptrace::io::{export_features, ingest_features, IngestOptions};
use scriptrace::verify::{chi_square, distance, euclidean, far_frr_curve, hausdorff, minkowski, DistanceMeasure};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 200,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn histogram_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..40).prop_flat_map(|n| {
        let cell = prop_oneof![Just(0.0), 0.0..10.0f64];
        (prop::collection::vec(cell.clone(), n), prop::collection::vec(cell, n))
    })
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn chi_square_is_a_symmetric_divergence((a, b) in histogram_pair()) {
        let d = chi_square(&a, &b).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!((d - chi_square(&b, &a).unwrap()).abs() <= 1e-12 * d.max(1.0));
        prop_assert_eq!(chi_square(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn minkowski_two_is_euclidean((a, b) in histogram_pair()) {
        let m = minkowski(&a, &b, 2).unwrap();
        prop_assert!((m - euclidean(&a, &b).unwrap()).abs() <= 1e-9 * m.max(1.0));
    }

    #[test]
    fn minkowski_orders_are_non_increasing((a, b) in histogram_pair()) {
        let d: Vec<f64> = (1..=5).map(|p| minkowski(&a, &b, p).unwrap()).collect();
        for w in d.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn hausdorff_is_symmetric((a, b) in histogram_pair()) {
        prop_assert_eq!(hausdorff(&a, &b).unwrap(), hausdorff(&b, &a).unwrap());
        prop_assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn eer_lies_in_unit_interval(
        same in prop::collection::vec(0.0..5.0f64, 1..60),
        diff in prop::collection::vec(0.0..5.0f64, 1..60),
    ) {
        let c = far_frr_curve(&diff, &same).unwrap();
        prop_assert!((0.0..=1.0).contains(&c.eer));
        prop_assert!(c.far.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(c.frr.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(((1.0 - c.eer) * 100.0 - c.accuracy_pct).abs() < 1e-9);
    }
}

#[test]
fn chi_square_hand_example() {
    assert_eq!(chi_square(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
}

#[test]
fn measures_parse_by_name() {
    for (name, m) in [
        ("minkowski3", DistanceMeasure::Minkowski(3)),
        ("chi-square", DistanceMeasure::ChiSquare),
        ("bhattacharyya", DistanceMeasure::Bhattacharyya),
        ("hausdorff", DistanceMeasure::Hausdorff),
    ] {
        assert_eq!(name.parse::<DistanceMeasure>().unwrap(), m);
        assert_eq!(m.to_string(), name);
    }
    assert!("minkowski6".parse::<DistanceMeasure>().is_err());
    assert!(distance(&[1.0], &[1.0, 2.0], DistanceMeasure::ChiSquare).is_err());
}

#[test]
fn feature_file_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("features.jsonl");
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 * 1e3 - 500.0
    };
    let vectors: Vec<FeatureVector> = (0..3)
        .map(|i| FeatureVector {
            sample_id: format!("s{i}"),
            patch_id: format!("{i:03}"),
            family: Family::Ingested,
            values: (0..1024).map(|_| next()).collect(),
            center: Some((i as f64, 2.5)),
        })
        .collect();
    export_features(&path, &vectors).unwrap();
    let back = ingest_features(&path, &IngestOptions::default()).unwrap();
    assert_eq!(back.len(), 3);
    for (a, b) in vectors.iter().zip(&back) {
        assert_eq!(a.sample_id, b.sample_id);
        assert_eq!(a.center, b.center);
        let worst = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-12, "round trip drifted by {worst}");
    }
}
