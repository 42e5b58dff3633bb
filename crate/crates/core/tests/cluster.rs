use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scriptrace::cluster::{
    agglomerative_average, cluster_vectors, kmeans, majority_group_pages, nmi, speed_label, ClusterMethod,
    SpeedThresholds, Style,
};

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Average linkage from scratch: every step recomputes all cluster-pair
/// averages over member pairs.
fn agglomerative_oracle(points: &[Vec<f64>], k: usize) -> Vec<(usize, usize, f64)> {
    let mut clusters: Vec<Option<Vec<usize>>> = (0..points.len()).map(|i| Some(vec![i])).collect();
    let mut merges = Vec::new();
    while clusters.iter().flatten().count() > k {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let (Some(ca), Some(cb)) = (&clusters[a], &clusters[b]) else {
                    continue;
                };
                let mut total = 0.0;
                for &i in ca {
                    for &j in cb {
                        total += euclid(&points[i], &points[j]);
                    }
                }
                let d = total / (ca.len() * cb.len()) as f64;
                if best.map_or(true, |(_, _, bd)| d < bd) {
                    best = Some((a, b, d));
                }
            }
        }
        let (a, b, d) = best.unwrap();
        let moved = clusters[b].take().unwrap();
        clusters[a].as_mut().unwrap().extend(moved);
        merges.push((a, b, d));
    }
    merges
}

#[test]
fn agglomerative_merges_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..5 {
        let points: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..3).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        let (labels, merges) = agglomerative_average(&points, 3).unwrap();
        let oracle = agglomerative_oracle(&points, 3);
        assert_eq!(merges.len(), oracle.len());
        for (m, (a, b, d)) in merges.iter().zip(&oracle) {
            assert_eq!((m.a, m.b), (*a, *b));
            assert!((m.distance - d).abs() <= 1e-9, "{} vs {d}", m.distance);
        }
        let distinct: std::collections::BTreeSet<_> = labels.iter().collect();
        assert_eq!(distinct.len(), 3);
    }
}

#[test]
fn separated_blobs_are_recovered_by_every_method() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut points = Vec::new();
    let mut truth = Vec::new();
    for (i, center) in [-10.0, 10.0].into_iter().enumerate() {
        for _ in 0..20 {
            points.push(vec![center + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            truth.push(i);
        }
    }
    let ids: Vec<String> = (0..points.len()).map(|i| format!("p{i}")).collect();
    for method in [
        ClusterMethod::Kmeans,
        ClusterMethod::MinibatchKmeans,
        ClusterMethod::FuzzyCMeans,
        ClusterMethod::Agglomerative,
    ] {
        let a = cluster_vectors(&ids, &points, 2, method, 9).unwrap();
        assert_eq!(nmi(&truth, &a.labels).unwrap(), 1.0, "{method:?}");
        let again = cluster_vectors(&ids, &points, 2, method, 9).unwrap();
        assert_eq!(a, again, "{method:?} is not deterministic");
    }
}

#[test]
fn identical_vectors_still_get_an_assignment() {
    let points = vec![vec![1.0, 1.0]; 6];
    let ids: Vec<String> = (0..6).map(|i| i.to_string()).collect();
    for method in [ClusterMethod::Kmeans, ClusterMethod::Agglomerative, ClusterMethod::FuzzyCMeans] {
        let a = cluster_vectors(&ids, &points, 2, method, 1).unwrap();
        assert_eq!(a.labels.len(), 6);
    }
    assert!(cluster_vectors(&ids, &points, 7, ClusterMethod::Kmeans, 1).is_err());
}

#[test]
fn random_labelings_carry_no_information() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let a: Vec<usize> = (0..1000).map(|_| rng.gen_range(0..3)).collect();
    let b: Vec<usize> = (0..1000).map(|_| rng.gen_range(0..3)).collect();
    let v = nmi(&a, &b).unwrap();
    assert!(v < 0.05, "NMI {v}");
}

#[test]
fn speed_labels_follow_thresholds() {
    let t = SpeedThresholds::new(100.0, 10.0, 2.0);
    assert_eq!((t.t1, t.t2), (120.0, 80.0));
    assert_eq!(speed_label(125.0, &t), Style::Fast);
    assert_eq!(speed_label(120.0, &t), Style::Medium);
    assert_eq!(speed_label(80.0, &t), Style::Medium);
    assert_eq!(speed_label(79.5, &t), Style::Slow);
}

#[test]
fn planted_majority_survives_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let planted: Vec<usize> = (0..100).map(|_| rng.gen_range(0..3)).collect();
    let plots: Vec<Vec<usize>> = (0..1000)
        .map(|_| {
            planted
                .iter()
                .map(|&c| if rng.gen_bool(0.7) { c } else { (c + rng.gen_range(1..3)) % 3 })
                .collect()
        })
        .collect();
    let groups = majority_group_pages(&plots);
    assert!(groups.iter().zip(&planted).all(|(g, &p)| *g == Some(p)));
    assert_eq!(majority_group_pages(&[vec![0], vec![1], vec![0], vec![1]]), vec![None]);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn nmi_is_symmetric_and_bounded(
        pairs in prop::collection::vec((0usize..4, 0usize..4), 1..200),
    ) {
        let (a, b): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let ab = nmi(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - nmi(&b, &a).unwrap()).abs() < 1e-12);
        let distinct: std::collections::BTreeSet<_> = a.iter().collect();
        if distinct.len() > 1 {
            prop_assert!((nmi(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kmeans_objective_never_grows_with_iterations(
        points in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 2), 6..40),
        seed in 0u64..1000,
    ) {
        let run = kmeans(&points, 3, seed, 50).unwrap();
        prop_assert!(!run.objective.is_empty());
        for w in run.objective.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn every_speed_gets_one_label(speed in 0.0..300.0f64, mu in 50.0..150.0f64, sigma in 0.0..30.0f64) {
        let t = SpeedThresholds::new(mu, sigma, 1.5);
        let label = speed_label(speed, &t);
        let expected = if speed > t.t1 { Style::Fast } else if speed < t.t2 { Style::Slow } else { Style::Medium };
        prop_assert_eq!(label, expected);
    }
}
