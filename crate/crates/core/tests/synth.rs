use kstar::{generate, EmbeddingSet, Layout, SynthSpec};

fn class_means(set: &EmbeddingSet) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; set.dim()]; set.num_classes()];
    let mut counts = vec![0usize; set.num_classes()];
    for i in 0..set.len() {
        let c = set.label(i);
        counts[c] += 1;
        for (s, x) in sums[c].iter_mut().zip(set.point(i)) {
            *s += x;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(s, n)| s.into_iter().map(|x| x / n as f64).collect())
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn clustered_centres_are_separation_apart() {
    for dim in [3, 16] {
        let set = generate(&SynthSpec {
            classes: 3,
            per_class: 4000,
            dim,
            layout: Layout::Clustered { separation: 10.0 },
            seed: 5,
        })
        .unwrap();
        let means = class_means(&set);
        for a in 0..3 {
            for b in a + 1..3 {
                let d = dist(&means[a], &means[b]);
                // Each centre estimate has standard error sqrt(dim / 4000).
                assert!((d - 10.0).abs() < 0.5, "dim {dim}: {a}-{b} at {d}");
            }
        }
    }
}

#[test]
fn clustered_falls_back_to_a_line_in_low_dimension() {
    let set = generate(&SynthSpec {
        classes: 4,
        per_class: 4000,
        dim: 2,
        layout: Layout::Clustered { separation: 6.0 },
        seed: 1,
    })
    .unwrap();
    let means = class_means(&set);
    for (c, m) in means.iter().enumerate() {
        assert!((m[0] - 6.0 * c as f64).abs() < 0.2, "{m:?}");
        assert!(m[1].abs() < 0.2);
    }
}

#[test]
fn fractured_shards_alternate_between_classes() {
    let set = generate(&SynthSpec {
        classes: 2,
        per_class: 8,
        dim: 1,
        layout: Layout::Fractured {
            shards: 2,
            interleave: true,
        },
        seed: 0,
    })
    .unwrap();
    assert_eq!(set.len(), 16);
    // With unit noise the per-class coordinate range spans at least two slots.
    let xs: Vec<f64> = (0..8).map(|i| set.point(i)[0]).collect();
    let spread =
        xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread > 1.0);
}

#[test]
fn overlapped_classes_share_a_ring() {
    let set = generate(&SynthSpec {
        classes: 2,
        per_class: 2000,
        dim: 2,
        layout: Layout::Overlapped { offset: 0.0 },
        seed: 2,
    })
    .unwrap();
    let radius = 2.0 * 4000.0 / std::f64::consts::TAU;
    let mean_r = (0..set.len())
        .map(|i| set.point(i)[0].hypot(set.point(i)[1]))
        .sum::<f64>()
        / set.len() as f64;
    assert!((mean_r - radius).abs() < 0.5, "{mean_r} vs {radius}");
    // Class 0 owns the upper half-plane, class 1 the lower.
    let above = (0..2000).filter(|&i| set.point(i)[1] > 0.0).count();
    assert!(above > 1900, "{above}");
}
