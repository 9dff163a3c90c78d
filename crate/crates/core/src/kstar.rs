//! Per-class k* distributions, their moments, and pattern classification.
//!
//! A class's k* distribution is the multiset `{k*_p / |S_c| : p in S_c}`;
//! repeated values are kept. Moments are population moments (divisor `|S|`):
//!
//! ```text
//! mu    = (1/|S|) sum v
//! sigma = sqrt((1/|S|) sum (v - mu)^2)
//! gamma = ((1/|S|) sum (v - mu)^3) / ((1/|S|) sum (v - mu)^2)^(3/2)
//! ```
//!
//! When `sigma <= SIGMA_EPSILON` the distribution is treated as constant:
//! `gamma = 0`, and the pattern follows the mean (see [`classify_pattern`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassIndex, EmbeddingSet, PredictionSet};
use crate::distance::Metric;
use crate::error::Result;
use crate::neighbors::heterogeneous_ranks;

/// Standard deviations at or below this are treated as zero.
pub const SIGMA_EPSILON: f64 = 1e-12;

/// `|gamma|` above this leaves the overlapped band.
pub const GAMMA_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct KStarResult {
    /// k* per sample, in input order.
    pub ranks: Vec<usize>,
    /// Per class, k* of each member in ascending member-index order.
    pub class_ranks: Vec<Vec<usize>>,
    /// Per class, `k* / |S_c|` for each member (same order as `class_ranks`).
    pub normalized: Vec<Vec<f64>>,
    pub metric: Metric,
}

impl KStarResult {
    pub fn num_classes(&self) -> usize {
        self.class_ranks.len()
    }

    pub fn class_size(&self, class: usize) -> usize {
        self.class_ranks[class].len()
    }
}

/// Runs the neighbour engine over every sample and groups the ranks by class.
pub fn compute_kstar(
    set: &EmbeddingSet,
    index: &ClassIndex,
    metric: Metric,
) -> Result<KStarResult> {
    let ranks = heterogeneous_ranks(set, index, metric)?;
    let class_ranks: Vec<Vec<usize>> = index
        .iter()
        .map(|members| members.iter().map(|&p| ranks[p]).collect())
        .collect();
    let normalized = class_ranks
        .iter()
        .map(|r| {
            let size = r.len() as f64;
            r.iter().map(|&k| k as f64 / size).collect()
        })
        .collect();
    Ok(KStarResult {
        ranks,
        class_ranks,
        normalized,
        metric,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    /// Pattern A: positively skewed, the class is split into sub-clusters.
    Fractured,
    /// Pattern B: near-uniform, the class interleaves with others.
    Overlapped,
    /// Pattern C: negatively skewed, one homogeneous cluster.
    Clustered,
}

impl Pattern {
    pub const ALL: [Pattern; 3] = [Pattern::Fractured, Pattern::Overlapped, Pattern::Clustered];

    pub fn glyph(self) -> char {
        match self {
            Pattern::Fractured => '★',
            Pattern::Overlapped => '♣',
            Pattern::Clustered => '♠',
        }
    }

    /// Palette colour used for this pattern in charts.
    pub fn color(self) -> &'static str {
        match self {
            Pattern::Fractured => "#d62728",
            Pattern::Overlapped => "#ff7f0e",
            Pattern::Clustered => "#1f77b4",
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pattern::Fractured => 'A',
            Pattern::Overlapped => 'B',
            Pattern::Clustered => 'C',
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pattern::Fractured => "Fractured",
            Pattern::Overlapped => "Overlapped",
            Pattern::Clustered => "Clustered",
        })
    }
}

impl FromStr for Pattern {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fractured" => Ok(Pattern::Fractured),
            "overlapped" => Ok(Pattern::Overlapped),
            "clustered" => Ok(Pattern::Clustered),
            other => Err(format!("unknown pattern {other:?}")),
        }
    }
}

/// `gamma > 0.5` is Fractured, `gamma < -0.5` Clustered, and the closed band
/// `[-0.5, 0.5]` Overlapped.
///
/// A constant distribution (`sigma <= SIGMA_EPSILON`) has no skew; it is
/// Clustered when its mean is at least 0.5 and Fractured otherwise.
pub fn classify_pattern(gamma: f64, sigma: f64, mu: f64) -> Pattern {
    if sigma <= SIGMA_EPSILON {
        return if mu >= 0.5 {
            Pattern::Clustered
        } else {
            Pattern::Fractured
        };
    }
    if gamma > GAMMA_THRESHOLD {
        Pattern::Fractured
    } else if gamma < -GAMMA_THRESHOLD {
        Pattern::Clustered
    } else {
        Pattern::Overlapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
}

/// Population mean, standard deviation and skewness (two passes).
///
/// Returns `gamma = 0` when `sigma <= SIGMA_EPSILON`. `values` must be
/// non-empty.
pub fn moments(values: &[f64]) -> Moments {
    assert!(!values.is_empty(), "moments of an empty distribution");
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for &v in values {
        let d = v - mu;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
    }
    m2 /= n;
    m3 /= n;
    let sigma = m2.sqrt();
    let gamma = if sigma <= SIGMA_EPSILON {
        0.0
    } else {
        m3 / m2.powf(1.5)
    };
    Moments { mu, sigma, gamma }
}

/// One row of a per-class table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class_id: usize,
    pub n_samples: usize,
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub pattern: Pattern,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

pub fn class_statistics(result: &KStarResult, class: usize) -> ClassStats {
    let values = &result.normalized[class];
    let Moments { mu, sigma, gamma } = moments(values);
    ClassStats {
        class_id: class,
        n_samples: values.len(),
        mu,
        sigma,
        gamma,
        pattern: classify_pattern(gamma, sigma, mu),
        accuracy: None,
    }
}

/// Statistics for every class, with accuracy filled in when predictions are
/// supplied.
pub fn all_class_statistics(
    result: &KStarResult,
    index: &ClassIndex,
    preds: Option<&PredictionSet>,
) -> Vec<ClassStats> {
    (0..result.num_classes())
        .map(|c| {
            let mut stats = class_statistics(result, c);
            stats.accuracy = preds.map(|p| class_accuracy(index, p, c));
            stats
        })
        .collect()
}

/// Fraction of class members whose predicted label is their own class.
pub fn class_accuracy(index: &ClassIndex, preds: &PredictionSet, class: usize) -> f64 {
    let members = index.members(class);
    let correct = members
        .iter()
        .filter(|&&p| preds.get(p) == Some(class))
        .count();
    correct as f64 / members.len() as f64
}

/// Unweighted averages over the classes sharing one pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSummary {
    pub pattern: Pattern,
    pub mean_mu: f64,
    pub mean_gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_accuracy: Option<f64>,
    pub n_classes: usize,
}

/// One summary per pattern that occurs, in Fractured, Overlapped, Clustered
/// order. Patterns with no classes are omitted.
pub fn aggregate_by_pattern(stats: &[ClassStats]) -> Vec<PatternSummary> {
    Pattern::ALL
        .iter()
        .filter_map(|&pattern| {
            let group: Vec<&ClassStats> = stats.iter().filter(|s| s.pattern == pattern).collect();
            if group.is_empty() {
                return None;
            }
            let n = group.len() as f64;
            let mean_accuracy = group
                .iter()
                .map(|s| s.accuracy)
                .sum::<Option<f64>>()
                .map(|total| total / n);
            Some(PatternSummary {
                pattern,
                mean_mu: group.iter().map(|s| s.mu).sum::<f64>() / n,
                mean_gamma: group.iter().map(|s| s.gamma).sum::<f64>() / n,
                mean_accuracy,
                n_classes: group.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::build_class_index;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn hand_set_distribution() {
        let set =
            EmbeddingSet::new(vec![0.0, 1.0, 3.0, 4.0], 1, &["A", "A", "B", "B"], None).unwrap();
        let index = build_class_index(&set);
        let result = compute_kstar(&set, &index, Metric::EUCLIDEAN).unwrap();
        assert_eq!(result.ranks, vec![2, 2, 2, 2]);
        assert_eq!(result.normalized, vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        let stats = class_statistics(&result, 0);
        assert_eq!((stats.mu, stats.sigma, stats.gamma), (1.0, 0.0, 0.0));
        assert_eq!(stats.pattern, Pattern::Clustered);
    }

    #[test]
    fn alternating_points() {
        let set =
            EmbeddingSet::new(vec![0.0, 1.0, 2.0, 3.0], 1, &["A", "B", "A", "B"], None).unwrap();
        let index = build_class_index(&set);
        let result = compute_kstar(&set, &index, Metric::EUCLIDEAN).unwrap();
        assert_eq!(result.ranks, vec![1, 1, 1, 1]);
        assert!(result.normalized.iter().flatten().all(|&v| v == 0.5));
    }

    #[test]
    fn singleton_class_normalizes_to_one() {
        let set =
            EmbeddingSet::new(vec![0.0, 0.2, 0.4, 7.0], 1, &["a", "a", "a", "z"], None).unwrap();
        let index = build_class_index(&set);
        let result = compute_kstar(&set, &index, Metric::EUCLIDEAN).unwrap();
        assert_eq!(result.normalized[1], vec![1.0]);
    }

    #[test]
    fn symmetric_values_have_zero_skew() {
        let m = moments(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mu, 2.0);
        assert!(close(m.sigma, (2.0f64 / 3.0).sqrt(), 1e-15));
        assert_eq!(m.gamma, 0.0);
    }

    #[test]
    fn skew_of_one_one_one_five() {
        // m2 = 3, m3 = 6.
        let m = moments(&[1.0, 1.0, 1.0, 5.0]);
        assert!(close(m.gamma, 6.0 / 3f64.powf(1.5), 1e-15));
        assert!(close(m.gamma, 1.1547005383792515, 1e-12));
    }

    #[test]
    fn thresholds() {
        assert_eq!(classify_pattern(2.60, 0.11, 0.15), Pattern::Fractured);
        assert_eq!(classify_pattern(-0.17, 0.26, 0.45), Pattern::Overlapped);
        assert_eq!(classify_pattern(-0.84, 0.25, 0.57), Pattern::Clustered);
        assert_eq!(classify_pattern(0.5, 0.2, 0.5), Pattern::Overlapped);
        assert_eq!(classify_pattern(-0.5, 0.2, 0.5), Pattern::Overlapped);
        assert_eq!(classify_pattern(0.51, 0.2, 0.5), Pattern::Fractured);
        assert_eq!(classify_pattern(-0.51, 0.2, 0.5), Pattern::Clustered);
    }

    #[test]
    fn constant_distribution_follows_mean() {
        assert_eq!(classify_pattern(0.0, 0.0, 1.0), Pattern::Clustered);
        assert_eq!(classify_pattern(0.0, 0.0, 0.5), Pattern::Clustered);
        assert_eq!(classify_pattern(0.0, 1e-13, 0.1), Pattern::Fractured);
    }

    #[test]
    fn accuracy_ratios() {
        let labels: Vec<&str> = std::iter::repeat_n("a", 80).chain(["b"]).collect();
        let set = EmbeddingSet::new((0..81).map(f64::from).collect(), 1, &labels, None).unwrap();
        let index = build_class_index(&set);

        let all = PredictionSet::from_ids(vec![Some(0); 81]);
        assert_eq!(class_accuracy(&index, &all, 0), 1.0);
        assert_eq!(class_accuracy(&index, &all, 1), 0.0);

        let mut some: Vec<Option<usize>> = vec![Some(0); 81];
        some[3] = Some(1);
        some[40] = None;
        let some = PredictionSet::from_ids(some);
        assert_eq!(class_accuracy(&index, &some, 0), 0.975);
    }

    fn stats(pattern: Pattern, mu: f64, gamma: f64, acc: Option<f64>) -> ClassStats {
        ClassStats {
            class_id: 0,
            n_samples: 10,
            mu,
            sigma: 0.2,
            gamma,
            pattern,
            accuracy: acc,
        }
    }

    #[test]
    fn aggregation_single_class() {
        let rows = [stats(Pattern::Clustered, 0.7, -1.2, Some(0.9))];
        let summary = aggregate_by_pattern(&rows);
        assert_eq!(summary.len(), 1);
        assert_eq!(summary[0].pattern, Pattern::Clustered);
        assert_eq!(summary[0].n_classes, 1);
        assert_eq!(summary[0].mean_mu, 0.7);
        assert_eq!(summary[0].mean_gamma, -1.2);
        assert_eq!(summary[0].mean_accuracy, Some(0.9));
    }

    #[test]
    fn aggregation_omits_empty_patterns_and_partitions() {
        let rows = [
            stats(Pattern::Clustered, 0.6, -1.0, None),
            stats(Pattern::Overlapped, 0.4, 0.0, None),
            stats(Pattern::Clustered, 0.8, -2.0, None),
        ];
        let summary = aggregate_by_pattern(&rows);
        assert!(summary.iter().all(|s| s.pattern != Pattern::Fractured));
        assert_eq!(summary.iter().map(|s| s.n_classes).sum::<usize>(), 3);
        let clustered = summary
            .iter()
            .find(|s| s.pattern == Pattern::Clustered)
            .unwrap();
        assert!(close(clustered.mean_mu, 0.7, 1e-15));
        assert_eq!(clustered.mean_gamma, -1.5);
        assert_eq!(clustered.mean_accuracy, None);
    }
}
