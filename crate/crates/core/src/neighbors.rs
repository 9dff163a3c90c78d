//! Exact neighbour ordering and first-heterogeneous-neighbour ranks.
//!
//! All orderings are by `(distance, sample index)`, which makes them total:
//! equal distances fall back to the lower index. The query is never its own
//! neighbour, and ranks are 1-based.
//!
//! Two routes compute the same rank:
//!
//! * [`sorted_neighbors`] materialises and sorts the full neighbourhood of a
//!   query, O(n log n);
//! * [`first_heterogeneous_rank`] finds the nearest differently-labelled
//!   sample and counts the same-class samples that precede it, O(n) with no
//!   sort and no stored distances.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::dataset::{ClassIndex, EmbeddingSet};
use crate::distance::{BoundMetric, Metric};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// All other samples ordered by `(distance to query, index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborOrder {
    pub query: usize,
    pub neighbors: Vec<Neighbor>,
}

impl NeighborOrder {
    /// 1-based position of the first neighbour whose label differs from the
    /// query's, if any.
    pub fn first_heterogeneous(&self, set: &EmbeddingSet) -> Option<usize> {
        let own = set.label(self.query);
        self.neighbors
            .iter()
            .position(|nb| set.label(nb.index) != own)
            .map(|pos| pos + 1)
    }
}

#[inline]
fn cmp_keyed(a: (f64, usize), b: (f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

fn check_query(set: &EmbeddingSet, p: usize) -> Result<()> {
    if p >= set.len() {
        return Err(Error::Validation(format!(
            "query index {p} out of range for {} samples",
            set.len()
        )));
    }
    Ok(())
}

pub fn sorted_neighbors(set: &EmbeddingSet, p: usize, metric: Metric) -> Result<NeighborOrder> {
    check_query(set, p)?;
    let bound = BoundMetric::new(set, metric)?;
    Ok(sorted_with(&bound, set.len(), p))
}

pub(crate) fn sorted_with(bound: &BoundMetric<'_>, n: usize, p: usize) -> NeighborOrder {
    let mut keyed: Vec<(f64, usize)> = (0..n)
        .filter(|&q| q != p)
        .map(|q| (bound.key(p, q), q))
        .collect();
    keyed.sort_unstable_by(|a, b| cmp_keyed(*a, *b));
    NeighborOrder {
        query: p,
        neighbors: keyed
            .into_iter()
            .map(|(key, index)| Neighbor {
                index,
                distance: bound.finalize(key),
            })
            .collect(),
    }
}

/// k* of sample `p`: the 1-based rank of its nearest differently-labelled
/// neighbour.
pub fn first_heterogeneous_rank(
    set: &EmbeddingSet,
    index: &ClassIndex,
    p: usize,
    metric: Metric,
) -> Result<usize> {
    check_query(set, p)?;
    require_two_classes(index)?;
    let bound = BoundMetric::new(set, metric)?;
    Ok(rank_with(&bound, set, index, p))
}

fn require_two_classes(index: &ClassIndex) -> Result<()> {
    let populated = index.iter().filter(|m| !m.is_empty()).count();
    if populated < 2 {
        return Err(Error::SingleClass(
            "no differently-labelled sample exists; k* needs at least two classes".into(),
        ));
    }
    Ok(())
}

pub(crate) fn rank_with(
    bound: &BoundMetric<'_>,
    set: &EmbeddingSet,
    index: &ClassIndex,
    p: usize,
) -> usize {
    let own = set.label(p);

    let mut nearest_other = (f64::INFINITY, usize::MAX);
    for (class, members) in index.iter().enumerate() {
        if class == own {
            continue;
        }
        for &q in members {
            let cand = (bound.key(p, q), q);
            if cmp_keyed(cand, nearest_other) == Ordering::Less {
                nearest_other = cand;
            }
        }
    }

    let preceding = index
        .members(own)
        .iter()
        .filter(|&&q| q != p && cmp_keyed((bound.key(p, q), q), nearest_other) == Ordering::Less)
        .count();
    preceding + 1
}

/// k* for every sample, computed in parallel on the current rayon pool.
///
/// Each query writes only its own slot, so the output does not depend on the
/// number of worker threads.
pub fn heterogeneous_ranks(
    set: &EmbeddingSet,
    index: &ClassIndex,
    metric: Metric,
) -> Result<Vec<usize>> {
    require_two_classes(index)?;
    let bound = BoundMetric::new(set, metric)?;
    Ok((0..set.len())
        .into_par_iter()
        .map(|p| rank_with(&bound, set, index, p))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::build_class_index;

    fn hand_set() -> EmbeddingSet {
        EmbeddingSet::new(vec![0.0, 1.0, 3.0, 4.0], 1, &["A", "A", "B", "B"], None).unwrap()
    }

    #[test]
    fn sorted_order_of_hand_set() {
        let order = sorted_neighbors(&hand_set(), 1, Metric::EUCLIDEAN).unwrap();
        let got: Vec<_> = order
            .neighbors
            .iter()
            .map(|n| (n.index, n.distance))
            .collect();
        assert_eq!(got, vec![(0, 1.0), (2, 2.0), (3, 3.0)]);
    }

    #[test]
    fn two_point_set() {
        let set = EmbeddingSet::new(vec![0.0, 5.0], 1, &["a", "b"], None).unwrap();
        let order = sorted_neighbors(&set, 0, Metric::EUCLIDEAN).unwrap();
        assert_eq!(order.neighbors.len(), 1);
        assert_eq!(order.neighbors[0].index, 1);
    }

    #[test]
    fn ties_break_by_lower_index() {
        let set =
            EmbeddingSet::new(vec![0.0, 2.0, 1.0, 1.0], 1, &["a", "b", "a", "b"], None).unwrap();
        let order = sorted_neighbors(&set, 0, Metric::EUCLIDEAN).unwrap();
        let idx: Vec<_> = order.neighbors.iter().map(|n| n.index).collect();
        assert_eq!(idx, vec![2, 3, 1]);
    }

    #[test]
    fn hand_set_ranks() {
        let set = hand_set();
        let index = build_class_index(&set);
        for p in 0..4 {
            assert_eq!(
                first_heterogeneous_rank(&set, &index, p, Metric::EUCLIDEAN).unwrap(),
                2
            );
        }
        assert_eq!(
            heterogeneous_ranks(&set, &index, Metric::EUCLIDEAN).unwrap(),
            vec![2, 2, 2, 2]
        );
    }

    #[test]
    fn nearest_neighbor_differs() {
        let set =
            EmbeddingSet::new(vec![0.0, 1.0, 2.0, 3.0], 1, &["A", "B", "A", "B"], None).unwrap();
        let index = build_class_index(&set);
        assert_eq!(
            heterogeneous_ranks(&set, &index, Metric::EUCLIDEAN).unwrap(),
            vec![1, 1, 1, 1]
        );
    }

    #[test]
    fn singleton_class_has_rank_one() {
        let set = EmbeddingSet::new(vec![0.0, 0.1, 9.0], 1, &["A", "A", "solo"], None).unwrap();
        let index = build_class_index(&set);
        assert_eq!(
            first_heterogeneous_rank(&set, &index, 2, Metric::EUCLIDEAN).unwrap(),
            1
        );
    }

    #[test]
    fn duplicate_points_use_index_order() {
        // Query 0 sits on top of samples 1 (same class) and 2 (other class).
        let set =
            EmbeddingSet::new(vec![0.0, 0.0, 0.0, 5.0], 1, &["a", "a", "b", "b"], None).unwrap();
        let index = build_class_index(&set);
        assert_eq!(
            first_heterogeneous_rank(&set, &index, 0, Metric::EUCLIDEAN).unwrap(),
            2
        );
        // Query 2: sample 0 (class a) precedes sample 1 at the same distance.
        assert_eq!(
            first_heterogeneous_rank(&set, &index, 2, Metric::EUCLIDEAN).unwrap(),
            1
        );
    }

    #[test]
    fn cosine_zero_vector_propagates() {
        let set = EmbeddingSet::new(vec![0.0, 0.0, 1.0, 1.0], 2, &["a", "b"], None).unwrap();
        assert!(matches!(
            sorted_neighbors(&set, 1, Metric::COSINE),
            Err(Error::ZeroVector(0))
        ));
    }

    #[test]
    fn out_of_range_query() {
        assert!(sorted_neighbors(&hand_set(), 4, Metric::EUCLIDEAN).is_err());
    }
}
