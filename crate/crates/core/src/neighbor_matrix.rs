//! Same-class/different-class masks over each sample's ranked neighbours.
//!
//! Row `i` of a class matrix covers one member of the class; cell `r` is set
//! when that member's `(r + 1)`-th nearest neighbour shares its class. Rows
//! are displayed by descending k*, ties by sample index.

use std::io::Write;

use rayon::prelude::*;

use crate::dataset::{ClassIndex, EmbeddingSet};
use crate::distance::{BoundMetric, Metric};
use crate::error::{Error, Result};
use crate::neighbors::{rank_with, sorted_with};

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborMatrix {
    pub class_id: usize,
    /// Sample indices in display order.
    pub row_order: Vec<usize>,
    /// k* of each displayed row.
    pub kstar: Vec<usize>,
    /// `rows[i][r]` is true when neighbour `r + 1` of `row_order[i]` is same-class.
    pub rows: Vec<Vec<bool>>,
}

impl NeighborMatrix {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Rows as `0`/`1` CSV lines, no header.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for row in &self.rows {
            write_row(w, row)?;
        }
        Ok(())
    }
}

fn write_row<W: Write>(w: &mut W, row: &[bool]) -> std::io::Result<()> {
    let mut line = String::with_capacity(row.len() * 2);
    for (i, &same) in row.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push(if same { '1' } else { '0' });
    }
    line.push('\n');
    w.write_all(line.as_bytes())
}

fn check_class(set: &EmbeddingSet, class: usize) -> Result<()> {
    if class >= set.num_classes() {
        return Err(Error::Validation(format!(
            "class id {class} out of range ({} classes)",
            set.num_classes()
        )));
    }
    if set.num_classes() < 2 {
        return Err(Error::SingleClass(
            "neighbor matrix needs two classes".into(),
        ));
    }
    Ok(())
}

fn mask_row(bound: &BoundMetric<'_>, set: &EmbeddingSet, p: usize) -> Vec<bool> {
    let own = set.label(p);
    sorted_with(bound, set.len(), p)
        .neighbors
        .iter()
        .map(|nb| set.label(nb.index) == own)
        .collect()
}

/// Materialises the full matrix for class `class`, O(|S_c| * n) memory.
///
/// Rows come from full neighbour sorts; each row's k* is read off its first
/// zero rather than taken from the counting path.
pub fn build_neighbor_matrix(
    set: &EmbeddingSet,
    index: &ClassIndex,
    class: usize,
    metric: Metric,
) -> Result<NeighborMatrix> {
    check_class(set, class)?;
    let bound = BoundMetric::new(set, metric)?;
    let members = index.members(class);

    let rows: Vec<Vec<bool>> = members
        .par_iter()
        .map(|&p| mask_row(&bound, set, p))
        .collect();
    let kstar: Vec<usize> = rows
        .iter()
        .map(|row| {
            row.iter()
                .position(|&same| !same)
                .map_or(row.len() + 1, |z| z + 1)
        })
        .collect();

    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| kstar[b].cmp(&kstar[a]).then(members[a].cmp(&members[b])));

    let mut rows: Vec<Option<Vec<bool>>> = rows.into_iter().map(Some).collect();
    Ok(NeighborMatrix {
        class_id: class,
        row_order: order.iter().map(|&i| members[i]).collect(),
        kstar: order.iter().map(|&i| kstar[i]).collect(),
        rows: order
            .iter()
            .map(|&i| rows[i].take().expect("each row used once"))
            .collect(),
    })
}

/// Writes the matrix for `class` as CSV one row at a time, holding a single
/// row in memory. Row order matches [`build_neighbor_matrix`].
pub fn stream_neighbor_matrix_csv<W: Write>(
    set: &EmbeddingSet,
    index: &ClassIndex,
    class: usize,
    metric: Metric,
    out: &mut W,
) -> Result<()> {
    check_class(set, class)?;
    let bound = BoundMetric::new(set, metric)?;
    let mut order: Vec<(usize, usize)> = index
        .members(class)
        .iter()
        .map(|&p| (rank_with(&bound, set, index, p), p))
        .collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, p) in order {
        write_row(out, &mask_row(&bound, set, p)).map_err(|e| Error::io("<matrix stream>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::build_class_index;

    #[test]
    fn hand_set_class_a() {
        let set =
            EmbeddingSet::new(vec![0.0, 1.0, 3.0, 4.0], 1, &["A", "A", "B", "B"], None).unwrap();
        let index = build_class_index(&set);
        let m = build_neighbor_matrix(&set, &index, 0, Metric::EUCLIDEAN).unwrap();
        assert_eq!(m.rows, vec![vec![true, false, false]; 2]);
        assert_eq!(m.row_order, vec![0, 1]);
        let mut csv = Vec::new();
        m.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "1,0,0\n1,0,0\n");
    }

    #[test]
    fn far_blob_rows_start_with_all_same_class() {
        let mut points = vec![100.0, 100.1, 100.2, 100.3];
        points.extend([0.0, 1.0, 2.0]);
        let labels = ["far", "far", "far", "far", "x", "y", "x"];
        let set = EmbeddingSet::new(points, 1, &labels, None).unwrap();
        let index = build_class_index(&set);
        let m = build_neighbor_matrix(&set, &index, 0, Metric::EUCLIDEAN).unwrap();
        for row in &m.rows {
            assert_eq!(&row[..3], &[true, true, true]);
            assert!(row[3..].iter().all(|&b| !b));
        }
    }

    #[test]
    fn alternating_class_has_zero_first_column() {
        let set = EmbeddingSet::new(
            vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            1,
            &["A", "B", "A", "B", "A", "B"],
            None,
        )
        .unwrap();
        let index = build_class_index(&set);
        let m = build_neighbor_matrix(&set, &index, 0, Metric::EUCLIDEAN).unwrap();
        assert!(m.rows.iter().all(|row| !row[0]));
        assert!(m
            .rows
            .iter()
            .all(|row| row.iter().filter(|&&b| b).count() == 2));
    }

    #[test]
    fn rows_are_sorted_by_descending_kstar() {
        // Class A: two tight points and one straggler next to B.
        let set = EmbeddingSet::new(
            vec![0.0, 0.1, 5.0, 5.2, 9.0],
            1,
            &["A", "A", "A", "B", "B"],
            None,
        )
        .unwrap();
        let index = build_class_index(&set);
        let m = build_neighbor_matrix(&set, &index, 0, Metric::EUCLIDEAN).unwrap();
        assert_eq!(m.kstar, vec![3, 3, 1]);
        assert_eq!(m.row_order, vec![0, 1, 2]);
    }

    #[test]
    fn streamed_csv_matches_materialized() {
        let set = EmbeddingSet::new(
            vec![0.0, 0.3, 0.9, 1.1, 2.0, 2.2, 3.5, 4.0],
            1,
            &["a", "b", "a", "a", "b", "c", "a", "b"],
            None,
        )
        .unwrap();
        let index = build_class_index(&set);
        for class in 0..3 {
            let m = build_neighbor_matrix(&set, &index, class, Metric::CITYBLOCK).unwrap();
            let mut a = Vec::new();
            m.write_csv(&mut a).unwrap();
            let mut b = Vec::new();
            stream_neighbor_matrix_csv(&set, &index, class, Metric::CITYBLOCK, &mut b).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn class_out_of_range() {
        let set = EmbeddingSet::new(vec![0.0, 1.0], 1, &["a", "b"], None).unwrap();
        let index = build_class_index(&set);
        assert!(build_neighbor_matrix(&set, &index, 2, Metric::EUCLIDEAN).is_err());
    }
}
