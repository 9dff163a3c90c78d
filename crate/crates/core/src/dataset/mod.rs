//! Labelled embedding sets: ingestion, validation and class indexing.
//!
//! Three on-disk layouts are supported:
//!
//! * **csv**: optional header, first column the class label, remaining columns
//!   the coordinates.
//! * **npy-pair**: an `(n, d)` float32/float64 `.npy` array plus a sibling text
//!   file with one label per line (`<stem>.labels.txt` by default).
//! * **jsonl**: one `{"id": str?, "label": str, "x": [float...]}` object per line.
//!
//! Labels are opaque strings mapped to dense ids `0..C` in order of first
//! appearance. Coordinates are held as `f64` regardless of the input width.

pub mod npy;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` labelled points in a `d`-dimensional latent space.
///
/// Immutable once built; every constructor enforces the invariants below, so
/// downstream code can rely on them:
///
/// * `n >= 2`, `d >= 1`, and at least two distinct classes;
/// * every coordinate is finite;
/// * class ids are dense: each id in `0..num_classes()` labels at least one row;
/// * sample ids are unique.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    points: Vec<f64>,
    dim: usize,
    labels: Vec<usize>,
    ids: Vec<String>,
    class_names: Vec<String>,
}

impl EmbeddingSet {
    /// Builds a set from row-major coordinates and string labels.
    ///
    /// `ids` defaults to the row index when `None`.
    pub fn new<S: AsRef<str>>(
        points: Vec<f64>,
        dim: usize,
        labels: &[S],
        ids: Option<Vec<String>>,
    ) -> Result<Self> {
        let mut class_names: Vec<String> = Vec::new();
        let mut lookup: HashMap<&str, usize> = HashMap::new();
        let mut dense = Vec::with_capacity(labels.len());
        for label in labels {
            let label = label.as_ref();
            let id = *lookup.entry(label).or_insert_with(|| {
                class_names.push(label.to_string());
                class_names.len() - 1
            });
            dense.push(id);
        }
        Self::from_parts(points, dim, dense, class_names, ids)
    }

    /// Builds a set from already-dense class ids.
    pub fn from_parts(
        points: Vec<f64>,
        dim: usize,
        labels: Vec<usize>,
        class_names: Vec<String>,
        ids: Option<Vec<String>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension(
                "embedding dimension must be at least 1".into(),
            ));
        }
        if !points.len().is_multiple_of(dim) {
            return Err(Error::Dimension(format!(
                "{} coordinates do not divide into rows of width {dim}",
                points.len()
            )));
        }
        let n = points.len() / dim;
        if labels.len() != n {
            return Err(Error::Dimension(format!(
                "{n} points but {} labels",
                labels.len()
            )));
        }
        if n < 2 {
            return Err(Error::Validation(format!(
                "need at least 2 samples, got {n}"
            )));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite coordinate {} at sample {}, column {}",
                points[pos],
                pos / dim,
                pos % dim
            )));
        }

        let mut seen = vec![false; class_names.len()];
        for &l in &labels {
            match seen.get_mut(l) {
                Some(s) => *s = true,
                None => {
                    return Err(Error::Validation(format!(
                        "class id {l} has no name ({} classes declared)",
                        class_names.len()
                    )))
                }
            }
        }
        if let Some(unused) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!(
                "class {:?} has no samples",
                class_names[unused]
            )));
        }
        if class_names.len() < 2 {
            return Err(Error::SingleClass(format!(
                "need at least 2 distinct classes, found {} (k* is undefined with one class)",
                class_names.len()
            )));
        }
        let distinct_names: HashSet<&String> = class_names.iter().collect();
        if distinct_names.len() != class_names.len() {
            return Err(Error::Validation("duplicate class names".into()));
        }

        let ids = match ids {
            Some(ids) => {
                if ids.len() != n {
                    return Err(Error::Dimension(format!(
                        "{n} points but {} ids",
                        ids.len()
                    )));
                }
                let mut unique = HashSet::with_capacity(n);
                if let Some(dup) = ids.iter().find(|id| !unique.insert(id.as_str())) {
                    return Err(Error::Validation(format!("duplicate sample id {dup:?}")));
                }
                ids
            }
            None => (0..n).map(|i| i.to_string()).collect(),
        };

        Ok(Self {
            points,
            dim,
            labels,
            ids,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false for a constructed set; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major coordinate buffer, `len() * dim()` values.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    #[inline]
    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_name(&self, class: usize) -> &str {
        &self.class_names[class]
    }

    pub fn class_id(&self, name: &str) -> Option<usize> {
        self.class_names.iter().position(|c| c == name)
    }
}

/// Row indices of each class, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassIndex {
    members: Vec<Vec<usize>>,
}

impl ClassIndex {
    pub fn members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }

    pub fn size(&self, class: usize) -> usize {
        self.members[class].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn num_classes(&self) -> usize {
        self.members.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.members.iter().map(Vec::as_slice)
    }
}

pub fn build_class_index(set: &EmbeddingSet) -> ClassIndex {
    let mut members = vec![Vec::new(); set.num_classes()];
    for (i, &l) in set.labels().iter().enumerate() {
        members[l].push(i);
    }
    ClassIndex { members }
}

/// Predicted class per sample; `None` marks a label outside the vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionSet {
    predicted: Vec<Option<usize>>,
}

impl PredictionSet {
    /// Maps predicted label strings onto the class ids of `set`.
    pub fn from_labels<S: AsRef<str>>(set: &EmbeddingSet, labels: &[S]) -> Result<Self> {
        if labels.len() != set.len() {
            return Err(Error::Dimension(format!(
                "{} samples but {} predictions",
                set.len(),
                labels.len()
            )));
        }
        Ok(Self {
            predicted: labels.iter().map(|l| set.class_id(l.as_ref())).collect(),
        })
    }

    pub fn from_ids(predicted: Vec<Option<usize>>) -> Self {
        Self { predicted }
    }

    pub fn len(&self) -> usize {
        self.predicted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicted.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        self.predicted[i]
    }
}

/// Reads a prediction file: one predicted label per line, `n` lines.
pub fn load_predictions(path: &Path, set: &EmbeddingSet) -> Result<PredictionSet> {
    let labels = read_lines(path)?;
    PredictionSet::from_labels(set, &labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    NpyPair,
    Jsonl,
}

impl Format {
    /// Guesses the format from a file extension.
    pub fn infer(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "npy" => Some(Format::NpyPair),
            "jsonl" | "ndjson" => Some(Format::Jsonl),
            _ => None,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "npy" | "npy-pair" => Ok(Format::NpyPair),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!(
                "unknown format {other:?} (expected csv, npy-pair or jsonl)"
            )),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::NpyPair => "npy-pair",
            Format::Jsonl => "jsonl",
        })
    }
}

/// Default label file for an npy array: `x.npy` pairs with `x.labels.txt`.
pub fn sibling_labels_path(array_path: &Path) -> PathBuf {
    array_path.with_extension("labels.txt")
}

pub fn load_embeddings(path: &Path, format: Format) -> Result<EmbeddingSet> {
    match format {
        Format::Csv => load_csv(path),
        Format::NpyPair => load_npy_pair(path, &sibling_labels_path(path)),
        Format::Jsonl => load_jsonl(path),
    }
}

pub fn load_csv(path: &Path) -> Result<EmbeddingSet> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));

    let mut labels = Vec::new();
    let mut points = Vec::new();
    let mut dim = None;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(&display, e.to_string()))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() < 2 {
            return Err(Error::parse(
                &display,
                format!(
                    "line {}: expected a label and at least one coordinate",
                    line + 1
                ),
            ));
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().skip(1).map(str::parse::<f64>).collect();
        let coords = match parsed {
            Ok(c) => c,
            // A first row whose coordinate cells are not numbers is a header.
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(Error::parse(&display, format!("line {}: {e}", line + 1)));
            }
        };
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(Error::Validation(format!(
                    "{display}: ragged rows, line {} has {} coordinates, expected {d}",
                    line + 1,
                    coords.len()
                )));
            }
            Some(_) => {}
        }
        labels.push(record[0].to_string());
        points.extend(coords);
    }
    let dim = dim.ok_or_else(|| Error::parse(&display, "no data rows"))?;
    EmbeddingSet::new(points, dim, &labels, None)
}

pub fn load_npy_pair(array_path: &Path, labels_path: &Path) -> Result<EmbeddingSet> {
    let display = array_path.display().to_string();
    let file = File::open(array_path).map_err(|e| Error::io(array_path, e))?;
    let array = npy::read_array(&mut BufReader::new(file))
        .map_err(|e| Error::parse(&display, e.to_string()))?;
    let dim = match array.shape.as_slice() {
        [_, d] => *d,
        other => {
            return Err(Error::Dimension(format!(
                "{display}: expected a 2-D (n, d) array, got shape {other:?}"
            )))
        }
    };
    let labels = read_lines(labels_path)?;
    EmbeddingSet::new(array.data, dim, &labels, None)
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonlRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    label: String,
    x: Vec<f64>,
}

pub fn load_jsonl(path: &Path) -> Result<EmbeddingSet> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    let mut points = Vec::new();
    let mut dim = None;
    let mut any_id = false;
    for (line_no, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonlRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(&display, format!("line {}: {e}", line_no + 1)))?;
        match dim {
            None => dim = Some(rec.x.len()),
            Some(d) if d != rec.x.len() => {
                return Err(Error::Validation(format!(
                    "{display}: ragged rows, line {} has {} coordinates, expected {d}",
                    line_no + 1,
                    rec.x.len()
                )));
            }
            Some(_) => {}
        }
        any_id |= rec.id.is_some();
        ids.push(rec.id.unwrap_or_else(|| labels.len().to_string()));
        labels.push(rec.label);
        points.extend(rec.x);
    }
    let dim = dim.ok_or_else(|| Error::parse(&display, "no data rows"))?;
    EmbeddingSet::new(points, dim, &labels, any_id.then_some(ids))
}

/// Writes `set` in `format`. For npy-pair, the label file goes to
/// [`sibling_labels_path`].
pub fn write_embeddings(set: &EmbeddingSet, path: &Path, format: Format) -> Result<()> {
    match format {
        Format::Csv => write_csv(set, path),
        Format::NpyPair => write_npy_pair(set, path, &sibling_labels_path(path)),
        Format::Jsonl => write_jsonl(set, path),
    }
}

/// CSV coordinates use the shortest representation that parses back to the
/// identical `f64`.
pub fn write_csv(set: &EmbeddingSet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let to_err = |e: csv::Error| Error::io(path, e.into());
    let mut header = vec!["label".to_string()];
    header.extend((0..set.dim()).map(|j| format!("x{j}")));
    writer.write_record(&header).map_err(to_err)?;
    for i in 0..set.len() {
        let mut row = Vec::with_capacity(set.dim() + 1);
        row.push(set.class_name(set.label(i)).to_string());
        row.extend(set.point(i).iter().map(|v| format!("{v:?}")));
        writer.write_record(&row).map_err(to_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn write_npy_pair(set: &EmbeddingSet, array_path: &Path, labels_path: &Path) -> Result<()> {
    let file = File::create(array_path).map_err(|e| Error::io(array_path, e))?;
    let mut w = BufWriter::new(file);
    npy::write_array(&mut w, &[set.len(), set.dim()], set.points())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(array_path, e))?;

    let file = File::create(labels_path).map_err(|e| Error::io(labels_path, e))?;
    let mut w = BufWriter::new(file);
    for &l in set.labels() {
        writeln!(w, "{}", set.class_name(l)).map_err(|e| Error::io(labels_path, e))?;
    }
    w.flush().map_err(|e| Error::io(labels_path, e))
}

pub fn write_jsonl(set: &EmbeddingSet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for i in 0..set.len() {
        let rec = JsonlRecord {
            id: Some(set.ids()[i].clone()),
            label: set.class_name(set.label(i)).to_string(),
            x: set.point(i).to_vec(),
        };
        let line = serde_json::to_string(&rec).expect("finite floats serialize");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if !line.is_empty() {
            out.push(line.to_string());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str, ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_without_header() {
        let f = write_tmp("a,1.0,2.0\na,1.1,2.1\nb,5.0,5.0\n", ".csv");
        let set = load_embeddings(f.path(), Format::Csv).unwrap();
        assert_eq!((set.len(), set.dim(), set.num_classes()), (3, 2, 2));
        assert_eq!(set.point(1), &[1.1, 2.1]);
        assert_eq!(set.labels(), &[0, 0, 1]);
        assert_eq!(set.ids(), &["0", "1", "2"]);
    }

    #[test]
    fn csv_with_header_and_first_appearance_order() {
        let f = write_tmp("label,x0\nzebra,0\napple,1\nzebra,2\n", ".csv");
        let set = load_csv(f.path()).unwrap();
        assert_eq!(set.class_names(), &["zebra", "apple"]);
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn single_class_is_rejected() {
        let f = write_tmp("a,1.0\na,2.0\na,3.0\n", ".csv");
        let err = load_csv(f.path()).unwrap_err();
        assert!(matches!(err, Error::SingleClass(_)));
        assert!(err.is_validation());
    }

    #[test]
    fn ragged_and_non_finite_rows_are_rejected() {
        let f = write_tmp("a,1.0,2.0\nb,1.0\n", ".csv");
        assert!(matches!(load_csv(f.path()), Err(Error::Validation(_))));
        let f = write_tmp("a,1.0\nb,NaN\n", ".csv");
        assert!(matches!(load_csv(f.path()), Err(Error::Validation(_))));
        let f = write_tmp("a,1.0\nb,inf\n", ".csv");
        assert!(matches!(load_csv(f.path()), Err(Error::Validation(_))));
    }

    #[test]
    fn garbage_after_first_row_is_a_parse_error() {
        let f = write_tmp("a,1.0\nb,oops\n", ".csv");
        assert!(matches!(load_csv(f.path()), Err(Error::Parse { .. })));
    }

    #[test]
    fn label_count_mismatch_is_a_dimension_error() {
        let err = EmbeddingSet::new(vec![0.0, 1.0, 2.0], 1, &["a", "b"], None).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn jsonl_keeps_ids() {
        let f = write_tmp(
            "{\"id\": \"s1\", \"label\": \"cat\", \"x\": [0.5, 1]}\n\
             {\"id\": \"s2\", \"label\": \"dog\", \"x\": [2, 3]}\n",
            ".jsonl",
        );
        let set = load_jsonl(f.path()).unwrap();
        assert_eq!(set.ids(), &["s1", "s2"]);
        assert_eq!(set.point(0), &[0.5, 1.0]);
        assert_eq!(set.class_names(), &["cat", "dog"]);
    }

    #[test]
    fn jsonl_duplicate_ids_rejected() {
        let f = write_tmp(
            "{\"id\": \"s\", \"label\": \"cat\", \"x\": [0]}\n{\"id\": \"s\", \"label\": \"dog\", \"x\": [1]}\n",
            ".jsonl",
        );
        assert!(matches!(load_jsonl(f.path()), Err(Error::Validation(_))));
    }

    #[test]
    fn npy_pair_imagenet16_layout() {
        // 16 classes x 80 samples, float32 logits of width 1000.
        let dir = tempfile::tempdir().unwrap();
        let array = dir.path().join("logits.npy");
        let (n, d) = (1280usize, 1000usize);
        let header = "{'descr': '<f4', 'fortran_order': False, 'shape': (1280, 1000), }";
        let pad = 64 - (10 + header.len() + 1) % 64;
        let header = format!("{header}{}\n", " ".repeat(pad % 64));
        let mut bytes = npy::MAGIC.to_vec();
        bytes.extend([1, 0]);
        bytes.extend((header.len() as u16).to_le_bytes());
        bytes.extend(header.as_bytes());
        for i in 0..n * d {
            bytes.extend(((i % 97) as f32 * 0.25).to_le_bytes());
        }
        std::fs::write(&array, bytes).unwrap();
        let labels: String = (0..n).map(|i| format!("class{}\n", i / 80)).collect();
        std::fs::write(sibling_labels_path(&array), labels).unwrap();

        let set = load_embeddings(&array, Format::NpyPair).unwrap();
        assert_eq!((set.len(), set.dim(), set.num_classes()), (1280, 1000, 16));
        let index = build_class_index(&set);
        assert!(index.sizes().iter().all(|&s| s == 80));
    }

    #[test]
    fn class_index_members() {
        let set = EmbeddingSet::new(vec![0.0, 1.0, 2.0], 1, &["a", "b", "a"], None).unwrap();
        let index = build_class_index(&set);
        assert_eq!(index.members(0), &[0, 2]);
        assert_eq!(index.members(1), &[1]);
        assert_eq!(index.sizes(), vec![2, 1]);

        let set = EmbeddingSet::new(vec![0.0, 1.0, 2.0], 1, &["a", "b", "c"], None).unwrap();
        assert!(build_class_index(&set).sizes().iter().all(|&s| s == 1));
    }

    #[test]
    fn predictions_map_unknown_labels_to_none() {
        let set = EmbeddingSet::new(vec![0.0, 1.0, 2.0], 1, &["a", "b", "a"], None).unwrap();
        let preds = PredictionSet::from_labels(&set, &["a", "zzz", "b"]).unwrap();
        assert_eq!(preds.get(0), Some(0));
        assert_eq!(preds.get(1), None);
        assert_eq!(preds.get(2), Some(1));
        assert!(PredictionSet::from_labels(&set, &["a"]).is_err());
    }

    #[test]
    fn format_inference() {
        assert_eq!(Format::infer(Path::new("x.CSV")), Some(Format::Csv));
        assert_eq!(Format::infer(Path::new("x.npy")), Some(Format::NpyPair));
        assert_eq!(Format::infer(Path::new("x.jsonl")), Some(Format::Jsonl));
        assert_eq!(Format::infer(Path::new("x.txt")), None);
        assert_eq!(
            sibling_labels_path(Path::new("/d/logits.npy")),
            PathBuf::from("/d/logits.labels.txt")
        );
    }
}
