//! Minkowski-family and cosine distances.
//!
//! Neighbour search never needs the distance itself, only the order it
//! induces, so every metric is split into an order-preserving *key*
//! (e.g. the squared sum for Euclidean) and a monotone [`Metric::finalize`]
//! step. [`distance`] is `finalize(key)`; the neighbour engine compares keys.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::EmbeddingSet;
use crate::error::{Error, Result};

/// Above this many coordinates, sums are split pairwise.
const PAIRWISE_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Metric {
    /// Minkowski distance of order `r`; `r = f64::INFINITY` is the max norm.
    Minkowski { r: f64 },
    /// `1 - cos(a, b)`.
    Cosine,
}

impl Metric {
    pub const CITYBLOCK: Metric = Metric::Minkowski { r: 1.0 };
    pub const EUCLIDEAN: Metric = Metric::Minkowski { r: 2.0 };
    pub const MAXNORM: Metric = Metric::Minkowski { r: f64::INFINITY };
    pub const COSINE: Metric = Metric::Cosine;

    /// The four metrics exposed on the command line.
    pub const NAMED: [Metric; 4] = [
        Metric::EUCLIDEAN,
        Metric::CITYBLOCK,
        Metric::MAXNORM,
        Metric::COSINE,
    ];

    pub fn minkowski(r: f64) -> Result<Self> {
        if r.is_nan() || r <= 0.0 {
            return Err(Error::Validation(format!(
                "Minkowski order must be positive, got {r}"
            )));
        }
        Ok(Metric::Minkowski { r })
    }

    pub fn name(&self) -> String {
        match *self {
            Metric::Minkowski { r } if r == 1.0 => "cityblock".into(),
            Metric::Minkowski { r } if r == 2.0 => "euclidean".into(),
            Metric::Minkowski { r } if r == f64::INFINITY => "maxnorm".into(),
            Metric::Minkowski { r } => format!("minkowski-{r}"),
            Metric::Cosine => "cosine".into(),
        }
    }

    /// Order-preserving surrogate of `distance(a, b)`.
    ///
    /// `norms` carries precomputed squared L2 norms, used only by cosine.
    #[inline]
    pub(crate) fn key(&self, a: &[f64], b: &[f64], norms: (f64, f64)) -> f64 {
        match *self {
            Metric::Minkowski { r } if r == 2.0 => accumulate(a, b, |x, y| {
                let d = x - y;
                d * d
            }),
            Metric::Minkowski { r } if r == 1.0 => accumulate(a, b, |x, y| (x - y).abs()),
            Metric::Minkowski { r } if r == f64::INFINITY => a
                .iter()
                .zip(b)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs())),
            Metric::Minkowski { r } => accumulate(a, b, |x, y| (x - y).abs().powf(r)),
            Metric::Cosine => {
                let dot = accumulate(a, b, |x, y| x * y);
                // sqrt(n * n) == n exactly, so identical vectors give 0.
                let cos = dot / (norms.0 * norms.1).sqrt();
                (1.0 - cos).clamp(0.0, 2.0)
            }
        }
    }

    /// Maps a key back to a distance. Monotone non-decreasing.
    #[inline]
    pub(crate) fn finalize(&self, key: f64) -> f64 {
        match *self {
            Metric::Minkowski { r } if r == 2.0 => key.sqrt(),
            Metric::Minkowski { r } if r == 1.0 || r == f64::INFINITY => key,
            Metric::Minkowski { r } => key.powf(r.recip()),
            Metric::Cosine => key,
        }
    }
}

impl Default for Metric {
    fn default() -> Self {
        Metric::EUCLIDEAN
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "euclidean" | "l2" => Ok(Metric::EUCLIDEAN),
            "cityblock" | "manhattan" | "l1" => Ok(Metric::CITYBLOCK),
            "maxnorm" | "chebyshev" | "linf" => Ok(Metric::MAXNORM),
            "cosine" => Ok(Metric::COSINE),
            other => match other.strip_prefix("minkowski-").map(str::parse::<f64>) {
                Some(Ok(r)) => Metric::minkowski(r).map_err(|e| e.to_string()),
                _ => Err(format!(
                    "unknown metric {other:?} (expected euclidean, cityblock, maxnorm, cosine or minkowski-<r>)"
                )),
            },
        }
    }
}

/// Sums `term(a[i], b[i])` with four independent lanes, splitting pairwise
/// above [`PAIRWISE_THRESHOLD`] coordinates.
#[inline]
fn accumulate<F>(a: &[f64], b: &[f64], term: F) -> f64
where
    F: Fn(f64, f64) -> f64 + Copy,
{
    if a.len() > PAIRWISE_THRESHOLD {
        let mid = a.len() / 2;
        return accumulate(&a[..mid], &b[..mid], term) + accumulate(&a[mid..], &b[mid..], term);
    }
    let mut lanes = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        lanes[0] += term(x[0], y[0]);
        lanes[1] += term(x[1], y[1]);
        lanes[2] += term(x[2], y[2]);
        lanes[3] += term(x[3], y[3]);
    }
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(&x, &y)| term(x, y))
        .sum();
    (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail
}

fn squared_norm(v: &[f64]) -> f64 {
    accumulate(v, v, |x, y| x * y)
}

pub fn distance(a: &[f64], b: &[f64], metric: Metric) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let norms = match metric {
        Metric::Cosine => {
            let na = squared_norm(a);
            let nb = squared_norm(b);
            if na == 0.0 {
                return Err(Error::ZeroVector(0));
            }
            if nb == 0.0 {
                return Err(Error::ZeroVector(1));
            }
            (na, nb)
        }
        Metric::Minkowski { .. } => (0.0, 0.0),
    };
    Ok(metric.finalize(metric.key(a, b, norms)))
}

/// A metric bound to one embedding set, with per-row data precomputed.
pub(crate) struct BoundMetric<'a> {
    set: &'a EmbeddingSet,
    metric: Metric,
    norms: Vec<f64>,
}

impl<'a> BoundMetric<'a> {
    pub(crate) fn new(set: &'a EmbeddingSet, metric: Metric) -> Result<Self> {
        let norms = match metric {
            Metric::Cosine => {
                let norms: Vec<f64> = (0..set.len()).map(|i| squared_norm(set.point(i))).collect();
                if let Some(zero) = norms.iter().position(|&n| n == 0.0) {
                    return Err(Error::ZeroVector(zero));
                }
                norms
            }
            Metric::Minkowski { .. } => Vec::new(),
        };
        Ok(Self { set, metric, norms })
    }

    #[inline]
    pub(crate) fn key(&self, i: usize, j: usize) -> f64 {
        let norms = if self.norms.is_empty() {
            (0.0, 0.0)
        } else {
            (self.norms[i], self.norms[j])
        };
        self.metric.key(self.set.point(i), self.set.point(j), norms)
    }

    #[inline]
    pub(crate) fn finalize(&self, key: f64) -> f64 {
        self.metric.finalize(key)
    }
}
