//! Curvature-ratio feature vectors and distance matrices for shape
//! similarity.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::surface::SurfaceMesh;

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("empty object: no surface points")]
    EmptyMesh,
    #[error("p must be ≥ 1, got {0}")]
    MinkowskiOrder(f64),
    #[error("unknown metric '{0}' (expected euclid, sq or minkowski:<p>)")]
    UnknownMetric(String),
    #[error("vectors have {0} and {1} components")]
    LengthMismatch(usize, usize),
    #[error("{vectors} vectors but {labels} labels")]
    LabelMismatch { vectors: usize, labels: usize },
    #[error("need at least {0} vectors")]
    TooFew(usize),
    #[error("k must satisfy 1 <= k < {n}, got {k}")]
    NeighborCount { k: usize, n: usize },
    #[error("invalid ratio {0}")]
    Ratio(f64),
}

/// Four-component `(M3, M4, M5, M6)` or six-component
/// `(M3, M4Flat, M4Bent, M5, M6a, M6b)` layout.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FeatureLayout {
    #[default]
    Four,
    Six,
}

impl FromStr for FeatureLayout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "4" | "four" => Ok(FeatureLayout::Four),
            "6" | "six" => Ok(FeatureLayout::Six),
            _ => Err(format!("unknown layout '{s}' (expected four or six)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureVector {
    ratios: Vec<f64>,
    /// Total surface points, non-manifold ones included.
    total: u64,
    raw_counts: Vec<u64>,
    nonmanifold: u64,
}

impl FeatureVector {
    /// Ratios `count / total`.
    pub fn from_counts(
        raw_counts: &[u64],
        total: u64,
        nonmanifold: u64,
    ) -> Result<Self, FeatureError> {
        if total == 0 {
            return Err(FeatureError::EmptyMesh);
        }
        let ratios = raw_counts
            .iter()
            .map(|&c| c as f64 / total as f64)
            .collect();
        Ok(Self {
            ratios,
            total,
            raw_counts: raw_counts.to_vec(),
            nonmanifold,
        })
    }

    /// A vector known only by its ratios (no counts behind it).
    pub fn from_ratios(ratios: Vec<f64>) -> Result<Self, FeatureError> {
        if let Some(&bad) = ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(FeatureError::Ratio(bad));
        }
        Ok(Self {
            raw_counts: Vec::new(),
            ratios,
            total: 0,
            nonmanifold: 0,
        })
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// 0 for vectors built from ratios alone.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn raw_counts(&self) -> &[u64] {
        &self.raw_counts
    }

    pub fn nonmanifold(&self) -> u64 {
        self.nonmanifold
    }

    /// Reported, not assumed to be 1.
    pub fn ratio_sum(&self) -> f64 {
        self.ratios.iter().sum()
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.ratios
    }
}

pub fn feature_vector(
    mesh: &SurfaceMesh,
    layout: FeatureLayout,
) -> Result<FeatureVector, FeatureError> {
    let c = mesh.counts();
    let counts: Vec<u64> = match layout {
        FeatureLayout::Four => c.grouped().iter().map(|&n| n as u64).collect(),
        FeatureLayout::Six => [c.m3, c.m4_flat, c.m4_bent, c.m5, c.m6a, c.m6b]
            .iter()
            .map(|&n| n as u64)
            .collect(),
    };
    FeatureVector::from_counts(&counts, c.total() as u64, c.non_manifold as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Euclid,
    SqEuclid,
    Minkowski(f64),
}

impl Metric {
    pub fn minkowski(p: f64) -> Result<Metric, FeatureError> {
        if p.is_nan() || p < 1.0 {
            return Err(FeatureError::MinkowskiOrder(p));
        }
        Ok(Metric::Minkowski(p))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Euclid => f.write_str("euclid"),
            Metric::SqEuclid => f.write_str("sq_euclid"),
            Metric::Minkowski(p) => write!(f, "minkowski:{p}"),
        }
    }
}

impl FromStr for Metric {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclid" | "euclidean" => Ok(Metric::Euclid),
            "sq" | "sq_euclid" => Ok(Metric::SqEuclid),
            _ => {
                let p = s
                    .strip_prefix("minkowski:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| FeatureError::UnknownMetric(s.to_string()))?;
                Metric::minkowski(p)
            }
        }
    }
}

pub fn distance(a: &[f64], b: &[f64], metric: Metric) -> Result<f64, FeatureError> {
    if a.len() != b.len() {
        return Err(FeatureError::LengthMismatch(a.len(), b.len()));
    }
    let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
    let d = match metric {
        Metric::SqEuclid => diffs.map(|d| d * d).sum(),
        Metric::Euclid => diffs.map(|d| d * d).sum::<f64>().sqrt(),
        Metric::Minkowski(p) => {
            if p.is_nan() || p < 1.0 {
                return Err(FeatureError::MinkowskiOrder(p));
            }
            if p.is_infinite() {
                diffs.fold(0.0, f64::max)
            } else {
                diffs.map(|d| d.powf(p)).sum::<f64>().powf(p.recip())
            }
        }
    };
    Ok(d)
}

/// Symmetric pairwise distances with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
    metric: Metric,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    /// Header row of labels, then `label,d1,…,dn` rows with 9 decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(l);
            for j in 0..self.len() {
                out.push_str(&format!(",{:.9}", self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

pub fn distance_matrix<V: AsRef<[f64]>>(
    vectors: &[V],
    labels: &[String],
    metric: Metric,
) -> Result<DistanceMatrix, FeatureError> {
    if vectors.len() != labels.len() {
        return Err(FeatureError::LabelMismatch {
            vectors: vectors.len(),
            labels: labels.len(),
        });
    }
    if vectors.len() < 2 {
        return Err(FeatureError::TooFew(2));
    }
    let n = vectors.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let d = distance(vectors[i].as_ref(), vectors[j].as_ref(), metric)?;
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix {
        labels: labels.to_vec(),
        values,
        metric,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Neighbor {
    pub label: String,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborList {
    pub label: String,
    pub neighbors: Vec<Neighbor>,
}

/// The `k` nearest other labels per row, ascending; ties by label.
pub fn nearest_neighbors(
    matrix: &DistanceMatrix,
    k: usize,
) -> Result<Vec<NeighborList>, FeatureError> {
    let n = matrix.len();
    if k == 0 || k >= n {
        return Err(FeatureError::NeighborCount { k, n });
    }
    Ok((0..n)
        .map(|i| {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| {
                matrix
                    .get(i, a)
                    .total_cmp(&matrix.get(i, b))
                    .then_with(|| matrix.labels[a].cmp(&matrix.labels[b]))
            });
            NeighborList {
                label: matrix.labels[i].clone(),
                neighbors: others[..k]
                    .iter()
                    .map(|&j| Neighbor {
                        label: matrix.labels[j].clone(),
                        distance: matrix.get(i, j),
                    })
                    .collect(),
            }
        })
        .collect())
}
