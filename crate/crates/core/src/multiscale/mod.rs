//! Region curvature vectors and dyadic curvature maps.
//!
//! A level-0 map sums per-vertex curvature over every surface vertex in a
//! projection column (or keeps the full corner lattice for volume maps).
//! Level `k + 1` sums the up-to-2×2 (2×2×2) children of level `k`, anchored
//! at the origin, so each level holds aggregates over `2^k`-sided blocks.
//! Gaussian maps stay in integer `π/2` units and conserve their total at
//! every level.

mod serialize;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::curvature::{CurvatureField, GaussQ};
use crate::surface::{Axis, VertexType};

pub use serialize::{write_csv, write_pgm, MapFormat};

#[derive(Debug, Error)]
pub enum MultiscaleError {
    #[error("pyramid needs at least one level")]
    ZeroLevels,
    #[error("invalid region: {0}")]
    Region(String),
    #[error("threshold must be a non-negative number, got {0}")]
    Threshold(f64),
    #[error("block size must be a power of two, got {0}")]
    Block(usize),
    #[error("PGM output needs a 2D map")]
    PgmNeeds2d,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Axis-aligned box in vertex coordinates, half-open on the upper bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionSpec {
    min: [i64; 3],
    max: [i64; 3],
}

impl RegionSpec {
    pub fn new(min: [i64; 3], max: [i64; 3]) -> Result<Self, MultiscaleError> {
        if (0..3).any(|a| min[a] >= max[a]) {
            return Err(MultiscaleError::Region(format!(
                "lower bounds {min:?} must be below upper bounds {max:?}"
            )));
        }
        Ok(Self { min, max })
    }

    /// Covers the whole corner lattice of the field.
    pub fn everything(field: &CurvatureField) -> Self {
        let l = field.lattice_dims();
        Self {
            min: [0; 3],
            max: l.map(|n| n as i64),
        }
    }

    #[inline]
    pub fn contains(&self, p: [usize; 3]) -> bool {
        (0..3).all(|a| {
            let v = p[a] as i64;
            self.min[a] <= v && v < self.max[a]
        })
    }
}

/// Region counts `(m3, m4, m5, m6)`; M4 and M6 merge both sub-shapes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CurvatureVector {
    pub m3: u64,
    pub m4: u64,
    pub m5: u64,
    pub m6: u64,
}

impl CurvatureVector {
    pub fn new(m3: u64, m4: u64, m5: u64, m6: u64) -> Self {
        Self { m3, m4, m5, m6 }
    }

    pub fn as_array(&self) -> [u64; 4] {
        [self.m3, self.m4, self.m5, self.m6]
    }
}

pub fn region_vector(field: &CurvatureField, region: &RegionSpec) -> CurvatureVector {
    let mut v = CurvatureVector::default();
    for r in field
        .records()
        .iter()
        .filter(|r| region.contains(r.position))
    {
        match r.vertex_type {
            VertexType::M3 => v.m3 += 1,
            VertexType::M4Flat | VertexType::M4Bent => v.m4 += 1,
            VertexType::M5 => v.m5 += 1,
            VertexType::M6a | VertexType::M6b => v.m6 += 1,
            VertexType::NonManifold => {}
        }
    }
    v
}

/// `g_S = m3·K3 + m5·K5 + m6·K6` in `π/2` units.
pub fn region_total(v: &CurvatureVector) -> GaussQ {
    GaussQ(v.m3 as i64 - v.m5 as i64 - 2 * v.m6 as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Xy,
    Yz,
    Zx,
    Volume,
}

impl Plane {
    /// The plane left after projecting along `axis`.
    pub fn across(axis: Axis) -> Plane {
        match axis {
            Axis::X => Plane::Yz,
            Axis::Y => Plane::Zx,
            Axis::Z => Plane::Xy,
        }
    }

    /// Retained grid axes in map order (first is fastest).
    pub fn axes(self) -> &'static [usize] {
        match self {
            Plane::Xy => &[0, 1],
            Plane::Yz => &[1, 2],
            Plane::Zx => &[2, 0],
            Plane::Volume => &[0, 1, 2],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Plane::Xy => "xy",
            Plane::Yz => "yz",
            Plane::Zx => "zx",
            Plane::Volume => "volume",
        }
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    GaussSum,
    MeanAbsSum,
}

impl MapKind {
    pub fn name(self) -> &'static str {
        match self {
            MapKind::GaussSum => "gauss_sum",
            MapKind::MeanAbsSum => "mean_abs_sum",
        }
    }
}

impl FromStr for MapKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gauss" | "gauss_sum" => Ok(MapKind::GaussSum),
            "meanabs" | "mean_abs" | "mean_abs_sum" => Ok(MapKind::MeanAbsSum),
            _ => Err(format!(
                "unknown map kind '{s}' (expected gauss or meanabs)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapValues {
    /// `π/2` units.
    Gauss(Vec<i64>),
    MeanAbs(Vec<f64>),
}

/// A 2D or 3D grid of curvature aggregates at one dyadic level.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleMap {
    level: u32,
    plane: Plane,
    dims: Vec<usize>,
    values: MapValues,
}

impl ScaleMap {
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn plane(&self) -> Plane {
        self.plane
    }

    pub fn kind(&self) -> MapKind {
        match self.values {
            MapValues::Gauss(_) => MapKind::GaussSum,
            MapValues::MeanAbs(_) => MapKind::MeanAbsSum,
        }
    }

    /// Extent per retained axis, first is fastest.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> &MapValues {
        &self.values
    }

    /// Cell value as a real; Gaussian cells in radians.
    pub fn value(&self, idx: usize) -> f64 {
        match &self.values {
            MapValues::Gauss(v) => GaussQ(v[idx]).radians(),
            MapValues::MeanAbs(v) => v[idx],
        }
    }

    pub fn value_at(&self, coords: &[usize]) -> f64 {
        self.value(self.index_of(coords))
    }

    pub fn index_of(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dims.len());
        coords
            .iter()
            .zip(&self.dims)
            .rev()
            .fold(0, |acc, (&c, &d)| acc * d + c)
    }

    pub fn coords_of(&self, mut idx: usize) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&d| {
                let c = idx % d;
                idx /= d;
                c
            })
            .collect()
    }

    /// Exact total of a Gaussian map.
    pub fn gauss_total(&self) -> Option<GaussQ> {
        match &self.values {
            MapValues::Gauss(v) => Some(GaussQ(v.iter().sum())),
            MapValues::MeanAbs(_) => None,
        }
    }

    /// Sum of all cells (radians for Gaussian maps).
    pub fn total(&self) -> f64 {
        match &self.values {
            MapValues::Gauss(v) => GaussQ(v.iter().sum()).radians(),
            MapValues::MeanAbs(v) => v.iter().sum(),
        }
    }

    /// First cell holding the largest value, in index order.
    pub fn argmax(&self) -> Option<(Vec<usize>, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.len() {
            let v = self.value(i);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, v)| (self.coords_of(i), v))
    }

    /// Next dyadic level: every cell sums its existing 2×…×2 children.
    pub fn coarsen(&self) -> ScaleMap {
        let dims: Vec<usize> = self.dims.iter().map(|d| d.div_ceil(2)).collect();
        let parent = |i: usize| {
            let mut rem = i;
            let mut acc = 0;
            let mut stride = 1;
            for (d, pd) in self.dims.iter().zip(&dims) {
                acc += (rem % d) / 2 * stride;
                rem /= d;
                stride *= pd;
            }
            acc
        };
        let n: usize = dims.iter().product();
        let values = match &self.values {
            MapValues::Gauss(v) => {
                let mut out = vec![0i64; n];
                for (i, x) in v.iter().enumerate() {
                    out[parent(i)] += x;
                }
                MapValues::Gauss(out)
            }
            MapValues::MeanAbs(v) => {
                let mut out = vec![0f64; n];
                for (i, x) in v.iter().enumerate() {
                    out[parent(i)] += x;
                }
                MapValues::MeanAbs(out)
            }
        };
        ScaleMap {
            level: self.level + 1,
            plane: self.plane,
            dims,
            values,
        }
    }

    /// Coarsenings needed until every axis has a single cell.
    pub fn levels_to_top(&self) -> u32 {
        let max = self.dims.iter().copied().max().unwrap_or(1).max(1);
        max.next_power_of_two().trailing_zeros()
    }
}

/// Level-0 map of the given kind. `Plane::Volume` keeps the full lattice.
pub fn project(field: &CurvatureField, kind: MapKind, plane: Plane) -> ScaleMap {
    let lattice = field.lattice_dims();
    let axes = plane.axes();
    let dims: Vec<usize> = axes.iter().map(|&a| lattice[a]).collect();
    let n: usize = dims.iter().product();
    let index = |p: [usize; 3]| {
        axes.iter()
            .zip(&dims)
            .rev()
            .fold(0, |acc, (&a, &d)| acc * d + p[a])
    };
    let values = match kind {
        MapKind::GaussSum => {
            let mut out = vec![0i64; n];
            for r in field.records() {
                out[index(r.position)] += r.curvatures.gauss.0;
            }
            MapValues::Gauss(out)
        }
        MapKind::MeanAbsSum => {
            let mut out = vec![0f64; n];
            for r in field.records() {
                out[index(r.position)] += r.curvatures.mean.abs();
            }
            MapValues::MeanAbs(out)
        }
    };
    ScaleMap {
        level: 0,
        plane,
        dims,
        values,
    }
}

/// Gaussian curvature summed along `axis`.
pub fn gauss_projection_map(field: &CurvatureField, axis: Axis) -> ScaleMap {
    project(field, MapKind::GaussSum, Plane::across(axis))
}

/// Gaussian curvature on the full 3D corner lattice.
pub fn gauss_volume_map(field: &CurvatureField) -> ScaleMap {
    project(field, MapKind::GaussSum, Plane::Volume)
}

/// `|H|` projected along `axis`, then summed over `block × block` cells.
pub fn mean_abs_map(
    field: &CurvatureField,
    axis: Axis,
    block: usize,
) -> Result<ScaleMap, MultiscaleError> {
    if !block.is_power_of_two() {
        return Err(MultiscaleError::Block(block));
    }
    let mut map = project(field, MapKind::MeanAbsSum, Plane::across(axis));
    for _ in 0..block.trailing_zeros() {
        map = map.coarsen();
    }
    Ok(map)
}

#[derive(Debug, Clone)]
pub struct Pyramid {
    pub maps: Vec<ScaleMap>,
    /// Level count asked for, when it exceeded what the base supports.
    pub clamped_from: Option<usize>,
}

/// `levels` maps starting at `base`, all retained. Requests beyond the
/// single-cell top are clamped.
pub fn pyramid(base: &ScaleMap, levels: usize) -> Result<Pyramid, MultiscaleError> {
    if levels == 0 {
        return Err(MultiscaleError::ZeroLevels);
    }
    let supported = base.levels_to_top() as usize + 1;
    let count = levels.min(supported);
    let mut maps = Vec::with_capacity(count);
    maps.push(base.clone());
    for _ in 1..count {
        let next = maps.last().unwrap().coarsen();
        maps.push(next);
    }
    Ok(Pyramid {
        maps,
        clamped_from: (levels > supported).then_some(levels),
    })
}

/// Connected cells with `|value| ≥ threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterestRegion {
    /// Inclusive bounds in map coordinates.
    pub bbox_min: Vec<usize>,
    pub bbox_max: Vec<usize>,
    pub cells: usize,
    pub total: f64,
    /// Cell of largest `|value|`, first in index order.
    pub peak: Vec<usize>,
}

/// Components under 4-adjacency (6-adjacency for volume maps), sorted by
/// descending `|total|`, ties by bounding-box origin.
pub fn interest_regions(
    map: &ScaleMap,
    threshold: f64,
) -> Result<Vec<InterestRegion>, MultiscaleError> {
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(MultiscaleError::Threshold(threshold));
    }
    let n = map.len();
    let hot: Vec<bool> = (0..n).map(|i| map.value(i).abs() >= threshold).collect();
    let mut seen = vec![false; n];
    let mut regions = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if !hot[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut members = Vec::new();
        while let Some(i) = stack.pop() {
            members.push(i);
            let c = map.coords_of(i);
            let mut stride = 1;
            for (a, &d) in map.dims.iter().enumerate() {
                if c[a] > 0 && hot[i - stride] && !seen[i - stride] {
                    seen[i - stride] = true;
                    stack.push(i - stride);
                }
                if c[a] + 1 < d && hot[i + stride] && !seen[i + stride] {
                    seen[i + stride] = true;
                    stack.push(i + stride);
                }
                stride *= d;
            }
        }
        members.sort_unstable();
        let dim = map.dims.len();
        let mut bbox_min = vec![usize::MAX; dim];
        let mut bbox_max = vec![0; dim];
        let mut peak = (members[0], f64::NEG_INFINITY);
        // exact accumulation for Gaussian maps
        let mut units = 0i64;
        let mut total = 0f64;
        for &i in &members {
            let c = map.coords_of(i);
            for a in 0..dim {
                bbox_min[a] = bbox_min[a].min(c[a]);
                bbox_max[a] = bbox_max[a].max(c[a]);
            }
            match &map.values {
                MapValues::Gauss(v) => units += v[i],
                MapValues::MeanAbs(v) => total += v[i],
            }
            let mag = map.value(i).abs();
            if mag > peak.1 {
                peak = (i, mag);
            }
        }
        if let MapValues::Gauss(_) = map.values {
            total = GaussQ(units).radians();
        }
        regions.push(InterestRegion {
            bbox_min,
            bbox_max,
            cells: members.len(),
            total,
            peak: map.coords_of(peak.0),
        });
    }
    regions.sort_by(|a, b| {
        b.total
            .abs()
            .total_cmp(&a.total.abs())
            .then_with(|| a.bbox_min.cmp(&b.bbox_min))
    });
    Ok(regions)
}

#[cfg(test)]
pub(crate) fn map_from_parts(
    level: u32,
    plane: Plane,
    dims: Vec<usize>,
    values: MapValues,
) -> ScaleMap {
    ScaleMap {
        level,
        plane,
        dims,
        values,
    }
}
