//! Exact digital curvatures per surface-point type.
//!
//! Every boundary face meets a corner at a right angle, so the angular
//! defect at a corner with `k` faces is `2π − k·π/2`. Gaussian curvature is
//! therefore kept as an integer count of `π/2` and all topological checks are
//! exact. Mean curvature uses the closed forms for the cubical Voronoi
//! region; principal curvatures follow from `k = H ± √(H² − K)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::Serialize;

use crate::surface::{euler_characteristic, SurfaceMesh, TopologyError, VertexType};

/// Gaussian curvature as an integer multiple of `π/2`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct GaussQ(pub i64);

impl GaussQ {
    pub const ZERO: GaussQ = GaussQ(0);

    #[inline]
    pub fn quarter_pi_units(self) -> i64 {
        self.0
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0 as f64 * FRAC_PI_2
    }
}

impl Add for GaussQ {
    type Output = GaussQ;
    fn add(self, rhs: GaussQ) -> GaussQ {
        GaussQ(self.0 + rhs.0)
    }
}

impl AddAssign for GaussQ {
    fn add_assign(&mut self, rhs: GaussQ) {
        self.0 += rhs.0;
    }
}

impl Sub for GaussQ {
    type Output = GaussQ;
    fn sub(self, rhs: GaussQ) -> GaussQ {
        GaussQ(self.0 - rhs.0)
    }
}

impl Neg for GaussQ {
    type Output = GaussQ;
    fn neg(self) -> GaussQ {
        GaussQ(-self.0)
    }
}

impl Mul<i64> for GaussQ {
    type Output = GaussQ;
    fn mul(self, rhs: i64) -> GaussQ {
        GaussQ(self.0 * rhs)
    }
}

impl Sum for GaussQ {
    fn sum<I: Iterator<Item = GaussQ>>(iter: I) -> GaussQ {
        GaussQ(iter.map(|g| g.0).sum())
    }
}

/// Curvatures carried by one manifold surface point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Curvatures {
    pub gauss: GaussQ,
    pub mean: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Curvatures {
    fn from_gauss_mean(gauss: GaussQ, mean: f64) -> Self {
        let disc = (mean * mean - gauss.radians()).sqrt();
        Curvatures {
            gauss,
            mean,
            k1: mean + disc,
            k2: mean - disc,
        }
    }
}

/// Closed-form mean curvature per type: `|Σ(x − xᵢ)| / A` with `A = k/4`.
pub fn mean_curvature(ty: VertexType) -> Option<f64> {
    match ty {
        VertexType::M3 => Some(4.0 / 3f64.sqrt()),
        VertexType::M4Flat => Some(0.0),
        VertexType::M4Bent => Some(2f64.sqrt()),
        VertexType::M5 => Some(0.8),
        VertexType::M6a | VertexType::M6b => Some(0.0),
        VertexType::NonManifold => None,
    }
}

/// Angular defect in `π/2` units: `4 − k` for a `k`-face umbrella.
pub fn gauss_curvature(ty: VertexType) -> Option<GaussQ> {
    ty.face_count().map(|k| GaussQ(4 - k as i64))
}

impl VertexType {
    /// `None` for non-manifold points, which carry no curvature.
    pub fn curvatures(self) -> Option<Curvatures> {
        Some(Curvatures::from_gauss_mean(
            gauss_curvature(self)?,
            mean_curvature(self)?,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VertexCurvature {
    pub position: [usize; 3],
    pub vertex_type: VertexType,
    #[serde(flatten)]
    pub curvatures: Curvatures,
}

/// Curvature records for every manifold surface vertex.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    grid_dims: [usize; 3],
    records: Vec<VertexCurvature>,
    excluded: usize,
}

impl CurvatureField {
    /// Builds a field from explicit records, e.g. a hand-made region.
    pub fn from_records(grid_dims: [usize; 3], records: Vec<VertexCurvature>) -> Self {
        Self {
            grid_dims,
            records,
            excluded: 0,
        }
    }

    /// Records in vertex order (x fastest).
    pub fn records(&self) -> &[VertexCurvature] {
        &self.records
    }

    /// Non-manifold vertices left out of the field.
    pub fn excluded(&self) -> usize {
        self.excluded
    }

    pub fn grid_dims(&self) -> [usize; 3] {
        self.grid_dims
    }

    /// Corner-lattice extent, one more than the cell count per axis.
    pub fn lattice_dims(&self) -> [usize; 3] {
        self.grid_dims.map(|n| n + 1)
    }
}

pub fn assign_curvatures(mesh: &SurfaceMesh) -> CurvatureField {
    let mut records = Vec::with_capacity(mesh.vertices().len());
    let mut excluded = 0;
    for v in mesh.vertices() {
        match v.vertex_type.curvatures() {
            Some(curvatures) => records.push(VertexCurvature {
                position: v.position,
                vertex_type: v.vertex_type,
                curvatures,
            }),
            None => excluded += 1,
        }
    }
    CurvatureField {
        grid_dims: mesh.grid_dims(),
        records,
        excluded,
    }
}

/// Total Gaussian curvature of the field.
pub fn total_gaussian(field: &CurvatureField) -> GaussQ {
    field.records.iter().map(|r| r.curvatures.gauss).sum()
}

/// Genus from type counts, `1 + (|M5| + 2|M6| − |M3|) / 8`, cross-checked
/// against `(2 − χ) / 2`.
pub fn genus(mesh: &SurfaceMesh) -> Result<i64, TopologyError> {
    if mesh.is_empty() {
        return Err(TopologyError::Empty);
    }
    mesh.manifold_check()?;
    if mesh.surface_components() != 1 {
        return Err(TopologyError::MultipleComponents(mesh.surface_components()));
    }
    let c = mesh.counts();
    let excess = c.m5 as i64 + 2 * c.m6() as i64 - c.m3 as i64;
    if excess.rem_euclid(8) != 0 {
        return Err(TopologyError::Inconsistent(format!(
            "|M5| + 2|M6| - |M3| = {excess} is not divisible by 8"
        )));
    }
    let g = 1 + excess / 8;
    let chi = euler_characteristic(mesh)?;
    if 2 * (1 - g) != chi {
        return Err(TopologyError::Inconsistent(format!(
            "type-count genus {g} disagrees with Euler characteristic {chi}"
        )));
    }
    Ok(g)
}

/// Total geodesic curvature of the boundary of a simply connected region
/// with the given total Gaussian curvature: `2π − g_S`. Simple connectivity
/// is the caller's responsibility.
pub fn region_boundary_geodesic(region_total: GaussQ) -> f64 {
    2.0 * PI - region_total.radians()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::extract_surface;
    use crate::voxgrid::{generate_shape, VoxelGrid};

    fn mesh_of(s: &str) -> SurfaceMesh {
        extract_surface(&generate_shape(&s.parse().unwrap()).unwrap())
    }

    fn c(t: VertexType) -> Curvatures {
        t.curvatures().unwrap()
    }

    #[test]
    fn m3_principal() {
        let k = c(VertexType::M3);
        assert_eq!(k.gauss, GaussQ(1));
        assert!((k.k1 - 4.24913).abs() < 5e-6);
        assert!((k.k2 - 0.369675).abs() < 5e-6);
    }

    #[test]
    fn m4_principal() {
        let f = c(VertexType::M4Flat);
        assert_eq!((f.gauss, f.mean, f.k1, f.k2), (GaussQ(0), 0.0, 0.0, 0.0));
        let b = c(VertexType::M4Bent);
        assert_eq!(b.gauss, GaussQ(0));
        assert!((b.k1 - 2.82843).abs() < 5e-6);
        assert!(b.k2.abs() < 1e-12);
    }

    #[test]
    fn m5_principal() {
        let k = c(VertexType::M5);
        assert_eq!(k.gauss, GaussQ(-1));
        assert!((k.k1 - 2.28687).abs() < 5e-6);
        assert!((k.k2 + 0.686875).abs() < 5e-6);
    }

    #[test]
    fn m6_principal() {
        for t in [VertexType::M6a, VertexType::M6b] {
            let k = c(t);
            assert_eq!(k.gauss, GaussQ(-2));
            assert!((k.k1 - 1.77245).abs() < 5e-6);
            assert!((k.k2 + 1.77245).abs() < 5e-6);
            assert_eq!(k.k1, PI.sqrt());
        }
    }

    #[test]
    fn non_manifold_has_no_curvature() {
        assert!(VertexType::NonManifold.curvatures().is_none());
    }

    #[test]
    fn principal_algebra() {
        for t in VertexType::MANIFOLD {
            let k = c(t);
            assert!((k.k1 * k.k2 - k.gauss.radians()).abs() < 1e-12, "{t}");
            assert!(((k.k1 + k.k2) / 2.0 - k.mean).abs() < 1e-12, "{t}");
            assert!(k.k1 >= k.k2);
        }
    }

    #[test]
    fn mean_ordering() {
        let h = |t| mean_curvature(t).unwrap();
        assert!(h(VertexType::M3) > h(VertexType::M4Bent));
        assert!(h(VertexType::M4Bent) > h(VertexType::M5));
        assert!(h(VertexType::M5) > h(VertexType::M6a));
        assert_eq!(h(VertexType::M6a), 0.0);
    }

    #[test]
    fn totals() {
        let t = |s| total_gaussian(&assign_curvatures(&mesh_of(s)));
        assert_eq!(t("cube:1"), GaussQ(8));
        assert!((t("cube:1").radians() - 4.0 * PI).abs() < 1e-12);
        assert_eq!(t("cube:2"), GaussQ(8));
        assert_eq!(t("torus:4,1"), GaussQ(0));
    }

    #[test]
    fn genus_values() {
        assert_eq!(genus(&mesh_of("sphere:5")).unwrap(), 0);
        assert_eq!(genus(&mesh_of("torus:4,1")).unwrap(), 1);
        assert_eq!(genus(&mesh_of("cube:1")).unwrap(), 0);
    }

    #[test]
    fn genus_preconditions() {
        let empty = extract_surface(&VoxelGrid::new(2, 2, 2).unwrap());
        assert!(matches!(genus(&empty), Err(TopologyError::Empty)));
        let pair = extract_surface(&VoxelGrid::from_fn(3, 1, 1, |x, _, _| x != 1).unwrap());
        assert!(matches!(
            genus(&pair),
            Err(TopologyError::MultipleComponents(2))
        ));
        let diag =
            extract_surface(&VoxelGrid::from_fn(2, 2, 2, |x, y, z| x == y && y == z).unwrap());
        let err = genus(&diag).unwrap_err();
        assert!(matches!(err, TopologyError::NonManifold { .. }));
        assert!(!err.is_internal());
    }

    #[test]
    fn excluded_count_matches_mesh() {
        let g = VoxelGrid::from_fn(2, 2, 1, |x, y, _| x == y).unwrap();
        let m = extract_surface(&g);
        let f = assign_curvatures(&m);
        assert_eq!(f.excluded(), m.counts().non_manifold);
        assert_eq!(f.records().len() + f.excluded(), m.vertices().len());
    }

    #[test]
    fn geodesic_values() {
        assert!((region_boundary_geodesic(GaussQ(0)) - 2.0 * PI).abs() < 1e-12);
        assert!((region_boundary_geodesic(GaussQ(8)) + 2.0 * PI).abs() < 1e-12);
        assert!(region_boundary_geodesic(GaussQ(4)).abs() < 1e-12);
    }
}
