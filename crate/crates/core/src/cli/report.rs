use serde::Serialize;

use crate::curvature::{assign_curvatures, genus, total_gaussian};
use crate::features::{feature_vector, FeatureLayout};
use crate::surface::{euler_characteristic, extract_surface, TopologyError, TypeCounts};
use crate::voxgrid::{grid_stats, GridFormat, VoxelGrid};

/// Field order here is the JSON key order.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub input: InputInfo,
    pub surface: SurfaceInfo,
    pub nonmanifold: bool,
    pub eq1: Eq1Check,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub euler_characteristic: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub genus: Option<i64>,
    pub total_gaussian: TotalGaussian,
    pub feature_vector: FeatureInfo,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputInfo {
    pub path: String,
    pub format: &'static str,
    pub dims: [usize; 3],
    pub occupied: usize,
    pub components_6adj: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceInfo {
    pub faces: usize,
    pub vertices: usize,
    pub manifold_edges: usize,
    pub counts: TypeCounts,
    pub nonmanifold_vertices: usize,
    pub edge_defects: usize,
    pub surface_components: usize,
}

/// `|M3| = 8 + |M5| + 2|M6|`, expected exactly for a single closed
/// genus-0 surface.
#[derive(Debug, Clone, Serialize)]
pub struct Eq1Check {
    pub m3: usize,
    pub rhs: usize,
    pub holds: bool,
    pub applicable: bool,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TotalGaussian {
    pub quarter_pi_units: i64,
    pub radians: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeatureInfo {
    pub total_points: u64,
    pub counts: Vec<u64>,
    pub ratios: Vec<f64>,
    pub ratio_sum: f64,
    pub nonmanifold: u64,
}

#[derive(Debug)]
pub enum AnalyzeError {
    EmptyObject,
    Internal(TopologyError),
}

pub fn analyze(
    grid: &VoxelGrid,
    path: &str,
    format: GridFormat,
) -> Result<AnalysisReport, AnalyzeError> {
    let stats = grid_stats(grid);
    if stats.occupied_count == 0 {
        return Err(AnalyzeError::EmptyObject);
    }
    let mesh = extract_surface(grid);
    let field = assign_curvatures(&mesh);
    let counts = *mesh.counts();
    let mut warnings = Vec::new();

    let euler = euler_characteristic(&mesh).ok();
    let genus = match genus(&mesh) {
        Ok(g) => Some(g),
        Err(e) if e.is_internal() => return Err(AnalyzeError::Internal(e)),
        Err(e) => {
            warnings.push(format!("genus omitted: {e}"));
            None
        }
    };
    if stats.component_count_6adj > 1 {
        warnings.push(format!(
            "object has {} 6-connected components",
            stats.component_count_6adj
        ));
    }

    let rhs = 8 + counts.m5 + 2 * counts.m6();
    let applicable = genus == Some(0);
    let note = match genus {
        Some(0) => "single closed genus-0 surface".to_string(),
        Some(g) => format!("surface has genus {g}; equality expected only for genus 0"),
        None if !mesh.is_closed_manifold() => "surface is not a closed 2-manifold".to_string(),
        None => format!("surface has {} components", mesh.surface_components()),
    };

    let fv = feature_vector(&mesh, FeatureLayout::Four).map_err(|_| AnalyzeError::EmptyObject)?;
    let total = total_gaussian(&field);

    Ok(AnalysisReport {
        input: InputInfo {
            path: path.to_string(),
            format: match format {
                GridFormat::Text => "text",
                GridFormat::Raw => "raw",
            },
            dims: grid.dims(),
            occupied: stats.occupied_count,
            components_6adj: stats.component_count_6adj,
        },
        surface: SurfaceInfo {
            faces: mesh.faces().len(),
            vertices: mesh.vertices().len(),
            manifold_edges: mesh.manifold_edge_count(),
            counts,
            nonmanifold_vertices: counts.non_manifold,
            edge_defects: mesh.edge_defects().len(),
            surface_components: mesh.surface_components(),
        },
        nonmanifold: !mesh.is_closed_manifold(),
        eq1: Eq1Check {
            m3: counts.m3,
            rhs,
            holds: counts.m3 == rhs,
            applicable,
            note,
        },
        euler_characteristic: euler,
        genus,
        total_gaussian: TotalGaussian {
            quarter_pi_units: total.quarter_pi_units(),
            radians: total.radians(),
        },
        feature_vector: FeatureInfo {
            total_points: fv.total(),
            counts: fv.raw_counts().to_vec(),
            ratios: fv.ratios().to_vec(),
            ratio_sum: fv.ratio_sum(),
            nonmanifold: fv.nonmanifold(),
        },
        warnings,
    })
}
