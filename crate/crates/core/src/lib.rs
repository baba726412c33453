//! Exact digital curvature analysis of binary voxel objects.
//!
//! The pipeline is: load or generate a [`VoxelGrid`], extract its boundary
//! [`SurfaceMesh`] with classified corner points, assign per-point
//! curvatures, then aggregate them into genus, multi-scale maps or
//! curvature-ratio feature vectors.
//!
//! ```
//! use voxcurv::prelude::*;
//!
//! let grid = generate_shape(&"torus:4,1".parse().unwrap()).unwrap();
//! let mesh = extract_surface(&grid);
//! assert_eq!(genus(&mesh).unwrap(), 1);
//! assert_eq!(total_gaussian(&assign_curvatures(&mesh)), GaussQ(0));
//! ```

pub mod cli;
pub mod curvature;
pub mod features;
pub mod multiscale;
pub mod surface;
pub mod voxgrid;

pub mod prelude {
    pub use crate::curvature::{
        assign_curvatures, genus, region_boundary_geodesic, total_gaussian, CurvatureField, GaussQ,
    };
    pub use crate::features::{
        distance, distance_matrix, feature_vector, nearest_neighbors, DistanceMatrix,
        FeatureLayout, FeatureVector, Metric,
    };
    pub use crate::multiscale::{
        gauss_projection_map, interest_regions, mean_abs_map, pyramid, region_total, region_vector,
        CurvatureVector, RegionSpec, ScaleMap,
    };
    pub use crate::surface::{
        classify_vertex, euler_characteristic, extract_surface, Axis, SurfaceMesh, VertexType,
    };
    pub use crate::voxgrid::{
        generate_shape, grid_stats, load_grid, save_grid, GridFormat, ShapeSpec, VoxelGrid,
    };
}

pub use curvature::{CurvatureField, GaussQ};
pub use surface::SurfaceMesh;
pub use voxgrid::VoxelGrid;
