//! Binary voxel volumes in the 6-adjacency cubical grid.
//!
//! A [`VoxelGrid`] is a dense occupancy array. Everything outside its bounds
//! is background, so an object touching the bounding box still has a closed
//! boundary surface.

mod io;
mod shapes;

use std::collections::VecDeque;

use thiserror::Error;

pub use io::{detect_format, load_grid, save_grid, GridFormat, RAW_MAGIC};
pub use shapes::{generate_shape, ShapeSpec};

/// Upper bound on the number of cells accepted from a file header.
pub const MAX_CELLS: usize = 1 << 30;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("malformed header at byte {offset}: {message}")]
    Header { offset: usize, message: String },
    #[error("illegal character {found:?} at byte {offset}")]
    IllegalChar { offset: usize, found: char },
    #[error("payload length mismatch at byte {offset}: {message}")]
    Payload { offset: usize, message: String },
    #[error("invalid dimensions {nx}x{ny}x{nz}")]
    Dimensions { nx: usize, ny: usize, nz: usize },
    #[error("invalid shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense binary occupancy volume, x fastest, then y, then z.
#[derive(Clone, PartialEq, Eq)]
pub struct VoxelGrid {
    dims: [usize; 3],
    cells: Vec<bool>,
}

impl std::fmt::Debug for VoxelGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VoxelGrid")
            .field("dims", &self.dims)
            .field("occupied", &self.occupied_count())
            .finish()
    }
}

fn check_dims(nx: usize, ny: usize, nz: usize) -> Result<usize, GridError> {
    let bad = || GridError::Dimensions { nx, ny, nz };
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(bad());
    }
    let len = nx
        .checked_mul(ny)
        .and_then(|v| v.checked_mul(nz))
        .ok_or_else(bad)?;
    if len > MAX_CELLS {
        return Err(bad());
    }
    Ok(len)
}

impl VoxelGrid {
    /// An all-empty grid.
    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self, GridError> {
        let len = check_dims(nx, ny, nz)?;
        Ok(Self {
            dims: [nx, ny, nz],
            cells: vec![false; len],
        })
    }

    pub fn from_cells(dims: [usize; 3], cells: Vec<bool>) -> Result<Self, GridError> {
        let len = check_dims(dims[0], dims[1], dims[2])?;
        if cells.len() != len {
            return Err(GridError::Payload {
                offset: 0,
                message: format!("expected {len} cells, got {}", cells.len()),
            });
        }
        Ok(Self { dims, cells })
    }

    pub fn from_fn(
        nx: usize,
        ny: usize,
        nz: usize,
        mut f: impl FnMut(usize, usize, usize) -> bool,
    ) -> Result<Self, GridError> {
        let mut grid = Self::new(nx, ny, nz)?;
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    if f(x, y, z) {
                        grid.set(x, y, z, true);
                    }
                }
            }
        }
        Ok(grid)
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.occupied_count() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    /// Occupancy of an in-bounds cell. Panics when out of bounds.
    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        assert!(x < self.dims[0] && y < self.dims[1] && z < self.dims[2]);
        self.cells[self.index(x, y, z)]
    }

    /// Occupancy with infinite background padding.
    #[inline]
    pub fn occupied(&self, x: i64, y: i64, z: i64) -> bool {
        if x < 0 || y < 0 || z < 0 {
            return false;
        }
        let (x, y, z) = (x as usize, y as usize, z as usize);
        if x >= self.dims[0] || y >= self.dims[1] || z >= self.dims[2] {
            return false;
        }
        self.cells[self.index(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = self.index(x, y, z);
        self.cells[i] = value;
    }

    /// Cells in serialization order.
    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Applies an axis permutation and reflection. `perm[i]` is the source
    /// axis feeding output axis `i`; `flip[i]` mirrors output axis `i`.
    pub fn transformed(&self, perm: [usize; 3], flip: [bool; 3]) -> VoxelGrid {
        let out_dims = [self.dims[perm[0]], self.dims[perm[1]], self.dims[perm[2]]];
        let mut out =
            VoxelGrid::new(out_dims[0], out_dims[1], out_dims[2]).expect("permuted dims are valid");
        for z in 0..self.dims[2] {
            for y in 0..self.dims[1] {
                for x in 0..self.dims[0] {
                    if !self.get(x, y, z) {
                        continue;
                    }
                    let src = [x, y, z];
                    let mut dst = [0usize; 3];
                    for i in 0..3 {
                        let v = src[perm[i]];
                        dst[i] = if flip[i] { out_dims[i] - 1 - v } else { v };
                    }
                    out.set(dst[0], dst[1], dst[2], true);
                }
            }
        }
        out
    }
}

/// Occupancy summary used to qualify the single-object assumption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct GridStats {
    pub occupied_count: usize,
    pub component_count_6adj: usize,
}

pub fn grid_stats(grid: &VoxelGrid) -> GridStats {
    GridStats {
        occupied_count: grid.occupied_count(),
        component_count_6adj: label_components(grid).1,
    }
}

/// 6-adjacency labels of occupied cells (0 = background) and the component count.
pub fn label_components(grid: &VoxelGrid) -> (Vec<u32>, usize) {
    let [nx, ny, nz] = grid.dims();
    let mut labels = vec![0u32; grid.len()];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..grid.len() {
        if !grid.cells[start] || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let x = i % nx;
            let y = (i / nx) % ny;
            let z = i / (nx * ny);
            let mut visit = |j: usize| {
                if grid.cells[j] && labels[j] == 0 {
                    labels[j] = count;
                    queue.push_back(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < nx {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - nx);
            }
            if y + 1 < ny {
                visit(i + nx);
            }
            if z > 0 {
                visit(i - nx * ny);
            }
            if z + 1 < nz {
                visit(i + nx * ny);
            }
        }
    }
    (labels, count as usize)
}
