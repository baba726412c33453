//! Boundary quad surfaces and digital surface-point classification.
//!
//! Surface points live at grid corners. A corner touches eight cells; the
//! 8-bit occupancy pattern of those cells fixes which of the twelve unit
//! squares meeting at the corner are boundary faces, and that face set
//! decides the point type. The 256-entry lookup table is derived from the
//! face geometry at startup.

use std::fmt;
use std::sync::LazyLock;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::voxgrid::VoxelGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Axis {
        Self::ALL[i]
    }
}

impl std::str::FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            _ => Err(format!("unknown axis '{s}' (expected x, y or z)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Negative,
    Positive,
}

/// Unit square between an occupied cell and an empty 6-neighbour. The
/// outward normal points from `cell` across `(axis, side)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryFace {
    pub cell: [usize; 3],
    pub axis: Axis,
    pub side: Side,
}

impl BoundaryFace {
    /// The four grid corners of the face.
    pub fn corners(&self) -> [[usize; 3]; 4] {
        let a = self.axis.index();
        let (u, v) = ((a + 1) % 3, (a + 2) % 3);
        let mut base = self.cell;
        if self.side == Side::Positive {
            base[a] += 1;
        }
        let mut out = [base; 4];
        out[1][u] += 1;
        out[2][u] += 1;
        out[2][v] += 1;
        out[3][v] += 1;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum VertexType {
    M3,
    M4Flat,
    M4Bent,
    M5,
    M6a,
    M6b,
    NonManifold,
}

impl VertexType {
    pub const MANIFOLD: [VertexType; 6] = [
        VertexType::M3,
        VertexType::M4Flat,
        VertexType::M4Bent,
        VertexType::M5,
        VertexType::M6a,
        VertexType::M6b,
    ];

    /// Number of incident boundary faces, `None` for non-manifold points.
    pub fn face_count(self) -> Option<usize> {
        match self {
            VertexType::M3 => Some(3),
            VertexType::M4Flat | VertexType::M4Bent => Some(4),
            VertexType::M5 => Some(5),
            VertexType::M6a | VertexType::M6b => Some(6),
            VertexType::NonManifold => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VertexType::M3 => "M3",
            VertexType::M4Flat => "M4Flat",
            VertexType::M4Bent => "M4Bent",
            VertexType::M5 => "M5",
            VertexType::M6a => "M6a",
            VertexType::M6b => "M6b",
            VertexType::NonManifold => "NonManifold",
        }
    }
}

impl fmt::Display for VertexType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One of the twelve unit squares meeting at a corner, between local cells
/// `a` and `b` (bit 0 = x, bit 1 = y, bit 2 = z; 0 = cell below the corner).
#[derive(Debug, Clone, Copy)]
struct LocalFace {
    a: u8,
    b: u8,
    axis: usize,
    /// The two corner half-edges `(axis, direction bit)` bounding the square.
    half_edges: [(usize, u8); 2],
}

static LOCAL_FACES: LazyLock<Vec<LocalFace>> = LazyLock::new(|| {
    let mut faces = Vec::with_capacity(12);
    for a in 0u8..8 {
        for axis in 0..3 {
            let b = a ^ (1 << axis);
            if a < b {
                let mut others = (0..3).filter(|&u| u != axis);
                let (u, v) = (others.next().unwrap(), others.next().unwrap());
                faces.push(LocalFace {
                    a,
                    b,
                    axis,
                    half_edges: [(u, (a >> u) & 1), (v, (a >> v) & 1)],
                });
            }
        }
    }
    faces
});

fn boundary_local_faces(pattern: u8) -> impl Iterator<Item = &'static LocalFace> {
    LOCAL_FACES
        .iter()
        .filter(move |f| ((pattern >> f.a) & 1) != ((pattern >> f.b) & 1))
}

/// Derives the type of a corner pattern from its boundary faces.
fn derive_type(pattern: u8) -> Option<VertexType> {
    let faces: Vec<&LocalFace> = boundary_local_faces(pattern).collect();
    if faces.is_empty() {
        return None;
    }
    // faces incident to each of the six half-edges (axis * 2 + direction)
    let mut around: [Vec<usize>; 6] = Default::default();
    for (i, f) in faces.iter().enumerate() {
        for &(axis, dir) in &f.half_edges {
            around[axis * 2 + dir as usize].push(i);
        }
    }
    if around.iter().any(|fs| !(fs.is_empty() || fs.len() == 2)) {
        return Some(VertexType::NonManifold);
    }
    // Every face now has exactly two neighbours, so the faces form disjoint
    // cycles; a single umbrella means one cycle covering all of them.
    let mut seen = vec![false; faces.len()];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for fs in around.iter().filter(|fs| fs.contains(&i)) {
            for &j in fs {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Some(VertexType::NonManifold);
    }
    let mut per_axis = [0usize; 3];
    for f in &faces {
        per_axis[f.axis] += 1;
    }
    let ty = match faces.len() {
        3 => VertexType::M3,
        4 if per_axis.contains(&4) => VertexType::M4Flat,
        4 => VertexType::M4Bent,
        5 => VertexType::M5,
        6 if is_tripod(pattern) || is_tripod(!pattern) => VertexType::M6a,
        6 => VertexType::M6b,
        n => unreachable!("single umbrella with {n} faces"),
    };
    Some(ty)
}

/// A cell together with its three neighbours inside the 2×2×2 block.
fn is_tripod(pattern: u8) -> bool {
    let occ = |c: u8| (pattern >> c) & 1 == 1;
    pattern.count_ones() == 4 && (0..8).any(|c| occ(c) && occ(c ^ 1) && occ(c ^ 2) && occ(c ^ 4))
}

static CLASS_TABLE: LazyLock<[Option<VertexType>; 256]> =
    LazyLock::new(|| std::array::from_fn(|p| derive_type(p as u8)));

/// Classifies a corner from the occupancy of its eight cells. Bit
/// `dx + 2·dy + 4·dz` is the cell whose minimum corner is
/// `corner + (dx − 1, dy − 1, dz − 1)`. `None` means no boundary face
/// touches the corner.
#[inline]
pub fn classify_vertex(pattern: u8) -> Option<VertexType> {
    CLASS_TABLE[pattern as usize]
}

/// Number of boundary faces incident to a corner with this pattern.
pub fn incident_face_count(pattern: u8) -> usize {
    boundary_local_faces(pattern).count()
}

/// Occupancy pattern of the eight cells around grid corner `(x, y, z)`.
#[inline]
pub fn corner_pattern(grid: &VoxelGrid, x: usize, y: usize, z: usize) -> u8 {
    let (x, y, z) = (x as i64, y as i64, z as i64);
    let mut p = 0u8;
    for bit in 0..8u8 {
        let dx = (bit & 1) as i64;
        let dy = ((bit >> 1) & 1) as i64;
        let dz = ((bit >> 2) & 1) as i64;
        if grid.occupied(x - 1 + dx, y - 1 + dy, z - 1 + dz) {
            p |= 1 << bit;
        }
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfaceVertex {
    /// Grid-corner coordinate, `0 ..= n` per axis.
    pub position: [usize; 3],
    pub pattern: u8,
    pub vertex_type: VertexType,
}

impl SurfaceVertex {
    /// Boundary faces meeting at this corner.
    pub fn incident_faces(&self) -> Vec<BoundaryFace> {
        boundary_local_faces(self.pattern)
            .map(|f| {
                let (inside, outside) = if (self.pattern >> f.a) & 1 == 1 {
                    (f.a, f.b)
                } else {
                    (f.b, f.a)
                };
                let cell =
                    std::array::from_fn(|i| self.position[i] + ((inside >> i) & 1) as usize - 1);
                let side = if (outside >> f.axis) & 1 == 1 {
                    Side::Positive
                } else {
                    Side::Negative
                };
                BoundaryFace {
                    cell,
                    axis: Axis::from_index(f.axis),
                    side,
                }
            })
            .collect()
    }
}

/// Per-type vertex counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TypeCounts {
    #[serde(rename = "M3")]
    pub m3: usize,
    #[serde(rename = "M4Flat")]
    pub m4_flat: usize,
    #[serde(rename = "M4Bent")]
    pub m4_bent: usize,
    #[serde(rename = "M5")]
    pub m5: usize,
    #[serde(rename = "M6a")]
    pub m6a: usize,
    #[serde(rename = "M6b")]
    pub m6b: usize,
    #[serde(rename = "NonManifold")]
    pub non_manifold: usize,
}

impl TypeCounts {
    pub fn add(&mut self, ty: VertexType) {
        *self.slot(ty) += 1;
    }

    fn slot(&mut self, ty: VertexType) -> &mut usize {
        match ty {
            VertexType::M3 => &mut self.m3,
            VertexType::M4Flat => &mut self.m4_flat,
            VertexType::M4Bent => &mut self.m4_bent,
            VertexType::M5 => &mut self.m5,
            VertexType::M6a => &mut self.m6a,
            VertexType::M6b => &mut self.m6b,
            VertexType::NonManifold => &mut self.non_manifold,
        }
    }

    pub fn get(&self, ty: VertexType) -> usize {
        let mut c = *self;
        *c.slot(ty)
    }

    pub fn m4(&self) -> usize {
        self.m4_flat + self.m4_bent
    }

    pub fn m6(&self) -> usize {
        self.m6a + self.m6b
    }

    /// `(|M3|, |M4|, |M5|, |M6|)`.
    pub fn grouped(&self) -> [usize; 4] {
        [self.m3, self.m4(), self.m5, self.m6()]
    }

    pub fn manifold_total(&self) -> usize {
        self.m3 + self.m4() + self.m5 + self.m6()
    }

    pub fn total(&self) -> usize {
        self.manifold_total() + self.non_manifold
    }
}

/// A grid edge from `start` to `start + e_axis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GridEdge {
    pub start: [usize; 3],
    pub axis: Axis,
    pub face_count: u8,
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("empty object: no boundary surface")]
    Empty,
    #[error("surface is not a closed 2-manifold: {edge_defects} defective edge(s), {non_manifold} non-manifold vertex(es){sample}")]
    NonManifold {
        edge_defects: usize,
        non_manifold: usize,
        sample: String,
    },
    #[error("surface has {0} connected components, expected 1")]
    MultipleComponents(usize),
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

impl TopologyError {
    /// True for failures that can only come from a classification bug.
    pub fn is_internal(&self) -> bool {
        matches!(self, TopologyError::Inconsistent(_))
    }
}

/// Boundary surface of a voxel object with classified vertices.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    grid_dims: [usize; 3],
    faces: Vec<BoundaryFace>,
    vertices: Vec<SurfaceVertex>,
    counts: TypeCounts,
    edge_defects: Vec<GridEdge>,
    manifold_edges: usize,
    components: usize,
}

impl SurfaceMesh {
    /// Cell dimensions of the source grid.
    pub fn grid_dims(&self) -> [usize; 3] {
        self.grid_dims
    }

    pub fn faces(&self) -> &[BoundaryFace] {
        &self.faces
    }

    /// Vertices sorted by corner position, x fastest.
    pub fn vertices(&self) -> &[SurfaceVertex] {
        &self.vertices
    }

    pub fn counts(&self) -> &TypeCounts {
        &self.counts
    }

    /// Grid edges touching neither 0 nor 2 boundary faces.
    pub fn edge_defects(&self) -> &[GridEdge] {
        &self.edge_defects
    }

    /// Grid edges touching exactly two boundary faces.
    pub fn manifold_edge_count(&self) -> usize {
        self.manifold_edges
    }

    /// Connected components of the face set, joined through shared corners.
    pub fn surface_components(&self) -> usize {
        self.components
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn is_closed_manifold(&self) -> bool {
        self.edge_defects.is_empty() && self.counts.non_manifold == 0
    }

    pub(crate) fn manifold_check(&self) -> Result<(), TopologyError> {
        if self.is_closed_manifold() {
            return Ok(());
        }
        let mut sample = String::new();
        if let Some(e) = self.edge_defects.first() {
            sample.push_str(&format!(
                "; first defective edge at {:?} along {:?} with {} faces",
                e.start, e.axis, e.face_count
            ));
        }
        if let Some(v) = self
            .vertices
            .iter()
            .find(|v| v.vertex_type == VertexType::NonManifold)
        {
            sample.push_str(&format!("; first non-manifold vertex at {:?}", v.position));
        }
        Err(TopologyError::NonManifold {
            edge_defects: self.edge_defects.len(),
            non_manifold: self.counts.non_manifold,
            sample,
        })
    }
}

pub fn extract_surface(grid: &VoxelGrid) -> SurfaceMesh {
    let [nx, ny, nz] = grid.dims();

    let faces: Vec<BoundaryFace> = (0..nz)
        .into_par_iter()
        .flat_map_iter(|z| {
            let mut out = Vec::new();
            for y in 0..ny {
                for x in 0..nx {
                    if !grid.get(x, y, z) {
                        continue;
                    }
                    let c = [x as i64, y as i64, z as i64];
                    for axis in Axis::ALL {
                        for side in [Side::Negative, Side::Positive] {
                            let mut n = c;
                            n[axis.index()] += if side == Side::Positive { 1 } else { -1 };
                            if !grid.occupied(n[0], n[1], n[2]) {
                                out.push(BoundaryFace {
                                    cell: [x, y, z],
                                    axis,
                                    side,
                                });
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();

    let vertices: Vec<SurfaceVertex> = (0..=nz)
        .into_par_iter()
        .flat_map_iter(|z| {
            let mut out = Vec::new();
            for y in 0..=ny {
                for x in 0..=nx {
                    let pattern = corner_pattern(grid, x, y, z);
                    if let Some(vertex_type) = classify_vertex(pattern) {
                        out.push(SurfaceVertex {
                            position: [x, y, z],
                            pattern,
                            vertex_type,
                        });
                    }
                }
            }
            out
        })
        .collect();

    let mut counts = TypeCounts::default();
    for v in &vertices {
        counts.add(v.vertex_type);
    }

    let edges: Vec<GridEdge> = (0..=nz)
        .into_par_iter()
        .flat_map_iter(|z| edges_in_slab(grid, z))
        .collect();
    let manifold_edges = edges.iter().filter(|e| e.face_count == 2).count();
    let edge_defects = edges.into_iter().filter(|e| e.face_count != 2).collect();

    let components = count_surface_components(grid.dims(), &faces, &vertices);

    SurfaceMesh {
        grid_dims: grid.dims(),
        faces,
        vertices,
        counts,
        edge_defects,
        manifold_edges,
        components,
    }
}

/// Edges starting at corners with the given z that touch any boundary face.
fn edges_in_slab(grid: &VoxelGrid, z: usize) -> Vec<GridEdge> {
    let [nx, ny, nz] = grid.dims();
    let mut out = Vec::new();
    for y in 0..=ny {
        for x in 0..=nx {
            let p = [x, y, z];
            for axis in Axis::ALL {
                let a = axis.index();
                if p[a] >= [nx, ny, nz][a] {
                    continue;
                }
                let (u, v) = ((a + 1) % 3, (a + 2) % 3);
                // the four cells around the edge, in cyclic order
                let ring = [(-1i64, -1i64), (0, -1), (0, 0), (-1, 0)].map(|(du, dv)| {
                    let mut c = [x as i64, y as i64, z as i64];
                    c[u] += du;
                    c[v] += dv;
                    grid.occupied(c[0], c[1], c[2])
                });
                let face_count = (0..4).filter(|&i| ring[i] != ring[(i + 1) % 4]).count() as u8;
                if face_count > 0 {
                    out.push(GridEdge {
                        start: p,
                        axis,
                        face_count,
                    });
                }
            }
        }
    }
    out
}

fn count_surface_components(
    dims: [usize; 3],
    faces: &[BoundaryFace],
    vertices: &[SurfaceVertex],
) -> usize {
    if vertices.is_empty() {
        return 0;
    }
    let (cx, cy) = (dims[0] + 1, dims[1] + 1);
    let lattice = |p: [usize; 3]| p[0] + cx * (p[1] + cy * p[2]);
    let mut id = vec![u32::MAX; cx * cy * (dims[2] + 1)];
    for (i, v) in vertices.iter().enumerate() {
        id[lattice(v.position)] = i as u32;
    }
    let mut parent: Vec<u32> = (0..vertices.len() as u32).collect();
    fn find(parent: &mut [u32], mut i: u32) -> u32 {
        while parent[i as usize] != i {
            parent[i as usize] = parent[parent[i as usize] as usize];
            i = parent[i as usize];
        }
        i
    }
    for f in faces {
        let cs = f.corners();
        let r0 = find(&mut parent, id[lattice(cs[0])]);
        for c in &cs[1..] {
            let r = find(&mut parent, id[lattice(*c)]);
            if r != r0 {
                parent[r as usize] = r0;
            }
        }
    }
    (0..vertices.len() as u32)
        .filter(|&i| find(&mut parent, i) == i)
        .count()
}

/// `V − E + F` over corners, two-face edges and boundary faces.
pub fn euler_characteristic(mesh: &SurfaceMesh) -> Result<i64, TopologyError> {
    mesh.manifold_check()?;
    Ok(mesh.vertices.len() as i64 - mesh.manifold_edges as i64 + mesh.faces.len() as i64)
}
