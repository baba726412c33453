//! Deterministic synthetic fixtures.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GridError, VoxelGrid};

/// Largest edge length of a single box in a blob walk.
const BLOB_MAX_BOX: i64 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeSpec {
    Cube(usize),
    Box(usize, usize, usize),
    Sphere(usize),
    Torus {
        major: usize,
        tube: usize,
    },
    Blob {
        seed: u64,
        steps: usize,
    },
    /// Plate `w × w × h` with a hemispherical bump of radius `bump` on top.
    BumpPlate {
        w: usize,
        h: usize,
        bump: usize,
    },
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Cube(a) => write!(f, "cube:{a}"),
            Self::Box(a, b, c) => write!(f, "box:{a},{b},{c}"),
            Self::Sphere(r) => write!(f, "sphere:{r}"),
            Self::Torus { major, tube } => write!(f, "torus:{major},{tube}"),
            Self::Blob { seed, steps } => write!(f, "blob:{seed},{steps}"),
            Self::BumpPlate { w, h, bump } => write!(f, "bump_plate:{w},{h},{bump}"),
        }
    }
}

impl FromStr for ShapeSpec {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| GridError::Shape(format!("'{s}': {msg}"));
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| bad("expected <shape>:<params>"))?;
        let nums: Vec<u64> = args
            .split(',')
            .map(|a| a.trim().parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("parameters must be non-negative integers"))?;
        let want = |n: usize| {
            if nums.len() == n {
                Ok(())
            } else {
                Err(bad(&format!("expected {n} parameter(s)")))
            }
        };
        let u = |i: usize| nums[i] as usize;
        let spec = match name {
            "cube" => {
                want(1)?;
                Self::Cube(u(0))
            }
            "box" => {
                want(3)?;
                Self::Box(u(0), u(1), u(2))
            }
            "sphere" => {
                want(1)?;
                Self::Sphere(u(0))
            }
            "torus" => {
                want(2)?;
                Self::Torus {
                    major: u(0),
                    tube: u(1),
                }
            }
            "blob" => {
                want(2)?;
                Self::Blob {
                    seed: nums[0],
                    steps: u(1),
                }
            }
            "bump_plate" | "bump-plate" => {
                want(3)?;
                Self::BumpPlate {
                    w: u(0),
                    h: u(1),
                    bump: u(2),
                }
            }
            _ => return Err(bad("unknown shape")),
        };
        Ok(spec)
    }
}

pub fn generate_shape(spec: &ShapeSpec) -> Result<VoxelGrid, GridError> {
    let invalid = |msg: &str| Err(GridError::Shape(format!("{spec}: {msg}")));
    match *spec {
        ShapeSpec::Cube(a) => {
            if a == 0 {
                return invalid("size must be >= 1");
            }
            VoxelGrid::from_fn(a, a, a, |_, _, _| true)
        }
        ShapeSpec::Box(a, b, c) => {
            if a == 0 || b == 0 || c == 0 {
                return invalid("sizes must be >= 1");
            }
            VoxelGrid::from_fn(a, b, c, |_, _, _| true)
        }
        ShapeSpec::Sphere(r) => {
            if r == 0 {
                return invalid("radius must be >= 1");
            }
            let n = 2 * r + 1;
            let r2 = (r * r) as i64;
            let c = r as i64;
            VoxelGrid::from_fn(n, n, n, |x, y, z| {
                let (dx, dy, dz) = (x as i64 - c, y as i64 - c, z as i64 - c);
                dx * dx + dy * dy + dz * dz <= r2
            })
        }
        ShapeSpec::Torus { major, tube } => {
            if tube == 0 || major <= tube {
                return invalid("requires major > tube >= 1");
            }
            let n = 2 * (major + tube) + 1;
            let c = (major + tube) as f64;
            let (rm, rt) = (major as f64, tube as f64);
            VoxelGrid::from_fn(n, n, 2 * tube + 1, |x, y, z| {
                let rho = (x as f64 - c).hypot(y as f64 - c);
                let dz = z as f64 - rt;
                (rho - rm).powi(2) + dz * dz <= rt * rt + 1e-9
            })
        }
        ShapeSpec::Blob { seed, steps } => {
            if steps == 0 {
                return invalid("steps must be >= 1");
            }
            Ok(blob(seed, steps))
        }
        ShapeSpec::BumpPlate { w, h, bump } => {
            if w == 0 || h == 0 || bump == 0 {
                return invalid("sizes must be >= 1");
            }
            if w < 2 * bump + 1 {
                return invalid("plate width must be >= 2 * bump + 1");
            }
            let c = (w / 2) as i64;
            let base = h as i64 - 1;
            let r2 = (bump * bump) as i64;
            VoxelGrid::from_fn(w, w, h + bump, |x, y, z| {
                if z < h {
                    return true;
                }
                let (dx, dy, dz) = (x as i64 - c, y as i64 - c, z as i64 - base);
                dx * dx + dy * dy + dz * dz <= r2
            })
        }
    }
}

/// Random walk of boxes, each overlapping its predecessor, cropped to the
/// bounding box of the union. The union is 6-connected by construction.
fn blob(seed: u64, steps: usize) -> VoxelGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: BTreeSet<[i64; 3]> = BTreeSet::new();
    let mut prev_min = [0i64; 3];
    let mut prev_size = [1i64; 3];
    for step in 0..steps {
        let size: [i64; 3] = std::array::from_fn(|_| rng.gen_range(1..=BLOB_MAX_BOX));
        let min: [i64; 3] = if step == 0 {
            [0; 3]
        } else {
            std::array::from_fn(|a| {
                let anchor = prev_min[a] + rng.gen_range(0..prev_size[a]);
                anchor - rng.gen_range(0..size[a])
            })
        };
        for z in 0..size[2] {
            for y in 0..size[1] {
                for x in 0..size[0] {
                    cells.insert([min[0] + x, min[1] + y, min[2] + z]);
                }
            }
        }
        prev_min = min;
        prev_size = size;
    }
    let lo: [i64; 3] = std::array::from_fn(|a| cells.iter().map(|c| c[a]).min().unwrap());
    let hi: [i64; 3] = std::array::from_fn(|a| cells.iter().map(|c| c[a]).max().unwrap());
    let dims: [usize; 3] = std::array::from_fn(|a| (hi[a] - lo[a] + 1) as usize);
    let mut grid = VoxelGrid::new(dims[0], dims[1], dims[2]).expect("blob extent is bounded");
    for c in &cells {
        grid.set(
            (c[0] - lo[0]) as usize,
            (c[1] - lo[1]) as usize,
            (c[2] - lo[2]) as usize,
            true,
        );
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxgrid::grid_stats;

    fn gen(s: &str) -> VoxelGrid {
        generate_shape(&s.parse().unwrap()).unwrap()
    }

    #[test]
    fn parses_and_displays() {
        for s in [
            "cube:3",
            "box:2,3,4",
            "sphere:5",
            "torus:4,1",
            "blob:7,20",
            "bump_plate:21,2,6",
        ] {
            assert_eq!(s.parse::<ShapeSpec>().unwrap().to_string(), s);
        }
        assert!("cube".parse::<ShapeSpec>().is_err());
        assert!("cube:1,2".parse::<ShapeSpec>().is_err());
        assert!("cone:3".parse::<ShapeSpec>().is_err());
        assert!("cube:-1".parse::<ShapeSpec>().is_err());
    }

    #[test]
    fn degenerate_cube() {
        let g = gen("cube:1");
        assert_eq!(g.dims(), [1, 1, 1]);
        assert!(g.get(0, 0, 0));
    }

    #[test]
    fn invalid_parameters() {
        for s in [
            "cube:0",
            "box:1,0,1",
            "sphere:0",
            "torus:1,1",
            "torus:3,0",
            "blob:1,0",
        ] {
            assert!(generate_shape(&s.parse().unwrap()).is_err(), "{s}");
        }
        assert!(generate_shape(&"bump_plate:4,1,2".parse().unwrap()).is_err());
    }

    #[test]
    fn blob_is_deterministic_and_connected() {
        assert_eq!(gen("blob:7,20"), gen("blob:7,20"));
        assert_ne!(gen("blob:7,20"), gen("blob:8,20"));
        for seed in 0..30 {
            let g = gen(&format!("blob:{seed},12"));
            assert_eq!(grid_stats(&g).component_count_6adj, 1);
        }
    }

    #[test]
    fn sphere_contains_axis_tips_only() {
        let g = gen("sphere:3");
        assert_eq!(g.dims(), [7, 7, 7]);
        assert!(g.get(6, 3, 3));
        assert!(!g.get(6, 4, 3));
        assert!(g.get(3, 3, 3));
    }

    #[test]
    fn sphere_has_all_48_symmetries() {
        let g = gen("sphere:6");
        for perm in [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ] {
            for mask in 0..8u8 {
                let flip = [mask & 1 != 0, mask & 2 != 0, mask & 4 != 0];
                assert_eq!(g.transformed(perm, flip), g);
            }
        }
    }

    /// Through-hole oracle: the centre column is empty, and in the mid slice
    /// the empty cells split into an inside and an outside region.
    #[test]
    fn torus_has_one_component_and_a_through_hole() {
        let g = gen("torus:4,1");
        assert_eq!(grid_stats(&g).component_count_6adj, 1);
        let [nx, ny, nz] = g.dims();
        let (cx, cy) = (nx / 2, ny / 2);
        assert!((0..nz).all(|z| !g.get(cx, cy, z)));

        let mid = nz / 2;
        // complement of the padded mid slice, 4-adjacency
        let (w, h) = (nx + 2, ny + 2);
        let empty = |x: usize, y: usize| {
            x == 0 || y == 0 || x == w - 1 || y == h - 1 || !g.get(x - 1, y - 1, mid)
        };
        let mut seen = vec![false; w * h];
        let mut regions = 0;
        for start in 0..w * h {
            if seen[start] || !empty(start % w, start / w) {
                continue;
            }
            regions += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(i) = stack.pop() {
                let (x, y) = (i % w, i / w);
                let mut push = |nx: usize, ny: usize| {
                    let j = nx + ny * w;
                    if !seen[j] && empty(nx, ny) {
                        seen[j] = true;
                        stack.push(j);
                    }
                };
                if x > 0 {
                    push(x - 1, y);
                }
                if x + 1 < w {
                    push(x + 1, y);
                }
                if y > 0 {
                    push(x, y - 1);
                }
                if y + 1 < h {
                    push(x, y + 1);
                }
            }
        }
        assert_eq!(regions, 2);
    }

    #[test]
    fn bump_plate_layout() {
        let g = gen("bump_plate:21,2,6");
        assert_eq!(g.dims(), [21, 21, 8]);
        assert!(g.get(0, 0, 0) && g.get(20, 20, 1));
        assert!(!g.get(0, 0, 2));
        assert!(g.get(10, 10, 7));
        assert!(!g.get(10, 11, 7));
        assert_eq!(grid_stats(&g).component_count_6adj, 1);
    }
}
