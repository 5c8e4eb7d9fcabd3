//! Marching cubes.
//!
//! The case table is built at first use rather than typed in. On every cube
//! face the inside corners (value at or above the level) are cut off from
//! the outside ones, with diagonal inside corners on a face kept apart. Two
//! cubes sharing a face therefore cut it the same way, which makes the
//! surface watertight without an ambiguity decider. The per-face cuts are
//! chained into loops. Three-vertex loops become one triangle, longer loops
//! a fan around their centroid. Triangles wind counter-clockwise seen from
//! outside, so normals point from inside to outside.
//!
//! The volume is surrounded by a virtual layer of background, so surfaces
//! touching the border are closed too.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::field::ImageField;

/// Corner `c` sits at offset `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`.
const EDGES: [(usize, usize); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

/// Face corners, counter-clockwise seen from outside the cube.
const FACES: [[usize; 4]; 6] = [
    [0, 4, 6, 2],
    [1, 3, 7, 5],
    [0, 1, 5, 4],
    [2, 6, 7, 3],
    [0, 2, 3, 1],
    [4, 5, 7, 6],
];

/// Crossing-edge loops for each of the 256 inside/outside patterns.
fn case_table() -> &'static [Vec<Vec<u8>>] {
    static TABLE: OnceLock<Vec<Vec<Vec<u8>>>> = OnceLock::new();
    TABLE.get_or_init(|| (0..256).map(build_case).collect())
}

fn edge_index(a: usize, b: usize) -> u8 {
    let key = (a.min(b), a.max(b));
    EDGES.iter().position(|&e| e == key).expect("cube edge") as u8
}

fn build_case(case: usize) -> Vec<Vec<u8>> {
    let inside = |c: usize| case >> c & 1 == 1;
    let mut next = [None::<u8>; 12];
    for face in FACES {
        for k in 0..4 {
            if inside(face[k]) && !inside(face[(k + 3) % 4]) {
                let mut end = k;
                while inside(face[(end + 1) % 4]) {
                    end = (end + 1) % 4;
                }
                let entry = edge_index(face[(k + 3) % 4], face[k]);
                let exit = edge_index(face[end], face[(end + 1) % 4]);
                next[entry as usize] = Some(exit);
            }
        }
    }
    let mut loops = Vec::new();
    let mut used = [false; 12];
    for start in 0..12u8 {
        if used[start as usize] || next[start as usize].is_none() {
            continue;
        }
        let mut lp = Vec::new();
        let mut e = start;
        loop {
            used[e as usize] = true;
            lp.push(e);
            e = next[e as usize].expect("loops close on a cube");
            if e == start {
                break;
            }
        }
        loops.push(lp);
    }
    loops
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl Mesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    fn undirected_edges(&self) -> HashMap<(u32, u32), usize> {
        let mut count = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        count
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        let used: HashSet<u32> = self.triangles.iter().flatten().copied().collect();
        used.len() as i64 - self.undirected_edges().len() as i64 + self.triangles.len() as i64
    }

    /// Every edge is shared by exactly two triangles that traverse it in
    /// opposite directions.
    pub fn is_closed(&self) -> bool {
        let mut directed = HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                if !directed.insert((t[k], t[(k + 1) % 3])) {
                    return false;
                }
            }
        }
        directed.iter().all(|&(a, b)| directed.contains(&(b, a)))
    }

    /// Enclosed volume; positive when normals point outward.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                let cross = [
                    b[1] * c[2] - b[2] * c[1],
                    b[2] * c[0] - b[0] * c[2],
                    b[0] * c[1] - b[1] * c[0],
                ];
                (a[0] * cross[0] + a[1] * cross[1] + a[2] * cross[2]) / 6.0
            })
            .sum()
    }

    /// Wavefront OBJ with `v` and `f` records only.
    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }
}

/// Isosurface of a 3-D field at `level`. Vertices are in voxel-index
/// coordinates multiplied by `spacing`.
pub fn isosurface3d(field: &ImageField, level: f64, spacing: [f64; 3]) -> Result<Mesh> {
    if field.ndim() != 3 {
        return Err(Error::InvalidInput(format!(
            "isosurface needs a 3-D field, got {} dimensions",
            field.ndim()
        )));
    }
    let [nx, ny, nz] = [field.extents()[0], field.extents()[1], field.extents()[2]];
    // padded coordinate p maps to voxel p - 1
    let value = |p: [usize; 3]| -> f64 {
        if p[0] == 0 || p[1] == 0 || p[2] == 0 || p[0] > nx || p[1] > ny || p[2] > nz {
            f64::NEG_INFINITY
        } else {
            field.get(&[p[0] - 1, p[1] - 1, p[2] - 1])
        }
    };
    let corner = |origin: [usize; 3], c: usize| {
        [
            origin[0] + (c & 1),
            origin[1] + (c >> 1 & 1),
            origin[2] + (c >> 2 & 1),
        ]
    };

    let table = case_table();
    let mut mesh = Mesh::default();
    let mut cache: HashMap<([usize; 3], u8), u32> = HashMap::new();
    for z in 0..=nz {
        for y in 0..=ny {
            for x in 0..=nx {
                let origin = [x, y, z];
                let values: [f64; 8] = std::array::from_fn(|c| value(corner(origin, c)));
                let case = values
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (c, &v)| acc | ((v >= level) as usize) << c);
                if case == 0 || case == 255 {
                    continue;
                }
                for lp in &table[case] {
                    let ids: Vec<u32> = lp
                        .iter()
                        .map(|&e| {
                            let (a, b) = EDGES[e as usize];
                            let lower = corner(origin, a);
                            let axis = (a ^ b).trailing_zeros() as u8;
                            *cache.entry((lower, axis)).or_insert_with(|| {
                                let (va, vb) = (values[a], values[b]);
                                let t = if va.is_finite() && vb.is_finite() {
                                    ((level - va) / (vb - va)).clamp(1e-6, 1.0 - 1e-6)
                                } else {
                                    0.5
                                };
                                let mut p = [0.0; 3];
                                for (i, slot) in p.iter_mut().enumerate() {
                                    let base = lower[i] as f64 - 1.0;
                                    let step = if i == axis as usize { t } else { 0.0 };
                                    *slot = (base + step) * spacing[i];
                                }
                                mesh.vertices.push(p);
                                (mesh.vertices.len() - 1) as u32
                            })
                        })
                        .collect();
                    if ids.len() == 3 {
                        mesh.triangles.push([ids[0], ids[1], ids[2]]);
                        continue;
                    }
                    // a fan from a loop vertex could put a diagonal on a cube
                    // face, where the neighbouring cube may draw the same edge
                    let n = ids.len() as f64;
                    let mut centre = [0.0; 3];
                    for &i in &ids {
                        for (c, v) in centre.iter_mut().zip(mesh.vertices[i as usize]) {
                            *c += v / n;
                        }
                    }
                    mesh.vertices.push(centre);
                    let hub = (mesh.vertices.len() - 1) as u32;
                    for k in 0..ids.len() {
                        mesh.triangles.push([hub, ids[k], ids[(k + 1) % ids.len()]]);
                    }
                }
            }
        }
    }
    Ok(mesh)
}
