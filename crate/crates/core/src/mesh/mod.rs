//! Level-set extraction: leaf surfaces C = c and red-zone surfaces f = 0 as
//! triangle meshes with zone tags, plus red-line polylines.
//!
//! Meshing runs in causal coordinates (X, Y, T) so exported geometry matches
//! the natural Minkowski picture of the family.

mod tables;

use crate::ambient::{causal_inverse, w_at, AmbientPoint, CausalPoint};
use crate::error::Result;
use crate::funcspec::FunctionSpec;
use crate::leafscape::{red_lines, singular_leaves, RedLines};
use crate::metriplectic::{f_at, f_scale};
use rayon::prelude::*;
use std::collections::HashMap;
use tables::TRIANGLE_TABLE;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZoneTag {
    Euclidean,
    Lorentzian,
    RedNear,
    Excluded,
}

impl std::fmt::Display for ZoneTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ZoneTag::Euclidean => write!(f, "euclidean"),
            ZoneTag::Lorentzian => write!(f, "lorentzian"),
            ZoneTag::RedNear => write!(f, "red-near"),
            ZoneTag::Excluded => write!(f, "excluded"),
        }
    }
}

/// Triangle mesh in causal coordinates with per-vertex zone tags.
#[derive(Clone, Debug, Default)]
pub struct Mesh {
    pub vertices: Vec<CausalPoint>,
    pub triangles: Vec<[u32; 3]>,
    pub vertex_tags: Vec<ZoneTag>,
}

/// Axis-aligned bounds in causal coordinates (X, Y, T).
#[derive(Clone, Copy, Debug)]
pub struct GridBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl GridBox {
    pub fn cube(half: f64) -> GridBox {
        GridBox {
            min: [-half; 3],
            max: [half; 3],
        }
    }

    pub fn cell_size(&self, res: usize) -> [f64; 3] {
        [
            (self.max[0] - self.min[0]) / res as f64,
            (self.max[1] - self.min[1]) / res as f64,
            (self.max[2] - self.min[2]) / res as f64,
        ]
    }

    pub fn cell_diagonal(&self, res: usize) -> f64 {
        let d = self.cell_size(res);
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }

    fn node(&self, res: usize, i: usize, j: usize, k: usize) -> [f64; 3] {
        let d = self.cell_size(res);
        [
            self.min[0] + d[0] * i as f64,
            self.min[1] + d[1] * j as f64,
            self.min[2] + d[2] * k as f64,
        ]
    }
}

// Corner offsets and edge endpoints in the usual cube numbering: corners
// 0..3 on the bottom face counterclockwise, 4..7 above them.
const CORNER_OFFSETS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

const EDGE_ENDPOINTS: [[usize; 2]; 12] = [
    [0, 1],
    [1, 2],
    [2, 3],
    [3, 0],
    [4, 5],
    [5, 6],
    [6, 7],
    [7, 4],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

// Each edge keyed by its lower grid node and the axis it runs along.
const EDGE_KEYS: [([usize; 3], u8); 12] = [
    ([0, 0, 0], 0),
    ([1, 0, 0], 1),
    ([0, 1, 0], 0),
    ([0, 0, 0], 1),
    ([0, 0, 1], 0),
    ([1, 0, 1], 1),
    ([0, 1, 1], 0),
    ([0, 0, 1], 1),
    ([0, 0, 0], 2),
    ([1, 0, 0], 2),
    ([1, 1, 0], 2),
    ([0, 1, 0], 2),
];

/// Marching cubes over `{field = 0}` inside the box; `tag` labels each
/// produced vertex. Returns an empty mesh when the field has no sign change.
pub fn mesh_level_set<F, T>(field: F, bx: &GridBox, res: usize, tag: T) -> Mesh
where
    F: Fn([f64; 3]) -> f64 + Sync,
    T: Fn(CausalPoint) -> ZoneTag,
{
    assert!(res >= 2, "grid resolution must be at least 2");
    let n = res + 1;
    let mut values = vec![0.0f64; n * n * n];
    // Slab-parallel sampling: each i-slab owns a disjoint output range.
    values
        .par_chunks_mut(n * n)
        .enumerate()
        .for_each(|(i, slab)| {
            for j in 0..n {
                for k in 0..n {
                    slab[j * n + k] = field(bx.node(res, i, j, k));
                }
            }
        });
    let value = |i: usize, j: usize, k: usize| values[(i * n + j) * n + k];

    let mut mesh = Mesh::default();
    let mut edge_vertices: HashMap<(usize, usize, usize, u8), u32> = HashMap::new();

    for i in 0..res {
        for j in 0..res {
            for k in 0..res {
                let corner_values: [f64; 8] = std::array::from_fn(|c| {
                    let o = CORNER_OFFSETS[c];
                    value(i + o[0], j + o[1], k + o[2])
                });
                let mut case = 0usize;
                for (c, &v) in corner_values.iter().enumerate() {
                    if v < 0.0 {
                        case |= 1 << c;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }
                let mut local = [u32::MAX; 12];
                let tri_row = &TRIANGLE_TABLE[case];
                let mut used = [false; 12];
                for &e in tri_row.iter().take_while(|&&e| e >= 0) {
                    used[e as usize] = true;
                }
                for e in 0..12 {
                    if !used[e] {
                        continue;
                    }
                    let (off, axis) = EDGE_KEYS[e];
                    let key = (i + off[0], j + off[1], k + off[2], axis);
                    let id = *edge_vertices.entry(key).or_insert_with(|| {
                        let [a, b] = EDGE_ENDPOINTS[e];
                        let (oa, ob) = (CORNER_OFFSETS[a], CORNER_OFFSETS[b]);
                        let pa = bx.node(res, i + oa[0], j + oa[1], k + oa[2]);
                        let pb = bx.node(res, i + ob[0], j + ob[1], k + ob[2]);
                        let (va, vb) = (corner_values[a], corner_values[b]);
                        let t = if (vb - va).abs() < 1e-300 {
                            0.5
                        } else {
                            -va / (vb - va)
                        };
                        let t = t.clamp(0.0, 1.0);
                        let p = CausalPoint::new(
                            pa[0] + t * (pb[0] - pa[0]),
                            pa[1] + t * (pb[1] - pa[1]),
                            pa[2] + t * (pb[2] - pa[2]),
                        );
                        let id = mesh.vertices.len() as u32;
                        mesh.vertices.push(p);
                        mesh.vertex_tags.push(tag(p));
                        id
                    });
                    local[e] = id;
                }
                let mut idx = 0;
                while idx < 16 && tri_row[idx] >= 0 {
                    let a = local[tri_row[idx] as usize];
                    let b = local[tri_row[idx + 1] as usize];
                    let c = local[tri_row[idx + 2] as usize];
                    if a != b && b != c && a != c {
                        mesh.triangles.push([a, b, c]);
                    }
                    idx += 3;
                }
            }
        }
    }
    mesh
}

/// Tolerance for tagging a leaf vertex red-near, relative to 1 + x^2 + y^2 + W^2.
pub const RED_NEAR_TOL: f64 = 1e-2;

fn singular_points_in_box(spec: &FunctionSpec, bx: &GridBox) -> Vec<CausalPoint> {
    singular_leaves(spec, (bx.min[0], bx.max[0]))
        .unwrap_or_default()
        .into_iter()
        .map(|z| CausalPoint::new(z, 0.0, 0.0))
        .collect()
}

fn near_singular(p: CausalPoint, sing: &[CausalPoint], radius: f64) -> bool {
    sing.iter().any(|s| {
        let (dx, dy, dt) = (p.x - s.x, p.y - s.y, p.t - s.t);
        dx * dx + dy * dy + dt * dt < radius * radius
    })
}

/// Mesh of the leaf C = c with zone tags from the sign of f. Vertices within
/// two cells of a singular point-leaf are tagged excluded.
pub fn mesh_leaf(spec: &FunctionSpec, c: f64, bx: &GridBox, res: usize) -> Mesh {
    let sing = singular_points_in_box(spec, bx);
    let radius = 2.0 * bx.cell_diagonal(res);
    let field = |q: [f64; 3]| {
        crate::ambient::casimir_at(spec, causal_inverse(CausalPoint::new(q[0], q[1], q[2]))) - c
    };
    let tag = |q: CausalPoint| {
        if near_singular(q, &sing, radius) {
            return ZoneTag::Excluded;
        }
        let p = causal_inverse(q);
        let f = f_at(spec, p);
        if f.abs() < RED_NEAR_TOL * f_scale(p, w_at(spec, p)) {
            ZoneTag::RedNear
        } else if f > 0.0 {
            ZoneTag::Lorentzian
        } else {
            ZoneTag::Euclidean
        }
    };
    mesh_level_set(field, bx, res, tag)
}

/// Mesh of the red zone f = 0, with the point-leaves excluded.
pub fn mesh_red_zone(spec: &FunctionSpec, bx: &GridBox, res: usize) -> Mesh {
    let sing = singular_points_in_box(spec, bx);
    let radius = 2.0 * bx.cell_diagonal(res);
    let field = |q: [f64; 3]| f_at(spec, causal_inverse(CausalPoint::new(q[0], q[1], q[2])));
    let tag = |q: CausalPoint| {
        if near_singular(q, &sing, radius) {
            ZoneTag::Excluded
        } else {
            ZoneTag::RedNear
        }
    };
    mesh_level_set(field, bx, res, tag)
}

/// Connected components by union-find over triangle adjacency, with
/// excluded vertices (and their triangles) removed first.
pub fn component_count(mesh: &Mesh) -> usize {
    let n = mesh.vertices.len();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], mut a: u32) -> u32 {
        while parent[a as usize] != a {
            parent[a as usize] = parent[parent[a as usize] as usize];
            a = parent[a as usize];
        }
        a
    }
    let mut in_surface = vec![false; n];
    for tri in &mesh.triangles {
        if tri
            .iter()
            .any(|&v| mesh.vertex_tags[v as usize] == ZoneTag::Excluded)
        {
            continue;
        }
        for &v in tri {
            in_surface[v as usize] = true;
        }
        for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2])] {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra as usize] = rb;
            }
        }
    }
    let mut roots = Vec::new();
    for v in 0..n as u32 {
        if in_surface[v as usize] {
            let r = find(&mut parent, v);
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
    }
    roots.len()
}

pub type Polyline = Vec<AmbientPoint>;

/// Red lines of the leaf S_c traced in their planes z = z_red by 2D contour
/// marching, projected back onto the leaf by one Newton step.
pub fn red_line_polylines(
    spec: &FunctionSpec,
    c: f64,
    bx: &GridBox,
    res: usize,
) -> Result<Vec<Polyline>> {
    let zs = match red_lines(spec, c, (bx.min[0], bx.max[0]))? {
        RedLines::BadLeaf => return Ok(Vec::new()),
        RedLines::Zeros(zs) => zs,
    };
    let mut out = Vec::new();
    for z_red in zs {
        let field = |yy: f64, tt: f64| {
            crate::ambient::casimir_at(spec, causal_inverse(CausalPoint::new(z_red, yy, tt))) - c
        };
        for chain in contour_lines(&field, (bx.min[1], bx.max[1]), (bx.min[2], bx.max[2]), res) {
            let poly: Polyline = chain
                .into_iter()
                .map(|[yy, tt]| {
                    let p = causal_inverse(CausalPoint::new(z_red, yy, tt));
                    newton_project_once(spec, c, p)
                })
                .collect();
            if poly.len() >= 2 {
                out.push(poly);
            }
        }
    }
    Ok(out)
}

fn newton_project_once(spec: &FunctionSpec, c: f64, p: AmbientPoint) -> AmbientPoint {
    let residual = crate::ambient::casimir_at(spec, p) - c;
    let grad = crate::ambient::casimir_grad(spec, p);
    let n2 = grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2];
    if n2 < 1e-28 {
        return p;
    }
    let s = -residual / n2;
    AmbientPoint::new(p.x + s * grad[0], p.y + s * grad[1], p.z + s * grad[2])
}

/// Marching squares on `{field = 0}` over a 2D box; segments are chained
/// into polylines.
fn contour_lines<F: Fn(f64, f64) -> f64>(
    field: &F,
    (lo0, hi0): (f64, f64),
    (lo1, hi1): (f64, f64),
    res: usize,
) -> Vec<Vec<[f64; 2]>> {
    let n = res + 1;
    let step0 = (hi0 - lo0) / res as f64;
    let step1 = (hi1 - lo1) / res as f64;
    let mut values = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] = field(lo0 + step0 * i as f64, lo1 + step1 * j as f64);
        }
    }
    let value = |i: usize, j: usize| values[i * n + j];

    // Edge-keyed points: ((i, j), horizontal?) with horizontal meaning the
    // edge runs along axis 0.
    let mut points: Vec<[f64; 2]> = Vec::new();
    let mut point_ids: HashMap<(usize, usize, bool), usize> = HashMap::new();
    let mut adjacency: Vec<Vec<usize>> = Vec::new();
    let mut segments: Vec<(usize, usize)> = Vec::new();

    // Local edges of a cell (i, j): 0 bottom, 1 right, 2 top, 3 left.
    let edge_key = |i: usize, j: usize, e: usize| match e {
        0 => (i, j, true),
        1 => (i + 1, j, false),
        2 => (i, j + 1, true),
        _ => (i, j, false),
    };

    for i in 0..res {
        for j in 0..res {
            let c0 = value(i, j);
            let c1 = value(i + 1, j);
            let c2 = value(i + 1, j + 1);
            let c3 = value(i, j + 1);
            let mut case = 0usize;
            for (b, v) in [c0, c1, c2, c3].into_iter().enumerate() {
                if v < 0.0 {
                    case |= 1 << b;
                }
            }
            if case == 0 || case == 15 {
                continue;
            }
            let pairs: &[(usize, usize)] = match case {
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(3, 2)],
                5 => {
                    let center = 0.25 * (c0 + c1 + c2 + c3);
                    if center < 0.0 {
                        &[(3, 2), (0, 1)]
                    } else {
                        &[(3, 0), (1, 2)]
                    }
                }
                10 => {
                    let center = 0.25 * (c0 + c1 + c2 + c3);
                    if center < 0.0 {
                        &[(3, 0), (1, 2)]
                    } else {
                        &[(3, 2), (0, 1)]
                    }
                }
                _ => unreachable!(),
            };
            let corner_vals = [c0, c1, c2, c3];
            // Endpoints of local edge e as corner indices.
            let edge_corners = [(0usize, 1usize), (1, 2), (3, 2), (0, 3)];
            for &(ea, eb) in pairs {
                let mut ids = [0usize; 2];
                for (slot, &e) in [ea, eb].iter().enumerate() {
                    let key = edge_key(i, j, e);
                    ids[slot] = *point_ids.entry(key).or_insert_with(|| {
                        let (ca, cb) = edge_corners[e];
                        let (va, vb) = (corner_vals[ca], corner_vals[cb]);
                        let t = if (vb - va).abs() < 1e-300 {
                            0.5
                        } else {
                            -va / (vb - va)
                        };
                        let t = t.clamp(0.0, 1.0);
                        let corner_pos = |cidx: usize| -> [f64; 2] {
                            let (di, dj) = match cidx {
                                0 => (0, 0),
                                1 => (1, 0),
                                2 => (1, 1),
                                _ => (0, 1),
                            };
                            [lo0 + step0 * (i + di) as f64, lo1 + step1 * (j + dj) as f64]
                        };
                        let pa = corner_pos(ca);
                        let pb = corner_pos(cb);
                        let id = points.len();
                        points.push([pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]);
                        adjacency.push(Vec::new());
                        id
                    });
                }
                if ids[0] != ids[1] {
                    segments.push((ids[0], ids[1]));
                }
            }
        }
    }

    for (si, &(a, b)) in segments.iter().enumerate() {
        adjacency[a].push(si);
        adjacency[b].push(si);
    }
    let mut seg_used = vec![false; segments.len()];
    let mut chains = Vec::new();
    // Open chains first (endpoints of degree one), then remaining cycles.
    let mut starts: Vec<usize> = (0..points.len())
        .filter(|&p| adjacency[p].len() == 1)
        .collect();
    starts.extend(0..points.len());
    for start in starts {
        let first_seg = adjacency[start].iter().copied().find(|&s| !seg_used[s]);
        let Some(mut seg) = first_seg else { continue };
        let mut chain = vec![points[start]];
        let mut here = start;
        loop {
            seg_used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == here { b } else { a };
            chain.push(points[next]);
            here = next;
            match adjacency[here].iter().copied().find(|&s| !seg_used[s]) {
                Some(s) => seg = s,
                None => break,
            }
        }
        if chain.len() >= 2 {
            chains.push(chain);
        }
    }
    chains
}

/// Wavefront OBJ with faces grouped by zone: a face inherits the excluded or
/// red tag of any of its vertices, mixed-signature faces go to the red group.
pub fn write_obj(mesh: &Mesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        out.push_str(&format!("v {:.9} {:.9} {:.9}\n", v.x, v.y, v.t));
    }
    let face_group = |tri: &[u32; 3]| -> &'static str {
        let tags: Vec<ZoneTag> = tri.iter().map(|&v| mesh.vertex_tags[v as usize]).collect();
        if tags.contains(&ZoneTag::Excluded) {
            "excluded"
        } else if tags.contains(&ZoneTag::RedNear) {
            "red"
        } else if tags.iter().all(|&t| t == ZoneTag::Euclidean) {
            "euclidean"
        } else if tags.iter().all(|&t| t == ZoneTag::Lorentzian) {
            "lorentzian"
        } else {
            "red"
        }
    };
    let mut current = "";
    for tri in &mesh.triangles {
        let group = face_group(tri);
        if group != current {
            out.push_str(&format!("g {group}\n"));
            current = group;
        }
        out.push_str(&format!("f {} {} {}\n", tri[0] + 1, tri[1] + 1, tri[2] + 1));
    }
    out
}

/// CSV rows x,y,z per polyline, blank line between polylines.
pub fn polylines_csv(polylines: &[Polyline]) -> String {
    let mut out = String::new();
    for (i, poly) in polylines.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for p in poly {
            out.push_str(&format!("{:.12e},{:.12e},{:.12e}\n", p.x, p.y, p.z));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{casimir_at, causal_transform};

    fn sphere_mesh(res: usize) -> Mesh {
        let field = |q: [f64; 3]| q[0] * q[0] + q[1] * q[1] + q[2] * q[2] - 1.0;
        mesh_level_set(field, &GridBox::cube(1.5), res, |_| ZoneTag::Lorentzian)
    }

    #[test]
    fn sphere_vertices_on_unit_radius() {
        let bx = GridBox::cube(1.5);
        let mesh = sphere_mesh(24);
        assert!(!mesh.vertices.is_empty());
        let tol = bx.cell_diagonal(24) * 2.0;
        for v in &mesh.vertices {
            let r = (v.x * v.x + v.y * v.y + v.t * v.t).sqrt();
            assert!((r - 1.0).abs() < tol, "r = {r}");
        }
        assert_eq!(component_count(&mesh), 1);
    }

    #[test]
    fn sphere_vertex_count_grows_quadratically() {
        let n1 = sphere_mesh(16).vertices.len() as f64;
        let n2 = sphere_mesh(32).vertices.len() as f64;
        let ratio = n2 / n1;
        assert!(ratio > 3.0 && ratio < 5.0, "ratio = {ratio}");
    }

    #[test]
    fn empty_level_set_gives_empty_mesh() {
        let field = |q: [f64; 3]| q[0] * q[0] + 1.0;
        let mesh = mesh_level_set(field, &GridBox::cube(1.0), 8, |_| ZoneTag::Lorentzian);
        assert!(mesh.vertices.is_empty());
        assert!(mesh.triangles.is_empty());
    }

    #[test]
    fn hyperboloid_component_counts() {
        let lin = FunctionSpec::linear();
        let bx = GridBox::cube(3.0);
        // c = 1: one-sheeted hyperboloid, connected.
        let mesh = mesh_leaf(&lin, 1.0, &bx, 48);
        assert!(!mesh.vertices.is_empty());
        assert_eq!(component_count(&mesh), 1);
        // c = -1: two sheets.
        let mesh = mesh_leaf(&lin, -1.0, &bx, 48);
        assert_eq!(component_count(&mesh), 2);
    }

    #[test]
    fn leaf_vertices_satisfy_interpolation_bound() {
        let qua = FunctionSpec::quadratic();
        let bx = GridBox::cube(3.0);
        let res = 48;
        let mesh = mesh_leaf(&qua, 0.0, &bx, res);
        let diag = bx.cell_diagonal(res);
        for v in mesh.vertices.iter().step_by(17) {
            let p = causal_inverse(*v);
            let grad = crate::ambient::casimir_grad(&qua, p);
            let gn = (grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2]).sqrt();
            let c_err = (casimir_at(&qua, p) - 0.0).abs();
            assert!(
                c_err <= diag * gn.max(1.0),
                "err {c_err} vs bound {}",
                diag * gn
            );
        }
    }

    #[test]
    fn leaf_zone_tags() {
        let qua = FunctionSpec::quadratic();
        let bx = GridBox::cube(3.0);
        let mesh = mesh_leaf(&qua, 0.0, &bx, 64);
        let has = |t: ZoneTag| mesh.vertex_tags.iter().any(|&v| v == t);
        assert!(has(ZoneTag::Euclidean));
        assert!(has(ZoneTag::Lorentzian));
        // Red-near vertices cluster at the red lines.
        let zs = red_lines(&qua, 0.0, (-3.0, 3.0)).unwrap();
        let reds = zs.zeros();
        for (v, tag) in mesh.vertices.iter().zip(&mesh.vertex_tags) {
            if *tag == ZoneTag::RedNear {
                let z = v.x;
                assert!(
                    reds.iter().any(|&r| (z - r).abs() < 0.2),
                    "red-near vertex at X = {z}"
                );
            }
        }

        // Good leaf: everything Lorentzian.
        let mesh = mesh_leaf(&qua, 1.0, &bx, 64);
        assert!(mesh
            .vertex_tags
            .iter()
            .all(|&t| t == ZoneTag::Lorentzian || t == ZoneTag::Excluded));

        // Bad leaves: every non-excluded vertex red-near.
        let lin = FunctionSpec::linear();
        let mesh = mesh_leaf(&lin, 0.0, &bx, 64);
        assert!(!mesh.vertices.is_empty());
        assert!(mesh
            .vertex_tags
            .iter()
            .all(|&t| t == ZoneTag::RedNear || t == ZoneTag::Excluded));
    }

    #[test]
    fn red_zone_components_at_low_resolution() {
        let bx = GridBox::cube(3.0);
        let lin = FunctionSpec::linear();
        assert_eq!(component_count(&mesh_red_zone(&lin, &bx, 64)), 2);
        let qua = FunctionSpec::quadratic();
        assert_eq!(component_count(&mesh_red_zone(&qua, &bx, 64)), 2);
    }

    #[test]
    fn poisson_lie_red_zone_branch_structure() {
        // For eta = 1 the red zone solves (xy + 1 + U)^2 = 1 + 2U, two
        // branches that merge along the fold curve at z = -ln(2)/2 where the
        // discriminant vanishes. On a box containing the fold the upper and
        // lower sheets are each connected (2 components); clipping the box
        // past the fold separates the branches into 4.
        let grp = FunctionSpec::poisson_lie(1.0).unwrap();
        let full = GridBox::cube(3.0);
        assert_eq!(component_count(&mesh_red_zone(&grp, &full, 64)), 2);
        let clipped = GridBox {
            min: [-0.3, -3.0, -3.0],
            max: [3.0, 3.0, 3.0],
        };
        assert_eq!(component_count(&mesh_red_zone(&grp, &clipped, 64)), 4);
        // The fold curve T^2 = Y^2 + 1 at z = -ln(2)/2 lies on the zero set.
        let z0 = -0.5 * 2.0f64.ln();
        for yy in [0.0, 1.0, 2.0] {
            let p = causal_inverse(CausalPoint::new(z0, yy, (yy * yy + 1.0).sqrt()));
            assert!(f_at(&grp, p).abs() < 1e-12);
        }
    }

    #[test]
    fn polyline_examples() {
        let qua = FunctionSpec::quadratic();
        let bx = GridBox::cube(3.0);
        let polys = red_line_polylines(&qua, 0.0, &bx, 96).unwrap();
        assert!(!polys.is_empty());
        for poly in &polys {
            for p in poly.iter().step_by(5) {
                let c_err = casimir_at(&qua, *p).abs();
                let scale = 1.0 + p.norm_sq();
                assert!(c_err < 1e-6 * scale, "off-leaf by {c_err}");
            }
        }
        assert!(red_line_polylines(&qua, 1.0, &bx, 64).unwrap().is_empty());
        let lin = FunctionSpec::linear();
        assert!(red_line_polylines(&lin, 1.0, &bx, 64).unwrap().is_empty());
    }

    #[test]
    fn obj_output_shape() {
        let lin = FunctionSpec::linear();
        let mesh = mesh_leaf(&lin, 1.0, &GridBox::cube(3.0), 16);
        let obj = write_obj(&mesh);
        let v_lines = obj.lines().filter(|l| l.starts_with("v ")).count();
        let f_lines = obj.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(v_lines, mesh.vertices.len());
        assert_eq!(f_lines, mesh.triangles.len());
        assert!(obj.contains("g lorentzian"));
        // Face indices must be in range and 1-based.
        for line in obj.lines().filter(|l| l.starts_with("f ")) {
            for tok in line.split_whitespace().skip(1) {
                let idx: usize = tok.parse().unwrap();
                assert!(idx >= 1 && idx <= mesh.vertices.len());
            }
        }
    }

    #[test]
    fn causal_meshing_uses_causal_casimir() {
        // For the linear spec, 2C = X^2 + Y^2 - T^2 in causal coordinates.
        let lin = FunctionSpec::linear();
        let q = CausalPoint::new(0.4, -1.1, 0.8);
        let p = causal_inverse(q);
        let lhs = 2.0 * casimir_at(&lin, p);
        let rhs = q.x * q.x + q.y * q.y - q.t * q.t;
        assert!((lhs - rhs).abs() < 1e-12);
        let _ = causal_transform(p);
    }
}
