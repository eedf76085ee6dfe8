//! Procedural meshes used by tests, benchmarks and the command-line tool.

use std::collections::HashMap;

use super::{MeshData, TriangleMesh, Vec3};

/// Regular tetrahedron inscribed in the cube `[-1, 1]³`, outward-facing.
pub fn tetrahedron_data() -> MeshData {
    MeshData {
        vertices: vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]],
        faces: vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]],
    }
}

pub fn tetrahedron() -> TriangleMesh {
    TriangleMesh::from_data(tetrahedron_data()).expect("tetrahedron is valid")
}

fn normalize(p: Vec3, radius: f64) -> Vec3 {
    let len = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] * radius / len, p[1] * radius / len, p[2] * radius / len]
}

/// Subdivided icosahedron projected to a sphere of the given radius.
///
/// `subdivisions = 4` gives 2562 vertices and 5120 faces; `5` gives 10242
/// vertices.
pub fn icosphere_data(subdivisions: u32, radius: f64) -> MeshData {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .into_iter()
    .map(|p| normalize(p, radius))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push(normalize(
                    [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0],
                    radius,
                ));
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    MeshData { vertices, faces }
}

pub fn icosphere(subdivisions: u32, radius: f64) -> TriangleMesh {
    TriangleMesh::from_data(icosphere_data(subdivisions, radius)).expect("icosphere is valid")
}

/// Six unit equilateral triangles around a centre vertex (index 0) in the
/// plane `z = 0`. Has a boundary.
pub fn hexagon_patch() -> TriangleMesh {
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    for k in 0..6 {
        let a = std::f64::consts::PI / 3.0 * k as f64;
        vertices.push([a.cos(), a.sin(), 0.0]);
    }
    let faces = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
    TriangleMesh::with_boundary(vertices, faces).expect("hexagon is valid")
}

/// `nx × ny` cells of the rectangle `[0, nx·h] × [0, ny·h]`, each split
/// along the same diagonal. Vertex `(i, j)` has index `j·(nx+1) + i`.
pub fn grid_patch(nx: usize, ny: usize, h: f64) -> TriangleMesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([i as f64 * h, j as f64 * h, 0.0]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriangleMesh::with_boundary(vertices, faces).expect("grid is valid")
}

/// Closed flat torus: the `nx × ny` grid with opposite sides identified,
/// embedded as a torus of revolution with radii `major` and `minor`.
pub fn torus(nx: usize, ny: usize, major: f64, minor: f64) -> TriangleMesh {
    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let v = 2.0 * std::f64::consts::PI * j as f64 / ny as f64;
        for i in 0..nx {
            let u = 2.0 * std::f64::consts::PI * i as f64 / nx as f64;
            let r = major + minor * v.cos();
            vertices.push([r * u.cos(), r * u.sin(), minor * v.sin()]);
        }
    }
    let id = |i: usize, j: usize| (j % ny) * nx + (i % nx);
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriangleMesh::new(vertices, faces).expect("torus is valid")
}

/// Proper rotation from a unit quaternion `(w, x, y, z)` (normalized here).
pub fn rotation_from_quaternion(q: [f64; 4]) -> [[f64; 3]; 3] {
    let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    let [w, x, y, z] = [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

/// Procedural mesh named by `spec`, or `None` if `spec` names no builtin.
///
/// Accepted forms: `icosphere:<level>[:<radius>]`,
/// `torus:<nx>:<ny>[:<major>:<minor>]` and `tetrahedron`.
pub fn builtin(spec: &str) -> Option<Result<MeshData, String>> {
    let mut parts = spec.trim().split(':');
    let kind = parts.next()?;
    let args: Vec<&str> = parts.collect();
    let num = |i: usize, default: f64| -> Result<f64, String> {
        match args.get(i) {
            None => Ok(default),
            Some(a) => a
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| format!("`{a}` is not a positive number in `{spec}`")),
        }
    };
    let count = |i: usize, lo: usize, hi: usize| -> Result<usize, String> {
        let a = args
            .get(i)
            .ok_or_else(|| format!("`{spec}` is missing argument {}", i + 1))?;
        a.parse::<usize>()
            .ok()
            .filter(|v| (lo..=hi).contains(v))
            .ok_or_else(|| format!("`{a}` must be an integer in {lo}..={hi} in `{spec}`"))
    };
    let data = match kind {
        "icosphere" => (|| {
            if args.len() > 2 {
                return Err(format!("too many arguments in `{spec}`"));
            }
            let level = count(0, 0, 7)? as u32;
            Ok(icosphere_data(level, num(1, 1.0)?))
        })(),
        "torus" => (|| {
            if args.len() != 2 && args.len() != 4 {
                return Err(format!("expected torus:<nx>:<ny>[:<major>:<minor>], got `{spec}`"));
            }
            let (nx, ny) = (count(0, 3, 4096)?, count(1, 3, 4096)?);
            let (major, minor) = (num(2, 2.0)?, num(3, 1.0)?);
            if minor >= major {
                return Err(format!("minor radius must be below the major radius in `{spec}`"));
            }
            let m = torus(nx, ny, major, minor);
            Ok(MeshData {
                vertices: m.vertices().to_vec(),
                faces: m.faces().to_vec(),
            })
        })(),
        "tetrahedron" if args.is_empty() => Ok(tetrahedron_data()),
        _ => return None,
    };
    Some(data)
}

/// Writes vertex and face arrays as ASCII OBJ.
pub fn to_obj(mesh: &TriangleMesh) -> String {
    let mut s = String::with_capacity(mesh.vertex_count() * 40);
    for p in mesh.vertices() {
        s.push_str(&format!("v {} {} {}\n", p[0], p[1], p[2]));
    }
    for f in mesh.faces() {
        s.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    s
}

/// Writes vertex and face arrays as ASCII OFF.
pub fn to_off(mesh: &TriangleMesh) -> String {
    let mut s = format!(
        "OFF\n{} {} {}\n",
        mesh.vertex_count(),
        mesh.face_count(),
        mesh.edge_count()
    );
    for p in mesh.vertices() {
        s.push_str(&format!("{} {} {}\n", p[0], p[1], p[2]));
    }
    for f in mesh.faces() {
        s.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    s
}
