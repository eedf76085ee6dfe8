//! Triangle meshes: topology, intrinsic geometry and file input.

mod geometry;
mod parse;
pub mod shapes;
mod validate;

use std::path::Path;

use thiserror::Error;

pub use geometry::{cotan_weights, vertex_areas, AreaConvention, EdgeWeights, MassVector};
pub use parse::{load_mesh, parse_obj, parse_off, read_mesh_data, MeshFormat};
pub use validate::{validate, Diagnostics, NEEDLE_ANGLE};

pub type Vec3 = [f64; 3];

/// Faces whose area falls below this multiple of the squared bounding-box
/// diagonal are rejected as degenerate.
pub const AREA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unrecognized mesh format for {0} (expected .obj or .off)")]
    UnknownFormat(String),
    #[error("mesh has no faces")]
    Empty,
    #[error("face {face} references vertex {index}, but the mesh has {count} vertices")]
    IndexOutOfRange { face: usize, index: usize, count: usize },
    #[error("face {face} repeats a vertex: {indices:?}")]
    RepeatedVertex { face: usize, indices: [usize; 3] },
    #[error("boundary edge ({0}, {1}) is used by only one face; the surface must be closed")]
    BoundaryEdge(usize, usize),
    #[error("non-manifold edge ({a}, {b}) is shared by {count} faces")]
    NonManifoldEdge { a: usize, b: usize, count: usize },
    #[error("face {face} is degenerate (area {area:e} below tolerance {tolerance:e})")]
    DegenerateFace { face: usize, area: f64, tolerance: f64 },
    #[error("face {face} has an angle of 0 or π at vertex {vertex}; cotangent undefined")]
    DegenerateAngle { face: usize, vertex: usize },
    #[error("non-finite coordinate at vertex {0}")]
    NonFiniteVertex(usize),
}

/// Raw vertex and face arrays as read from disk, before any checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeshData {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

/// Immutable triangle surface with derived edges and one-ring adjacency.
///
/// Edges are stored once as sorted pairs `(i, j)` with `i < j`, in
/// lexicographic order, so an edge index is stable for a given face list.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_face_count: Vec<u8>,
    ring_offsets: Vec<usize>,
    ring: Vec<usize>,
    ring_edges: Vec<usize>,
}

impl TriangleMesh {
    /// Builds a closed mesh. Every edge must be shared by exactly two faces.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        Self::build(vertices, faces, true)
    }

    /// Builds a mesh that may have boundary edges (each edge used by one or
    /// two faces). Used for flat patches; the solver expects closed meshes.
    pub fn with_boundary(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        Self::build(vertices, faces, false)
    }

    pub fn from_data(data: MeshData) -> Result<Self, MeshError> {
        Self::new(data.vertices, data.faces)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MeshError> {
        load_mesh(path, None)
    }

    fn build(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>, closed: bool) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        let n = vertices.len();
        for (i, v) in vertices.iter().enumerate() {
            if v.iter().any(|c| !c.is_finite()) {
                return Err(MeshError::NonFiniteVertex(i));
            }
        }
        for (f, tri) in faces.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i >= n) {
                return Err(MeshError::IndexOutOfRange {
                    face: f,
                    index,
                    count: n,
                });
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedVertex { face: f, indices: *tri });
            }
        }

        let (edges, edge_face_count) = collect_edges(&faces);
        for (e, &count) in edges.iter().zip(&edge_face_count) {
            if count > 2 {
                return Err(MeshError::NonManifoldEdge {
                    a: e[0],
                    b: e[1],
                    count: count as usize,
                });
            }
            if closed && count == 1 {
                return Err(MeshError::BoundaryEdge(e[0], e[1]));
            }
        }

        let diag = bbox_diagonal(&vertices);
        let tolerance = AREA_TOLERANCE * diag * diag;
        for (f, tri) in faces.iter().enumerate() {
            let area = triangle_area(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
            if area < tolerance {
                return Err(MeshError::DegenerateFace {
                    face: f,
                    area,
                    tolerance,
                });
            }
        }

        let (ring_offsets, ring, ring_edges) = build_rings(n, &edges);
        Ok(Self {
            vertices,
            faces,
            edges,
            edge_face_count,
            ring_offsets,
            ring,
            ring_edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Unique edges as sorted vertex pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn is_closed(&self) -> bool {
        self.edge_face_count.iter().all(|&c| c == 2)
    }

    /// True for edges used by a single face.
    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        self.edge_face_count[edge] == 1
    }

    /// One-ring neighbours of vertex `i`, sorted ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.ring[self.ring_offsets[i]..self.ring_offsets[i + 1]]
    }

    /// Edge indices matching [`neighbors`](Self::neighbors) entry by entry.
    pub fn neighbor_edges(&self, i: usize) -> &[usize] {
        &self.ring_edges[self.ring_offsets[i]..self.ring_offsets[i + 1]]
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let ring = self.neighbors(i);
        ring.binary_search(&j)
            .ok()
            .map(|k| self.ring_edges[self.ring_offsets[i] + k])
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    pub fn face_area(&self, face: usize) -> f64 {
        let [a, b, c] = self.faces[face];
        triangle_area(&self.vertices[a], &self.vertices[b], &self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.face_count()).map(|f| self.face_area(f)).sum()
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        let [a, b] = self.edges[edge];
        norm(sub(&self.vertices[a], &self.vertices[b]))
    }

    pub fn mean_edge_length(&self) -> f64 {
        (0..self.edge_count()).map(|e| self.edge_length(e)).sum::<f64>() / self.edge_count() as f64
    }

    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal(&self.vertices)
    }

    /// Applies `x ↦ R x + t` to every vertex. Topology is shared unchanged.
    pub fn transformed(&self, rotation: &[[f64; 3]; 3], translation: Vec3) -> Self {
        let vertices = self
            .vertices
            .iter()
            .map(|p| {
                let mut q = translation;
                for (r, row) in rotation.iter().enumerate() {
                    q[r] += row[0] * p[0] + row[1] * p[1] + row[2] * p[2];
                }
                q
            })
            .collect();
        Self {
            vertices,
            ..self.clone()
        }
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, factor: f64) -> Self {
        let vertices = self
            .vertices
            .iter()
            .map(|p| [p[0] * factor, p[1] * factor, p[2] * factor])
            .collect();
        Self {
            vertices,
            ..self.clone()
        }
    }

    /// Vertices within `hops` edges of `center` (breadth-first), sorted.
    pub fn hop_ball(&self, center: usize, hops: usize) -> Vec<usize> {
        self.dilate(&[center], hops)
    }

    /// Grows a vertex set by `hops` rings. The result is sorted.
    pub fn dilate(&self, seed: &[usize], hops: usize) -> Vec<usize> {
        let mut inside = vec![false; self.vertex_count()];
        let mut frontier: Vec<usize> = Vec::new();
        for &v in seed {
            if !inside[v] {
                inside[v] = true;
                frontier.push(v);
            }
        }
        for _ in 0..hops {
            let mut next = Vec::new();
            for &v in &frontier {
                for &w in self.neighbors(v) {
                    if !inside[w] {
                        inside[w] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        (0..self.vertex_count()).filter(|&v| inside[v]).collect()
    }
}

/// Sorted unique edges and how many faces use each.
pub(crate) fn collect_edges(faces: &[[usize; 3]]) -> (Vec<[usize; 2]>, Vec<u8>) {
    let mut half: Vec<[usize; 2]> = Vec::with_capacity(faces.len() * 3);
    for tri in faces {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            half.push(if a < b { [a, b] } else { [b, a] });
        }
    }
    half.sort_unstable();
    let mut edges: Vec<[usize; 2]> = Vec::new();
    let mut counts: Vec<u8> = Vec::new();
    for e in half {
        if edges.last() == Some(&e) {
            let c = counts.last_mut().unwrap();
            *c = c.saturating_add(1);
        } else {
            edges.push(e);
            counts.push(1);
        }
    }
    (edges, counts)
}

fn build_rings(n: usize, edges: &[[usize; 2]]) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut degree = vec![0usize; n];
    for e in edges {
        degree[e[0]] += 1;
        degree[e[1]] += 1;
    }
    let mut offsets = vec![0usize; n + 1];
    for i in 0..n {
        offsets[i + 1] = offsets[i] + degree[i];
    }
    let mut ring = vec![0usize; offsets[n]];
    let mut ring_edges = vec![0usize; offsets[n]];
    let mut fill = offsets.clone();
    for (k, e) in edges.iter().enumerate() {
        for (a, b) in [(e[0], e[1]), (e[1], e[0])] {
            ring[fill[a]] = b;
            ring_edges[fill[a]] = k;
            fill[a] += 1;
        }
    }
    for i in 0..n {
        let range = offsets[i]..offsets[i + 1];
        let mut pairs: Vec<(usize, usize)> = ring[range.clone()]
            .iter()
            .copied()
            .zip(ring_edges[range.clone()].iter().copied())
            .collect();
        pairs.sort_unstable();
        for (slot, (v, e)) in range.zip(pairs) {
            ring[slot] = v;
            ring_edges[slot] = e;
        }
    }
    (offsets, ring, ring_edges)
}

pub(crate) fn bbox_diagonal(vertices: &[Vec3]) -> f64 {
    if vertices.is_empty() {
        return 0.0;
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in vertices {
        for k in 0..3 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    norm(sub(&hi, &lo))
}

pub(crate) fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(&a, &a).sqrt()
}

pub(crate) fn triangle_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * norm(cross(&sub(b, a), &sub(c, a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetrahedron_topology() {
        let mesh = shapes::tetrahedron();
        assert_eq!(mesh.vertex_count(), 4);
        assert_eq!(mesh.face_count(), 4);
        assert_eq!(mesh.edge_count(), 6);
        assert_eq!(mesh.euler_characteristic(), 2);
        assert!(mesh.is_closed());
        for i in 0..4 {
            assert_eq!(mesh.neighbors(i).len(), 3);
        }
    }

    #[test]
    fn edge_lookup_is_symmetric() {
        let mesh = shapes::icosphere(1, 1.0);
        for (k, e) in mesh.edges().iter().enumerate() {
            assert_eq!(mesh.edge_index(e[0], e[1]), Some(k));
            assert_eq!(mesh.edge_index(e[1], e[0]), Some(k));
        }
        assert_eq!(mesh.edge_index(0, 0), None);
    }

    #[test]
    fn open_surface_rejected_as_closed_mesh() {
        let vertices = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let err = TriangleMesh::new(vertices.clone(), vec![[0, 1, 2]]).unwrap_err();
        assert!(matches!(err, MeshError::BoundaryEdge(0, 1)), "{err}");
        assert!(TriangleMesh::with_boundary(vertices, vec![[0, 1, 2]]).is_ok());
    }

    #[test]
    fn degenerate_face_rejected() {
        let mut data = shapes::tetrahedron_data();
        // collapse vertex 3 onto vertex 0
        data.vertices[3] = data.vertices[0];
        data.vertices[3][0] += 1e-14;
        let err = TriangleMesh::from_data(data).unwrap_err();
        assert!(matches!(err, MeshError::DegenerateFace { .. }), "{err}");
    }

    #[test]
    fn non_manifold_edge_rejected() {
        let vertices = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let faces = vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]];
        let err = TriangleMesh::with_boundary(vertices, faces).unwrap_err();
        assert!(matches!(err, MeshError::NonManifoldEdge { count: 3, .. }), "{err}");
    }

    #[test]
    fn hop_ball_grows_by_rings() {
        let mesh = shapes::icosphere(2, 1.0);
        let ball0 = mesh.hop_ball(0, 0);
        assert_eq!(ball0, vec![0]);
        let ball1 = mesh.hop_ball(0, 1);
        assert_eq!(ball1.len(), 1 + mesh.neighbors(0).len());
        let all = mesh.hop_ball(0, 1000);
        assert_eq!(all.len(), mesh.vertex_count());
    }
}
