use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::{bbox_diagonal, dot, sub, triangle_area, MeshData, AREA_TOLERANCE};

/// Smallest corner angle (radians) a face may have before it counts as a
/// needle.
pub const NEEDLE_ANGLE: f64 = 1e-6;

/// Defects found by [`validate`]. Nothing here is fatal on its own; the
/// solver requires every list to be empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub vertex_count: usize,
    pub face_count: usize,
    pub edge_count: usize,
    pub euler_characteristic: i64,
    pub total_area: f64,
    pub boundary_edges: Vec<[usize; 2]>,
    pub non_manifold_edges: Vec<[usize; 2]>,
    /// Edges traversed in the same direction by both of their faces.
    pub inconsistent_orientation_edges: Vec<[usize; 2]>,
    pub out_of_range_faces: Vec<usize>,
    pub degenerate_faces: Vec<usize>,
    pub obtuse_faces: usize,
    pub obtuse_fraction: f64,
    pub min_angle: f64,
    pub max_angle: f64,
}

impl Diagnostics {
    pub fn defect_count(&self) -> usize {
        self.boundary_edges.len()
            + self.non_manifold_edges.len()
            + self.out_of_range_faces.len()
            + self.degenerate_faces.len()
    }

    pub fn is_clean(&self) -> bool {
        self.defect_count() == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagnostics serialize")
    }
}

fn fmt_edges(edges: &[[usize; 2]]) -> String {
    const SHOWN: usize = 16;
    let mut s: Vec<String> = edges.iter().take(SHOWN).map(|e| format!("{}-{}", e[0], e[1])).collect();
    if edges.len() > SHOWN {
        s.push(format!("... (+{})", edges.len() - SHOWN));
    }
    s.join(" ")
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices = {}", self.vertex_count)?;
        writeln!(f, "faces = {}", self.face_count)?;
        writeln!(f, "edges = {}", self.edge_count)?;
        writeln!(f, "euler_characteristic = {}", self.euler_characteristic)?;
        writeln!(f, "total_area = {}", self.total_area)?;
        writeln!(f, "boundary_edges = {}", self.boundary_edges.len())?;
        if !self.boundary_edges.is_empty() {
            writeln!(f, "boundary_edge_list = {}", fmt_edges(&self.boundary_edges))?;
        }
        writeln!(f, "non_manifold_edges = {}", self.non_manifold_edges.len())?;
        if !self.non_manifold_edges.is_empty() {
            writeln!(f, "non_manifold_edge_list = {}", fmt_edges(&self.non_manifold_edges))?;
        }
        writeln!(
            f,
            "inconsistent_orientation_edges = {}",
            self.inconsistent_orientation_edges.len()
        )?;
        writeln!(f, "out_of_range_faces = {}", self.out_of_range_faces.len())?;
        writeln!(f, "degenerate_faces = {}", self.degenerate_faces.len())?;
        if !self.degenerate_faces.is_empty() {
            let list: Vec<String> = self.degenerate_faces.iter().take(16).map(|x| x.to_string()).collect();
            writeln!(f, "degenerate_face_list = {}", list.join(" "))?;
        }
        writeln!(f, "obtuse_faces = {}", self.obtuse_faces)?;
        writeln!(f, "obtuse_fraction = {:.6}", self.obtuse_fraction)?;
        writeln!(f, "min_angle_deg = {:.6}", self.min_angle.to_degrees())?;
        writeln!(f, "max_angle_deg = {:.6}", self.max_angle.to_degrees())?;
        writeln!(f, "defects = {}", self.defect_count())
    }
}

/// Inspects raw mesh data and reports every defect instead of stopping at
/// the first one.
pub fn validate(data: &MeshData) -> Diagnostics {
    let n = data.vertices.len();
    let mut diag = Diagnostics {
        vertex_count: n,
        face_count: data.faces.len(),
        min_angle: f64::INFINITY,
        max_angle: 0.0,
        ..Default::default()
    };
    let bbox = bbox_diagonal(&data.vertices);
    let area_tol = AREA_TOLERANCE * bbox * bbox;

    // directed uses per undirected edge
    let mut uses: HashMap<[usize; 2], (usize, usize)> = HashMap::new();
    let mut measured = 0usize;
    for (f, tri) in data.faces.iter().enumerate() {
        if tri.iter().any(|&i| i >= n) {
            diag.out_of_range_faces.push(f);
            continue;
        }
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let entry = uses.entry(if a < b { [a, b] } else { [b, a] }).or_insert((0, 0));
            if a < b {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            diag.degenerate_faces.push(f);
            continue;
        }
        let p = [data.vertices[tri[0]], data.vertices[tri[1]], data.vertices[tri[2]]];
        let area = triangle_area(&p[0], &p[1], &p[2]);
        diag.total_area += area;
        let angles = corner_angles(&p);
        let min = angles.iter().copied().fold(f64::INFINITY, f64::min);
        let max = angles.iter().copied().fold(0.0, f64::max);
        if area < area_tol || min < NEEDLE_ANGLE || !min.is_finite() {
            diag.degenerate_faces.push(f);
        }
        if max > std::f64::consts::FRAC_PI_2 {
            diag.obtuse_faces += 1;
        }
        if min.is_finite() {
            diag.min_angle = diag.min_angle.min(min);
            diag.max_angle = diag.max_angle.max(max);
        }
        measured += 1;
    }
    let mut edges: Vec<_> = uses.into_iter().collect();
    edges.sort_unstable_by_key(|(e, _)| *e);
    diag.edge_count = edges.len();
    for (e, (fwd, bwd)) in edges {
        match fwd + bwd {
            1 => diag.boundary_edges.push(e),
            2 if fwd == 2 || bwd == 2 => diag.inconsistent_orientation_edges.push(e),
            2 => {}
            _ => diag.non_manifold_edges.push(e),
        }
    }
    diag.euler_characteristic = n as i64 - diag.edge_count as i64 + diag.face_count as i64;
    diag.obtuse_fraction = if measured > 0 {
        diag.obtuse_faces as f64 / measured as f64
    } else {
        0.0
    };
    if !diag.min_angle.is_finite() {
        diag.min_angle = 0.0;
    }
    diag
}

fn corner_angles(p: &[[f64; 3]; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for k in 0..3 {
        let u = sub(&p[(k + 1) % 3], &p[k]);
        let v = sub(&p[(k + 2) % 3], &p[k]);
        let denom = (dot(&u, &u) * dot(&v, &v)).sqrt();
        out[k] = if denom > 0.0 {
            (dot(&u, &v) / denom).clamp(-1.0, 1.0).acos()
        } else {
            f64::NAN
        };
    }
    out
}
