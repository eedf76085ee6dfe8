use std::ops::Index;

use serde::{Deserialize, Serialize};

use super::{cross, dot, norm, sub, MeshError, TriangleMesh, Vec3, NEEDLE_ANGLE};

/// How triangle area is lumped onto vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaConvention {
    /// One third of every incident face. Partitions the surface area exactly.
    #[default]
    Barycentric,
    /// Voronoi areas on non-obtuse faces, with the usual half/quarter split
    /// on obtuse ones.
    MixedVoronoi,
}

impl std::str::FromStr for AreaConvention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "barycentric" => Ok(Self::Barycentric),
            "mixed" | "mixed_voronoi" | "voronoi" => Ok(Self::MixedVoronoi),
            other => Err(format!("unknown area convention '{other}'")),
        }
    }
}

impl std::fmt::Display for AreaConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Barycentric => "barycentric",
            Self::MixedVoronoi => "mixed_voronoi",
        })
    }
}

/// Diagonal lumped mass: one positive area per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct MassVector(Vec<f64>);

impl MassVector {
    pub fn new(areas: Vec<f64>) -> Self {
        Self(areas)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Σ A_i u_i
    pub fn integrate(&self, u: &[f64]) -> f64 {
        self.0.iter().zip(u).map(|(a, x)| a * x).sum()
    }
}

impl Index<usize> for MassVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Per-edge `cot α + cot β`, indexed like [`TriangleMesh::edges`].
///
/// Each weight is stored once, so `w(i, j)` and `w(j, i)` read the same slot.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights(Vec<f64>);

impl EdgeWeights {
    pub fn new(weights: Vec<f64>) -> Self {
        Self(weights)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn between(&self, mesh: &TriangleMesh, i: usize, j: usize) -> Option<f64> {
        mesh.edge_index(i, j).map(|e| self.0[e])
    }
}

impl Index<usize> for EdgeWeights {
    type Output = f64;

    fn index(&self, e: usize) -> &f64 {
        &self.0[e]
    }
}

/// Cotangent of the angle at `apex` in the triangle (apex, p, q).
///
/// Returns `None` when the angle is within [`NEEDLE_ANGLE`] of 0 or π.
fn cot_at(apex: &Vec3, p: &Vec3, q: &Vec3) -> Option<f64> {
    let u = sub(p, apex);
    let v = sub(q, apex);
    let sin_scaled = norm(cross(&u, &v));
    let cos_scaled = dot(&u, &v);
    let scale = norm(u) * norm(v);
    if !(sin_scaled > NEEDLE_ANGLE.sin() * scale) {
        return None;
    }
    Some(cos_scaled / sin_scaled)
}

/// Cotangents of the three corner angles of `face`, in corner order.
pub(crate) fn face_cotangents(mesh: &TriangleMesh, face: usize) -> Result<[f64; 3], MeshError> {
    let tri = mesh.faces()[face];
    let p = mesh.vertices();
    let mut out = [0.0; 3];
    for k in 0..3 {
        let (a, b, c) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
        out[k] = cot_at(&p[a], &p[b], &p[c]).ok_or(MeshError::DegenerateAngle { face, vertex: a })?;
    }
    Ok(out)
}

/// `w_ij = cot α_ij + cot β_ij`, the cotangents of the two angles opposite
/// each edge. Boundary edges (open patches only) carry a single cotangent.
///
/// Obtuse faces produce negative contributions; they are kept as is.
pub fn cotan_weights(mesh: &TriangleMesh) -> Result<EdgeWeights, MeshError> {
    let mut w = vec![0.0; mesh.edge_count()];
    for (f, tri) in mesh.faces().iter().enumerate() {
        let cots = face_cotangents(mesh, f)?;
        for k in 0..3 {
            // corner k is opposite the edge between the other two corners
            let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let e = mesh.edge_index(i, j).expect("face edge present");
            w[e] += cots[k];
        }
    }
    Ok(EdgeWeights(w))
}

/// Lumped vertex areas under the chosen convention.
pub fn vertex_areas(mesh: &TriangleMesh, convention: AreaConvention) -> Result<MassVector, MeshError> {
    let mut areas = vec![0.0; mesh.vertex_count()];
    let p = mesh.vertices();
    for (f, tri) in mesh.faces().iter().enumerate() {
        let area = mesh.face_area(f);
        match convention {
            AreaConvention::Barycentric => {
                for &v in tri {
                    areas[v] += area / 3.0;
                }
            }
            AreaConvention::MixedVoronoi => {
                let cots = face_cotangents(mesh, f)?;
                if let Some(obtuse) = (0..3).find(|&k| cots[k] < 0.0) {
                    for k in 0..3 {
                        areas[tri[k]] += if k == obtuse { area / 2.0 } else { area / 4.0 };
                    }
                } else {
                    for k in 0..3 {
                        let (a, b, c) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
                        let ab = sub(&p[b], &p[a]);
                        let ac = sub(&p[c], &p[a]);
                        // edge ab is opposite corner c, edge ac opposite corner b
                        let cot_c = cots[(k + 2) % 3];
                        let cot_b = cots[(k + 1) % 3];
                        areas[a] += (dot(&ab, &ab) * cot_c + dot(&ac, &ac) * cot_b) / 8.0;
                    }
                }
            }
        }
    }
    if let Some(v) = areas.iter().position(|&a| !(a > 0.0)) {
        let face = mesh.faces().iter().position(|t| t.contains(&v)).unwrap_or(0);
        return Err(MeshError::DegenerateFace {
            face,
            area: areas[v],
            tolerance: 0.0,
        });
    }
    Ok(MassVector(areas))
}
