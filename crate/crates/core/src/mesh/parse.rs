//! ASCII OBJ and OFF readers.

use std::path::Path;

use super::{MeshData, MeshError, TriangleMesh, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Off,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(Self::Obj),
            "off" => Some(Self::Off),
            _ => None,
        }
    }
}

/// Reads vertex and face arrays without checking topology.
pub fn read_mesh_data(path: impl AsRef<Path>, format: Option<MeshFormat>) -> Result<MeshData, MeshError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let format = format
        .or_else(|| MeshFormat::from_path(path))
        .ok_or_else(|| MeshError::UnknownFormat(name.clone()))?;
    let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: name.clone(),
        source,
    })?;
    match format {
        MeshFormat::Obj => parse_obj(&text, &name),
        MeshFormat::Off => parse_off(&text, &name),
    }
}

/// Loads and validates a closed mesh. The format defaults to the file
/// extension.
pub fn load_mesh(path: impl AsRef<Path>, format: Option<MeshFormat>) -> Result<TriangleMesh, MeshError> {
    TriangleMesh::from_data(read_mesh_data(path, format)?)
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_coords<'a>(mut tokens: impl Iterator<Item = &'a str>, path: &str, line: usize) -> Result<Vec3, MeshError> {
    let mut p = [0.0; 3];
    for (k, c) in p.iter_mut().enumerate() {
        let tok = tokens
            .next()
            .ok_or_else(|| parse_err(path, line, format!("vertex needs 3 coordinates, found {k}")))?;
        *c = tok
            .parse()
            .map_err(|_| parse_err(path, line, format!("bad coordinate '{tok}'")))?;
    }
    Ok(p)
}

/// Fan-triangulates a polygon given as vertex indices.
fn push_polygon(faces: &mut Vec<[usize; 3]>, poly: &[usize]) {
    for k in 1..poly.len() - 1 {
        faces.push([poly[0], poly[k], poly[k + 1]]);
    }
}

/// Parses `v` and `f` records. Indices are 1-based; negative indices count
/// back from the most recent vertex. Texture and normal references
/// (`f 1/2/3`) are ignored, as are all other record types.
pub fn parse_obj(text: &str, path: &str) -> Result<MeshData, MeshError> {
    let mut data = MeshData::default();
    // (line, polygon) pairs; indices are checked once all vertices are known
    let mut polygons: Vec<(usize, Vec<i64>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => data.vertices.push(parse_coords(tokens, path, line)?),
            Some("f") => {
                let mut poly = Vec::new();
                for tok in tokens {
                    let head = tok.split('/').next().unwrap_or("");
                    let idx: i64 = head
                        .parse()
                        .map_err(|_| parse_err(path, line, format!("bad face index '{tok}'")))?;
                    if idx == 0 {
                        return Err(parse_err(path, line, "face index 0 (OBJ indices are 1-based)"));
                    }
                    let resolved = if idx < 0 {
                        data.vertices.len() as i64 + idx + 1
                    } else {
                        idx
                    };
                    poly.push(resolved);
                }
                if poly.len() < 3 {
                    return Err(parse_err(path, line, "face needs at least 3 vertices"));
                }
                polygons.push((line, poly));
            }
            _ => {}
        }
    }
    let n = data.vertices.len() as i64;
    for (line, poly) in polygons {
        let mut zero_based = Vec::with_capacity(poly.len());
        for idx in poly {
            if idx < 1 || idx > n {
                return Err(parse_err(
                    path,
                    line,
                    format!("face index {idx} out of range (mesh has {n} vertices)"),
                ));
            }
            zero_based.push((idx - 1) as usize);
        }
        push_polygon(&mut data.faces, &zero_based);
    }
    Ok(data)
}

/// Parses an ASCII OFF file: `OFF` header (optionally with counts on the
/// same line), `nv nf ne`, vertex block, face block of `k i0 .. ik-1`.
pub fn parse_off(text: &str, path: &str) -> Result<MeshData, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line, header) = lines.next().ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let mut head = header.split_whitespace();
    if head.next() != Some("OFF") {
        return Err(parse_err(path, line, "missing OFF header"));
    }
    let rest: Vec<&str> = head.collect();
    let (line, counts) = if rest.is_empty() {
        let (l, c) = lines
            .next()
            .ok_or_else(|| parse_err(path, line, "missing vertex/face counts"))?;
        (l, c.split_whitespace().collect::<Vec<_>>())
    } else {
        (line, rest)
    };
    if counts.len() < 2 {
        return Err(parse_err(path, line, "expected 'nv nf ne' counts"));
    }
    let nv: usize = counts[0]
        .parse()
        .map_err(|_| parse_err(path, line, format!("bad vertex count '{}'", counts[0])))?;
    let nf: usize = counts[1]
        .parse()
        .map_err(|_| parse_err(path, line, format!("bad face count '{}'", counts[1])))?;

    let mut data = MeshData {
        vertices: Vec::with_capacity(nv),
        faces: Vec::with_capacity(nf),
    };
    let mut last = line;
    for _ in 0..nv {
        let (l, text) = lines
            .next()
            .ok_or_else(|| parse_err(path, last, format!("expected {nv} vertices")))?;
        data.vertices.push(parse_coords(text.split_whitespace(), path, l)?);
        last = l;
    }
    for _ in 0..nf {
        let (l, text) = lines
            .next()
            .ok_or_else(|| parse_err(path, last, format!("expected {nf} faces")))?;
        last = l;
        let mut toks = text.split_whitespace();
        let k: usize = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(path, l, "bad face vertex count"))?;
        if k < 3 {
            return Err(parse_err(path, l, "face needs at least 3 vertices"));
        }
        let mut poly = Vec::with_capacity(k);
        for _ in 0..k {
            let tok = toks
                .next()
                .ok_or_else(|| parse_err(path, l, format!("face declares {k} vertices")))?;
            let idx: usize = tok
                .parse()
                .map_err(|_| parse_err(path, l, format!("bad face index '{tok}'")))?;
            if idx >= nv {
                return Err(parse_err(
                    path,
                    l,
                    format!("face index {idx} out of range (mesh has {nv} vertices)"),
                ));
            }
            poly.push(idx);
        }
        push_polygon(&mut data.faces, &poly);
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TET_OFF: &str = "OFF\n4 4 6\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";

    #[test]
    fn off_tetrahedron() {
        let data = parse_off(TET_OFF, "tet.off").unwrap();
        let mesh = TriangleMesh::from_data(data).unwrap();
        assert_eq!(mesh.edge_count(), 6);
        assert_eq!(mesh.euler_characteristic(), 2);
        assert!(mesh.is_closed());
    }

    #[test]
    fn off_counts_on_header_line() {
        let text = TET_OFF.replacen("OFF\n4 4 6", "OFF 4 4 6", 1);
        let data = parse_off(&text, "tet.off").unwrap();
        assert_eq!(data.faces.len(), 4);
    }

    #[test]
    fn obj_with_slashes_and_comments() {
        let text = "# tet\nv 1 1 1\nv 1 -1 -1\nv -1 1 -1\nv -1 -1 1\nvn 0 0 1\n\
                    f 1/1/1 2/2/1 3/3/1\nf 1//1 4//1 2//1\nf 1 3 4\nf -3 -1 -2\n";
        let data = parse_obj(text, "tet.obj").unwrap();
        assert_eq!(data.faces[3], [1, 3, 2]);
        assert!(TriangleMesh::from_data(data).is_ok());
    }

    #[test]
    fn obj_quad_is_fanned() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        let data = parse_obj(text, "q.obj").unwrap();
        assert_eq!(data.faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn obj_zero_index_names_line() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n";
        let err = parse_obj(text, "bad.obj").unwrap_err();
        match err {
            MeshError::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("{other}"),
        }
        assert!(parse_obj(text, "bad.obj")
            .unwrap_err()
            .to_string()
            .starts_with("bad.obj:4:"));
    }

    #[test]
    fn obj_out_of_range_names_line() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\n\nf 1 2 9\n";
        match parse_obj(text, "bad.obj").unwrap_err() {
            MeshError::Parse { line, message, .. } => {
                assert_eq!(line, 5);
                assert!(message.contains("out of range"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn obj_malformed_vertex() {
        let err = parse_obj("v 0 zero 0\n", "bad.obj").unwrap_err();
        assert!(matches!(err, MeshError::Parse { line: 1, .. }));
    }

    #[test]
    fn off_index_out_of_range() {
        let text = TET_OFF.replace("3 1 3 2", "3 1 3 7");
        match parse_off(&text, "bad.off").unwrap_err() {
            MeshError::Parse { line, .. } => assert_eq!(line, 10),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn off_truncated() {
        let text = "OFF\n4 4 0\n0 0 0\n";
        assert!(matches!(parse_off(text, "t.off"), Err(MeshError::Parse { .. })));
    }
}
