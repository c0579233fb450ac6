//! Curve files and Wavefront OBJ/MTL output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use tunnelstitch_core::mesh::{TunnelCurve, TunnelMesh};
use tunnelstitch_core::{Image, Vec3};

use crate::error::{Error, Result};
use crate::imageio::{read_bytes, write_bytes, write_image};

/// One `x y z` triple per line in meters; `#` starts a comment.
pub fn parse_curve(text: &str, path: &Path) -> Result<TunnelCurve> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: Option<Vec<f64>> = line.split_whitespace().map(|x| x.parse().ok()).collect();
        match v.as_deref() {
            Some(&[x, y, z]) if x.is_finite() && y.is_finite() && z.is_finite() => points.push(Vec3::new(x, y, z)),
            _ => {
                return Err(Error::parse(
                    path,
                    i + 1,
                    format!("expected three numbers, got {line:?}"),
                ))
            }
        }
    }
    TunnelCurve::new(points).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_curve(path: &Path) -> Result<TunnelCurve> {
    let text = String::from_utf8(read_bytes(path)?).map_err(|_| Error::format(path, "not UTF-8"))?;
    parse_curve(&text, path)
}

/// Geometry as read back from an OBJ file.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjData {
    pub vertices: Vec<Vec3>,
    pub uvs: Vec<[f64; 2]>,
    pub normals: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    pub mtllib: Option<String>,
}

/// OBJ text. Texture `v` is written unchanged; the texture image is stored
/// flipped so that OBJ's bottom-left origin addresses panorama row 0 at
/// `v = 0`.
pub fn format_obj(mesh: &TunnelMesh, mtllib: &str, header: &[&str]) -> String {
    let mut s = String::new();
    for h in header {
        let _ = writeln!(s, "# {h}");
    }
    let _ = writeln!(s, "mtllib {mtllib}\no tunnel");
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for uv in &mesh.uvs {
        let _ = writeln!(s, "vt {} {}", uv[0], uv[1]);
    }
    for n in &mesh.normals {
        let _ = writeln!(s, "vn {} {} {}", n.x, n.y, n.z);
    }
    let _ = writeln!(s, "usemtl {}\ns off", mesh.material);
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| i + 1);
        let _ = writeln!(s, "f {a}/{a}/{a} {b}/{b}/{b} {c}/{c}/{c}");
    }
    s
}

pub fn format_mtl(material: &str, texture_file: &str) -> String {
    format!("newmtl {material}\nKa 1 1 1\nKd 1 1 1\nKs 0 0 0\nillum 1\nmap_Kd {texture_file}\n")
}

fn numbers<const N: usize>(rest: &str) -> Option<[f64; N]> {
    let v: Vec<f64> = rest.split_whitespace().map(|x| x.parse().ok()).collect::<Option<_>>()?;
    v.try_into().ok()
}

/// Parse the subset of OBJ written by [`format_obj`]: positions, texture
/// coordinates, normals and triangles with shared indices.
pub fn parse_obj(text: &str, path: &Path) -> Result<ObjData> {
    let mut d = ObjData {
        vertices: Vec::new(),
        uvs: Vec::new(),
        normals: Vec::new(),
        triangles: Vec::new(),
        mtllib: None,
    };
    for (i, line) in text.lines().enumerate() {
        let err = |m: &str| Error::parse(path, i + 1, m.to_string());
        let line = line.trim();
        let (tag, rest) = line.split_once(' ').unwrap_or((line, ""));
        match tag {
            "v" => d
                .vertices
                .push(Vec3::from(numbers::<3>(rest).ok_or_else(|| err("bad vertex"))?)),
            "vn" => d
                .normals
                .push(Vec3::from(numbers::<3>(rest).ok_or_else(|| err("bad normal"))?)),
            "vt" => d
                .uvs
                .push(numbers::<2>(rest).ok_or_else(|| err("bad texture coordinate"))?),
            "f" => {
                let idx: Option<Vec<u32>> = rest
                    .split_whitespace()
                    .map(|c| c.split('/').next()?.parse::<u32>().ok()?.checked_sub(1))
                    .collect();
                let tri: [u32; 3] = idx
                    .and_then(|v| v.try_into().ok())
                    .ok_or_else(|| err("expected a triangle"))?;
                d.triangles.push(tri);
            }
            "mtllib" => d.mtllib = Some(rest.trim().to_string()),
            _ => {}
        }
    }
    let n = d.vertices.len() as u32;
    if d.triangles.iter().flatten().any(|i| *i >= n) {
        return Err(Error::format(path, "face index out of range"));
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshFiles {
    pub obj: PathBuf,
    pub mtl: PathBuf,
    pub texture: PathBuf,
}

/// Write `{prefix}.obj`, `{prefix}.mtl` and `{prefix}.png`.
pub fn write_mesh(mesh: &TunnelMesh, texture: &Image, prefix: &Path, header: &[&str]) -> Result<MeshFiles> {
    let dir = prefix
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    if !dir.is_dir() {
        return Err(Error::MissingDirectory(dir.to_path_buf()));
    }
    let stem = prefix
        .file_name()
        .ok_or_else(|| Error::format(prefix, "output prefix has no file name"))?
        .to_string_lossy()
        .into_owned();
    let files = MeshFiles {
        obj: dir.join(format!("{stem}.obj")),
        mtl: dir.join(format!("{stem}.mtl")),
        texture: dir.join(format!("{stem}.png")),
    };
    write_image(&files.texture, &texture.flipped_vertically())?;
    write_bytes(
        &files.mtl,
        format_mtl(&mesh.material, &format!("{stem}.png")).as_bytes(),
    )?;
    write_bytes(&files.obj, format_obj(mesh, &format!("{stem}.mtl"), header).as_bytes())?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tunnelstitch_core::mesh::build_straight_mesh;

    #[test]
    fn minimal_prism_line_counts() {
        let m = build_straight_mesh(1.0, 2.0, 3, 1).unwrap();
        let text = format_obj(&m, "t.mtl", &[]);
        let count = |p: &str| text.lines().filter(|l| l.starts_with(p)).count();
        assert_eq!((count("v "), count("vt "), count("f ")), (8, 8, 6));
    }

    #[test]
    fn obj_round_trip() {
        let m = build_straight_mesh(3.0, 7.5, 17, 5).unwrap();
        let d = parse_obj(&format_obj(&m, "t.mtl", &["hello"]), Path::new("t.obj")).unwrap();
        assert_eq!(d.vertices, m.vertices);
        assert_eq!(d.uvs, m.uvs);
        assert_eq!(d.normals, m.normals);
        assert_eq!(d.triangles, m.triangles);
        assert_eq!(d.mtllib.as_deref(), Some("t.mtl"));
    }

    #[test]
    fn curve_parsing() {
        let c = parse_curve("# centerline\n0 0 0\n\n0 5 0 # bend\n3 5 0\n", Path::new("c")).unwrap();
        assert_eq!(c.waypoints().len(), 3);
        let e = parse_curve("0 0 0\n1 2\n", Path::new("c.txt")).unwrap_err();
        assert!(e.to_string().starts_with("c.txt:2:"), "{e}");
        assert!(parse_curve("0 0 0\n", Path::new("c")).is_err());
        assert!(parse_curve("0 0 0\n0 0 0\n", Path::new("c")).is_err());
    }

    #[test]
    fn write_mesh_emits_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let m = build_straight_mesh(1.0, 1.0, 8, 2).unwrap();
        let tex = Image::filled(16, 8, [0.5; 3]);
        let files = write_mesh(&m, &tex, &dir.path().join("tunnel"), &[]).unwrap();
        for p in [&files.obj, &files.mtl, &files.texture] {
            assert!(p.is_file(), "{}", p.display());
        }
        let mtl = std::fs::read_to_string(&files.mtl).unwrap();
        assert!(mtl.contains("map_Kd tunnel.png"));
        let missing = dir.path().join("absent").join("tunnel");
        let e = write_mesh(&m, &tex, &missing, &[]).unwrap_err();
        assert!(e.to_string().contains("absent"), "{e}");
    }
}
