//! UV-mapped tunnel meshes for displaying a stitched panorama.
//!
//! Texture `u` follows azimuth (`θ / 2π`) and `v` follows arclength along the
//! centerline, with `v = 0` at the first ring. `v` increases in the same
//! direction as panorama rows, so `(u, v)` addresses the panorama image with a
//! top-left origin.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{Rotation3, Unit};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::math;

/// Tunnel centerline as a polyline, meters.
#[derive(Debug, Clone, PartialEq)]
pub struct TunnelCurve {
    waypoints: Vec<Vec3>,
}

impl TunnelCurve {
    pub fn new(waypoints: Vec<Vec3>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidCurve(String::from("need at least two waypoints")));
        }
        for (i, w) in waypoints.windows(2).enumerate() {
            if !w[0].iter().chain(w[1].iter()).all(|x| x.is_finite()) {
                return Err(Error::InvalidCurve(format!("waypoint {} is not finite", i + 1)));
            }
            if w[0] == w[1] {
                return Err(Error::InvalidCurve(format!("waypoints {i} and {} coincide", i + 1)));
            }
        }
        Ok(Self { waypoints })
    }

    /// Straight centerline along +y.
    pub fn straight(length: f64) -> Result<Self> {
        Self::new(alloc::vec![Vec3::zeros(), Vec3::new(0.0, length, 0.0)])
    }

    pub fn waypoints(&self) -> &[Vec3] {
        &self.waypoints
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TunnelMesh {
    pub vertices: Vec<Vec3>,
    /// Unit normals facing the centerline.
    pub normals: Vec<Vec3>,
    pub uvs: Vec<[f64; 2]>,
    pub triangles: Vec<[u32; 3]>,
    /// Material name the texture is bound to.
    pub material: String,
    pub radial_segments: u32,
    pub rings: u32,
}

impl TunnelMesh {
    pub fn vertex_index(&self, ring: u32, j: u32) -> usize {
        (ring * (self.radial_segments + 1) + j) as usize
    }
}

/// One cross-section of the sweep: center, in-plane axes and texture `v`.
#[derive(Debug, Clone, Copy)]
struct Ring {
    center: Vec3,
    x_axis: Vec3,
    z_axis: Vec3,
    v: f64,
}

fn sweep(rings: &[Ring], r: f64, radial: u32) -> TunnelMesh {
    let n = radial as usize + 1;
    let mut vertices = Vec::with_capacity(rings.len() * n);
    let mut normals = Vec::with_capacity(rings.len() * n);
    let mut uvs = Vec::with_capacity(rings.len() * n);
    for ring in rings {
        for j in 0..=radial {
            // The seam column repeats column 0 exactly, with u = 1.
            let jj = if j == radial { 0 } else { j };
            let theta = math::TAU * jj as f64 / radial as f64;
            let radial_dir = ring.x_axis * math::sin(theta) + ring.z_axis * math::cos(theta);
            vertices.push(ring.center + radial_dir * r);
            normals.push(-radial_dir);
            uvs.push([j as f64 / radial as f64, ring.v]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * radial as usize * rings.len().saturating_sub(1));
    for k in 0..rings.len().saturating_sub(1) as u32 {
        for j in 0..radial {
            let a = k * (radial + 1) + j;
            let b = a + 1;
            let c = a + radial + 1;
            let d = c + 1;
            // Wound so the face normal points at the axis.
            triangles.push([a, c, b]);
            triangles.push([b, c, d]);
        }
    }
    TunnelMesh {
        vertices,
        normals,
        uvs,
        triangles,
        material: String::from("panorama"),
        radial_segments: radial,
        rings: rings.len() as u32,
    }
}

fn check_common(r: f64, radial: u32) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidMesh("radius must be positive"));
    }
    if radial < 3 {
        return Err(Error::InvalidMesh("need at least 3 radial segments"));
    }
    Ok(())
}

/// Straight tunnel from `y = 0` to `y = length` around the y axis.
pub fn build_straight_mesh(r: f64, length: f64, radial_segments: u32, axial_segments: u32) -> Result<TunnelMesh> {
    check_common(r, radial_segments)?;
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidMesh("length must be positive"));
    }
    if axial_segments < 1 {
        return Err(Error::InvalidMesh("need at least 1 axial segment"));
    }
    build_curved_mesh(&TunnelCurve::straight(length)?, r, radial_segments, axial_segments)
}

/// Minimal rotation taking unit `a` onto unit `b`.
fn align(a: &Vec3, b: &Vec3) -> Rotation3<f64> {
    Rotation3::rotation_between(a, b).unwrap_or_else(|| {
        // Antiparallel: any half turn about an axis perpendicular to a.
        let helper = if math::abs(a.x) < 0.9 { Vec3::x() } else { Vec3::z() };
        let axis = Unit::new_normalize(a.cross(&helper));
        Rotation3::from_axis_angle(&axis, core::f64::consts::PI)
    })
}

/// Largest allowed turn between consecutive spans.
pub const MAX_BEND_DEG: f64 = 170.0;

/// Piecewise-straight sweep along `curve`.
///
/// Each span gets `segments_per_span` segments. Rings at interior waypoints
/// are shared by both spans and oriented along the bisector of the span
/// directions; ring frames are carried from one ring to the next by the
/// minimal rotation between their tangents, so planar curves never roll.
pub fn build_curved_mesh(
    curve: &TunnelCurve,
    r: f64,
    radial_segments: u32,
    segments_per_span: u32,
) -> Result<TunnelMesh> {
    check_common(r, radial_segments)?;
    if segments_per_span < 1 {
        return Err(Error::InvalidMesh("need at least 1 segment per span"));
    }
    let pts = curve.waypoints();
    let dirs: Vec<Vec3> = pts.windows(2).map(|w| (w[1] - w[0]).normalize()).collect();
    let lens: Vec<f64> = pts.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let cos_limit = math::cos(MAX_BEND_DEG.to_radians());
    for (i, d) in dirs.windows(2).enumerate() {
        if d[0].dot(&d[1]) <= cos_limit {
            return Err(Error::InvalidCurve(format!(
                "turn at waypoint {} is {MAX_BEND_DEG} degrees or more",
                i + 1
            )));
        }
    }
    let total = curve.length();

    // (center, tangent, arclength) per ring.
    let mut stations: Vec<(Vec3, Vec3, f64)> = Vec::new();
    let mut arc = 0.0;
    for (i, (d, len)) in dirs.iter().zip(&lens).enumerate() {
        let start_tangent = if i == 0 { *d } else { (dirs[i - 1] + d).normalize() };
        if i == 0 {
            stations.push((pts[0], start_tangent, 0.0));
        }
        for m in 1..=segments_per_span {
            let t = m as f64 / segments_per_span as f64;
            let tangent = if m == segments_per_span && i + 1 < dirs.len() {
                (d + dirs[i + 1]).normalize()
            } else {
                *d
            };
            let center = if m == segments_per_span {
                pts[i + 1]
            } else {
                pts[i] + (pts[i + 1] - pts[i]) * t
            };
            stations.push((center, tangent, arc + len * t));
        }
        arc += len;
    }

    let first = align(&Vec3::y(), &stations[0].1);
    let mut x_axis = first * Vec3::x();
    let mut z_axis = first * Vec3::z();
    let mut prev_tangent = stations[0].1;
    let mut rings = Vec::with_capacity(stations.len());
    for (center, tangent, s) in stations {
        let step = align(&prev_tangent, &tangent);
        x_axis = step * x_axis;
        z_axis = step * z_axis;
        prev_tangent = tangent;
        rings.push(Ring {
            center,
            x_axis,
            z_axis,
            v: s / total,
        });
    }
    Ok(sweep(&rings, r, radial_segments))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn face_normal(m: &TunnelMesh, t: &[u32; 3]) -> Vec3 {
        let [a, b, c] = t.map(|i| m.vertices[i as usize]);
        (b - a).cross(&(c - a))
    }

    #[test]
    fn minimal_prism() {
        let m = build_straight_mesh(1.0, 2.0, 3, 1).unwrap();
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.triangles.len(), 6);
        assert_eq!(m.uvs[m.vertex_index(1, 2)], [2.0 / 3.0, 1.0]);
    }

    #[test]
    fn straight_mesh_invariants() {
        let m = build_straight_mesh(3.0, 5.0, 24, 7).unwrap();
        assert_eq!(m.vertices.len(), 25 * 8);
        for v in &m.vertices {
            assert!((libm::sqrt(v.x * v.x + v.z * v.z) - 3.0).abs() < 1e-9);
        }
        for k in 0..8 {
            for j in 0..=24 {
                let uv = m.uvs[m.vertex_index(k, j)];
                assert_eq!(uv, [j as f64 / 24.0, k as f64 / 7.0]);
            }
            assert_eq!(m.vertices[m.vertex_index(k, 0)], m.vertices[m.vertex_index(k, 24)]);
        }
        let n = m.vertices.len() as u32;
        for t in &m.triangles {
            assert!(t.iter().all(|i| *i < n));
            let centroid = t.iter().map(|i| m.vertices[*i as usize]).sum::<Vec3>() / 3.0;
            let to_axis = Vec3::new(-centroid.x, 0.0, -centroid.z);
            assert!(face_normal(&m, t).dot(&to_axis) > 0.0);
        }
        for (v, n) in m.vertices.iter().zip(&m.normals) {
            assert!((n + Vec3::new(v.x, 0.0, v.z) / 3.0).norm() < 1e-12);
        }
    }

    #[test]
    fn vertex_azimuth_matches_u() {
        let m = build_straight_mesh(3.0, 1.0, 16, 1).unwrap();
        for (v, uv) in m.vertices.iter().zip(&m.uvs).filter(|(_, uv)| uv[0] < 1.0) {
            let theta = math::wrap_angle(libm::atan2(v.x, v.z));
            assert!((theta / math::TAU - uv[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        assert!(build_straight_mesh(0.0, 1.0, 8, 1).is_err());
        assert!(build_straight_mesh(1.0, -1.0, 8, 1).is_err());
        assert!(build_straight_mesh(1.0, 1.0, 2, 1).is_err());
        assert!(build_straight_mesh(1.0, 1.0, 8, 0).is_err());
        assert!(TunnelCurve::new(vec![Vec3::zeros()]).is_err());
        assert!(TunnelCurve::new(vec![Vec3::zeros(), Vec3::zeros()]).is_err());
    }

    #[test]
    fn collinear_curve_equals_straight_mesh() {
        let straight = build_straight_mesh(3.0, 4.0, 12, 5).unwrap();
        let curve = TunnelCurve::new(vec![Vec3::zeros(), Vec3::new(0.0, 4.0, 0.0)]).unwrap();
        assert_eq!(build_curved_mesh(&curve, 3.0, 12, 5).unwrap(), straight);
    }

    #[test]
    fn l_bend_shares_the_joint_ring() {
        let curve = TunnelCurve::new(vec![
            Vec3::zeros(),
            Vec3::new(0.0, 10.0, 0.0),
            Vec3::new(10.0, 10.0, 0.0),
        ])
        .unwrap();
        let m = build_curved_mesh(&curve, 1.0, 8, 4).unwrap();
        assert_eq!(m.rings, 9);
        assert_eq!(m.vertices.len(), 9 * 9);
        assert_eq!(m.triangles.len(), 2 * 8 * 8);
        // The first ring faces +y, the last faces +x; the joint ring is shared.
        let ring_normal = |k: u32| {
            let a = m.vertices[m.vertex_index(k, 0)];
            let b = m.vertices[m.vertex_index(k, 2)];
            let c = m.vertices[m.vertex_index(k, 4)];
            (b - a).cross(&(c - a)).normalize()
        };
        assert!(ring_normal(0).cross(&Vec3::y()).norm() < 1e-9);
        assert!(ring_normal(8).cross(&Vec3::x()).norm() < 1e-9);
        assert!((ring_normal(0).dot(&ring_normal(8))).abs() < 1e-9);
        let uv_v: Vec<f64> = (0..9).map(|k| m.uvs[m.vertex_index(k, 0)][1]).collect();
        assert_eq!(uv_v[0], 0.0);
        assert!((uv_v[4] - 0.5).abs() < 1e-12);
        assert_eq!(uv_v[8], 1.0);
        assert!(m
            .uvs
            .iter()
            .all(|uv| (0.0..=1.0).contains(&uv[0]) && (0.0..=1.0).contains(&uv[1])));
    }

    #[test]
    fn planar_curve_has_no_roll() {
        // Zig-zag in the x-y plane: the ring axis perpendicular to the plane
        // must stay fixed.
        let curve = TunnelCurve::new(vec![
            Vec3::zeros(),
            Vec3::new(1.0, 5.0, 0.0),
            Vec3::new(-1.0, 10.0, 0.0),
            Vec3::new(2.0, 15.0, 0.0),
        ])
        .unwrap();
        let m = build_curved_mesh(&curve, 1.0, 4, 3).unwrap();
        for k in 0..m.rings {
            // j = 0 is along the ring's z axis, which started as world z.
            let radial = m.vertices[m.vertex_index(k, 0)];
            let center = (radial + m.vertices[m.vertex_index(k, 2)]) / 2.0;
            let z = (radial - center).normalize();
            assert!((z - Vec3::z()).norm() < 1e-9, "ring {k}: {z}");
        }
    }

    #[test]
    fn reversal_is_rejected() {
        let curve = TunnelCurve::new(vec![Vec3::zeros(), Vec3::new(0.0, 5.0, 0.0), Vec3::new(0.1, 0.0, 0.0)]).unwrap();
        assert!(matches!(
            build_curved_mesh(&curve, 1.0, 8, 2),
            Err(Error::InvalidCurve(_))
        ));
    }
}
