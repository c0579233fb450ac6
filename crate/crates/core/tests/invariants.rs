use core::f64::consts::{PI, TAU};

use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;
use tunnelstitch_core::geometry::{
    cylinder_to_pixel, orthonormality_deviation, pixel_to_camera_ray, pixel_to_cylinder, solve_coefficients,
};
use tunnelstitch_core::mesh::build_straight_mesh;
use tunnelstitch_core::render::ray_cylinder_intersect;
use tunnelstitch_core::stitch::{cylinder_to_pano, pano_to_cylinder, PanoramaSpec};
use tunnelstitch_core::trajectory::{generate, TrajectoryConfig, TrajectoryMode};
use tunnelstitch_core::{CameraIntrinsics, CylinderModel, CylinderPoint, PixelCoord, Pose, Vec3};

const R: f64 = 3.0;

fn intr(f: f64) -> CameraIntrinsics {
    CameraIntrinsics::new(f, 320.0, 240.0, 640, 480).unwrap()
}

prop_compose! {
    fn pose_inside()(
        roll in -PI..PI, pitch in -1.4..1.4, yaw in -PI..PI,
        rho in 0.0..0.85 * R, phi in 0.0..TAU, ty in -5.0..5.0,
    ) -> Pose {
        let rot = Rotation3::from_euler_angles(roll, pitch, yaw).into_inner();
        Pose::new(rot, Vec3::new(rho * phi.sin(), ty, rho * phi.cos())).unwrap()
    }
}

prop_compose! {
    fn pixel()(u in 0.0..640.0f64, v in 0.0..480.0f64) -> PixelCoord {
        PixelCoord::new(u, v)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn solved_point_lies_on_wall(pose in pose_inside(), p in pixel(), f in 100.0..1000.0f64) {
        let cyl = CylinderModel::new(R).unwrap();
        let cp = pixel_to_cylinder(&intr(f), &pose, &cyl, p).unwrap();
        let w = cyl.point(cp);
        prop_assert!(((w.x * w.x + w.z * w.z).sqrt() - R).abs() < 1e-9);
        prop_assert!((0.0..TAU).contains(&cp.theta));
    }

    #[test]
    fn pixel_round_trip(pose in pose_inside(), p in pixel(), f in 100.0..1000.0f64) {
        let cyl = CylinderModel::new(R).unwrap();
        let k = intr(f);
        let cp = pixel_to_cylinder(&k, &pose, &cyl, p).unwrap();
        if let Some(q) = cylinder_to_pixel(&k, &pose, &cyl, cp) {
            prop_assert!(q.distance(&p) < 1e-6, "{:?} -> {:?}", p, q);
        }
    }

    #[test]
    fn solver_agrees_with_ray_caster(pose in pose_inside(), p in pixel(), f in 100.0..1000.0f64) {
        let cyl = CylinderModel::new(R).unwrap();
        let k = intr(f);
        let cp = pixel_to_cylinder(&k, &pose, &cyl, p).unwrap();
        let dir = pose.rotation() * pixel_to_camera_ray(&k, p);
        let lambda = ray_cylinder_intersect(pose.translation(), &dir, R).unwrap();
        let hit = pose.translation() + dir * lambda;
        prop_assert!((cyl.point(cp) - hit).norm() < 1e-9);
    }

    #[test]
    fn coefficient_norm_matches_ray_length(pose in pose_inside(), p in pixel(), f in 100.0..1000.0f64) {
        let k = intr(f);
        let c = solve_coefficients(&k, &pose, p);
        let ray = pixel_to_camera_ray(&k, p);
        prop_assert!((c.norm() - ray.norm()).abs() < 1e-12 * ray.norm());
    }

    #[test]
    fn centered_camera_sees_mirror_images(yaw in 0.0..TAU, du in 0.0..320.0f64, dv in 0.0..240.0f64) {
        let cyl = CylinderModel::new(R).unwrap();
        let k = intr(320.0);
        let pose = Pose::from_yaw(yaw, Vec3::zeros());
        let a = pixel_to_cylinder(&k, &pose, &cyl, PixelCoord::new(320.0 + du, 240.0 + dv)).unwrap();
        let b = pixel_to_cylinder(&k, &pose, &cyl, PixelCoord::new(320.0 - du, 240.0 - dv)).unwrap();
        let mid = (a.theta - yaw).rem_euclid(TAU) + (b.theta - yaw).rem_euclid(TAU);
        prop_assert!((mid.rem_euclid(TAU)).min(TAU - mid.rem_euclid(TAU)) < 1e-9);
        prop_assert!((a.height + b.height).abs() < 1e-9);
    }

    #[test]
    fn rotation_about_axis_shifts_theta(pose in pose_inside(), p in pixel(), d in -PI..PI) {
        let cyl = CylinderModel::new(R).unwrap();
        let k = intr(400.0);
        let turned = pose.rotated_about_world(Rotation3::from_axis_angle(&Vector3::y_axis(), d).matrix()).unwrap();
        let a = pixel_to_cylinder(&k, &pose, &cyl, p).unwrap();
        let b = pixel_to_cylinder(&k, &turned, &cyl, p).unwrap();
        let diff = (b.theta - a.theta - d).rem_euclid(TAU);
        prop_assert!(diff.min(TAU - diff) < 1e-9);
        prop_assert!((a.height - b.height).abs() < 1e-9);
    }

    #[test]
    fn panorama_mapping_round_trip(theta in 0.0..TAU, y in -2.0..2.0f64, width in 64u32..4096) {
        let spec = PanoramaSpec::new(width, -2.0, 2.0, PanoramaSpec::default_scale(width, R)).unwrap();
        let (u, v) = cylinder_to_pano(&spec, CylinderPoint::new(theta, y));
        prop_assert!((0.0..=width as f64).contains(&u));
        let back = pano_to_cylinder(&spec, u, v);
        prop_assert!((back.theta - theta).abs() < 1e-9 && (back.height - y).abs() < 1e-9);
    }

    #[test]
    fn mesh_uvs_stay_in_unit_square(radial in 3u32..96, axial in 1u32..24, length in 0.1..50.0f64, r in 0.1..10.0f64) {
        let m = build_straight_mesh(r, length, radial, axial).unwrap();
        prop_assert_eq!(m.vertices.len(), ((radial + 1) * (axial + 1)) as usize);
        prop_assert_eq!(m.triangles.len(), (2 * radial * axial) as usize);
        for uv in &m.uvs {
            prop_assert!((0.0..=1.0).contains(&uv[0]) && (0.0..=1.0).contains(&uv[1]));
        }
        for (v, n) in m.vertices.iter().zip(&m.normals) {
            prop_assert!(((v.x * v.x + v.z * v.z).sqrt() - r).abs() < 1e-9 * r.max(1.0));
            prop_assert!((n.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn noisy_trajectory_stays_orthonormal(seed in any::<u64>(), n in 1usize..40, step in -1.0..1.0f64, sd in 0.0..0.2f64) {
        let cfg = TrajectoryConfig {
            mode: TrajectoryMode::Spiral,
            n_frames: n,
            yaw_step: step,
            translation_step: Vec3::new(0.0, 0.1, 0.0),
            initial_t: Vec3::zeros(),
            noise_std_translation: Vec3::new(0.02, 0.02, 0.03),
            noise_std_rotation: sd,
            seed,
        };
        let frames = generate(&cfg, None).unwrap();
        prop_assert_eq!(frames.len(), n);
        for (k, fp) in frames.iter().enumerate() {
            prop_assert_eq!(fp.index, k);
            prop_assert!(orthonormality_deviation(fp.pose.rotation()) < 1e-9);
            let want = (k as f64 * step).rem_euclid(TAU);
            let got = fp.planned_pose.yaw();
            let d = (got - want).abs();
            prop_assert!(d.min(TAU - d) < 1e-9, "frame {k}: {got} vs {want}");
        }
        prop_assert_eq!(generate(&cfg, None).unwrap(), frames);
    }
}
