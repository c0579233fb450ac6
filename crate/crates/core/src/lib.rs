//! Pose-driven cylindrical panorama stitching for tunnel imagery.
//!
//! Given the tunnel radius and the pose of every captured frame, each pixel's
//! viewing ray is intersected with the tunnel wall in closed form and the
//! wall is unwrapped into a `(theta, y)` raster. No feature matching is
//! involved anywhere: registration comes entirely from the known geometry.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, parallel drivers
//! and the command line live in the `tunnelstitch` crate.
//!
//! Modules:
//!
//! - [`geometry`]: pinhole rays, unit-cylinder projection and the
//!   pixel to wall solver (and its inverse).
//! - [`render`]: a software ray caster producing synthetic frames and the
//!   exact ground-truth panorama. Its intersection routine is written
//!   independently of the solver and doubles as a test oracle.
//! - [`texture`]: procedural wall textures.
//! - [`trajectory`]: stationary and (jittered) spiral camera paths.
//! - [`stitch`]: forward-warped boundaries, inverse-warp fill, feathered
//!   compositing and PSNR.
//! - [`metrics`]: edge straightness of stitched checkerboards.
//! - [`mesh`]: UV-mapped tunnel meshes for display.
#![no_std]
#![forbid(unsafe_code)]
// `!(x < y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod geometry;
pub mod image;
mod math;
pub mod mesh;
pub mod metrics;
pub mod render;
pub mod rng;
pub mod stitch;
pub mod texture;
pub mod trajectory;

pub use error::{Error, Result};
pub use geometry::{CameraIntrinsics, CylinderModel, CylinderPoint, Mat3, PixelCoord, Pose, SolveCoefficients, Vec3};
pub use image::{Image, Rgb};
