use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid camera intrinsics: {0}")]
    InvalidIntrinsics(&'static str),

    #[error("rotation is not orthonormal with det +1 (max deviation {deviation:e})")]
    InvalidRotation { deviation: f64 },

    #[error("non-finite translation")]
    InvalidTranslation,

    #[error("cylinder radius must be positive and finite, got {0}")]
    InvalidRadius(f64),

    #[error("point lies on the cylinder axis; azimuth is undefined")]
    AxisDegenerate,

    #[error("camera at lateral distance {distance} m is not strictly inside the cylinder of radius {radius} m")]
    CameraOutsideCylinder { distance: f64, radius: f64 },

    #[error("ray is parallel to the cylinder axis and never reaches the wall")]
    AxisParallelRay,

    #[error("invalid texture: {0}")]
    InvalidTexture(&'static str),

    #[error("invalid render config: {0}")]
    InvalidRenderConfig(&'static str),

    #[error("invalid trajectory config: {0}")]
    InvalidTrajectory(&'static str),

    #[error("frames {frames:?} leave the cylinder")]
    FramesOutsideCylinder { frames: Vec<usize> },

    #[error("invalid panorama spec: {0}")]
    InvalidPanoramaSpec(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty mask")]
    EmptyMask,

    #[error("no frames to stitch")]
    NoFrames,

    #[error("stitched panorama has zero coverage")]
    ZeroCoverage,

    #[error("frame {0} has too few valid border samples to form a boundary")]
    DegenerateBoundary(usize),

    #[error("invalid mesh parameters: {0}")]
    InvalidMesh(&'static str),

    #[error("invalid tunnel curve: {0}")]
    InvalidCurve(String),
}
