//! Exact local affine transformations between two calibrated views.
//!
//! Given a relative pose `(R, t)`, a tangent plane `(n, d)` and a point in
//! the first image, [`affine::affine_elementwise`] and
//! [`affine::affine_unified`] return the 2×2 Jacobian of the plane-induced
//! warp. [`oracle`] holds independent numerical checks, [`inverse`] recovers
//! the plane from an observed affine correspondence, [`sim`] generates
//! reproducible synthetic scenes and [`record`] is the line-delimited JSON
//! codec used by the `affcorr` tool.

// `!(x > tol)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affine;
pub mod error;
pub mod geometry;
pub mod inverse;
pub mod oracle;
pub mod record;
pub mod sim;

pub use affine::{
    affine_elementwise, affine_from_homography, affine_unified, denominator_s,
    pure_rotation_affine, pure_translation_affine, stereo_affine, AffineDecomposition, AffineMap,
    AffineResult,
};
pub use error::{Error, Result};
pub use geometry::{
    denormalize_pixel, essential_from_pose, homography_from_pose_plane, normalize_pixel,
    plane_distance_from_point, project, EssentialMatrix, Homography, ImagePoint, Intrinsics,
    PlaneParams, Pose, RotationMatrix, ScenePoint,
};
pub use inverse::{estimate_normal, AffineCorrespondence, NormalEstimate};
pub use oracle::{fd_jacobian, transfer_via_3d, FiniteDiffConfig, Scheme};
pub use record::{CorrespondenceRecord, RecordError};
pub use sim::{generate_scene, scene_to_records, SceneSample, SimConfig, SimulatedPoint};
