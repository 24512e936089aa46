//! Closed-form local affine transformation between two calibrated views.
//!
//! For a plane `(n, d)`, pose `(R, t)` and a first-view point `p₁` with
//! transfer `p₂ = (u₂, v₂)`, the Jacobian of the plane-induced warp is
//!
//! ```text
//! A = (1/s) · ( R₂ₓ₂ − [u₂ v₂]ᵀ [R₃₁ R₃₂] − (1/d) [tₓ − u₂t_z, t_y − v₂t_z]ᵀ [nₓ n_y] )
//! s = (r₃ − (t_z/d) n)ᵀ [u₁, v₁, 1]ᵀ
//! ```
//!
//! i.e. the upper-left rotation block minus two rank-one dyads, divided by
//! the third homogeneous coordinate of `H p₁`.

use nalgebra::{Matrix2, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{
    homography_from_pose_plane, Homography, ImagePoint, PlaneParams, Pose, RotationMatrix,
    DEGENERACY_EPS,
};

/// Row-major 2×2 local affine map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap(Matrix2<f64>);

impl AffineMap {
    pub fn new(m: Matrix2<f64>) -> Result<Self> {
        if !m.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("affine map"));
        }
        Ok(Self(m))
    }

    pub fn from_row_major(a: [f64; 4]) -> Result<Self> {
        Self::new(Matrix2::new(a[0], a[1], a[2], a[3]))
    }

    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    pub fn to_row_major(&self) -> [f64; 4] {
        [self.0[(0, 0)], self.0[(0, 1)], self.0[(1, 0)], self.0[(1, 1)]]
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..2)
            .map(|i| self.0[(i, 0)].abs() + self.0[(i, 1)].abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &AffineMap) -> f64 {
        (self.0 - other.0).iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Entrywise difference scaled by `max(1, ‖self‖∞)`.
    pub fn relative_diff(&self, other: &AffineMap) -> f64 {
        self.max_abs_diff(other) / self.norm_inf().max(1.0)
    }

    /// `self · first`: the local map of applying `first` then `self`.
    pub fn after(&self, first: &AffineMap) -> AffineMap {
        Self(self.0 * first.0)
    }
}

/// Closed-form affine together with the intermediate quantities that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineResult {
    pub affine: AffineMap,
    /// Transferred point in the second view.
    pub p2: ImagePoint,
    /// Shared denominator, third homogeneous coordinate of `H·[p₁, 1]ᵀ`.
    pub s: f64,
    /// Numerators `b₁₁, b₁₂, b₂₁, b₂₂`, row-major.
    pub b: [f64; 4],
}

impl AffineResult {
    fn from_numerators(b: [f64; 4], s: f64, p2: ImagePoint) -> Result<Self> {
        let affine = AffineMap::from_row_major([b[0] / s, b[1] / s, b[2] / s, b[3] / s])?;
        Ok(Self { affine, p2, s, b })
    }
}

/// The three 2×2 terms of the unified formula, kept separate.
///
/// The terms carry the signs they enter with: the map is
/// `(rotation_block − point_dyad − normal_dyad) / s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineDecomposition {
    /// Upper-left 2×2 block of `R`.
    pub rotation_block: Matrix2<f64>,
    /// `[u₂, v₂]ᵀ [R₃₁, R₃₂]`.
    pub point_dyad: Matrix2<f64>,
    /// `(1/d) [tₓ − u₂t_z, t_y − v₂t_z]ᵀ [nₓ, n_y]`.
    pub normal_dyad: Matrix2<f64>,
    pub s: f64,
}

impl AffineDecomposition {
    pub fn affine(&self) -> Result<AffineMap> {
        AffineMap::new((self.rotation_block - self.point_dyad - self.normal_dyad) / self.s)
    }
}

fn check_denominator(s: f64) -> Result<f64> {
    if !(s.abs() > DEGENERACY_EPS) {
        return Err(Error::DegenerateDenominator(s));
    }
    Ok(s)
}

/// `s = H₃₁u₁ + H₃₂v₁ + H₃₃` with `H = R − t nᵀ/d`.
pub fn denominator_s(pose: &Pose, plane: &PlaneParams, p1: &ImagePoint) -> Result<f64> {
    let h = homography_from_pose_plane(pose, plane)?;
    check_denominator(h.denominator(p1))
}

/// Element-by-element evaluation of `b_ij / s`, with `p₂` obtained by
/// transferring `p₁` through the plane-induced homography.
pub fn affine_elementwise(pose: &Pose, plane: &PlaneParams, p1: &ImagePoint) -> Result<AffineResult> {
    let h = homography_from_pose_plane(pose, plane)?;
    let s = check_denominator(h.denominator(p1))?;
    let p2 = h.transfer(p1)?;

    let r = pose.rotation.matrix();
    let t = &pose.translation;
    let n = plane.normal();
    let d = plane.distance();
    let (u2, v2) = (p2.u, p2.v);

    let b11 = r[(0, 0)] - u2 * r[(2, 0)] - n.x / d * (t.x - u2 * t.z);
    let b12 = r[(0, 1)] - u2 * r[(2, 1)] - n.y / d * (t.x - u2 * t.z);
    let b21 = r[(1, 0)] - v2 * r[(2, 0)] - n.x / d * (t.y - v2 * t.z);
    let b22 = r[(1, 1)] - v2 * r[(2, 1)] - n.y / d * (t.y - v2 * t.z);

    AffineResult::from_numerators([b11, b12, b21, b22], s, p2)
}

/// Three-term decomposition for a caller-supplied correspondence `(p₁, p₂)`.
///
/// `p₂` is not checked against the homography so measured matches can be
/// plugged in; with the exact transfer the assembled map equals
/// [`affine_elementwise`].
pub fn affine_unified(
    pose: &Pose,
    plane: &PlaneParams,
    p1: &ImagePoint,
    p2: &ImagePoint,
) -> Result<AffineDecomposition> {
    let s = denominator_s(pose, plane, p1)?;
    let r = pose.rotation.matrix();
    let t = &pose.translation;
    let n = plane.normal();
    let d = plane.distance();

    let rotation_block = r.fixed_view::<2, 2>(0, 0).into_owned();
    let point_dyad = Matrix2::new(
        p2.u * r[(2, 0)],
        p2.u * r[(2, 1)],
        p2.v * r[(2, 0)],
        p2.v * r[(2, 1)],
    );
    let cx = (t.x - p2.u * t.z) / d;
    let cy = (t.y - p2.v * t.z) / d;
    let normal_dyad = Matrix2::new(cx * n.x, cx * n.y, cy * n.x, cy * n.y);

    Ok(AffineDecomposition {
        rotation_block,
        point_dyad,
        normal_dyad,
        s,
    })
}

/// Exact Jacobian of `p ↦ project(H·[p, 1]ᵀ)` at `p1` for an arbitrary homography.
pub fn affine_from_homography(h: &Homography, p1: &ImagePoint) -> Result<AffineResult> {
    let s = check_denominator(h.denominator(p1))?;
    let p2 = h.transfer(p1)?;
    let m = h.matrix();
    let b = [
        m[(0, 0)] - m[(2, 0)] * p2.u,
        m[(0, 1)] - m[(2, 1)] * p2.u,
        m[(1, 0)] - m[(2, 0)] * p2.v,
        m[(1, 1)] - m[(2, 1)] * p2.v,
    ];
    AffineResult::from_numerators(b, s, p2)
}

/// Rectified stereo (`R = I`, `t = [baseline, 0, 0]ᵀ`): the affine is the
/// same at every image point.
pub fn stereo_affine(baseline: f64, plane: &PlaneParams) -> Result<AffineMap> {
    let d = plane.distance();
    if d.abs() <= DEGENERACY_EPS {
        return Err(Error::DegeneratePlane(d));
    }
    let n = plane.normal();
    AffineMap::from_row_major([1.0 - baseline * n.x / d, -baseline * n.y / d, 0.0, 1.0])
}

/// Camera translating without rotating.
pub fn pure_translation_affine(
    t: &Vector3<f64>,
    plane: &PlaneParams,
    p1: &ImagePoint,
) -> Result<AffineResult> {
    let pose = Pose::new(RotationMatrix::identity(), *t)?;
    affine_elementwise(&pose, plane, p1)
}

/// Camera rotating about its center. The homography reduces to `R`, so the
/// result does not depend on any plane.
pub fn pure_rotation_affine(r: &RotationMatrix, p1: &ImagePoint) -> Result<AffineResult> {
    affine_from_homography(&Homography::new(*r.matrix())?, p1)
}
