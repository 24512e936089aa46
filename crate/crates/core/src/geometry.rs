//! Two-view value types: rotations, poses, planes, image and scene points,
//! plane-induced homographies, intrinsics and the essential matrix.
//!
//! Planes use the implicit form `n·X + d = 0` in the first camera frame, so a
//! point `X` on the plane gives `d = -n·X`. With that sign the plane-induced
//! homography is `H = R - t nᵀ / d`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Threshold below which distances, homogeneous scales and denominators are
/// treated as zero.
pub const DEGENERACY_EPS: f64 = 1e-12;

/// Entrywise tolerance on `RᵀR = I` and `det R = 1`.
pub const ROTATION_TOL: f64 = 1e-9;

fn all_finite(m: &Matrix3<f64>) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// Proper rotation matrix (orthonormal, determinant +1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if !all_finite(&m) {
            return Err(Error::NonFinite("rotation"));
        }
        let gram = m.transpose() * m - Matrix3::identity();
        let worst = gram.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if worst > ROTATION_TOL {
            return Err(Error::InvalidRotation(format!(
                "RᵀR deviates from identity by {worst:e}"
            )));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > ROTATION_TOL {
            return Err(Error::InvalidRotation(format!("det(R) = {det}")));
        }
        Ok(Self(m))
    }

    pub fn from_row_major(entries: &[f64; 9]) -> Result<Self> {
        Self::new(Matrix3::from_row_slice(entries))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Rodrigues rotation about `axis` (need not be unit length). A zero
    /// angle yields the identity bit-for-bit.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Result<Self> {
        if !angle.is_finite() || !axis.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("axis-angle"));
        }
        if angle == 0.0 {
            return Ok(Self::identity());
        }
        let norm = axis.norm();
        if norm == 0.0 {
            return Err(Error::InvalidRotation("zero rotation axis".into()));
        }
        let k = axis / norm;
        let skew = cross_matrix(&k);
        let m = Matrix3::identity() + skew * angle.sin() + skew * skew * (1.0 - angle.cos());
        Self::new(m)
    }

    /// Rotation by `theta` about the optical (z) axis.
    pub fn about_optical_axis(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        row_major(&self.0)
    }

    /// `self · other`: apply `other` first.
    pub fn compose(&self, other: &RotationMatrix) -> RotationMatrix {
        Self(self.0 * other.0)
    }

    pub fn transpose(&self) -> RotationMatrix {
        Self(self.0.transpose())
    }
}

/// Relative pose mapping first-camera coordinates to the second: `X₂ = R X₁ + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: RotationMatrix,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: RotationMatrix, translation: Vector3<f64>) -> Result<Self> {
        if !translation.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("translation"));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: RotationMatrix::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn transform(&self, x: &ScenePoint) -> ScenePoint {
        ScenePoint::from_vector(&(self.rotation.matrix() * x.to_vector() + self.translation))
    }

    /// Pose of a third camera given `next` relative to this pose's target camera.
    pub fn then(&self, next: &Pose) -> Pose {
        Pose {
            rotation: next.rotation.compose(&self.rotation),
            translation: next.rotation.matrix() * self.translation + next.translation,
        }
    }
}

/// Tangent plane `n·X + d = 0` in the first camera frame, with `‖n‖ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneParams {
    normal: Vector3<f64>,
    distance: f64,
}

impl PlaneParams {
    /// Normalizes `normal` and rescales `distance` by the same factor.
    pub fn new(normal: Vector3<f64>, distance: f64) -> Result<Self> {
        if !normal.iter().all(|x| x.is_finite()) || !distance.is_finite() {
            return Err(Error::NonFinite("plane"));
        }
        let norm = normal.norm();
        if norm == 0.0 {
            return Err(Error::ZeroNormal);
        }
        let distance = distance / norm;
        if distance.abs() <= DEGENERACY_EPS {
            return Err(Error::DegeneratePlane(distance));
        }
        Ok(Self {
            normal: normal / norm,
            distance,
        })
    }

    /// Plane with the given orientation passing through `x`.
    pub fn through_point(normal: Vector3<f64>, x: &ScenePoint) -> Result<Self> {
        let norm = normal.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNormal);
        }
        let unit = normal / norm;
        let d = plane_distance_from_point(&unit, x)?;
        Self::new(unit, d)
    }

    pub fn normal(&self) -> &Vector3<f64> {
        &self.normal
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    /// `n / d`, the inverse-depth plane vector.
    pub fn inverse_depth_vector(&self) -> Vector3<f64> {
        self.normal / self.distance
    }

    /// Signed residual `n·X + d`.
    pub fn residual(&self, x: &ScenePoint) -> f64 {
        self.normal.dot(&x.to_vector()) + self.distance
    }

    /// Depth along the first camera's ray through `p` where it meets the plane.
    pub fn ray_depth(&self, p: &ImagePoint) -> Result<f64> {
        let denom = self.normal.dot(&p.lift());
        if denom.abs() <= DEGENERACY_EPS {
            return Err(Error::RayParallelToPlane);
        }
        Ok(-self.distance / denom)
    }

    /// The same plane expressed in the frame of the camera reached by `pose`.
    pub fn in_frame_of(&self, pose: &Pose) -> Result<PlaneParams> {
        let normal = pose.rotation.matrix() * self.normal;
        Self::new(normal, self.distance - normal.dot(&pose.translation))
    }
}

/// `d = -(n·X)`, the signed distance making `(n, d)` contain `x`.
pub fn plane_distance_from_point(normal: &Vector3<f64>, x: &ScenePoint) -> Result<f64> {
    let d = -normal.dot(&x.to_vector());
    if !d.is_finite() {
        return Err(Error::NonFinite("plane distance"));
    }
    if d.abs() < DEGENERACY_EPS {
        return Err(Error::DegeneratePlane(d));
    }
    Ok(d)
}

/// Point in normalized image coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImagePoint {
    pub u: f64,
    pub v: f64,
}

impl ImagePoint {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    /// Homogeneous lift `[u, v, 1]ᵀ`.
    pub fn lift(&self) -> Vector3<f64> {
        Vector3::new(self.u, self.v, 1.0)
    }

    pub fn distance(&self, other: &ImagePoint) -> f64 {
        (self.u - other.u).abs().max((self.v - other.v).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl ScenePoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    /// Pinhole projection; fails when the point is at or behind the image plane.
    pub fn project(&self) -> Result<ImagePoint> {
        project(&self.to_vector())
    }
}

/// Dehomogenize `[h₁, h₂, h₃]ᵀ` to `(h₁/h₃, h₂/h₃)`.
pub fn project(h: &Vector3<f64>) -> Result<ImagePoint> {
    if !(h.z.abs() > DEGENERACY_EPS) {
        return Err(Error::PointAtInfinity(h.z));
    }
    Ok(ImagePoint::new(h.x / h.z, h.y / h.z))
}

/// 3×3 projective map between normalized image planes, defined up to scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography(Matrix3<f64>);

impl Homography {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if !all_finite(&m) {
            return Err(Error::NonFinite("homography"));
        }
        if m.norm() == 0.0 {
            return Err(Error::ZeroHomography);
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn scaled(&self, lambda: f64) -> Result<Homography> {
        Self::new(self.0 * lambda)
    }

    /// Third homogeneous coordinate of `H·[p, 1]ᵀ`.
    pub fn denominator(&self, p: &ImagePoint) -> f64 {
        let m = &self.0;
        m[(2, 0)] * p.u + m[(2, 1)] * p.v + m[(2, 2)]
    }

    pub fn transfer(&self, p: &ImagePoint) -> Result<ImagePoint> {
        project(&(self.0 * p.lift()))
    }

    /// `other ∘ self`: map with `self` first.
    pub fn then(&self, other: &Homography) -> Result<Homography> {
        Self::new(other.0 * self.0)
    }
}

/// `H = R - t nᵀ / d`.
pub fn homography_from_pose_plane(pose: &Pose, plane: &PlaneParams) -> Result<Homography> {
    let d = plane.distance();
    if d.abs() <= DEGENERACY_EPS {
        return Err(Error::DegeneratePlane(d));
    }
    let r = pose.rotation.matrix();
    let t = &pose.translation;
    let n = plane.normal();
    let h = Matrix3::from_fn(|i, j| r[(i, j)] - t[i] * n[j] / d);
    Homography::new(h)
}

/// Pinhole intrinsics `K = [[fx, skew, cx], [0, fy, cy], [0, 0, 1]]` in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    skew: f64,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, skew: f64) -> Result<Self> {
        if ![fx, fy, cx, cy, skew].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("intrinsics"));
        }
        if fx <= 0.0 || fy <= 0.0 {
            return Err(Error::InvalidIntrinsics(format!(
                "focal lengths must be positive, got fx={fx}, fy={fy}"
            )));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            skew,
        })
    }

    pub fn simple(f: f64, cx: f64, cy: f64) -> Result<Self> {
        Self::new(f, f, cx, cy, 0.0)
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.fx, self.skew, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0,
        )
    }
}

/// `K⁻¹·[pixel, 1]ᵀ`, dehomogenized.
pub fn normalize_pixel(k: &Intrinsics, pixel: &ImagePoint) -> ImagePoint {
    let v = (pixel.v - k.cy) / k.fy;
    let u = (pixel.u - k.cx - k.skew * v) / k.fx;
    ImagePoint::new(u, v)
}

pub fn denormalize_pixel(k: &Intrinsics, p: &ImagePoint) -> ImagePoint {
    ImagePoint::new(k.fx * p.u + k.skew * p.v + k.cx, k.fy * p.v + k.cy)
}

pub(crate) fn cross_matrix(t: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -t.z, t.y, t.z, 0.0, -t.x, -t.y, t.x, 0.0)
}

pub(crate) fn row_major(m: &Matrix3<f64>) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = m[(i, j)];
        }
    }
    out
}

/// Calibrated epipolar constraint `p₂ᵀ E p₁ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialMatrix(Matrix3<f64>);

impl EssentialMatrix {
    /// Rank-2 threshold on `σ_min / σ_max`.
    pub const RANK_TOL: f64 = 1e-9;

    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if !all_finite(&m) {
            return Err(Error::NonFinite("essential matrix"));
        }
        let sv = m.singular_values();
        let max = sv.max();
        if max == 0.0 {
            return Err(Error::NotRankTwo(f64::NAN));
        }
        let ratio = sv.min() / max;
        if ratio >= Self::RANK_TOL {
            return Err(Error::NotRankTwo(ratio));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Copy scaled to unit Frobenius norm.
    pub fn normalized(&self) -> EssentialMatrix {
        Self(self.0 / self.0.norm())
    }

    /// `p₂ᵀ E p₁` with `E` at unit Frobenius norm.
    pub fn epipolar_residual(&self, p1: &ImagePoint, p2: &ImagePoint) -> f64 {
        p2.lift().dot(&(self.normalized().0 * p1.lift()))
    }

    /// Epipolar line `E p₁` in the second image (homogeneous, unnormalized).
    pub fn line_in_second(&self, p1: &ImagePoint) -> Vector3<f64> {
        self.0 * p1.lift()
    }

    /// Epipolar line `Eᵀ p₂` in the first image.
    pub fn line_in_first(&self, p2: &ImagePoint) -> Vector3<f64> {
        self.0.transpose() * p2.lift()
    }

    /// Right null vector (first-image epipole), unit length.
    pub fn epipole_first(&self) -> Vector3<f64> {
        null_vector(&self.0)
    }

    /// Left null vector (second-image epipole), unit length.
    pub fn epipole_second(&self) -> Vector3<f64> {
        null_vector(&self.0.transpose())
    }
}

fn null_vector(m: &Matrix3<f64>) -> Vector3<f64> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &s)| {
            if s < best.1 {
                (i, s)
            } else {
                best
            }
        });
    v_t.row(idx).transpose().normalize()
}

/// `E = [t]ₓ R`.
pub fn essential_from_pose(pose: &Pose) -> Result<EssentialMatrix> {
    let norm = pose.translation.norm();
    if norm <= DEGENERACY_EPS {
        return Err(Error::ZeroTranslation);
    }
    EssentialMatrix::new(cross_matrix(&pose.translation) * pose.rotation.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pose(r: RotationMatrix, t: [f64; 3]) -> Pose {
        Pose::new(r, Vector3::from(t)).unwrap()
    }

    fn plane(n: [f64; 3], d: f64) -> PlaneParams {
        PlaneParams::new(Vector3::from(n), d).unwrap()
    }

    #[test]
    fn homography_lateral_translation() {
        let h = homography_from_pose_plane(
            &pose(RotationMatrix::identity(), [1.0, 0.0, 0.0]),
            &plane([0.0, 0.0, 1.0], 2.0),
        )
        .unwrap();
        let mut expected = Matrix3::identity();
        expected[(0, 2)] = -0.5;
        assert_eq!(*h.matrix(), expected);
    }

    #[test]
    fn homography_zero_translation_is_identity() {
        let h = homography_from_pose_plane(&Pose::identity(), &plane([0.3, -0.4, 0.8], 3.7)).unwrap();
        assert_eq!(*h.matrix(), Matrix3::identity());
    }

    #[test]
    fn degenerate_plane_rejected() {
        assert!(matches!(
            PlaneParams::new(Vector3::new(0.0, 0.0, 1.0), 0.0),
            Err(Error::DegeneratePlane(_))
        ));
        assert!(matches!(
            PlaneParams::new(Vector3::zeros(), 1.0),
            Err(Error::ZeroNormal)
        ));
    }

    #[test]
    fn plane_normalizes_jointly() {
        let p = plane([0.0, 0.0, 2.0], 4.0);
        assert_eq!(*p.normal(), Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(p.distance(), 2.0);
    }

    #[test]
    fn project_examples() {
        assert_eq!(
            project(&Vector3::new(2.0, 4.0, 2.0)).unwrap(),
            ImagePoint::new(1.0, 2.0)
        );
        let p = ImagePoint::new(0.37, -1.25);
        assert_eq!(project(&p.lift()).unwrap(), p);
        assert!(matches!(
            project(&Vector3::new(1.0, 1.0, 0.0)),
            Err(Error::PointAtInfinity(_))
        ));
    }

    #[test]
    fn plane_distance_examples() {
        let z = Vector3::new(0.0, 0.0, 1.0);
        assert_eq!(
            plane_distance_from_point(&z, &ScenePoint::new(0.0, 0.0, 5.0)).unwrap(),
            -5.0
        );
        assert_eq!(
            plane_distance_from_point(&z, &ScenePoint::new(3.0, -2.0, 5.0)).unwrap(),
            -5.0
        );
        let d = plane_distance_from_point(
            &Vector3::new(0.6, 0.0, 0.8),
            &ScenePoint::new(1.0, 0.0, 1.0),
        )
        .unwrap();
        assert_abs_diff_eq!(d, -1.4, epsilon = 1e-15);
        assert!(matches!(
            plane_distance_from_point(&z, &ScenePoint::new(1.0, 2.0, 0.0)),
            Err(Error::DegeneratePlane(_))
        ));
    }

    #[test]
    fn normalize_pixel_examples() {
        let unit = Intrinsics::simple(1.0, 0.0, 0.0).unwrap();
        let p = ImagePoint::new(12.5, -3.0);
        assert_eq!(normalize_pixel(&unit, &p), p);

        let k = Intrinsics::simple(500.0, 320.0, 240.0).unwrap();
        assert_eq!(
            normalize_pixel(&k, &ImagePoint::new(320.0, 240.0)),
            ImagePoint::new(0.0, 0.0)
        );
        assert_eq!(
            normalize_pixel(&k, &ImagePoint::new(820.0, 240.0)),
            ImagePoint::new(1.0, 0.0)
        );
    }

    #[test]
    fn normalize_pixel_matches_matrix_inverse() {
        let k = Intrinsics::new(640.0, 610.0, 300.0, 250.0, 2.5).unwrap();
        let px = ImagePoint::new(17.0, 402.0);
        let expected = project(&(k.matrix().try_inverse().unwrap() * px.lift())).unwrap();
        let got = normalize_pixel(&k, &px);
        assert_abs_diff_eq!(got.u, expected.u, epsilon = 1e-14);
        assert_abs_diff_eq!(got.v, expected.v, epsilon = 1e-14);
    }

    #[test]
    fn invalid_intrinsics() {
        assert!(Intrinsics::new(0.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(Intrinsics::new(1.0, -1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn essential_lateral() {
        let e = essential_from_pose(&pose(RotationMatrix::identity(), [1.0, 0.0, 0.0])).unwrap();
        let expected = Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        assert_eq!(*e.matrix(), expected);
    }

    #[test]
    fn essential_zero_translation() {
        assert_eq!(
            essential_from_pose(&Pose::identity()),
            Err(Error::ZeroTranslation)
        );
    }

    #[test]
    fn essential_scale_invariant_lines() {
        let r = RotationMatrix::from_axis_angle(&Vector3::new(0.2, 1.0, -0.3), 0.4).unwrap();
        let t = [0.3, -0.1, 0.2];
        let e1 = essential_from_pose(&pose(r, t)).unwrap();
        let e2 = essential_from_pose(&pose(r, [3.0 * t[0], 3.0 * t[1], 3.0 * t[2]])).unwrap();
        let n1 = e1.normalized();
        let n2 = e2.normalized();
        assert_abs_diff_eq!(*n1.matrix(), *n2.matrix(), epsilon = 1e-15);
        let p1 = ImagePoint::new(0.1, -0.2);
        let l1 = e1.line_in_second(&p1).normalize();
        let l2 = e2.line_in_second(&p1).normalize();
        assert_abs_diff_eq!(l1, l2, epsilon = 1e-15);
    }

    #[test]
    fn epipoles_are_null_vectors() {
        let r = RotationMatrix::from_axis_angle(&Vector3::new(1.0, 0.5, 0.0), 0.3).unwrap();
        let t = Vector3::new(0.2, 0.4, -0.1);
        let e = essential_from_pose(&Pose::new(r, t).unwrap()).unwrap();
        let e1 = e.epipole_first();
        let e2 = e.epipole_second();
        assert!((e.matrix() * e1).norm() < 1e-14);
        assert!((e.matrix().transpose() * e2).norm() < 1e-14);
        // second epipole is the image of the first camera center: ∝ t
        assert!(e2.cross(&t.normalize()).norm() < 1e-12);
        assert!(e1.cross(&(r.matrix().transpose() * t).normalize()).norm() < 1e-12);
    }

    #[test]
    fn essential_rejects_full_rank() {
        assert!(matches!(
            EssentialMatrix::new(Matrix3::identity()),
            Err(Error::NotRankTwo(_))
        ));
    }

    #[test]
    fn rotation_validation() {
        assert!(RotationMatrix::new(Matrix3::identity() * 2.0).is_err());
        let reflect = Matrix3::new(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(matches!(
            RotationMatrix::new(reflect),
            Err(Error::InvalidRotation(_))
        ));
        assert_eq!(
            RotationMatrix::from_axis_angle(&Vector3::new(0.0, 1.0, 0.0), 0.0).unwrap(),
            RotationMatrix::identity()
        );
    }

    #[test]
    fn plane_in_second_frame_contains_transformed_points() {
        let p = pose(
            RotationMatrix::from_axis_angle(&Vector3::new(0.0, 1.0, 0.2), 0.25).unwrap(),
            [0.3, 0.0, -0.2],
        );
        let x = ScenePoint::new(0.4, -0.3, 4.0);
        let pl = PlaneParams::through_point(Vector3::new(0.2, 0.1, -1.0), &x).unwrap();
        let pl2 = pl.in_frame_of(&p).unwrap();
        assert!(pl2.residual(&p.transform(&x)).abs() < 1e-14);
    }
}
