//! Recovering the tangent plane from one affine correspondence and a known pose.
//!
//! With `q = n/d` every entry of the unified formula becomes linear in `q`:
//!
//! ```text
//! s(q)   = r₃·p₁ − t_z (q·p₁)
//! b_ij(q) = R_ij − x₂ᵢ R₃ⱼ − qⱼ (tᵢ − x₂ᵢ t_z)
//! ```
//!
//! so `a_ij s(q) = b_ij(q)` gives four equations. The point transfer
//! `x₂ᵢ (h₃·p₁) = hᵢ·p₁` adds two more, which pin down `q_z` when `t_z = 0`.

use nalgebra::{SMatrix, SVector, Vector3};

use crate::affine::AffineMap;
use crate::error::{Error, Result};
use crate::geometry::{ImagePoint, PlaneParams, Pose, DEGENERACY_EPS};

/// Largest accepted ratio of extreme singular values.
pub const MAX_CONDITION: f64 = 1e10;

/// Observed point match with its local affine map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineCorrespondence {
    pub p1: ImagePoint,
    pub p2: ImagePoint,
    pub affine: AffineMap,
}

impl AffineCorrespondence {
    pub fn new(p1: ImagePoint, p2: ImagePoint, affine: AffineMap) -> Result<Self> {
        if !p1.is_finite() || !p2.is_finite() {
            return Err(Error::NonFinite("correspondence"));
        }
        let det = affine.det();
        if !(det.abs() > DEGENERACY_EPS) {
            return Err(Error::DegenerateAffine(det));
        }
        Ok(Self { p1, p2, affine })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalEstimate {
    /// Unit normal, oriented toward the first camera.
    pub normal: Vector3<f64>,
    /// Plane offset, positive under the orientation above.
    pub distance: f64,
    /// Euclidean norm of the least-squares residual.
    pub residual: f64,
    /// `σ_max / σ_min` of the design matrix.
    pub conditioning: f64,
}

impl NormalEstimate {
    pub fn plane(&self) -> Result<PlaneParams> {
        PlaneParams::new(self.normal, self.distance)
    }
}

type Design = SMatrix<f64, 6, 3>;
type Rhs = SVector<f64, 6>;

fn linear_system(pose: &Pose, ac: &AffineCorrespondence) -> (Design, Rhs) {
    let r = pose.rotation.matrix();
    let t = &pose.translation;
    let p1 = ac.p1.lift();
    let x2 = [ac.p2.u, ac.p2.v];
    let a = ac.affine.matrix();
    let r3p = r.row(2).dot(&p1.transpose());

    let mut m = Design::zeros();
    let mut rhs = Rhs::zeros();
    let mut row = 0;
    for i in 0..2 {
        let c = t[i] - x2[i] * t.z;
        for j in 0..2 {
            let coeff = -a[(i, j)] * t.z * p1;
            m.set_row(row, &coeff.transpose());
            m[(row, j)] += c;
            rhs[row] = r[(i, j)] - x2[i] * r[(2, j)] - a[(i, j)] * r3p;
            row += 1;
        }
    }
    for i in 0..2 {
        let c = t[i] - x2[i] * t.z;
        m.set_row(row, &(c * p1).transpose());
        rhs[row] = r.row(i).dot(&p1.transpose()) - x2[i] * r3p;
        row += 1;
    }
    (m, rhs)
}

/// Least-squares plane `(n, d)` consistent with `ac` under `pose`.
pub fn estimate_normal(pose: &Pose, ac: &AffineCorrespondence) -> Result<NormalEstimate> {
    let tn = pose.translation.norm();
    if !(tn > DEGENERACY_EPS) {
        return Err(Error::UninformativeTranslation(tn));
    }
    let (m, rhs) = linear_system(pose, ac);
    if !m.iter().chain(rhs.iter()).all(|x| x.is_finite()) {
        return Err(Error::NonFinite("normal system"));
    }

    let svd = m.svd(true, true);
    let sv = &svd.singular_values;
    let conditioning = sv.max() / sv.min();
    if !(conditioning <= MAX_CONDITION) {
        return Err(Error::IllConditioned(conditioning));
    }
    let q: Vector3<f64> = svd
        .solve(&rhs, 0.0)
        .map_err(|_| Error::IllConditioned(conditioning))?;
    let residual = (m * q - rhs).norm();

    // ray depth at p1 is -1/(q·p1) under n·X + d = 0
    if !(q.dot(&ac.p1.lift()) < 0.0) {
        return Err(Error::PlaneBehindCamera);
    }
    // scale first: squaring components of a tiny q underflows
    let unit = q / q.amax();
    let normal = unit.normalize();
    let distance = 1.0 / (unit.norm() * q.amax());
    if !distance.is_finite() || !normal.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("plane distance"));
    }
    Ok(NormalEstimate {
        normal,
        distance,
        residual,
        conditioning,
    })
}
