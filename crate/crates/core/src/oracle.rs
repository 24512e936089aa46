//! Numerical cross-checks that share no algebra with the closed form:
//! difference quotients of the homography warp, and point transfer by
//! explicit ray–plane intersection.

use crate::affine::AffineMap;
use crate::error::{Error, Result};
use crate::geometry::{Homography, ImagePoint, PlaneParams, Pose, ScenePoint, DEGENERACY_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Central,
    Forward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDiffConfig {
    epsilon: f64,
    scheme: Scheme,
}

impl FiniteDiffConfig {
    pub const MIN_EPSILON: f64 = 1e-10;
    pub const MAX_EPSILON: f64 = 1e-2;

    pub fn new(epsilon: f64, scheme: Scheme) -> Result<Self> {
        if !(Self::MIN_EPSILON..=Self::MAX_EPSILON).contains(&epsilon) {
            return Err(Error::InvalidConfig(format!(
                "finite-difference step {epsilon:e} outside [1e-10, 1e-2]"
            )));
        }
        Ok(Self { epsilon, scheme })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }
}

impl Default for FiniteDiffConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            scheme: Scheme::Central,
        }
    }
}

fn warp(h: &Homography, u: f64, v: f64) -> Result<ImagePoint> {
    let p = ImagePoint::new(u, v);
    let w = h.denominator(&p);
    if !(w.abs() > DEGENERACY_EPS) {
        return Err(Error::DegenerateDenominator(w));
    }
    h.transfer(&p)
}

/// Difference-quotient Jacobian of `p ↦ project(H·[p, 1]ᵀ)` at `p1`.
pub fn fd_jacobian(h: &Homography, p1: &ImagePoint, cfg: &FiniteDiffConfig) -> Result<AffineMap> {
    let eps = cfg.epsilon;
    let (u, v) = (p1.u, p1.v);
    let (du, dv) = match cfg.scheme {
        Scheme::Central => {
            let up = warp(h, u + eps, v)?;
            let um = warp(h, u - eps, v)?;
            let vp = warp(h, u, v + eps)?;
            let vm = warp(h, u, v - eps)?;
            let k = 2.0 * eps;
            (
                ((up.u - um.u) / k, (up.v - um.v) / k),
                ((vp.u - vm.u) / k, (vp.v - vm.v) / k),
            )
        }
        Scheme::Forward => {
            let c = warp(h, u, v)?;
            let up = warp(h, u + eps, v)?;
            let vp = warp(h, u, v + eps)?;
            (
                ((up.u - c.u) / eps, (up.v - c.v) / eps),
                ((vp.u - c.u) / eps, (vp.v - c.v) / eps),
            )
        }
    };
    // columns are ∂/∂u and ∂/∂v
    AffineMap::from_row_major([du.0, dv.0, du.1, dv.1])
}

/// Second-view image of the point where the first camera's ray through `p1`
/// meets the plane. Never forms the homography.
pub fn transfer_via_3d(pose: &Pose, plane: &PlaneParams, p1: &ImagePoint) -> Result<ImagePoint> {
    let depth = plane.ray_depth(p1)?;
    if !(depth > 0.0) {
        return Err(Error::NegativeDepth(depth, 1));
    }
    let x = ScenePoint::new(depth * p1.u, depth * p1.v, depth);
    let x2 = pose.transform(&x);
    if !(x2.z > 0.0) {
        return Err(Error::NegativeDepth(x2.z, 2));
    }
    x2.project()
}
