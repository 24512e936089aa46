use thiserror::Error;

/// Failure modes shared by every geometric operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("plane passes through the first camera center (|d| = {0:e})")]
    DegeneratePlane(f64),
    #[error("plane normal has zero length")]
    ZeroNormal,
    #[error("homogeneous point lies at infinity (w = {0:e})")]
    PointAtInfinity(f64),
    #[error("translation is zero; epipolar geometry undefined")]
    ZeroTranslation,
    #[error("matrix is not a rotation: {0}")]
    InvalidRotation(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("homography is the zero matrix")]
    ZeroHomography,
    #[error("essential matrix is not rank 2 (sigma_min/sigma_max = {0:e})")]
    NotRankTwo(f64),
    #[error("affine denominator vanishes (|s| = {0:e})")]
    DegenerateDenominator(f64),
    #[error("viewing ray is parallel to the plane")]
    RayParallelToPlane,
    #[error("point has non-positive depth ({0:e}) in camera {1}")]
    NegativeDepth(f64, u8),
    #[error("translation too small to carry plane information (|t| = {0:e})")]
    UninformativeTranslation(f64),
    #[error("linear system is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("no plane orientation puts the surface in front of the first camera")]
    PlaneBehindCamera,
    #[error("local affine map is singular (|det| = {0:e})")]
    DegenerateAffine(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("rejection sampling exhausted after {0} attempts")]
    ExhaustedRejection(usize),
}

impl Error {
    /// Stable kebab-case code used in record sidecars.
    pub fn reason(&self) -> &'static str {
        match self {
            Error::DegeneratePlane(_) | Error::ZeroNormal => "degenerate-plane",
            Error::PointAtInfinity(_) => "point-at-infinity",
            Error::ZeroTranslation => "zero-translation",
            Error::InvalidRotation(_) => "invalid-rotation",
            Error::NonFinite(_) => "non-finite",
            Error::InvalidIntrinsics(_) => "invalid-intrinsics",
            Error::ZeroHomography => "zero-homography",
            Error::NotRankTwo(_) => "not-rank-two",
            Error::DegenerateDenominator(_) => "degenerate-denominator",
            Error::RayParallelToPlane => "ray-parallel-to-plane",
            Error::NegativeDepth(..) => "negative-depth",
            Error::UninformativeTranslation(_) => "uninformative-translation",
            Error::IllConditioned(_) => "ill-conditioned",
            Error::PlaneBehindCamera => "plane-behind-camera",
            Error::DegenerateAffine(_) => "degenerate-affine",
            Error::InvalidConfig(_) => "invalid-config",
            Error::ExhaustedRejection(_) => "exhausted-rejection",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
