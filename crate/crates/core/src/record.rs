//! Line-delimited JSON transport for correspondences.
//!
//! One object per line. Geometry fields are optional at the codec level so a
//! single schema serves every pipeline stage; each stage asks for the fields
//! it needs through the typed accessors and gets a reason-coded
//! [`RecordError`] when they are missing or violate a domain invariant.
//! Unknown keys survive a parse/serialize cycle unchanged.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::affine::AffineMap;
use crate::error::Error;
use crate::geometry::{ImagePoint, PlaneParams, Pose, RotationMatrix};
use crate::inverse::AffineCorrespondence;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{reason}: {detail}")]
pub struct RecordError {
    pub reason: &'static str,
    pub detail: String,
}

impl RecordError {
    pub fn missing(field: &str) -> Self {
        Self {
            reason: "missing-field",
            detail: format!("record has no '{field}'"),
        }
    }
}

impl From<Error> for RecordError {
    fn from(e: Error) -> Self {
        Self {
            reason: e.reason(),
            detail: e.to_string(),
        }
    }
}

fn skip<T>(v: &Option<T>) -> bool {
    v.is_none()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceRecord {
    #[serde(rename = "R", default, skip_serializing_if = "skip")]
    pub rotation: Option<[f64; 9]>,
    #[serde(default, skip_serializing_if = "skip")]
    pub t: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "skip")]
    pub n: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "skip")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "skip")]
    pub p1: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "skip")]
    pub p2: Option<[f64; 2]>,
    #[serde(rename = "A", default, skip_serializing_if = "skip")]
    pub affine: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "skip")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "skip")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "skip")]
    pub conditioning: Option<f64>,
    #[serde(default, skip_serializing_if = "skip")]
    pub n_est: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "skip")]
    pub d_est: Option<f64>,
    /// Angle in radians between `n_est` and `n`, when both are present.
    #[serde(default, skip_serializing_if = "skip")]
    pub angular_error: Option<f64>,
    #[serde(default, skip_serializing_if = "skip")]
    pub scene: Option<u64>,
    #[serde(default, skip_serializing_if = "skip")]
    pub point: Option<u64>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl CorrespondenceRecord {
    pub fn from_scene(pose: &Pose, plane: &PlaneParams, p1: &ImagePoint) -> Self {
        let n = plane.normal();
        Self {
            rotation: Some(pose.rotation.to_row_major()),
            t: Some(pose.translation.into()),
            n: Some([n.x, n.y, n.z]),
            d: Some(plane.distance()),
            p1: Some([p1.u, p1.v]),
            ..Self::default()
        }
    }

    pub fn parse_line(line: &str) -> Result<Self, RecordError> {
        serde_json::from_str(line).map_err(|e| RecordError {
            reason: "parse-error",
            detail: e.to_string(),
        })
    }

    /// Compact single-line JSON. Floats use the shortest representation
    /// that reads back to the same `f64`.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record fields are always serializable")
    }

    pub fn pose(&self) -> Result<Pose, RecordError> {
        let r = self.rotation.ok_or_else(|| RecordError::missing("R"))?;
        let t = self.t.ok_or_else(|| RecordError::missing("t"))?;
        Ok(Pose::new(RotationMatrix::from_row_major(&r)?, Vector3::from(t))?)
    }

    pub fn plane(&self) -> Result<PlaneParams, RecordError> {
        let n = self.n.ok_or_else(|| RecordError::missing("n"))?;
        let d = self.d.ok_or_else(|| RecordError::missing("d"))?;
        Ok(PlaneParams::new(Vector3::from(n), d)?)
    }

    pub fn p1(&self) -> Result<ImagePoint, RecordError> {
        point(self.p1, "p1")
    }

    pub fn p2(&self) -> Result<ImagePoint, RecordError> {
        point(self.p2, "p2")
    }

    pub fn affine_map(&self) -> Result<AffineMap, RecordError> {
        let a = self.affine.ok_or_else(|| RecordError::missing("A"))?;
        Ok(AffineMap::from_row_major(a)?)
    }

    pub fn affine_correspondence(&self) -> Result<AffineCorrespondence, RecordError> {
        Ok(AffineCorrespondence::new(
            self.p1()?,
            self.p2()?,
            self.affine_map()?,
        )?)
    }
}

fn point(p: Option<[f64; 2]>, name: &str) -> Result<ImagePoint, RecordError> {
    let [u, v] = p.ok_or_else(|| RecordError::missing(name))?;
    let p = ImagePoint::new(u, v);
    if !p.is_finite() {
        return Err(Error::NonFinite("image point").into());
    }
    Ok(p)
}
