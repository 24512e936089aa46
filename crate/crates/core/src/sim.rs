//! Deterministic synthetic two-view scenes.
//!
//! Scene `index` under seed `seed` is drawn from a ChaCha8 stream
//! (`ChaCha8Rng::seed_from_u64(seed)` with stream number `index`). Uniform
//! reals take the top 53 bits of each 64-bit output, so the sample sequence
//! depends only on ChaCha8 and this module.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::affine::{affine_elementwise, denominator_s};
use crate::error::{Error, Result};
use crate::geometry::{ImagePoint, PlaneParams, Pose, RotationMatrix, ScenePoint};
use crate::record::CorrespondenceRecord;

/// First-view points are drawn from `[-IMAGE_HALF_EXTENT, IMAGE_HALF_EXTENT]²`.
pub const IMAGE_HALF_EXTENT: f64 = 0.5;
/// Minimum `|s|` accepted at any sampled point.
pub const MIN_DENOMINATOR: f64 = 0.1;
/// Total draws allowed per scene before giving up.
pub const MAX_ATTEMPTS: usize = 10_000;
const POINT_ATTEMPTS: usize = 100;
const PLANE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub scenes: u64,
    pub points_per_scene: usize,
    /// Largest rotation angle, radians.
    pub rotation_bound: f64,
    pub translation_min: f64,
    pub translation_bound: f64,
    /// Allowed first-camera depth of every sampled point.
    pub depth_range: (f64, f64),
    /// Largest angle between `-n` and the first optical axis, radians.
    pub normal_cone: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            scenes: 1000,
            points_per_scene: 10,
            rotation_bound: 0.5,
            translation_min: 0.0,
            translation_bound: 1.0,
            depth_range: (0.5, 20.0),
            normal_cone: PI / 3.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let nonneg = [
            ("rotation bound", self.rotation_bound),
            ("translation bound", self.translation_bound),
            ("translation min", self.translation_min),
            ("normal cone", self.normal_cone),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if self.rotation_bound > PI {
            return bad(format!("rotation bound {} exceeds pi", self.rotation_bound));
        }
        if self.translation_min > self.translation_bound {
            return bad("translation min exceeds translation bound".into());
        }
        if self.normal_cone >= PI / 2.0 {
            return bad("normal cone must be narrower than 90 degrees".into());
        }
        let (lo, hi) = self.depth_range;
        if !(lo > 0.1 && lo < hi && hi < 100.0) {
            return bad(format!("depth range ({lo}, {hi}) must lie inside (0.1, 100)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatedPoint {
    pub x: ScenePoint,
    pub p1: ImagePoint,
    /// Projection of `R X + t` into the second view.
    pub p2: ImagePoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSample {
    pub seed: u64,
    pub index: u64,
    pub pose: Pose,
    pub plane: PlaneParams,
    pub points: Vec<SimulatedPoint>,
}

struct Sampler(ChaCha8Rng);

impl Sampler {
    fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    /// Uniform in `[0, 1)`.
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    fn direction(&mut self) -> Vector3<f64> {
        let z = self.range(-1.0, 1.0);
        let phi = self.range(0.0, 2.0 * PI);
        let r = (1.0 - z * z).max(0.0).sqrt();
        Vector3::new(r * phi.cos(), r * phi.sin(), z)
    }
}

fn sample_pose(rng: &mut Sampler, cfg: &SimConfig) -> Result<Pose> {
    let axis = rng.direction();
    let angle = cfg.rotation_bound * rng.unit();
    let rotation = RotationMatrix::from_axis_angle(&axis, angle)?;
    let dir = rng.direction();
    let norm = rng.range(cfg.translation_min, cfg.translation_bound);
    Pose::new(rotation, dir * norm)
}

/// Plane through a random visible anchor with normal inside the cone
/// around `[0, 0, -1]`. `None` if the plane does not face the camera.
fn sample_plane(rng: &mut Sampler, cfg: &SimConfig) -> Option<PlaneParams> {
    let (lo, hi) = cfg.depth_range;
    let depth = rng.range(lo, hi);
    let au = rng.range(-IMAGE_HALF_EXTENT, IMAGE_HALF_EXTENT);
    let av = rng.range(-IMAGE_HALF_EXTENT, IMAGE_HALF_EXTENT);
    let anchor = ScenePoint::new(depth * au, depth * av, depth);

    // uniform on the spherical cap of half-angle normal_cone
    let cos_theta = rng.range(cfg.normal_cone.cos(), 1.0);
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    let phi = rng.range(0.0, 2.0 * PI);
    let normal = -Vector3::new(sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta);

    let plane = PlaneParams::through_point(normal, &anchor).ok()?;
    (plane.distance() > 0.0).then_some(plane)
}

fn sample_point(
    rng: &mut Sampler,
    cfg: &SimConfig,
    pose: &Pose,
    plane: &PlaneParams,
) -> Option<SimulatedPoint> {
    let p1 = ImagePoint::new(
        rng.range(-IMAGE_HALF_EXTENT, IMAGE_HALF_EXTENT),
        rng.range(-IMAGE_HALF_EXTENT, IMAGE_HALF_EXTENT),
    );
    let depth = plane.ray_depth(&p1).ok()?;
    let (lo, hi) = cfg.depth_range;
    if !(depth >= lo && depth <= hi) {
        return None;
    }
    let x = ScenePoint::new(depth * p1.u, depth * p1.v, depth);
    if !(plane.residual(&x).abs() < PLANE_TOL) {
        return None;
    }
    let x2 = pose.transform(&x);
    if !(x2.z > 0.0) {
        return None;
    }
    let s = denominator_s(pose, plane, &p1).ok()?;
    if !(s.abs() > MIN_DENOMINATOR) {
        return None;
    }
    let p2 = x2.project().ok()?;
    Some(SimulatedPoint { x, p1, p2 })
}

/// Scene `index` of the configured stream. Pure in `(cfg, index)`.
pub fn generate_scene(cfg: &SimConfig, index: u64) -> Result<SceneSample> {
    cfg.validate()?;
    let mut rng = Sampler::new(cfg.seed, index);
    let mut attempts = 0usize;

    'scene: while attempts < MAX_ATTEMPTS {
        attempts += 1;
        let pose = sample_pose(&mut rng, cfg)?;
        let Some(plane) = sample_plane(&mut rng, cfg) else {
            continue;
        };
        let mut points = Vec::with_capacity(cfg.points_per_scene);
        while points.len() < cfg.points_per_scene {
            let mut found = None;
            for _ in 0..POINT_ATTEMPTS {
                attempts += 1;
                if attempts > MAX_ATTEMPTS {
                    break 'scene;
                }
                found = sample_point(&mut rng, cfg, &pose, &plane);
                if found.is_some() {
                    break;
                }
            }
            match found {
                Some(p) => points.push(p),
                None => continue 'scene,
            }
        }
        return Ok(SceneSample {
            seed: cfg.seed,
            index,
            pose,
            plane,
            points,
        });
    }
    Err(Error::ExhaustedRejection(MAX_ATTEMPTS))
}

/// One record per simulated point with the closed-form affine as ground truth.
pub fn scene_to_records(sample: &SceneSample) -> Result<Vec<CorrespondenceRecord>> {
    sample
        .points
        .iter()
        .enumerate()
        .map(|(k, pt)| {
            let res = affine_elementwise(&sample.pose, &sample.plane, &pt.p1)?;
            let mut rec = CorrespondenceRecord::from_scene(&sample.pose, &sample.plane, &pt.p1);
            rec.p2 = Some([res.p2.u, res.p2.v]);
            rec.affine = Some(res.affine.to_row_major());
            rec.s = Some(res.s);
            rec.scene = Some(sample.index);
            rec.point = Some(k as u64);
            Ok(rec)
        })
        .collect()
}
