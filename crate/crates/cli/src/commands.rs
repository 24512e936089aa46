use std::io::{BufRead, Write};
use std::time::Instant;

use affcorr::{
    affine_elementwise, affine_unified, estimate_normal, fd_jacobian, generate_scene,
    homography_from_pose_plane, scene_to_records, transfer_via_3d, CorrespondenceRecord,
    FiniteDiffConfig, RecordError, SimConfig,
};
use nalgebra::Vector3;
use serde::Serialize;

use crate::io::{Lines, Sidecar};
use crate::Failure;

/// Point-transfer agreement required between the homography and the
/// ray–plane oracle.
pub const TRANSFER_TOL: f64 = 1e-9;

fn write_line(out: &mut dyn Write, line: &str) -> Result<(), Failure> {
    writeln!(out, "{line}").map_err(|e| Failure::io(format!("write failed: {e}")))
}

fn flush(out: &mut dyn Write) -> Result<(), Failure> {
    out.flush()
        .map_err(|e| Failure::io(format!("write failed: {e}")))
}

pub fn simulate(cfg: &SimConfig, out: &mut dyn Write) -> Result<bool, Failure> {
    for index in 0..cfg.scenes {
        let sample = generate_scene(cfg, index)
            .map_err(|e| Failure::Record(format!("scene {index}: {e}")))?;
        let records = scene_to_records(&sample)
            .map_err(|e| Failure::Record(format!("scene {index}: {e}")))?;
        for rec in records {
            write_line(out, &rec.to_line())?;
        }
    }
    flush(out)?;
    Ok(true)
}

/// Map every parsable record through `f`, routing failures to the sidecar.
fn map_records<R, F>(
    input: R,
    out: &mut dyn Write,
    mut sidecar: Sidecar,
    mut f: F,
) -> Result<bool, Failure>
where
    R: BufRead,
    F: FnMut(CorrespondenceRecord) -> Result<CorrespondenceRecord, RecordError>,
{
    for line in Lines::new(input) {
        let line = line?;
        let outcome = line
            .text
            .as_deref()
            .map_err(Clone::clone)
            .and_then(CorrespondenceRecord::parse_line)
            .and_then(&mut f);
        match outcome {
            Ok(rec) => write_line(out, &rec.to_line())?,
            Err(err) => {
                let raw = line.text.as_deref().unwrap_or("");
                sidecar.reject(line.number, &err, raw)?;
            }
        }
    }
    flush(out)?;
    Ok(sidecar.finish()? == 0)
}

pub fn affine<R: BufRead>(input: R, out: &mut dyn Write, sidecar: Sidecar) -> Result<bool, Failure> {
    map_records(input, out, sidecar, |mut rec| {
        let pose = rec.pose()?;
        let plane = rec.plane()?;
        let p1 = rec.p1()?;
        let res = affine_elementwise(&pose, &plane, &p1)?;
        rec.p2 = Some([res.p2.u, res.p2.v]);
        rec.affine = Some(res.affine.to_row_major());
        rec.s = Some(res.s);
        Ok(rec)
    })
}

fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

pub fn estimate<R: BufRead>(
    input: R,
    out: &mut dyn Write,
    sidecar: Sidecar,
) -> Result<bool, Failure> {
    map_records(input, out, sidecar, |mut rec| {
        let pose = rec.pose()?;
        let ac = rec.affine_correspondence()?;
        let est = estimate_normal(&pose, &ac)?;
        rec.n_est = Some([est.normal.x, est.normal.y, est.normal.z]);
        rec.d_est = Some(est.distance);
        rec.residual = Some(est.residual);
        rec.conditioning = Some(est.conditioning);
        if rec.n.is_some() && rec.d.is_some() {
            // compare n/d so either orientation of the ground truth works
            let truth = rec.plane()?.inverse_depth_vector();
            rec.angular_error = Some(angle_between(&truth, &(est.normal / est.distance)));
        }
        Ok(rec)
    })
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub fd: f64,
    pub algebraic: f64,
    pub transfer: f64,
}

#[derive(Debug, Serialize)]
pub struct FailedRecord {
    pub line: u64,
    pub reason: String,
    pub detail: String,
}

#[derive(Debug, Default, Serialize)]
pub struct ValidationReport {
    pub records: u64,
    pub failures: u64,
    /// Closed form vs finite differences, scaled by `max(1, ‖A‖∞)`.
    pub max_oracle_error: f64,
    /// Element-wise vs assembled three-term form, same scaling.
    pub max_path_error: f64,
    /// Homography transfer vs ray–plane intersection.
    pub max_transfer_error: f64,
    /// Stored `A`/`p2` fields vs recomputation.
    pub max_record_error: f64,
    pub tolerances: ReportTolerances,
    pub wall_time_s: f64,
    pub failed: Vec<FailedRecord>,
}

#[derive(Debug, Default, Serialize)]
pub struct ReportTolerances {
    pub fd: f64,
    pub algebraic: f64,
    pub transfer: f64,
    pub eps: f64,
}

struct Measured {
    oracle: f64,
    path: f64,
    transfer: f64,
    record: f64,
    violations: Vec<(&'static str, String)>,
}

fn check_record(
    rec: &CorrespondenceRecord,
    fd: &FiniteDiffConfig,
    tol: &Tolerances,
) -> Result<Measured, RecordError> {
    let pose = rec.pose()?;
    let plane = rec.plane()?;
    let p1 = rec.p1()?;

    let elementwise = affine_elementwise(&pose, &plane, &p1)?;
    let a = elementwise.affine;
    let unified = affine_unified(&pose, &plane, &p1, &elementwise.p2)?.affine()?;
    let h = homography_from_pose_plane(&pose, &plane)?;
    let numeric = fd_jacobian(&h, &p1, fd)?;
    let oracle_p2 = transfer_via_3d(&pose, &plane, &p1)?;

    let mut m = Measured {
        oracle: a.relative_diff(&numeric),
        path: a.relative_diff(&unified),
        transfer: elementwise.p2.distance(&oracle_p2),
        record: 0.0,
        violations: Vec::new(),
    };
    if m.oracle > tol.fd {
        m.violations
            .push(("fd-mismatch", format!("finite-difference error {:e}", m.oracle)));
    }
    if m.path > tol.algebraic {
        m.violations
            .push(("path-mismatch", format!("path disagreement {:e}", m.path)));
    }
    if m.transfer > tol.transfer {
        m.violations.push((
            "transfer-mismatch",
            format!("3D transfer disagreement {:e}", m.transfer),
        ));
    }
    if rec.affine.is_some() {
        let stored = rec.affine_map()?;
        let err = a.relative_diff(&stored);
        m.record = m.record.max(err);
        if err > tol.algebraic {
            m.violations.push((
                "affine-mismatch",
                format!("stored A differs from closed form by {err:e}"),
            ));
        }
    }
    if rec.p2.is_some() {
        let err = rec.p2()?.distance(&elementwise.p2);
        m.record = m.record.max(err);
        if err > tol.transfer {
            m.violations.push((
                "p2-mismatch",
                format!("stored p2 differs from transfer by {err:e}"),
            ));
        }
    }
    Ok(m)
}

pub fn validate<R: BufRead>(
    input: R,
    fd: &FiniteDiffConfig,
    tol: &Tolerances,
) -> Result<ValidationReport, Failure> {
    let start = Instant::now();
    let mut report = ValidationReport {
        tolerances: ReportTolerances {
            fd: tol.fd,
            algebraic: tol.algebraic,
            transfer: tol.transfer,
            eps: fd.epsilon(),
        },
        ..ValidationReport::default()
    };
    for line in Lines::new(input) {
        let line = line?;
        report.records += 1;
        let outcome = line
            .text
            .as_deref()
            .map_err(Clone::clone)
            .and_then(CorrespondenceRecord::parse_line)
            .and_then(|rec| check_record(&rec, fd, tol));
        let violations = match outcome {
            Ok(m) => {
                report.max_oracle_error = report.max_oracle_error.max(m.oracle);
                report.max_path_error = report.max_path_error.max(m.path);
                report.max_transfer_error = report.max_transfer_error.max(m.transfer);
                report.max_record_error = report.max_record_error.max(m.record);
                m.violations
            }
            Err(e) => vec![(e.reason, e.detail)],
        };
        if !violations.is_empty() {
            report.failures += 1;
            report
                .failed
                .extend(violations.into_iter().map(|(reason, detail)| FailedRecord {
                    line: line.number,
                    reason: reason.to_string(),
                    detail,
                }));
        }
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}
