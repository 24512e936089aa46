#![no_main]

//! Every decoder and stage a CLI record passes through. Errors are fine;
//! panics, and successful outputs that do not survive a round trip, are not.

use affcorr::{
    affine_elementwise, affine_unified, essential_from_pose, estimate_normal, fd_jacobian,
    homography_from_pose_plane, transfer_via_3d, CorrespondenceRecord, FiniteDiffConfig,
};
use libfuzzer_sys::fuzz_target;

fn reparses(rec: &CorrespondenceRecord) {
    let line = rec.to_line();
    let back = CorrespondenceRecord::parse_line(&line)
        .unwrap_or_else(|e| panic!("output does not parse ({e}): {line}"));
    assert_eq!(&back, rec);
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(rec) = CorrespondenceRecord::parse_line(text) else {
        return;
    };
    let pose = rec.pose();
    let plane = rec.plane();
    let p1 = rec.p1();
    let _ = rec.p2();
    let _ = rec.affine_map();

    if let Ok(pose) = &pose {
        let _ = essential_from_pose(pose).map(|e| e.epipole_second());
        if let Ok(ac) = rec.affine_correspondence() {
            if let Ok(est) = estimate_normal(pose, &ac) {
                assert!(est.normal.iter().all(|x| x.is_finite()));
                assert!(est.distance.is_finite() && est.distance > 0.0);
                let mut out = rec.clone();
                out.n_est = Some([est.normal.x, est.normal.y, est.normal.z]);
                out.d_est = Some(est.distance);
                out.residual = Some(est.residual);
                out.conditioning = Some(est.conditioning);
                reparses(&out);
            }
        }
    }

    let (Ok(pose), Ok(plane), Ok(p1)) = (pose, plane, p1) else {
        return;
    };
    let _ = transfer_via_3d(&pose, &plane, &p1);
    if let Ok(h) = homography_from_pose_plane(&pose, &plane) {
        let _ = fd_jacobian(&h, &p1, &FiniteDiffConfig::default());
    }
    if let Ok(res) = affine_elementwise(&pose, &plane, &p1) {
        let _ = affine_unified(&pose, &plane, &p1, &res.p2).and_then(|u| u.affine());
        let mut out = rec.clone();
        out.p2 = Some([res.p2.u, res.p2.v]);
        out.affine = Some(res.affine.to_row_major());
        out.s = Some(res.s);
        reparses(&out);
    }
});
