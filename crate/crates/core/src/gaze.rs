//! Head coordinate frames and yaw/pitch/roll rotation errors.
//!
//! The head frame sits at the midpoint between the eyes. Its columns are
//! forward (towards the beak), lateral (towards the right eye, made
//! orthogonal to forward) and up (`forward × lateral`).
//!
//! The error between a predicted and a ground-truth frame is the relative
//! rotation `R_gtᵀ · R_pred`, decomposed as intrinsic yaw about up, then
//! pitch about lateral, then roll about forward:
//! `R_rel = Rz(yaw) · Ry(pitch) · Rx(roll)` in (forward, lateral, up)
//! coordinates.

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::mvgeo::{KeypointFrame3D, Point3};
use crate::stats;
use crate::{Error, Result};

/// Default acceptable head-orientation error in degrees.
pub const DEFAULT_THRESHOLD_DEG: f64 = 5.0;
/// Pitch magnitudes within this many degrees of 90 are treated as gimbal lock.
pub const GIMBAL_TOL_DEG: f64 = 1e-6;
const DEGENERATE_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadFrame {
    pub origin: Point3,
    /// Columns: forward, lateral, up.
    pub rotation: Matrix3<f64>,
}

impl HeadFrame {
    pub fn forward(&self) -> Vector3<f64> {
        self.rotation.column(0).into_owned()
    }
}

/// Build the head frame from the two eyes and the beak.
pub fn head_frame(left_eye: &Point3, right_eye: &Point3, beak: &Point3) -> Result<HeadFrame> {
    let scale = [(left_eye - right_eye).norm(), (left_eye - beak).norm(), (right_eye - beak).norm()]
        .into_iter()
        .fold(0.0, f64::max);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::DegenerateFrame("head keypoints coincide".into()));
    }
    let tol = DEGENERATE_REL * scale;
    let eyes = right_eye - left_eye;
    if eyes.norm() <= tol {
        return Err(Error::DegenerateFrame("eyes coincide".into()));
    }
    let mid = 0.5 * (left_eye + right_eye);
    let to_beak = beak - mid;
    if to_beak.norm() <= tol {
        return Err(Error::DegenerateFrame("beak coincides with the eye midpoint".into()));
    }
    let forward = to_beak.normalize();
    let lateral_raw = eyes - eyes.dot(&forward) * forward;
    if lateral_raw.norm() <= tol {
        return Err(Error::DegenerateFrame("eyes and beak are collinear".into()));
    }
    let lateral = lateral_raw.normalize();
    let up = forward.cross(&lateral);
    Ok(HeadFrame {
        origin: mid,
        rotation: Matrix3::from_columns(&[forward, lateral, up]),
    })
}

/// Keypoint names used to build a head frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadKeypoints {
    pub left_eye: String,
    pub right_eye: String,
    pub beak: String,
}

impl Default for HeadKeypoints {
    fn default() -> Self {
        HeadKeypoints {
            left_eye: "left_eye".into(),
            right_eye: "right_eye".into(),
            beak: "beak".into(),
        }
    }
}

impl HeadKeypoints {
    pub fn frame_of(&self, f: &KeypointFrame3D) -> Result<HeadFrame> {
        let get = |n: &str| {
            f.points
                .get(n)
                .ok_or_else(|| Error::DegenerateFrame(format!("keypoint {n:?} missing")))
        };
        head_frame(get(&self.left_eye)?, get(&self.right_eye)?, get(&self.beak)?)
    }
}

/// `Rz(yaw) · Ry(pitch) · Rx(roll)`, angles in radians.
pub fn compose_yaw_pitch_roll(yaw: f64, pitch: f64, roll: f64) -> Matrix3<f64> {
    let rz = Rotation3::from_axis_angle(&Vector3::z_axis(), yaw);
    let ry = Rotation3::from_axis_angle(&Vector3::y_axis(), pitch);
    let rx = Rotation3::from_axis_angle(&Vector3::x_axis(), roll);
    (rz * ry * rx).into_inner()
}

/// Signed angles (radians) of a rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YawPitchRoll {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
    /// At gimbal lock only `yaw ∓ roll` is identifiable; it is reported in
    /// `yaw` and `roll` is set to zero.
    pub gimbal_lock: bool,
}

pub fn decompose_yaw_pitch_roll(r: &Matrix3<f64>) -> YawPitchRoll {
    let pitch = (-r[(2, 0)]).atan2((r[(2, 1)].powi(2) + r[(2, 2)].powi(2)).sqrt());
    if (90.0 - pitch.to_degrees().abs()).abs() <= GIMBAL_TOL_DEG {
        // pitch = +90°: R01 = sin(roll − yaw), R11 = cos(roll − yaw)
        // pitch = −90°: R01 = −sin(roll + yaw), R11 = cos(roll + yaw)
        let yaw = if pitch > 0.0 {
            -r[(0, 1)].atan2(r[(1, 1)])
        } else {
            (-r[(0, 1)]).atan2(r[(1, 1)])
        };
        return YawPitchRoll {
            yaw,
            pitch,
            roll: 0.0,
            gimbal_lock: true,
        };
    }
    YawPitchRoll {
        yaw: r[(1, 0)].atan2(r[(0, 0)]),
        pitch,
        roll: r[(2, 1)].atan2(r[(2, 2)]),
        gimbal_lock: false,
    }
}

/// Rotation angle of `r`, computed as `atan2(|axis·2sinθ|, tr − 1)` so it
/// stays accurate near zero.
pub fn geodesic_angle(r: &Matrix3<f64>) -> f64 {
    let v = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    v.norm().atan2(r.trace() - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationError {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    pub geodesic_deg: f64,
    pub gimbal_lock: bool,
}

pub fn rotation_error(pred: &HeadFrame, gt: &HeadFrame) -> RotationError {
    let rel = gt.rotation.transpose() * pred.rotation;
    let ypr = decompose_yaw_pitch_roll(&rel);
    RotationError {
        yaw_deg: ypr.yaw.to_degrees().abs(),
        pitch_deg: ypr.pitch.to_degrees().abs(),
        roll_deg: ypr.roll.to_degrees().abs(),
        geodesic_deg: geodesic_angle(&rel).to_degrees(),
        gimbal_lock: ypr.gimbal_lock,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularErrorSummary {
    /// RMS over the pooled yaw, pitch and roll errors of every frame.
    pub rmse_deg: f64,
    pub median_deg_pooled: f64,
    pub median_geodesic_deg: f64,
    pub median_yaw_deg: f64,
    pub median_pitch_deg: f64,
    pub median_roll_deg: f64,
    pub n_frames: usize,
    pub n_degenerate: usize,
    pub n_gimbal: usize,
}

impl AngularErrorSummary {
    /// Whether the pooled median error is within `threshold_deg`.
    pub fn acceptable(&self, threshold_deg: f64) -> bool {
        self.median_deg_pooled <= threshold_deg
    }
}

pub fn angular_summary(errors: &[RotationError], n_degenerate: usize) -> Result<AngularErrorSummary> {
    if errors.is_empty() {
        return Err(Error::Empty("no valid head frames".into()));
    }
    let yaw: Vec<f64> = errors.iter().map(|e| e.yaw_deg).collect();
    let pitch: Vec<f64> = errors.iter().map(|e| e.pitch_deg).collect();
    let roll: Vec<f64> = errors.iter().map(|e| e.roll_deg).collect();
    let geo: Vec<f64> = errors.iter().map(|e| e.geodesic_deg).collect();
    let pooled: Vec<f64> = errors.iter().flat_map(|e| [e.yaw_deg, e.pitch_deg, e.roll_deg]).collect();
    Ok(AngularErrorSummary {
        rmse_deg: stats::rms(&pooled).unwrap(),
        median_deg_pooled: stats::median(&pooled).unwrap(),
        median_geodesic_deg: stats::median(&geo).unwrap(),
        median_yaw_deg: stats::median(&yaw).unwrap(),
        median_pitch_deg: stats::median(&pitch).unwrap(),
        median_roll_deg: stats::median(&roll).unwrap(),
        n_frames: errors.len(),
        n_degenerate,
        n_gimbal: errors.iter().filter(|e| e.gimbal_lock).count(),
    })
}

/// Per-frame rotation errors of matched (frame, individual) pairs.
/// Returns the errors and the number of frames skipped as degenerate or missing.
pub fn frame_errors(
    pred: &[KeypointFrame3D],
    gt: &[KeypointFrame3D],
    names: &HeadKeypoints,
) -> (Vec<RotationError>, usize) {
    let index: std::collections::BTreeMap<(u64, &str), &KeypointFrame3D> = pred.iter().map(|f| (f.key(), f)).collect();
    let mut errors = Vec::new();
    let mut skipped = 0;
    for g in gt {
        let Some(p) = index.get(&g.key()) else {
            skipped += 1;
            continue;
        };
        match (names.frame_of(p), names.frame_of(g)) {
            (Ok(pf), Ok(gf)) => errors.push(rotation_error(&pf, &gf)),
            _ => skipped += 1,
        }
    }
    (errors, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn symmetric_configuration() {
        let f = head_frame(&p(-1.0, 0.0, 0.0), &p(1.0, 0.0, 0.0), &p(0.0, 2.0, 0.0)).unwrap();
        assert_eq!(f.origin, p(0.0, 0.0, 0.0));
        assert!((f.forward() - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert!((f.rotation.column(1) - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((f.rotation.column(2) - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-15);
        assert!((f.rotation.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_points_are_degenerate() {
        let err = head_frame(&p(0.0, 0.0, 0.0), &p(1.0, 0.0, 0.0), &p(3.0, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateFrame(_)));
        assert!(head_frame(&p(1.0, 1.0, 1.0), &p(1.0, 1.0, 1.0), &p(1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn identity_error_is_zero() {
        let f = head_frame(&p(-1.0, 0.3, 0.0), &p(1.0, 0.0, 0.2), &p(0.1, 2.0, 0.0)).unwrap();
        let e = rotation_error(&f, &f);
        for v in [e.yaw_deg, e.pitch_deg, e.roll_deg, e.geodesic_deg] {
            assert!(v < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn pure_yaw() {
        let gt = head_frame(&p(-1.0, 0.0, 0.0), &p(1.0, 0.0, 0.0), &p(0.0, 2.0, 0.0)).unwrap();
        let pred = HeadFrame {
            origin: gt.origin,
            rotation: gt.rotation * compose_yaw_pitch_roll(5f64.to_radians(), 0.0, 0.0),
        };
        let e = rotation_error(&pred, &gt);
        assert!((e.yaw_deg - 5.0).abs() < 1e-9);
        assert!(e.pitch_deg < 1e-9 && e.roll_deg < 1e-9);
        assert!((e.geodesic_deg - 5.0).abs() < 1e-9);
    }

    #[test]
    fn gimbal_lock_is_flagged() {
        for pitch in [90f64, -90.0] {
            let r = compose_yaw_pitch_roll(0.3, pitch.to_radians(), 0.1);
            let d = decompose_yaw_pitch_roll(&r);
            assert!(d.gimbal_lock);
            assert_eq!(d.roll, 0.0);
            // the identifiable combination reproduces the matrix
            let back = compose_yaw_pitch_roll(d.yaw, d.pitch, d.roll);
            assert!((back - r).norm() < 1e-12, "pitch {pitch}");
        }
    }

    #[test]
    fn summary_arithmetic() {
        let e = |y: f64| RotationError {
            yaw_deg: y,
            pitch_deg: 0.0,
            roll_deg: 0.0,
            geodesic_deg: y,
            gimbal_lock: false,
        };
        let s = angular_summary(&[e(2.0), e(4.0)], 0).unwrap();
        assert!((s.rmse_deg - (20.0f64 / 6.0).sqrt()).abs() < 1e-12);
        assert_eq!(s.median_yaw_deg, 3.0);
        assert_eq!(s.median_pitch_deg, 0.0);
        assert!(angular_summary(&[], 3).is_err());
        let zero = angular_summary(&[e(0.0)], 0).unwrap();
        assert_eq!(zero.rmse_deg, 0.0);
        assert_eq!(zero.median_deg_pooled, 0.0);
    }
}
