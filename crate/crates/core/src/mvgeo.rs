//! Projective cameras, DLT triangulation and keypoint error metrics.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use nalgebra::{DMatrix, Matrix3x4, Matrix4, RowVector4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::stats;
use crate::{Error, Result};

pub type Point3 = Vector3<f64>;

/// Smallest/second-smallest singular value ratio above which the DLT
/// system has no unique null vector.
pub const DEGENERACY_RATIO: f64 = 0.99;
/// Relative size of the third singular value below which the views
/// constrain fewer than three degrees of freedom.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorldUnit {
    Mm,
    M,
}

impl WorldUnit {
    pub fn to_mm(self) -> f64 {
        match self {
            WorldUnit::Mm => 1.0,
            WorldUnit::M => 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub camera_id: String,
    pub projection: Matrix3x4<f64>,
}

impl CameraModel {
    pub fn new(camera_id: impl Into<String>, projection: Matrix3x4<f64>) -> Result<Self> {
        let camera_id = camera_id.into();
        let left = projection.fixed_view::<3, 3>(0, 0).into_owned();
        let sv = left.singular_values();
        let (max, min) = (sv.max(), sv.min());
        if !(projection.iter().all(|v| v.is_finite()) && max > 0.0 && min > 1e-12 * max) {
            return Err(Error::Config(format!(
                "camera {camera_id:?}: left 3x3 block of the projection matrix is singular"
            )));
        }
        Ok(CameraModel { camera_id, projection })
    }

    /// Optical centre: the world point the projection maps to zero.
    pub fn center(&self) -> Point3 {
        let m = self.projection.fixed_view::<3, 3>(0, 0).into_owned();
        let p4 = self.projection.column(3).into_owned();
        // invertible by construction
        -(m.try_inverse().expect("left block has full rank") * p4)
    }

    /// Pixel coordinates of world point `x`.
    pub fn project(&self, x: &Point3) -> [f64; 2] {
        let h = self.projection * Vector4::new(x.x, x.y, x.z, 1.0);
        [h.x / h.z, h.y / h.z]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CameraFile {
    camera_id: String,
    #[serde(rename = "P")]
    p: [[f64; 4]; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CalibrationFile {
    world_unit: WorldUnit,
    cameras: Vec<CameraFile>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub world_unit: WorldUnit,
    pub cameras: Vec<CameraModel>,
}

impl Calibration {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: CalibrationFile = serde_json::from_str(s)?;
        let mut cameras = Vec::with_capacity(f.cameras.len());
        for c in f.cameras {
            if cameras.iter().any(|k: &CameraModel| k.camera_id == c.camera_id) {
                return Err(Error::Config(format!("duplicate camera_id {:?}", c.camera_id)));
            }
            let p = Matrix3x4::from_fn(|i, j| c.p[i][j]);
            cameras.push(CameraModel::new(c.camera_id, p)?);
        }
        Ok(Calibration {
            world_unit: f.world_unit,
            cameras,
        })
    }

    pub fn to_json_string(&self) -> String {
        let f = CalibrationFile {
            world_unit: self.world_unit,
            cameras: self
                .cameras
                .iter()
                .map(|c| CameraFile {
                    camera_id: c.camera_id.clone(),
                    p: std::array::from_fn(|i| std::array::from_fn(|j| c.projection[(i, j)])),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&f).expect("calibration serializes")
    }

    pub fn camera(&self, id: &str) -> Option<&CameraModel> {
        self.cameras.iter().find(|c| c.camera_id == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeypointFrame2D {
    pub frame: u64,
    pub individual_id: String,
    pub camera_id: String,
    pub points: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeypointFrame3D {
    pub frame: u64,
    pub individual_id: String,
    pub points: BTreeMap<String, Point3>,
}

impl KeypointFrame3D {
    pub fn key(&self) -> (u64, &str) {
        (self.frame, &self.individual_id)
    }

    /// Largest distance between any two keypoints of this frame.
    pub fn max_pairwise_distance(&self) -> f64 {
        let pts: Vec<&Point3> = self.points.values().collect();
        let mut best: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                best = best.max((pts[i] - pts[j]).norm());
            }
        }
        best
    }

    pub fn scaled(&self, s: f64) -> KeypointFrame3D {
        KeypointFrame3D {
            frame: self.frame,
            individual_id: self.individual_id.clone(),
            points: self.points.iter().map(|(k, p)| (k.clone(), p * s)).collect(),
        }
    }
}

fn csv_err(name: &str, row: u64, message: String) -> Error {
    Error::Schema {
        source_name: name.to_string(),
        row,
        message,
    }
}

fn header_positions(name: &str, headers: &csv::StringRecord, required: &[&str]) -> Result<Vec<usize>> {
    required
        .iter()
        .map(|col| {
            headers
                .iter()
                .position(|h| h == *col)
                .ok_or_else(|| csv_err(name, 1, format!("missing column {col:?}")))
        })
        .collect()
}

fn finite(name: &str, row: u64, column: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| csv_err(name, row, format!("{column}: not a finite number: {raw:?}")))
}

pub const KEYPOINTS3D_HEADER: [&str; 6] = ["frame", "individual_id", "keypoint", "x", "y", "z"];
pub const KEYPOINTS2D_HEADER: [&str; 6] = ["frame", "individual_id", "camera_id", "keypoint", "u", "v"];

/// Read `frame,individual_id,keypoint,x,y,z`, sorted by (frame, individual).
pub fn read_keypoints3d(source: impl Read, name: &str) -> Result<Vec<KeypointFrame3D>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers().map_err(|e| csv_err(name, 1, e.to_string()))?.clone();
    let cols = header_positions(name, &headers, &KEYPOINTS3D_HEADER)?;
    let mut frames: BTreeMap<(u64, String), BTreeMap<String, Point3>> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(name, e.position().map(|p| p.line()).unwrap_or(0), e.to_string()))?;
        let row = rec.position().map(|p| p.line()).unwrap_or(0);
        let get = |i: usize| rec.get(cols[i]).unwrap_or("");
        let frame: u64 = get(0)
            .parse()
            .map_err(|_| csv_err(name, row, format!("frame: not a nonnegative integer: {:?}", get(0))))?;
        let p = Point3::new(finite(name, row, "x", get(3))?, finite(name, row, "y", get(4))?, finite(name, row, "z", get(5))?);
        let pts = frames.entry((frame, get(1).to_string())).or_default();
        if pts.insert(get(2).to_string(), p).is_some() {
            return Err(csv_err(name, row, format!("duplicate keypoint {:?}", get(2))));
        }
    }
    Ok(frames
        .into_iter()
        .map(|((frame, individual_id), points)| KeypointFrame3D {
            frame,
            individual_id,
            points,
        })
        .collect())
}

/// Read `frame,individual_id,camera_id,keypoint,u,v`, sorted by (frame, individual, camera).
pub fn read_keypoints2d(source: impl Read, name: &str) -> Result<Vec<KeypointFrame2D>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers().map_err(|e| csv_err(name, 1, e.to_string()))?.clone();
    let cols = header_positions(name, &headers, &KEYPOINTS2D_HEADER)?;
    let mut frames: BTreeMap<(u64, String, String), BTreeMap<String, [f64; 2]>> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(name, e.position().map(|p| p.line()).unwrap_or(0), e.to_string()))?;
        let row = rec.position().map(|p| p.line()).unwrap_or(0);
        let get = |i: usize| rec.get(cols[i]).unwrap_or("");
        let frame: u64 = get(0)
            .parse()
            .map_err(|_| csv_err(name, row, format!("frame: not a nonnegative integer: {:?}", get(0))))?;
        let uv = [finite(name, row, "u", get(4))?, finite(name, row, "v", get(5))?];
        let pts = frames
            .entry((frame, get(1).to_string(), get(2).to_string()))
            .or_default();
        if pts.insert(get(3).to_string(), uv).is_some() {
            return Err(csv_err(name, row, format!("duplicate keypoint {:?}", get(3))));
        }
    }
    Ok(frames
        .into_iter()
        .map(|((frame, individual_id, camera_id), points)| KeypointFrame2D {
            frame,
            individual_id,
            camera_id,
            points,
        })
        .collect())
}

pub fn write_keypoints3d(frames: &[KeypointFrame3D], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(KEYPOINTS3D_HEADER)?;
    for f in frames {
        for (name, p) in &f.points {
            w.write_record([
                f.frame.to_string(),
                f.individual_id.clone(),
                name.clone(),
                p.x.to_string(),
                p.y.to_string(),
                p.z.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("keypoints3d.csv", e))?;
    Ok(())
}

pub fn write_keypoints2d(frames: &[KeypointFrame2D], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(KEYPOINTS2D_HEADER)?;
    for f in frames {
        for (name, uv) in &f.points {
            w.write_record([
                f.frame.to_string(),
                f.individual_id.clone(),
                f.camera_id.clone(),
                name.clone(),
                uv[0].to_string(),
                uv[1].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("keypoints2d.csv", e))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangulated {
    pub point: Point3,
    /// RMS reprojection error over the views, in pixels.
    pub reprojection_rms_px: f64,
    pub n_views: usize,
}

/// Homogeneous DLT: two equations per view, null vector by SVD.
pub fn triangulate(views: &[(&CameraModel, [f64; 2])], min_views: usize) -> Result<Triangulated> {
    let min_views = min_views.max(2);
    let usable: Vec<&(&CameraModel, [f64; 2])> = views
        .iter()
        .filter(|(_, uv)| uv[0].is_finite() && uv[1].is_finite())
        .collect();
    if usable.len() < min_views {
        return Err(Error::InsufficientViews {
            required: min_views,
            available: usable.len(),
        });
    }

    // Work in a frame centred on the cameras and scaled by their spread so
    // the homogeneous coordinate is not swamped by the translation terms.
    let centers: Vec<Point3> = usable.iter().map(|(cam, _)| cam.center()).collect();
    let mean = centers.iter().sum::<Point3>() / centers.len() as f64;
    let spread = centers.iter().map(|c| (c - mean).norm()).sum::<f64>() / centers.len() as f64;
    let scale = if spread > 0.0 { spread } else { 1.0 };
    let mut h = Matrix4::<f64>::identity() * scale;
    h[(3, 3)] = 1.0;
    h.fixed_view_mut::<3, 1>(0, 3).copy_from(&mean);

    let mut a = DMatrix::<f64>::zeros(2 * usable.len().max(2), 4);
    for (i, (cam, uv)) in usable.iter().enumerate() {
        let p = cam.projection * h;
        for (k, coord) in uv.iter().enumerate() {
            let row: RowVector4<f64> = *coord * p.row(2) - p.row(k);
            let norm = row.norm();
            a.row_mut(2 * i + k).copy_from(&if norm > 0.0 { row / norm } else { row });
        }
    }

    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::DegenerateGeometry("SVD did not produce right singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s = |k: usize| svd.singular_values[order[k]];
    let (s1, s3, s4) = (s(0), s(2), s(3));
    if s3 <= RANK_TOL * s1 {
        return Err(Error::DegenerateGeometry(format!(
            "views constrain fewer than three dimensions (singular values {s1:e}, {s3:e})"
        )));
    }
    if s4 / s3 > DEGENERACY_RATIO {
        return Err(Error::DegenerateGeometry(format!(
            "no unique solution (smallest/second-smallest singular value ratio {:.4})",
            s4 / s3
        )));
    }
    let x = v_t.row(order[3]);
    if x[3].abs() <= f64::EPSILON * x.norm() {
        return Err(Error::DegenerateGeometry("triangulated point is at infinity".into()));
    }
    let point = mean + scale * Point3::new(x[0] / x[3], x[1] / x[3], x[2] / x[3]);

    let ss: f64 = usable
        .iter()
        .map(|(cam, uv)| {
            let q = cam.project(&point);
            (q[0] - uv[0]).powi(2) + (q[1] - uv[1]).powi(2)
        })
        .sum();
    Ok(Triangulated {
        point,
        reprojection_rms_px: (ss / usable.len() as f64).sqrt(),
        n_views: usable.len(),
    })
}

/// Keypoints that could not be triangulated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TriangulationReport {
    pub triangulated: usize,
    pub insufficient_views: usize,
    pub degenerate: usize,
    pub unknown_camera: usize,
}

/// Triangulate every (frame, individual, keypoint) seen in at least `min_views` cameras.
/// Output coordinates are in the calibration's world unit.
pub fn triangulate_frames(
    calibration: &Calibration,
    frames: &[KeypointFrame2D],
    min_views: usize,
    exec: Exec,
) -> (Vec<KeypointFrame3D>, TriangulationReport) {
    type Views<'a> = BTreeMap<String, Vec<(&'a CameraModel, [f64; 2])>>;
    let mut groups: BTreeMap<(u64, &str), Views> = BTreeMap::new();
    let mut report = TriangulationReport::default();
    for f in frames {
        let Some(cam) = calibration.camera(&f.camera_id) else {
            report.unknown_camera += f.points.len();
            continue;
        };
        let g = groups.entry((f.frame, f.individual_id.as_str())).or_default();
        for (name, uv) in &f.points {
            g.entry(name.clone()).or_default().push((cam, *uv));
        }
    }
    let groups: Vec<_> = groups.into_iter().collect();
    let solved = exec.map_slice(&groups, |((frame, ind), views)| {
        let mut points = BTreeMap::new();
        let mut counts = TriangulationReport::default();
        for (name, v) in views {
            match triangulate(v, min_views) {
                Ok(t) => {
                    points.insert(name.clone(), t.point);
                    counts.triangulated += 1;
                }
                Err(Error::InsufficientViews { .. }) => counts.insufficient_views += 1,
                Err(_) => counts.degenerate += 1,
            }
        }
        (
            KeypointFrame3D {
                frame: *frame,
                individual_id: ind.to_string(),
                points,
            },
            counts,
        )
    });
    let mut out = Vec::with_capacity(solved.len());
    for (f, c) in solved {
        report.triangulated += c.triangulated;
        report.insufficient_views += c.insufficient_views;
        report.degenerate += c.degenerate;
        if !f.points.is_empty() {
            out.push(f);
        }
    }
    (out, report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PckScore {
    pub fraction: f64,
    pub pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeypointMetrics {
    pub rmse_mm: f64,
    pub median_mm: f64,
    pub pck: Vec<PckScore>,
    pub n_points: usize,
    /// Subset keypoints present on only one side of a matched frame.
    pub n_excluded: usize,
    /// Ground-truth frames without a prediction.
    pub n_unmatched_frames: usize,
}

impl KeypointMetrics {
    pub fn pck_at(&self, fraction: f64) -> Option<f64> {
        self.pck.iter().find(|p| p.fraction == fraction).map(|p| p.pct)
    }
}

/// Per-point error with its frame's PCK reference scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointError {
    pub distance: f64,
    pub scale: f64,
}

/// Distances between matched subset keypoints. Returns the errors plus the
/// excluded-keypoint and unmatched-frame counts.
pub fn point_errors(
    pred: &[KeypointFrame3D],
    gt: &[KeypointFrame3D],
    subset: &[String],
    exec: Exec,
) -> (Vec<PointError>, usize, usize) {
    let pred_index: BTreeMap<(u64, &str), &KeypointFrame3D> = pred.iter().map(|f| (f.key(), f)).collect();
    let per_frame = exec.map_slice(gt, |g| {
        let p = pred_index.get(&g.key())?;
        let scale = g.max_pairwise_distance();
        let mut errs = Vec::new();
        let mut excluded = 0;
        for name in subset {
            match (p.points.get(name), g.points.get(name)) {
                (Some(a), Some(b)) => errs.push(PointError {
                    distance: (a - b).norm(),
                    scale,
                }),
                (None, None) => {}
                _ => excluded += 1,
            }
        }
        Some((errs, excluded))
    });
    let mut errors = Vec::new();
    let mut excluded = 0;
    let mut unmatched = 0;
    for f in per_frame {
        match f {
            Some((e, x)) => {
                errors.extend(e);
                excluded += x;
            }
            None => unmatched += 1,
        }
    }
    (errors, excluded, unmatched)
}

/// RMSE, median and PCK of predicted vs ground-truth keypoints (both in mm).
///
/// A prediction counts as correct at fraction `f` when its error is
/// `≤ f · s`, where `s` is the largest pairwise distance among that frame's
/// ground-truth keypoints over the full skeleton (not only `subset`).
pub fn keypoint_metrics(
    pred: &[KeypointFrame3D],
    gt: &[KeypointFrame3D],
    subset: &[String],
    pck_fractions: &[f64],
    exec: Exec,
) -> Result<KeypointMetrics> {
    if subset.is_empty() {
        return Err(Error::Config("keypoint subset is empty".into()));
    }
    let (errors, n_excluded, n_unmatched_frames) = point_errors(pred, gt, subset, exec);
    if errors.is_empty() {
        return Err(Error::Empty("no matched keypoint pairs".into()));
    }
    let d: Vec<f64> = errors.iter().map(|e| e.distance).collect();
    let pck = pck_fractions
        .iter()
        .map(|&f| {
            let ok = errors.iter().filter(|e| e.distance <= f * e.scale).count();
            PckScore {
                fraction: f,
                pct: 100.0 * ok as f64 / errors.len() as f64,
            }
        })
        .collect();
    Ok(KeypointMetrics {
        rmse_mm: stats::rms(&d).unwrap(),
        median_mm: stats::median(&d).unwrap(),
        pck,
        n_points: d.len(),
        n_excluded,
        n_unmatched_frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(points: &[(&str, [f64; 3])]) -> KeypointFrame3D {
        KeypointFrame3D {
            frame: 0,
            individual_id: "p".into(),
            points: points
                .iter()
                .map(|(n, p)| (n.to_string(), Point3::new(p[0], p[1], p[2])))
                .collect(),
        }
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_predictions_are_perfect() {
        let g = [frame(&[("a", [0.0, 0.0, 0.0]), ("b", [10.0, 0.0, 0.0])])];
        let m = keypoint_metrics(&g, &g, &names(&["a", "b"]), &[0.05, 0.1], Exec::Sequential).unwrap();
        assert_eq!((m.rmse_mm, m.median_mm), (0.0, 0.0));
        assert_eq!(m.pck_at(0.05), Some(100.0));
        assert_eq!(m.pck_at(0.1), Some(100.0));
    }

    #[test]
    fn rmse_and_median_of_two_errors() {
        let g = [frame(&[("a", [0.0, 0.0, 0.0]), ("b", [100.0, 0.0, 0.0])])];
        let p = [frame(&[("a", [3.0, 0.0, 0.0]), ("b", [100.0, 4.0, 0.0])])];
        let m = keypoint_metrics(&p, &g, &names(&["a", "b"]), &[], Exec::Sequential).unwrap();
        assert!((m.rmse_mm - 12.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(m.median_mm, 3.5);
    }

    #[test]
    fn pck_boundary_is_inclusive() {
        // scale 100 from the full skeleton, subset only "a"
        let g = [frame(&[("a", [0.0, 0.0, 0.0]), ("tail", [100.0, 0.0, 0.0])])];
        let exact = [frame(&[("a", [0.0, 5.0, 0.0])])];
        let m = keypoint_metrics(&exact, &g, &names(&["a"]), &[0.05], Exec::Sequential).unwrap();
        assert_eq!(m.pck_at(0.05), Some(100.0));
        let over = [frame(&[("a", [0.0, 5.0 + 1e-9, 0.0])])];
        let m = keypoint_metrics(&over, &g, &names(&["a"]), &[0.05, 0.1], Exec::Sequential).unwrap();
        assert_eq!(m.pck_at(0.05), Some(0.0));
        assert_eq!(m.pck_at(0.1), Some(100.0));
        assert_eq!(m.n_excluded, 0);
    }

    #[test]
    fn missing_keypoints_are_excluded_and_counted() {
        let g = [frame(&[("a", [0.0, 0.0, 0.0]), ("b", [1.0, 0.0, 0.0])])];
        let p = [frame(&[("a", [0.0, 0.0, 0.0])])];
        let m = keypoint_metrics(&p, &g, &names(&["a", "b"]), &[0.1], Exec::Sequential).unwrap();
        assert_eq!(m.n_points, 1);
        assert_eq!(m.n_excluded, 1);
        let none = keypoint_metrics(&[], &g, &names(&["a"]), &[0.1], Exec::Sequential);
        assert!(matches!(none, Err(Error::Empty(_))));
    }

    #[test]
    fn one_view_is_insufficient() {
        let cam = CameraModel::new("c", Matrix3x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0)).unwrap();
        let err = triangulate(&[(&cam, [0.1, 0.2])], 2).unwrap_err();
        assert!(matches!(err, Error::InsufficientViews { required: 2, available: 1 }));
    }

    #[test]
    fn singular_camera_rejected() {
        assert!(CameraModel::new("c", Matrix3x4::zeros()).is_err());
    }

    #[test]
    fn two_view_round_trip() {
        let c1 = CameraModel::new("1", Matrix3x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0)).unwrap();
        let c2 = CameraModel::new("2", Matrix3x4::new(1.0, 0.0, 0.0, -0.2, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0)).unwrap();
        let x = Point3::new(0.1, -0.05, 2.0);
        let t = triangulate(&[(&c1, c1.project(&x)), (&c2, c2.project(&x))], 2).unwrap();
        assert!((t.point - x).norm() < 1e-12);
        assert!(t.reprojection_rms_px < 1e-12);
    }

    #[test]
    fn calibration_json_round_trip() {
        let json = r#"{"world_unit": "m", "cameras": [{"camera_id": "a", "P": [[1,0,0,0],[0,1,0,0],[0,0,1,0]]}]}"#;
        let c = Calibration::from_json_str(json).unwrap();
        assert_eq!(c.world_unit, WorldUnit::M);
        assert_eq!(Calibration::from_json_str(&c.to_json_string()).unwrap(), c);
    }

    #[test]
    fn keypoint_csv_round_trip() {
        let csv = "frame,individual_id,keypoint,x,y,z\n0,p1,beak,1,2,3\n0,p1,nose,1.5,2,3\n1,p1,beak,0,0,0\n";
        let f = read_keypoints3d(csv.as_bytes(), "k.csv").unwrap();
        assert_eq!(f.len(), 2);
        let mut buf = Vec::new();
        write_keypoints3d(&f, &mut buf).unwrap();
        assert_eq!(read_keypoints3d(buf.as_slice(), "k.csv").unwrap(), f);
        let dup = "frame,individual_id,keypoint,x,y,z\n0,p1,beak,1,2,3\n0,p1,beak,1,2,3\n";
        assert!(matches!(read_keypoints3d(dup.as_bytes(), "k.csv"), Err(Error::Schema { row: 3, .. })));
    }
}
