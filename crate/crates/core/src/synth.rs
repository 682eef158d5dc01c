//! Synthetic ground truth for both pipelines.
//!
//! [`gen_ctds`] simulates a camera-trap survey under the same model the
//! estimator assumes: individuals uniform in each camera's view sector,
//! independent across snapshots, detected with probability `g(r)`.
//! Reactivity labels are drawn per clip and do not alter distances.
//!
//! [`gen_rig`] builds a ring of pinhole cameras around an arena and moves
//! a rigid keypoint template through it, emitting noiseless 3D ground truth
//! and noisy 2D projections.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{Matrix3, Matrix3x4, Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::detfn::{detection_probability, KeyFunction};
use crate::gaze::compose_yaw_pitch_roll;
use crate::mvgeo::{self, Calibration, CameraModel, KeypointFrame2D, KeypointFrame3D, Point3, WorldUnit};
use crate::survey::{CameraLocation, Clip, DistanceObservation, Survey, SurveyConfig};
use crate::{Error, Result};

fn default_clip_snapshots() -> u64 {
    30
}

fn default_placement_factor() -> f64 {
    1.25
}

/// Parameters of a simulated camera-trap survey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtdsScenarioTruth {
    pub true_density_km2: f64,
    pub key: KeyFunction,
    pub truncation_radius_m: f64,
    pub view_angle_deg: f64,
    pub snapshot_interval_s: f64,
    pub study_area_km2: f64,
    pub n_cameras: usize,
    /// Operating time of every camera, unless `operating_times_s` lists them individually.
    pub operating_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operating_times_s: Option<Vec<f64>>,
    pub manual_rate: f64,
    pub auto_tp_rate: f64,
    pub auto_fp_rate: f64,
    pub seed: u64,
    /// Snapshots per clip.
    #[serde(default = "default_clip_snapshots")]
    pub clip_snapshots: u64,
    /// Individuals are placed out to this multiple of the truncation radius.
    #[serde(default = "default_placement_factor")]
    pub placement_radius_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_bin_edges_m: Option<Vec<f64>>,
}

impl CtdsScenarioTruth {
    pub fn validate(&self) -> Result<()> {
        self.key.validate()?;
        if !(self.true_density_km2.is_finite() && self.true_density_km2 > 0.0) {
            return Err(Error::Config("true density must be > 0".into()));
        }
        for (name, r) in [
            ("manual_rate", self.manual_rate),
            ("auto_tp_rate", self.auto_tp_rate),
            ("auto_fp_rate", self.auto_fp_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {r}")));
            }
        }
        if self.n_cameras == 0 {
            return Err(Error::Config("need at least one camera".into()));
        }
        if let Some(t) = &self.operating_times_s {
            if t.len() != self.n_cameras {
                return Err(Error::Config(format!(
                    "{} operating times for {} cameras",
                    t.len(),
                    self.n_cameras
                )));
            }
        }
        if self.clip_snapshots == 0 {
            return Err(Error::Config("clip_snapshots must be >= 1".into()));
        }
        if !(self.placement_radius_factor >= 1.0) {
            return Err(Error::Config("placement_radius_factor must be >= 1".into()));
        }
        self.survey_config()?;
        Ok(())
    }

    pub fn survey_config(&self) -> Result<SurveyConfig> {
        SurveyConfig::new(
            self.truncation_radius_m,
            self.view_angle_deg.to_radians(),
            self.snapshot_interval_s,
            self.study_area_km2,
            self.distance_bin_edges_m.clone(),
        )
    }

    pub fn operating_time(&self, camera: usize) -> f64 {
        match &self.operating_times_s {
            Some(t) => t[camera],
            None => self.operating_time_s,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSurvey {
    pub survey: Survey,
    /// Average detection probability within `w` under the true key function.
    pub expected_p: f64,
    /// Individuals placed within `w`, summed over snapshots and cameras (expected value).
    pub expected_individuals_within_w: f64,
    /// Individuals actually placed within `w`.
    pub individuals_within_w: u64,
}

impl SyntheticSurvey {
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        self.survey.write_dir(dir)
    }
}

/// Simulate a survey. Deterministic in `truth` (seed included).
pub fn gen_ctds(truth: &CtdsScenarioTruth) -> Result<SyntheticSurvey> {
    truth.validate()?;
    let config = truth.survey_config()?;
    let w = truth.truncation_radius_m;
    let outer = w * truth.placement_radius_factor;
    let theta = config.view_angle_rad;
    let density_m2 = truth.true_density_km2 / 1e6;
    let mut rng = ChaCha8Rng::seed_from_u64(truth.seed);

    let mut locations = Vec::with_capacity(truth.n_cameras);
    let mut clips = Vec::new();
    let mut observations = Vec::new();
    let mut expected_within = 0.0;
    let mut placed_within = 0u64;

    for k in 0..truth.n_cameras {
        let location_id = format!("cam{k:03}");
        let t_k = truth.operating_time(k);
        let snapshots = t_k / truth.snapshot_interval_s;
        let n_slots = snapshots.ceil().max(1.0) as u64;
        locations.push(CameraLocation {
            location_id: location_id.clone(),
            operating_time_s: t_k,
        });
        expected_within += density_m2 * 0.5 * theta * w * w * snapshots;

        // A sum of independent Poisson counts over snapshots is Poisson in the total.
        let lambda = density_m2 * 0.5 * theta * outer * outer * snapshots;
        let n_individuals = if lambda > 0.0 {
            Poisson::new(lambda)
                .map_err(|e| Error::Config(format!("bad Poisson rate {lambda}: {e}")))?
                .sample(&mut rng) as u64
        } else {
            0
        };
        let mut detections: Vec<(u64, f64)> = Vec::new();
        for _ in 0..n_individuals {
            let r = outer * rng.random::<f64>().sqrt();
            let snapshot = rng.random_range(0..n_slots);
            let detected = rng.random::<f64>() < truth.key.eval(r);
            if r <= w {
                placed_within += 1;
            }
            if detected {
                detections.push((snapshot, r));
            }
        }
        detections.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

        let mut last_clip: Option<u64> = None;
        for (snapshot, r) in detections {
            let clip_no = snapshot / truth.clip_snapshots;
            let clip_id = format!("{location_id}-{clip_no:07}");
            if last_clip != Some(clip_no) {
                last_clip = Some(clip_no);
                let manual = rng.random::<f64>() < truth.manual_rate;
                let auto_rate = if manual { truth.auto_tp_rate } else { truth.auto_fp_rate };
                let auto = rng.random::<f64>() < auto_rate;
                clips.push(Clip {
                    clip_id: clip_id.clone(),
                    location_id: location_id.clone(),
                    reactivity_manual: manual,
                    reactivity_auto: auto,
                });
            }
            observations.push(DistanceObservation {
                clip_id,
                snapshot_index: snapshot,
                distance_m: r,
                count: 1,
            });
        }
    }

    Ok(SyntheticSurvey {
        survey: Survey::new(config, locations, clips, observations)?,
        expected_p: detection_probability(&truth.key, w)?,
        expected_individuals_within_w: expected_within,
        individuals_within_w: placed_within,
    })
}

/// Draw `n` distances from the point-transect pdf `r g(r) / ∫₀ʷ s g(s) ds` on `[0, w]`.
pub fn sample_point_transect(key: &KeyFunction, w: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let r = w * rng.random::<f64>().sqrt();
        if rng.random::<f64>() < key.eval(r) {
            out.push(r);
        }
    }
    out
}

/// One camera placed at `position_mm`, looking at `look_at_mm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position_mm: [f64; 3],
    pub look_at_mm: [f64; 3],
}

fn default_template() -> BTreeMap<String, [f64; 3]> {
    // Head frame: x forward, y towards the right eye, z up; millimetres.
    [
        ("beak", [28.0, 0.0, -4.0]),
        ("nose", [12.0, 0.0, 6.0]),
        ("left_eye", [0.0, -11.0, 0.0]),
        ("right_eye", [0.0, 11.0, 0.0]),
        ("left_shoulder", [-45.0, -28.0, -35.0]),
        ("right_shoulder", [-45.0, 28.0, -35.0]),
        ("top_keel", [-35.0, 0.0, -65.0]),
        ("bottom_keel", [-70.0, 0.0, -95.0]),
        ("tail", [-170.0, 0.0, -70.0]),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn default_n_cameras() -> usize {
    4
}
fn default_ring_radius() -> f64 {
    2000.0
}
fn default_ring_height() -> f64 {
    1200.0
}
fn default_focal() -> f64 {
    1200.0
}
fn default_principal() -> [f64; 2] {
    [960.0, 540.0]
}
fn default_arena() -> f64 {
    400.0
}
fn default_pitch_roll_range() -> f64 {
    30.0
}

/// Parameters of a synthetic multi-camera recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigTruth {
    #[serde(default = "default_n_cameras")]
    pub n_cameras: usize,
    #[serde(default = "default_ring_radius")]
    pub ring_radius_mm: f64,
    #[serde(default = "default_ring_height")]
    pub ring_height_mm: f64,
    /// Explicit camera poses; replaces the ring when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cameras: Option<Vec<CameraPose>>,
    #[serde(default = "default_focal")]
    pub focal_px: f64,
    #[serde(default = "default_principal")]
    pub principal_point_px: [f64; 2],
    pub n_frames: u64,
    pub n_individuals: usize,
    #[serde(default = "default_arena")]
    pub arena_radius_mm: f64,
    /// Pitch and roll of the template are drawn uniformly within ± this many degrees; yaw is unrestricted.
    #[serde(default = "default_pitch_roll_range")]
    pub pitch_roll_range_deg: f64,
    #[serde(default = "default_template")]
    pub template_mm: BTreeMap<String, [f64; 3]>,
    pub pixel_noise_px: f64,
    pub seed: u64,
}

impl RigTruth {
    pub fn with_defaults(n_frames: u64, n_individuals: usize, pixel_noise_px: f64, seed: u64) -> Self {
        RigTruth {
            n_cameras: default_n_cameras(),
            ring_radius_mm: default_ring_radius(),
            ring_height_mm: default_ring_height(),
            cameras: None,
            focal_px: default_focal(),
            principal_point_px: default_principal(),
            n_frames,
            n_individuals,
            arena_radius_mm: default_arena(),
            pitch_roll_range_deg: default_pitch_roll_range(),
            template_mm: default_template(),
            pixel_noise_px,
            seed,
        }
    }

    pub fn poses(&self) -> Vec<CameraPose> {
        match &self.cameras {
            Some(c) => c.clone(),
            None => (0..self.n_cameras)
                .map(|i| {
                    let a = std::f64::consts::TAU * i as f64 / self.n_cameras as f64;
                    CameraPose {
                        position_mm: [self.ring_radius_mm * a.cos(), self.ring_radius_mm * a.sin(), self.ring_height_mm],
                        look_at_mm: [0.0, 0.0, 0.0],
                    }
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.poses().len() < 2 {
            return Err(Error::Config("a rig needs at least 2 cameras".into()));
        }
        if !(self.pixel_noise_px >= 0.0 && self.pixel_noise_px.is_finite()) {
            return Err(Error::Config("pixel noise must be finite and >= 0".into()));
        }
        let pts: Vec<Point3> = self.template_mm.values().map(|p| Point3::new(p[0], p[1], p[2])).collect();
        let centroid = pts.iter().sum::<Point3>() / pts.len().max(1) as f64;
        let spread = pts.iter().map(|p| (p - centroid).norm()).fold(0.0, f64::max);
        if pts.len() < 3 || !(spread > 0.0) {
            return Err(Error::Config("template needs at least 3 distinct points".into()));
        }
        Ok(())
    }
}

/// Pinhole camera `K [R | -R C]` at `pose`.
pub fn look_at_camera(id: &str, pose: &CameraPose, focal_px: f64, principal: [f64; 2]) -> Result<CameraModel> {
    let c = Vector3::from(pose.position_mm);
    let z = (Vector3::from(pose.look_at_mm) - c).normalize();
    let world_up = if z.cross(&Vector3::z()).norm() > 1e-6 { Vector3::z() } else { Vector3::y() };
    let x = z.cross(&world_up).normalize();
    let y = z.cross(&x);
    let r = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
    let t = -(r * c);
    let k = Matrix3::new(focal_px, 0.0, principal[0], 0.0, focal_px, principal[1], 0.0, 0.0, 1.0);
    let mut rt = Matrix3x4::zeros();
    rt.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
    rt.set_column(3, &t);
    CameraModel::new(id, k * rt)
}

#[derive(Debug, Clone)]
pub struct RigSample {
    pub calibration: Calibration,
    pub gt3d: Vec<KeypointFrame3D>,
    pub obs2d: Vec<KeypointFrame2D>,
    /// Template rotation applied at each (frame, individual), same order as `gt3d`.
    pub rotations: Vec<Matrix3<f64>>,
}

impl RigSample {
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let calib = dir.join("calibration.json");
        std::fs::write(&calib, self.calibration.to_json_string() + "\n").map_err(|e| Error::io(&calib, e))?;
        let p2 = dir.join("keypoints2d.csv");
        mvgeo::write_keypoints2d(&self.obs2d, std::fs::File::create(&p2).map_err(|e| Error::io(&p2, e))?)?;
        let p3 = dir.join("keypoints3d.csv");
        mvgeo::write_keypoints3d(&self.gt3d, std::fs::File::create(&p3).map_err(|e| Error::io(&p3, e))?)?;
        Ok(())
    }
}

/// Simulate a recording. Deterministic in `truth` (seed included).
pub fn gen_rig(truth: &RigTruth) -> Result<RigSample> {
    truth.validate()?;
    let cameras = truth
        .poses()
        .iter()
        .enumerate()
        .map(|(i, p)| look_at_camera(&format!("cam{i}"), p, truth.focal_px, truth.principal_point_px))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(truth.seed);
    let noise = Normal::new(0.0, truth.pixel_noise_px).map_err(|e| Error::Config(e.to_string()))?;
    let pr = truth.pitch_roll_range_deg.to_radians();

    let mut gt3d = Vec::new();
    let mut obs2d = Vec::new();
    let mut rotations = Vec::new();
    for frame in 0..truth.n_frames {
        for ind in 0..truth.n_individuals {
            let individual_id = format!("ind{ind}");
            let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let pitch = rng.random_range(-pr..=pr);
            let roll = rng.random_range(-pr..=pr);
            let q = compose_yaw_pitch_roll(yaw, pitch, roll);
            let rad = truth.arena_radius_mm * rng.random::<f64>().sqrt();
            let ang = rng.random_range(0.0..std::f64::consts::TAU);
            let offset = Vector3::new(rad * ang.cos(), rad * ang.sin(), 0.0);
            let points: BTreeMap<String, Point3> = truth
                .template_mm
                .iter()
                .map(|(k, p)| (k.clone(), q * Vector3::from(*p) + offset))
                .collect();
            for cam in &cameras {
                let pts = points
                    .iter()
                    .map(|(k, p)| {
                        let uv = cam.project(p);
                        let (du, dv) = if truth.pixel_noise_px > 0.0 {
                            (noise.sample(&mut rng), noise.sample(&mut rng))
                        } else {
                            (0.0, 0.0)
                        };
                        (k.clone(), [uv[0] + du, uv[1] + dv])
                    })
                    .collect();
                obs2d.push(KeypointFrame2D {
                    frame,
                    individual_id: individual_id.clone(),
                    camera_id: cam.camera_id.clone(),
                    points: pts,
                });
            }
            gt3d.push(KeypointFrame3D {
                frame,
                individual_id,
                points,
            });
            rotations.push(q);
        }
    }
    // File readers return frames sorted by (frame, individual[, camera]); match that.
    let mut order: Vec<usize> = (0..gt3d.len()).collect();
    order.sort_by(|&a, &b| gt3d[a].key().cmp(&gt3d[b].key()));
    let gt3d: Vec<_> = order.iter().map(|&i| gt3d[i].clone()).collect();
    let rotations: Vec<_> = order.iter().map(|&i| rotations[i]).collect();
    obs2d.sort_by(|a, b| {
        (a.frame, &a.individual_id, &a.camera_id).cmp(&(b.frame, &b.individual_id, &b.camera_id))
    });

    Ok(RigSample {
        calibration: Calibration {
            world_unit: WorldUnit::Mm,
            cameras,
        },
        gt3d,
        obs2d,
        rotations,
    })
}

/// A uniformly random rotation (for property tests and perturbation experiments).
pub fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
    let axis = loop {
        let v = Vector3::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let n = v.norm();
        if n > 1e-3 && n <= 0.5 {
            break nalgebra::Unit::new_normalize(v);
        }
    };
    // Angle density ∝ (1 - cos θ) on [0, π] gives the Haar measure.
    let angle = loop {
        let t = rng.random::<f64>() * std::f64::consts::PI;
        if rng.random::<f64>() * 2.0 < 1.0 - t.cos() {
            break t;
        }
    };
    Rotation3::from_axis_angle(&axis, angle).into_inner()
}
