use std::path::{Path, PathBuf};

use anyhow::Context;
use appeval::exec::Exec;
use appeval::gaze::{self, AngularErrorSummary, HeadKeypoints, DEFAULT_THRESHOLD_DEG};
use appeval::mvgeo::{self, Calibration, KeypointFrame3D, KeypointMetrics, TriangulationReport, WorldUnit};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::report::{self, num, text, InputDigest, Report, Table};
use crate::{usage, CmdResult};

const DEFAULT_SUBSET: [&str; 4] = ["beak", "nose", "left_eye", "right_eye"];
const DEFAULT_PCK: [f64; 2] = [0.05, 0.10];

#[derive(Args, Debug)]
pub struct PoseArgs {
    /// Run settings (JSON); relative paths in it are resolved against its directory.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Camera projection matrices (JSON).
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// 2D keypoint predictions to triangulate (needs --calibration).
    #[arg(long)]
    pred2d: Option<PathBuf>,
    /// 3D keypoint predictions.
    #[arg(long)]
    pred3d: Option<PathBuf>,
    /// 3D ground truth.
    #[arg(long)]
    gt3d: Option<PathBuf>,
    /// Directory for pose_report.{json,txt} and gaze_report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keypoints scored by RMSE, median and PCK (comma-separated).
    #[arg(long, value_delimiter = ',')]
    keypoints: Option<Vec<String>>,
    /// PCK fractions of the ground-truth skeleton size (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pck: Option<Vec<f64>>,
    /// Median rotation error (degrees) regarded as acceptable for gaze work.
    #[arg(long)]
    threshold: Option<f64>,
    /// Views needed to triangulate a keypoint.
    #[arg(long)]
    min_views: Option<usize>,
    /// Unit of 3D files when no calibration is given.
    #[arg(long, value_parser = parse_unit)]
    unit: Option<WorldUnit>,
    /// Recorded in the report; the pose pipeline has no random steps.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_unit(s: &str) -> Result<WorldUnit, String> {
    match s {
        "mm" => Ok(WorldUnit::Mm),
        "m" => Ok(WorldUnit::M),
        other => Err(format!("unknown unit {other:?} (expected mm or m)")),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseConfig {
    calibration: Option<PathBuf>,
    pred2d: Option<PathBuf>,
    pred3d: Option<PathBuf>,
    gt3d: Option<PathBuf>,
    keypoints: Option<Vec<String>>,
    pck: Option<Vec<f64>>,
    threshold_deg: Option<f64>,
    min_views: Option<usize>,
    unit: Option<WorldUnit>,
    head_keypoints: Option<HeadKeypoints>,
    seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct Parameters {
    keypoints: Vec<String>,
    pck_fractions: Vec<f64>,
    threshold_deg: f64,
    min_views: usize,
    world_unit: WorldUnit,
    head_keypoints: HeadKeypoints,
    triangulated: bool,
    seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct GazeResults {
    summary: AngularErrorSummary,
    threshold_deg: f64,
    acceptable: bool,
    n_degenerate_or_missing: usize,
}

#[derive(Debug, Serialize)]
struct Results {
    keypoint_metrics: KeypointMetrics,
    gaze: GazeResults,
    #[serde(skip_serializing_if = "Option::is_none")]
    triangulation: Option<TriangulationReport>,
}

fn read3d(path: &Path, unit: WorldUnit) -> anyhow::Result<Vec<KeypointFrame3D>> {
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let name = path.display().to_string();
    let frames = mvgeo::read_keypoints3d(f, &name)?;
    let s = unit.to_mm();
    Ok(if s == 1.0 { frames } else { frames.iter().map(|f| f.scaled(s)).collect() })
}

pub fn run(args: PoseArgs) -> CmdResult {
    let (cfg, base) = match &args.config {
        Some(p) => {
            let raw = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let cfg: PoseConfig =
                serde_json::from_str(&raw).with_context(|| format!("{}: invalid pose configuration", p.display()))?;
            (cfg, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (PoseConfig::default(), PathBuf::new()),
    };
    let resolve = |flag: &Option<PathBuf>, conf: &Option<PathBuf>| flag.clone().or_else(|| conf.as_ref().map(|p| base.join(p)));
    let calibration_path = resolve(&args.calibration, &cfg.calibration);
    let pred2d_path = resolve(&args.pred2d, &cfg.pred2d);
    let pred3d_path = resolve(&args.pred3d, &cfg.pred3d);
    let gt_path = resolve(&args.gt3d, &cfg.gt3d).ok_or_else(|| usage("--gt3d is required"))?;
    if pred2d_path.is_some() && calibration_path.is_none() {
        return Err(usage("--pred2d needs --calibration"));
    }
    if pred2d_path.is_some() == pred3d_path.is_some() {
        return Err(usage("give exactly one of --pred2d and --pred3d"));
    }
    let keypoints = args
        .keypoints
        .or(cfg.keypoints)
        .unwrap_or_else(|| DEFAULT_SUBSET.iter().map(|s| s.to_string()).collect());
    let pck = args.pck.or(cfg.pck).unwrap_or(DEFAULT_PCK.to_vec());
    if pck.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
        return Err(usage("--pck fractions must be positive"));
    }
    let threshold = args.threshold.or(cfg.threshold_deg).unwrap_or(DEFAULT_THRESHOLD_DEG);
    let min_views = args.min_views.or(cfg.min_views).unwrap_or(2);
    let head = cfg.head_keypoints.unwrap_or_default();

    let mut inputs = Vec::new();
    let calibration = match &calibration_path {
        Some(p) => {
            inputs.push(InputDigest::of_file("calibration", p)?);
            let raw = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(Calibration::from_json_str(&raw).with_context(|| format!("{}", p.display()))?)
        }
        None => None,
    };
    let unit = calibration
        .as_ref()
        .map(|c| c.world_unit)
        .or(args.unit)
        .or(cfg.unit)
        .unwrap_or(WorldUnit::Mm);

    let mut warnings = Vec::new();
    let (pred, tri) = if let Some(p2) = &pred2d_path {
        inputs.push(InputDigest::of_file("pred2d", p2)?);
        let f = std::fs::File::open(p2).with_context(|| format!("opening {}", p2.display()))?;
        let frames = mvgeo::read_keypoints2d(f, &p2.display().to_string())?;
        let calib = calibration.as_ref().expect("checked above");
        let (tri, rep) = mvgeo::triangulate_frames(calib, &frames, min_views, Exec::Parallel);
        let s = unit.to_mm();
        let tri: Vec<KeypointFrame3D> = if s == 1.0 { tri } else { tri.iter().map(|f| f.scaled(s)).collect() };
        if rep.insufficient_views > 0 {
            warnings.push(format!("{} keypoints seen in fewer than {min_views} views", rep.insufficient_views));
        }
        if rep.degenerate > 0 {
            warnings.push(format!("{} keypoints had degenerate view geometry", rep.degenerate));
        }
        if rep.unknown_camera > 0 {
            warnings.push(format!("{} 2D keypoints came from cameras absent from the calibration", rep.unknown_camera));
        }
        (tri, Some(rep))
    } else {
        let p3 = pred3d_path.as_ref().expect("checked above");
        inputs.push(InputDigest::of_file("pred3d", p3)?);
        (read3d(p3, unit)?, None)
    };
    inputs.push(InputDigest::of_file("gt3d", &gt_path)?);
    let gt = read3d(&gt_path, unit)?;

    let metrics = mvgeo::keypoint_metrics(&pred, &gt, &keypoints, &pck, Exec::Parallel)?;
    if metrics.n_excluded > 0 {
        warnings.push(format!("{} keypoints present on only one side were excluded", metrics.n_excluded));
    }
    if metrics.n_unmatched_frames > 0 {
        warnings.push(format!("{} ground-truth frames have no prediction", metrics.n_unmatched_frames));
    }
    let (errors, skipped) = gaze::frame_errors(&pred, &gt, &head);
    let summary = gaze::angular_summary(&errors, skipped)?;
    if skipped > 0 {
        warnings.push(format!("{skipped} frames skipped for head-frame evaluation (degenerate or missing)"));
    }
    if summary.n_gimbal > 0 {
        warnings.push(format!("{} frames at gimbal lock: yaw carries the combined yaw/roll angle", summary.n_gimbal));
    }
    let gaze_results = GazeResults {
        acceptable: summary.acceptable(threshold),
        summary,
        threshold_deg: threshold,
        n_degenerate_or_missing: skipped,
    };

    let params = Parameters {
        keypoints,
        pck_fractions: pck,
        threshold_deg: threshold,
        min_views,
        world_unit: unit,
        head_keypoints: head,
        triangulated: tri.is_some(),
        seed: args.seed.or(cfg.seed),
    };
    let results = Results { keypoint_metrics: metrics, gaze: gaze_results, triangulation: tri };

    let gaze_doc = serde_json::json!({
        "tool": { "name": report::TOOL_NAME, "version": report::TOOL_VERSION },
        "command": "pose",
        "inputs": &inputs,
        "threshold_deg": threshold,
        "acceptable": results.gaze.acceptable,
        "summary": &results.gaze.summary,
        "n_degenerate_or_missing": skipped,
    });
    let mut rep = Report::new("pose", inputs, params, results);
    rep.tables = tables(&rep.parameters, &rep.results);
    rep.warnings = warnings;
    let txt = report::emit(&rep, "pose", args.out.as_deref())?;
    if let Some(out) = &args.out {
        report::write_file(&out.join("gaze_report.json"), &(serde_json::to_string_pretty(&gaze_doc).context("gaze report")? + "\n"))?;
    }
    print!("{txt}");
    Ok(())
}

fn pck_label(f: f64) -> String {
    format!("PCK{:02} %", (f * 100.0).round() as i64)
}

fn tables(p: &Parameters, r: &Results) -> Vec<Table> {
    let mut ml_cols: Vec<(String, Option<usize>)> =
        vec![("RMSE mm".into(), Some(1)), ("median mm".into(), Some(1))];
    for s in &r.keypoint_metrics.pck {
        ml_cols.push((pck_label(s.fraction), Some(1)));
    }
    ml_cols.push(("points".into(), Some(0)));
    let cols: Vec<(&str, Option<usize>)> = ml_cols.iter().map(|(n, d)| (n.as_str(), *d)).collect();
    let mut ml = Table::new("Keypoint metrics", &cols);
    let m = &r.keypoint_metrics;
    let mut row = vec![num(m.rmse_mm, 1), num(m.median_mm, 1)];
    row.extend(m.pck.iter().map(|s| num(s.pct, 1)));
    row.push(num(m.n_points as f64, 0));
    ml.rows.push(row);

    let mut ang = Table::new(
        "Head rotation error (degrees)",
        &[
            ("RMSE", Some(2)),
            ("median", Some(2)),
            ("median geodesic", Some(2)),
            ("median yaw", Some(2)),
            ("median pitch", Some(2)),
            ("median roll", Some(2)),
            ("frames", Some(0)),
            ("threshold", Some(2)),
            ("acceptable", None),
        ],
    );
    let s = &r.gaze.summary;
    ang.rows.push(vec![
        num(s.rmse_deg, 2),
        num(s.median_deg_pooled, 2),
        num(s.median_geodesic_deg, 2),
        num(s.median_yaw_deg, 2),
        num(s.median_pitch_deg, 2),
        num(s.median_roll_deg, 2),
        num(s.n_frames as f64, 0),
        num(p.threshold_deg, 2),
        text(if r.gaze.acceptable { "yes" } else { "no" }),
    ]);
    vec![ml, ang]
}
