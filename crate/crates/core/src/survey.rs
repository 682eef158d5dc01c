//! Camera-trap survey data: configuration, camera locations, clips and
//! distance observations, plus the reactivity filtering scenarios.
//!
//! A [`Survey`] is immutable once loaded. Filtering and truncation return
//! new surveys; camera effort is never reduced by either.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const OBSERVATIONS_HEADER: [&str; 4] = ["clip_id", "snapshot_index", "distance_m", "count"];
pub const CLIPS_HEADER: [&str; 4] = ["clip_id", "location_id", "reactivity_manual", "reactivity_auto"];
pub const LOCATIONS_HEADER: [&str; 2] = ["location_id", "operating_time_s"];

/// Survey design parameters. Angles are held in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveyConfig {
    pub truncation_radius_m: f64,
    pub view_angle_rad: f64,
    pub snapshot_interval_s: f64,
    pub study_area_km2: f64,
    pub distance_bin_edges_m: Option<Vec<f64>>,
}

/// On-disk form of [`SurveyConfig`]; the view angle is given in degrees.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurveyConfigFile {
    pub truncation_radius_m: f64,
    pub view_angle_deg: f64,
    pub snapshot_interval_s: f64,
    pub study_area_km2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_bin_edges_m: Option<Vec<f64>>,
}

impl SurveyConfig {
    pub fn new(
        truncation_radius_m: f64,
        view_angle_rad: f64,
        snapshot_interval_s: f64,
        study_area_km2: f64,
        distance_bin_edges_m: Option<Vec<f64>>,
    ) -> Result<Self> {
        let cfg = SurveyConfig {
            truncation_radius_m,
            view_angle_rad,
            snapshot_interval_s,
            study_area_km2,
            distance_bin_edges_m,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.truncation_radius_m;
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Config(format!("truncation radius must be > 0, got {w}")));
        }
        let theta = self.view_angle_rad;
        if !(theta.is_finite() && theta > 0.0 && theta <= TAU) {
            return Err(Error::Config(format!(
                "view angle must be in (0, 360] degrees, got {} degrees",
                theta.to_degrees()
            )));
        }
        let t = self.snapshot_interval_s;
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Config(format!("snapshot interval must be > 0, got {t}")));
        }
        let a = self.study_area_km2;
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Config(format!("study area must be > 0, got {a}")));
        }
        if let Some(edges) = &self.distance_bin_edges_m {
            if edges.len() < 2 {
                return Err(Error::Config("need at least two distance bin edges".into()));
            }
            if edges[0] != 0.0 {
                return Err(Error::Config(format!(
                    "first distance bin edge must be 0 (no left truncation), got {}",
                    edges[0]
                )));
            }
            if edges.windows(2).any(|p| !(p[1] > p[0])) {
                return Err(Error::Config("distance bin edges must be strictly increasing".into()));
            }
            if *edges.last().unwrap() != w {
                return Err(Error::Config(format!(
                    "last distance bin edge must equal the truncation radius {w}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_file_form(f: SurveyConfigFile) -> Result<Self> {
        SurveyConfig::new(
            f.truncation_radius_m,
            f.view_angle_deg.to_radians(),
            f.snapshot_interval_s,
            f.study_area_km2,
            f.distance_bin_edges_m,
        )
    }

    pub fn to_file_form(&self) -> SurveyConfigFile {
        SurveyConfigFile {
            truncation_radius_m: self.truncation_radius_m,
            view_angle_deg: self.view_angle_rad.to_degrees(),
            snapshot_interval_s: self.snapshot_interval_s,
            study_area_km2: self.study_area_km2,
            distance_bin_edges_m: self.distance_bin_edges_m.clone(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_file_form(serde_json::from_str(s)?)
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Self> {
        Self::from_file_form(serde_json::from_value(v)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file_form()).expect("config serializes")
    }

    /// Area of the camera's view sector out to the truncation radius, in m².
    pub fn sector_area_m2(&self) -> f64 {
        0.5 * self.view_angle_rad * self.truncation_radius_m * self.truncation_radius_m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraLocation {
    pub location_id: String,
    pub operating_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clip {
    pub clip_id: String,
    pub location_id: String,
    pub reactivity_manual: bool,
    pub reactivity_auto: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceObservation {
    pub clip_id: String,
    pub snapshot_index: u64,
    pub distance_m: f64,
    pub count: u32,
}

/// Which camera-reactivity clips are removed before estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterScenario {
    None,
    Manual,
    Auto,
}

impl FilterScenario {
    pub const ALL: [FilterScenario; 3] = [FilterScenario::None, FilterScenario::Manual, FilterScenario::Auto];
}

impl fmt::Display for FilterScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterScenario::None => "None",
            FilterScenario::Manual => "Manual",
            FilterScenario::Auto => "Auto",
        })
    }
}

impl FromStr for FilterScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(FilterScenario::None),
            "manual" => Ok(FilterScenario::Manual),
            "auto" => Ok(FilterScenario::Auto),
            other => Err(Error::Config(format!("unknown filter scenario {other:?}"))),
        }
    }
}

/// A cross-referenced camera-trap survey.
#[derive(Debug, Clone, PartialEq)]
pub struct Survey {
    config: SurveyConfig,
    locations: Vec<CameraLocation>,
    clips: Vec<Clip>,
    observations: Vec<DistanceObservation>,
    clip_index: HashMap<String, usize>,
    location_index: HashMap<String, usize>,
}

/// Paths of the three survey tables.
#[derive(Debug, Clone)]
pub struct SurveyFiles {
    pub observations: PathBuf,
    pub clips: PathBuf,
    pub locations: PathBuf,
}

impl SurveyFiles {
    /// Standard file names inside `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let d = dir.as_ref();
        SurveyFiles {
            observations: d.join("observations.csv"),
            clips: d.join("clips.csv"),
            locations: d.join("locations.csv"),
        }
    }
}

struct Table<R: Read> {
    name: String,
    reader: csv::Reader<R>,
    columns: Vec<usize>,
}

impl<R: Read> Table<R> {
    fn open(name: &str, source: R, required: &[&str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(source);
        let headers = reader.headers().map_err(|e| Error::Schema {
            source_name: name.to_string(),
            row: 1,
            message: e.to_string(),
        })?;
        let mut columns = Vec::with_capacity(required.len());
        for col in required {
            match headers.iter().position(|h| h == *col) {
                Some(i) => columns.push(i),
                None => {
                    return Err(Error::Schema {
                        source_name: name.to_string(),
                        row: 1,
                        message: format!("missing column {col:?}"),
                    })
                }
            }
        }
        Ok(Table {
            name: name.to_string(),
            reader,
            columns,
        })
    }

    /// Visit each data row with its line number and the required fields in order.
    fn for_each_row(&mut self, mut f: impl FnMut(u64, Vec<&str>) -> Result<()>) -> Result<()> {
        let mut record = csv::StringRecord::new();
        loop {
            let more = self.reader.read_record(&mut record).map_err(|e| Error::Schema {
                source_name: self.name.clone(),
                row: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            if !more {
                return Ok(());
            }
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            let mut fields = Vec::with_capacity(self.columns.len());
            for &c in &self.columns {
                fields.push(record.get(c).unwrap_or(""));
            }
            f(line, fields)?;
        }
    }
}

fn schema_err(name: &str, row: u64, message: String) -> Error {
    Error::Schema {
        source_name: name.to_string(),
        row,
        message,
    }
}

fn parse_f64(name: &str, row: u64, column: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .parse()
        .map_err(|_| schema_err(name, row, format!("{column}: not a number: {raw:?}")))?;
    if !v.is_finite() {
        return Err(schema_err(name, row, format!("{column}: not finite: {raw:?}")));
    }
    Ok(v)
}

fn parse_bool(name: &str, row: u64, column: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(schema_err(name, row, format!("{column}: expected true or false, got {raw:?}"))),
    }
}

fn non_empty<'a>(name: &str, row: u64, column: &str, raw: &'a str) -> Result<&'a str> {
    if raw.is_empty() {
        Err(schema_err(name, row, format!("{column}: empty")))
    } else {
        Ok(raw)
    }
}

impl Survey {
    /// Build a survey from already-parsed records, checking every invariant.
    pub fn new(
        config: SurveyConfig,
        locations: Vec<CameraLocation>,
        clips: Vec<Clip>,
        observations: Vec<DistanceObservation>,
    ) -> Result<Self> {
        config.validate()?;
        let mut location_index = HashMap::with_capacity(locations.len());
        for (i, loc) in locations.iter().enumerate() {
            let row = i as u64 + 2;
            if !(loc.operating_time_s.is_finite() && loc.operating_time_s > 0.0) {
                return Err(schema_err(
                    "locations",
                    row,
                    format!("operating_time_s must be > 0, got {}", loc.operating_time_s),
                ));
            }
            if location_index.insert(loc.location_id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    source_name: "locations".into(),
                    row,
                    kind: "location_id",
                    id: loc.location_id.clone(),
                });
            }
        }
        let mut clip_index = HashMap::with_capacity(clips.len());
        for (i, clip) in clips.iter().enumerate() {
            let row = i as u64 + 2;
            if !location_index.contains_key(&clip.location_id) {
                return Err(Error::DanglingReference {
                    source_name: "clips".into(),
                    row,
                    kind: "location_id",
                    id: clip.location_id.clone(),
                });
            }
            if clip_index.insert(clip.clip_id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    source_name: "clips".into(),
                    row,
                    kind: "clip_id",
                    id: clip.clip_id.clone(),
                });
            }
        }
        for (i, obs) in observations.iter().enumerate() {
            let row = i as u64 + 2;
            if !clip_index.contains_key(&obs.clip_id) {
                return Err(Error::DanglingReference {
                    source_name: "observations".into(),
                    row,
                    kind: "clip_id",
                    id: obs.clip_id.clone(),
                });
            }
            if !(obs.distance_m.is_finite() && obs.distance_m >= 0.0) {
                return Err(schema_err("observations", row, format!("distance_m must be >= 0, got {}", obs.distance_m)));
            }
            if obs.count == 0 {
                return Err(schema_err("observations", row, "count must be >= 1".into()));
            }
        }
        Ok(Survey {
            config,
            locations,
            clips,
            observations,
            clip_index,
            location_index,
        })
    }

    /// Parse the three CSV tables. Errors name the table and the line.
    pub fn from_readers(
        observations: impl Read,
        clips: impl Read,
        locations: impl Read,
        config: SurveyConfig,
    ) -> Result<Self> {
        Self::from_named_readers(
            ("locations.csv", locations),
            ("clips.csv", clips),
            ("observations.csv", observations),
            config,
        )
    }

    fn from_named_readers(
        locations: (&str, impl Read),
        clips: (&str, impl Read),
        observations: (&str, impl Read),
        config: SurveyConfig,
    ) -> Result<Self> {
        config.validate()?;

        let (lname, lsrc) = locations;
        let mut locs = Vec::new();
        let mut location_index = HashMap::new();
        let mut table = Table::open(lname, lsrc, &LOCATIONS_HEADER)?;
        table.for_each_row(|row, f| {
            let id = non_empty(lname, row, "location_id", f[0])?.to_string();
            let t = parse_f64(lname, row, "operating_time_s", f[1])?;
            if t <= 0.0 {
                return Err(schema_err(lname, row, format!("operating_time_s must be > 0, got {t}")));
            }
            if location_index.insert(id.clone(), locs.len()).is_some() {
                return Err(Error::DuplicateId {
                    source_name: lname.into(),
                    row,
                    kind: "location_id",
                    id,
                });
            }
            locs.push(CameraLocation {
                location_id: id,
                operating_time_s: t,
            });
            Ok(())
        })?;

        let (cname, csrc) = clips;
        let mut clip_list = Vec::new();
        let mut clip_index = HashMap::new();
        let mut table = Table::open(cname, csrc, &CLIPS_HEADER)?;
        table.for_each_row(|row, f| {
            let id = non_empty(cname, row, "clip_id", f[0])?.to_string();
            let loc = non_empty(cname, row, "location_id", f[1])?.to_string();
            let manual = parse_bool(cname, row, "reactivity_manual", f[2])?;
            let auto = parse_bool(cname, row, "reactivity_auto", f[3])?;
            if !location_index.contains_key(&loc) {
                return Err(Error::DanglingReference {
                    source_name: cname.into(),
                    row,
                    kind: "location_id",
                    id: loc,
                });
            }
            if clip_index.insert(id.clone(), clip_list.len()).is_some() {
                return Err(Error::DuplicateId {
                    source_name: cname.into(),
                    row,
                    kind: "clip_id",
                    id,
                });
            }
            clip_list.push(Clip {
                clip_id: id,
                location_id: loc,
                reactivity_manual: manual,
                reactivity_auto: auto,
            });
            Ok(())
        })?;

        let (oname, osrc) = observations;
        let mut obs = Vec::new();
        let mut table = Table::open(oname, osrc, &OBSERVATIONS_HEADER)?;
        table.for_each_row(|row, f| {
            let clip = non_empty(oname, row, "clip_id", f[0])?.to_string();
            let snapshot_index: u64 = f[1].parse().map_err(|_| {
                schema_err(oname, row, format!("snapshot_index: not a nonnegative integer: {:?}", f[1]))
            })?;
            let distance = parse_f64(oname, row, "distance_m", f[2])?;
            if distance < 0.0 {
                return Err(schema_err(oname, row, format!("distance_m must be >= 0, got {distance}")));
            }
            let count: u32 = f[3]
                .parse()
                .map_err(|_| schema_err(oname, row, format!("count: not a positive integer: {:?}", f[3])))?;
            if count == 0 {
                return Err(schema_err(oname, row, "count must be >= 1".into()));
            }
            if !clip_index.contains_key(&clip) {
                return Err(Error::DanglingReference {
                    source_name: oname.into(),
                    row,
                    kind: "clip_id",
                    id: clip,
                });
            }
            obs.push(DistanceObservation {
                clip_id: clip,
                snapshot_index,
                distance_m: distance,
                count,
            });
            Ok(())
        })?;

        Ok(Survey {
            config,
            locations: locs,
            clips: clip_list,
            observations: obs,
            clip_index,
            location_index,
        })
    }

    /// Load the three tables from disk.
    pub fn load(files: &SurveyFiles, config: SurveyConfig) -> Result<Self> {
        let open = |p: &Path| std::fs::File::open(p).map_err(|e| Error::io(p, e));
        let name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        Self::from_named_readers(
            (&name(&files.locations), open(&files.locations)?),
            (&name(&files.clips), open(&files.clips)?),
            (&name(&files.observations), open(&files.observations)?),
            config,
        )
    }

    pub fn config(&self) -> &SurveyConfig {
        &self.config
    }

    pub fn locations(&self) -> &[CameraLocation] {
        &self.locations
    }

    pub fn clips(&self) -> &[Clip] {
        &self.clips
    }

    pub fn observations(&self) -> &[DistanceObservation] {
        &self.observations
    }

    pub fn clip(&self, clip_id: &str) -> Option<&Clip> {
        self.clip_index.get(clip_id).map(|&i| &self.clips[i])
    }

    /// Index into [`Survey::locations`] of the camera that recorded `obs`.
    pub fn location_index_of(&self, obs: &DistanceObservation) -> usize {
        let clip = &self.clips[self.clip_index[&obs.clip_id]];
        self.location_index[&clip.location_id]
    }

    /// Snapshot moments per camera, `T_k / t`.
    pub fn effort_snapshots(&self) -> Vec<f64> {
        self.locations
            .iter()
            .map(|l| l.operating_time_s / self.config.snapshot_interval_s)
            .collect()
    }

    pub fn total_effort_snapshots(&self) -> f64 {
        self.effort_snapshots().iter().sum()
    }

    /// Total number of individuals over all observations.
    pub fn total_count(&self) -> u64 {
        self.observations.iter().map(|o| o.count as u64).sum()
    }

    /// `(distance, count)` pairs for detection-function fitting.
    pub fn weighted_distances(&self) -> Vec<(f64, f64)> {
        self.observations
            .iter()
            .map(|o| (o.distance_m, o.count as f64))
            .collect()
    }

    /// Same locations, clips and config with a different observation set.
    pub fn with_observations(&self, observations: Vec<DistanceObservation>) -> Survey {
        Survey {
            config: self.config.clone(),
            locations: self.locations.clone(),
            clips: self.clips.clone(),
            observations,
            clip_index: self.clip_index.clone(),
            location_index: self.location_index.clone(),
        }
    }

    /// Remove observations from clips flagged as reactive under `scenario`.
    /// Camera operating times are left untouched.
    pub fn apply_filter(&self, scenario: FilterScenario) -> Survey {
        let keep = |o: &DistanceObservation| {
            let clip = &self.clips[self.clip_index[&o.clip_id]];
            match scenario {
                FilterScenario::None => true,
                FilterScenario::Manual => !clip.reactivity_manual,
                FilterScenario::Auto => !clip.reactivity_auto,
            }
        };
        self.with_observations(self.observations.iter().filter(|o| keep(o)).cloned().collect())
    }

    /// Drop observations beyond the truncation radius. `r == w` is kept.
    pub fn truncate(&self) -> Survey {
        let w = self.config.truncation_radius_m;
        self.with_observations(
            self.observations
                .iter()
                .filter(|o| o.distance_m <= w)
                .cloned()
                .collect(),
        )
    }

    pub fn write_observations(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(OBSERVATIONS_HEADER)?;
        for o in &self.observations {
            w.write_record([
                o.clip_id.as_str(),
                &o.snapshot_index.to_string(),
                &o.distance_m.to_string(),
                &o.count.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("observations.csv", e))?;
        Ok(())
    }

    pub fn write_clips(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CLIPS_HEADER)?;
        for c in &self.clips {
            w.write_record([
                c.clip_id.as_str(),
                c.location_id.as_str(),
                if c.reactivity_manual { "true" } else { "false" },
                if c.reactivity_auto { "true" } else { "false" },
            ])?;
        }
        w.flush().map_err(|e| Error::io("clips.csv", e))?;
        Ok(())
    }

    pub fn write_locations(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(LOCATIONS_HEADER)?;
        for l in &self.locations {
            w.write_record([l.location_id.as_str(), &l.operating_time_s.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("locations.csv", e))?;
        Ok(())
    }

    /// Write the three tables and `survey.json` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = SurveyFiles::in_dir(dir);
        let create = |p: &Path| std::fs::File::create(p).map_err(|e| Error::io(p, e));
        self.write_observations(create(&files.observations)?)?;
        self.write_clips(create(&files.clips)?)?;
        self.write_locations(create(&files.locations)?)?;
        let cfg = dir.join("survey.json");
        std::fs::write(&cfg, self.config.to_json_string() + "\n").map_err(|e| Error::io(&cfg, e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SurveyConfig {
        SurveyConfig::new(10.0, 1.0, 2.0, 100.0, None).unwrap()
    }

    const LOCS: &str = "location_id,operating_time_s\nL1,2000\n";
    const CLIPS: &str = "clip_id,location_id,reactivity_manual,reactivity_auto\nA,L1,true,false\nB,L1,false,true\n";

    fn load(obs: &str) -> Result<Survey> {
        Survey::from_readers(obs.as_bytes(), CLIPS.as_bytes(), LOCS.as_bytes(), cfg())
    }

    fn sample() -> Survey {
        load("clip_id,snapshot_index,distance_m,count\nA,0,3,1\nA,1,9.99,2\nB,0,10.0,1\nB,5,10.01,1\n").unwrap()
    }

    #[test]
    fn loads_valid_rows() {
        let s = load("clip_id,snapshot_index,distance_m,count\nA,0,1.5,1\nA,1,2.5,1\nB,0,3.5,2\n").unwrap();
        assert_eq!(s.observations().len(), 3);
        assert_eq!(s.clips().len(), 2);
        assert_eq!(s.locations().len(), 1);
    }

    #[test]
    fn empty_observations_are_fine() {
        let s = load("clip_id,snapshot_index,distance_m,count\n").unwrap();
        assert!(s.observations().is_empty());
    }

    #[test]
    fn dangling_clip_names_the_id() {
        let err = load("clip_id,snapshot_index,distance_m,count\nA,0,1,1\nX,0,1,1\n").unwrap_err();
        match &err {
            Error::DanglingReference { id, row, .. } => {
                assert_eq!(id, "X");
                assert_eq!(*row, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err.to_string().contains("\"X\""));
    }

    #[test]
    fn schema_errors_name_the_row() {
        let err = load("clip_id,snapshot_index,distance_m,count\nA,0,abc,1\n").unwrap_err();
        assert!(matches!(err, Error::Schema { row: 2, .. }), "{err}");
        let err = load("clip_id,snapshot_index,dist,count\n").unwrap_err();
        assert!(err.to_string().contains("missing column \"distance_m\""), "{err}");
    }

    #[test]
    fn duplicate_clip_is_rejected() {
        let clips = "clip_id,location_id,reactivity_manual,reactivity_auto\nA,L1,true,false\nA,L1,false,true\n";
        let err = Survey::from_readers(
            "clip_id,snapshot_index,distance_m,count\n".as_bytes(),
            clips.as_bytes(),
            LOCS.as_bytes(),
            cfg(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateId { row: 3, .. }), "{err}");
    }

    #[test]
    fn filter_scenarios() {
        let s = load("clip_id,snapshot_index,distance_m,count\nA,0,1,1\nA,1,2,1\nB,0,3,1\nB,1,4,1\n").unwrap();
        assert_eq!(s.apply_filter(FilterScenario::None), s);
        let manual = s.apply_filter(FilterScenario::Manual);
        assert!(manual.observations().iter().all(|o| o.clip_id == "B"));
        assert_eq!(manual.observations().len(), 2);
        let auto = s.apply_filter(FilterScenario::Auto);
        assert!(auto.observations().iter().all(|o| o.clip_id == "A"));
        assert_eq!(auto.observations().len(), 2);
        assert_eq!(manual.total_effort_snapshots(), s.total_effort_snapshots());
    }

    #[test]
    fn truncation_is_inclusive() {
        let t = sample().truncate();
        let d: Vec<f64> = t.observations().iter().map(|o| o.distance_m).collect();
        assert_eq!(d, vec![3.0, 9.99, 10.0]);
        assert_eq!(t.truncate(), t);
    }

    #[test]
    fn config_rejects_bad_edges() {
        assert!(SurveyConfig::new(10.0, 1.0, 2.0, 1.0, Some(vec![0.0, 5.0, 10.0])).is_ok());
        assert!(SurveyConfig::new(10.0, 1.0, 2.0, 1.0, Some(vec![0.0, 5.0, 9.0])).is_err());
        assert!(SurveyConfig::new(10.0, 1.0, 2.0, 1.0, Some(vec![0.0, 5.0, 5.0, 10.0])).is_err());
        assert!(SurveyConfig::new(0.0, 1.0, 2.0, 1.0, None).is_err());
        assert!(SurveyConfig::new(10.0, 7.0, 2.0, 1.0, None).is_err());
    }

    #[test]
    fn config_json_uses_degrees() {
        let c = SurveyConfig::from_json_str(
            r#"{"truncation_radius_m": 15, "view_angle_deg": 90, "snapshot_interval_s": 2, "study_area_km2": 50}"#,
        )
        .unwrap();
        assert!((c.view_angle_rad - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(c.distance_bin_edges_m.is_none());
    }
}
