//! Density and abundance estimation for camera-trap distance sampling.
//!
//! The point estimator is
//!
//! ```text
//! D = n / ((θ/2) · w² · P · Σ_k e_k),   e_k = T_k / t
//! ```
//!
//! where `n` is the number of individuals seen within `w`, `P` the fitted
//! average detection probability and `e_k` the number of snapshot moments
//! camera `k` was operating. Densities are reported per km² and abundance
//! is `N = D · A`. No availability correction is applied, so estimates are
//! "unadjusted" in distance-sampling terms.
//!
//! Uncertainty comes from a nonparametric bootstrap over camera locations
//! that refits the detection function in every replicate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detfn::{self, DetectionFit, KeyFamily};
use crate::exec::Exec;
use crate::stats;
use crate::survey::{FilterScenario, Survey, SurveyConfig};
use crate::{Error, Result};

const M2_PER_KM2: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uncertainty {
    pub se_density: f64,
    pub se_abundance: f64,
    pub ci95_density: (f64, f64),
    pub ci95_abundance: (f64, f64),
    pub replicates_requested: usize,
    pub replicates_used: usize,
    pub replicates_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    /// Individuals per km².
    pub density: f64,
    pub abundance: f64,
    pub scenario: FilterScenario,
    pub key_family: KeyFamily,
    /// Identifies the survey the estimate came from; comparisons require a match.
    pub survey_label: String,
    pub n_obs_used: u64,
    pub detection_prob: f64,
    pub effort_snapshots: f64,
    pub fit: Option<DetectionFit>,
    pub uncertainty: Option<Uncertainty>,
}

/// Density in individuals per km² from its ingredients.
pub fn density_per_km2(individuals: f64, config: &SurveyConfig, detection_prob: f64, effort_snapshots: f64) -> f64 {
    individuals / (config.sector_area_m2() * detection_prob * effort_snapshots) * M2_PER_KM2
}

fn check_truncated(survey: &Survey) -> Result<()> {
    let w = survey.config().truncation_radius_m;
    if let Some(o) = survey.observations().iter().find(|o| o.distance_m > w) {
        return Err(Error::Config(format!(
            "observation at {} m lies beyond the truncation radius {w} m; truncate the survey first",
            o.distance_m
        )));
    }
    Ok(())
}

/// Point estimate from a truncated survey and a detection fit made on it.
pub fn estimate(survey: &Survey, fit: &DetectionFit, scenario: FilterScenario) -> Result<EstimateResult> {
    check_truncated(survey)?;
    let n = survey.total_count();
    if n == 0 {
        return Err(Error::NoDetections);
    }
    let effort = survey.total_effort_snapshots();
    if !(effort > 0.0) {
        return Err(Error::Config("total camera effort must be > 0".into()));
    }
    let cfg = survey.config();
    let density = density_per_km2(n as f64, cfg, fit.detection_prob, effort);
    Ok(EstimateResult {
        density,
        abundance: density * cfg.study_area_km2,
        scenario,
        key_family: fit.family(),
        survey_label: String::new(),
        n_obs_used: n,
        detection_prob: fit.detection_prob,
        effort_snapshots: effort,
        fit: Some(fit.clone()),
        uncertainty: None,
    })
}

/// Fit `family` to the survey's distances (binned if the config has bins).
pub fn fit_survey(survey: &Survey, family: KeyFamily) -> Result<DetectionFit> {
    let cfg = survey.config();
    if survey.observations().is_empty() {
        return Err(Error::NoDetections);
    }
    detfn::fit_mle(
        &survey.weighted_distances(),
        family,
        cfg.truncation_radius_m,
        cfg.distance_bin_edges_m.as_deref(),
    )
}

/// RNG of bootstrap replicate `index` under `seed`: one ChaCha stream per replicate.
pub fn replicate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Per-location data needed to draw bootstrap replicates.
#[derive(Debug, Clone)]
pub struct BootstrapDesign {
    config: SurveyConfig,
    distances: Vec<Vec<(f64, f64)>>,
    effort: Vec<f64>,
}

impl BootstrapDesign {
    pub fn from_survey(survey: &Survey) -> Self {
        let mut distances = vec![Vec::new(); survey.locations().len()];
        for obs in survey.observations() {
            distances[survey.location_index_of(obs)].push((obs.distance_m, obs.count as f64));
        }
        BootstrapDesign {
            config: survey.config().clone(),
            distances,
            effort: survey.effort_snapshots(),
        }
    }

    pub fn n_locations(&self) -> usize {
        self.effort.len()
    }

    /// Density (per km²) of replicate `index`: resample locations with
    /// replacement, refit, re-estimate.
    pub fn replicate(&self, family: KeyFamily, seed: u64, index: usize) -> Result<f64> {
        let mut rng = replicate_rng(seed, index);
        let l = self.n_locations();
        let mut pooled = Vec::new();
        let mut effort = 0.0;
        for _ in 0..l {
            let k = rng.random_range(0..l);
            pooled.extend_from_slice(&self.distances[k]);
            effort += self.effort[k];
        }
        if pooled.is_empty() {
            return Err(Error::NoDetections);
        }
        let fit = detfn::fit_mle(
            &pooled,
            family,
            self.config.truncation_radius_m,
            self.config.distance_bin_edges_m.as_deref(),
        )?;
        let n: f64 = pooled.iter().map(|d| d.1).sum();
        Ok(density_per_km2(n, &self.config, fit.detection_prob, effort))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BootstrapOptions {
    pub replicates: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            replicates: 999,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

pub const MIN_REPLICATES: usize = 100;

/// Point estimate plus bootstrap SE and 95% percentile intervals.
pub fn estimate_with_bootstrap(
    survey: &Survey,
    family: KeyFamily,
    scenario: FilterScenario,
    opts: BootstrapOptions,
) -> Result<EstimateResult> {
    if survey.locations().len() < 2 {
        return Err(Error::Bootstrap(format!(
            "need at least 2 camera locations, got {}",
            survey.locations().len()
        )));
    }
    if opts.replicates < MIN_REPLICATES {
        return Err(Error::Bootstrap(format!(
            "need at least {MIN_REPLICATES} replicates, got {}",
            opts.replicates
        )));
    }
    check_truncated(survey)?;
    let fit = fit_survey(survey, family)?;
    let mut result = estimate(survey, &fit, scenario)?;

    let design = BootstrapDesign::from_survey(survey);
    let draws = opts
        .exec
        .map_indexed(opts.replicates, |i| design.replicate(family, opts.seed, i).ok());
    let mut densities: Vec<f64> = draws.into_iter().flatten().collect();
    let failed = opts.replicates - densities.len();
    if 2 * failed > opts.replicates {
        return Err(Error::Bootstrap(format!(
            "{failed} of {} replicates failed to fit; the detection model is unstable on this survey",
            opts.replicates
        )));
    }

    let area = survey.config().study_area_km2;
    let se = stats::sample_sd(&densities);
    densities.sort_by(f64::total_cmp);
    let lo = stats::quantile_sorted(&densities, 0.025).unwrap();
    let hi = stats::quantile_sorted(&densities, 0.975).unwrap();
    result.uncertainty = Some(Uncertainty {
        se_density: se,
        se_abundance: se * area,
        ci95_density: (lo, hi),
        ci95_abundance: (lo * area, hi * area),
        replicates_requested: opts.replicates,
        replicates_used: densities.len(),
        replicates_failed: failed,
    });
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioComparison {
    pub baseline: EstimateResult,
    pub alternative: EstimateResult,
    pub pct_diff_abundance: f64,
    pub pct_diff_density: f64,
}

/// Percent change of `alternative` relative to `baseline`; positive means
/// the alternative is higher.
pub fn percent_difference(baseline: f64, alternative: f64) -> Result<f64> {
    if baseline == 0.0 {
        return Err(Error::Comparison("baseline estimate is zero".into()));
    }
    Ok(100.0 * (alternative - baseline) / baseline)
}

pub fn compare_scenarios(baseline: &EstimateResult, alternative: &EstimateResult) -> Result<ScenarioComparison> {
    if baseline.key_family != alternative.key_family {
        return Err(Error::Comparison(format!(
            "key functions differ ({} vs {})",
            baseline.key_family, alternative.key_family
        )));
    }
    if baseline.survey_label != alternative.survey_label {
        return Err(Error::Comparison(format!(
            "surveys differ ({:?} vs {:?})",
            baseline.survey_label, alternative.survey_label
        )));
    }
    Ok(ScenarioComparison {
        baseline: baseline.clone(),
        alternative: alternative.clone(),
        pct_diff_abundance: percent_difference(baseline.abundance, alternative.abundance)?,
        pct_diff_density: percent_difference(baseline.density, alternative.density)?,
    })
}
