//! Detection functions for point-transect (camera-trap) distance sampling.
//!
//! Two key functions are supported, without adjustment terms:
//!
//! * half-normal `g(r) = exp(-r² / 2σ²)`
//! * hazard-rate `g(r) = 1 - exp(-(r/σ)^-b)`, with `b > 1`
//!
//! For a camera the density of detected distances out to `w` is
//! `f(r) = r g(r) / ∫₀ʷ s g(s) ds`, and the average detection probability
//! inside the sector is `P = 2/w² ∫₀ʷ r g(r) dr`.

mod optim;
pub mod quad;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use optim::{golden_section, nelder_mead, Minimum};

/// Absolute tolerance of the hazard-rate integrals.
pub const QUAD_TOL: f64 = 1e-10;
/// Relative parameter tolerance of the optimizers (they work on log scale).
pub const PARAM_TOL: f64 = 1e-6;
pub const MAX_ITER: usize = 500;

/// Bracket of log σ relative to log w searched by the optimizers.
const LOG_SIGMA_SPAN: (f64, f64) = (-4.0 * std::f64::consts::LN_10, 3.0 * std::f64::consts::LN_10);
/// Bracket of log(b - 1) for the hazard-rate shape.
const LOG_SHAPE_SPAN: (f64, f64) = (-10.0, 6.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KeyFamily {
    HalfNormal,
    HazardRate,
}

impl KeyFamily {
    pub const ALL: [KeyFamily; 2] = [KeyFamily::HalfNormal, KeyFamily::HazardRate];

    pub fn n_params(self) -> usize {
        match self {
            KeyFamily::HalfNormal => 1,
            KeyFamily::HazardRate => 2,
        }
    }

    /// Short label used in reports ("Hn1" / "Hr1" in Distance-style tables).
    pub fn label(self) -> &'static str {
        match self {
            KeyFamily::HalfNormal => "Hn1",
            KeyFamily::HazardRate => "Hr1",
        }
    }
}

impl fmt::Display for KeyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for KeyFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hn" | "hn1" | "halfnormal" | "half-normal" | "half_normal" => Ok(KeyFamily::HalfNormal),
            "hr" | "hr1" | "hazardrate" | "hazard-rate" | "hazard_rate" => Ok(KeyFamily::HazardRate),
            other => Err(Error::Config(format!("unknown key function {other:?}"))),
        }
    }
}

/// A parameterized key function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KeyFunction {
    HalfNormal { sigma: f64 },
    HazardRate { sigma: f64, shape_b: f64 },
}

impl KeyFunction {
    pub fn half_normal(sigma: f64) -> Result<Self> {
        let k = KeyFunction::HalfNormal { sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn hazard_rate(sigma: f64, shape_b: f64) -> Result<Self> {
        let k = KeyFunction::HazardRate { sigma, shape_b };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let sigma = self.sigma();
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be > 0, got {sigma}")));
        }
        if let KeyFunction::HazardRate { shape_b, .. } = *self {
            if !(shape_b.is_finite() && shape_b > 1.0) {
                return Err(Error::Config(format!("hazard-rate shape must be > 1, got {shape_b}")));
            }
        }
        Ok(())
    }

    pub fn family(&self) -> KeyFamily {
        match self {
            KeyFunction::HalfNormal { .. } => KeyFamily::HalfNormal,
            KeyFunction::HazardRate { .. } => KeyFamily::HazardRate,
        }
    }

    pub fn sigma(&self) -> f64 {
        match *self {
            KeyFunction::HalfNormal { sigma } | KeyFunction::HazardRate { sigma, .. } => sigma,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            KeyFunction::HalfNormal { sigma } => vec![sigma],
            KeyFunction::HazardRate { sigma, shape_b } => vec![sigma, shape_b],
        }
    }

    /// Detection probability at distance `r ≥ 0`. `g(0) = 1` for both families.
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            KeyFunction::HalfNormal { sigma } => (-r * r / (2.0 * sigma * sigma)).exp(),
            KeyFunction::HazardRate { sigma, shape_b } => {
                if r <= 0.0 {
                    return 1.0;
                }
                -(-(r / sigma).powf(-shape_b)).exp_m1()
            }
        }
    }

    /// `ln g(r)`, accurate where `g` underflows.
    pub fn ln_eval(&self, r: f64) -> f64 {
        match *self {
            KeyFunction::HalfNormal { sigma } => -r * r / (2.0 * sigma * sigma),
            KeyFunction::HazardRate { sigma, shape_b } => {
                if r <= 0.0 {
                    return 0.0;
                }
                let ln_x = -shape_b * (r / sigma).ln();
                if ln_x < -18.0 {
                    // ln(1 - e^-x) = ln x - x/2 + O(x²)
                    ln_x - 0.5 * ln_x.exp()
                } else {
                    (-(-ln_x.exp()).exp_m1()).ln()
                }
            }
        }
    }

    /// `∫₀ʳ s g(s) ds`.
    pub fn radial_integral(&self, r: f64) -> Result<f64> {
        match *self {
            KeyFunction::HalfNormal { sigma } => {
                let s2 = sigma * sigma;
                Ok(-s2 * (-r * r / (2.0 * s2)).exp_m1())
            }
            KeyFunction::HazardRate { .. } => quad::integrate(|s| s * self.eval(s), 0.0, r, QUAD_TOL),
        }
    }

    /// `∫₀ʳ s g(s) ds` by quadrature for either family.
    pub fn radial_integral_quadrature(&self, r: f64) -> Result<f64> {
        quad::integrate(|s| s * self.eval(s), 0.0, r, QUAD_TOL)
    }
}

/// Average detection probability inside a sector of radius `w`.
pub fn detection_probability(key: &KeyFunction, w: f64) -> Result<f64> {
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::Config(format!("truncation radius must be > 0, got {w}")));
    }
    let p = match *key {
        KeyFunction::HalfNormal { sigma } => {
            let x = w * w / (2.0 * sigma * sigma);
            -(-x).exp_m1() / x
        }
        KeyFunction::HazardRate { .. } => 2.0 * key.radial_integral(w)? / (w * w),
    };
    Ok(p.min(1.0))
}

/// Fitting mode, fixed by whether distance bins are supplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMode {
    Exact,
    Binned,
}

/// Distances prepared for likelihood evaluation.
#[derive(Debug, Clone)]
pub enum DistanceData {
    Exact {
        w: f64,
        /// `(r, weight)` pairs.
        points: Vec<(f64, f64)>,
        total: f64,
        sum_sq: f64,
    },
    Binned {
        edges: Vec<f64>,
        counts: Vec<f64>,
        total: f64,
    },
}

impl DistanceData {
    /// Exact distances with positive count weights, all within `w`.
    pub fn exact(distances: &[(f64, f64)], w: f64) -> Result<Self> {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Config(format!("truncation radius must be > 0, got {w}")));
        }
        check_weights(distances, w)?;
        let mut distinct: Vec<f64> = distances.iter().map(|d| d.0).collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < 2 {
            return Err(Error::TooFewObservations(format!(
                "need at least 2 distinct distances, got {}",
                distinct.len()
            )));
        }
        let total = distances.iter().map(|d| d.1).sum();
        let sum_sq = distances.iter().map(|d| d.1 * d.0 * d.0).sum();
        Ok(DistanceData::Exact {
            w,
            points: distances.to_vec(),
            total,
            sum_sq,
        })
    }

    /// Bin counts over `edges` (first edge 0, last edge `w`).
    pub fn binned(counts: &[f64], edges: &[f64]) -> Result<Self> {
        if edges.len() != counts.len() + 1 {
            return Err(Error::Config(format!(
                "{} bin counts need {} edges, got {}",
                counts.len(),
                counts.len() + 1,
                edges.len()
            )));
        }
        if edges[0] != 0.0 || edges.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::Config("bin edges must start at 0 and increase strictly".into()));
        }
        if counts.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::Config("bin counts must be finite and >= 0".into()));
        }
        let non_empty = counts.iter().filter(|&&c| c > 0.0).count();
        if non_empty < 2 {
            return Err(Error::TooFewObservations(format!(
                "need at least 2 non-empty distance bins, got {non_empty}"
            )));
        }
        Ok(DistanceData::Binned {
            edges: edges.to_vec(),
            counts: counts.to_vec(),
            total: counts.iter().sum(),
        })
    }

    /// Exact mode without bins, binned mode with them. Distances must be `≤ w`.
    pub fn from_distances(distances: &[(f64, f64)], w: f64, bins: Option<&[f64]>) -> Result<Self> {
        match bins {
            None => Self::exact(distances, w),
            Some(edges) => {
                check_weights(distances, w)?;
                if *edges.last().unwrap_or(&f64::NAN) != w {
                    return Err(Error::Config(format!("last bin edge must equal w = {w}")));
                }
                Self::binned(&bin_counts(distances, edges), edges)
            }
        }
    }

    pub fn mode(&self) -> FitMode {
        match self {
            DistanceData::Exact { .. } => FitMode::Exact,
            DistanceData::Binned { .. } => FitMode::Binned,
        }
    }

    pub fn truncation(&self) -> f64 {
        match self {
            DistanceData::Exact { w, .. } => *w,
            DistanceData::Binned { edges, .. } => *edges.last().unwrap(),
        }
    }

    pub fn total(&self) -> f64 {
        match self {
            DistanceData::Exact { total, .. } | DistanceData::Binned { total, .. } => *total,
        }
    }

    /// Log-likelihood of `key` up to terms that do not depend on the
    /// parameters: the `Σ c ln r` term (exact mode) and the multinomial
    /// coefficient (binned mode) are omitted.
    pub fn log_likelihood(&self, key: &KeyFunction) -> Result<f64> {
        match self {
            DistanceData::Exact {
                w,
                points,
                total,
                sum_sq,
            } => {
                let norm = key.radial_integral(*w)?.ln();
                let ln_g_sum = match *key {
                    KeyFunction::HalfNormal { sigma } => -sum_sq / (2.0 * sigma * sigma),
                    KeyFunction::HazardRate { .. } => points.iter().map(|&(r, c)| c * key.ln_eval(r)).sum(),
                };
                Ok(ln_g_sum - total * norm)
            }
            DistanceData::Binned { edges, counts, total } => {
                let cum = edges
                    .iter()
                    .map(|&e| key.radial_integral(e))
                    .collect::<Result<Vec<f64>>>()?;
                let norm = cum[cum.len() - 1];
                let mut ll = 0.0;
                for (j, &n) in counts.iter().enumerate() {
                    if n > 0.0 {
                        ll += n * (cum[j + 1] - cum[j]).ln();
                    }
                }
                Ok(ll - total * norm.ln())
            }
        }
    }
}

fn check_weights(distances: &[(f64, f64)], w: f64) -> Result<()> {
    for &(r, c) in distances {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Config(format!("distance must be finite and >= 0, got {r}")));
        }
        if r > w {
            return Err(Error::Config(format!("distance {r} exceeds truncation radius {w}; truncate first")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Config(format!("count weight must be > 0, got {c}")));
        }
    }
    Ok(())
}

/// Sum count weights into `[e_j, e_{j+1})` bins; the last bin is closed.
pub fn bin_counts(distances: &[(f64, f64)], edges: &[f64]) -> Vec<f64> {
    let nb = edges.len() - 1;
    let mut counts = vec![0.0; nb];
    for &(r, c) in distances {
        let j = edges.partition_point(|&e| e <= r).saturating_sub(1).min(nb - 1);
        counts[j] += c;
    }
    counts
}

/// Result of a maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionFit {
    pub key: KeyFunction,
    /// Log-likelihood without parameter-free terms (see [`DistanceData::log_likelihood`]).
    pub log_likelihood: f64,
    pub aic: f64,
    pub n_used: f64,
    pub detection_prob: f64,
    pub mode: FitMode,
    pub converged: bool,
    pub iterations: usize,
    /// The optimum sits on the search bracket (e.g. near-uniform distances drive σ to its cap).
    pub at_bound: bool,
}

impl DetectionFit {
    pub fn family(&self) -> KeyFamily {
        self.key.family()
    }

    pub fn n_params(&self) -> usize {
        self.family().n_params()
    }
}

/// Fit `family` to `(distance, count)` pairs truncated at `w`, binned when `bins` is given.
pub fn fit_mle(distances: &[(f64, f64)], family: KeyFamily, w: f64, bins: Option<&[f64]>) -> Result<DetectionFit> {
    fit(&DistanceData::from_distances(distances, w, bins)?, family)
}

/// Maximum-likelihood fit of `family` to prepared data.
pub fn fit(data: &DistanceData, family: KeyFamily) -> Result<DetectionFit> {
    let w = data.truncation();
    let ln_w = w.ln();
    let sigma_lo = ln_w + LOG_SIGMA_SPAN.0;
    let sigma_hi = ln_w + LOG_SIGMA_SPAN.1;

    let (key, iterations, converged, at_bound) = match family {
        KeyFamily::HalfNormal => {
            let nll = |log_sigma: f64| {
                let key = KeyFunction::HalfNormal { sigma: log_sigma.exp() };
                data.log_likelihood(&key).map(|ll| -ll).unwrap_or(f64::INFINITY)
            };
            let m = golden_section(nll, sigma_lo, sigma_hi, PARAM_TOL, MAX_ITER);
            let at_bound = m.x[0] - sigma_lo < 10.0 * PARAM_TOL || sigma_hi - m.x[0] < 10.0 * PARAM_TOL;
            (
                KeyFunction::HalfNormal { sigma: m.x[0].exp() },
                m.iterations,
                m.converged,
                at_bound,
            )
        }
        KeyFamily::HazardRate => {
            let nll = |p: &[f64]| {
                if p[0] < sigma_lo || p[0] > sigma_hi || p[1] < LOG_SHAPE_SPAN.0 || p[1] > LOG_SHAPE_SPAN.1 {
                    return f64::INFINITY;
                }
                let key = KeyFunction::HazardRate {
                    sigma: p[0].exp(),
                    shape_b: 1.0 + p[1].exp(),
                };
                match data.log_likelihood(&key) {
                    Ok(ll) if ll.is_finite() => -ll,
                    _ => f64::INFINITY,
                }
            };
            // Start from the half-normal scale with a moderate shoulder.
            let start_sigma = fit(data, KeyFamily::HalfNormal)
                .map(|f| f.key.sigma().ln().clamp(sigma_lo + 1.0, sigma_hi - 1.0))
                .unwrap_or(ln_w - 1.0);
            let start = [start_sigma, 2f64.ln()];
            let first = nelder_mead(nll, &start, 0.5, PARAM_TOL, MAX_ITER);
            // One restart from the reported optimum guards against a collapsed simplex.
            let second = nelder_mead(nll, &first.x, 0.1, PARAM_TOL, MAX_ITER.saturating_sub(first.iterations));
            let best = if second.value <= first.value { &second } else { &first };
            let converged = second.converged;
            let at_bound = best.x[0] - sigma_lo < 1e-3
                || sigma_hi - best.x[0] < 1e-3
                || best.x[1] - LOG_SHAPE_SPAN.0 < 1e-3
                || LOG_SHAPE_SPAN.1 - best.x[1] < 1e-3;
            (
                KeyFunction::HazardRate {
                    sigma: best.x[0].exp(),
                    shape_b: 1.0 + best.x[1].exp(),
                },
                first.iterations + second.iterations,
                converged,
                at_bound,
            )
        }
    };

    let log_likelihood = data.log_likelihood(&key)?;
    if !converged || !log_likelihood.is_finite() {
        return Err(Error::NonConvergence {
            iterations,
            best_log_likelihood: log_likelihood,
            parameters: key.params(),
        });
    }
    let k = family.n_params() as f64;
    Ok(DetectionFit {
        key,
        log_likelihood,
        aic: 2.0 * k - 2.0 * log_likelihood,
        n_used: data.total(),
        detection_prob: detection_probability(&key, w)?,
        mode: data.mode(),
        converged,
        iterations,
        at_bound,
    })
}

/// Minimum-AIC fit; ties go to fewer parameters, then to list order.
pub fn select_by_aic(fits: &[DetectionFit]) -> Result<&DetectionFit> {
    fits.iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            a.aic
                .total_cmp(&b.aic)
                .then(a.n_params().cmp(&b.n_params()))
                .then(i.cmp(j))
        })
        .map(|(_, f)| f)
        .ok_or_else(|| Error::Empty("no detection-function fits to select from".into()))
}
