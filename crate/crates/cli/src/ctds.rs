use std::path::PathBuf;

use anyhow::Context;
use appeval::ctds::{self, BootstrapOptions, EstimateResult, MIN_REPLICATES};
use appeval::detfn::KeyFamily;
use appeval::exec::Exec;
use appeval::survey::{FilterScenario, Survey, SurveyConfig, SurveyConfigFile, SurveyFiles};
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::report::{self, num, text, InputDigest, Report, Table};
use crate::{usage, CmdResult};

#[derive(Args, Debug)]
pub struct CtdsArgs {
    /// Directory holding observations.csv, clips.csv and locations.csv.
    #[arg(long)]
    data: PathBuf,
    /// Survey configuration (JSON). Defaults to survey.json in the data directory.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for ctds_report.json and ctds_report.txt.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bootstrap seed (default 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Bootstrap replicates; 0 skips the bootstrap.
    #[arg(long)]
    replicates: Option<usize>,
    /// Comma-separated subset of none,manual,auto.
    #[arg(long, value_delimiter = ',')]
    scenarios: Option<Vec<FilterScenario>>,
    /// Comma-separated subset of hr,hn.
    #[arg(long, value_delimiter = ',')]
    keyfns: Option<Vec<KeyFamily>>,
}

/// Survey configuration plus optional run settings; flags take precedence.
#[derive(Debug, Deserialize)]
struct CtdsConfig {
    #[serde(flatten)]
    survey: SurveyConfigFile,
    seed: Option<u64>,
    replicates: Option<usize>,
    scenarios: Option<Vec<FilterScenario>>,
    key_functions: Option<Vec<String>>,
}

#[derive(Debug, Serialize)]
struct Parameters {
    survey: SurveyConfigFile,
    seed: u64,
    replicates: usize,
    scenarios: Vec<FilterScenario>,
    key_functions: Vec<KeyFamily>,
    survey_label: String,
}

#[derive(Debug, Serialize)]
struct Comparison {
    key_family: KeyFamily,
    baseline: FilterScenario,
    alternative: FilterScenario,
    pct_diff_abundance: f64,
    pct_diff_density: f64,
}

#[derive(Debug, Serialize)]
struct Results {
    estimates: Vec<EstimateResult>,
    comparisons: Vec<Comparison>,
}

const DEFAULT_REPLICATES: usize = 999;
const DEFAULT_KEYS: [KeyFamily; 2] = [KeyFamily::HazardRate, KeyFamily::HalfNormal];

fn dedup_in_order<T: PartialEq + Copy>(v: &[T]) -> Vec<T> {
    let mut out = Vec::new();
    for x in v {
        if !out.contains(x) {
            out.push(*x);
        }
    }
    out
}

pub fn run(args: CtdsArgs) -> CmdResult {
    let config_path = args.config.clone().unwrap_or_else(|| args.data.join("survey.json"));
    if !config_path.exists() {
        return Err(usage(format!(
            "survey configuration {} not found; pass --config",
            config_path.display()
        )));
    }
    let raw = std::fs::read_to_string(&config_path).with_context(|| format!("reading {}", config_path.display()))?;
    let cfg: CtdsConfig =
        serde_json::from_str(&raw).with_context(|| format!("{}: invalid survey configuration", config_path.display()))?;
    let survey_cfg = SurveyConfig::from_file_form(cfg.survey.clone())
        .with_context(|| format!("{}: invalid survey configuration", config_path.display()))?;

    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let replicates = args.replicates.or(cfg.replicates).unwrap_or(DEFAULT_REPLICATES);
    if replicates != 0 && replicates < MIN_REPLICATES {
        return Err(usage(format!("--replicates must be 0 or at least {MIN_REPLICATES}")));
    }
    let mut scenarios = args.scenarios.or(cfg.scenarios).unwrap_or(FilterScenario::ALL.to_vec());
    scenarios = dedup_in_order(&scenarios);
    scenarios.sort();
    let keys = match (args.keyfns, cfg.key_functions) {
        (Some(k), _) => k,
        (None, Some(names)) => names
            .iter()
            .map(|n| n.parse::<KeyFamily>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("{}: key_functions", config_path.display()))?,
        (None, None) => DEFAULT_KEYS.to_vec(),
    };
    let keys = dedup_in_order(&keys);
    if scenarios.is_empty() || keys.is_empty() {
        return Err(usage("at least one scenario and one key function are required"));
    }

    let files = SurveyFiles::in_dir(&args.data);
    let inputs = vec![
        InputDigest::of_file("observations", &files.observations)?,
        InputDigest::of_file("clips", &files.clips)?,
        InputDigest::of_file("locations", &files.locations)?,
        InputDigest::of_file("config", &config_path)?,
    ];
    let survey_label = {
        let mut h = Sha256::new();
        for d in &inputs[..3] {
            h.update(d.sha256.as_bytes());
        }
        hex::encode(&h.finalize()[..8])
    };
    let survey = Survey::load(&files, survey_cfg)?;

    let mut warnings = Vec::new();
    let mut estimates = Vec::new();
    for &family in &keys {
        for &scenario in &scenarios {
            let s = survey.apply_filter(scenario).truncate();
            let context = || format!("{family} / {scenario}");
            let mut e = if replicates > 0 {
                let opts = BootstrapOptions { replicates, seed, exec: Exec::Parallel };
                ctds::estimate_with_bootstrap(&s, family, scenario, opts).with_context(context)?
            } else {
                let fit = ctds::fit_survey(&s, family).with_context(context)?;
                ctds::estimate(&s, &fit, scenario).with_context(context)?
            };
            e.survey_label = survey_label.clone();
            if let Some(fit) = &e.fit {
                if !fit.converged {
                    warnings.push(format!("{family} / {scenario}: detection fit did not converge"));
                }
                if fit.at_bound {
                    warnings.push(format!("{family} / {scenario}: detection fit is on its parameter bound"));
                }
            }
            if let Some(u) = &e.uncertainty {
                if u.replicates_failed > 0 {
                    warnings.push(format!(
                        "{family} / {scenario}: {} of {} bootstrap replicates failed and were dropped",
                        u.replicates_failed, u.replicates_requested
                    ));
                }
            }
            estimates.push(e);
        }
    }

    let mut comparisons = Vec::new();
    for &family in &keys {
        let find = |sc| estimates.iter().find(|e| e.key_family == family && e.scenario == sc);
        let Some(base) = find(FilterScenario::Manual) else { continue };
        for alt in [FilterScenario::None, FilterScenario::Auto] {
            if let Some(a) = find(alt) {
                let c = ctds::compare_scenarios(base, a)?;
                comparisons.push(Comparison {
                    key_family: family,
                    baseline: FilterScenario::Manual,
                    alternative: alt,
                    pct_diff_abundance: c.pct_diff_abundance,
                    pct_diff_density: c.pct_diff_density,
                });
            }
        }
    }

    let params = Parameters {
        survey: survey.config().to_file_form(),
        seed,
        replicates,
        scenarios,
        key_functions: keys,
        survey_label,
    };
    let mut rep = Report::new("ctds", inputs, params, Results { estimates, comparisons });
    rep.tables = tables(&rep.results);
    rep.notes.push("densities and abundances are unadjusted: no availability correction is applied".into());
    rep.warnings = warnings;
    let txt = report::emit(&rep, "ctds", args.out.as_deref())?;
    print!("{txt}");
    Ok(())
}

fn tables(r: &Results) -> Vec<Table> {
    let mut est = Table::new(
        "Density and abundance",
        &[
            ("key", None),
            ("removal", None),
            ("N", Some(0)),
            ("SE N", Some(0)),
            ("N 2.5%", Some(0)),
            ("N 97.5%", Some(0)),
            ("D (ind./km2)", Some(2)),
            ("SE D", Some(2)),
            ("D 2.5%", Some(2)),
            ("D 97.5%", Some(2)),
            ("n", Some(0)),
            ("P", Some(3)),
        ],
    );
    for e in &r.estimates {
        let u = e.uncertainty.as_ref();
        let opt = |f: &dyn Fn(&ctds::Uncertainty) -> f64, d| u.map(|u| num(f(u), d)).unwrap_or(serde_json::Value::Null);
        est.rows.push(vec![
            text(e.key_family.label()),
            text(e.scenario.to_string()),
            num(e.abundance, 0),
            opt(&|u| u.se_abundance, 0),
            opt(&|u| u.ci95_abundance.0, 0),
            opt(&|u| u.ci95_abundance.1, 0),
            num(e.density, 2),
            opt(&|u| u.se_density, 2),
            opt(&|u| u.ci95_density.0, 2),
            opt(&|u| u.ci95_density.1, 2),
            num(e.n_obs_used as f64, 0),
            num(e.detection_prob, 3),
        ]);
    }
    let mut tables = vec![est];
    if !r.comparisons.is_empty() {
        let mut cmp = Table::new(
            "Change relative to manual removal",
            &[
                ("key", None),
                ("baseline", None),
                ("alternative", None),
                ("abundance %", Some(2)),
                ("density %", Some(2)),
            ],
        );
        for c in &r.comparisons {
            cmp.rows.push(vec![
                text(c.key_family.label()),
                text(c.baseline.to_string()),
                text(c.alternative.to_string()),
                num(c.pct_diff_abundance, 2),
                num(c.pct_diff_density, 2),
            ]);
        }
        tables.push(cmp);
    }
    tables
}

