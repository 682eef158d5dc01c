use anyhow::Context;
use appeval::synth::{self, CtdsScenarioTruth, RigTruth};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::report::write_file;
use crate::{CmdResult, SynthArgs};

fn read_truth<T: DeserializeOwned>(args: &SynthArgs) -> anyhow::Result<T> {
    let raw = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    serde_json::from_str(&raw).with_context(|| format!("{}: invalid truth record", args.config.display()))
}

fn json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

pub fn run_ctds(args: SynthArgs) -> CmdResult {
    let mut truth: CtdsScenarioTruth = read_truth(&args)?;
    if let Some(s) = args.seed {
        truth.seed = s;
    }
    let syn = synth::gen_ctds(&truth)?;
    syn.write_dir(&args.out)?;
    write_file(&args.out.join("truth.json"), &json(&truth)?)?;
    let expected = serde_json::json!({
        "true_density_km2": truth.true_density_km2,
        "expected_p": syn.expected_p,
        "expected_individuals_within_w": syn.expected_individuals_within_w,
        "individuals_within_w": syn.individuals_within_w,
    });
    write_file(&args.out.join("expected.json"), &json(&expected)?)?;
    println!(
        "wrote {} observations at {} locations to {} (expected P = {:.6})",
        syn.survey.observations().len(),
        syn.survey.locations().len(),
        args.out.display(),
        syn.expected_p
    );
    Ok(())
}

pub fn run_rig(args: SynthArgs) -> CmdResult {
    let mut truth: RigTruth = read_truth(&args)?;
    if let Some(s) = args.seed {
        truth.seed = s;
    }
    let rig = synth::gen_rig(&truth)?;
    rig.write_dir(&args.out)?;
    write_file(&args.out.join("truth.json"), &json(&truth)?)?;
    println!(
        "wrote {} cameras, {} ground-truth frames to {}",
        rig.calibration.cameras.len(),
        rig.gt3d.len(),
        args.out.display()
    );
    Ok(())
}
