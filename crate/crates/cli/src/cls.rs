use std::path::PathBuf;

use anyhow::Context;
use appeval::clsmetrics::{self, ApResult};
use clap::Args;
use serde::Serialize;

use crate::report::{self, num, text, InputDigest, Report, Table};
use crate::CmdResult;

#[derive(Args, Debug)]
pub struct ClsArgs {
    /// CSV with columns item_id,true_label,score_<label>...
    #[arg(long)]
    predictions: PathBuf,
    /// Directory for clsmetrics_report.json and clsmetrics_report.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Parameters {
    labels: Vec<String>,
    n_items: usize,
}

pub fn run(args: ClsArgs) -> CmdResult {
    let path = &args.predictions;
    let inputs = vec![InputDigest::of_file("predictions", path)?];
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let (preds, labels) = clsmetrics::read_predictions(f, &path.display().to_string())?;
    let ap: ApResult = clsmetrics::macro_map(&preds, &labels).with_context(|| path.display().to_string())?;

    let mut table = Table::new("Average precision", &[("class", None), ("AP %", Some(2))]);
    for label in &labels {
        table.rows.push(vec![text(label.as_str()), num(100.0 * ap.per_class_ap[label], 2)]);
    }
    table.rows.push(vec![text("macro mAP"), num(100.0 * ap.macro_map, 2)]);

    let mut rep = Report::new("clsmetrics", inputs, Parameters { labels, n_items: preds.len() }, ap);
    rep.tables.push(table);
    let txt = report::emit(&rep, "clsmetrics", args.out.as_deref())?;
    print!("{txt}");
    Ok(())
}
