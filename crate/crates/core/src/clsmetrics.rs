//! Average precision and macro mAP for scored classifier outputs.
//!
//! AP is the all-points area under the precision–recall curve. Items that
//! share a score form one threshold: precision is taken after the whole
//! group is admitted, so the result does not depend on the order of tied
//! items. No 11-point interpolation and no precision envelope are applied.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPrediction {
    pub item_id: String,
    pub class_scores: BTreeMap<String, f64>,
    pub true_label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApResult {
    pub per_class_ap: BTreeMap<String, f64>,
    pub macro_map: f64,
}

/// AP of `(score, is_positive)` pairs.
pub fn average_precision(scores: &[(f64, bool)]) -> Result<f64> {
    if scores.iter().any(|s| !s.0.is_finite()) {
        return Err(Error::Config("scores must be finite".into()));
    }
    let n_pos = scores.iter().filter(|s| s.1).count();
    if n_pos == 0 {
        return Err(Error::NoPositives("no positive items".into()));
    }
    let mut ranked = scores.to_vec();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut tp = 0usize;
    let mut seen = 0usize;
    let mut sum = 0.0;
    let mut i = 0;
    while i < ranked.len() {
        let score = ranked[i].0;
        let mut group_pos = 0usize;
        while i < ranked.len() && ranked[i].0 == score {
            group_pos += ranked[i].1 as usize;
            seen += 1;
            i += 1;
        }
        tp += group_pos;
        let precision = tp as f64 / seen as f64;
        // One term per positive so the sum is order-identical to a per-item definition.
        for _ in 0..group_pos {
            sum += precision;
        }
    }
    Ok(sum / n_pos as f64)
}

/// One-vs-rest AP per label and their unweighted mean.
pub fn macro_map(predictions: &[ScoredPrediction], labels: &[String]) -> Result<ApResult> {
    if labels.is_empty() {
        return Err(Error::Empty("label set is empty".into()));
    }
    let mut per_class_ap = BTreeMap::new();
    for label in labels {
        let mut scores = Vec::with_capacity(predictions.len());
        for p in predictions {
            let s = *p.class_scores.get(label).ok_or_else(|| {
                Error::Config(format!("item {:?} has no score for class {label:?}", p.item_id))
            })?;
            scores.push((s, &p.true_label == label));
        }
        let ap = average_precision(&scores).map_err(|e| match e {
            Error::NoPositives(_) => Error::NoPositives(format!("class {label:?} has no positive items")),
            other => other,
        })?;
        per_class_ap.insert(label.clone(), ap);
    }
    let macro_map = per_class_ap.values().sum::<f64>() / per_class_ap.len() as f64;
    Ok(ApResult { per_class_ap, macro_map })
}

/// Parse `item_id,true_label,score_<label>,...`. Returns predictions and
/// labels in header order.
pub fn read_predictions(source: impl Read, source_name: &str) -> Result<(Vec<ScoredPrediction>, Vec<String>)> {
    let err = |row: u64, message: String| Error::Schema {
        source_name: source_name.to_string(),
        row,
        message,
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let pos = |name: &str| headers.iter().position(|h| h == name);
    let id_col = pos("item_id").ok_or_else(|| err(1, "missing column \"item_id\"".into()))?;
    let label_col = pos("true_label").ok_or_else(|| err(1, "missing column \"true_label\"".into()))?;
    let mut score_cols = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        if i == id_col || i == label_col {
            continue;
        }
        match h.strip_prefix("score_") {
            Some(label) if !label.is_empty() => score_cols.push((i, label.to_string())),
            _ => return Err(err(1, format!("unexpected column {h:?}; score columns are named score_<label>"))),
        }
    }
    if score_cols.is_empty() {
        return Err(err(1, "no score_<label> columns".into()));
    }
    let labels: Vec<String> = score_cols.iter().map(|c| c.1.clone()).collect();

    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| err(e.position().map(|p| p.line()).unwrap_or(0), e.to_string()))?;
        let row = rec.position().map(|p| p.line()).unwrap_or(0);
        let true_label = rec.get(label_col).unwrap_or("").to_string();
        if !labels.contains(&true_label) {
            return Err(err(row, format!("true_label {true_label:?} is not one of {labels:?}")));
        }
        let mut class_scores = BTreeMap::new();
        for (c, label) in &score_cols {
            let raw = rec.get(*c).unwrap_or("");
            let s: f64 = raw
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| err(row, format!("score_{label}: not a finite number: {raw:?}")))?;
            class_scores.insert(label.clone(), s);
        }
        out.push(ScoredPrediction {
            item_id: rec.get(id_col).unwrap_or("").to_string(),
            class_scores,
            true_label,
        });
    }
    Ok((out, labels))
}
