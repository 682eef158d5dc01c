//! Application-specific evaluation of vision-model outputs.
//!
//! Two pipelines share this crate:
//!
//! * camera-trap distance sampling (CTDS): survey ingestion and clip
//!   filtering ([`survey`]), detection functions ([`detfn`]), and
//!   density/abundance estimation with bootstrap uncertainty ([`ctds`]);
//! * multi-view pose evaluation: DLT triangulation and keypoint metrics
//!   ([`mvgeo`]) and head-rotation error as a gaze proxy ([`gaze`]).
//!
//! [`clsmetrics`] covers the classifier side (AP and macro mAP) and
//! [`synth`] generates synthetic ground truth for both pipelines.
//!
//! Data-parallel loops go through [`exec::Exec`]. With the `parallel`
//! feature (on by default) they run on rayon; without it, or with
//! [`exec::Exec::Sequential`], they run on the calling thread. Results are
//! identical either way.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clsmetrics;
pub mod ctds;
pub mod detfn;
mod error;
pub mod exec;
pub mod gaze;
pub mod mvgeo;
pub mod stats;
pub mod survey;
pub mod synth;

pub use error::{Error, Result};
