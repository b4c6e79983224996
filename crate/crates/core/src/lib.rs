//! Annotation-free, query-based hard image mining for object detectors.
//!
//! Detection scores are treated as Bernoulli parameters: sampling pseudo
//! ground truths from them and matching the positive detections against
//! each sample gives a Monte Carlo estimate of any hardness query built from
//! false-positive and false-negative error sets. When annotations exist,
//! the same queries give ground-truth hardness and the [`metrics`] module
//! scores how well an estimator ranks and classifies hard images.

pub mod coco;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod matching;
pub mod metrics;
pub mod model;
pub mod query;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{iou, BoundingBox};
pub use model::{ClassRemap, Dataset, Detection, GroundTruthBox, ImageId, ImageRecord, ScoreMode};
