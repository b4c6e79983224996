//! Per-image hardness estimation.

mod baselines;
mod sampling;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use baselines::{dempster_shafer, detection_dempster_shafer, detection_entropy, entropy};
pub use sampling::{
    derive_seed, exact_expected_hardness, exact_expected_hardness_many, ground_truth_hardness,
    ground_truth_hardness_many, image_rng, sample_pseudo_gt, score_sampling, score_sampling_many,
    Estimate, DEFAULT_ENUMERATION_LIMIT,
};

use crate::error::{Error, Result};
use crate::matching::MatchConfig;
use crate::model::{filter_positive, Dataset, ImageId};
use crate::query::BoundQuery;

pub const DEFAULT_NUM_SAMPLES: usize = 10;
pub const DEFAULT_ETA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub num_samples: usize,
    /// Positive detections score strictly above this.
    pub eta: f64,
    pub seed: u64,
    pub matching: MatchConfig,
    pub clip_boxes: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            num_samples: DEFAULT_NUM_SAMPLES,
            eta: DEFAULT_ETA,
            seed: 0,
            matching: MatchConfig::default(),
            clip_boxes: false,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(Error::Config("number of samples must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::Config(format!("eta {} outside [0, 1]", self.eta)));
        }
        let tau = self.matching.tau;
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::Config(format!("IoU threshold {tau} outside (0, 1]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Score sampling.
    Ss,
    Entropy,
    /// Dempster-Shafer evidential uncertainty.
    Ds,
    /// Ground-truth hardness; requires annotations.
    Gt,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ss => "ss",
            Self::Entropy => "entropy",
            Self::Ds => "ds",
            Self::Gt => "gt",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ss" => Ok(Self::Ss),
            "entropy" => Ok(Self::Entropy),
            "ds" => Ok(Self::Ds),
            "gt" => Ok(Self::Gt),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessRow {
    pub image_id: ImageId,
    pub estimate: f64,
    /// Monte Carlo standard error; only set for score sampling.
    pub std_error: Option<f64>,
    pub gt_hardness: Option<f64>,
}

/// Per-image estimates of one method for one query, sorted by image id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessReport {
    pub method: Method,
    pub query_text: String,
    pub config: SamplerConfig,
    pub rows: Vec<HardnessRow>,
}

impl HardnessReport {
    pub fn estimates(&self) -> Vec<(ImageId, f64)> {
        self.rows.iter().map(|r| (r.image_id, r.estimate)).collect()
    }

    /// Ground-truth values, if every row has one.
    pub fn truths(&self) -> Option<Vec<(ImageId, f64)>> {
        self.rows
            .iter()
            .map(|r| r.gt_hardness.map(|g| (r.image_id, g)))
            .collect()
    }
}

/// Estimates every image for each query. Baseline methods ignore the query
/// but still produce one report per query. Ground-truth hardness is attached
/// whenever the dataset carries annotations.
///
/// Images are processed in parallel on the current rayon pool; output is
/// independent of the number of workers.
pub fn estimate_dataset(
    dataset: &Dataset,
    queries: &[(String, BoundQuery)],
    method: Method,
    config: &SamplerConfig,
) -> Result<Vec<HardnessReport>> {
    config.validate()?;
    let with_gt = dataset.has_ground_truth();
    if method == Method::Gt && !with_gt {
        return Err(Error::Config("method `gt` requires annotations".into()));
    }
    let exprs: Vec<BoundQuery> = queries.iter().map(|(_, q)| q.clone()).collect();

    let per_image: Vec<Vec<HardnessRow>> = dataset
        .images
        .par_iter()
        .map(|image| -> Result<Vec<HardnessRow>> {
            let gt = if with_gt {
                Some(ground_truth_hardness_many(image, &exprs, config)?)
            } else {
                None
            };
            let gt_at = |i: usize| gt.as_ref().map(|g| g[i]);
            let positives = || filter_positive(&image.detections, config.eta);
            let rows = match method {
                Method::Ss => {
                    let mut rng = image_rng(config.seed, image.image_id);
                    score_sampling_many(image, &exprs, config, &mut rng)
                        .into_iter()
                        .enumerate()
                        .map(|(i, e)| HardnessRow {
                            image_id: image.image_id,
                            estimate: e.mean,
                            std_error: Some(e.std_error),
                            gt_hardness: gt_at(i),
                        })
                        .collect()
                }
                Method::Entropy | Method::Ds => {
                    let pos = positives();
                    let value = if method == Method::Entropy {
                        entropy(&pos, dataset.score_mode)
                    } else {
                        dempster_shafer(&pos, dataset.score_mode)
                    }
                    .map_err(|e| Error::Config(format!("image {}: {e}", image.image_id)))?;
                    (0..exprs.len())
                        .map(|i| HardnessRow {
                            image_id: image.image_id,
                            estimate: value,
                            std_error: None,
                            gt_hardness: gt_at(i),
                        })
                        .collect()
                }
                Method::Gt => (0..exprs.len())
                    .map(|i| HardnessRow {
                        image_id: image.image_id,
                        estimate: gt_at(i).unwrap_or_default(),
                        std_error: None,
                        gt_hardness: gt_at(i),
                    })
                    .collect(),
            };
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    Ok(queries
        .iter()
        .enumerate()
        .map(|(qi, (text, _))| HardnessReport {
            method,
            query_text: text.clone(),
            config: *config,
            rows: per_image.iter().map(|rows| rows[qi].clone()).collect(),
        })
        .collect())
}
