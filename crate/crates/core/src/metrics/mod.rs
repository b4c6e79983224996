//! Evaluation of estimated hardness against ground-truth hardness, plus
//! detector diagnostics.
//!
//! Note the two logarithms in play: DCG discounts use `log2`, while the
//! entropy baseline uses the natural log.

mod classification;
mod correlation;
mod histograms;
mod ranking;
mod sensitivity;

use std::collections::BTreeMap;

pub use classification::{auroc, mauroc, ClassificationResult, MaurocResult, DEFAULT_HARD_RATIOS};
pub use correlation::{correlation_matrix, spearman};
pub use histograms::{
    confidence_histogram, hardness_histogram, variance_histogram, ConfidenceBin, HardnessHistogram,
    HistogramBin, DEFAULT_CONFIDENCE_BINS,
};
pub use ranking::{cumulative_hardness_curve, ndcg, CurvePoint, RankingResult};
pub use sensitivity::{sensitivity_sweep, SweepRow};

use crate::error::{Error, Result};
use crate::model::ImageId;

/// An (estimate, truth) pair for one image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub image_id: ImageId,
    pub estimate: f64,
    pub truth: f64,
}

/// Joins estimates and truths by image id, sorted by id.
pub fn align(estimates: &[(ImageId, f64)], truths: &[(ImageId, f64)]) -> Result<Vec<Scored>> {
    let est: BTreeMap<ImageId, f64> = estimates.iter().copied().collect();
    let tru: BTreeMap<ImageId, f64> = truths.iter().copied().collect();
    let only_estimates: Vec<ImageId> = est.keys().filter(|k| !tru.contains_key(k)).copied().collect();
    let only_truths: Vec<ImageId> = tru.keys().filter(|k| !est.contains_key(k)).copied().collect();
    if !only_estimates.is_empty() || !only_truths.is_empty() {
        return Err(Error::KeyMismatch {
            only_estimates,
            only_truths,
        });
    }
    Ok(est
        .into_iter()
        .map(|(image_id, estimate)| Scored {
            image_id,
            estimate,
            truth: tru[&image_id],
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn align_reports_symmetric_difference() {
        let err = align(&[(1, 0.0), (2, 0.0)], &[(2, 1.0), (3, 1.0)]).unwrap_err();
        match err {
            Error::KeyMismatch {
                only_estimates,
                only_truths,
            } => {
                assert_eq!(only_estimates, vec![1]);
                assert_eq!(only_truths, vec![3]);
            }
            other => panic!("unexpected {other:?}"),
        }
        let ok = align(&[(2, 0.5), (1, 0.1)], &[(1, 1.0), (2, 2.0)]).unwrap();
        assert_eq!(ok[0].image_id, 1);
        assert_eq!(ok[1].truth, 2.0);
    }
}
