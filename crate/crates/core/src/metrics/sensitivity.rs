use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{derive_seed, estimate_dataset, Method, SamplerConfig};
use crate::model::Dataset;
use crate::query::BoundQuery;

use super::{mauroc, ndcg};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub num_samples: usize,
    pub repeats: usize,
    /// Ranking and classification metrics, averaged over repeats; `None`
    /// without annotations.
    pub ndcg_mean: Option<f64>,
    pub ndcg_std: Option<f64>,
    pub mauroc_mean: Option<f64>,
    /// Per-image standard deviation of the estimate across repeats,
    /// averaged over images.
    pub estimate_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs score sampling at each sample count with `repeats` fresh seeds.
pub fn sensitivity_sweep(
    dataset: &Dataset,
    query: &(String, BoundQuery),
    config: &SamplerConfig,
    sample_counts: &[usize],
    repeats: usize,
    ratios: &[f64],
) -> Result<Vec<SweepRow>> {
    if sample_counts.is_empty() {
        return Err(Error::Config("sample count list is empty".into()));
    }
    if sample_counts.windows(2).any(|w| w[0] >= w[1]) || sample_counts[0] == 0 {
        return Err(Error::Config("sample counts must be positive and ascending".into()));
    }
    if repeats == 0 {
        return Err(Error::Config("at least one repeat is required".into()));
    }

    let mut rows = Vec::with_capacity(sample_counts.len());
    for &n in sample_counts {
        let mut per_image: Vec<Vec<f64>> = vec![Vec::with_capacity(repeats); dataset.images.len()];
        let mut ndcgs = Vec::new();
        let mut maurocs = Vec::new();
        for r in 0..repeats {
            let cfg = SamplerConfig {
                num_samples: n,
                seed: derive_seed(config.seed, &[n as u64, r as u64]),
                ..*config
            };
            let report = estimate_dataset(dataset, std::slice::from_ref(query), Method::Ss, &cfg)?
                .remove(0);
            for (acc, row) in per_image.iter_mut().zip(&report.rows) {
                acc.push(row.estimate);
            }
            if let Some(truths) = report.truths() {
                let est = report.estimates();
                ndcgs.push(ndcg(&est, &truths)?.ndcg);
                if let Some(m) = mauroc(&est, &truths, ratios)?.mauroc {
                    maurocs.push(m);
                }
            }
        }
        let estimate_std = if per_image.is_empty() {
            0.0
        } else {
            per_image.iter().map(|v| mean_std(v).1).sum::<f64>() / per_image.len() as f64
        };
        let (ndcg_mean, ndcg_std) = if ndcgs.is_empty() {
            (None, None)
        } else {
            let (m, s) = mean_std(&ndcgs);
            (Some(m), Some(s))
        };
        rows.push(SweepRow {
            num_samples: n,
            repeats,
            ndcg_mean,
            ndcg_std,
            mauroc_mean: (!maurocs.is_empty()).then(|| mean_std(&maurocs).0),
            estimate_std,
        });
    }
    Ok(rows)
}
