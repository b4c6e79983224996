use serde::Serialize;

use crate::matching::{match_detections, MatchConfig};
use crate::model::{filter_positive, Dataset};

pub const DEFAULT_CONFIDENCE_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width bin index over `[lo, hi]`; the top edge belongs to the last bin.
fn bin_index(value: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let t = ((value - lo) / (hi - lo) * bins as f64).floor();
    (t.max(0.0) as usize).min(bins - 1)
}

fn edges(lo: f64, hi: f64, bins: usize) -> impl Iterator<Item = (f64, f64)> {
    let at = move |i: usize| lo + (hi - lo) * i as f64 / bins as f64;
    (0..bins).map(move |i| {
        let bin_lo = at(i);
        let bin_hi = if i + 1 == bins { hi } else { at(i + 1) };
        (bin_lo, bin_hi)
    })
}

fn histogram(values: impl IntoIterator<Item = f64>, lo: f64, hi: f64, bins: usize) -> Vec<HistogramBin> {
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    for v in values {
        counts[bin_index(v, lo, hi, bins)] += 1;
    }
    edges(lo, hi, bins)
        .zip(counts)
        .map(|((lo, hi), count)| HistogramBin { lo, hi, count })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub true_positives: usize,
    /// `None` for empty bins.
    pub precision: Option<f64>,
}

/// Positive detections binned by score, with the precision of each bin
/// against the annotations. Images without annotations are skipped;
/// detections absorbed by crowd regions are not counted.
pub fn confidence_histogram(
    dataset: &Dataset,
    eta: f64,
    matching: &MatchConfig,
    bins: usize,
) -> Vec<ConfidenceBin> {
    let bins = bins.max(1);
    let mut counts = vec![0usize; bins];
    let mut tps = vec![0usize; bins];
    for image in &dataset.images {
        let Some(gts) = &image.ground_truths else {
            continue;
        };
        let positives = filter_positive(&image.detections, eta);
        let m = match_detections(&positives, gts, matching);
        for pair in &m.tp_pairs {
            let b = bin_index(positives[pair.det].score, 0.0, 1.0, bins);
            counts[b] += 1;
            tps[b] += 1;
        }
        for &i in &m.fp_indices {
            counts[bin_index(positives[i].score, 0.0, 1.0, bins)] += 1;
        }
    }
    edges(0.0, 1.0, bins)
        .enumerate()
        .map(|(i, (lo, hi))| ConfidenceBin {
            lo,
            hi,
            count: counts[i],
            true_positives: tps[i],
            precision: (counts[i] > 0).then(|| tps[i] as f64 / counts[i] as f64),
        })
        .collect()
}

/// Bernoulli variance `s (1 - s)` of every pooled detection, over `[0, 0.25]`.
pub fn variance_histogram(dataset: &Dataset, bins: usize) -> Vec<HistogramBin> {
    histogram(
        dataset
            .images
            .iter()
            .flat_map(|img| img.detections.iter().map(|d| d.score * (1.0 - d.score))),
        0.0,
        0.25,
        bins,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardnessHistogram {
    /// Images with hardness exactly zero.
    pub zero_count: usize,
    pub total: usize,
    pub mean: f64,
    pub bins: Vec<HistogramBin>,
}

/// Histogram of per-image hardness. With `integer_aligned`, bins are
/// unit-wide and centred on integers so integer-valued queries such as
/// `total(fp)` land in exact-count bins; otherwise `bins` equal-width bins
/// span `[min(0, min v), max v]`.
pub fn hardness_histogram(values: &[f64], bins: usize, integer_aligned: bool) -> HardnessHistogram {
    let zero_count = values.iter().filter(|&&v| v == 0.0).count();
    let total = values.len();
    let mean = if total == 0 {
        0.0
    } else {
        values.iter().sum::<f64>() / total as f64
    };
    let max = values.iter().copied().fold(0.0, f64::max);
    let min = values.iter().copied().fold(0.0, f64::min);
    let bins = if integer_aligned {
        let lo = min.floor() - 0.5;
        let hi = max.ceil() + 0.5;
        histogram(values.iter().copied(), lo, hi, (hi - lo).round() as usize)
    } else {
        let hi = if max > min { max } else { min + 1.0 };
        histogram(values.iter().copied(), min, hi, bins)
    };
    HardnessHistogram {
        zero_count,
        total,
        mean,
        bins,
    }
}
