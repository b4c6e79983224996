use serde::Serialize;

use crate::error::Result;
use crate::model::ImageId;

use super::align;

/// Hard-image ratios used for mAUROC.
pub const DEFAULT_HARD_RATIOS: [f64; 4] = [0.05, 0.10, 0.25, 0.50];

/// Mann-Whitney AUROC: concordant pairs plus half the tied pairs, over all
/// positive-negative pairs. `None` when either class is empty.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), labels.len(), "scores and labels differ in length");
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let (mut pos, mut neg) = (0u64, 0u64);
    let (mut concordant, mut tied) = (0u64, 0u64);
    let mut start = 0;
    while start < order.len() {
        let s = scores[order[start]];
        let end = start
            + order[start..]
                .iter()
                .take_while(|&&i| scores[i] == s)
                .count();
        let group_pos = order[start..end].iter().filter(|&&i| labels[i]).count() as u64;
        let group_neg = (end - start) as u64 - group_pos;
        concordant += group_pos * neg;
        tied += group_pos * group_neg;
        pos += group_pos;
        neg += group_neg;
        start = end;
    }
    if pos == 0 || neg == 0 {
        return None;
    }
    Some((concordant as f64 + 0.5 * tied as f64) / (pos as f64 * neg as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationResult {
    pub ratio: f64,
    /// Images with truth strictly above this are hard.
    pub t_hard: f64,
    pub num_hard: usize,
    pub auroc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaurocResult {
    pub per_ratio: Vec<ClassificationResult>,
    /// Mean over ratios with a defined AUROC.
    pub mauroc: Option<f64>,
}

/// Hard-vs-easy classification at each hard ratio `r`. The hardness
/// threshold is the largest truth outside the top `ceil(r * D)` images, so
/// with distinct truths exactly that many images are hard; ties at the
/// threshold are labelled easy.
pub fn mauroc(
    estimates: &[(ImageId, f64)],
    truths: &[(ImageId, f64)],
    ratios: &[f64],
) -> Result<MaurocResult> {
    let items = align(estimates, truths)?;
    let mut sorted_truths: Vec<f64> = items.iter().map(|s| s.truth).collect();
    sorted_truths.sort_by(|a, b| b.total_cmp(a));
    let scores: Vec<f64> = items.iter().map(|s| s.estimate).collect();
    let d = items.len();

    let per_ratio: Vec<ClassificationResult> = ratios
        .iter()
        .map(|&ratio| {
            let top = ((ratio * d as f64) - 1e-9).ceil().max(0.0) as usize;
            let t_hard = sorted_truths
                .get(top)
                .copied()
                .unwrap_or(f64::NEG_INFINITY);
            let labels: Vec<bool> = items.iter().map(|s| s.truth > t_hard).collect();
            let num_hard = labels.iter().filter(|&&l| l).count();
            let auroc = auroc(&scores, &labels);
            if auroc.is_none() {
                log::warn!("hard ratio {ratio}: AUROC undefined ({num_hard} of {d} images hard)");
            }
            ClassificationResult {
                ratio,
                t_hard,
                num_hard,
                auroc,
            }
        })
        .collect();

    let defined: Vec<f64> = per_ratio.iter().filter_map(|r| r.auroc).collect();
    let mauroc = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(MaurocResult { per_ratio, mauroc })
}
