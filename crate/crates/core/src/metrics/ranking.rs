use serde::Serialize;

use crate::error::Result;
use crate::model::ImageId;

use super::{align, Scored};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingResult {
    /// Image ids by descending estimate.
    pub order: Vec<ImageId>,
    pub dcg: f64,
    pub dcg_gt: f64,
    pub ndcg: f64,
}

/// Sorts by descending `key`; ties are ordered by ascending truth so that
/// group sums do not depend on input order.
fn sort_desc_by(items: &mut [Scored], key: impl Fn(&Scored) -> f64) {
    items.sort_by(|a, b| {
        key(b)
            .total_cmp(&key(a))
            .then(a.truth.total_cmp(&b.truth))
            .then(a.image_id.cmp(&b.image_id))
    });
}

/// Gains per position: each image's truth averaged over all images sharing
/// its key. `items` must already be sorted by that key.
fn tie_averaged_gains(items: &[Scored], key: impl Fn(&Scored) -> f64) -> Vec<f64> {
    let mut gains = Vec::with_capacity(items.len());
    let mut start = 0;
    while start < items.len() {
        let k = key(&items[start]);
        let end = start + items[start..].iter().take_while(|s| key(s) == k).count();
        let mean = items[start..end].iter().map(|s| s.truth).sum::<f64>() / (end - start) as f64;
        gains.extend(std::iter::repeat_n(mean, end - start));
        start = end;
    }
    gains
}

fn dcg(gains: &[f64]) -> f64 {
    gains
        .iter()
        .enumerate()
        .map(|(i, g)| g / ((i + 2) as f64).log2())
        .sum()
}

/// Normalised discounted cumulative gain of the estimated ranking, with
/// gains averaged over images sharing an estimate. Defined as 1 when the
/// ideal DCG is zero.
pub fn ndcg(estimates: &[(ImageId, f64)], truths: &[(ImageId, f64)]) -> Result<RankingResult> {
    let mut items = align(estimates, truths)?;
    sort_desc_by(&mut items, |s| s.estimate);
    let order = items.iter().map(|s| s.image_id).collect();
    let dcg_est = dcg(&tie_averaged_gains(&items, |s| s.estimate));

    sort_desc_by(&mut items, |s| s.truth);
    let dcg_gt = dcg(&tie_averaged_gains(&items, |s| s.truth));

    let ndcg = if dcg_gt == 0.0 { 1.0 } else { dcg_est / dcg_gt };
    Ok(RankingResult {
        order,
        dcg: dcg_est,
        dcg_gt,
        ndcg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub budget: usize,
    pub cumulative: f64,
    /// Expected cumulative hardness of a random ranking.
    pub diagonal: f64,
}

/// Cumulative ground-truth hardness of the top-`k` images by estimate, for
/// `k = 0..=D`. Images tied on the estimate contribute their mean truth.
pub fn cumulative_hardness_curve(
    estimates: &[(ImageId, f64)],
    truths: &[(ImageId, f64)],
) -> Result<Vec<CurvePoint>> {
    let mut items = align(estimates, truths)?;
    let total: f64 = items.iter().map(|s| s.truth).sum();
    let n = items.len();
    sort_desc_by(&mut items, |s| s.estimate);
    let gains = tie_averaged_gains(&items, |s| s.estimate);

    let mut out = Vec::with_capacity(n + 1);
    out.push(CurvePoint {
        budget: 0,
        cumulative: 0.0,
        diagonal: 0.0,
    });
    let mut acc = 0.0;
    for (k, g) in gains.iter().enumerate() {
        acc += g;
        out.push(CurvePoint {
            budget: k + 1,
            cumulative: acc,
            diagonal: (k + 1) as f64 / n as f64 * total,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(values: &[f64]) -> Vec<(ImageId, f64)> {
        values.iter().enumerate().map(|(i, &v)| (i as ImageId, v)).collect()
    }

    #[test]
    fn identity_ranking_is_perfect() {
        let q = pairs(&[0.3, 2.0, 0.0, 5.0, 1.0]);
        let r = ndcg(&q, &q).unwrap();
        assert_eq!(r.ndcg, 1.0);
        assert_eq!(r.order, vec![3, 1, 4, 0, 2]);
    }

    #[test]
    fn constant_estimates_use_mean_gain() {
        let truths = pairs(&[4.0, 0.0, 1.0, 3.0]);
        let est = pairs(&[7.0; 4]);
        let r = ndcg(&est, &truths).unwrap();
        // closed form: mean(q) * sum 1/log2(i+1) over the ideal DCG
        let discounts: Vec<f64> = (1..=4).map(|i| 1.0 / ((i + 1) as f64).log2()).collect();
        let expected_dcg = 2.0 * discounts.iter().sum::<f64>();
        let ideal = 4.0 * discounts[0] + 3.0 * discounts[1] + 1.0 * discounts[2];
        assert!((r.dcg - expected_dcg).abs() < 1e-12);
        assert!((r.ndcg - expected_dcg / ideal).abs() < 1e-12);
    }

    #[test]
    fn all_zero_truth_is_perfect() {
        let r = ndcg(&pairs(&[0.1, 0.9]), &pairs(&[0.0, 0.0])).unwrap();
        assert_eq!(r.ndcg, 1.0);
    }

    #[test]
    fn curve_endpoints_and_diagonal() {
        let truths = pairs(&[1.0, 3.0, 0.0, 2.0]);
        let est = pairs(&[0.4, 0.1, 0.3, 0.2]);
        let curve = cumulative_hardness_curve(&est, &truths).unwrap();
        assert_eq!(curve.len(), 5);
        assert_eq!(curve[0].cumulative, 0.0);
        assert_eq!(curve[4].cumulative, 6.0);
        assert_eq!(curve[2].diagonal, 3.0);
        let cums: Vec<f64> = curve.iter().map(|p| p.cumulative).collect();
        assert_eq!(cums, vec![0.0, 1.0, 1.0, 3.0, 6.0]);
    }
}
