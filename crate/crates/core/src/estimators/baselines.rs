//! Query-agnostic uncertainty baselines, summed over positive detections.

use crate::error::{Error, Result};
use crate::model::{Detection, ScoreMode};

const SCORE_CLAMP: f64 = 1e-12;

fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.ln()
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Shannon entropy (natural log) of one detection's class distribution.
pub fn detection_entropy(det: &Detection, mode: ScoreMode) -> Result<f64> {
    match mode {
        ScoreMode::OneVsAll => {
            let s = det.score;
            Ok(-(plogp(s) + plogp(1.0 - s)))
        }
        ScoreMode::Softmax => {
            let probs = match (&det.class_scores, &det.logits) {
                (Some(p), _) => p.clone(),
                (None, Some(l)) => softmax(l),
                (None, None) => {
                    return Err(Error::Config(
                        "softmax entropy needs class_scores or logits on every detection".into(),
                    ))
                }
            };
            Ok(-probs.iter().copied().map(plogp).sum::<f64>())
        }
    }
}

/// Total entropy of an image's positive detections.
pub fn entropy(detections: &[Detection], mode: ScoreMode) -> Result<f64> {
    detections
        .iter()
        .map(|d| detection_entropy(d, mode))
        .sum()
}

/// Evidential uncertainty `K / (K + sum_k exp(l_k))` of one detection.
///
/// In one-vs-all mode the score is turned into two pseudo-logits
/// `(ln s - ln(1 - s), 0)`, i.e. evidence `(s / (1 - s), 1)`.
pub fn detection_dempster_shafer(det: &Detection, mode: ScoreMode) -> Result<f64> {
    match mode {
        ScoreMode::OneVsAll => {
            let s = det.score.clamp(SCORE_CLAMP, 1.0 - SCORE_CLAMP);
            let evidence = s / (1.0 - s) + 1.0;
            Ok(2.0 / (2.0 + evidence))
        }
        ScoreMode::Softmax => {
            let logits = det.logits.as_ref().ok_or_else(|| {
                Error::Config("Dempster-Shafer in softmax mode needs logits on every detection".into())
            })?;
            let k = logits.len() as f64;
            let evidence: f64 = logits.iter().map(|l| l.exp()).sum();
            Ok(k / (k + evidence))
        }
    }
}

pub fn dempster_shafer(detections: &[Detection], mode: ScoreMode) -> Result<f64> {
    detections
        .iter()
        .map(|d| detection_dempster_shafer(d, mode))
        .sum()
}
