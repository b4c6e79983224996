//! Synthetic scenes from a perfectly calibrated detector.
//!
//! Every pooled detection is a real object with probability equal to its
//! score; real objects become ground truth (optionally with slight box
//! jitter), the rest are false alarms. Optional misses add ground truth the
//! detector never saw.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::BoundingBox;
use crate::model::{ClassTable, Dataset, Detection, GroundTruthBox, ImageRecord, sort_pool};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_images: usize,
    pub seed: u64,
    pub width: f64,
    pub height: f64,
    /// Pool size is uniform on `0..=max_detections`.
    pub max_detections: usize,
    pub num_classes: usize,
    /// Lowest pooled score; scores are uniform on `[score_floor, 1]`.
    pub score_floor: f64,
    /// Ground truth coordinates move by up to this fraction of the box size.
    pub jitter: f64,
    /// Expected number of objects per image that receive no detection.
    pub miss_rate: f64,
    /// Round every score to 0 or 1, yielding a degenerate detector.
    pub binary_scores: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_images: 100,
            seed: 0,
            width: 640.0,
            height: 480.0,
            max_detections: 12,
            num_classes: 2,
            score_floor: 0.05,
            jitter: 0.0,
            miss_rate: 0.0,
            binary_scores: false,
        }
    }
}

fn random_box(rng: &mut ChaCha8Rng, cfg: &SynthConfig, center: (f64, f64)) -> BoundingBox {
    let short = cfg.width.min(cfg.height);
    let size = (rng.gen_range(0.0..1.0f64) * ((0.45 * short) / 8.0).ln()).exp() * 8.0;
    let aspect = rng.gen_range(0.5..2.0f64);
    let w = size * aspect.sqrt();
    let h = size / aspect.sqrt();
    let cx = (center.0 + rng.gen_range(-0.12..0.12) * cfg.width).clamp(w / 2.0, cfg.width - w / 2.0);
    let cy = (center.1 + rng.gen_range(-0.12..0.12) * cfg.height).clamp(h / 2.0, cfg.height - h / 2.0);
    BoundingBox::new(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0).clip(cfg.width, cfg.height)
}

fn jittered(rng: &mut ChaCha8Rng, b: &BoundingBox, amount: f64) -> BoundingBox {
    if amount <= 0.0 {
        return *b;
    }
    let (dw, dh) = (b.width() * amount, b.height() * amount);
    let mut j = |v: f64, d: f64| v + rng.gen_range(-1.0..=1.0) * d;
    let out = BoundingBox::new(j(b.x_min, dw), j(b.y_min, dh), j(b.x_max, dw), j(b.y_max, dh));
    if out.is_valid() {
        out
    } else {
        *b
    }
}

/// Class probabilities over `num_classes` foreground classes plus a trailing
/// background entry, consistent with the detection score.
fn class_vector(score: f64, class_id: u64, num_classes: usize) -> Vec<f64> {
    let mut p = vec![0.0; num_classes + 1];
    let rest = 1.0 - score;
    let others = num_classes.saturating_sub(1);
    for (k, slot) in p.iter_mut().enumerate().take(num_classes) {
        *slot = if k as u64 + 1 == class_id {
            score
        } else {
            0.3 * rest / others.max(1) as f64
        };
    }
    p[num_classes] = 1.0 - p[..num_classes].iter().sum::<f64>();
    p
}

fn image(rng: &mut ChaCha8Rng, cfg: &SynthConfig, image_id: u64) -> ImageRecord {
    let mut record = ImageRecord::new(image_id, cfg.width, cfg.height);
    let clusters: Vec<(f64, f64)> = (0..rng.gen_range(1..=3))
        .map(|_| (rng.gen_range(0.0..cfg.width), rng.gen_range(0.0..cfg.height)))
        .collect();
    let classes = cfg.num_classes.max(1) as u64;

    let mut detections = Vec::new();
    let mut ground_truths = Vec::new();
    for _ in 0..rng.gen_range(0..=cfg.max_detections) {
        let center = clusters[rng.gen_range(0..clusters.len())];
        let bbox = random_box(rng, cfg, center);
        let class_id = rng.gen_range(1..=classes);
        let mut score = rng.gen_range(cfg.score_floor..=1.0);
        if cfg.binary_scores {
            score = score.round();
        }
        if rng.gen::<f64>() < score {
            ground_truths.push(GroundTruthBox::new(jittered(rng, &bbox, cfg.jitter), class_id));
        }
        let p = class_vector(score, class_id, cfg.num_classes.max(1));
        let logits = p.iter().map(|v| v.max(1e-12).ln()).collect();
        detections.push(Detection {
            bbox,
            class_id,
            score,
            class_scores: Some(p),
            logits: Some(logits),
        });
    }
    let mut misses = 0;
    while misses < 8 && rng.gen::<f64>() < cfg.miss_rate / (1.0 + cfg.miss_rate) {
        let center = clusters[rng.gen_range(0..clusters.len())];
        ground_truths.push(GroundTruthBox::new(
            random_box(rng, cfg, center),
            rng.gen_range(1..=classes),
        ));
        misses += 1;
    }
    sort_pool(&mut detections);
    record.detections = detections;
    record.ground_truths = Some(ground_truths);
    record
}

pub fn class_table(num_classes: usize) -> ClassTable {
    let mut classes = ClassTable::new();
    for k in 1..=num_classes.max(1) {
        classes.insert(k as u64, format!("class{k}"));
    }
    classes
}

/// Generates `num_images` images with ids `1..=num_images`.
pub fn generate(cfg: &SynthConfig) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let images = (1..=cfg.num_images as u64)
        .map(|id| image(&mut rng, cfg, id))
        .collect();
    Dataset::new(images, class_table(cfg.num_classes))
}
