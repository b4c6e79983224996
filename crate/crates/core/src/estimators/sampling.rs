//! Score sampling: Monte Carlo estimation of a query's expectation over
//! pseudo ground truths drawn from detection scores.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matching::match_detections;
use crate::model::{filter_positive, Detection, GroundTruthBox, ImageId, ImageRecord};
use crate::query::{BoundQuery, ErrorSets, Frame};

use super::SamplerConfig;

/// Largest pool the exact enumeration accepts by default.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with further stream coordinates.
pub fn derive_seed(seed: u64, coordinates: &[u64]) -> u64 {
    coordinates
        .iter()
        .fold(splitmix64(seed), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

/// Random stream for one image, independent of iteration order.
pub fn image_rng(seed: u64, image_id: ImageId) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(image_id)))
}

/// Keeps each detection independently with probability equal to its score.
pub fn sample_pseudo_gt<R: Rng + ?Sized>(pool: &[Detection], rng: &mut R) -> Vec<GroundTruthBox> {
    pool.iter()
        .filter(|d| rng.gen::<f64>() < d.score)
        .map(|d| GroundTruthBox::new(d.bbox, d.class_id))
        .collect()
}

/// Monte Carlo mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    fn from_samples(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        if values.len() < 2 {
            return Self {
                mean,
                std_error: 0.0,
            };
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self {
            mean,
            std_error: (var / n).sqrt(),
        }
    }
}

/// Positive detections of an image and the machinery to score them against
/// an arbitrary ground truth.
struct Scene<'a> {
    positives: Vec<Detection>,
    frame: Frame,
    config: &'a SamplerConfig,
}

impl<'a> Scene<'a> {
    fn new(image: &ImageRecord, config: &'a SamplerConfig) -> Self {
        Self {
            positives: filter_positive(&image.detections, config.eta),
            frame: Frame::of(image, config.clip_boxes),
            config,
        }
    }

    fn error_sets(&self, ground_truths: &[GroundTruthBox]) -> ErrorSets {
        let matching = match_detections(&self.positives, ground_truths, &self.config.matching);
        ErrorSets::from_matching(&matching, &self.positives, ground_truths)
    }
}

/// Score sampling for several queries sharing the same pseudo ground truths.
/// Each query gets the same estimate it would get alone.
pub fn score_sampling_many<R: Rng + ?Sized>(
    image: &ImageRecord,
    queries: &[BoundQuery],
    config: &SamplerConfig,
    rng: &mut R,
) -> Vec<Estimate> {
    let n = config.num_samples.max(1);
    let scene = Scene::new(image, config);
    let mut values = vec![Vec::with_capacity(n); queries.len()];
    for _ in 0..n {
        let pseudo = sample_pseudo_gt(&image.detections, rng);
        let sets = scene.error_sets(&pseudo);
        for (q, out) in queries.iter().zip(values.iter_mut()) {
            out.push(sets.eval(q, &scene.frame));
        }
    }
    values.iter().map(|v| Estimate::from_samples(v)).collect()
}

pub fn score_sampling<R: Rng + ?Sized>(
    image: &ImageRecord,
    query: &BoundQuery,
    config: &SamplerConfig,
    rng: &mut R,
) -> Estimate {
    score_sampling_many(image, std::slice::from_ref(query), config, rng)[0]
}

/// Exact expectation over all `2^m` keep-subsets of the pool.
pub fn exact_expected_hardness_many(
    image: &ImageRecord,
    queries: &[BoundQuery],
    config: &SamplerConfig,
    limit: usize,
) -> Result<Vec<f64>> {
    let pool = &image.detections;
    if pool.len() > limit || pool.len() >= usize::BITS as usize {
        return Err(Error::EnumerationInfeasible {
            size: pool.len(),
            limit,
        });
    }
    let scene = Scene::new(image, config);
    let mut totals = vec![0.0; queries.len()];
    let mut subset = Vec::with_capacity(pool.len());
    for mask in 0usize..(1 << pool.len()) {
        subset.clear();
        let mut prob = 1.0;
        for (i, d) in pool.iter().enumerate() {
            if mask & (1 << i) != 0 {
                prob *= d.score;
                subset.push(GroundTruthBox::new(d.bbox, d.class_id));
            } else {
                prob *= 1.0 - d.score;
            }
        }
        if prob == 0.0 {
            continue;
        }
        let sets = scene.error_sets(&subset);
        for (q, total) in queries.iter().zip(totals.iter_mut()) {
            *total += prob * sets.eval(q, &scene.frame);
        }
    }
    Ok(totals)
}

pub fn exact_expected_hardness(
    image: &ImageRecord,
    query: &BoundQuery,
    config: &SamplerConfig,
) -> Result<f64> {
    Ok(exact_expected_hardness_many(
        image,
        std::slice::from_ref(query),
        config,
        DEFAULT_ENUMERATION_LIMIT,
    )?[0])
}

/// Query value of the positive detections against the real annotations.
pub fn ground_truth_hardness_many(
    image: &ImageRecord,
    queries: &[BoundQuery],
    config: &SamplerConfig,
) -> Result<Vec<f64>> {
    let gts = image
        .ground_truths
        .as_ref()
        .ok_or(Error::MissingGroundTruth(image.image_id))?;
    let scene = Scene::new(image, config);
    let sets = scene.error_sets(gts);
    Ok(queries.iter().map(|q| sets.eval(q, &scene.frame)).collect())
}

pub fn ground_truth_hardness(
    image: &ImageRecord,
    query: &BoundQuery,
    config: &SamplerConfig,
) -> Result<f64> {
    Ok(ground_truth_hardness_many(image, std::slice::from_ref(query), config)?[0])
}
