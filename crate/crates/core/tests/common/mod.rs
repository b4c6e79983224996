#![allow(dead_code)]

use hardest::geometry::BoundingBox;
use hardest::model::{ClassTable, Detection, GroundTruthBox, ImageRecord};
use hardest::query::{parse_query, BoundQuery};
use rand::Rng;

/// Boxes packed into a small area so that overlaps are common.
pub fn random_box<R: Rng>(rng: &mut R, extent: f64) -> BoundingBox {
    let x = rng.gen_range(0.0..extent);
    let y = rng.gen_range(0.0..extent);
    let w = rng.gen_range(1.0..extent / 2.0);
    let h = rng.gen_range(1.0..extent / 2.0);
    BoundingBox::new(x, y, x + w, y + h)
}

pub fn random_detection<R: Rng>(rng: &mut R, classes: u64, extent: f64) -> Detection {
    Detection::new(
        random_box(rng, extent),
        rng.gen_range(1..=classes),
        rng.gen_range(0.0..=1.0),
    )
}

pub fn random_gt<R: Rng>(rng: &mut R, classes: u64, extent: f64) -> GroundTruthBox {
    GroundTruthBox::new(random_box(rng, extent), rng.gen_range(1..=classes))
}

/// An image whose pool has `m` detections with random scores.
pub fn random_image<R: Rng>(rng: &mut R, id: u64, m: usize) -> ImageRecord {
    let mut img = ImageRecord::new(id, 40.0, 40.0);
    img.detections = (0..m).map(|_| random_detection(rng, 2, 30.0)).collect();
    hardest::model::sort_pool(&mut img.detections);
    img
}

pub fn bind(text: &str) -> BoundQuery {
    let mut classes = ClassTable::new();
    classes.insert(1, "a");
    classes.insert(2, "b");
    parse_query(text).unwrap().bind(&classes).unwrap()
}

pub fn standard_bound() -> Vec<(String, BoundQuery)> {
    hardest::query::standard_queries()
        .into_iter()
        .map(|(name, q)| {
            let b = q.bind(&ClassTable::new()).unwrap();
            (name, b)
        })
        .collect()
}
