//! Core data model: detections, ground truths, images and the class table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;

pub type ImageId = u64;
pub type ClassId = u64;

/// Default score floor applied when reading detection dumps.
pub const DEFAULT_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: BoundingBox,
    pub class_id: ClassId,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_scores: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logits: Option<Vec<f64>>,
}

impl Detection {
    pub fn new(bbox: BoundingBox, class_id: ClassId, score: f64) -> Self {
        Self {
            bbox,
            class_id,
            score,
            class_scores: None,
            logits: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthBox {
    pub bbox: BoundingBox,
    pub class_id: ClassId,
    #[serde(default)]
    pub is_crowd: bool,
}

impl GroundTruthBox {
    pub fn new(bbox: BoundingBox, class_id: ClassId) -> Self {
        Self {
            bbox,
            class_id,
            is_crowd: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub image_id: ImageId,
    pub width: f64,
    pub height: f64,
    pub file_name: Option<String>,
    /// Full detection pool after floor filtering, in pool order.
    pub detections: Vec<Detection>,
    pub ground_truths: Option<Vec<GroundTruthBox>>,
}

impl ImageRecord {
    pub fn new(image_id: ImageId, width: f64, height: f64) -> Self {
        Self {
            image_id,
            width,
            height,
            file_name: None,
            detections: Vec::new(),
            ground_truths: None,
        }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn frame(&self) -> BoundingBox {
        BoundingBox::new(0.0, 0.0, self.width, self.height)
    }
}

/// How per-class probability vectors of a dump should be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    Softmax,
    #[default]
    OneVsAll,
}

impl FromStr for ScoreMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "softmax" => Ok(Self::Softmax),
            "one_vs_all" | "ova" => Ok(Self::OneVsAll),
            other => Err(Error::Config(format!("unknown score mode `{other}`"))),
        }
    }
}

impl fmt::Display for ScoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Softmax => "softmax",
            Self::OneVsAll => "one_vs_all",
        })
    }
}

/// Strict ingest fails on dangling references; lenient logs and skips them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IngestMode {
    #[default]
    Strict,
    Lenient,
}

/// Category id to name table.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTable {
    names: BTreeMap<ClassId, String>,
}

impl ClassTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: ClassId, name: impl Into<String>) {
        self.names.insert(id, name.into());
    }

    pub fn name(&self, id: ClassId) -> Option<&str> {
        self.names.get(&id).map(String::as_str)
    }

    pub fn contains(&self, id: ClassId) -> bool {
        self.names.contains_key(&id)
    }

    /// Resolves a class by case-insensitive name, falling back to a numeric id.
    pub fn resolve(&self, key: &str) -> Option<ClassId> {
        self.names
            .iter()
            .find(|(_, name)| name.eq_ignore_ascii_case(key))
            .map(|(id, _)| *id)
            .or_else(|| key.parse::<ClassId>().ok().filter(|id| self.contains(*id)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassId, &str)> {
        self.names.iter().map(|(id, name)| (*id, name.as_str()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// An immutable collection of images, sorted by image id.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub images: Vec<ImageRecord>,
    pub classes: ClassTable,
    pub score_mode: ScoreMode,
}

impl Dataset {
    pub fn new(mut images: Vec<ImageRecord>, classes: ClassTable) -> Result<Self> {
        images.sort_by_key(|img| img.image_id);
        if let Some(w) = images.windows(2).find(|w| w[0].image_id == w[1].image_id) {
            return Err(Error::Ingest(format!("duplicate image id {}", w[0].image_id)));
        }
        for img in &images {
            if !(img.width > 0.0 && img.height > 0.0) {
                return Err(Error::Ingest(format!(
                    "image {} has non-positive size {}x{}",
                    img.image_id, img.width, img.height
                )));
            }
        }
        Ok(Self {
            images,
            classes,
            score_mode: ScoreMode::default(),
        })
    }

    pub fn image(&self, id: ImageId) -> Option<&ImageRecord> {
        self.images
            .binary_search_by_key(&id, |img| img.image_id)
            .ok()
            .map(|i| &self.images[i])
    }

    pub fn has_ground_truth(&self) -> bool {
        !self.images.is_empty() && self.images.iter().all(|img| img.ground_truths.is_some())
    }

    /// Attaches detection pools to images. Pools for unknown image ids are an
    /// error in strict mode and dropped with a warning in lenient mode.
    pub fn attach_detections(
        &mut self,
        mut pools: BTreeMap<ImageId, Vec<Detection>>,
        mode: IngestMode,
    ) -> Result<()> {
        for img in &mut self.images {
            img.detections = pools.remove(&img.image_id).unwrap_or_default();
        }
        if let Some((&id, _)) = pools.iter().next() {
            match mode {
                IngestMode::Strict => {
                    return Err(Error::Ingest(format!(
                        "detection references unknown image id {id}"
                    )))
                }
                IngestMode::Lenient => {
                    for (id, pool) in &pools {
                        log::warn!(
                            "skipping {} detections for unknown image id {id}",
                            pool.len()
                        );
                    }
                }
            }
        }
        for img in &self.images {
            for det in &img.detections {
                if !self.classes.contains(det.class_id) {
                    match mode {
                        IngestMode::Strict => {
                            return Err(Error::Ingest(format!(
                                "detection on image {} has unknown category id {}",
                                img.image_id, det.class_id
                            )))
                        }
                        IngestMode::Lenient => log::warn!(
                            "image {}: unknown category id {}",
                            img.image_id,
                            det.class_id
                        ),
                    }
                }
            }
        }
        Ok(())
    }

    /// Drops ground truth so that only image metadata remains.
    pub fn without_ground_truth(mut self) -> Self {
        for img in &mut self.images {
            img.ground_truths = None;
        }
        self
    }
}

/// Orders a pool by descending score, ties by ascending input index.
pub fn sort_pool(pool: &mut [Detection]) {
    // stable sort keeps input order among equal scores
    pool.sort_by(|a, b| b.score.total_cmp(&a.score));
}

/// Detections scoring strictly above `eta`, in pool order.
pub fn filter_positive(pool: &[Detection], eta: f64) -> Vec<Detection> {
    pool.iter().filter(|d| d.score > eta).cloned().collect()
}

/// Source class name to target class name; `None` discards the class.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassRemap {
    pub map: BTreeMap<String, Option<String>>,
}

impl ClassRemap {
    pub fn identity(classes: &ClassTable) -> Self {
        Self {
            map: classes
                .iter()
                .map(|(_, name)| (name.to_string(), Some(name.to_string())))
                .collect(),
        }
    }

    /// Mapping from the nuImages detector schema onto vehicle/pedestrian.
    pub fn nuimages_two_class() -> Self {
        let vehicle = [
            "car",
            "truck",
            "trailer",
            "bus",
            "construction vehicle",
            "bicycle",
            "motorcycle",
        ];
        let mut map: BTreeMap<String, Option<String>> = vehicle
            .iter()
            .map(|c| (c.to_string(), Some("Vehicle".to_string())))
            .collect();
        map.insert("pedestrian".into(), Some("Pedestrian".into()));
        map.insert("traffic cone".into(), None);
        map.insert("barrier".into(), None);
        Self { map }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad remap file: {e}")))
    }

    fn lookup(&self, name: &str) -> Option<&Option<String>> {
        self.map.get(name).or_else(|| {
            self.map
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case(name))
                .map(|(_, v)| v)
        })
    }
}

/// Relabels detections and ground truths into the target schema, removing
/// objects whose class is discarded.
pub fn apply_class_remap(dataset: &Dataset, remap: &ClassRemap) -> Result<Dataset> {
    let used: BTreeSet<ClassId> = dataset
        .images
        .iter()
        .flat_map(|img| {
            img.detections
                .iter()
                .map(|d| d.class_id)
                .chain(img.ground_truths.iter().flatten().map(|g| g.class_id))
        })
        .chain(dataset.classes.iter().map(|(id, _)| id))
        .collect();

    let targets: BTreeSet<&str> = remap.map.values().flatten().map(String::as_str).collect();
    let mut new_classes = ClassTable::new();
    let mut target_ids: BTreeMap<&str, ClassId> = BTreeMap::new();
    for (i, name) in targets.iter().enumerate() {
        let id = i as ClassId + 1;
        new_classes.insert(id, *name);
        target_ids.insert(name, id);
    }

    let mut translation: BTreeMap<ClassId, Option<ClassId>> = BTreeMap::new();
    for id in used {
        let source = dataset
            .classes
            .name(id)
            .map(str::to_string)
            .unwrap_or_else(|| id.to_string());
        let target = remap
            .lookup(&source)
            .ok_or_else(|| Error::UnmappedClass(source.clone()))?;
        translation.insert(id, target.as_deref().map(|t| target_ids[t]));
    }

    let images = dataset
        .images
        .iter()
        .map(|img| ImageRecord {
            detections: img
                .detections
                .iter()
                .filter_map(|d| {
                    translation[&d.class_id].map(|class_id| Detection {
                        class_id,
                        ..d.clone()
                    })
                })
                .collect(),
            ground_truths: img.ground_truths.as_ref().map(|gts| {
                gts.iter()
                    .filter_map(|g| {
                        translation[&g.class_id].map(|class_id| GroundTruthBox {
                            class_id,
                            ..g.clone()
                        })
                    })
                    .collect()
            }),
            ..img.clone()
        })
        .collect();

    Ok(Dataset {
        images,
        classes: new_classes,
        score_mode: dataset.score_mode,
    })
}
