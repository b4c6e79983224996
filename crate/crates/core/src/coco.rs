//! Reading and writing COCO annotation and result files.
//!
//! Boxes are `[x, y, w, h]` in the files and converted to `xyxy` here; nothing
//! else in the crate sees the COCO convention.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoundingBox;
use crate::model::{
    sort_pool, ClassId, ClassTable, Dataset, Detection, GroundTruthBox, ImageId, ImageRecord,
    ScoreMode,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocoImage {
    pub id: ImageId,
    pub width: f64,
    pub height: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file_name: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocoAnnotation {
    pub id: u64,
    pub image_id: ImageId,
    pub category_id: ClassId,
    pub bbox: [f64; 4],
    #[serde(default)]
    pub iscrowd: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocoCategory {
    pub id: ClassId,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supercategory: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CocoAnnotationFile {
    pub images: Vec<CocoImage>,
    #[serde(default)]
    pub annotations: Vec<CocoAnnotation>,
    #[serde(default)]
    pub categories: Vec<CocoCategory>,
}

/// One entry of a COCO results file, with optional per-class vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CocoResult {
    pub image_id: ImageId,
    pub category_id: ClassId,
    pub bbox: [f64; 4],
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_scores: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logits: Option<Vec<f64>>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Dataset> {
    let file: CocoAnnotationFile = read_json(path.as_ref())?;
    dataset_from_annotations(file)
}

pub fn dataset_from_annotations(file: CocoAnnotationFile) -> Result<Dataset> {
    let mut classes = ClassTable::new();
    for cat in &file.categories {
        classes.insert(cat.id, cat.name.clone());
    }

    let mut images: BTreeMap<ImageId, ImageRecord> = BTreeMap::new();
    for img in &file.images {
        let mut record = ImageRecord::new(img.id, img.width, img.height);
        record.file_name = img.file_name.clone();
        record.ground_truths = Some(Vec::new());
        if images.insert(img.id, record).is_some() {
            return Err(Error::Ingest(format!("duplicate image id {}", img.id)));
        }
    }

    for ann in &file.annotations {
        let [x, y, w, h] = ann.bbox;
        let bbox = BoundingBox::from_xywh(x, y, w, h).ok_or_else(|| {
            Error::Ingest(format!("annotation {} has invalid bbox {:?}", ann.id, ann.bbox))
        })?;
        if !classes.contains(ann.category_id) {
            return Err(Error::Ingest(format!(
                "annotation {} has unknown category id {}",
                ann.id, ann.category_id
            )));
        }
        let record = images.get_mut(&ann.image_id).ok_or_else(|| {
            Error::Ingest(format!(
                "annotation {} references missing image id {}",
                ann.id, ann.image_id
            ))
        })?;
        record
            .ground_truths
            .get_or_insert_with(Vec::new)
            .push(GroundTruthBox {
                bbox,
                class_id: ann.category_id,
                is_crowd: ann.iscrowd != 0,
            });
    }

    Dataset::new(images.into_values().collect(), classes)
}

/// Serializes the ground-truth side of a dataset back into COCO form.
pub fn annotations_to_coco(dataset: &Dataset) -> CocoAnnotationFile {
    let mut annotations = Vec::new();
    let mut next_id = 1;
    for img in &dataset.images {
        for gt in img.ground_truths.iter().flatten() {
            annotations.push(CocoAnnotation {
                id: next_id,
                image_id: img.image_id,
                category_id: gt.class_id,
                bbox: gt.bbox.to_xywh(),
                iscrowd: gt.is_crowd as u8,
                area: Some(gt.bbox.area()),
            });
            next_id += 1;
        }
    }
    CocoAnnotationFile {
        images: dataset
            .images
            .iter()
            .map(|img| CocoImage {
                id: img.image_id,
                width: img.width,
                height: img.height,
                file_name: img.file_name.clone(),
            })
            .collect(),
        annotations,
        categories: dataset
            .classes
            .iter()
            .map(|(id, name)| CocoCategory {
                id,
                name: name.to_string(),
                supercategory: None,
            })
            .collect(),
    }
}

/// Serializes every detection pool as a COCO results list.
pub fn detections_to_coco(dataset: &Dataset) -> Vec<CocoResult> {
    dataset
        .images
        .iter()
        .flat_map(|img| {
            img.detections.iter().map(move |d| CocoResult {
                image_id: img.image_id,
                category_id: d.class_id,
                bbox: d.bbox.to_xywh(),
                score: d.score,
                class_scores: d.class_scores.clone(),
                logits: d.logits.clone(),
            })
        })
        .collect()
}

pub fn load_detections(
    path: impl AsRef<Path>,
    floor: f64,
) -> Result<BTreeMap<ImageId, Vec<Detection>>> {
    let results: Vec<CocoResult> = read_json(path.as_ref())?;
    pools_from_results(results, floor)
}

/// Groups results per image, drops scores below `floor` and orders each pool.
pub fn pools_from_results(
    results: Vec<CocoResult>,
    floor: f64,
) -> Result<BTreeMap<ImageId, Vec<Detection>>> {
    let mut pools: BTreeMap<ImageId, Vec<Detection>> = BTreeMap::new();
    for (index, r) in results.into_iter().enumerate() {
        if !(0.0..=1.0).contains(&r.score) {
            return Err(Error::Ingest(format!(
                "result {index} (image {}) has score {} outside [0, 1]",
                r.image_id, r.score
            )));
        }
        let [x, y, w, h] = r.bbox;
        let bbox = BoundingBox::from_xywh(x, y, w, h).ok_or_else(|| {
            Error::Ingest(format!("result {index} has invalid bbox {:?}", r.bbox))
        })?;
        if let Some(p) = r.class_scores.iter().flatten().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Ingest(format!(
                "result {index} has class score {p} outside [0, 1]"
            )));
        }
        if r.score < floor {
            continue;
        }
        pools.entry(r.image_id).or_default().push(Detection {
            bbox,
            class_id: r.category_id,
            score: r.score,
            class_scores: r.class_scores,
            logits: r.logits,
        });
    }
    for pool in pools.values_mut() {
        sort_pool(pool);
    }
    Ok(pools)
}

/// Checks that softmax-style class score vectors sum to one.
pub fn validate_class_scores(dataset: &Dataset) -> Result<()> {
    if dataset.score_mode != ScoreMode::Softmax {
        return Ok(());
    }
    for img in &dataset.images {
        for det in &img.detections {
            if let Some(p) = &det.class_scores {
                let sum: f64 = p.iter().sum();
                if (sum - 1.0).abs() > 1e-6 {
                    return Err(Error::Ingest(format!(
                        "image {}: softmax class scores sum to {sum}",
                        img.image_id
                    )));
                }
            }
        }
    }
    Ok(())
}
