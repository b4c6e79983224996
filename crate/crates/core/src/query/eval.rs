use crate::geometry::BoundingBox;
use crate::matching::{error_set, ErrorElement, ErrorKind, Matching};
use crate::model::{ClassId, Detection, GroundTruthBox, ImageRecord};

use super::{Aggregator, BaseTerm, BinaryOp, BoundQuery};

/// Image frame used by area-based aggregators, optionally clipping boxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub width: f64,
    pub height: f64,
    pub clip_boxes: bool,
}

impl Frame {
    pub fn of(image: &ImageRecord, clip_boxes: bool) -> Self {
        Self {
            width: image.width,
            height: image.height,
            clip_boxes,
        }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    fn prepare(&self, b: &BoundingBox) -> BoundingBox {
        if self.clip_boxes {
            b.clip(self.width, self.height)
        } else {
            *b
        }
    }
}

/// Number of errors.
pub fn eval_total<'a>(eset: impl IntoIterator<Item = &'a ErrorElement>) -> f64 {
    eset.into_iter().count() as f64
}

/// Summed error area as a fraction of the image area.
pub fn eval_pixeladj<'a>(eset: impl IntoIterator<Item = &'a ErrorElement>, frame: &Frame) -> f64 {
    let image_area = frame.area();
    eset.into_iter()
        .map(|e| frame.prepare(&e.bbox).area() / image_area)
        .sum()
}

/// Sum over (error, true positive) pairs of the fraction of the error box
/// covered by the true positive box. Zero-area error boxes contribute 0.
pub fn eval_occaware<'a>(
    eset: impl IntoIterator<Item = &'a ErrorElement>,
    tp_boxes: &[BoundingBox],
    frame: &Frame,
) -> f64 {
    let mut total = 0.0;
    for e in eset {
        let b = frame.prepare(&e.bbox);
        let area = b.area();
        if area <= 0.0 {
            continue;
        }
        for tp in tp_boxes {
            total += b.intersection(&frame.prepare(tp)) / area;
        }
    }
    total
}

/// Error sets and true positive boxes of one matching, ready for queries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorSets {
    pub fp: Vec<ErrorElement>,
    pub fn_: Vec<ErrorElement>,
    /// Detection boxes of the matched pairs.
    pub tp: Vec<BoundingBox>,
}

impl ErrorSets {
    pub fn from_matching(
        matching: &Matching,
        detections: &[Detection],
        ground_truths: &[GroundTruthBox],
    ) -> Self {
        Self {
            fp: error_set(matching, ErrorKind::Fp, detections, ground_truths),
            fn_: error_set(matching, ErrorKind::Fn, detections, ground_truths),
            tp: matching
                .tp_pairs
                .iter()
                .map(|p| detections[p.det].bbox)
                .collect(),
        }
    }

    fn elements<'a>(
        &'a self,
        kind: ErrorKind,
        class: Option<ClassId>,
    ) -> impl Iterator<Item = &'a ErrorElement> + 'a {
        let (first, second): (&[ErrorElement], &[ErrorElement]) = match kind {
            ErrorKind::Fp => (&self.fp, &[]),
            ErrorKind::Fn => (&self.fn_, &[]),
            ErrorKind::False => (&self.fp, &self.fn_),
        };
        first
            .iter()
            .chain(second)
            .filter(move |e| class.is_none_or(|c| e.class_id == c))
    }

    pub fn eval_term(&self, term: &BaseTerm<ClassId>, frame: &Frame) -> f64 {
        let eset = self.elements(term.error_set, term.class_filter);
        match term.aggregator {
            Aggregator::Total => eval_total(eset),
            Aggregator::PixelAdj => eval_pixeladj(eset, frame),
            Aggregator::OccAware => eval_occaware(eset, &self.tp, frame),
        }
    }

    pub fn eval(&self, query: &BoundQuery, frame: &Frame) -> f64 {
        match query {
            BoundQuery::Term(t) => self.eval_term(t, frame),
            BoundQuery::Scalar(v) => *v,
            BoundQuery::Binary { op, lhs, rhs } => {
                let (l, r) = (self.eval(lhs, frame), self.eval(rhs, frame));
                match op {
                    BinaryOp::Add => l + r,
                    BinaryOp::Sub => l - r,
                    BinaryOp::Mul => l * r,
                }
            }
            BoundQuery::Compare { op, lhs, rhs } => {
                if op.holds(self.eval(lhs, frame), self.eval(rhs, frame)) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl BoundQuery {
    /// Evaluates the query for one image given a matching of `detections`
    /// against `ground_truths`.
    pub fn evaluate(
        &self,
        image: &ImageRecord,
        detections: &[Detection],
        ground_truths: &[GroundTruthBox],
        matching: &Matching,
        clip_boxes: bool,
    ) -> f64 {
        let sets = ErrorSets::from_matching(matching, detections, ground_truths);
        sets.eval(self, &Frame::of(image, clip_boxes))
    }
}
