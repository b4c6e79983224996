//! Class-exact association of detections with (pseudo) ground truth.
//!
//! Produces the tp/fp/fn partition that every hardness query is built on.

mod assignment;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use assignment::max_weight_assignment;

use crate::error::Error;
use crate::geometry::{iou, BoundingBox};
use crate::model::{ClassId, Detection, GroundTruthBox};

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Matcher {
    #[default]
    Hungarian,
    Greedy,
}

impl FromStr for Matcher {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "hungarian" => Ok(Self::Hungarian),
            "greedy" => Ok(Self::Greedy),
            other => Err(Error::Config(format!("unknown matcher `{other}`"))),
        }
    }
}

impl fmt::Display for Matcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Hungarian => "hungarian",
            Self::Greedy => "greedy",
        })
    }
}

/// Treatment of `iscrowd` ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrowdPolicy {
    /// Crowd regions never count as misses and absorb detections that hit them.
    #[default]
    Ignore,
    /// Crowd regions are ordinary ground truth.
    Strict,
}

impl FromStr for CrowdPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "ignore" => Ok(Self::Ignore),
            "strict" => Ok(Self::Strict),
            other => Err(Error::Config(format!("unknown crowd policy `{other}`"))),
        }
    }
}

impl fmt::Display for CrowdPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ignore => "ignore",
            Self::Strict => "strict",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub tau: f64,
    pub matcher: Matcher,
    pub crowd: CrowdPolicy,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_IOU_THRESHOLD,
            matcher: Matcher::Hungarian,
            crowd: CrowdPolicy::Ignore,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TpPair {
    pub det: usize,
    pub gt: usize,
    pub iou: f64,
}

/// Partition of detections and ground truths. All index lists are ascending;
/// `tp_pairs` is ordered by detection index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Matching {
    pub tp_pairs: Vec<TpPair>,
    pub fp_indices: Vec<usize>,
    pub fn_indices: Vec<usize>,
    pub ignored_gt: Vec<usize>,
    /// Unmatched detections absorbed by a crowd region.
    pub ignored_det: Vec<usize>,
}

impl Matching {
    /// Sum of matched IoU, accumulated in detection order.
    pub fn total_iou(&self) -> f64 {
        self.tp_pairs.iter().map(|p| p.iou).sum()
    }
}

/// Which error set a query aggregates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorKind {
    Fp,
    Fn,
    False,
}

impl ErrorKind {
    pub const ALL: [ErrorKind; 3] = [ErrorKind::Fp, ErrorKind::Fn, ErrorKind::False];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Fp => "fp",
            Self::Fn => "fn",
            Self::False => "false",
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorElement {
    pub bbox: BoundingBox,
    pub class_id: ClassId,
}

/// Boxes of one error set; `False` lists false positives first.
pub fn error_set(
    matching: &Matching,
    kind: ErrorKind,
    detections: &[Detection],
    ground_truths: &[GroundTruthBox],
) -> Vec<ErrorElement> {
    let fp = matching.fp_indices.iter().map(|&i| ErrorElement {
        bbox: detections[i].bbox,
        class_id: detections[i].class_id,
    });
    let fn_ = matching.fn_indices.iter().map(|&j| ErrorElement {
        bbox: ground_truths[j].bbox,
        class_id: ground_truths[j].class_id,
    });
    match kind {
        ErrorKind::Fp => fp.collect(),
        ErrorKind::Fn => fn_.collect(),
        ErrorKind::False => fp.chain(fn_).collect(),
    }
}

/// Matches detections to ground truth independently per class.
/// Per-class detection, ground truth and crowd indices.
type ClassGroups = BTreeMap<ClassId, (Vec<usize>, Vec<usize>, Vec<usize>)>;

pub fn match_detections(
    detections: &[Detection],
    ground_truths: &[GroundTruthBox],
    config: &MatchConfig,
) -> Matching {
    let mut by_class: ClassGroups = BTreeMap::new();
    for (i, d) in detections.iter().enumerate() {
        by_class.entry(d.class_id).or_default().0.push(i);
    }
    for (j, g) in ground_truths.iter().enumerate() {
        let entry = by_class.entry(g.class_id).or_default();
        if g.is_crowd && config.crowd == CrowdPolicy::Ignore {
            entry.2.push(j);
        } else {
            entry.1.push(j);
        }
    }

    let mut out = Matching::default();
    let mut det_matched = vec![false; detections.len()];
    let mut gt_matched = vec![false; ground_truths.len()];

    for (dets, gts, crowd) in by_class.values() {
        let pairs = match config.matcher {
            Matcher::Hungarian => hungarian_pairs(dets, gts, detections, ground_truths, config.tau),
            Matcher::Greedy => greedy_pairs(dets, gts, detections, ground_truths, config.tau),
        };
        for pair in pairs {
            det_matched[pair.det] = true;
            gt_matched[pair.gt] = true;
            out.tp_pairs.push(pair);
        }
        for &i in dets.iter().filter(|&&i| !det_matched[i]) {
            let absorbed = crowd
                .iter()
                .any(|&j| iou(&detections[i].bbox, &ground_truths[j].bbox) >= config.tau);
            if absorbed {
                out.ignored_det.push(i);
            } else {
                out.fp_indices.push(i);
            }
        }
        out.fn_indices
            .extend(gts.iter().copied().filter(|&j| !gt_matched[j]));
        out.ignored_gt.extend(crowd.iter().copied());
    }

    out.tp_pairs.sort_by_key(|p| p.det);
    out.fp_indices.sort_unstable();
    out.fn_indices.sort_unstable();
    out.ignored_gt.sort_unstable();
    out.ignored_det.sort_unstable();
    out
}

fn hungarian_pairs(
    dets: &[usize],
    gts: &[usize],
    detections: &[Detection],
    ground_truths: &[GroundTruthBox],
    tau: f64,
) -> Vec<TpPair> {
    if dets.is_empty() || gts.is_empty() {
        return Vec::new();
    }
    let cols = gts.len();
    let mut weights = vec![0.0; dets.len() * cols];
    let mut any_feasible = false;
    for (r, &i) in dets.iter().enumerate() {
        for (c, &j) in gts.iter().enumerate() {
            let v = iou(&detections[i].bbox, &ground_truths[j].bbox);
            // infeasible pairs weigh zero so they never add to the objective
            if v >= tau && v > 0.0 {
                weights[r * cols + c] = v;
                any_feasible = true;
            }
        }
    }
    if !any_feasible {
        return Vec::new();
    }
    max_weight_assignment(&weights, dets.len(), cols)
        .into_iter()
        .enumerate()
        .filter_map(|(r, c)| {
            let c = c?;
            let w = weights[r * cols + c];
            (w > 0.0).then(|| TpPair {
                det: dets[r],
                gt: gts[c],
                iou: w,
            })
        })
        .collect()
}

fn greedy_pairs(
    dets: &[usize],
    gts: &[usize],
    detections: &[Detection],
    ground_truths: &[GroundTruthBox],
    tau: f64,
) -> Vec<TpPair> {
    let mut order = dets.to_vec();
    order.sort_by(|&a, &b| {
        detections[b]
            .score
            .total_cmp(&detections[a].score)
            .then(a.cmp(&b))
    });
    let mut taken = vec![false; gts.len()];
    let mut pairs = Vec::new();
    for i in order {
        let mut best: Option<(usize, f64)> = None;
        for (c, &j) in gts.iter().enumerate() {
            if taken[c] {
                continue;
            }
            let v = iou(&detections[i].bbox, &ground_truths[j].bbox);
            if v >= tau && v > 0.0 && best.is_none_or(|(_, b)| v > b) {
                best = Some((c, v));
            }
        }
        if let Some((c, v)) = best {
            taken[c] = true;
            pairs.push(TpPair {
                det: i,
                gt: gts[c],
                iou: v,
            });
        }
    }
    pairs
}
