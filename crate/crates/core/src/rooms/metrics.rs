use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::mask::RoomMaskSet;
use crate::error::{Error, Result};

/// A greedy match is a true positive at or above this IoU.
pub const MATCH_IOU: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegMatch {
    pub pred_id: u16,
    pub gt_id: u16,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegMetrics {
    #[serde(rename = "mIoU")]
    pub miou: f64,
    pub precision: f64,
    pub recall: f64,
    pub true_positives: usize,
    pub pred_count: usize,
    pub gt_count: usize,
    pub matches: Vec<SegMatch>,
}

/// Row-major index of the first pixel of every instance; a label-free key
/// used to break IoU ties.
fn first_pixels(set: &RoomMaskSet) -> Vec<usize> {
    let mut first = vec![usize::MAX; set.len() + 1];
    for (i, &l) in set.labels.iter().enumerate() {
        if l != 0 && first[l as usize] == usize::MAX {
            first[l as usize] = i;
        }
    }
    first
}

/// IoU of every `(pred, gt)` pair that overlaps.
pub fn pair_ious(pred: &RoomMaskSet, gt: &RoomMaskSet) -> Result<Vec<SegMatch>> {
    if pred.width != gt.width || pred.height != gt.height {
        return Err(Error::DimensionMismatch(pred.width, pred.height, gt.width, gt.height));
    }
    let mut inter: BTreeMap<(u16, u16), u64> = BTreeMap::new();
    for (&p, &g) in pred.labels.iter().zip(&gt.labels) {
        if p != 0 && g != 0 {
            *inter.entry((p, g)).or_insert(0) += 1;
        }
    }
    Ok(inter
        .into_iter()
        .map(|((p, g), i)| {
            let ap = pred.instances[p as usize - 1].pixel_count as u64;
            let ag = gt.instances[g as usize - 1].pixel_count as u64;
            SegMatch { pred_id: p, gt_id: g, iou: i as f64 / (ap + ag - i) as f64 }
        })
        .collect())
}

/// Greedy one-to-one matching by descending IoU.
///
/// Precision and recall count matches with IoU ≥ [`MATCH_IOU`]; mIoU averages
/// the IoU of every matched pair. Empty prediction or ground truth report 0.
pub fn eval_segmentation(pred: &RoomMaskSet, gt: &RoomMaskSet) -> Result<SegMetrics> {
    let mut pairs = pair_ious(pred, gt)?;
    let pf = first_pixels(pred);
    let gf = first_pixels(gt);
    pairs.sort_by(|a, b| {
        b.iou
            .total_cmp(&a.iou)
            .then(pf[a.pred_id as usize].cmp(&pf[b.pred_id as usize]))
            .then(gf[a.gt_id as usize].cmp(&gf[b.gt_id as usize]))
    });
    let mut pred_used = vec![false; pred.len() + 1];
    let mut gt_used = vec![false; gt.len() + 1];
    let mut matches = Vec::new();
    for m in pairs {
        if pred_used[m.pred_id as usize] || gt_used[m.gt_id as usize] {
            continue;
        }
        pred_used[m.pred_id as usize] = true;
        gt_used[m.gt_id as usize] = true;
        matches.push(m);
    }
    let tp = matches.iter().filter(|m| m.iou >= MATCH_IOU).count();
    let ratio = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let miou = if matches.is_empty() {
        0.0
    } else {
        matches.iter().map(|m| m.iou).sum::<f64>() / matches.len() as f64
    };
    Ok(SegMetrics {
        miou,
        precision: ratio(tp, pred.len()),
        recall: ratio(tp, gt.len()),
        true_positives: tp,
        pred_count: pred.len(),
        gt_count: gt.len(),
        matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raster(w: u32, h: u32, rects: &[(u16, u32, u32, u32, u32)]) -> RoomMaskSet {
        let mut labels = vec![0u16; (w * h) as usize];
        for &(id, u0, v0, u1, v1) in rects {
            for v in v0..v1 {
                for u in u0..u1 {
                    labels[(v * w + u) as usize] = id;
                }
            }
        }
        RoomMaskSet::from_labels(w, h, labels, None).unwrap()
    }

    #[test]
    fn identity_is_perfect() {
        let gt = raster(20, 20, &[(1, 0, 0, 10, 10), (2, 10, 0, 20, 20), (3, 0, 12, 8, 20)]);
        let m = eval_segmentation(&gt, &gt).unwrap();
        assert_eq!((m.miou, m.precision, m.recall), (1.0, 1.0, 1.0));
    }

    #[test]
    fn empty_prediction_scores_zero() {
        let gt = raster(8, 8, &[(1, 0, 0, 4, 4)]);
        let pred = RoomMaskSet::empty(8, 8, None);
        let m = eval_segmentation(&pred, &gt).unwrap();
        assert_eq!((m.miou, m.precision, m.recall), (0.0, 0.0, 0.0));
    }

    #[test]
    fn merged_rooms_halve_recall() {
        let gt = raster(20, 10, &[(1, 0, 0, 10, 10), (2, 10, 0, 20, 10)]);
        let pred = raster(20, 10, &[(1, 0, 0, 20, 10)]);
        let m = eval_segmentation(&pred, &gt).unwrap();
        // each gt room covers half of the merged mask
        assert_eq!(m.matches.len(), 1);
        assert_eq!(m.matches[0].iou, 0.5);
        assert!(m.recall <= 0.5);
        assert_eq!(m.precision, 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = RoomMaskSet::empty(4, 4, None);
        let b = RoomMaskSet::empty(4, 5, None);
        assert_eq!(eval_segmentation(&a, &b).unwrap_err(), Error::DimensionMismatch(4, 4, 4, 5));
    }
}
