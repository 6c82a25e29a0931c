use serde::{Deserialize, Serialize};

use crate::raster::RasterError;

/// Set agreement between a predicted and a reference mask.
///
/// Ratios with an empty denominator are 1: two empty masks agree perfectly, an
/// empty prediction has no false positives, an empty truth has nothing to miss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskScore {
    pub iou: f64,
    pub precision: f64,
    pub recall: f64,
    pub true_positive: usize,
    pub false_positive: usize,
    pub false_negative: usize,
}

pub fn score_masks(predicted: &[bool], truth: &[bool]) -> Result<MaskScore, RasterError> {
    if predicted.len() != truth.len() {
        return Err(RasterError::ShapeMismatch {
            what: "predicted mask".into(),
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    Ok(MaskScore {
        iou: ratio(tp, tp + fp + fn_),
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        true_positive: tp,
        false_positive: fp,
        false_negative: fn_,
    })
}
