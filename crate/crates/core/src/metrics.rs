//! Segmentation metrics over a confusion matrix: per-class IoU (Jaccard),
//! mean IoU, precision/recall/F1, pixel accuracy and categorical
//! cross-entropy over probability maps.
//!
//! A class whose ratio has a zero denominator is *undefined* (`None`) and is
//! left out of every mean.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::masks::SegMask;

/// Default probability floor for the log in [`cross_entropy`].
pub const DEFAULT_CE_EPSILON: f64 = 1e-7;

/// Tolerance on the per-pixel probability sum.
pub const PROB_SUM_TOLERANCE: f64 = 1e-6;

/// `counts[t * k + p]` = pixels with truth `t` predicted as `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            counts: vec![0; k * k],
        }
    }

    pub fn from_counts(k: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != k * k {
            return Err(Error::invalid(format!(
                "confusion matrix for {k} classes needs {} counts, got {}",
                k * k,
                counts.len()
            )));
        }
        Ok(Self { k, counts })
    }

    pub fn num_classes(&self) -> usize {
        self.k
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.k + pred]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|c| self.get(c, c)).sum()
    }

    /// Truth pixels of class `c`.
    pub fn row_sum(&self, c: usize) -> u64 {
        self.counts[c * self.k..(c + 1) * self.k].iter().sum()
    }

    /// Predicted pixels of class `c`.
    pub fn col_sum(&self, c: usize) -> u64 {
        (0..self.k).map(|t| self.get(t, c)).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.k);
        for t in 0..self.k {
            for p in 0..self.k {
                out.counts[p * self.k + t] = self.get(t, p);
            }
        }
        out
    }

    fn check_class(&self, c: usize) -> Result<()> {
        if c >= self.k {
            return Err(Error::invalid(format!(
                "class {c} is not below class count {}",
                self.k
            )));
        }
        Ok(())
    }
}

pub fn confusion(pred: &SegMask, truth: &SegMask) -> Result<ConfusionMatrix> {
    if (pred.width(), pred.height()) != (truth.width(), truth.height()) {
        return Err(Error::invalid(format!(
            "prediction is {}x{} but truth is {}x{}",
            pred.width(),
            pred.height(),
            truth.width(),
            truth.height()
        )));
    }
    if pred.num_classes() != truth.num_classes() {
        return Err(Error::invalid(format!(
            "prediction has {} classes but truth has {}",
            pred.num_classes(),
            truth.num_classes()
        )));
    }
    let k = truth.num_classes();
    let mut cm = ConfusionMatrix::zeros(k);
    for (&t, &p) in truth.labels().iter().zip(pred.labels()) {
        cm.counts[usize::from(t) * k + usize::from(p)] += 1;
    }
    Ok(cm)
}

pub fn accumulate(a: &ConfusionMatrix, b: &ConfusionMatrix) -> Result<ConfusionMatrix> {
    if a.k != b.k {
        return Err(Error::invalid(format!(
            "cannot add confusion matrices over {} and {} classes",
            a.k, b.k
        )));
    }
    Ok(ConfusionMatrix {
        k: a.k,
        counts: a.counts.iter().zip(&b.counts).map(|(x, y)| x + y).collect(),
    })
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den != 0).then(|| num as f64 / den as f64)
}

/// `|A ∩ B| / |A ∪ B|` for class `c`; `None` when the class is absent from
/// both maps.
pub fn class_iou(cm: &ConfusionMatrix, c: usize) -> Result<Option<f64>> {
    cm.check_class(c)?;
    let inter = cm.get(c, c);
    Ok(ratio(inter, cm.row_sum(c) + cm.col_sum(c) - inter))
}

pub fn mean_iou(cm: &ConfusionMatrix) -> Result<f64> {
    let defined: Vec<f64> = (0..cm.k)
        .map(|c| class_iou(cm, c))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    mean(&defined).ok_or(Error::EmptyMetric)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

/// Precision, recall and their harmonic mean for class `c`.
///
/// F1 is evaluated as `2·TP / (2·TP + FP + FN)`, which equals `2PR/(P+R)`
/// wherever that is defined and scores a total miss (`TP = 0`) as 0. It is
/// undefined only when the class is absent from both maps.
pub fn precision_recall_f1(cm: &ConfusionMatrix, c: usize) -> Result<ClassScores> {
    cm.check_class(c)?;
    let tp = cm.get(c, c);
    let predicted = cm.col_sum(c);
    let actual = cm.row_sum(c);
    Ok(ClassScores {
        precision: ratio(tp, predicted),
        recall: ratio(tp, actual),
        f1: ratio(2 * tp, predicted + actual),
    })
}

pub fn pixel_accuracy(cm: &ConfusionMatrix) -> Option<f64> {
    ratio(cm.trace(), cm.total())
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Per-pixel class probabilities, `values[(y * width + x) * k + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    width: usize,
    height: usize,
    k: usize,
    values: Vec<f64>,
}

impl ProbMap {
    pub fn new(width: usize, height: usize, k: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height * k {
            return Err(Error::invalid(format!(
                "probability map holds {} values, expected {}",
                values.len(),
                width * height * k
            )));
        }
        for (i, px) in values.chunks_exact(k.max(1)).enumerate() {
            let sum: f64 = px.iter().sum();
            if px.iter().any(|&v| v.is_nan() || v < 0.0) || (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
                return Err(Error::invalid(format!(
                    "probability vector at pixel {i} is not a distribution (sum {sum})"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            k,
            values,
        })
    }

    /// Probability 1 on each pixel's label.
    pub fn one_hot(mask: &SegMask) -> Self {
        let k = mask.num_classes();
        let mut values = vec![0.0; mask.len() * k];
        for (i, &l) in mask.labels().iter().enumerate() {
            values[i * k + usize::from(l)] = 1.0;
        }
        Self {
            width: mask.width(),
            height: mask.height(),
            k,
            values,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.k
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    /// Index of the largest probability per pixel, lowest index on ties.
    pub fn argmax(&self) -> Vec<u8> {
        self.values
            .chunks_exact(self.k)
            .map(|px| {
                let mut best = 0;
                for (j, &v) in px.iter().enumerate().skip(1) {
                    if v > px[best] {
                        best = j;
                    }
                }
                best as u8
            })
            .collect()
    }
}

/// Mean negative log-likelihood of the true class over every pixel of every
/// sample, with probabilities floored at `epsilon`.
pub fn cross_entropy(probs: &[ProbMap], truths: &[SegMask], epsilon: f64) -> Result<f64> {
    if probs.len() != truths.len() {
        return Err(Error::invalid(format!(
            "{} probability maps for {} truth masks",
            probs.len(),
            truths.len()
        )));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut total = 0.0;
    let mut pixels = 0usize;
    for (p, t) in probs.iter().zip(truths) {
        if (p.width, p.height, p.k) != (t.width(), t.height(), t.num_classes()) {
            return Err(Error::invalid(
                "probability map and truth mask disagree on shape or class count",
            ));
        }
        for (i, &label) in t.labels().iter().enumerate() {
            total -= p.pixel(i)[usize::from(label)].max(epsilon).ln();
        }
        pixels += t.len();
    }
    if pixels == 0 {
        return Err(Error::EmptyMetric);
    }
    Ok(total / pixels as f64)
}

/// One class's row in a [`MetricsReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub iou: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

/// Evaluation summary. Ratios are rounded to 6 decimal places; `null`
/// marks an undefined (0/0) value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Names of the classes the means were taken over.
    pub class_set: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    pub mean_iou: Option<f64>,
    pub mean_f1: Option<f64>,
    pub pixel_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_entropy: Option<f64>,
    pub pixels: u64,
    pub undefined_policy: String,
}

pub const UNDEFINED_POLICY: &str = "undefined (0/0) per-class values are excluded from means";

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

impl MetricsReport {
    pub fn from_confusion(
        cm: &ConfusionMatrix,
        class_names: &[String],
        cross_entropy: Option<f64>,
    ) -> Result<Self> {
        if class_names.len() != cm.num_classes() {
            return Err(Error::invalid(format!(
                "{} class names for a {}-class matrix",
                class_names.len(),
                cm.num_classes()
            )));
        }
        let mut per_class = Vec::with_capacity(cm.num_classes());
        let (mut ious, mut f1s) = (Vec::new(), Vec::new());
        for (c, name) in class_names.iter().enumerate() {
            let iou = class_iou(cm, c)?;
            let s = precision_recall_f1(cm, c)?;
            ious.extend(iou);
            f1s.extend(s.f1);
            per_class.push(ClassMetrics {
                class: name.clone(),
                iou: iou.map(round6),
                precision: s.precision.map(round6),
                recall: s.recall.map(round6),
                f1: s.f1.map(round6),
            });
        }
        Ok(Self {
            class_set: class_names.to_vec(),
            per_class,
            mean_iou: mean(&ious).map(round6),
            mean_f1: mean(&f1s).map(round6),
            pixel_accuracy: pixel_accuracy(cm).map(round6),
            cross_entropy: cross_entropy.map(round6),
            pixels: cm.total(),
            undefined_policy: UNDEFINED_POLICY.to_owned(),
        })
    }

    /// Header matching [`MetricsReport::csv_row`].
    pub fn csv_header(&self, leading: &str) -> String {
        let mut h = format!("{leading},pixels,mean_iou,mean_f1,pixel_accuracy,cross_entropy");
        for c in &self.class_set {
            for m in ["iou", "precision", "recall", "f1"] {
                let _ = write!(h, ",{c}_{m}");
            }
        }
        h
    }

    /// Flat CSV row; undefined values are empty cells.
    pub fn csv_row(&self, leading: &str) -> String {
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        let mut row = format!(
            "{leading},{},{},{},{},{}",
            self.pixels,
            cell(self.mean_iou),
            cell(self.mean_f1),
            cell(self.pixel_accuracy),
            cell(self.cross_entropy)
        );
        for c in &self.per_class {
            for v in [c.iou, c.precision, c.recall, c.f1] {
                let _ = write!(row, ",{}", cell(v));
            }
        }
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(labels: &[u8], k: usize) -> SegMask {
        SegMask::new(labels.len(), 1, labels.to_vec(), k).unwrap()
    }

    #[test]
    fn confusion_example() {
        let cm = confusion(&mask(&[0, 1, 1, 1], 2), &mask(&[0, 0, 1, 1], 2)).unwrap();
        assert_eq!(cm.get(0, 0), 1);
        assert_eq!(cm.get(0, 1), 1);
        assert_eq!(cm.get(1, 1), 2);
        assert_eq!(cm.get(1, 0), 0);
    }

    #[test]
    fn identical_masks_are_diagonal() {
        let m = mask(&[0, 2, 1, 1, 2, 0, 0], 3);
        let cm = confusion(&m, &m).unwrap();
        assert_eq!(cm.trace(), 7);
        assert_eq!(cm.total(), 7);
    }

    #[test]
    fn confusion_shape_errors() {
        let a = SegMask::filled(2, 2, 0, 3).unwrap();
        let b = SegMask::filled(2, 3, 0, 3).unwrap();
        assert!(matches!(confusion(&a, &b), Err(Error::InvalidArgument(_))));
        let c = SegMask::filled(2, 2, 0, 4).unwrap();
        assert!(matches!(confusion(&a, &c), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn accumulate_rules() {
        let a = confusion(&mask(&[0, 1, 1, 1], 2), &mask(&[0, 0, 1, 1], 2)).unwrap();
        assert_eq!(accumulate(&a, &ConfusionMatrix::zeros(2)).unwrap(), a);
        let doubled = accumulate(&a, &a).unwrap();
        assert_eq!(doubled.counts(), &[2, 2, 0, 4]);
        assert!(matches!(
            accumulate(&a, &ConfusionMatrix::zeros(3)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn undefined_class_is_excluded() {
        // class 2 never appears
        let cm = confusion(&mask(&[0, 1, 1], 3), &mask(&[0, 1, 1], 3)).unwrap();
        assert_eq!(class_iou(&cm, 2).unwrap(), None);
        assert_eq!(mean_iou(&cm).unwrap(), 1.0);
        assert!(matches!(class_iou(&cm, 3), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            mean_iou(&ConfusionMatrix::zeros(3)),
            Err(Error::EmptyMetric)
        ));
    }

    #[test]
    fn total_miss_scores_zero_f1() {
        // truth has class 1, prediction never says 1
        let cm = confusion(&mask(&[0, 0, 0], 2), &mask(&[0, 1, 1], 2)).unwrap();
        let s = precision_recall_f1(&cm, 1).unwrap();
        assert_eq!(s.precision, None);
        assert_eq!(s.recall, Some(0.0));
        assert_eq!(s.f1, Some(0.0));
        assert_eq!(class_iou(&cm, 1).unwrap(), Some(0.0));
    }

    #[test]
    fn cross_entropy_examples() {
        let truth = mask(&[0, 1, 2], 3);
        let ce = cross_entropy(&[ProbMap::one_hot(&truth)], std::slice::from_ref(&truth), 1e-7).unwrap();
        assert_eq!(ce, 0.0);

        let one = mask(&[1], 2);
        let half = ProbMap::new(1, 1, 2, vec![0.5, 0.5]).unwrap();
        let ce = cross_entropy(&[half], &[one], 1e-7).unwrap();
        assert!((ce - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_floor_and_errors() {
        let one = mask(&[1], 2);
        let miss = ProbMap::new(1, 1, 2, vec![1.0, 0.0]).unwrap();
        let ce = cross_entropy(std::slice::from_ref(&miss), std::slice::from_ref(&one), 1e-7).unwrap();
        assert!((ce + 1e-7f64.ln()).abs() < 1e-12);
        assert!(cross_entropy(&[miss], &[one], 0.0).is_err());
        assert!(matches!(
            ProbMap::new(1, 1, 2, vec![0.6, 0.6]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(ProbMap::new(1, 1, 2, vec![1.2, -0.2]).is_err());
    }

    #[test]
    fn report_csv_shape() {
        let cm = confusion(&mask(&[0, 1, 1, 1], 2), &mask(&[0, 0, 1, 1], 2)).unwrap();
        let names = vec!["background".to_owned(), "vehicle".to_owned()];
        let r = MetricsReport::from_confusion(&cm, &names, None).unwrap();
        let header = r.csv_header("image");
        let row = r.csv_row("all");
        assert_eq!(header.split(',').count(), row.split(',').count());
        assert!(row.starts_with("all,4,0.583333,0.733333,0.750000,,"));
    }
}
