//! Classification metrics: confusion matrix, precision/recall/F1
//! (per-class, macro, micro), one-vs-rest ROC curves with per-class,
//! micro-, and macro-averaged AUC, and mean cross-entropy loss.

use crate::dataset::NUM_CLASSES;
use crate::{Error, Result};

/// Precision, recall, and F1 of one class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassPrf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// A one-vs-rest ROC curve: `(fpr, tpr)` points from (0, 0) to (1, 1)
/// with the score threshold that produced each point (`inf` for the
/// initial empty-positive point, `-inf` for the final all-positive one).
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub thresholds: Vec<f64>,
}

/// Everything the evaluation harness reports for one set of predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub n_samples: usize,
    /// Rows = true class, columns = predicted class.
    pub confusion: [[usize; NUM_CLASSES]; NUM_CLASSES],
    pub per_class: [ClassPrf; NUM_CLASSES],
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    /// One-vs-rest AUC per class; absent classes have no defined AUC.
    pub auc_per_class: [Option<f64>; NUM_CLASSES],
    pub auc_micro: f64,
    /// Unweighted mean over the defined per-class AUCs.
    pub auc_macro: f64,
    pub mean_loss: f64,
}

fn validate_labels(labels: &[u8]) -> Result<()> {
    for &l in labels {
        if !(1..=NUM_CLASSES as u8).contains(&l) {
            return Err(Error::Argument(format!(
                "label {l} out of range 1..={NUM_CLASSES}"
            )));
        }
    }
    Ok(())
}

/// Confusion matrix plus per-class and averaged precision/recall/F1.
///
/// Per class: `P = TP / (TP + FP)`, `R = TP / (TP + FN)` (0 when the
/// denominator is 0), `F1 = 2PR / (P + R)` (0 when `P + R = 0`). Macro
/// values are unweighted means over the four classes; micro values pool
/// all decisions (for single-label multiclass they all equal accuracy).
#[allow(clippy::type_complexity)]
pub fn confusion_and_f1(
    true_labels: &[u8],
    predicted_labels: &[u8],
) -> Result<(
    [[usize; NUM_CLASSES]; NUM_CLASSES],
    [ClassPrf; NUM_CLASSES],
    ClassPrf,
    ClassPrf,
)> {
    if true_labels.len() != predicted_labels.len() {
        return Err(Error::dim(
            "confusion_and_f1",
            true_labels.len(),
            predicted_labels.len(),
        ));
    }
    validate_labels(true_labels)?;
    validate_labels(predicted_labels)?;

    let mut confusion = [[0usize; NUM_CLASSES]; NUM_CLASSES];
    for (&t, &p) in true_labels.iter().zip(predicted_labels) {
        confusion[(t - 1) as usize][(p - 1) as usize] += 1;
    }

    let mut per_class = [ClassPrf::default(); NUM_CLASSES];
    let mut total_tp = 0usize;
    for c in 0..NUM_CLASSES {
        let tp = confusion[c][c];
        let fp: usize = (0..NUM_CLASSES).filter(|&r| r != c).map(|r| confusion[r][c]).sum();
        let fn_: usize = (0..NUM_CLASSES).filter(|&k| k != c).map(|k| confusion[c][k]).sum();
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class[c] = ClassPrf { precision, recall, f1 };
        total_tp += tp;
    }

    let macro_avg = ClassPrf {
        precision: per_class.iter().map(|m| m.precision).sum::<f64>() / NUM_CLASSES as f64,
        recall: per_class.iter().map(|m| m.recall).sum::<f64>() / NUM_CLASSES as f64,
        f1: per_class.iter().map(|m| m.f1).sum::<f64>() / NUM_CLASSES as f64,
    };
    // Pooled one-vs-rest decisions: micro P = micro R = accuracy.
    let accuracy = total_tp as f64 / true_labels.len().max(1) as f64;
    let micro_avg = ClassPrf {
        precision: accuracy,
        recall: accuracy,
        f1: accuracy,
    };
    Ok((confusion, per_class, macro_avg, micro_avg))
}

/// Binary ROC from `(score, is_positive)` pairs: threshold sweep over the
/// distinct scores (ties grouped into one step) with trapezoidal AUC.
/// Returns `None` when either class is empty.
fn binary_roc(pairs: &[(f64, bool)]) -> Option<(RocCurve, f64)> {
    let n_pos = pairs.iter().filter(|(_, p)| *p).count();
    let n_neg = pairs.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut sorted: Vec<(f64, bool)> = pairs.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite scores"));

    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0f64;
    let mut i = 0usize;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        let mut j = i;
        while j < sorted.len() && sorted[j].0 == threshold {
            if sorted[j].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        let prev = *points.last().expect("non-empty");
        let point = (fp as f64 / n_neg as f64, tp as f64 / n_pos as f64);
        auc += (point.0 - prev.0) * (point.1 + prev.1) / 2.0;
        points.push(point);
        thresholds.push(threshold);
        i = j;
    }
    // Explicit terminal point; the sweep already ends at (1, 1) so this
    // adds no area.
    points.push((1.0, 1.0));
    thresholds.push(f64::NEG_INFINITY);
    Some((RocCurve { points, thresholds }, auc))
}

/// One-vs-rest ROC analysis of an `n x 4` score matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RocAnalysis {
    pub curves: [Option<RocCurve>; NUM_CLASSES],
    pub auc_per_class: [Option<f64>; NUM_CLASSES],
    /// Pooled over all `n * 4` binary decisions.
    pub auc_micro: f64,
    /// Unweighted mean of the defined per-class AUCs.
    pub auc_macro: f64,
}

/// Per-class one-vs-rest ROC curves and AUCs, the pooled micro-average,
/// and the macro-average over classes present in `true_labels`.
pub fn roc_auc(scores: &[[f64; NUM_CLASSES]], true_labels: &[u8]) -> Result<RocAnalysis> {
    if scores.len() != true_labels.len() {
        return Err(Error::dim("roc_auc", true_labels.len(), scores.len()));
    }
    if scores.is_empty() {
        return Err(Error::Argument("roc_auc needs at least one sample".into()));
    }
    validate_labels(true_labels)?;
    for (i, row) in scores.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-4 {
            return Err(Error::Argument(format!(
                "score row {i} sums to {sum}, expected 1"
            )));
        }
    }

    let mut curves: [Option<RocCurve>; NUM_CLASSES] = [None, None, None, None];
    let mut auc_per_class: [Option<f64>; NUM_CLASSES] = [None; NUM_CLASSES];
    let mut pooled: Vec<(f64, bool)> = Vec::with_capacity(scores.len() * NUM_CLASSES);
    for c in 0..NUM_CLASSES {
        let pairs: Vec<(f64, bool)> = scores
            .iter()
            .zip(true_labels)
            .map(|(row, &label)| (row[c], label as usize == c + 1))
            .collect();
        pooled.extend_from_slice(&pairs);
        match binary_roc(&pairs) {
            Some((curve, auc)) => {
                curves[c] = Some(curve);
                auc_per_class[c] = Some(auc);
            }
            None => {
                log::warn!(
                    "class {} absent from true labels; its AUC is undefined and excluded from the macro average",
                    c + 1
                );
            }
        }
    }
    let defined: Vec<f64> = auc_per_class.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::Argument("no class has a defined AUC".into()));
    }
    let auc_macro = defined.iter().sum::<f64>() / defined.len() as f64;
    let (_, auc_micro) = binary_roc(&pooled).expect("pooled set has both classes");
    Ok(RocAnalysis {
        curves,
        auc_per_class,
        auc_micro,
        auc_macro,
    })
}

/// Mean of `-ln p_true` with the probability clamped below by 1e-12.
pub fn mean_cross_entropy(scores: &[[f64; NUM_CLASSES]], true_labels: &[u8]) -> Result<f64> {
    if scores.len() != true_labels.len() {
        return Err(Error::dim("mean_cross_entropy", true_labels.len(), scores.len()));
    }
    if scores.is_empty() {
        return Err(Error::Argument("mean_cross_entropy needs at least one sample".into()));
    }
    validate_labels(true_labels)?;
    let mut total = 0.0f64;
    for (row, &label) in scores.iter().zip(true_labels) {
        total += -(row[(label - 1) as usize].max(1e-12)).ln();
    }
    Ok(total / scores.len() as f64)
}

/// Predicted label per row: the 1-based argmax, first maximum winning ties.
pub fn argmax_labels(scores: &[[f64; NUM_CLASSES]]) -> Vec<u8> {
    scores
        .iter()
        .map(|row| {
            let mut best = 0usize;
            for c in 1..NUM_CLASSES {
                if row[c] > row[best] {
                    best = c;
                }
            }
            best as u8 + 1
        })
        .collect()
}

/// Full evaluation of a score matrix against true labels.
pub fn evaluate(scores: &[[f64; NUM_CLASSES]], true_labels: &[u8]) -> Result<MetricsReport> {
    let predicted = argmax_labels(scores);
    let (confusion, per_class, macro_avg, micro_avg) = confusion_and_f1(true_labels, &predicted)?;
    let roc = roc_auc(scores, true_labels)?;
    let mean_loss = mean_cross_entropy(scores, true_labels)?;
    Ok(MetricsReport {
        n_samples: true_labels.len(),
        confusion,
        per_class,
        macro_precision: macro_avg.precision,
        macro_recall: macro_avg.recall,
        macro_f1: macro_avg.f1,
        micro_precision: micro_avg.precision,
        micro_recall: micro_avg.recall,
        micro_f1: micro_avg.f1,
        auc_per_class: roc.auc_per_class,
        auc_micro: roc.auc_micro,
        auc_macro: roc.auc_macro,
        mean_loss,
    })
}

impl MetricsReport {
    /// Render as the documented `key=value` text block. Floats use
    /// shortest round-trip formatting, so equal reports render to equal
    /// bytes.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "n_samples={}", self.n_samples).unwrap();
        let rows: Vec<String> = self
            .confusion
            .iter()
            .map(|row| row.map(|v| v.to_string()).join(","))
            .collect();
        writeln!(s, "confusion={}", rows.join(";")).unwrap();
        for c in 0..NUM_CLASSES {
            writeln!(
                s,
                "precision_{}={}\nrecall_{}={}\nf1_{}={}",
                c + 1,
                self.per_class[c].precision,
                c + 1,
                self.per_class[c].recall,
                c + 1,
                self.per_class[c].f1
            )
            .unwrap();
        }
        writeln!(s, "macro_precision={}", self.macro_precision).unwrap();
        writeln!(s, "macro_recall={}", self.macro_recall).unwrap();
        writeln!(s, "macro_f1={}", self.macro_f1).unwrap();
        writeln!(s, "micro_precision={}", self.micro_precision).unwrap();
        writeln!(s, "micro_recall={}", self.micro_recall).unwrap();
        writeln!(s, "micro_f1={}", self.micro_f1).unwrap();
        for c in 0..NUM_CLASSES {
            match self.auc_per_class[c] {
                Some(auc) => writeln!(s, "auc_{}={}", c + 1, auc).unwrap(),
                None => writeln!(s, "auc_{}=-", c + 1).unwrap(),
            }
        }
        writeln!(s, "auc_micro={}", self.auc_micro).unwrap();
        writeln!(s, "auc_macro={}", self.auc_macro).unwrap();
        writeln!(s, "mean_loss={}", self.mean_loss).unwrap();
        s
    }

    /// True when every field is bitwise identical.
    pub fn bit_identical(&self, other: &MetricsReport) -> bool {
        let f = |a: f64, b: f64| a.to_bits() == b.to_bits();
        let opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (None, None) => true,
            (Some(x), Some(y)) => f(x, y),
            _ => false,
        };
        self.n_samples == other.n_samples
            && self.confusion == other.confusion
            && self
                .per_class
                .iter()
                .zip(&other.per_class)
                .all(|(x, y)| f(x.precision, y.precision) && f(x.recall, y.recall) && f(x.f1, y.f1))
            && f(self.macro_precision, other.macro_precision)
            && f(self.macro_recall, other.macro_recall)
            && f(self.macro_f1, other.macro_f1)
            && f(self.micro_f1, other.micro_f1)
            && self
                .auc_per_class
                .iter()
                .zip(&other.auc_per_class)
                .all(|(&x, &y)| opt(x, y))
            && f(self.auc_micro, other.auc_micro)
            && f(self.auc_macro, other.auc_macro)
            && f(self.mean_loss, other.mean_loss)
    }
}

/// Write ROC curves as CSV rows `class,threshold,fpr,tpr`.
pub fn write_roc_csv(path: &std::path::Path, analysis: &RocAnalysis) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "class,threshold,fpr,tpr")?;
    for (c, curve) in analysis.curves.iter().enumerate() {
        if let Some(curve) = curve {
            for (point, threshold) in curve.points.iter().zip(&curve.thresholds) {
                writeln!(out, "{},{},{},{}", c + 1, threshold, point.0, point.1)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Tie-corrected pairwise comparison statistic:
/// `P(score_pos > score_neg) + 0.5 * P(score_pos == score_neg)`.
/// Independent quadratic-time oracle for the trapezoidal AUC.
pub fn pairwise_auc_oracle(pairs: &[(f64, bool)]) -> Option<f64> {
    let pos: Vec<f64> = pairs.iter().filter(|(_, p)| *p).map(|(s, _)| *s).collect();
    let neg: Vec<f64> = pairs.iter().filter(|(_, p)| !*p).map(|(s, _)| *s).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut total = 0.0f64;
    for &p in &pos {
        for &n in &neg {
            if p > n {
                total += 1.0;
            } else if p == n {
                total += 0.5;
            }
        }
    }
    Some(total / (pos.len() * neg.len()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn one_hot(label: u8) -> [f64; 4] {
        let mut row = [0.0; 4];
        row[(label - 1) as usize] = 1.0;
        row
    }

    #[test]
    fn perfect_predictions_have_unit_metrics() {
        let labels: Vec<u8> = vec![1, 2, 3, 4, 1, 2, 3, 4];
        let scores: Vec<[f64; 4]> = labels.iter().map(|&l| one_hot(l)).collect();
        let report = evaluate(&scores, &labels).unwrap();
        assert_eq!(report.macro_f1, 1.0);
        assert_eq!(report.micro_f1, 1.0);
        for c in 0..4 {
            assert_eq!(report.per_class[c].f1, 1.0);
            assert_eq!(report.auc_per_class[c], Some(1.0));
        }
        assert_eq!(report.auc_micro, 1.0);
        assert_eq!(report.mean_loss, 0.0);
        let diag: usize = (0..4).map(|c| report.confusion[c][c]).sum();
        assert_eq!(diag, 8);
    }

    #[test]
    fn all_class1_predictions_on_balanced_set() {
        // Predicting class 1 on a balanced 4-class set: macro recall 0.25.
        let labels: Vec<u8> = vec![1, 1, 2, 2, 3, 3, 4, 4];
        let predicted = vec![1u8; 8];
        let (confusion, per_class, macro_avg, micro_avg) =
            confusion_and_f1(&labels, &predicted).unwrap();
        assert!((macro_avg.recall - 0.25).abs() < 1e-12);
        assert_eq!(confusion[0][0], 2);
        assert_eq!(confusion[1][0], 2);
        assert_eq!(per_class[1].recall, 0.0);
        assert!((micro_avg.f1 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn hand_built_confusion_matches_hand_computed_prf() {
        // True: 1 1 1 2 2 3 4 4; predicted: 1 2 1 2 2 3 4 1.
        let t = vec![1u8, 1, 1, 2, 2, 3, 4, 4];
        let p = vec![1u8, 2, 1, 2, 2, 3, 4, 1];
        let (confusion, per_class, macro_avg, _) = confusion_and_f1(&t, &p).unwrap();
        assert_eq!(confusion[0], [2, 1, 0, 0]);
        assert_eq!(confusion[3], [1, 0, 0, 1]);
        // Class 1: TP=2, FP=1, FN=1 -> P=2/3, R=2/3, F1=2/3.
        assert!((per_class[0].precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((per_class[0].recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((per_class[0].f1 - 2.0 / 3.0).abs() < 1e-12);
        // Class 2: TP=2, FP=1, FN=0 -> P=2/3, R=1, F1=0.8.
        assert!((per_class[1].f1 - 0.8).abs() < 1e-12);
        // Class 4: TP=1, FP=0, FN=1 -> P=1, R=1/2, F1=2/3.
        assert!((per_class[3].f1 - 2.0 / 3.0).abs() < 1e-12);
        let expected_macro_f1 = (2.0 / 3.0 + 0.8 + 1.0 + 2.0 / 3.0) / 4.0;
        assert!((macro_avg.f1 - expected_macro_f1).abs() < 1e-12);
        // F1 is the harmonic mean of its own P and R, per class.
        for m in &per_class {
            if m.precision + m.recall > 0.0 {
                let harmonic = 2.0 * m.precision * m.recall / (m.precision + m.recall);
                assert!((m.f1 - harmonic).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn label_out_of_range_is_an_error() {
        assert!(confusion_and_f1(&[5], &[1]).is_err());
        assert!(confusion_and_f1(&[1], &[0]).is_err());
        assert!(mean_cross_entropy(&[one_hot(1)], &[9]).is_err());
    }

    #[test]
    fn constant_scores_give_half_auc() {
        let labels = vec![1u8, 2, 3, 4, 1, 2];
        let scores = vec![[0.25, 0.25, 0.25, 0.25]; 6];
        let roc = roc_auc(&scores, &labels).unwrap();
        for c in 0..4 {
            assert_eq!(roc.auc_per_class[c], Some(0.5), "class {}", c + 1);
        }
        assert_eq!(roc.auc_micro, 0.5);
        assert_eq!(roc.auc_macro, 0.5);
    }

    #[test]
    fn absent_class_auc_is_undefined_and_excluded() {
        let labels = vec![1u8, 1, 2, 2];
        let scores = vec![
            [0.7, 0.1, 0.1, 0.1],
            [0.6, 0.2, 0.1, 0.1],
            [0.2, 0.6, 0.1, 0.1],
            [0.3, 0.5, 0.1, 0.1],
        ];
        let roc = roc_auc(&scores, &labels).unwrap();
        assert!(roc.auc_per_class[0].is_some());
        assert!(roc.auc_per_class[1].is_some());
        assert_eq!(roc.auc_per_class[2], None);
        assert_eq!(roc.auc_per_class[3], None);
        let expected = (roc.auc_per_class[0].unwrap() + roc.auc_per_class[1].unwrap()) / 2.0;
        assert!((roc.auc_macro - expected).abs() < 1e-15);
    }

    #[test]
    fn binary_collapse_matches_a_hand_example() {
        // 10 samples, classes 1 and 2 only. Class-1 scores:
        // pos: 0.9 0.8 0.8 0.6 0.4 / neg: 0.8 0.7 0.5 0.4 0.2.
        // Pairwise count: for each (pos, neg), pos>neg counts 1, ties 0.5:
        // 0.9 beats all 5; each 0.8 beats 4 + ties 1 (0.8) -> 4.5 each;
        // 0.6 beats 3; 0.4 beats 1 + tie 1 -> 1.5. Total = 18.5 / 25 = 0.74.
        let labels = vec![1u8, 1, 1, 1, 1, 2, 2, 2, 2, 2];
        let s1 = [0.9, 0.8, 0.8, 0.6, 0.4, 0.8, 0.7, 0.5, 0.4, 0.2];
        let scores: Vec<[f64; 4]> = s1.iter().map(|&s| [s, 1.0 - s, 0.0, 0.0]).collect();
        let roc = roc_auc(&scores, &labels).unwrap();
        assert!((roc.auc_per_class[0].unwrap() - 0.74).abs() < 1e-12);
        // The curve is a monotone staircase from (0,0) to (1,1).
        let curve = roc.curves[0].as_ref().unwrap();
        assert_eq!(curve.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(curve.points.last(), Some(&(1.0, 1.0)));
        for w in curve.points.windows(2) {
            assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn trapezoid_matches_pairwise_oracle_on_random_sets() {
        let mut rng = SplitMix64::new(31);
        for trial in 0..20 {
            let n = 20 + rng.next_index(180);
            let labels: Vec<u8> = (0..n).map(|_| rng.next_index(4) as u8 + 1).collect();
            let scores: Vec<[f64; 4]> = (0..n)
                .map(|_| {
                    // Coarse grid of scores forces plenty of ties.
                    let raw: Vec<f64> =
                        (0..4).map(|_| (rng.next_index(8) as f64) + 0.5).collect();
                    let total: f64 = raw.iter().sum();
                    [raw[0] / total, raw[1] / total, raw[2] / total, raw[3] / total]
                })
                .collect();
            let roc = roc_auc(&scores, &labels).unwrap();
            for c in 0..4 {
                let pairs: Vec<(f64, bool)> = scores
                    .iter()
                    .zip(&labels)
                    .map(|(row, &l)| (row[c], l as usize == c + 1))
                    .collect();
                match (roc.auc_per_class[c], pairwise_auc_oracle(&pairs)) {
                    (Some(got), Some(want)) => {
                        assert!(
                            (got - want).abs() < 1e-12,
                            "trial {trial} class {c}: {got} vs {want}"
                        );
                    }
                    (None, None) => {}
                    (got, want) => panic!("trial {trial} class {c}: {got:?} vs {want:?}"),
                }
            }
            // Micro too.
            let pooled: Vec<(f64, bool)> = (0..4)
                .flat_map(|c| {
                    scores
                        .iter()
                        .zip(&labels)
                        .map(move |(row, &l)| (row[c], l as usize == c + 1))
                })
                .collect();
            let want = pairwise_auc_oracle(&pooled).unwrap();
            assert!((roc.auc_micro - want).abs() < 1e-12);
        }
    }

    #[test]
    fn metrics_are_order_invariant() {
        let labels = vec![1u8, 2, 3, 4, 1, 2, 4, 3, 2, 1];
        let mut rng = SplitMix64::new(5);
        let scores: Vec<[f64; 4]> = labels
            .iter()
            .map(|_| {
                let raw: Vec<f64> = (0..4).map(|_| rng.next_f64() + 0.1).collect();
                let total: f64 = raw.iter().sum();
                [raw[0] / total, raw[1] / total, raw[2] / total, raw[3] / total]
            })
            .collect();
        let a = evaluate(&scores, &labels).unwrap();
        let perm = [7usize, 3, 0, 9, 4, 1, 8, 2, 6, 5];
        let scores_p: Vec<[f64; 4]> = perm.iter().map(|&i| scores[i]).collect();
        let labels_p: Vec<u8> = perm.iter().map(|&i| labels[i]).collect();
        let b = evaluate(&scores_p, &labels_p).unwrap();
        assert_eq!(a.confusion, b.confusion);
        assert!(a.bit_identical(&b) || {
            // Summation order inside the loss can differ; everything else
            // must match exactly and the loss to near round-off.
            (a.mean_loss - b.mean_loss).abs() < 1e-12
        });
    }

    #[test]
    fn mean_loss_examples() {
        let labels = vec![1u8, 2];
        let scores = vec![one_hot(1), one_hot(2)];
        assert_eq!(mean_cross_entropy(&scores, &labels).unwrap(), 0.0);
        let uniform = vec![[0.25; 4]; 3];
        let loss = mean_cross_entropy(&uniform, &[1, 2, 3]).unwrap();
        assert!((loss - 4.0f64.ln()).abs() < 1e-12);
        // Matches a per-sample summation oracle.
        let labels = vec![1u8, 3, 2];
        let scores = vec![
            [0.5, 0.2, 0.2, 0.1],
            [0.1, 0.1, 0.7, 0.1],
            [0.3, 0.4, 0.2, 0.1],
        ];
        let expected = (-(0.5f64.ln()) - 0.7f64.ln() - 0.4f64.ln()) / 3.0;
        assert!((mean_cross_entropy(&scores, &labels).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn report_text_is_stable_and_complete() {
        let labels = vec![1u8, 2, 3, 4];
        let scores: Vec<[f64; 4]> = labels.iter().map(|&l| one_hot(l)).collect();
        let report = evaluate(&scores, &labels).unwrap();
        let text = report.to_text();
        assert_eq!(text, report.to_text());
        for key in [
            "n_samples=",
            "confusion=",
            "macro_f1=",
            "micro_f1=",
            "auc_micro=",
            "auc_macro=",
            "mean_loss=",
        ] {
            assert!(text.contains(key), "missing {key} in report text");
        }
    }

    #[test]
    fn score_rows_must_sum_to_one() {
        let labels = vec![1u8];
        let scores = vec![[0.5, 0.5, 0.5, 0.5]];
        assert!(roc_auc(&scores, &labels).is_err());
    }
}
