//! Classification scoring: confusion matrix, precision/recall/F-measure,
//! accuracy, Cohen's kappa, and positive/negative percentage tallies.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Label;
use crate::metrics::render_opt;

/// Two-class confusion matrix with `positive` as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Same matrix with `negative` treated as the positive class.
    pub fn swapped(&self) -> Self {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }

    pub fn record(&mut self, gold: Label, pred: Label) {
        match (gold, pred) {
            (Label::Positive, Label::Positive) => self.tp += 1,
            (Label::Negative, Label::Positive) => self.fp += 1,
            (Label::Positive, Label::Negative) => self.fn_ += 1,
            (Label::Negative, Label::Negative) => self.tn += 1,
        }
    }
}

pub fn confusion(golds: &[Label], preds: &[Label]) -> Result<ConfusionMatrix> {
    if golds.len() != preds.len() {
        return Err(Error::validation(
            None,
            format!(
                "{} gold labels but {} predictions",
                golds.len(),
                preds.len()
            ),
        ));
    }
    if golds.is_empty() {
        return Err(Error::validation(None, "no labels to compare"));
    }
    let mut m = ConfusionMatrix::default();
    for (&g, &p) in golds.iter().zip(preds) {
        m.record(g, p);
    }
    Ok(m)
}

/// Landis and Koch agreement bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaBand {
    Poor,
    Slight,
    Fair,
    Moderate,
    Substantial,
    AlmostPerfect,
}

impl KappaBand {
    pub fn of(kappa: f64) -> Self {
        if kappa < 0.0 {
            KappaBand::Poor
        } else if kappa <= 0.20 {
            KappaBand::Slight
        } else if kappa <= 0.40 {
            KappaBand::Fair
        } else if kappa <= 0.60 {
            KappaBand::Moderate
        } else if kappa <= 0.80 {
            KappaBand::Substantial
        } else {
            KappaBand::AlmostPerfect
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KappaBand::Poor => "poor",
            KappaBand::Slight => "slight",
            KappaBand::Fair => "fair",
            KappaBand::Moderate => "moderate",
            KappaBand::Substantial => "substantial",
            KappaBand::AlmostPerfect => "almost-perfect",
        }
    }
}

/// How precision and recall are summarized across the two classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Scores of the `positive` class only.
    #[default]
    Positive,
    /// Unweighted mean of per-class scores.
    Macro,
}

/// `None` marks a measure whose denominator is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f_measure: Option<f64>,
    pub accuracy: f64,
    pub kappa: Option<f64>,
    pub kappa_band: Option<KappaBand>,
    pub averaging: Averaging,
    pub confusion: ConfusionMatrix,
}

impl EvalReport {
    pub fn rows(&self) -> Vec<(&'static str, String)> {
        vec![
            ("precision", render_opt(self.precision)),
            ("recall", render_opt(self.recall)),
            ("f_measure", render_opt(self.f_measure)),
            ("accuracy", self.accuracy.to_string()),
            ("kappa", render_opt(self.kappa)),
            (
                "kappa_band",
                render_opt(self.kappa_band.map(KappaBand::as_str)),
            ),
        ]
    }

    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.rows() {
            let _ = writeln!(out, "{k}: {v}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn harmonic(p: Option<f64>, r: Option<f64>) -> Option<f64> {
    match (p, r) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    }
}

pub fn evaluate(m: &ConfusionMatrix) -> Result<EvalReport> {
    evaluate_with(m, Averaging::Positive)
}

pub fn evaluate_with(m: &ConfusionMatrix, averaging: Averaging) -> Result<EvalReport> {
    let total = m.total();
    if total == 0 {
        return Err(Error::validation(None, "confusion matrix is empty"));
    }
    let (precision, recall) = match averaging {
        Averaging::Positive => (ratio(m.tp, m.tp + m.fp), ratio(m.tp, m.tp + m.fn_)),
        Averaging::Macro => {
            let s = m.swapped();
            let mean = |a: Option<f64>, b: Option<f64>| Some((a? + b?) / 2.0);
            (
                mean(ratio(m.tp, m.tp + m.fp), ratio(s.tp, s.tp + s.fp)),
                mean(ratio(m.tp, m.tp + m.fn_), ratio(s.tp, s.tp + s.fn_)),
            )
        }
    };
    let n = total as f64;
    let accuracy = (m.tp + m.tn) as f64 / n;
    let gold_pos = (m.tp + m.fn_) as f64;
    let gold_neg = (m.fp + m.tn) as f64;
    let pred_pos = (m.tp + m.fp) as f64;
    let pred_neg = (m.fn_ + m.tn) as f64;
    let expected = (gold_pos * pred_pos + gold_neg * pred_neg) / (n * n);
    let kappa = if m.fp == 0 && m.fn_ == 0 {
        // Perfect agreement; also covers the single-class case where p_e = 1.
        Some(1.0)
    } else if expected < 1.0 {
        Some((accuracy - expected) / (1.0 - expected))
    } else {
        None
    };
    Ok(EvalReport {
        precision,
        recall,
        f_measure: harmonic(precision, recall),
        accuracy,
        kappa,
        kappa_band: kappa.map(KappaBand::of),
        averaging,
        confusion: *m,
    })
}

/// Positive and negative shares of a sentiment tally, held as hundredths of
/// a percent so the rendered pair always sums to 100.00.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentimentShare {
    pub positive: u64,
    pub negative: u64,
    pos_hundredths: u64,
}

impl SentimentShare {
    pub fn positive_pct(&self) -> f64 {
        self.pos_hundredths as f64 / 100.0
    }

    pub fn negative_pct(&self) -> f64 {
        (10_000 - self.pos_hundredths) as f64 / 100.0
    }

    pub fn render_positive(&self) -> String {
        render_hundredths(self.pos_hundredths)
    }

    pub fn render_negative(&self) -> String {
        render_hundredths(10_000 - self.pos_hundredths)
    }
}

fn render_hundredths(h: u64) -> String {
    format!("{}.{:02}%", h / 100, h % 100)
}

/// Percentages of positive and negative messages, rounded half-up to two
/// decimals; the negative share is the complement of the rounded positive.
pub fn sentiment_percentages(pos_count: u64, neg_count: u64) -> Result<SentimentShare> {
    let total = pos_count + neg_count;
    if total == 0 {
        return Err(Error::validation(None, "no labeled messages to tally"));
    }
    // round_half_up(10000 * pos / total) in integers.
    let pos_hundredths = (20_000 * pos_count + total) / (2 * total);
    Ok(SentimentShare {
        positive: pos_count,
        negative: neg_count,
        pos_hundredths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative as N, Positive as P};

    #[test]
    fn confusion_examples() {
        assert_eq!(
            confusion(&[P, P], &[P, N]).unwrap(),
            ConfusionMatrix::new(1, 0, 1, 0)
        );
        let same = confusion(&[P, N, N], &[P, N, N]).unwrap();
        assert_eq!((same.fp, same.fn_), (0, 0));
        assert!(confusion(&[P], &[P, N]).is_err());
        assert!(confusion(&[], &[]).is_err());
    }

    #[test]
    fn hundred_item_fixture() {
        let mut golds = vec![P; 60];
        golds.extend(vec![N; 40]);
        let mut preds = vec![P; 50];
        preds.extend(vec![N; 10]);
        preds.extend(vec![P; 5]);
        preds.extend(vec![N; 35]);
        assert_eq!(
            confusion(&golds, &preds).unwrap(),
            ConfusionMatrix::new(50, 5, 10, 35)
        );
    }

    #[test]
    fn reference_report() {
        let r = evaluate(&ConfusionMatrix::new(50, 5, 10, 35)).unwrap();
        let r4 = |x: f64| (x * 1e4).round() / 1e4;
        assert_eq!(r4(r.precision.unwrap()), 0.9091);
        assert_eq!(r4(r.recall.unwrap()), 0.8333);
        assert_eq!(r4(r.f_measure.unwrap()), 0.8696);
        assert_eq!(r.accuracy, 0.85);
        assert_eq!(r4(r.kappa.unwrap()), 0.6939);
        assert_eq!(r.kappa_band, Some(KappaBand::Substantial));
    }

    #[test]
    fn perfect_and_constant() {
        let r = evaluate(&ConfusionMatrix::new(7, 0, 0, 3)).unwrap();
        assert_eq!(
            (r.precision, r.recall, r.f_measure),
            (Some(1.0), Some(1.0), Some(1.0))
        );
        assert_eq!((r.accuracy, r.kappa), (1.0, Some(1.0)));
        let c = evaluate(&ConfusionMatrix::new(60, 40, 0, 0)).unwrap();
        assert!(c.kappa.unwrap().abs() < 1e-12);
    }

    #[test]
    fn undefined_measures() {
        let r = evaluate(&ConfusionMatrix::new(0, 0, 5, 5)).unwrap();
        assert_eq!(r.precision, None);
        assert_eq!(r.recall, Some(0.0));
        assert_eq!(r.f_measure, None);
        assert!(r.to_key_value().contains("precision: n/a"));
        assert!(evaluate(&ConfusionMatrix::default()).is_err());
    }

    #[test]
    fn macro_averaging() {
        let m = ConfusionMatrix::new(50, 5, 10, 35);
        let r = evaluate_with(&m, Averaging::Macro).unwrap();
        let p = (50.0 / 55.0 + 35.0 / 45.0) / 2.0;
        let rc = (50.0 / 60.0 + 35.0 / 40.0) / 2.0;
        assert!((r.precision.unwrap() - p).abs() < 1e-12);
        assert!((r.recall.unwrap() - rc).abs() < 1e-12);
        assert_eq!(r.kappa, evaluate(&m).unwrap().kappa);
    }

    #[test]
    fn kappa_bands() {
        assert_eq!(KappaBand::of(0.5), KappaBand::Moderate);
        assert_eq!(KappaBand::of(0.7), KappaBand::Substantial);
        assert_eq!(KappaBand::of(0.35), KappaBand::Fair);
        assert_eq!(KappaBand::of(0.9), KappaBand::AlmostPerfect);
        assert_eq!(KappaBand::of(-0.1), KappaBand::Poor);
    }

    #[test]
    fn percentages() {
        let s = sentiment_percentages(509, 905).unwrap();
        assert_eq!(
            (s.render_positive(), s.render_negative()),
            ("36.00%".into(), "64.00%".into())
        );
        let s = sentiment_percentages(1119, 423).unwrap();
        assert_eq!(
            (s.render_positive(), s.render_negative()),
            ("72.57%".into(), "27.43%".into())
        );
        let s = sentiment_percentages(0, 7).unwrap();
        assert_eq!(
            (s.render_positive(), s.render_negative()),
            ("0.00%".into(), "100.00%".into())
        );
        assert!(sentiment_percentages(0, 0).is_err());
    }

    #[test]
    fn percentages_round_half_up() {
        // 1/8 = 12.5% exactly; 1/16 = 6.25%; 1/32 = 3.125% -> 3.13%.
        assert_eq!(
            sentiment_percentages(1, 31).unwrap().render_positive(),
            "3.13%"
        );
        assert_eq!(
            sentiment_percentages(1, 31).unwrap().render_negative(),
            "96.87%"
        );
    }
}
