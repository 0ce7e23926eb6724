//! Multinomial Naive Bayes sentiment model.
//!
//! Token occurrences (not document presence) are counted per class and
//! scored in log space with additive smoothing:
//!
//! ```text
//! score(c) = ln P(c) + sum_t ln[(count_c(t) + alpha) / (total_c + alpha * |V|)]
//! ```
//!
//! Equal scores resolve to `positive`.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{InteractionRecord, Label, LabeledDocument};
use crate::textprep::{preprocess, TokenPipelineConfig};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Stratified train/test split. Each class is shuffled with `seed` and its
/// first `floor(n * train_fraction)` documents go to training. Both halves
/// keep corpus order.
pub fn split(
    corpus: &[LabeledDocument],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledDocument>, Vec<LabeledDocument>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::validation(
            None,
            format!("train fraction {train_fraction} is not strictly between 0 and 1"),
        ));
    }
    if corpus.is_empty() {
        return Err(Error::Stratification("corpus is empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; corpus.len()];
    for label in Label::ALL {
        let mut idx: Vec<usize> = corpus
            .iter()
            .enumerate()
            .filter(|(_, d)| d.label == label)
            .map(|(i, _)| i)
            .collect();
        if idx.len() < 2 {
            return Err(Error::Stratification(format!(
                "class {label} has {} document(s); at least 2 are needed",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let n_train = (idx.len() as f64 * train_fraction).floor() as usize;
        for &i in &idx[..n_train] {
            in_train[i] = true;
        }
    }
    let (train, test): (Vec<_>, Vec<_>) = corpus.iter().zip(&in_train).partition(|(_, &t)| t);
    Ok((
        train.into_iter().map(|(d, _)| d.clone()).collect(),
        test.into_iter().map(|(d, _)| d.clone()).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentModel {
    pub(crate) version: u32,
    pub(crate) class_priors: BTreeMap<Label, f64>,
    pub(crate) class_doc_counts: BTreeMap<Label, u64>,
    pub(crate) token_counts: BTreeMap<Label, BTreeMap<String, u64>>,
    pub(crate) class_token_totals: BTreeMap<Label, u64>,
    pub(crate) vocabulary: BTreeSet<String>,
    pub(crate) smoothing_alpha: f64,
    pub(crate) pipeline_digest: String,
}

impl SentimentModel {
    pub fn prior(&self, label: Label) -> f64 {
        self.class_priors.get(&label).copied().unwrap_or(0.0)
    }

    pub fn token_count(&self, label: Label, token: &str) -> u64 {
        self.token_counts
            .get(&label)
            .and_then(|m| m.get(token))
            .copied()
            .unwrap_or(0)
    }

    pub fn class_token_total(&self, label: Label) -> u64 {
        self.class_token_totals.get(&label).copied().unwrap_or(0)
    }

    pub fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }

    pub fn alpha(&self) -> f64 {
        self.smoothing_alpha
    }

    pub fn pipeline_digest(&self) -> &str {
        &self.pipeline_digest
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialization is infallible")
    }

    /// Loads a model, refusing it when it was trained under a different
    /// token pipeline than `cfg`.
    pub fn from_json(text: &str, cfg: &TokenPipelineConfig) -> Result<Self> {
        let model: SentimentModel = serde_json::from_str(text)?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported model version {} (expected {MODEL_FORMAT_VERSION})",
                model.version
            )));
        }
        let active = cfg.digest();
        if model.pipeline_digest != active {
            return Err(Error::Model(format!(
                "model pipeline digest {} does not match active pipeline {active}",
                model.pipeline_digest
            )));
        }
        model.check_invariants().map_err(Error::Model)?;
        Ok(model)
    }

    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let prior_sum: f64 = self.class_priors.values().sum();
        if (prior_sum - 1.0).abs() > 1e-12 {
            return Err(format!("class priors sum to {prior_sum}"));
        }
        let keys: BTreeSet<&String> = self.token_counts.values().flat_map(|m| m.keys()).collect();
        if keys.len() != self.vocabulary.len() || !keys.iter().all(|k| self.vocabulary.contains(*k))
        {
            return Err("vocabulary differs from the union of class token keys".into());
        }
        for label in Label::ALL {
            let sum: u64 = self
                .token_counts
                .get(&label)
                .map_or(0, |m| m.values().sum());
            if sum != self.class_token_total(label) {
                return Err(format!("token total for {label} does not match its counts"));
            }
        }
        if !(self.smoothing_alpha >= 0.0 && self.smoothing_alpha.is_finite()) {
            return Err(format!("invalid smoothing alpha {}", self.smoothing_alpha));
        }
        Ok(())
    }

    /// Log score of `label` for already-preprocessed tokens.
    pub fn log_score(&self, label: Label, tokens: &[String]) -> f64 {
        let alpha = self.smoothing_alpha;
        let denom =
            (self.class_token_total(label) as f64 + alpha * self.vocabulary.len() as f64).ln();
        let counts = self.token_counts.get(&label);
        tokens.iter().fold(self.prior(label).ln(), |acc, t| {
            let c = counts.and_then(|m| m.get(t)).copied().unwrap_or(0) as f64;
            acc + (c + alpha).ln() - denom
        })
    }

    /// Classifies preprocessed tokens.
    pub fn predict_tokens(&self, tokens: &[String]) -> Prediction {
        let pos = self.log_score(Label::Positive, tokens);
        let neg = self.log_score(Label::Negative, tokens);
        // NaN never wins; equal scores go to positive.
        let label = if pos >= neg || neg.is_nan() {
            Label::Positive
        } else {
            Label::Negative
        };
        let (chosen, other) = match label {
            Label::Positive => (pos, neg),
            Label::Negative => (neg, pos),
        };
        let confidence = if chosen == other {
            0.5
        } else if other == f64::NEG_INFINITY {
            1.0
        } else {
            1.0 / (1.0 + (other - chosen).exp())
        };
        Prediction {
            label,
            log_scores: [(Label::Positive, pos), (Label::Negative, neg)]
                .into_iter()
                .collect(),
            confidence,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub log_scores: BTreeMap<Label, f64>,
    /// Normalized posterior probability of `label`.
    pub confidence: f64,
}

/// Fits a model on `train_docs`. Both classes must be present and at least
/// one token must survive preprocessing.
pub fn train(
    train_docs: &[LabeledDocument],
    cfg: &TokenPipelineConfig,
    alpha: f64,
) -> Result<SentimentModel> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Training(format!(
            "smoothing alpha {alpha} must be finite and >= 0"
        )));
    }
    let mut class_doc_counts: BTreeMap<Label, u64> = Label::ALL.iter().map(|&l| (l, 0)).collect();
    let mut token_counts: BTreeMap<Label, BTreeMap<String, u64>> =
        Label::ALL.iter().map(|&l| (l, BTreeMap::new())).collect();
    let mut class_token_totals: BTreeMap<Label, u64> = Label::ALL.iter().map(|&l| (l, 0)).collect();

    for doc in train_docs {
        *class_doc_counts.entry(doc.label).or_default() += 1;
        let counts = token_counts.entry(doc.label).or_default();
        for tok in preprocess(&doc.text, cfg) {
            *counts.entry(tok).or_default() += 1;
            *class_token_totals.entry(doc.label).or_default() += 1;
        }
    }
    if let Some((missing, _)) = class_doc_counts.iter().find(|(_, &n)| n == 0) {
        return Err(Error::Training(format!(
            "no training documents for class {missing}"
        )));
    }
    if class_token_totals.values().all(|&t| t == 0) {
        return Err(Error::Training("no tokens survive preprocessing".into()));
    }
    let total_docs = train_docs.len() as f64;
    let class_priors = class_doc_counts
        .iter()
        .map(|(&l, &n)| (l, n as f64 / total_docs))
        .collect();
    let vocabulary = token_counts
        .values()
        .flat_map(|m| m.keys().cloned())
        .collect();
    let model = SentimentModel {
        version: MODEL_FORMAT_VERSION,
        class_priors,
        class_doc_counts,
        token_counts,
        class_token_totals,
        vocabulary,
        smoothing_alpha: alpha,
        pipeline_digest: cfg.digest(),
    };
    debug_assert_eq!(model.check_invariants(), Ok(()));
    Ok(model)
}

pub fn predict(model: &SentimentModel, text: &str, cfg: &TokenPipelineConfig) -> Prediction {
    model.predict_tokens(&preprocess(text, cfg))
}

/// Predicts every record, keeping input order.
pub fn label_corpus(
    model: &SentimentModel,
    records: &[InteractionRecord],
    cfg: &TokenPipelineConfig,
) -> Vec<(String, Prediction)> {
    records
        .par_iter()
        .map(|r| (r.id.clone(), predict(model, &r.text, cfg)))
        .collect()
}
