//! Token-level evaluation with `change` as the positive class and no
//! forgiveness collar: predictions must land on the exact token position.

use serde::{Deserialize, Serialize};

use crate::alignment::{align_conversation, SpeakerEmbeddingProvider};
use crate::corpus::{Conversation, Label};
use crate::decode::{
    beam_decode, change_scores, encode_eval, greedy_decode, DecodeConfig, DecodeMode,
};
use crate::error::{Error, Result};
use crate::fusion::Ablation;
use crate::model::ModelParameters;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Counts {
    pub fn add(&mut self, pred: Label, truth: Label) {
        match (pred, truth) {
            (Label::Change, Label::Change) => self.tp += 1,
            (Label::Change, Label::Same) => self.fp += 1,
            (Label::Same, Label::Change) => self.fn_ += 1,
            (Label::Same, Label::Same) => self.tn += 1,
        }
    }

    pub fn merge(&mut self, other: Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Precision/recall/F1 with undefined ratios reported as 0.
    pub fn prf1(&self) -> (f64, f64, f64) {
        let precision = if self.tp + self.fp == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        };
        let recall = if self.tp + self.fn_ == 0 {
            0.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        (precision, recall, f1)
    }
}

pub fn token_counts(preds: &[Label], labels: &[Label]) -> Result<Counts> {
    if preds.len() != labels.len() {
        return Err(Error::Shape(format!(
            "prf1: {} predictions vs {} labels",
            preds.len(),
            labels.len()
        )));
    }
    let mut counts = Counts::default();
    for (&p, &t) in preds.iter().zip(labels) {
        counts.add(p, t);
    }
    Ok(counts)
}

/// Exact-position precision, recall, and F1.
pub fn prf1(preds: &[Label], labels: &[Label]) -> Result<(f64, f64, f64)> {
    Ok(token_counts(preds, labels)?.prf1())
}

/// Equal error rate of change scores against binary labels.
///
/// Sweeps every distinct score as a `predict change when score >= theta`
/// threshold, tracks the false-alarm rate `fp/negatives` and miss rate
/// `fn/positives`, and linearly interpolates the crossing between the two
/// bracketing operating points.
pub fn eer(scores: &[f64], labels: &[Label]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "eer: {} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let positives = labels.iter().filter(|&&l| l == Label::Change).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::InvalidArg(
            "eer needs at least one positive and one negative label".into(),
        ));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("eer scores".into()));
    }

    // sort (score, is_positive) ascending; sweep the threshold upward
    let mut pairs: Vec<(f64, bool)> = scores
        .iter()
        .zip(labels)
        .map(|(&s, &l)| (s, l == Label::Change))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite scores"));

    let p = positives as f64;
    let n = negatives as f64;
    // operating point before any threshold passes: everything predicted
    // positive
    let mut far_prev = 1.0;
    let mut frr_prev = 0.0;
    let mut neg_passed = 0usize; // negatives with score <= current threshold
    let mut pos_passed = 0usize;
    let mut i = 0;
    while i < pairs.len() {
        let threshold = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == threshold {
            if pairs[i].1 {
                pos_passed += 1;
            } else {
                neg_passed += 1;
            }
            i += 1;
        }
        // theta just above `threshold`: scores <= threshold are negative
        let far = (negatives - neg_passed) as f64 / n;
        let frr = pos_passed as f64 / p;
        if far <= frr {
            if far == frr {
                return Ok(far);
            }
            // interpolate between (far_prev, frr_prev) and (far, frr)
            let t = (far_prev - frr_prev) / ((far_prev - frr_prev) - (far - frr));
            return Ok(far_prev + t * (far - far_prev));
        }
        far_prev = far;
        frr_prev = frr;
    }
    // the final operating point is (0, 1), so the loop always returns
    unreachable!("threshold sweep must cross");
}

/// Corpus-level evaluation report; counts pool over all conversations.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub eer: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub tokens: usize,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "precision,recall,f1,eer,tp,fp,fn,tn,tokens";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.precision,
            self.recall,
            self.f1,
            self.eer,
            self.tp,
            self.fp,
            self.fn_,
            self.tn,
            self.tokens
        )
    }
}

/// Decode and score every conversation, pooling token decisions and change
/// scores corpus-wide.
pub fn evaluate<P: SpeakerEmbeddingProvider>(
    corpus: &[Conversation],
    model: &ModelParameters,
    decode_cfg: &DecodeConfig,
    ablation: Ablation,
    provider: &P,
    window_s: f64,
    shift_s: f64,
) -> Result<EvalReport> {
    if corpus.is_empty() {
        return Err(Error::InvalidArg("evaluate: empty corpus".into()));
    }
    let mut counts = Counts::default();
    let mut pooled_scores = Vec::new();
    let mut pooled_labels = Vec::new();
    for conv in corpus {
        let (aligned, _) = align_conversation(conv, provider, window_s, shift_s)?;
        let labels = conv.labels();
        let enc = encode_eval(model, &aligned, ablation)?;
        let preds = match decode_cfg.mode {
            DecodeMode::Greedy => greedy_decode(model, &enc, labels.len())?,
            DecodeMode::Beam => beam_decode(model, &enc, labels.len(), decode_cfg.width)?,
        };
        counts.merge(token_counts(&preds, &labels)?);
        let scores = change_scores(model, &aligned, Some(&labels), ablation, decode_cfg.score_mode)?;
        pooled_scores.extend(scores);
        pooled_labels.extend(labels);
    }
    let (precision, recall, f1) = counts.prf1();
    let eer_value = eer(&pooled_scores, &pooled_labels)?;
    Ok(EvalReport {
        precision,
        recall,
        f1,
        eer: eer_value,
        tp: counts.tp,
        fp: counts.fp,
        fn_: counts.fn_,
        tn: counts.tn,
        tokens: counts.total(),
    })
}
