//! Fixed-length inference: greedy decoding, beam search that keeps every
//! hypothesis while the expansion still fits the beam width, and per-token
//! change probabilities for threshold metrics.
//!
//! Decoding runs on a raw incremental path with cached self- and
//! cross-attention keys/values; the graph-based teacher-forced forward
//! serves as its independent cross-check in tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::AlignedSequence;
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::fusion::{positional_encoding, Ablation};
use crate::graph::Graph;
use crate::kernels;
use crate::model::{
    Forward, ModelParameters, CLASS_CHANGE, CLASS_SAME, NUM_CLASSES, ROW_BOS, table_row_of,
};
use crate::tensor::Tensor;

/// How a corpus is decoded during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    #[default]
    Greedy,
    Beam,
}

/// Which conditioning produces the change scores fed into EER.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    #[default]
    TeacherForced,
    Autoregressive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DecodeConfig {
    pub mode: DecodeMode,
    pub width: usize,
    pub score_mode: ScoreMode,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            mode: DecodeMode::Greedy,
            width: 100,
            score_mode: ScoreMode::TeacherForced,
        }
    }
}

/// Partial decoded sequence with its cumulative log-probability.
#[derive(Debug, Clone)]
pub struct Hypothesis {
    pub labels: Vec<Label>,
    pub score: f64,
}

/// Run the encoder once in evaluation mode and take its hidden states.
pub fn encode_eval(
    model: &ModelParameters,
    aligned: &AlignedSequence,
    ablation: Ablation,
) -> Result<Tensor> {
    let mut g = Graph::new();
    let fwd = Forward::new(&mut g, model, false, ablation);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let hidden = fwd.encode(&mut g, aligned, &mut rng)?;
    Ok(g.value(hidden).clone())
}

fn matvec(row: &[f64], w: &Tensor) -> Vec<f64> {
    kernels::matmul(row, w.data(), 1, w.shape()[0], w.shape()[1])
}

fn add_bias(mut v: Vec<f64>, b: &Tensor) -> Vec<f64> {
    for (x, y) in v.iter_mut().zip(b.data()) {
        *x += y;
    }
    v
}

fn layer_norm_row(row: &[f64], gain: &[f64], bias: &[f64], eps: f64) -> Vec<f64> {
    let c = row.len() as f64;
    let mean = row.iter().sum::<f64>() / c;
    let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / c;
    let rstd = 1.0 / (var + eps).sqrt();
    row.iter()
        .enumerate()
        .map(|(j, v)| (v - mean) * rstd * gain[j] + bias[j])
        .collect()
}

/// Single-query multi-head attention over cached key/value rows.
fn cached_attention(
    heads: usize,
    d: usize,
    q_row: &[f64],
    keys: &[f64],
    values: &[f64],
    rows: usize,
    wo: &Tensor,
    bo: &Tensor,
) -> Vec<f64> {
    let hd = d / heads;
    let scale = 1.0 / (hd as f64).sqrt();
    let mut merged = vec![0.0; d];
    let mut scores = vec![0.0; rows];
    for h in 0..heads {
        let off = h * hd;
        for (r, s) in scores.iter_mut().enumerate() {
            *s = kernels::dot(&q_row[off..off + hd], &keys[r * d + off..r * d + off + hd]) * scale;
        }
        kernels::softmax_row_in_place(&mut scores, None);
        for (r, &w) in scores.iter().enumerate() {
            let vrow = &values[r * d + off..r * d + off + hd];
            for j in 0..hd {
                merged[off + j] += w * vrow[j];
            }
        }
    }
    add_bias(matvec(&merged, wo), bo)
}

struct LayerCache {
    /// Cached self-attention keys/values, one `model_dim` row per decoded
    /// position.
    self_k: Vec<f64>,
    self_v: Vec<f64>,
    /// Cross-attention keys/values over the encoder output, fixed.
    cross_k: Vec<f64>,
    cross_v: Vec<f64>,
}

/// Incremental decoder: one forward step per fed label, reusing cached
/// attention state. Cloning a state forks a beam hypothesis.
pub struct DecoderState<'m> {
    model: &'m ModelParameters,
    enc_len: usize,
    layers: Vec<LayerCache>,
    steps: usize,
}

impl Clone for DecoderState<'_> {
    fn clone(&self) -> Self {
        DecoderState {
            model: self.model,
            enc_len: self.enc_len,
            layers: self
                .layers
                .iter()
                .map(|l| LayerCache {
                    self_k: l.self_k.clone(),
                    self_v: l.self_v.clone(),
                    cross_k: l.cross_k.clone(),
                    cross_v: l.cross_v.clone(),
                })
                .collect(),
            steps: self.steps,
        }
    }
}

/// Decoder input at one step: the sequence start marker or a fed-back label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderInput {
    Bos,
    Label(Label),
}

impl<'m> DecoderState<'m> {
    pub fn new(model: &'m ModelParameters, enc_hidden: &Tensor) -> Result<Self> {
        let d = model.config.model_dim;
        if enc_hidden.shape().len() != 2 || enc_hidden.shape()[1] != d {
            return Err(Error::Shape(format!(
                "decoder: encoder output shape {:?}, expected [*, {d}]",
                enc_hidden.shape()
            )));
        }
        let enc_len = enc_hidden.shape()[0];
        if enc_len == 0 {
            return Err(Error::InvalidArg("decoder: empty encoder output".into()));
        }
        let p = &model.params;
        let mut layers = Vec::with_capacity(model.config.dec_layers);
        for i in 0..model.config.dec_layers {
            let wk = p.get(&format!("dec.{i}.cross_attn.wk")).unwrap();
            let bk = p.get(&format!("dec.{i}.cross_attn.bk")).unwrap();
            let wv = p.get(&format!("dec.{i}.cross_attn.wv")).unwrap();
            let bv = p.get(&format!("dec.{i}.cross_attn.bv")).unwrap();
            let mut cross_k = kernels::matmul(enc_hidden.data(), wk.data(), enc_len, d, d);
            let mut cross_v = kernels::matmul(enc_hidden.data(), wv.data(), enc_len, d, d);
            for r in 0..enc_len {
                for j in 0..d {
                    cross_k[r * d + j] += bk.data()[j];
                    cross_v[r * d + j] += bv.data()[j];
                }
            }
            layers.push(LayerCache {
                self_k: Vec::new(),
                self_v: Vec::new(),
                cross_k,
                cross_v,
            });
        }
        Ok(DecoderState {
            model,
            enc_len,
            layers,
            steps: 0,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Feed one input and return the `[same, change, eos]` logits for the
    /// next position.
    pub fn step(&mut self, input: DecoderInput) -> Result<Vec<f64>> {
        let model = self.model;
        let cfg = &model.config;
        let p = &model.params;
        let d = cfg.model_dim;
        let emb_dim = cfg.label_emb_dim;

        let table = p.get("label_table").unwrap();
        let row_idx = match input {
            DecoderInput::Bos => ROW_BOS,
            DecoderInput::Label(l) => table_row_of(l),
        };
        let mut row = table.data()[row_idx * emb_dim..(row_idx + 1) * emb_dim].to_vec();
        kernels::normalize_row_sqrt_dim(&mut row);

        // projection -> gelu -> positional encoding (dropout is train-only)
        let w = p.get("fusion.dec.weight").unwrap();
        let b = p.get("fusion.dec.bias").unwrap();
        let mut x = add_bias(matvec(&row, w), b);
        for v in x.iter_mut() {
            *v = kernels::gelu(*v);
        }
        let pe = positional_encoding(self.steps, d)?;
        for (v, e) in x.iter_mut().zip(&pe) {
            *v += e;
        }

        let heads = cfg.heads;
        let enc_len = self.enc_len;
        for (i, cache) in self.layers.iter_mut().enumerate() {
            let ln = |suffix: &str, input_row: &[f64]| -> Vec<f64> {
                let gain = p.get(&format!("dec.{i}.{suffix}.gain")).unwrap();
                let bias = p.get(&format!("dec.{i}.{suffix}.bias")).unwrap();
                layer_norm_row(input_row, gain.data(), bias.data(), 1e-5)
            };

            // causal self-attention over all cached positions plus this one
            let h = ln("ln1", &x);
            let pa = |n: &str| p.get(&format!("dec.{i}.self_attn.{n}")).unwrap();
            let q = add_bias(matvec(&h, pa("wq")), pa("bq"));
            let k = add_bias(matvec(&h, pa("wk")), pa("bk"));
            let v = add_bias(matvec(&h, pa("wv")), pa("bv"));
            cache.self_k.extend_from_slice(&k);
            cache.self_v.extend_from_slice(&v);
            let rows = cache.self_k.len() / d;
            let attn = cached_attention(
                heads,
                d,
                &q,
                &cache.self_k,
                &cache.self_v,
                rows,
                pa("wo"),
                pa("bo"),
            );
            for (xv, av) in x.iter_mut().zip(&attn) {
                *xv += av;
            }

            // full cross-attention over the encoder output
            let h = ln("ln2", &x);
            let pc = |n: &str| p.get(&format!("dec.{i}.cross_attn.{n}")).unwrap();
            let q = add_bias(matvec(&h, pc("wq")), pc("bq"));
            let cross = cached_attention(
                heads,
                d,
                &q,
                &cache.cross_k,
                &cache.cross_v,
                enc_len,
                pc("wo"),
                pc("bo"),
            );
            for (xv, av) in x.iter_mut().zip(&cross) {
                *xv += av;
            }

            // feed-forward
            let h = ln("ln3", &x);
            let w1 = p.get(&format!("dec.{i}.ff.w1")).unwrap();
            let b1 = p.get(&format!("dec.{i}.ff.b1")).unwrap();
            let w2 = p.get(&format!("dec.{i}.ff.w2")).unwrap();
            let b2 = p.get(&format!("dec.{i}.ff.b2")).unwrap();
            let mut ffh = add_bias(matvec(&h, w1), b1);
            for v in ffh.iter_mut() {
                *v = kernels::gelu(*v);
            }
            let ffo = add_bias(matvec(&ffh, w2), b2);
            for (xv, av) in x.iter_mut().zip(&ffo) {
                *xv += av;
            }
        }

        let gain = p.get("dec.final_ln.gain").unwrap();
        let bias = p.get("dec.final_ln.bias").unwrap();
        let x = layer_norm_row(&x, gain.data(), bias.data(), 1e-5);
        let hw = p.get("head.weight").unwrap();
        let hb = p.get("head.bias").unwrap();
        let logits = add_bias(matvec(&x, hw), hb);

        self.steps += 1;
        Ok(logits)
    }
}

/// Probabilities over `{same, change}` after masking the eos logit to -inf
/// and renormalizing.
pub fn masked_binary_probs(logits: &[f64]) -> (f64, f64) {
    debug_assert_eq!(logits.len(), NUM_CLASSES);
    let m = logits[CLASS_SAME].max(logits[CLASS_CHANGE]);
    let es = (logits[CLASS_SAME] - m).exp();
    let ec = (logits[CLASS_CHANGE] - m).exp();
    let sum = es + ec;
    (es / sum, ec / sum)
}

/// Greedy fixed-length decoding: eos is masked at every step, ties resolve
/// to `same`. Returns the labels and the per-step `p(change)`.
pub fn greedy_decode_with_scores(
    model: &ModelParameters,
    enc_hidden: &Tensor,
    length: usize,
) -> Result<(Vec<Label>, Vec<f64>)> {
    if length == 0 {
        return Err(Error::InvalidArg("greedy_decode: length must be >= 1".into()));
    }
    let mut state = DecoderState::new(model, enc_hidden)?;
    let mut labels = Vec::with_capacity(length);
    let mut scores = Vec::with_capacity(length);
    let mut input = DecoderInput::Bos;
    for _ in 0..length {
        let logits = state.step(input)?;
        let (p_same, p_change) = masked_binary_probs(&logits);
        let label = if p_change > p_same {
            Label::Change
        } else {
            Label::Same
        };
        labels.push(label);
        scores.push(p_change);
        input = DecoderInput::Label(label);
    }
    Ok((labels, scores))
}

pub fn greedy_decode(
    model: &ModelParameters,
    enc_hidden: &Tensor,
    length: usize,
) -> Result<Vec<Label>> {
    greedy_decode_with_scores(model, enc_hidden, length).map(|(labels, _)| labels)
}

fn label_rank(l: Label) -> u8 {
    match l {
        Label::Same => 0,
        Label::Change => 1,
    }
}

/// Deterministic hypothesis order: higher score first, then lexicographic
/// labels with `same` before `change`.
fn hypothesis_order(a: &(Vec<Label>, f64), b: &(Vec<Label>, f64)) -> std::cmp::Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then_with(|| {
            a.0.iter()
                .map(|&l| label_rank(l))
                .cmp(b.0.iter().map(|&l| label_rank(l)))
        })
}

/// Beam search over the two labels with fixed output length.
///
/// All hypotheses are kept while the expanded count `2^t` still fits the
/// beam width; only then does pruning to the top `width` begin. Scores are
/// cumulative logs of the eos-masked, renormalized binary probabilities.
pub fn beam_decode(
    model: &ModelParameters,
    enc_hidden: &Tensor,
    length: usize,
    width: usize,
) -> Result<Vec<Label>> {
    if width < 1 {
        return Err(Error::InvalidArg(format!("beam width {width} < 1")));
    }
    if length == 0 {
        return Err(Error::InvalidArg("beam_decode: length must be >= 1".into()));
    }

    struct Beam<'m> {
        labels: Vec<Label>,
        score: f64,
        state: DecoderState<'m>,
        p_same: f64,
        p_change: f64,
    }

    let mut root_state = DecoderState::new(model, enc_hidden)?;
    let logits = root_state.step(DecoderInput::Bos)?;
    let (p_same, p_change) = masked_binary_probs(&logits);
    let mut beams = vec![Beam {
        labels: Vec::new(),
        score: 0.0,
        state: root_state,
        p_same,
        p_change,
    }];

    for t in 1..=length {
        let mut expanded: Vec<Beam> = Vec::with_capacity(beams.len() * 2);
        for beam in beams {
            for label in [Label::Same, Label::Change] {
                let p = match label {
                    Label::Same => beam.p_same,
                    Label::Change => beam.p_change,
                };
                let score = beam.score + p.max(1e-300).ln();
                let mut labels = beam.labels.clone();
                labels.push(label);
                let (state, np_same, np_change) = if t < length {
                    let mut state = beam.state.clone();
                    let logits = state.step(DecoderInput::Label(label))?;
                    let (a, b) = masked_binary_probs(&logits);
                    (state, a, b)
                } else {
                    (beam.state.clone(), 0.0, 0.0)
                };
                expanded.push(Beam {
                    labels,
                    score,
                    state,
                    p_same: np_same,
                    p_change: np_change,
                });
            }
        }
        // keep everything while 2^t fits inside the width
        let keep_all = t < usize::BITS as usize && (1usize << t) <= width;
        if !keep_all && expanded.len() > width {
            expanded.sort_by(|a, b| {
                hypothesis_order(&(a.labels.clone(), a.score), &(b.labels.clone(), b.score))
            });
            expanded.truncate(width);
        }
        beams = expanded;
    }

    let mut finished: Vec<(Vec<Label>, f64)> = beams
        .into_iter()
        .map(|b| (b.labels, b.score))
        .collect();
    finished.sort_by(hypothesis_order);
    Ok(finished.remove(0).0)
}

/// Per-token `p(change)` after eos-mask renormalization.
///
/// Teacher-forced mode conditions each step on the ground-truth prefix via
/// the graph forward; autoregressive mode conditions on the model's own
/// greedy prefix.
pub fn change_scores(
    model: &ModelParameters,
    aligned: &AlignedSequence,
    labels: Option<&[Label]>,
    ablation: Ablation,
    mode: ScoreMode,
) -> Result<Vec<f64>> {
    match mode {
        ScoreMode::TeacherForced => {
            let labels = labels.ok_or_else(|| {
                Error::InvalidArg("teacher-forced scores require ground-truth labels".into())
            })?;
            let mut g = Graph::new();
            let fwd = Forward::new(&mut g, model, false, ablation);
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let logits = fwd.teacher_forced_logits(&mut g, aligned, labels, &mut rng)?;
            let t = g.value(logits);
            Ok((0..labels.len())
                .map(|i| masked_binary_probs(t.row(i)).1)
                .collect())
        }
        ScoreMode::Autoregressive => {
            let enc = encode_eval(model, aligned, ablation)?;
            let (_, scores) = greedy_decode_with_scores(model, &enc, aligned.len())?;
            Ok(scores)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::{align_conversation, SyntheticProvider};
    use crate::corpus::{generate, CorpusConfig};
    use crate::model::{init_model, targets_with_eos, ModelConfig};

    fn setup(seed: u64, num_words: usize) -> (ModelParameters, AlignedSequence, Vec<Label>) {
        let config = CorpusConfig {
            num_words,
            seed,
            ..CorpusConfig::default()
        };
        let conv = generate(&config).unwrap();
        let provider = SyntheticProvider::new(0.1, seed);
        let (aligned, _) = align_conversation(&conv, &provider, 1.5, 0.5).unwrap();
        let model = init_model(&ModelConfig::tiny(seed)).unwrap();
        (model, aligned, conv.labels())
    }

    /// The incremental cached decoder must agree with the graph-based
    /// teacher-forced forward when fed the same prefix.
    #[test]
    fn incremental_decoder_matches_graph_forward() {
        let (model, aligned, labels) = setup(3, 6);
        let enc = encode_eval(&model, &aligned, Ablation::None).unwrap();

        let mut g = Graph::new();
        let fwd = Forward::new(&mut g, &model, false, Ablation::None);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tf = fwd
            .teacher_forced_logits(&mut g, &aligned, &labels, &mut rng)
            .unwrap();
        let tf_logits = g.value(tf);

        let mut state = DecoderState::new(&model, &enc).unwrap();
        let mut input = DecoderInput::Bos;
        for (i, &label) in labels.iter().enumerate() {
            let step_logits = state.step(input).unwrap();
            for (a, b) in step_logits.iter().zip(tf_logits.row(i)) {
                assert!(
                    (a - b).abs() < 1e-9,
                    "position {i}: incremental {a} vs graph {b}"
                );
            }
            input = DecoderInput::Label(label);
        }
    }

    #[test]
    fn greedy_shape_and_no_eos() {
        let (model, aligned, _) = setup(5, 4);
        let enc = encode_eval(&model, &aligned, Ablation::None).unwrap();
        let labels = greedy_decode(&model, &enc, 4).unwrap();
        assert_eq!(labels.len(), 4);
        let one = greedy_decode(&model, &enc, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert!(greedy_decode(&model, &enc, 0).is_err());
    }

    #[test]
    fn beam_width_one_equals_greedy() {
        for seed in 0..25 {
            let (model, aligned, _) = setup(seed, 5);
            let enc = encode_eval(&model, &aligned, Ablation::None).unwrap();
            let g = greedy_decode(&model, &enc, 5).unwrap();
            let b = beam_decode(&model, &enc, 5, 1).unwrap();
            assert_eq!(g, b, "seed {seed}");
        }
    }

    /// Exhaustive oracle: score every 2^L sequence through the graph-based
    /// teacher-forced forward and pick the argmax.
    fn exhaustive_best(
        model: &ModelParameters,
        aligned: &AlignedSequence,
        length: usize,
    ) -> Vec<Label> {
        let mut best: Option<(Vec<Label>, f64)> = None;
        for bits in 0..(1usize << length) {
            let candidate: Vec<Label> = (0..length)
                .map(|i| {
                    if bits >> i & 1 == 1 {
                        Label::Change
                    } else {
                        Label::Same
                    }
                })
                .collect();
            let mut g = Graph::new();
            let fwd = Forward::new(&mut g, model, false, Ablation::None);
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let logits = fwd
                .teacher_forced_logits(&mut g, aligned, &candidate, &mut rng)
                .unwrap();
            let t = g.value(logits);
            let mut score = 0.0;
            for (i, &label) in candidate.iter().enumerate() {
                let (p_same, p_change) = masked_binary_probs(t.row(i));
                let p = if label == Label::Change { p_change } else { p_same };
                score += p.max(1e-300).ln();
            }
            let better = match &best {
                None => true,
                Some((cur, cur_score)) => {
                    score > *cur_score
                        || (score == *cur_score
                            && candidate
                                .iter()
                                .map(|&l| label_rank(l))
                                .cmp(cur.iter().map(|&l| label_rank(l)))
                                == std::cmp::Ordering::Less)
                }
            };
            if better {
                best = Some((candidate, score));
            }
        }
        best.unwrap().0
    }

    #[test]
    fn wide_beam_equals_exhaustive_search() {
        for (seed, len) in [(0u64, 4usize), (1, 5), (2, 6)] {
            let (model, aligned, _) = setup(seed + 40, len);
            let enc = encode_eval(&model, &aligned, Ablation::None).unwrap();
            let beam = beam_decode(&model, &enc, len, 1 << len).unwrap();
            let oracle = exhaustive_best(&model, &aligned, len);
            assert_eq!(beam, oracle, "seed {seed} len {len}");
        }
    }

    #[test]
    fn beam_rejects_zero_width() {
        let (model, aligned, _) = setup(8, 3);
        let enc = encode_eval(&model, &aligned, Ablation::None).unwrap();
        assert!(beam_decode(&model, &enc, 3, 0).is_err());
    }

    #[test]
    fn scores_are_probabilities_and_complementary() {
        let (model, aligned, labels) = setup(9, 6);
        for mode in [ScoreMode::TeacherForced, ScoreMode::Autoregressive] {
            let scores =
                change_scores(&model, &aligned, Some(&labels), Ablation::None, mode).unwrap();
            assert_eq!(scores.len(), labels.len());
            for &s in &scores {
                assert!((0.0..=1.0).contains(&s));
            }
        }
        // p(change) + p(same) = 1 after renormalization
        let enc = encode_eval(&model, &aligned, Ablation::None).unwrap();
        let mut state = DecoderState::new(&model, &enc).unwrap();
        let logits = state.step(DecoderInput::Bos).unwrap();
        let (p_same, p_change) = masked_binary_probs(&logits);
        assert!((p_same + p_change - 1.0).abs() < 1e-12);
    }

    #[test]
    fn teacher_forced_scores_require_labels() {
        let (model, aligned, _) = setup(10, 4);
        assert!(change_scores(
            &model,
            &aligned,
            None,
            Ablation::None,
            ScoreMode::TeacherForced
        )
        .is_err());
    }

    #[test]
    fn decoding_is_deterministic() {
        let (model, aligned, _) = setup(11, 7);
        let enc = encode_eval(&model, &aligned, Ablation::None).unwrap();
        let a = beam_decode(&model, &enc, 7, 4).unwrap();
        let b = beam_decode(&model, &enc, 7, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn loss_targets_line_up() {
        let (_, _, labels) = setup(12, 4);
        let t = targets_with_eos(&labels);
        assert_eq!(t.len(), labels.len() + 1);
        assert_eq!(*t.last().unwrap(), crate::model::CLASS_EOS);
    }
}
