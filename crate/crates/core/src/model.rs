//! Encoder-decoder for token-level speaker change detection.
//!
//! Fused speaker+text tokens pass through a stack of pre-norm transformer
//! encoder layers; a single pre-norm decoder layer with causal
//! self-attention and full cross-attention predicts, per step, one of
//! {same, change, eos} from a learned 3-row label-embedding table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::AlignedSequence;
use crate::attention::{multi_head_attention, AttentionParams};
use crate::corpus::{Label, SPEAKER_VEC_DIM, TEXT_EMB_DIM};
use crate::error::{Error, Result};
use crate::fusion::{fuse_encoder_rows, maybe_dropout, project_decoder_rows, Ablation};
use crate::graph::{Graph, NodeId};
use crate::params::{BoundParams, ParamSet};
use crate::tensor::Tensor;

/// Output class indices.
pub const CLASS_SAME: usize = 0;
pub const CLASS_CHANGE: usize = 1;
pub const CLASS_EOS: usize = 2;
pub const NUM_CLASSES: usize = 3;

/// Label-embedding table rows.
pub const ROW_BOS: usize = 0;
pub const ROW_SAME: usize = 1;
pub const ROW_CHANGE: usize = 2;

pub fn class_of(label: Label) -> usize {
    match label {
        Label::Same => CLASS_SAME,
        Label::Change => CLASS_CHANGE,
    }
}

pub fn table_row_of(label: Label) -> usize {
    match label {
        Label::Same => ROW_SAME,
        Label::Change => ROW_CHANGE,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ModelConfig {
    pub model_dim: usize,
    pub heads: usize,
    pub enc_layers: usize,
    pub dec_layers: usize,
    pub ff_dim: usize,
    pub dropout: f64,
    pub num_classes: usize,
    pub label_emb_dim: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            model_dim: 512,
            heads: 8,
            enc_layers: 3,
            dec_layers: 1,
            ff_dim: 2048,
            dropout: 0.1,
            num_classes: NUM_CLASSES,
            label_emb_dim: TEXT_EMB_DIM,
            seed: 7,
        }
    }
}

impl ModelConfig {
    /// Small config for gradient checks: quick to evaluate by finite
    /// differences yet exercising every parameter array.
    pub fn tiny(seed: u64) -> Self {
        ModelConfig {
            model_dim: 16,
            heads: 2,
            enc_layers: 1,
            dec_layers: 1,
            ff_dim: 32,
            dropout: 0.0,
            num_classes: NUM_CLASSES,
            label_emb_dim: TEXT_EMB_DIM,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.model_dim == 0 || self.heads == 0 || self.ff_dim == 0 || self.label_emb_dim == 0 {
            return Err(Error::Config("model dims must be positive".into()));
        }
        if self.model_dim % self.heads != 0 {
            return Err(Error::Config(format!(
                "model_dim {} not divisible by heads {}",
                self.model_dim, self.heads
            )));
        }
        if self.model_dim % 2 != 0 {
            return Err(Error::Config("model_dim must be even for positional encoding".into()));
        }
        if self.enc_layers == 0 || self.dec_layers == 0 {
            return Err(Error::Config("need at least one encoder and one decoder layer".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0,1)", self.dropout)));
        }
        if self.num_classes != NUM_CLASSES {
            return Err(Error::Config(format!(
                "num_classes {} unsupported; the label scheme is same/change/eos",
                self.num_classes
            )));
        }
        Ok(())
    }
}

/// All trainable arrays plus the config that shaped them.
#[derive(Debug, Clone)]
pub struct ModelParameters {
    pub config: ModelConfig,
    pub params: ParamSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ParamKind {
    Weight,
    Bias,
    Gain,
}

/// Visit every parameter array of the architecture in registration order.
/// The single walk definition keeps initialization, checkpoint validation,
/// and the optimizer-state layout in agreement.
fn walk_params(
    config: &ModelConfig,
    visit: &mut impl FnMut(String, Vec<usize>, ParamKind) -> Result<()>,
) -> Result<()> {
    use ParamKind::*;
    let d = config.model_dim;
    let ff = config.ff_dim;

    let mut attention = |visit: &mut dyn FnMut(String, Vec<usize>, ParamKind) -> Result<()>,
                         prefix: &str|
     -> Result<()> {
        for mat in ["wq", "wk", "wv", "wo"] {
            visit(format!("{prefix}.{mat}"), vec![d, d], Weight)?;
        }
        for vec in ["bq", "bk", "bv", "bo"] {
            visit(format!("{prefix}.{vec}"), vec![d], Bias)?;
        }
        Ok(())
    };
    let mut layer_norm = |visit: &mut dyn FnMut(String, Vec<usize>, ParamKind) -> Result<()>,
                          prefix: &str|
     -> Result<()> {
        visit(format!("{prefix}.gain"), vec![d], Gain)?;
        visit(format!("{prefix}.bias"), vec![d], Bias)
    };
    let mut feed_forward = |visit: &mut dyn FnMut(String, Vec<usize>, ParamKind) -> Result<()>,
                            prefix: &str|
     -> Result<()> {
        visit(format!("{prefix}.w1"), vec![d, ff], Weight)?;
        visit(format!("{prefix}.b1"), vec![ff], Bias)?;
        visit(format!("{prefix}.w2"), vec![ff, d], Weight)?;
        visit(format!("{prefix}.b2"), vec![d], Bias)
    };

    visit(
        "fusion.enc.weight".into(),
        vec![SPEAKER_VEC_DIM + TEXT_EMB_DIM, d],
        Weight,
    )?;
    visit("fusion.enc.bias".into(), vec![d], Bias)?;
    visit("fusion.dec.weight".into(), vec![config.label_emb_dim, d], Weight)?;
    visit("fusion.dec.bias".into(), vec![d], Bias)?;
    visit(
        "label_table".into(),
        vec![NUM_CLASSES, config.label_emb_dim],
        Weight,
    )?;

    for i in 0..config.enc_layers {
        layer_norm(visit, &format!("enc.{i}.ln1"))?;
        attention(visit, &format!("enc.{i}.attn"))?;
        layer_norm(visit, &format!("enc.{i}.ln2"))?;
        feed_forward(visit, &format!("enc.{i}.ff"))?;
    }
    layer_norm(visit, "enc.final_ln")?;

    for i in 0..config.dec_layers {
        layer_norm(visit, &format!("dec.{i}.ln1"))?;
        attention(visit, &format!("dec.{i}.self_attn"))?;
        layer_norm(visit, &format!("dec.{i}.ln2"))?;
        attention(visit, &format!("dec.{i}.cross_attn"))?;
        layer_norm(visit, &format!("dec.{i}.ln3"))?;
        feed_forward(visit, &format!("dec.{i}.ff"))?;
    }
    layer_norm(visit, "dec.final_ln")?;

    visit("head.weight".into(), vec![d, NUM_CLASSES], Weight)?;
    visit("head.bias".into(), vec![NUM_CLASSES], Bias)?;
    Ok(())
}

/// Names and shapes of every parameter array, in registration order.
pub fn param_shapes(config: &ModelConfig) -> Result<Vec<(String, Vec<usize>)>> {
    config.validate()?;
    let mut out = Vec::new();
    walk_params(config, &mut |name, shape, _| {
        out.push((name, shape));
        Ok(())
    })?;
    Ok(out)
}

/// Initialize all parameters from the config seed: scaled-uniform weights
/// with bound `sqrt(6 / (fan_in + fan_out))`, zero biases, unit layer-norm
/// gains.
pub fn init_model(config: &ModelConfig) -> Result<ModelParameters> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut set = ParamSet::new();

    walk_params(config, &mut |name, shape, kind| {
        let tensor = match kind {
            ParamKind::Weight => {
                let (fan_in, fan_out) = (shape[0], shape[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let data: Vec<f64> = (0..fan_in * fan_out)
                    .map(|_| rng.gen_range(-bound..bound))
                    .collect();
                Tensor::new(shape, data)?
            }
            ParamKind::Bias => Tensor::zeros(shape),
            ParamKind::Gain => {
                let n = shape.iter().product();
                Tensor::new(shape, vec![1.0; n])?
            }
        };
        set.insert(name, tensor)
    })?;

    Ok(ModelParameters {
        config: config.clone(),
        params: set,
    })
}

/// One forward context: the model's parameters bound to one graph.
pub struct Forward<'m> {
    pub model: &'m ModelParameters,
    pub bound: BoundParams,
    pub train: bool,
    pub ablation: Ablation,
}

impl<'m> Forward<'m> {
    pub fn new(
        g: &mut Graph,
        model: &'m ModelParameters,
        train: bool,
        ablation: Ablation,
    ) -> Self {
        let bound = BoundParams::bind(&model.params, g);
        Forward {
            model,
            bound,
            train,
            ablation,
        }
    }

    fn id(&self, name: &str) -> NodeId {
        self.bound
            .id(&self.model.params, name)
            .expect("parameter registered at init")
    }

    fn attention_params(&self, prefix: &str) -> AttentionParams {
        AttentionParams {
            wq: self.id(&format!("{prefix}.wq")),
            bq: self.id(&format!("{prefix}.bq")),
            wk: self.id(&format!("{prefix}.wk")),
            bk: self.id(&format!("{prefix}.bk")),
            wv: self.id(&format!("{prefix}.wv")),
            bv: self.id(&format!("{prefix}.bv")),
            wo: self.id(&format!("{prefix}.wo")),
            bo: self.id(&format!("{prefix}.bo")),
        }
    }

    fn layer_norm(&self, g: &mut Graph, x: NodeId, prefix: &str) -> Result<NodeId> {
        g.layer_norm(
            x,
            self.id(&format!("{prefix}.gain")),
            self.id(&format!("{prefix}.bias")),
            1e-5,
        )
    }

    fn feed_forward(&self, g: &mut Graph, x: NodeId, prefix: &str) -> Result<NodeId> {
        let h = g.matmul(x, self.id(&format!("{prefix}.w1")))?;
        let h = g.add_row_vec(h, self.id(&format!("{prefix}.b1")))?;
        let h = g.gelu(h)?;
        let h = g.matmul(h, self.id(&format!("{prefix}.w2")))?;
        g.add_row_vec(h, self.id(&format!("{prefix}.b2")))
    }

    fn residual(
        &self,
        g: &mut Graph,
        x: NodeId,
        sublayer_out: NodeId,
        rng: &mut ChaCha8Rng,
    ) -> Result<NodeId> {
        let dropped = maybe_dropout(g, sublayer_out, self.train, self.model.config.dropout, rng)?;
        g.add(x, dropped)
    }

    /// Encoder stack over fused inputs; `[L, model_dim]` hidden states.
    pub fn encode(
        &self,
        g: &mut Graph,
        aligned: &AlignedSequence,
        rng: &mut ChaCha8Rng,
    ) -> Result<NodeId> {
        if aligned.is_empty() {
            return Err(Error::InvalidArg("encode: empty sequence".into()));
        }
        let l = aligned.len();
        let mut spk_data = Vec::with_capacity(l * SPEAKER_VEC_DIM);
        let mut txt_data = Vec::with_capacity(l * TEXT_EMB_DIM);
        for tok in &aligned.tokens {
            spk_data.extend_from_slice(&tok.spk_emb);
            txt_data.extend_from_slice(&tok.text_emb);
        }
        let spk = g.leaf(Tensor::new(vec![l, SPEAKER_VEC_DIM], spk_data)?);
        let txt = g.leaf(Tensor::new(vec![l, TEXT_EMB_DIM], txt_data)?);

        let mut x = fuse_encoder_rows(
            g,
            spk,
            txt,
            self.id("fusion.enc.weight"),
            self.id("fusion.enc.bias"),
            self.ablation,
            self.train,
            self.model.config.dropout,
            rng,
        )?;

        let heads = self.model.config.heads;
        for i in 0..self.model.config.enc_layers {
            let h = self.layer_norm(g, x, &format!("enc.{i}.ln1"))?;
            let attn_params = self.attention_params(&format!("enc.{i}.attn"));
            let attn = multi_head_attention(g, h, h, h, heads, false, &attn_params)?;
            x = self.residual(g, x, attn, rng)?;

            let h = self.layer_norm(g, x, &format!("enc.{i}.ln2"))?;
            let ff = self.feed_forward(g, h, &format!("enc.{i}.ff"))?;
            x = self.residual(g, x, ff, rng)?;
        }
        self.layer_norm(g, x, "enc.final_ln")
    }

    /// `[emb(bos), emb(y_1), ..., emb(y_t)]` rows from the label table,
    /// selected with a one-hot matrix so gradients reach the table.
    pub fn decoder_inputs(&self, g: &mut Graph, labels_prefix: &[Label]) -> Result<NodeId> {
        let rows = labels_prefix.len() + 1;
        let mut onehot = vec![0.0; rows * NUM_CLASSES];
        onehot[ROW_BOS] = 1.0;
        for (i, &label) in labels_prefix.iter().enumerate() {
            onehot[(i + 1) * NUM_CLASSES + table_row_of(label)] = 1.0;
        }
        let select = g.leaf(Tensor::new(vec![rows, NUM_CLASSES], onehot)?);
        g.matmul(select, self.id("label_table"))
    }

    /// Decoder layer stack plus the classification head.
    ///
    /// Position `j` of the output depends on decoder inputs `0..=j` (causal
    /// self-attention) and on all encoder positions (full cross-attention).
    pub fn decode_logits(
        &self,
        g: &mut Graph,
        dec_inputs: NodeId,
        enc_hidden: NodeId,
        rng: &mut ChaCha8Rng,
    ) -> Result<NodeId> {
        if g.value(enc_hidden).shape()[0] == 0 {
            return Err(Error::InvalidArg("decode_logits: empty encoder output".into()));
        }
        let mut x = project_decoder_rows(
            g,
            dec_inputs,
            self.id("fusion.dec.weight"),
            self.id("fusion.dec.bias"),
            self.train,
            self.model.config.dropout,
            rng,
        )?;

        let heads = self.model.config.heads;
        for i in 0..self.model.config.dec_layers {
            let h = self.layer_norm(g, x, &format!("dec.{i}.ln1"))?;
            let self_params = self.attention_params(&format!("dec.{i}.self_attn"));
            let self_attn = multi_head_attention(g, h, h, h, heads, true, &self_params)?;
            x = self.residual(g, x, self_attn, rng)?;

            let h = self.layer_norm(g, x, &format!("dec.{i}.ln2"))?;
            let cross_params = self.attention_params(&format!("dec.{i}.cross_attn"));
            let cross = multi_head_attention(g, h, enc_hidden, enc_hidden, heads, false, &cross_params)?;
            x = self.residual(g, x, cross, rng)?;

            let h = self.layer_norm(g, x, &format!("dec.{i}.ln3"))?;
            let ff = self.feed_forward(g, h, &format!("dec.{i}.ff"))?;
            x = self.residual(g, x, ff, rng)?;
        }
        let x = self.layer_norm(g, x, "dec.final_ln")?;
        let logits = g.matmul(x, self.id("head.weight"))?;
        g.add_row_vec(logits, self.id("head.bias"))
    }

    /// Teacher-forced pass: decoder input `[bos, y_1..y_L]`, producing
    /// `L + 1` logit rows whose targets are `[y_1..y_L, eos]`.
    pub fn teacher_forced_logits(
        &self,
        g: &mut Graph,
        aligned: &AlignedSequence,
        labels: &[Label],
        rng: &mut ChaCha8Rng,
    ) -> Result<NodeId> {
        if labels.len() != aligned.len() {
            return Err(Error::Shape(format!(
                "teacher forcing: {} labels for {} tokens",
                labels.len(),
                aligned.len()
            )));
        }
        let enc_hidden = self.encode(g, aligned, rng)?;
        let dec_inputs = self.decoder_inputs(g, labels)?;
        self.decode_logits(g, dec_inputs, enc_hidden, rng)
    }
}

/// Class-index targets for a label sequence: the labels then a terminal eos.
pub fn targets_with_eos(labels: &[Label]) -> Vec<usize> {
    let mut t: Vec<usize> = labels.iter().map(|&l| class_of(l)).collect();
    t.push(CLASS_EOS);
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::{align_conversation, SyntheticProvider};
    use crate::corpus::{generate, CorpusConfig};

    fn tiny_aligned(num_words: usize, seed: u64) -> (AlignedSequence, Vec<Label>) {
        let config = CorpusConfig {
            num_words,
            seed,
            ..CorpusConfig::default()
        };
        let conv = generate(&config).unwrap();
        let provider = SyntheticProvider::new(0.1, 3);
        let (aligned, _) = align_conversation(&conv, &provider, 1.5, 0.5).unwrap();
        (aligned, conv.labels())
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let config = ModelConfig::tiny(11);
        let a = init_model(&config).unwrap();
        let b = init_model(&config).unwrap();
        for ((na, ta), (nb, tb)) in a.params.iter().zip(b.params.iter()) {
            assert_eq!(na, nb);
            assert_eq!(ta.data(), tb.data());
        }
        // gains are ones, every bias flavour is zero, weight magnitudes
        // stay within the scaled-uniform bound
        for (name, t) in a.params.iter() {
            if name.ends_with(".gain") {
                assert!(t.data().iter().all(|&v| v == 1.0), "{name} not ones");
            } else if [".bias", ".b1", ".b2", ".bq", ".bk", ".bv", ".bo"]
                .iter()
                .any(|s| name.ends_with(s))
            {
                assert!(t.data().iter().all(|&v| v == 0.0), "{name} not zero");
            } else {
                assert_eq!(t.shape().len(), 2, "{name} is not a weight matrix");
                let (fi, fo) = (t.shape()[0], t.shape()[1]);
                let bound = (6.0 / (fi + fo) as f64).sqrt();
                assert!(
                    t.data().iter().all(|v| v.abs() <= bound),
                    "{name} exceeds the init bound"
                );
            }
        }
    }

    #[test]
    fn encode_shape_contract() {
        let model = init_model(&ModelConfig::tiny(5)).unwrap();
        let (aligned, _) = tiny_aligned(1, 21);
        let mut g = Graph::new();
        let fwd = Forward::new(&mut g, &model, false, Ablation::None);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let h = fwd.encode(&mut g, &aligned, &mut rng).unwrap();
        assert_eq!(g.value(h).shape(), &[1, 16]);
    }

    #[test]
    fn encode_rejects_empty() {
        let model = init_model(&ModelConfig::tiny(5)).unwrap();
        let mut g = Graph::new();
        let fwd = Forward::new(&mut g, &model, false, Ablation::None);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let empty = AlignedSequence { tokens: vec![] };
        assert!(fwd.encode(&mut g, &empty, &mut rng).is_err());
    }

    #[test]
    fn positions_break_permutation_symmetry() {
        let model = init_model(&ModelConfig::tiny(6)).unwrap();
        let (aligned, _) = tiny_aligned(4, 9);
        let run = |seq: &AlignedSequence| {
            let mut g = Graph::new();
            let fwd = Forward::new(&mut g, &model, false, Ablation::None);
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let h = fwd.encode(&mut g, seq, &mut rng).unwrap();
            g.value(h).data().to_vec()
        };
        let base = run(&aligned);
        let mut swapped = aligned.clone();
        swapped.tokens.swap(1, 2);
        let permuted = run(&swapped);
        assert_ne!(base, permuted);
    }

    #[test]
    fn decoder_inputs_prefix_property() {
        let model = init_model(&ModelConfig::tiny(3)).unwrap();
        let mut g = Graph::new();
        let fwd = Forward::new(&mut g, &model, false, Ablation::None);

        let empty = fwd.decoder_inputs(&mut g, &[]).unwrap();
        assert_eq!(g.value(empty).shape(), &[1, TEXT_EMB_DIM]);
        let table = model.params.get("label_table").unwrap();
        assert_eq!(g.value(empty).row(0), &table.data()[..TEXT_EMB_DIM]);

        let two = fwd
            .decoder_inputs(&mut g, &[Label::Same, Label::Change])
            .unwrap();
        assert_eq!(g.value(two).shape(), &[3, TEXT_EMB_DIM]);
        assert_eq!(
            g.value(two).row(1),
            &table.data()[ROW_SAME * TEXT_EMB_DIM..(ROW_SAME + 1) * TEXT_EMB_DIM]
        );
        assert_eq!(
            g.value(two).row(2),
            &table.data()[ROW_CHANGE * TEXT_EMB_DIM..(ROW_CHANGE + 1) * TEXT_EMB_DIM]
        );

        // shared prefixes give identical leading rows
        let longer = fwd
            .decoder_inputs(&mut g, &[Label::Same, Label::Same])
            .unwrap();
        assert_eq!(g.value(two).row(0), g.value(longer).row(0));
        assert_eq!(g.value(two).row(1), g.value(longer).row(1));
    }

    #[test]
    fn teacher_forced_shapes_and_causality() {
        let model = init_model(&ModelConfig::tiny(8)).unwrap();
        let (aligned, labels) = tiny_aligned(5, 33);

        let run = |labels: &[Label]| {
            let mut g = Graph::new();
            let fwd = Forward::new(&mut g, &model, false, Ablation::None);
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let logits = fwd
                .teacher_forced_logits(&mut g, &aligned, labels, &mut rng)
                .unwrap();
            g.value(logits).data().to_vec()
        };
        let base = run(&labels);
        assert_eq!(base.len(), (labels.len() + 1) * NUM_CLASSES);

        // flipping the last ground-truth label cannot change logits at
        // earlier positions (bit-exactly)
        let mut flipped = labels.clone();
        let last = flipped.len() - 1;
        flipped[last] = match flipped[last] {
            Label::Same => Label::Change,
            Label::Change => Label::Same,
        };
        let alt = run(&flipped);
        let keep = last * NUM_CLASSES; // positions 0..last-1 predict y_1..y_last
        assert_eq!(&base[..keep + NUM_CLASSES], &alt[..keep + NUM_CLASSES]);
    }

    #[test]
    fn single_token_sequence_has_two_output_positions() {
        let model = init_model(&ModelConfig::tiny(8)).unwrap();
        let (aligned, labels) = tiny_aligned(1, 4);
        let mut g = Graph::new();
        let fwd = Forward::new(&mut g, &model, false, Ablation::None);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let logits = fwd
            .teacher_forced_logits(&mut g, &aligned, &labels, &mut rng)
            .unwrap();
        assert_eq!(g.value(logits).shape(), &[2, NUM_CLASSES]);
    }

    #[test]
    fn cross_attention_reaches_position_zero() {
        let model = init_model(&ModelConfig::tiny(8)).unwrap();
        let (aligned, labels) = tiny_aligned(4, 90);

        let run = |seq: &AlignedSequence| {
            let mut g = Graph::new();
            let fwd = Forward::new(&mut g, &model, false, Ablation::None);
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let logits = fwd
                .teacher_forced_logits(&mut g, seq, &labels, &mut rng)
                .unwrap();
            g.value(logits).row(0).to_vec()
        };
        let base = run(&aligned);
        let mut perturbed = aligned.clone();
        // perturb the LAST encoder token; cross-attention is full, so even
        // logits at decoder position 0 may shift
        for v in perturbed.tokens[3].text_emb.iter_mut() {
            *v += 0.5;
        }
        let alt = run(&perturbed);
        assert_ne!(base, alt);
    }

    #[test]
    fn targets_append_eos() {
        let t = targets_with_eos(&[Label::Same, Label::Change]);
        assert_eq!(t, vec![CLASS_SAME, CLASS_CHANGE, CLASS_EOS]);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = ModelConfig::tiny(0);
        c.heads = 3; // 16 % 3 != 0
        assert!(init_model(&c).is_err());
        let mut c = ModelConfig::tiny(0);
        c.dropout = 1.0;
        assert!(init_model(&c).is_err());
        let mut c = ModelConfig::tiny(0);
        c.num_classes = 2;
        assert!(init_model(&c).is_err());
    }
}
