//! AdamW training with linear warmup, cosine decay, and the teacher-forcing
//! to autoregressive epoch schedule.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::AlignedSequence;
use crate::corpus::Label;
use crate::decode::{encode_eval, greedy_decode};
use crate::error::{Error, Result};
use crate::fusion::Ablation;
use crate::graph::{Graph, NodeId};
use crate::model::{targets_with_eos, Forward, ModelParameters, CLASS_EOS, NUM_CLASSES};
use crate::params::ParamSet;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct TrainConfig {
    pub lr_init: f64,
    pub weight_decay: f64,
    pub lr_min: f64,
    pub warmup_iters: usize,
    pub betas: (f64, f64),
    pub eps: f64,
    pub batch_size: usize,
    pub total_epochs: usize,
    /// Epochs trained with teacher forcing; the remaining
    /// `total_epochs - tf_epochs` run autoregressively.
    pub tf_epochs: usize,
    pub ablation: Ablation,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr_init: 1e-3,
            weight_decay: 5e-5,
            lr_min: 5e-6,
            warmup_iters: 1000,
            betas: (0.9, 0.999),
            eps: 1e-8,
            batch_size: 16,
            total_epochs: 100,
            tf_epochs: 80,
            ablation: Ablation::None,
            seed: 13,
        }
    }
}

impl TrainConfig {
    pub fn ar_epochs(&self) -> usize {
        self.total_epochs - self.tf_epochs
    }

    pub fn validate(&self) -> Result<()> {
        if self.tf_epochs > self.total_epochs {
            return Err(Error::Config(format!(
                "tf_epochs {} exceeds total_epochs {}",
                self.tf_epochs, self.total_epochs
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if self.total_epochs == 0 {
            return Err(Error::Config("total_epochs must be positive".into()));
        }
        if !(self.lr_init > 0.0 && self.lr_min > 0.0 && self.lr_min <= self.lr_init) {
            return Err(Error::Config("need 0 < lr_min <= lr_init".into()));
        }
        let (b1, b2) = self.betas;
        if !((0.0..1.0).contains(&b1) && (0.0..1.0).contains(&b2)) {
            return Err(Error::Config("betas must lie in [0,1)".into()));
        }
        Ok(())
    }
}

/// Learning rate at a global step: linear ramp from 0 to `lr_init` over the
/// warmup, then a cosine from `lr_init` down to exactly `lr_min` at the
/// final iteration.
pub fn lr_at(iter: usize, total_iters: usize, cfg: &TrainConfig) -> Result<f64> {
    if total_iters <= cfg.warmup_iters {
        return Err(Error::Config(format!(
            "total_iters {total_iters} must exceed warmup_iters {}",
            cfg.warmup_iters
        )));
    }
    if iter >= total_iters {
        return Err(Error::InvalidArg(format!(
            "iter {iter} out of range 0..{total_iters}"
        )));
    }
    if iter < cfg.warmup_iters {
        return Ok(cfg.lr_init * iter as f64 / cfg.warmup_iters as f64);
    }
    let span = total_iters - 1 - cfg.warmup_iters;
    if span == 0 {
        return Ok(cfg.lr_init);
    }
    let progress = (iter - cfg.warmup_iters) as f64 / span as f64;
    let w = 0.5 * (1.0 + (std::f64::consts::PI * progress).cos());
    // convex blend is exact at both endpoints
    Ok(cfg.lr_init * w + cfg.lr_min * (1.0 - w))
}

/// First/second moment accumulators, laid out in parameter-registry order.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    pub step: usize,
}

impl OptimizerState {
    pub fn new(params: &ParamSet) -> Self {
        let m = params.iter().map(|(_, t)| vec![0.0; t.numel()]).collect();
        let v = params.iter().map(|(_, t)| vec![0.0; t.numel()]).collect();
        OptimizerState { m, v, step: 0 }
    }
}

/// One AdamW update: bias-corrected moment step plus decoupled weight decay
/// `-lr * wd * param` applied independently of the gradient.
pub fn adamw_step(
    params: &mut ParamSet,
    grads: &[Vec<f64>],
    state: &mut OptimizerState,
    lr: f64,
    cfg: &TrainConfig,
) -> Result<()> {
    if grads.len() != params.len() {
        return Err(Error::Shape(format!(
            "adamw: {} gradient buffers for {} parameters",
            grads.len(),
            params.len()
        )));
    }
    for ((name, t), g) in params.iter().zip(grads) {
        if g.len() != t.numel() {
            return Err(Error::Shape(format!(
                "adamw: gradient for {name} has {} elements, parameter has {}",
                g.len(),
                t.numel()
            )));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("gradient of {name}")));
        }
    }

    state.step += 1;
    let (b1, b2) = cfg.betas;
    let bc1 = 1.0 - b1.powi(state.step as i32);
    let bc2 = 1.0 - b2.powi(state.step as i32);
    for (idx, (_, t)) in params.iter_mut().enumerate() {
        let g = &grads[idx];
        let m = &mut state.m[idx];
        let v = &mut state.v[idx];
        let data = t.data_mut();
        for e in 0..g.len() {
            m[e] = b1 * m[e] + (1.0 - b1) * g[e];
            v[e] = b2 * v[e] + (1.0 - b2) * g[e] * g[e];
            let m_hat = m[e] / bc1;
            let v_hat = v[e] / bc2;
            data[e] -= lr * m_hat / (v_hat.sqrt() + cfg.eps) + lr * cfg.weight_decay * data[e];
        }
    }
    Ok(())
}

/// Mean token-level cross-entropy of `(L+1) x 3` logits against class
/// targets ending in eos.
pub fn loss(g: &mut Graph, logits: NodeId, targets: &[usize]) -> Result<NodeId> {
    if targets.last() != Some(&CLASS_EOS) {
        return Err(Error::InvalidArg("loss: last target must be eos".into()));
    }
    let rows = g.value(logits).shape()[0];
    if rows != targets.len() {
        return Err(Error::Shape(format!(
            "loss: {rows} logit rows vs {} targets",
            targets.len()
        )));
    }
    let ce = g.cross_entropy_sum(logits, targets)?;
    Ok(g.scale(ce, 1.0 / targets.len() as f64))
}

/// One conversation prepared for training.
#[derive(Debug, Clone)]
pub struct TrainItem {
    pub aligned: AlignedSequence,
    pub labels: Vec<Label>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Tf,
    Ar,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Tf => "tf",
            Phase::Ar => "ar",
        })
    }
}

/// One line of the per-epoch metrics stream.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub phase: Phase,
    pub mean_loss: f64,
    pub lr: f64,
    pub wall_s: f64,
}

/// Owns the optimizer, the schedule position, and the seeded shuffle and
/// dropout streams for one training run.
pub struct Trainer {
    pub cfg: TrainConfig,
    pub state: OptimizerState,
    pub iter: usize,
    pub total_iters: usize,
    rng: ChaCha8Rng,
}

impl Trainer {
    pub fn new(model: &ModelParameters, cfg: TrainConfig, num_items: usize) -> Result<Self> {
        cfg.validate()?;
        if num_items == 0 {
            return Err(Error::InvalidArg("trainer: no training items".into()));
        }
        let batches_per_epoch = num_items.div_ceil(cfg.batch_size);
        let total_iters = cfg.total_epochs * batches_per_epoch;
        if total_iters <= cfg.warmup_iters {
            return Err(Error::Config(format!(
                "schedule: total iterations {total_iters} must exceed warmup {}",
                cfg.warmup_iters
            )));
        }
        let state = OptimizerState::new(&model.params);
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(Trainer {
            cfg,
            state,
            iter: 0,
            total_iters,
            rng,
        })
    }

    /// Continue a run from a checkpointed epoch: replays the schedule
    /// position without touching parameters.
    pub fn skip_to_epoch(&mut self, epoch: usize, num_items: usize) {
        let batches_per_epoch = num_items.div_ceil(self.cfg.batch_size);
        self.iter = epoch * batches_per_epoch;
        self.state.step = self.iter;
    }

    pub fn phase_for_epoch(&self, epoch: usize) -> Phase {
        if epoch < self.cfg.tf_epochs {
            Phase::Tf
        } else {
            Phase::Ar
        }
    }

    fn epoch_order(&mut self, n: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut self.rng);
        order
    }

    fn run_batch(
        &mut self,
        model: &mut ModelParameters,
        items: &[&TrainItem],
        prefixes: Option<&[Vec<Label>]>,
    ) -> Result<f64> {
        let mut g = Graph::new();
        let fwd = Forward::new(&mut g, model, true, self.cfg.ablation);
        let mut total_positions = 0usize;
        let mut ce_nodes = Vec::with_capacity(items.len());
        for (bi, item) in items.iter().enumerate() {
            let enc = fwd.encode(&mut g, &item.aligned, &mut self.rng)?;
            let dec_labels: &[Label] = match prefixes {
                Some(p) => &p[bi],
                None => &item.labels,
            };
            let dec_inputs = fwd.decoder_inputs(&mut g, dec_labels)?;
            let logits = fwd.decode_logits(&mut g, dec_inputs, enc, &mut self.rng)?;
            let targets = targets_with_eos(&item.labels);
            let ce = g.cross_entropy_sum(logits, &targets)?;
            total_positions += targets.len();
            ce_nodes.push(ce);
        }
        let mut total = ce_nodes[0];
        for &ce in &ce_nodes[1..] {
            total = g.add(total, ce)?;
        }
        let batch_loss = g.scale(total, 1.0 / total_positions as f64);

        let loss_value = g.value(batch_loss).data()[0];
        if !loss_value.is_finite() {
            return Err(Error::Train(format!(
                "non-finite loss {loss_value} at iteration {}",
                self.iter
            )));
        }

        let mut grads = g.backward(batch_loss)?;
        let grad_bufs = fwd.bound.grads(&model.params, &mut grads);
        let lr = lr_at(self.iter, self.total_iters, &self.cfg)?;
        adamw_step(&mut model.params, &grad_bufs, &mut self.state, lr, &self.cfg)?;
        self.iter += 1;
        Ok(loss_value)
    }

    /// One teacher-forced pass over the data in a fresh shuffled order.
    pub fn train_epoch_tf(
        &mut self,
        model: &mut ModelParameters,
        data: &[TrainItem],
        epoch: usize,
    ) -> Result<EpochMetrics> {
        let start = Instant::now();
        let order = self.epoch_order(data.len());
        let mut losses = Vec::new();
        for chunk in order.chunks(self.cfg.batch_size) {
            let items: Vec<&TrainItem> = chunk.iter().map(|&i| &data[i]).collect();
            losses.push(self.run_batch(model, &items, None)?);
        }
        Ok(self.metrics(epoch, Phase::Tf, &losses, start))
    }

    /// One autoregressive pass: the decoder is fed its own greedy argmax
    /// prefix (eos masked), generated step by step with current weights;
    /// gradients flow through the logits but not the discrete feedback.
    pub fn train_epoch_ar(
        &mut self,
        model: &mut ModelParameters,
        data: &[TrainItem],
        epoch: usize,
    ) -> Result<EpochMetrics> {
        let start = Instant::now();
        let order = self.epoch_order(data.len());
        let mut losses = Vec::new();
        for chunk in order.chunks(self.cfg.batch_size) {
            let items: Vec<&TrainItem> = chunk.iter().map(|&i| &data[i]).collect();
            let mut prefixes = Vec::with_capacity(items.len());
            for item in &items {
                prefixes.push(greedy_prefix(model, item, self.cfg.ablation)?);
            }
            losses.push(self.run_batch(model, &items, Some(&prefixes))?);
        }
        Ok(self.metrics(epoch, Phase::Ar, &losses, start))
    }

    fn metrics(&self, epoch: usize, phase: Phase, losses: &[f64], start: Instant) -> EpochMetrics {
        let mean_loss = losses.iter().sum::<f64>() / losses.len() as f64;
        let lr = lr_at(
            self.iter.saturating_sub(1).min(self.total_iters - 1),
            self.total_iters,
            &self.cfg,
        )
        .unwrap_or(self.cfg.lr_min);
        EpochMetrics {
            epoch,
            phase,
            mean_loss,
            lr,
            wall_s: start.elapsed().as_secs_f64(),
        }
    }
}

/// Greedy self-prefix for autoregressive training: the model's own argmax
/// labels, decoded in evaluation mode with current weights.
fn greedy_prefix(
    model: &ModelParameters,
    item: &TrainItem,
    ablation: Ablation,
) -> Result<Vec<Label>> {
    let enc = encode_eval(model, &item.aligned, ablation)?;
    greedy_decode(model, &enc, item.aligned.len())
}
