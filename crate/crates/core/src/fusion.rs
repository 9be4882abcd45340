//! Embedding normalization, sinusoidal positions, and the projections that
//! fuse speaker and text embeddings into the model space.
//!
//! Pipeline per token: normalize each modality to magnitude `sqrt(dim)`,
//! concatenate, project with a fully-connected layer, apply dropout (train
//! only) and GELU, then add the positional encoding. The decoder-side
//! projection is identical apart from its 768-d input.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::tensor::Tensor;

/// Modality ablations: zero the normalized slice of one modality while
/// keeping the architecture unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    #[default]
    None,
    NoAudio,
    NoText,
}

impl std::fmt::Display for Ablation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Ablation::None => "none",
            Ablation::NoAudio => "no_audio",
            Ablation::NoText => "no_text",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Ablation::None),
            "no_audio" => Ok(Ablation::NoAudio),
            "no_text" => Ok(Ablation::NoText),
            other => Err(Error::InvalidArg(format!("unknown ablation {other}"))),
        }
    }
}

/// Rescale a vector to Euclidean norm `sqrt(dim)`. The zero vector has no
/// direction and is rejected.
pub fn magnitude_normalize(v: &[f64]) -> Result<Vec<f64>> {
    let norm = crate::kernels::dot(v, v).sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidArg("magnitude_normalize: zero vector".into()));
    }
    let scale = (v.len() as f64).sqrt() / norm;
    Ok(v.iter().map(|x| x * scale).collect())
}

/// Sinusoidal positional encoding, interleaved sin/cos with base 10000.
pub fn positional_encoding(pos: usize, dim: usize) -> Result<Vec<f64>> {
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::InvalidArg(format!(
            "positional_encoding: dim {dim} must be even and positive"
        )));
    }
    let mut out = Vec::with_capacity(dim);
    for i in 0..dim / 2 {
        let freq = 1.0 / 10000f64.powf(2.0 * i as f64 / dim as f64);
        let angle = pos as f64 * freq;
        out.push(angle.sin());
        out.push(angle.cos());
    }
    Ok(out)
}

/// Rows `start_pos .. start_pos + len` of the positional encoding table.
pub fn positional_encoding_rows(start_pos: usize, len: usize, dim: usize) -> Result<Tensor> {
    let mut data = Vec::with_capacity(len * dim);
    for p in 0..len {
        data.extend(positional_encoding(start_pos + p, dim)?);
    }
    Tensor::new(vec![len, dim], data)
}

/// Dropout only when training with a positive rate; otherwise the input
/// passes through without consuming randomness.
pub fn maybe_dropout(
    g: &mut Graph,
    x: NodeId,
    train: bool,
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<NodeId> {
    if train && rate > 0.0 {
        g.dropout(x, rate, rng)
    } else {
        Ok(x)
    }
}

/// Fused encoder input for a whole token sequence.
///
/// `spk`: `[L, 256]`, `txt`: `[L, 768]`; output `[L, model_dim]` with the
/// positional encoding of positions `0..L` added.
#[allow(clippy::too_many_arguments)]
pub fn fuse_encoder_rows(
    g: &mut Graph,
    spk: NodeId,
    txt: NodeId,
    weight: NodeId,
    bias: NodeId,
    ablation: Ablation,
    train: bool,
    dropout_rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<NodeId> {
    let rows = g.value(spk).shape()[0];
    let spk_dim = g.value(spk).shape()[1];
    let txt_dim = g.value(txt).shape()[1];
    if g.value(txt).shape()[0] != rows {
        return Err(Error::Shape("fuse: speaker/text row mismatch".into()));
    }

    let spk_part = match ablation {
        Ablation::NoAudio => g.leaf(Tensor::zeros(vec![rows, spk_dim])),
        _ => g.row_normalize(spk)?,
    };
    let txt_part = match ablation {
        Ablation::NoText => g.leaf(Tensor::zeros(vec![rows, txt_dim])),
        _ => g.row_normalize(txt)?,
    };

    let cat = g.concat_cols(&[spk_part, txt_part])?;
    let proj = g.matmul(cat, weight)?;
    let shifted = g.add_row_vec(proj, bias)?;
    let dropped = maybe_dropout(g, shifted, train, dropout_rate, rng)?;
    let activated = g.gelu(dropped)?;

    let model_dim = g.value(activated).shape()[1];
    let pe = g.leaf(positional_encoding_rows(0, rows, model_dim)?);
    g.add(activated, pe)
}

/// Decoder-side projection of label embeddings, `[T, 768] -> [T, model_dim]`,
/// with positions `0..T`.
pub fn project_decoder_rows(
    g: &mut Graph,
    label_embs: NodeId,
    weight: NodeId,
    bias: NodeId,
    train: bool,
    dropout_rate: f64,
    rng: &mut ChaCha8Rng,
) -> Result<NodeId> {
    let rows = g.value(label_embs).shape()[0];
    let normalized = g.row_normalize(label_embs)?;
    let proj = g.matmul(normalized, weight)?;
    let shifted = g.add_row_vec(proj, bias)?;
    let dropped = maybe_dropout(g, shifted, train, dropout_rate, rng)?;
    let activated = g.gelu(dropped)?;

    let model_dim = g.value(activated).shape()[1];
    let pe = g.leaf(positional_encoding_rows(0, rows, model_dim)?);
    g.add(activated, pe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn normalize_examples() {
        assert_eq!(
            magnitude_normalize(&[3.0, 0.0, 0.0, 0.0]).unwrap(),
            vec![2.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            magnitude_normalize(&[1.0, 1.0, 1.0, 1.0]).unwrap(),
            vec![1.0, 1.0, 1.0, 1.0]
        );
        assert!(magnitude_normalize(&[0.0; 4]).is_err());
    }

    #[test]
    fn normalize_reaches_sqrt_dim() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for dim in [4usize, 256, 768] {
            for _ in 0..50 {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
                if v.iter().all(|x| *x == 0.0) {
                    continue;
                }
                let n = magnitude_normalize(&v).unwrap();
                let norm = crate::kernels::dot(&n, &n).sqrt();
                assert!((norm - (dim as f64).sqrt()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn positional_encoding_examples() {
        assert_eq!(positional_encoding(0, 4).unwrap(), vec![0.0, 1.0, 0.0, 1.0]);
        let pe1 = positional_encoding(1, 4).unwrap();
        assert!((pe1[0] - 1.0f64.sin()).abs() < 1e-12);
        assert!((pe1[0] - 0.84147).abs() < 1e-5);
        assert!(positional_encoding(3, 5).is_err());
        for pos in [0usize, 1, 17, 1000] {
            for v in positional_encoding(pos, 16).unwrap() {
                assert!((-1.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn zero_weights_leave_positional_encoding() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut g = Graph::new();
        let spk_data: Vec<f64> = (0..2 * 6).map(|_| rng.gen_range(0.1..1.0)).collect();
        let txt_data: Vec<f64> = (0..2 * 8).map(|_| rng.gen_range(0.1..1.0)).collect();
        let spk = g.leaf(Tensor::new(vec![2, 6], spk_data).unwrap());
        let txt = g.leaf(Tensor::new(vec![2, 8], txt_data).unwrap());
        let w = g.leaf(Tensor::zeros(vec![14, 4]));
        let b = g.leaf(Tensor::zeros(vec![4]));
        let out = fuse_encoder_rows(
            &mut g,
            spk,
            txt,
            w,
            b,
            Ablation::None,
            false,
            0.1,
            &mut rng,
        )
        .unwrap();
        let want = positional_encoding_rows(0, 2, 4).unwrap();
        assert_eq!(g.value(out).data(), want.data());
    }

    #[test]
    fn eval_mode_is_deterministic() {
        let run = |rng_seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            let mut g = Graph::new();
            let spk = g.leaf(Tensor::new(vec![1, 4], vec![1.0, 2.0, 3.0, 4.0]).unwrap());
            let txt = g.leaf(Tensor::new(vec![1, 6], vec![0.5; 6]).unwrap());
            let w = g.leaf(Tensor::new(vec![10, 4], (0..40).map(|i| i as f64 * 0.01).collect()).unwrap());
            let b = g.leaf(Tensor::zeros(vec![4]));
            let out = fuse_encoder_rows(
                &mut g,
                spk,
                txt,
                w,
                b,
                Ablation::None,
                false,
                0.5,
                &mut rng,
            )
            .unwrap();
            g.value(out).data().to_vec()
        };
        // different rng seeds cannot matter in eval mode
        assert_eq!(run(1), run(999));
    }

    #[test]
    fn ablations_zero_one_modality() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let eval = |ablation: Ablation| {
            let mut rng_local = ChaCha8Rng::seed_from_u64(0);
            let mut g = Graph::new();
            let spk = g.leaf(Tensor::new(vec![1, 4], vec![1.0, -1.0, 2.0, 0.5]).unwrap());
            let txt = g.leaf(Tensor::new(vec![1, 6], vec![0.3, 0.9, -0.2, 1.1, 0.0, 0.7]).unwrap());
            // weight that sums the speaker slice into out[0] and the text
            // slice into out[1]
            let mut wdata = vec![0.0; 10 * 2];
            for i in 0..4 {
                wdata[i * 2] = 1.0;
            }
            for i in 4..10 {
                wdata[i * 2 + 1] = 1.0;
            }
            let w = g.leaf(Tensor::new(vec![10, 2], wdata).unwrap());
            let b = g.leaf(Tensor::zeros(vec![2]));
            let out = fuse_encoder_rows(
                &mut g, spk, txt, w, b, ablation, false, 0.0, &mut rng_local,
            )
            .unwrap();
            let pe = positional_encoding_rows(0, 1, 2).unwrap();
            let v = g.value(out).data().to_vec();
            (v[0] - pe.data()[0], v[1] - pe.data()[1])
        };
        let _ = &mut rng;
        let (full_a, full_t) = eval(Ablation::None);
        assert!(full_a.abs() > 1e-6 && full_t.abs() > 1e-6);
        let (na_a, na_t) = eval(Ablation::NoAudio);
        assert_eq!(na_a, 0.0); // gelu(0) = 0 on the audio channel
        assert!(na_t.abs() > 1e-6);
        let (nt_a, nt_t) = eval(Ablation::NoText);
        assert!(nt_a.abs() > 1e-6);
        assert_eq!(nt_t, 0.0);
    }

    #[test]
    fn fd_gradients_through_fusion_path() {
        // gradient check through normalize -> concat -> matmul -> gelu -> pe
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spk0 = Tensor::new(vec![2, 3], (0..6).map(|_| rng.gen_range(0.2..1.0)).collect()).unwrap();
        let txt0 = Tensor::new(vec![2, 4], (0..8).map(|_| rng.gen_range(0.2..1.0)).collect()).unwrap();
        let w0 = Tensor::new(vec![7, 4], (0..28).map(|_| rng.gen_range(-0.5..0.5)).collect()).unwrap();
        let b0 = Tensor::new(vec![4], (0..4).map(|_| rng.gen_range(-0.2..0.2)).collect()).unwrap();

        let eval = |w: &Tensor, b: &Tensor, spk: &Tensor, txt: &Tensor| {
            let mut rng_local = ChaCha8Rng::seed_from_u64(0);
            let mut g = Graph::new();
            let spk = g.leaf(spk.clone());
            let txt = g.leaf(txt.clone());
            let w = g.leaf(w.clone());
            let b = g.leaf(b.clone());
            let out = fuse_encoder_rows(
                &mut g, spk, txt, w, b, Ablation::None, false, 0.0, &mut rng_local,
            )
            .unwrap();
            let loss = g.sum(out);
            (g, [spk, txt, w, b], loss)
        };

        let (g, ids, loss) = eval(&w0, &b0, &spk0, &txt0);
        let grads = g.backward(loss).unwrap();
        let tensors = [spk0.clone(), txt0.clone(), w0.clone(), b0.clone()];
        let h = 1e-6;
        for (ti, id) in ids.iter().enumerate() {
            let analytic = grads.get(*id).unwrap();
            for e in 0..tensors[ti].numel() {
                let mut plus = tensors.clone();
                plus[ti].data_mut()[e] += h;
                let mut minus = tensors.clone();
                minus[ti].data_mut()[e] -= h;
                let (gp, _, lp) = eval(&plus[2], &plus[3], &plus[0], &plus[1]);
                let (gm, _, lm) = eval(&minus[2], &minus[3], &minus[0], &minus[1]);
                let fd = (gp.value(lp).data()[0] - gm.value(lm).data()[0]) / (2.0 * h);
                let a = analytic[e];
                let denom = a.abs().max(fd.abs()).max(1e-6);
                assert!(
                    (a - fd).abs() / denom < 1e-4,
                    "tensor {ti} elem {e}: {a} vs {fd}"
                );
            }
        }
    }
}
