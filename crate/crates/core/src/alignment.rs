//! Sliding-window speaker-embedding grid and nearest-midpoint token mapping.
//!
//! Speaker embeddings are extracted on a fixed grid (1.5 s windows every
//! 0.5 s by default) independent of word boundaries; each token is paired
//! with the window whose midpoint is temporally closest to the token's
//! midpoint. Adjacent tokens may legitimately share a window.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corpus::{Conversation, SPEAKER_VEC_DIM};
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW_S: f64 = 1.5;
pub const DEFAULT_SHIFT_S: f64 = 0.5;

/// One slot of the sliding-window grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpeakerWindow {
    pub start_s: f64,
    pub end_s: f64,
    pub midpoint_s: f64,
    pub spk_emb: Vec<f64>,
}

/// Per-token fused inputs: the token's text embedding next to the speaker
/// embedding of its assigned window.
#[derive(Debug, Clone)]
pub struct AlignedToken {
    pub text_emb: Vec<f64>,
    pub spk_emb: Vec<f64>,
    pub window_index: usize,
}

#[derive(Debug, Clone)]
pub struct AlignedSequence {
    pub tokens: Vec<AlignedToken>,
}

impl AlignedSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Yields one 256-d embedding per grid window.
pub trait SpeakerEmbeddingProvider {
    fn window_embeddings(&self, conv: &Conversation, grid: &[(f64, f64, f64)]) -> Vec<Vec<f64>>;
}

/// Grid of `(start, end, midpoint)` triples: starts at multiples of the
/// shift while a full window fits; a conversation shorter than one window
/// gets a single clamped window covering all of it.
pub fn window_grid(duration_s: f64, window_s: f64, shift_s: f64) -> Result<Vec<(f64, f64, f64)>> {
    if duration_s <= 0.0 || window_s <= 0.0 || shift_s <= 0.0 {
        return Err(Error::InvalidArg(format!(
            "window_grid: duration {duration_s}, window {window_s}, shift {shift_s} must all be positive"
        )));
    }
    if duration_s < window_s {
        return Ok(vec![(0.0, duration_s, duration_s / 2.0)]);
    }
    let mut grid = Vec::new();
    let mut i = 0usize;
    loop {
        let start = i as f64 * shift_s;
        if start + window_s > duration_s {
            break;
        }
        grid.push((start, start + window_s, start + window_s / 2.0));
        i += 1;
    }
    Ok(grid)
}

/// Index of the window whose midpoint is nearest to `token_midpoint_s`;
/// ties resolve to the lower index. Midpoints must be sorted ascending.
pub fn assign_window(token_midpoint_s: f64, window_midpoints: &[f64]) -> Result<usize> {
    if window_midpoints.is_empty() {
        return Err(Error::InvalidArg("assign_window: empty grid".into()));
    }
    // Binary search for the insertion point, then compare the two
    // neighbouring midpoints.
    let hi = window_midpoints.partition_point(|&m| m < token_midpoint_s);
    if hi == 0 {
        return Ok(0);
    }
    if hi == window_midpoints.len() {
        return Ok(window_midpoints.len() - 1);
    }
    let lo = hi - 1;
    let d_lo = token_midpoint_s - window_midpoints[lo];
    let d_hi = window_midpoints[hi] - token_midpoint_s;
    Ok(if d_lo <= d_hi { lo } else { hi })
}

/// Build the window grid for a conversation, pull one speaker embedding per
/// window from the provider, and pair every token with its nearest window.
pub fn align_conversation<P: SpeakerEmbeddingProvider>(
    conv: &Conversation,
    provider: &P,
    window_s: f64,
    shift_s: f64,
) -> Result<(AlignedSequence, Vec<SpeakerWindow>)> {
    if conv.tokens.is_empty() {
        return Err(Error::InvalidArg("align_conversation: empty conversation".into()));
    }
    let grid = window_grid(conv.duration_s, window_s, shift_s)?;
    let embeddings = provider.window_embeddings(conv, &grid);
    if embeddings.len() != grid.len() {
        return Err(Error::Shape(format!(
            "provider returned {} embeddings for {} windows",
            embeddings.len(),
            grid.len()
        )));
    }
    for (i, e) in embeddings.iter().enumerate() {
        if e.len() != SPEAKER_VEC_DIM {
            return Err(Error::Shape(format!(
                "window {i}: embedding dim {} != {SPEAKER_VEC_DIM}",
                e.len()
            )));
        }
    }

    let midpoints: Vec<f64> = grid.iter().map(|w| w.2).collect();
    let mut aligned = Vec::with_capacity(conv.tokens.len());
    for tok in &conv.tokens {
        let idx = assign_window(tok.midpoint_s(), &midpoints)?;
        aligned.push(AlignedToken {
            text_emb: tok.text_emb.clone(),
            spk_emb: embeddings[idx].clone(),
            window_index: idx,
        });
    }

    let windows: Vec<SpeakerWindow> = grid
        .iter()
        .zip(embeddings)
        .map(|(&(start_s, end_s, midpoint_s), spk_emb)| SpeakerWindow {
            start_s,
            end_s,
            midpoint_s,
            spk_emb,
        })
        .collect();

    Ok((AlignedSequence { tokens: aligned }, windows))
}

/// Synthetic stand-in for a trained window-level speaker-embedding
/// extractor: averages the ground-truth speaker vectors of tokens
/// overlapping each window and adds seeded Gaussian noise. Windows with no
/// overlapping token fall back to the conversation-wide mean vector so
/// downstream normalization never sees a zero embedding.
#[derive(Debug, Clone)]
pub struct SyntheticProvider {
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticProvider {
    pub fn new(noise_sigma: f64, seed: u64) -> Self {
        SyntheticProvider { noise_sigma, seed }
    }
}

impl SpeakerEmbeddingProvider for SyntheticProvider {
    fn window_embeddings(&self, conv: &Conversation, grid: &[(f64, f64, f64)]) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::corpus::mix_seed(
            self.seed,
            conv.id.bytes().map(u64::from).sum(),
        ));
        let mut mean = vec![0.0; SPEAKER_VEC_DIM];
        for tok in &conv.tokens {
            for (m, v) in mean.iter_mut().zip(&tok.speaker_vec) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= conv.tokens.len() as f64;
        }

        grid.iter()
            .map(|&(start, end, _)| {
                let mut acc = vec![0.0; SPEAKER_VEC_DIM];
                let mut count = 0usize;
                for tok in &conv.tokens {
                    if tok.onset_s < end && tok.offset_s > start {
                        for (a, v) in acc.iter_mut().zip(&tok.speaker_vec) {
                            *a += v;
                        }
                        count += 1;
                    }
                }
                if count == 0 {
                    acc.copy_from_slice(&mean);
                } else {
                    for a in acc.iter_mut() {
                        *a /= count as f64;
                    }
                }
                if self.noise_sigma > 0.0 {
                    for a in acc.iter_mut() {
                        *a += self.noise_sigma * rng.sample::<f64, _>(StandardNormal);
                    }
                }
                acc
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_corpus, CorpusConfig};

    #[test]
    fn grid_matches_hand_arithmetic() {
        let grid = window_grid(3.0, 1.5, 0.5).unwrap();
        let starts: Vec<f64> = grid.iter().map(|w| w.0).collect();
        let mids: Vec<f64> = grid.iter().map(|w| w.2).collect();
        assert_eq!(starts, vec![0.0, 0.5, 1.0, 1.5]);
        assert_eq!(mids, vec![0.75, 1.25, 1.75, 2.25]);
    }

    #[test]
    fn short_input_gets_single_window() {
        assert_eq!(window_grid(1.0, 1.5, 0.5).unwrap(), vec![(0.0, 1.0, 0.5)]);
        assert_eq!(window_grid(1.5, 1.5, 0.5).unwrap(), vec![(0.0, 1.5, 0.75)]);
    }

    #[test]
    fn grid_rejects_nonpositive_arguments() {
        assert!(window_grid(0.0, 1.5, 0.5).is_err());
        assert!(window_grid(3.0, -1.0, 0.5).is_err());
        assert!(window_grid(3.0, 1.5, 0.0).is_err());
    }

    #[test]
    fn assignment_examples() {
        let mids = [0.75, 1.25, 1.75, 2.25];
        assert_eq!(assign_window(1.9, &mids).unwrap(), 2);
        assert_eq!(assign_window(1.0, &[0.75, 1.25]).unwrap(), 0); // tie -> lower
        assert_eq!(assign_window(7.0, &[0.5]).unwrap(), 0);
        assert_eq!(assign_window(99.0, &mids).unwrap(), 3); // beyond last midpoint
        assert!(assign_window(1.0, &[]).is_err());
    }

    #[test]
    fn assignment_matches_bruteforce_on_random_conversations() {
        let config = CorpusConfig {
            num_words: 40,
            seed: 51,
            ..CorpusConfig::default()
        };
        for conv in generate_corpus(&config, 50).unwrap() {
            let grid = window_grid(conv.duration_s, 1.5, 0.5).unwrap();
            let mids: Vec<f64> = grid.iter().map(|w| w.2).collect();
            for tok in &conv.tokens {
                let got = assign_window(tok.midpoint_s(), &mids).unwrap();
                // independent exhaustive search, lower index on ties
                let mut best = 0;
                for (i, &m) in mids.iter().enumerate() {
                    if (tok.midpoint_s() - m).abs() < (tok.midpoint_s() - mids[best]).abs() {
                        best = i;
                    }
                }
                assert_eq!(got, best, "token at {}", tok.midpoint_s());
            }
        }
    }

    #[test]
    fn assignment_is_monotone() {
        let config = CorpusConfig {
            num_words: 60,
            seed: 8,
            ..CorpusConfig::default()
        };
        let conv = crate::corpus::generate(&config).unwrap();
        let provider = SyntheticProvider::new(0.0, 0);
        let (aligned, _) = align_conversation(&conv, &provider, 1.5, 0.5).unwrap();
        for w in aligned.tokens.windows(2) {
            assert!(w[0].window_index <= w[1].window_index);
        }
    }

    #[test]
    fn close_tokens_share_windows() {
        let mut conv = crate::corpus::generate(&CorpusConfig {
            num_words: 2,
            ..CorpusConfig::default()
        })
        .unwrap();
        conv.tokens[0].onset_s = 0.65;
        conv.tokens[0].offset_s = 0.75;
        conv.tokens[1].onset_s = 0.75;
        conv.tokens[1].offset_s = 0.85;
        conv.duration_s = 2.0;
        let provider = SyntheticProvider::new(0.0, 0);
        let (aligned, _) = align_conversation(&conv, &provider, 1.5, 0.5).unwrap();
        assert_eq!(aligned.tokens[0].window_index, 0);
        assert_eq!(aligned.tokens[1].window_index, 0);
        assert_eq!(aligned.tokens[0].spk_emb, aligned.tokens[1].spk_emb);
    }

    #[test]
    fn provider_dimension_checked() {
        struct BadProvider;
        impl SpeakerEmbeddingProvider for BadProvider {
            fn window_embeddings(
                &self,
                _conv: &Conversation,
                grid: &[(f64, f64, f64)],
            ) -> Vec<Vec<f64>> {
                grid.iter().map(|_| vec![0.0; 8]).collect()
            }
        }
        let conv = crate::corpus::generate(&CorpusConfig::default()).unwrap();
        assert!(align_conversation(&conv, &BadProvider, 1.5, 0.5).is_err());
    }

    #[test]
    fn grid_covers_every_token_midpoint() {
        let config = CorpusConfig {
            num_words: 80,
            seed: 101,
            ..CorpusConfig::default()
        };
        for conv in generate_corpus(&config, 10).unwrap() {
            if conv.duration_s < 1.5 {
                continue;
            }
            let grid = window_grid(conv.duration_s, 1.5, 0.5).unwrap();
            let mids: Vec<f64> = grid.iter().map(|w| w.2).collect();
            for tok in &conv.tokens {
                let idx = assign_window(tok.midpoint_s(), &mids).unwrap();
                assert!((tok.midpoint_s() - mids[idx]).abs() <= 1.5);
            }
        }
    }
}
