//! Seeded synthetic conversations and the line-delimited corpus format.
//!
//! Each conversation is a stream of timed sub-word tokens with speaker
//! identities, change labels derived from adjacent speaker ids, a 768-d
//! text embedding per token, and a 256-d ground-truth speaker vector used
//! by the synthetic window-embedding provider.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::alignment::SpeakerWindow;
use crate::error::{Error, Result};

pub const TEXT_EMB_DIM: usize = 768;
pub const SPEAKER_VEC_DIM: usize = 256;

/// Per-token change label; `Change` marks the first token of a new turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Same,
    Change,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Token {
    pub onset_s: f64,
    pub offset_s: f64,
    pub speaker_id: usize,
    pub label: Label,
    pub text_emb: Vec<f64>,
    pub speaker_vec: Vec<f64>,
}

impl Token {
    pub fn midpoint_s(&self) -> f64 {
        0.5 * (self.onset_s + self.offset_s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Conversation {
    pub id: String,
    pub duration_s: f64,
    pub tokens: Vec<Token>,
    /// Sliding-window grid, populated by the alignment stage. Not part of
    /// the corpus file format.
    #[serde(skip)]
    pub windows: Vec<SpeakerWindow>,
}

impl Conversation {
    pub fn labels(&self) -> Vec<Label> {
        self.tokens.iter().map(|t| t.label).collect()
    }
}

/// Knobs of the synthetic generator. Everything is reproducible from
/// `(config, seed)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusConfig {
    pub num_speakers: usize,
    pub mean_turn_len_words: f64,
    pub num_words: usize,
    pub word_dur_range_s: (f64, f64),
    pub inter_word_gap_s: (f64, f64),
    /// Per-component sigma of the Gaussian noise added to the speaker
    /// centroid for each token's ground-truth speaker vector.
    pub speaker_noise_sigma: f64,
    /// Mixing weight of the cue distribution into the text embedding of
    /// the first token after each change.
    pub text_cue_strength: f64,
    pub vocab_size: usize,
    pub seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            num_speakers: 4,
            mean_turn_len_words: 15.0,
            num_words: 60,
            word_dur_range_s: (0.1, 0.4),
            inter_word_gap_s: (0.01, 0.1),
            speaker_noise_sigma: 0.2,
            text_cue_strength: 0.5,
            vocab_size: 128,
            seed: 1,
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_speakers < 2 {
            return Err(Error::InvalidArg(format!(
                "num_speakers {} < 2",
                self.num_speakers
            )));
        }
        if self.num_words < 2 {
            return Err(Error::InvalidArg(format!("num_words {} < 2", self.num_words)));
        }
        if self.mean_turn_len_words <= 1.0 {
            return Err(Error::InvalidArg(format!(
                "mean_turn_len_words {} must exceed 1",
                self.mean_turn_len_words
            )));
        }
        let (dmin, dmax) = self.word_dur_range_s;
        if !(dmin > 0.0 && dmax >= dmin) {
            return Err(Error::InvalidArg(format!(
                "word_dur_range_s ({dmin}, {dmax}) invalid"
            )));
        }
        let (gmin, gmax) = self.inter_word_gap_s;
        if !(gmin >= 0.0 && gmax >= gmin) {
            return Err(Error::InvalidArg(format!(
                "inter_word_gap_s ({gmin}, {gmax}) invalid"
            )));
        }
        if self.speaker_noise_sigma < 0.0 {
            return Err(Error::InvalidArg("speaker_noise_sigma < 0".into()));
        }
        if !(0.0..=1.0).contains(&self.text_cue_strength) {
            return Err(Error::InvalidArg("text_cue_strength outside [0,1]".into()));
        }
        if self.vocab_size == 0 {
            return Err(Error::InvalidArg("vocab_size == 0".into()));
        }
        Ok(())
    }
}

/// Standard 64-bit seed mixer; used to derive independent per-conversation
/// streams from one corpus seed.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn normal_vec<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn uniform_in<R: Rng>(rng: &mut R, range: (f64, f64)) -> f64 {
    if range.0 == range.1 {
        range.0
    } else {
        rng.gen_range(range.0..range.1)
    }
}

/// Generate one conversation from the config's own seed.
pub fn generate(config: &CorpusConfig) -> Result<Conversation> {
    generate_with_id(config, "conv-00000".to_string(), config.seed)
}

/// Generate a corpus of `count` conversations with independent streams
/// derived from the config seed.
pub fn generate_corpus(config: &CorpusConfig, count: usize) -> Result<Vec<Conversation>> {
    (0..count)
        .map(|i| {
            generate_with_id(
                config,
                format!("conv-{i:05}"),
                mix_seed(config.seed, i as u64),
            )
        })
        .collect()
}

fn generate_with_id(config: &CorpusConfig, id: String, seed: u64) -> Result<Conversation> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Seeded vocabulary table plus a distinguished cue distribution centre.
    let vocab: Vec<Vec<f64>> = (0..config.vocab_size)
        .map(|_| normal_vec(&mut rng, TEXT_EMB_DIM))
        .collect();
    let cue_centre = normal_vec(&mut rng, TEXT_EMB_DIM);

    // Per-speaker centroids: uniform directions scaled to norm sqrt(256).
    let target_norm = (SPEAKER_VEC_DIM as f64).sqrt();
    let centroids: Vec<Vec<f64>> = (0..config.num_speakers)
        .map(|_| {
            let v = normal_vec(&mut rng, SPEAKER_VEC_DIM);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x * target_norm / norm).collect()
        })
        .collect();

    // Speaker turn stream: geometric lengths, uniformly chosen next speaker.
    let p = 1.0 / config.mean_turn_len_words;
    let mut speaker = rng.gen_range(0..config.num_speakers);
    let mut remaining = sample_geometric(&mut rng, p);
    let mut tokens = Vec::with_capacity(config.num_words);
    let mut clock = 0.0;

    for i in 0..config.num_words {
        if remaining == 0 {
            let step = rng.gen_range(1..config.num_speakers);
            speaker = (speaker + step) % config.num_speakers;
            remaining = sample_geometric(&mut rng, p);
        }
        remaining -= 1;

        let label = if i == 0 {
            Label::Same
        } else if tokens[i - 1].speaker_id != speaker {
            Label::Change
        } else {
            Label::Same
        };

        let dur = uniform_in(&mut rng, config.word_dur_range_s);
        let gap = uniform_in(&mut rng, config.inter_word_gap_s);
        let onset = clock;
        let offset = clock + dur;
        clock = offset + gap;

        let speaker_vec: Vec<f64> = centroids[speaker]
            .iter()
            .map(|c| c + config.speaker_noise_sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();

        let word = rng.gen_range(0..config.vocab_size);
        let text_emb: Vec<f64> = if label == Label::Change {
            let w = config.text_cue_strength;
            vocab[word]
                .iter()
                .zip(&cue_centre)
                .map(|(v, c)| {
                    (1.0 - w) * v + w * (c + 0.25 * rng.sample::<f64, _>(StandardNormal))
                })
                .collect()
        } else {
            vocab[word].clone()
        };

        tokens.push(Token {
            onset_s: onset,
            offset_s: offset,
            speaker_id: speaker,
            label,
            text_emb,
            speaker_vec,
        });
    }

    Ok(Conversation {
        id,
        duration_s: clock,
        tokens,
        windows: Vec::new(),
    })
}

/// Geometric sample with support {1, 2, ...} and mean 1/p.
fn sample_geometric<R: Rng>(rng: &mut R, p: f64) -> usize {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    1 + (u.ln() / (1.0 - p).ln()).floor() as usize
}

/// Fraction of `change` labels over all tokens.
pub fn class_balance(conversations: &[Conversation]) -> Result<f64> {
    let total: usize = conversations.iter().map(|c| c.tokens.len()).sum();
    if total == 0 {
        return Err(Error::Corpus("class_balance on empty corpus".into()));
    }
    let changes: usize = conversations
        .iter()
        .flat_map(|c| &c.tokens)
        .filter(|t| t.label == Label::Change)
        .count();
    Ok(changes as f64 / total as f64)
}

pub fn write_corpus(conversations: &[Conversation], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for conv in conversations {
        serde_json::to_writer(&mut out, conv)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_corpus(path: &Path) -> Result<Vec<Conversation>> {
    let reader = BufReader::new(File::open(path)?);
    let mut conversations = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let conv: Conversation = serde_json::from_str(&line).map_err(|e| Error::CorpusLine {
            line: line_no,
            message: e.to_string(),
        })?;
        validate_conversation(&conv, line_no)?;
        conversations.push(conv);
    }
    Ok(conversations)
}

fn validate_conversation(conv: &Conversation, line: usize) -> Result<()> {
    let fail = |message: String| Error::CorpusLine { line, message };
    if conv.tokens.is_empty() {
        return Err(fail(format!("conversation {}: empty token list", conv.id)));
    }
    let mut prev_onset = f64::NEG_INFINITY;
    for (i, tok) in conv.tokens.iter().enumerate() {
        if !(tok.offset_s > tok.onset_s) {
            return Err(fail(format!(
                "token {i}: offset_s {} <= onset_s {}",
                tok.offset_s, tok.onset_s
            )));
        }
        if tok.onset_s <= prev_onset {
            return Err(fail(format!("token {i}: onset_s not strictly increasing")));
        }
        prev_onset = tok.onset_s;
        if tok.text_emb.len() != TEXT_EMB_DIM {
            return Err(fail(format!(
                "token {i}: text_emb has {} dims, expected {TEXT_EMB_DIM}",
                tok.text_emb.len()
            )));
        }
        if tok.speaker_vec.len() != SPEAKER_VEC_DIM {
            return Err(fail(format!(
                "token {i}: speaker_vec has {} dims, expected {SPEAKER_VEC_DIM}",
                tok.speaker_vec.len()
            )));
        }
        if tok.text_emb.iter().chain(&tok.speaker_vec).any(|v| !v.is_finite()) {
            return Err(fail(format!("token {i}: non-finite embedding value")));
        }
        let expected = if i == 0 {
            Label::Same
        } else if conv.tokens[i - 1].speaker_id != tok.speaker_id {
            Label::Change
        } else {
            Label::Same
        };
        if tok.label != expected {
            return Err(fail(format!(
                "token {i}: label {:?} inconsistent with speaker ids",
                tok.label
            )));
        }
    }
    let last_offset = conv.tokens.last().unwrap().offset_s;
    if conv.duration_s < last_offset {
        return Err(fail(format!(
            "duration_s {} shorter than last offset {last_offset}",
            conv.duration_s
        )));
    }
    Ok(())
}
