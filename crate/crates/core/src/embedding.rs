//! Text encoding and similarity scoring.
//!
//! Every entity that takes part in retrieval (queries, model profiles and
//! dataset profiles) goes through the same [`Encoder`]. The default encoder
//! hashes character n-grams of each word into a fixed number of buckets, which
//! keeps single-character typos close to the original text without any
//! learned weights.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_DIMENSION: usize = 256;
pub const DEFAULT_SEED: u64 = 0x5051_4145_4d42_4544;
pub const DEFAULT_NGRAM_MIN: usize = 3;
pub const DEFAULT_NGRAM_MAX: usize = 5;

const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbeddingError {
    #[error("text has no alphanumeric content after normalization")]
    EmptyText,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("vector has zero norm or non-finite components")]
    Degenerate,
    #[error("invalid encoder configuration: {0}")]
    InvalidConfig(String),
}

/// A unit-length vector.
///
/// The only ways to build one normalize the input, so every value of this
/// type has an L2 norm of 1 within floating-point tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    /// Normalizes `values` to unit length. Rejects empty, zero and non-finite vectors.
    pub fn from_raw(mut values: Vec<f64>) -> Result<Self, EmbeddingError> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(EmbeddingError::Degenerate);
        }
        let norm = l2_norm(&values);
        if norm == 0.0 || !norm.is_finite() {
            return Err(EmbeddingError::Degenerate);
        }
        for v in &mut values {
            *v /= norm;
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }
}

impl<'de> Deserialize<'de> for Embedding {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let values = Vec::<f64>::deserialize(deserializer)?;
        let norm = l2_norm(&values);
        if values.is_empty() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(serde::de::Error::custom(format!("stored embedding is not unit length (norm {norm})")));
        }
        Ok(Self(values))
    }
}

fn l2_norm(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Cosine similarity of two embeddings of equal dimension.
pub fn cosine(a: &Embedding, b: &Embedding) -> Result<f64, EmbeddingError> {
    if a.dimension() != b.dimension() {
        return Err(EmbeddingError::DimensionMismatch { expected: a.dimension(), actual: b.dimension() });
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    let denom = l2_norm(&a.0) * l2_norm(&b.0);
    Ok((dot / denom).clamp(-1.0, 1.0))
}

/// Anything that turns text into an [`Embedding`] of a fixed dimension.
pub trait Encoder: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Embedding, EmbeddingError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    pub dimension: usize,
    pub seed: u64,
    pub ngram_min: usize,
    pub ngram_max: usize,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            dimension: DEFAULT_DIMENSION,
            seed: DEFAULT_SEED,
            ngram_min: DEFAULT_NGRAM_MIN,
            ngram_max: DEFAULT_NGRAM_MAX,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        if self.dimension == 0 {
            return Err(EmbeddingError::InvalidConfig("dimension must be positive".into()));
        }
        if self.ngram_min == 0 || self.ngram_min > self.ngram_max {
            return Err(EmbeddingError::InvalidConfig(format!(
                "bad n-gram range {}..={}",
                self.ngram_min, self.ngram_max
            )));
        }
        Ok(())
    }
}

/// Feature-hashing encoder over character n-grams.
///
/// Each whitespace token is wrapped in `<` and `>` boundary markers before
/// n-grams are taken, so short tokens such as "19" still contribute and word
/// starts and ends are distinguishable from word interiors.
///
/// The top bit of an n-gram's hash gives it a sign, so n-grams that collide
/// in a bucket cancel on average instead of piling up; unrelated texts then
/// score near zero rather than sharing a large positive baseline. In the rare
/// case that every bucket cancels, the unsigned counts are used.
#[derive(Debug, Clone, Default)]
pub struct HashNgramEncoder {
    config: EncoderConfig,
}

impl HashNgramEncoder {
    pub fn new(config: EncoderConfig) -> Result<Self, EmbeddingError> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    /// Bucket index of a single n-gram.
    pub fn bucket(&self, ngram: &str) -> usize {
        (seeded_hash(self.config.seed, ngram.as_bytes()) % self.config.dimension as u64) as usize
    }

    /// `+1.0` or `-1.0`, from the top bit of the n-gram's hash.
    pub fn sign(&self, ngram: &str) -> f64 {
        if seeded_hash(self.config.seed, ngram.as_bytes()) >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// All n-grams the encoder extracts from `text`, in extraction order.
    pub fn ngrams(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        self.for_each_ngram(text, |g| out.push(g.to_string()));
        out
    }

    fn for_each_ngram(&self, text: &str, mut f: impl FnMut(&str)) {
        let (lo, hi) = (self.config.ngram_min, self.config.ngram_max);
        let mut padded = String::new();
        let mut bounds: Vec<usize> = Vec::new();
        for token in normalize(text).split_whitespace() {
            padded.clear();
            padded.push('<');
            padded.push_str(token);
            padded.push('>');
            bounds.clear();
            bounds.extend(padded.char_indices().map(|(i, _)| i));
            bounds.push(padded.len());
            let chars = bounds.len() - 1;
            for n in lo..=hi.min(chars) {
                for start in 0..=chars - n {
                    f(&padded[bounds[start]..bounds[start + n]]);
                }
            }
        }
    }
}

impl Encoder for HashNgramEncoder {
    fn dimension(&self) -> usize {
        self.config.dimension
    }

    fn embed(&self, text: &str) -> Result<Embedding, EmbeddingError> {
        let dim = self.config.dimension as u64;
        let mut signed = vec![0.0; self.config.dimension];
        let mut counts = vec![0.0; self.config.dimension];
        let mut any = false;
        self.for_each_ngram(text, |g| {
            let h = seeded_hash(self.config.seed, g.as_bytes());
            let b = (h % dim) as usize;
            signed[b] += if h >> 63 == 0 { 1.0 } else { -1.0 };
            counts[b] += 1.0;
            any = true;
        });
        if !any {
            return Err(EmbeddingError::EmptyText);
        }
        if signed.iter().all(|v| *v == 0.0) {
            return Embedding::from_raw(counts).map_err(|_| EmbeddingError::EmptyText);
        }
        Embedding::from_raw(signed).map_err(|_| EmbeddingError::EmptyText)
    }
}

/// Lowercases and replaces every non-alphanumeric character with a space.
pub fn normalize(text: &str) -> String {
    text.chars().flat_map(char::to_lowercase).map(|c| if c.is_alphanumeric() { c } else { ' ' }).collect()
}

/// FNV-1a over the seed bytes followed by the input, then a splitmix64 finalizer.
fn seeded_hash(seed: u64, bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for b in seed.to_le_bytes().iter().chain(bytes) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(PRIME);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::{BTreeSet, HashMap};

    /// Straight-line reimplementation of the default encoding used as an oracle.
    fn reference_embed(text: &str, dim: usize, seed: u64) -> Vec<f64> {
        let lowered: String = text.to_lowercase();
        let cleaned: String = lowered.chars().map(|c| if c.is_alphanumeric() { c } else { ' ' }).collect();
        let mut tf: HashMap<String, f64> = HashMap::new();
        for tok in cleaned.split(' ').filter(|t| !t.is_empty()) {
            let p: Vec<char> = format!("<{tok}>").chars().collect();
            for n in 3..=5 {
                for i in 0..p.len().saturating_sub(n - 1) {
                    let g: String = p[i..i + n].iter().collect();
                    *tf.entry(g).or_default() += 1.0;
                }
            }
        }
        let mut v = vec![0.0; dim];
        for (g, c) in &tf {
            let h = seeded_hash(seed, g.as_bytes());
            v[(h % dim as u64) as usize] += if h >> 63 == 0 { *c } else { -*c };
        }
        if v.iter().all(|x| *x == 0.0) {
            for (g, c) in &tf {
                v[(seeded_hash(seed, g.as_bytes()) % dim as u64) as usize] += *c;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / n).collect()
    }

    fn plain_cos(a: &[f64], b: &[f64]) -> f64 {
        let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        d / (a.iter().map(|x| x * x).sum::<f64>().sqrt() * b.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    #[test]
    fn embedding_is_deterministic() {
        let enc = HashNgramEncoder::default();
        let a = enc.embed("predict insurance charge").unwrap();
        let b = enc.embed("predict insurance charge").unwrap();
        let bits = |e: &Embedding| e.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn matches_reference_encoder() {
        let enc = HashNgramEncoder::default();
        for text in ["predict insurance charge", "Hours Studied, Sleep-Hours!", "a b c 19"] {
            let got = enc.embed(text).unwrap();
            let want = reference_embed(text, DEFAULT_DIMENSION, DEFAULT_SEED);
            for (g, w) in got.values().iter().zip(&want) {
                assert!((g - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn typo_variant_stays_close() {
        let q = "predict insurance charge for a 19 year old female non smoker";
        assert_eq!(q.len(), 60);
        let typo = q.replace("insurance", "insurence");
        // Oracle value from the reference implementation, frozen here.
        let oracle = plain_cos(
            &reference_embed(q, DEFAULT_DIMENSION, DEFAULT_SEED),
            &reference_embed(&typo, DEFAULT_DIMENSION, DEFAULT_SEED),
        );
        assert!(oracle >= 0.6, "oracle cosine {oracle}");
        let enc = HashNgramEncoder::default();
        let got = cosine(&enc.embed(q).unwrap(), &enc.embed(&typo).unwrap()).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert!(got >= 0.6);
    }

    #[test]
    fn empty_text_is_rejected() {
        let enc = HashNgramEncoder::default();
        assert_eq!(enc.embed("").unwrap_err(), EmbeddingError::EmptyText);
        assert_eq!(enc.embed(" ,.;!? -- ").unwrap_err(), EmbeddingError::EmptyText);
        assert!(enc.embed("a").is_ok());
    }

    #[test]
    fn cosine_extremes() {
        let enc = HashNgramEncoder::default();
        let v = enc.embed("house price").unwrap();
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert!((cosine(&v, &v.negated()).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_dimension_mismatch() {
        let a = Embedding::from_raw(vec![1.0, 0.0]).unwrap();
        let b = Embedding::from_raw(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(cosine(&a, &b).unwrap_err(), EmbeddingError::DimensionMismatch { expected: 2, actual: 3 });
    }

    #[test]
    fn disjoint_buckets_are_orthogonal() {
        let enc = HashNgramEncoder::default();
        let buckets = |t: &str| enc.ngrams(t).iter().map(|g| enc.bucket(g)).collect::<BTreeSet<_>>();
        let words = ["a", "b", "c", "d", "x", "z", "q", "k", "j", "ox", "zz", "qq", "kiwi", "jam", "yak", "fig"];
        let mut pair = None;
        'outer: for (i, a) in words.iter().enumerate() {
            for b in &words[i + 1..] {
                if buckets(a).is_disjoint(&buckets(b)) {
                    pair = Some((*a, *b));
                    break 'outer;
                }
            }
        }
        let (a, b) = pair.expect("some pair of short words hashes to disjoint buckets");
        let c = cosine(&enc.embed(a).unwrap(), &enc.embed(b).unwrap()).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn zero_vector_is_rejected() {
        assert_eq!(Embedding::from_raw(vec![0.0; 4]).unwrap_err(), EmbeddingError::Degenerate);
        assert_eq!(Embedding::from_raw(vec![]).unwrap_err(), EmbeddingError::Degenerate);
    }

    #[test]
    fn config_validation() {
        assert!(HashNgramEncoder::new(EncoderConfig { dimension: 0, ..Default::default() }).is_err());
        assert!(HashNgramEncoder::new(EncoderConfig { ngram_min: 4, ngram_max: 3, ..Default::default() }).is_err());
    }

    proptest! {
        #[test]
        fn embeddings_are_unit_norm(text in "[a-zA-Z0-9 ,.-]{1,80}") {
            let enc = HashNgramEncoder::default();
            match enc.embed(&text) {
                Ok(e) => {
                    let n = e.values().iter().map(|v| v * v).sum::<f64>().sqrt();
                    prop_assert!((n - 1.0).abs() < 1e-9);
                    prop_assert_eq!(e.dimension(), DEFAULT_DIMENSION);
                    prop_assert!((cosine(&e, &e).unwrap() - 1.0).abs() < 1e-9);
                }
                Err(err) => {
                    prop_assert_eq!(err, EmbeddingError::EmptyText);
                    prop_assert!(!text.chars().any(|c| c.is_alphanumeric()));
                }
            }
        }

        #[test]
        fn cosine_is_symmetric_and_bounded(a in "[a-z ]{0,40}[a-z]", b in "[a-z ]{0,40}[a-z]") {
            let enc = HashNgramEncoder::default();
            let (ea, eb) = (enc.embed(&a).unwrap(), enc.embed(&b).unwrap());
            let ab = cosine(&ea, &eb).unwrap();
            prop_assert_eq!(ab.to_bits(), cosine(&eb, &ea).unwrap().to_bits());
            prop_assert!(ab.abs() <= 1.0 + 1e-9);
        }
    }
}
