//! Frequency-filtered vocabulary and the negative-sampling distribution.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;
use rand::Rng;

use crate::error::{Error, Result};

/// Exponent applied to counts in the negative-sampling distribution.
pub const NEGATIVE_EXPONENT: f64 = 0.75;

/// Accumulates token counts before the minimum-count filter is applied.
#[derive(Default)]
pub struct VocabBuilder {
    counts: HashMap<String, u64>,
}

impl VocabBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, token: &str) {
        if let Some(c) = self.counts.get_mut(token) {
            *c += 1;
        } else {
            self.counts.insert(String::from(token), 1);
        }
    }

    pub fn extend<I, S>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for t in tokens {
            self.add(t.as_ref());
        }
    }

    /// Merges counts gathered by another builder, e.g. over a separate shard.
    pub fn merge(&mut self, other: VocabBuilder) {
        for (token, count) in other.counts {
            *self.counts.entry(token).or_insert(0) += count;
        }
    }

    /// Number of distinct tokens seen so far.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn finish(self, min_count: u64) -> Result<Vocabulary> {
        Vocabulary::from_counts(self.counts, min_count)
    }
}

/// Token ↔ id map with counts.
///
/// Ids are dense and assigned by descending count, ties broken by the
/// lexicographic order of the tokens.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    total_tokens: u64,
    sampler: NegativeSampler,
}

impl Vocabulary {
    /// Counts `tokens` and keeps those occurring at least `min_count` times.
    pub fn build<I, S>(tokens: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut builder = VocabBuilder::new();
        builder.extend(tokens);
        builder.finish(min_count)
    }

    pub fn from_counts<I>(counts: I, min_count: u64) -> Result<Self>
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut kept: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count.max(1))
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocab);
        }
        kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let (tokens, counts): (Vec<_>, Vec<_>) = kept.into_iter().unzip();
        Self::assemble(tokens, counts)
    }

    /// Builds a vocabulary whose ids follow the given token order, as read
    /// from a model file. Files carry no counts, so each token receives the
    /// rank-derived count `len - id`, which keeps the id order consistent
    /// with descending counts.
    pub fn from_ordered_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyVocab);
        }
        let n = tokens.len() as u64;
        let counts = (0..n).map(|i| n - i).collect();
        Self::assemble(tokens, counts)
    }

    fn assemble(tokens: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        if tokens.len() > u32::MAX as usize {
            return Err(Error::InvalidConfig("vocabulary exceeds u32 ids".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (id, token) in tokens.iter().enumerate() {
            if index.insert(token.clone(), id as u32).is_some() {
                return Err(Error::Validation(format!("duplicate token '{token}'")));
            }
        }
        let total_tokens = counts.iter().sum();
        let sampler = NegativeSampler::new(&counts);
        Ok(Vocabulary { tokens, counts, index, total_tokens, sampler })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Panics if `id` is out of range.
    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Corpus length after filtering.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Relative frequency of `id` in the filtered corpus.
    pub fn frequency(&self, id: u32) -> f64 {
        self.counts[id as usize] as f64 / self.total_tokens as f64
    }

    /// Maps tokens to ids, skipping tokens outside the vocabulary.
    pub fn encode<I, S>(&self, tokens: I) -> Vec<u32>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        tokens.into_iter().filter_map(|t| self.id(t.as_ref())).collect()
    }

    pub fn negative_sampler(&self) -> &NegativeSampler {
        &self.sampler
    }

    /// Draws `n` ids i.i.d. from the negative-sampling distribution.
    pub fn negative_sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<u32> {
        (0..n).map(|_| self.sampler.sample(rng)).collect()
    }
}

/// Distribution over ids proportional to `count^0.75`.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(counts: &[u64]) -> Self {
        let weights: Vec<f64> = counts
            .iter()
            .map(|&c| libm::pow(c as f64, NEGATIVE_EXPONENT))
            .collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        NegativeSampler { probs, cdf }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        idx.min(self.cdf.len() - 1) as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn counts(pairs: &[(&str, u64)]) -> Vec<(String, u64)> {
        pairs.iter().map(|(t, c)| (String::from(*t), *c)).collect()
    }

    #[test]
    fn min_count_boundary() {
        let v = Vocabulary::from_counts(counts(&[("a", 10), ("b", 4)]), 5).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.id("a"), Some(0));
        assert_eq!(v.id("b"), None);
        let v = Vocabulary::from_counts(counts(&[("a", 5)]), 5).unwrap();
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn ties_break_lexicographically() {
        let v = Vocabulary::from_counts(counts(&[("b", 7), ("a", 7)]), 5).unwrap();
        assert_eq!(v.id("a"), Some(0));
        assert_eq!(v.id("b"), Some(1));
    }

    #[test]
    fn ids_follow_descending_counts() {
        let v = Vocabulary::build("c a b a c c x".split(' '), 1).unwrap();
        assert_eq!(v.tokens(), ["c", "a", "b", "x"]);
        assert_eq!(v.counts(), [3, 2, 1, 1]);
        assert_eq!(v.total_tokens(), 7);
    }

    #[test]
    fn all_below_threshold_is_empty() {
        let err = Vocabulary::from_counts(counts(&[("a", 1), ("b", 4)]), 5).unwrap_err();
        assert_eq!(err, Error::EmptyVocab);
        assert_eq!(Vocabulary::build(Vec::<&str>::new(), 1).unwrap_err(), Error::EmptyVocab);
    }

    #[test]
    fn negative_probabilities_follow_three_quarter_power() {
        let v = Vocabulary::from_counts(counts(&[("a", 1), ("b", 8)]), 1).unwrap();
        let p = v.negative_sampler().probabilities();
        let b = v.id("b").unwrap() as usize;
        let expected = libm::pow(8.0, 0.75) / (1.0 + libm::pow(8.0, 0.75));
        assert!((p[b] - expected).abs() < 1e-12);
        assert!((p[b] - 0.826).abs() < 1e-3);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_word_always_sampled() {
        let v = Vocabulary::from_counts(counts(&[("only", 3)]), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(v.negative_sample(&mut rng, 1000).iter().all(|&id| id == 0));
    }

    #[test]
    fn uniform_counts_sample_uniformly() {
        let toks: Vec<(String, u64)> =
            (0..10).map(|i| (alloc::format!("w{i}"), 50)).collect();
        let v = Vocabulary::from_counts(toks, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let mut hist = vec![0usize; 10];
        for id in v.negative_sample(&mut rng, draws) {
            hist[id as usize] += 1;
        }
        let mean = draws as f64 / 10.0;
        let sigma = libm::sqrt(draws as f64 * 0.1 * 0.9);
        for h in hist {
            assert!((h as f64 - mean).abs() <= 3.0 * sigma, "{h} vs {mean}");
        }
    }

    #[test]
    fn empirical_frequencies_match_probabilities() {
        let v = Vocabulary::from_counts(counts(&[("a", 1), ("b", 8)]), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 100_000;
        let b = v.id("b").unwrap();
        let hits = v.negative_sample(&mut rng, draws).iter().filter(|&&i| i == b).count();
        let p = v.negative_sampler().probabilities()[b as usize];
        let sigma = libm::sqrt(draws as f64 * p * (1.0 - p));
        assert!((hits as f64 - p * draws as f64).abs() <= 3.0 * sigma);
    }

    #[test]
    fn ordered_tokens_keep_file_order() {
        let v = Vocabulary::from_ordered_tokens(vec!["z".into(), "a".into(), "m".into()]).unwrap();
        assert_eq!(v.id("z"), Some(0));
        assert_eq!(v.id("m"), Some(2));
        assert!(v.counts().windows(2).all(|w| w[0] > w[1]));
        let dup = Vocabulary::from_ordered_tokens(vec!["a".into(), "a".into()]);
        assert!(matches!(dup, Err(Error::Validation(_))));
    }

    #[test]
    fn encode_skips_unknown() {
        let v = Vocabulary::build(["a", "b", "a"], 1).unwrap();
        assert_eq!(v.encode(["a", "zzz", "b"]), vec![0, 1]);
    }
}
