//! Skip-gram point embeddings trained with negative sampling.
//!
//! Each token owns a word vector and a context vector. The model probability
//! of a context given a word is the softmax over dot products with every
//! context vector; training optimizes the logistic negative-sampling
//! surrogate of that softmax.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::TrainConfig;
use crate::error::{Error, Result};
use crate::math::{dot, log_sigmoid, sigmoid, Real};
use crate::pairs::{subsample, PairStream};
use crate::vocab::Vocabulary;

#[derive(Clone, Debug, PartialEq)]
pub struct PointEmbedding<F: Real = f32> {
    dims: usize,
    word: Vec<F>,
    ctx: Vec<F>,
}

impl<F: Real> PointEmbedding<F> {
    /// Word vectors uniform in `[-0.5/D, 0.5/D]`, context vectors zero.
    pub fn init(vocab_len: usize, dims: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = 0.5 / dims as f64;
        let word = (0..vocab_len * dims)
            .map(|_| F::from_f64(rng.random_range(-half..=half)))
            .collect();
        PointEmbedding { dims, word, ctx: vec![F::default(); vocab_len * dims] }
    }

    pub fn from_parts(dims: usize, word: Vec<F>, ctx: Vec<F>) -> Result<Self> {
        if dims == 0 || !word.len().is_multiple_of(dims) {
            return Err(Error::DimensionMismatch { expected: dims, actual: word.len() });
        }
        if ctx.len() != word.len() {
            return Err(Error::DimensionMismatch { expected: word.len(), actual: ctx.len() });
        }
        Ok(PointEmbedding { dims, word, ctx })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of rows (the vocabulary size).
    pub fn len(&self) -> usize {
        self.word.len() / self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn word(&self, id: u32) -> &[F] {
        let s = id as usize * self.dims;
        &self.word[s..s + self.dims]
    }

    pub fn context(&self, id: u32) -> &[F] {
        let s = id as usize * self.dims;
        &self.ctx[s..s + self.dims]
    }

    pub fn word_matrix(&self) -> &[F] {
        &self.word
    }

    pub fn context_matrix(&self) -> &[F] {
        &self.ctx
    }

    /// Both matrices, mutably, for training loops.
    pub fn matrices_mut(&mut self) -> (&mut [F], &mut [F]) {
        (&mut self.word, &mut self.ctx)
    }

    pub fn into_parts(self) -> (usize, Vec<F>, Vec<F>) {
        (self.dims, self.word, self.ctx)
    }

    /// Exact softmax probability of context `c` given word `w` over the
    /// whole vocabulary.
    pub fn softmax_prob(&self, w: u32, c: u32) -> f64 {
        let wv = self.word(w);
        let scores: Vec<f64> = self.ctx.chunks_exact(self.dims).map(|cv| dot(wv, cv)).collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let denom: f64 = scores.iter().map(|s| libm::exp(s - max)).sum();
        libm::exp(scores[c as usize] - max) / denom
    }

    /// Negative-sampling loss `-ln σ(c·w) - Σ ln σ(-n·w)`.
    pub fn sgns_loss(&self, center: u32, context: u32, negatives: &[u32]) -> f64 {
        let w = self.word(center);
        let mut loss = -log_sigmoid(dot(w, self.context(context)));
        for &n in negatives {
            loss -= log_sigmoid(-dot(w, self.context(n)));
        }
        loss
    }

    /// One SGD step on the negative-sampling loss. Returns the loss before
    /// the update.
    pub fn sgns_step(&mut self, center: u32, context: u32, negatives: &[u32], lr: f64) -> f64 {
        let dims = self.dims;
        let s = center as usize * dims;
        let mut scratch = SgnsScratch::default();
        sgns_update(&mut self.word[s..s + dims], &mut self.ctx, dims, context, negatives, lr, &mut scratch)
    }
}

/// Reusable buffers for [`sgns_update`].
#[derive(Default)]
pub struct SgnsScratch {
    coef: Vec<f64>,
    neu1e: Vec<f64>,
}

/// Simultaneous SGD update of one center row and the context rows of
/// `context` and `negatives`. All gradients are taken at the pre-update
/// parameters, so a negative that repeats the context contributes both
/// gradient terms to the same row.
pub fn sgns_update<F: Real>(
    word: &mut [F],
    ctx: &mut [F],
    dims: usize,
    context: u32,
    negatives: &[u32],
    lr: f64,
    scratch: &mut SgnsScratch,
) -> f64 {
    let row = |id: u32| id as usize * dims..(id as usize + 1) * dims;
    let targets = core::iter::once((context, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));

    scratch.coef.clear();
    let mut loss = 0.0;
    for (id, label) in targets.clone() {
        let score = dot(word, &ctx[row(id)]);
        loss -= if label > 0.0 { log_sigmoid(score) } else { log_sigmoid(-score) };
        scratch.coef.push(lr * (label - sigmoid(score)));
    }

    scratch.neu1e.clear();
    scratch.neu1e.resize(dims, 0.0);
    for ((id, _), &g) in targets.clone().zip(&scratch.coef) {
        for (e, c) in scratch.neu1e.iter_mut().zip(&ctx[row(id)]) {
            *e += g * c.to_f64();
        }
    }
    for ((id, _), &g) in targets.zip(&scratch.coef) {
        for (c, w) in ctx[row(id)].iter_mut().zip(word.iter()) {
            *c = F::from_f64(c.to_f64() + g * w.to_f64());
        }
    }
    for (w, e) in word.iter_mut().zip(&scratch.neu1e) {
        *w = F::from_f64(w.to_f64() + e);
    }
    loss
}

/// Linear learning-rate decay from `lr0` to `lr0 / 100` over `total` tokens.
#[derive(Clone, Copy, Debug)]
pub struct LrSchedule {
    pub lr0: f64,
    pub total: u64,
}

impl LrSchedule {
    pub fn at(&self, processed: u64) -> f64 {
        let floor = self.lr0 / 100.0;
        if self.total == 0 {
            return self.lr0;
        }
        let progress = (processed as f64 / self.total as f64).min(1.0);
        self.lr0 - (self.lr0 - floor) * progress
    }
}

/// Per-epoch training summary.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub pairs: u64,
    pub tokens: u64,
    pub mean_loss: f64,
}

/// RNG for a training worker: the base seed with a per-worker stream.
pub fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64 + 1);
    rng
}

/// Trains skip-gram pairs of individual sequences against caller-provided
/// parameter matrices. One instance per worker.
pub struct SgnsWorker<'v> {
    vocab: &'v Vocabulary,
    cfg: TrainConfig,
    rng: ChaCha8Rng,
    negatives: Vec<u32>,
    scratch: SgnsScratch,
}

impl<'v> SgnsWorker<'v> {
    pub fn new(vocab: &'v Vocabulary, cfg: &TrainConfig, worker: usize) -> Self {
        SgnsWorker {
            vocab,
            cfg: cfg.clone(),
            rng: worker_rng(cfg.seed, worker),
            negatives: Vec::with_capacity(cfg.negatives),
            scratch: SgnsScratch::default(),
        }
    }

    /// Trains every pair of `seq`. `processed` is the number of tokens
    /// consumed before this sequence, used for the learning-rate schedule.
    /// Returns `(loss sum, pair count)`.
    pub fn train_sequence<F: Real>(
        &mut self,
        word: &mut [F],
        ctx: &mut [F],
        seq: &[u32],
        schedule: &LrSchedule,
        processed: u64,
    ) -> (f64, u64) {
        let dims = self.cfg.dims;
        let kept;
        let seq = if self.cfg.subsample > 0.0 {
            kept = subsample(seq, self.vocab, self.cfg.subsample, &mut self.rng);
            &kept[..]
        } else {
            seq
        };
        let mut stream = if self.cfg.dynamic_window {
            PairStream::dynamic(seq, self.cfg.window, &mut self.rng)
        } else {
            PairStream::fixed(seq, self.cfg.window)
        };
        let mut loss = 0.0;
        let mut pairs = 0;
        let sampler = self.vocab.negative_sampler();
        while let Some((center, context)) = stream.next() {
            let lr = schedule.at(processed + stream.position() as u64);
            self.negatives.clear();
            for _ in 0..self.cfg.negatives {
                self.negatives.push(sampler.sample(&mut self.rng));
            }
            let s = center as usize * dims;
            loss += sgns_update(
                &mut word[s..s + dims],
                ctx,
                dims,
                context,
                &self.negatives,
                lr,
                &mut self.scratch,
            );
            pairs += 1;
        }
        (loss, pairs)
    }
}

/// Single-worker, deterministic skip-gram training over `sequences` (token
/// ids, one entry per line or document). `on_epoch` receives the summary of
/// each finished epoch.
pub fn train_point<F: Real>(
    sequences: &[Vec<u32>],
    vocab: &Vocabulary,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<PointEmbedding<F>> {
    cfg.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocab);
    }
    let mut model = PointEmbedding::init(vocab.len(), cfg.dims, cfg.seed);
    let corpus_tokens: u64 = sequences.iter().map(|s| s.len() as u64).sum();
    let schedule = LrSchedule { lr0: cfg.lr, total: corpus_tokens * cfg.epochs as u64 };
    let mut worker = SgnsWorker::new(vocab, cfg, 0);
    let mut processed = 0u64;
    for epoch in 0..cfg.epochs {
        let mut stats = EpochStats { epoch: epoch + 1, ..EpochStats::default() };
        let mut loss = 0.0;
        for seq in sequences {
            let (word, ctx) = model.matrices_mut();
            let (l, p) = worker.train_sequence(word, ctx, seq, &schedule, processed);
            loss += l;
            stats.pairs += p;
            processed += seq.len() as u64;
            stats.tokens += seq.len() as u64;
        }
        stats.mean_loss = if stats.pairs > 0 { loss / stats.pairs as f64 } else { 0.0 };
        on_epoch(&stats);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::cosine;
    use crate::synthetic::{topic_corpus, TopicCorpusConfig};

    fn random_model(v: usize, d: usize, seed: u64, scale: f64) -> PointEmbedding<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let word = (0..v * d).map(|_| rng.random_range(-scale..scale)).collect();
        let ctx = (0..v * d).map(|_| rng.random_range(-scale..scale)).collect();
        PointEmbedding::from_parts(d, word, ctx).unwrap()
    }

    #[test]
    fn init_is_reproducible_and_bounded() {
        let a: PointEmbedding = PointEmbedding::init(30, 8, 5);
        let b: PointEmbedding = PointEmbedding::init(30, 8, 5);
        assert_eq!(a, b);
        assert!(a.context_matrix().iter().all(|&x| x == 0.0));
        assert!(a.word_matrix().iter().all(|x| x.abs() <= 0.5 / 8.0));
        assert_ne!(a, PointEmbedding::init(30, 8, 6));
    }

    #[test]
    fn softmax_uniform_when_all_zero() {
        let m = PointEmbedding::<f64>::from_parts(3, vec![0.0; 12], vec![0.0; 12]).unwrap();
        assert!((m.softmax_prob(0, 2) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn softmax_two_contexts_analytic() {
        // v_w = (1), contexts (ln 3) and (0).
        let m = PointEmbedding::<f64>::from_parts(1, vec![1.0, 0.0], vec![libm::log(3.0), 0.0])
            .unwrap();
        assert!((m.softmax_prob(0, 0) - 0.75).abs() < 1e-12);
        assert!((m.softmax_prob(0, 1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn softmax_sums_to_one() {
        let m = random_model(100, 10, 3, 1.0);
        for w in [0u32, 17, 99] {
            let total: f64 = (0..100).map(|c| m.softmax_prob(w, c)).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_vectors_loss_is_two_ln_two() {
        let mut m = PointEmbedding::<f64>::from_parts(4, vec![0.0; 8], vec![0.0; 8]).unwrap();
        let loss = m.sgns_step(0, 1, &[0], 0.1);
        assert!((loss - 2.0 * core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn step_moves_parameters_along_negative_gradient() {
        let eps = 1e-5;
        let lr = 1e-3;
        for seed in 0..20 {
            let m = random_model(6, 5, seed, 0.8);
            let negs = [2u32, 3, 1];
            let mut stepped = m.clone();
            stepped.sgns_step(0, 1, &negs, lr);
            let check = |get: &dyn Fn(&PointEmbedding<f64>) -> &[f64],
                         set: &dyn Fn(&mut PointEmbedding<f64>, usize, f64)| {
                for i in 0..get(&m).len() {
                    let mut plus = m.clone();
                    set(&mut plus, i, get(&m)[i] + eps);
                    let mut minus = m.clone();
                    set(&mut minus, i, get(&m)[i] - eps);
                    let fd = (plus.sgns_loss(0, 1, &negs) - minus.sgns_loss(0, 1, &negs)) / (2.0 * eps);
                    let analytic = (get(&m)[i] - get(&stepped)[i]) / lr;
                    let rel = (fd - analytic).abs() / fd.abs().max(analytic.abs()).max(1e-8);
                    assert!(rel <= 1e-4 || (fd - analytic).abs() < 1e-9, "{fd} vs {analytic}");
                }
            };
            check(&|m| m.word_matrix(), &|m, i, v| m.word[i] = v);
            check(&|m| m.context_matrix(), &|m, i, v| m.ctx[i] = v);
        }
    }

    #[test]
    fn repeated_steps_decrease_loss() {
        let mut m = random_model(5, 8, 1, 0.3);
        let mut prev = f64::INFINITY;
        for _ in 0..200 {
            let loss = m.sgns_step(0, 1, &[3], 0.01);
            assert!(loss.is_finite() && loss >= 0.0);
            assert!(loss < prev);
            prev = loss;
        }
    }

    #[test]
    fn negative_equal_to_context_is_allowed() {
        let mut m = random_model(3, 4, 2, 0.5);
        let loss = m.sgns_step(0, 1, &[1, 1], 0.05);
        assert!(loss.is_finite());
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let vocab = Vocabulary::build(["a", "b", "a", "c"], 1).unwrap();
        let cfg = TrainConfig { epochs: 0, dims: 4, seed: 9, ..TrainConfig::default() };
        let seqs = vec![vocab.encode(["a", "b", "c", "a"])];
        let m: PointEmbedding = train_point(&seqs, &vocab, &cfg, |_| {}).unwrap();
        assert_eq!(m, PointEmbedding::init(vocab.len(), 4, 9));
    }

    #[test]
    fn schedule_decays_linearly() {
        let s = LrSchedule { lr0: 0.025, total: 100 };
        assert_eq!(s.at(0), 0.025);
        assert!((s.at(100) - 0.00025).abs() < 1e-15);
        assert!((s.at(50) - (0.025 + 0.00025) / 2.0).abs() < 1e-15);
        assert!((s.at(1000) - 0.00025).abs() < 1e-15);
    }

    #[test]
    fn training_separates_topics_and_is_deterministic() {
        let corpus = topic_corpus(&TopicCorpusConfig {
            topics: 2,
            words_per_topic: 40,
            tokens: 60_000,
            doc_len: 30,
            seed: 4,
            ..TopicCorpusConfig::default()
        });
        let vocab = Vocabulary::build(corpus.documents.iter().flatten(), 1).unwrap();
        let seqs: Vec<Vec<u32>> = corpus.documents.iter().map(|d| vocab.encode(d)).collect();
        let cfg = TrainConfig { dims: 20, epochs: 3, min_count: 1, seed: 3, ..TrainConfig::default() };
        let mut losses = Vec::new();
        let m: PointEmbedding = train_point(&seqs, &vocab, &cfg, |s| losses.push(s.mean_loss)).unwrap();
        assert_eq!(losses.len(), 3);
        let again: PointEmbedding = train_point(&seqs, &vocab, &cfg, |_| {}).unwrap();
        assert_eq!(m, again);

        let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0, 0.0, 0);
        for (a, ta) in corpus.topic_words.iter().enumerate() {
            for (b, tb) in corpus.topic_words.iter().enumerate() {
                for x in ta {
                    for y in tb {
                        if x == y {
                            continue;
                        }
                        let c = cosine(m.word(vocab.id(x).unwrap()), m.word(vocab.id(y).unwrap()))
                            .unwrap();
                        if a == b {
                            intra += c;
                            ni += 1;
                        } else {
                            inter += c;
                            nx += 1;
                        }
                    }
                }
            }
        }
        let gap = intra / ni as f64 - inter / nx as f64;
        assert!(gap >= 0.1, "intra-inter gap {gap}");
    }
}
