//! Training drivers.
//!
//! With one worker these delegate to the deterministic trainers of the core
//! crate. With more, sequences are dealt round-robin to threads that update
//! the shared parameters without any locking: rows touched by two workers at
//! once may lose or interleave updates. This is the usual lock-free SGD
//! trade-off and makes multi-worker runs non-deterministic.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use oov_embed_core::gm::{GmAccumulators, GmSlices, GmWorker};
use oov_embed_core::point::{EpochStats, LrSchedule, SgnsWorker};
use oov_embed_core::{gm, point, GmEmbedding, GmTrainConfig, PointEmbedding, TrainConfig, Vocabulary};

use crate::error::Result;

/// Epoch summary with wall-clock timing.
#[derive(Clone, Copy, Debug)]
pub struct EpochReport {
    pub stats: EpochStats,
    pub elapsed: Duration,
}

impl EpochReport {
    pub fn pairs_per_sec(&self) -> f64 {
        let secs = self.elapsed.as_secs_f64();
        if secs > 0.0 {
            self.stats.pairs as f64 / secs
        } else {
            0.0
        }
    }
}

/// Worker count from the `OOV_EMBED_THREADS` environment variable, if set
/// to a positive integer.
pub fn env_workers() -> Option<usize> {
    std::env::var("OOV_EMBED_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// A mutable slice handed to several threads at once.
struct Shared<F> {
    ptr: *mut F,
    len: usize,
}

// Concurrent unsynchronized writes are the intended behavior; see the
// module documentation.
unsafe impl<F: Send> Sync for Shared<F> {}
unsafe impl<F: Send> Send for Shared<F> {}

impl<F> Shared<F> {
    fn new(s: &mut [F]) -> Self {
        Shared { ptr: s.as_mut_ptr(), len: s.len() }
    }

    /// # Safety
    /// The backing storage must outlive the returned slice. Other threads
    /// may write the same elements concurrently.
    #[allow(clippy::mut_from_ref)]
    unsafe fn slice(&self) -> &mut [F] {
        unsafe { std::slice::from_raw_parts_mut(self.ptr, self.len) }
    }
}

struct SharedGm<F> {
    logits: Shared<F>,
    means: Shared<F>,
    log_vars: Shared<F>,
}

impl<F> SharedGm<F> {
    fn new(s: GmSlices<'_, F>) -> Self {
        SharedGm { logits: Shared::new(s.logits), means: Shared::new(s.means), log_vars: Shared::new(s.log_vars) }
    }

    /// # Safety
    /// As for [`Shared::slice`].
    unsafe fn slices(&self) -> GmSlices<'_, F> {
        unsafe {
            GmSlices { logits: self.logits.slice(), means: self.means.slice(), log_vars: self.log_vars.slice() }
        }
    }
}

fn timed(mut on_epoch: impl FnMut(&EpochReport)) -> impl FnMut(&EpochStats) {
    let mut start = Instant::now();
    move |stats| {
        on_epoch(&EpochReport { stats: *stats, elapsed: start.elapsed() });
        start = Instant::now();
    }
}

fn finish_epoch(epoch: usize, loss: f64, pairs: u64, tokens: u64, start: Instant) -> EpochReport {
    let mean_loss = if pairs > 0 { loss / pairs as f64 } else { 0.0 };
    EpochReport { stats: EpochStats { epoch, pairs, tokens, mean_loss }, elapsed: start.elapsed() }
}

/// Skip-gram training with `workers` threads.
pub fn train_sgns(
    sequences: &[Vec<u32>],
    vocab: &Vocabulary,
    cfg: &TrainConfig,
    workers: usize,
    on_epoch: impl FnMut(&EpochReport),
) -> Result<PointEmbedding> {
    if workers <= 1 {
        return Ok(point::train_point(sequences, vocab, cfg, timed(on_epoch))?);
    }
    let mut on_epoch = on_epoch;
    cfg.validate()?;
    if vocab.is_empty() {
        return Err(oov_embed_core::Error::EmptyVocab.into());
    }
    let mut model = PointEmbedding::init(vocab.len(), cfg.dims, cfg.seed);
    let corpus_tokens: u64 = sequences.iter().map(|s| s.len() as u64).sum();
    let schedule = LrSchedule { lr0: cfg.lr, total: corpus_tokens * cfg.epochs as u64 };
    let processed = AtomicU64::new(0);
    let mut states: Vec<SgnsWorker<'_>> = (0..workers).map(|w| SgnsWorker::new(vocab, cfg, w)).collect();
    {
        let (word, ctx) = model.matrices_mut();
        let (word, ctx) = (Shared::new(word), Shared::new(ctx));
        for epoch in 1..=cfg.epochs {
            let start = Instant::now();
            let results: Vec<(f64, u64)> = std::thread::scope(|s| {
                let handles: Vec<_> = states
                    .iter_mut()
                    .enumerate()
                    .map(|(w, state)| {
                        let (word, ctx, processed, schedule) = (&word, &ctx, &processed, &schedule);
                        s.spawn(move || {
                            let (mut loss, mut pairs) = (0.0, 0);
                            for seq in sequences.iter().skip(w).step_by(workers) {
                                let at = processed.load(Ordering::Relaxed);
                                // SAFETY: the matrices outlive the scope.
                                let (wm, cm) = unsafe { (word.slice(), ctx.slice()) };
                                let (l, p) = state.train_sequence(wm, cm, seq, schedule, at);
                                processed.fetch_add(seq.len() as u64, Ordering::Relaxed);
                                loss += l;
                                pairs += p;
                            }
                            (loss, pairs)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("training worker panicked")).collect()
            });
            let loss = results.iter().map(|r| r.0).sum();
            let pairs = results.iter().map(|r| r.1).sum();
            on_epoch(&finish_epoch(epoch, loss, pairs, corpus_tokens, start));
        }
    }
    Ok(model)
}

/// Gaussian-mixture training with `workers` threads.
pub fn train_w2gm(
    sequences: &[Vec<u32>],
    vocab: &Vocabulary,
    cfg: &TrainConfig,
    gm_cfg: &GmTrainConfig,
    workers: usize,
    on_epoch: impl FnMut(&EpochReport),
) -> Result<GmEmbedding> {
    if workers <= 1 {
        return Ok(gm::train_gm(sequences, vocab, cfg, gm_cfg, timed(on_epoch))?);
    }
    let mut on_epoch = on_epoch;
    cfg.validate()?;
    gm_cfg.validate()?;
    if vocab.is_empty() {
        return Err(oov_embed_core::Error::EmptyVocab.into());
    }
    let mut model = GmEmbedding::init(vocab.len(), cfg.dims, gm_cfg, cfg.seed);
    let mut accum = GmAccumulators::zeros_like(&model);
    let corpus_tokens: u64 = sequences.iter().map(|s| s.len() as u64).sum();
    let mut states: Vec<GmWorker<'_>> = (0..workers).map(|w| GmWorker::new(vocab, cfg, gm_cfg, w)).collect();
    {
        let params = SharedGm::new(model.slices_mut());
        let acc = SharedGm::new(accum.slices_mut());
        for epoch in 1..=cfg.epochs {
            let start = Instant::now();
            let results: Vec<(f64, u64)> = std::thread::scope(|s| {
                let handles: Vec<_> = states
                    .iter_mut()
                    .enumerate()
                    .map(|(w, state)| {
                        let (params, acc) = (&params, &acc);
                        s.spawn(move || {
                            let (mut loss, mut terms) = (0.0, 0);
                            for seq in sequences.iter().skip(w).step_by(workers) {
                                // SAFETY: model and accumulators outlive the scope.
                                let (mut p, mut a) = unsafe { (params.slices(), acc.slices()) };
                                let (l, n) = state.train_sequence(&mut p, &mut a, seq);
                                loss += l;
                                terms += n;
                            }
                            (loss, terms)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("training worker panicked")).collect()
            });
            let loss = results.iter().map(|r| r.0).sum();
            let terms = results.iter().map(|r| r.1).sum();
            on_epoch(&finish_epoch(epoch, loss, terms, corpus_tokens, start));
        }
    }
    Ok(model)
}
