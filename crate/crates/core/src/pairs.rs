//! Frequent-word subsampling and skip-gram (center, context) pairs.

use alloc::vec::Vec;

use rand::Rng;

use crate::vocab::Vocabulary;

/// Probability of discarding a token with relative frequency `freq` under
/// threshold `t`: `max(0, 1 - sqrt(t / freq))`. A threshold of 0 never drops.
pub fn drop_probability(freq: f64, t: f64) -> f64 {
    if t <= 0.0 || freq <= 0.0 {
        return 0.0;
    }
    (1.0 - libm::sqrt(t / freq)).max(0.0)
}

/// Randomly discards frequent tokens. `t == 0` returns the input unchanged
/// without consuming randomness.
pub fn subsample<R: Rng + ?Sized>(ids: &[u32], vocab: &Vocabulary, t: f64, rng: &mut R) -> Vec<u32> {
    if t <= 0.0 {
        return ids.to_vec();
    }
    ids.iter()
        .copied()
        .filter(|&id| {
            let p = drop_probability(vocab.frequency(id), t);
            p == 0.0 || rng.random::<f64>() >= p
        })
        .collect()
}

/// Skip-gram pairs over one token sequence.
///
/// Yields `(center, context)` for every position `i` and every `j != i`
/// with `|i - j|` at most the window of center `i`.
pub struct PairStream<'a> {
    ids: &'a [u32],
    spans: Spans,
    center: usize,
    lo: usize,
    hi: usize,
    next: usize,
}

enum Spans {
    Fixed(usize),
    PerCenter(Vec<usize>),
}

impl<'a> PairStream<'a> {
    /// Every center uses the full window.
    pub fn fixed(ids: &'a [u32], window: usize) -> Self {
        Self::with_spans(ids, Spans::Fixed(window))
    }

    /// Each center draws its window uniformly from `1..=window`.
    pub fn dynamic<R: Rng + ?Sized>(ids: &'a [u32], window: usize, rng: &mut R) -> Self {
        let window = window.max(1);
        let spans = ids.iter().map(|_| rng.random_range(1..=window)).collect();
        Self::with_spans(ids, Spans::PerCenter(spans))
    }

    fn with_spans(ids: &'a [u32], spans: Spans) -> Self {
        let mut s = PairStream { ids, spans, center: 0, lo: 0, hi: 0, next: 0 };
        s.enter_center();
        s
    }

    fn span(&self, center: usize) -> usize {
        match &self.spans {
            Spans::Fixed(w) => *w,
            Spans::PerCenter(v) => v[center],
        }
    }

    fn enter_center(&mut self) {
        if self.center >= self.ids.len() {
            return;
        }
        let b = self.span(self.center);
        self.lo = self.center.saturating_sub(b);
        self.hi = (self.center + b).min(self.ids.len() - 1);
        self.next = self.lo;
    }

    /// The center position whose pairs are currently being emitted.
    pub fn position(&self) -> usize {
        self.center
    }
}

impl Iterator for PairStream<'_> {
    type Item = (u32, u32);

    fn next(&mut self) -> Option<(u32, u32)> {
        loop {
            if self.center >= self.ids.len() {
                return None;
            }
            if self.next == self.center {
                self.next += 1;
            }
            if self.next <= self.hi {
                let j = self.next;
                self.next += 1;
                return Some((self.ids[self.center], self.ids[j]));
            }
            self.center += 1;
            self.enter_center();
        }
    }
}

/// Number of pairs emitted by a fixed window over a sequence of `len` tokens.
pub fn fixed_pair_count(len: usize, window: usize) -> usize {
    (0..len)
        .map(|i| {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(len.saturating_sub(1));
            hi - lo
        })
        .sum()
}
