//! Gaussian-mixture word embeddings.
//!
//! Every word is a mixture of `K` diagonal Gaussians in `R^D`:
//!
//! ```text
//! f_w(x) = Σ_k p_{w,k} N(x; μ_{w,k}, Σ_{w,k})
//! ```
//!
//! Weights are stored as logits (softmax gives `p`), variances as log
//! variances. Two words interact through the expected-likelihood energy
//!
//! ```text
//! E(w, c) = Σ_p Σ_q p_{w,p} p_{c,q} N(0; μ_{w,p} - μ_{c,q}, Σ_{w,p} + Σ_{c,q})
//! ```
//!
//! and training minimizes the hinge `max(0, m - ln E(w, c) + ln E(w, c'))`
//! for observed contexts `c` and sampled negatives `c'` with Adagrad,
//! projecting variances onto `[var_min, var_max]` and means onto the ball of
//! radius `mu_max` after every update.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{GmTrainConfig, TrainConfig};
use crate::error::{Error, Result};
use crate::math::{log_sum_exp, softmax_into, Real, LN_2PI};
use crate::pairs::{subsample, PairStream};
use crate::point::{worker_rng, EpochStats};
use crate::vocab::Vocabulary;

const ADAGRAD_EPS: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct GmEmbedding<F: Real = f32> {
    dims: usize,
    components: usize,
    logits: Vec<F>,
    means: Vec<F>,
    log_vars: Vec<F>,
}

/// Mutable parameter (or accumulator) blocks with the layout of a
/// [`GmEmbedding`]: logits `V×K`, means and log variances `V×K×D`.
pub struct GmSlices<'a, F> {
    pub logits: &'a mut [F],
    pub means: &'a mut [F],
    pub log_vars: &'a mut [F],
}

/// Borrowed read-only parameters. All energy and density computations go
/// through this type so that training kernels working on raw slices share
/// the exact same code.
#[derive(Clone, Copy)]
pub struct GmView<'a, F> {
    pub dims: usize,
    pub components: usize,
    pub logits: &'a [F],
    pub means: &'a [F],
    pub log_vars: &'a [F],
}

impl<F: Real> GmEmbedding<F> {
    /// Means uniform in `[-0.5/D, 0.5/D]`, all variances `cfg.var_init`,
    /// uniform weights.
    pub fn init(vocab_len: usize, dims: usize, cfg: &GmTrainConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = cfg.components;
        let half = 0.5 / dims as f64;
        let means = (0..vocab_len * k * dims)
            .map(|_| F::from_f64(rng.random_range(-half..=half)))
            .collect();
        GmEmbedding {
            dims,
            components: k,
            logits: vec![F::default(); vocab_len * k],
            means,
            log_vars: vec![F::from_f64(libm::log(cfg.var_init)); vocab_len * k * dims],
        }
    }

    pub fn from_parts(
        dims: usize,
        components: usize,
        logits: Vec<F>,
        means: Vec<F>,
        log_vars: Vec<F>,
    ) -> Result<Self> {
        if dims == 0 || components == 0 {
            return Err(Error::InvalidConfig("dims and components must be positive".into()));
        }
        if !logits.len().is_multiple_of(components) {
            return Err(Error::DimensionMismatch { expected: components, actual: logits.len() });
        }
        let expected = logits.len() * dims;
        if means.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: means.len() });
        }
        if log_vars.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: log_vars.len() });
        }
        Ok(GmEmbedding { dims, components, logits, means, log_vars })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn len(&self) -> usize {
        self.logits.len() / self.components
    }

    pub fn is_empty(&self) -> bool {
        self.logits.is_empty()
    }

    pub fn view(&self) -> GmView<'_, F> {
        GmView {
            dims: self.dims,
            components: self.components,
            logits: &self.logits,
            means: &self.means,
            log_vars: &self.log_vars,
        }
    }

    pub fn slices_mut(&mut self) -> GmSlices<'_, F> {
        GmSlices { logits: &mut self.logits, means: &mut self.means, log_vars: &mut self.log_vars }
    }

    pub fn logits_block(&self) -> &[F] {
        &self.logits
    }

    pub fn means_block(&self) -> &[F] {
        &self.means
    }

    pub fn log_vars_block(&self) -> &[F] {
        &self.log_vars
    }

    pub fn mean(&self, w: u32, k: usize) -> &[F] {
        self.view().mean(w, k)
    }

    pub fn log_var(&self, w: u32, k: usize) -> &[F] {
        self.view().log_var(w, k)
    }

    pub fn weights(&self, w: u32) -> Vec<f64> {
        self.view().weights(w)
    }

    pub fn expected_mean(&self, w: u32) -> Vec<f64> {
        self.view().expected_mean(w)
    }

    pub fn mixture_density(&self, w: u32, x: &[f64]) -> Result<f64> {
        self.view().mixture_density(w, x)
    }

    pub fn log_energy(&self, w: u32, c: u32) -> f64 {
        self.view().log_energy(w, c)
    }

    pub fn energy(&self, w: u32, c: u32) -> f64 {
        libm::exp(self.log_energy(w, c))
    }

    pub fn loss_margin(&self, w: u32, c: u32, neg: u32, margin: f64) -> f64 {
        self.view().loss_margin(w, c, neg, margin)
    }

    /// Hinge loss and its gradient with respect to every parameter of the
    /// involved words.
    pub fn gradients(&self, w: u32, c: u32, neg: u32, margin: f64, grad: &mut GmGrad) -> f64 {
        let mut scratch = GmScratch::default();
        self.view().hinge_gradients(w, c, neg, margin, grad, &mut scratch)
    }

    /// Projects every word onto the constraint set.
    pub fn project(&mut self, cfg: &GmTrainConfig) {
        let (dims, k, n) = (self.dims, self.components, self.len() as u32);
        let mut slices = self.slices_mut();
        for w in 0..n {
            project_word(&mut slices, dims, k, w, cfg);
        }
    }

    /// Checks the simplex, variance and mean-norm constraints. Bounds are
    /// compared with a relative slack that covers storage rounding.
    pub fn check_invariants(&self, cfg: &GmTrainConfig) -> core::result::Result<(), String> {
        let slack = 1e-6;
        for w in 0..self.len() as u32 {
            let p = self.weights(w);
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || p.iter().any(|&x| !(x > 0.0)) {
                return Err(format!("word {w}: weights {p:?} are not a simplex point"));
            }
            for k in 0..self.components {
                for &lv in self.log_var(w, k) {
                    let var = libm::exp(lv.to_f64());
                    if !(var >= cfg.var_min * (1.0 - slack) && var <= cfg.var_max * (1.0 + slack)) {
                        return Err(format!("word {w} component {k}: variance {var} out of range"));
                    }
                }
                let n = crate::math::norm(self.mean(w, k));
                if !(n <= cfg.mu_max * (1.0 + slack)) {
                    return Err(format!("word {w} component {k}: mean norm {n} exceeds bound"));
                }
            }
        }
        Ok(())
    }
}

impl<'a, F: Real> GmView<'a, F> {
    pub fn mean(&self, w: u32, k: usize) -> &'a [F] {
        let s = (w as usize * self.components + k) * self.dims;
        &self.means[s..s + self.dims]
    }

    pub fn log_var(&self, w: u32, k: usize) -> &'a [F] {
        let s = (w as usize * self.components + k) * self.dims;
        &self.log_vars[s..s + self.dims]
    }

    pub fn logits(&self, w: u32) -> &'a [F] {
        let s = w as usize * self.components;
        &self.logits[s..s + self.components]
    }

    pub fn weights(&self, w: u32) -> Vec<f64> {
        let mut p = vec![0.0; self.components];
        softmax_into(self.logits(w), &mut p);
        p
    }

    /// `Σ_k p_{w,k} μ_{w,k}`.
    pub fn expected_mean(&self, w: u32) -> Vec<f64> {
        let p = self.weights(w);
        let mut out = vec![0.0; self.dims];
        for (k, pk) in p.iter().enumerate() {
            for (o, m) in out.iter_mut().zip(self.mean(w, k)) {
                *o += pk * m.to_f64();
            }
        }
        out
    }

    pub fn mixture_density(&self, w: u32, x: &[f64]) -> Result<f64> {
        if x.len() != self.dims {
            return Err(Error::DimensionMismatch { expected: self.dims, actual: x.len() });
        }
        let p = self.weights(w);
        let terms: Vec<f64> = (0..self.components)
            .map(|k| {
                let mut log_n = 0.0;
                for ((xi, m), lv) in x.iter().zip(self.mean(w, k)).zip(self.log_var(w, k)) {
                    let var = libm::exp(lv.to_f64());
                    let diff = xi - m.to_f64();
                    log_n -= 0.5 * (LN_2PI + lv.to_f64() + diff * diff / var);
                }
                libm::log(p[k]) + log_n
            })
            .collect();
        Ok(libm::exp(log_sum_exp(&terms)))
    }

    /// `ln N(0; μ_{w,p} - μ_{c,q}, Σ_{w,p} + Σ_{c,q})`.
    pub fn log_component_overlap(&self, w: u32, p: usize, c: u32, q: usize) -> f64 {
        let mut acc = 0.0;
        let (mw, lw) = (self.mean(w, p), self.log_var(w, p));
        let (mc, lc) = (self.mean(c, q), self.log_var(c, q));
        for d in 0..self.dims {
            let s = libm::exp(lw[d].to_f64()) + libm::exp(lc[d].to_f64());
            let delta = mw[d].to_f64() - mc[d].to_f64();
            acc -= 0.5 * (LN_2PI + libm::log(s) + delta * delta / s);
        }
        acc
    }

    /// Log of the expected-likelihood energy, evaluated as a log-sum-exp
    /// over component pairs.
    pub fn log_energy(&self, w: u32, c: u32) -> f64 {
        self.energy_terms(w, c, &mut EnergyTerms::default())
    }

    /// Fills `e` with weights, variances and per-pair log terms of
    /// `E(w, c)` and returns its logarithm.
    fn energy_terms(&self, w: u32, c: u32, e: &mut EnergyTerms) -> f64 {
        let (k, dims) = (self.components, self.dims);
        e.pw.resize(k, 0.0);
        e.pc.resize(k, 0.0);
        softmax_into(self.logits(w), &mut e.pw);
        softmax_into(self.logits(c), &mut e.pc);
        let kd = k * dims;
        let (ws, cs) = (w as usize * kd, c as usize * kd);
        e.vw.clear();
        e.vw.extend(self.log_vars[ws..ws + kd].iter().map(|x| libm::exp(x.to_f64())));
        e.vc.clear();
        e.vc.extend(self.log_vars[cs..cs + kd].iter().map(|x| libm::exp(x.to_f64())));
        e.terms.clear();
        for p in 0..k {
            let mw = self.mean(w, p);
            for q in 0..k {
                let mc = self.mean(c, q);
                let mut acc = libm::log(e.pw[p]) + libm::log(e.pc[q]);
                for d in 0..dims {
                    let s = e.vw[p * dims + d] + e.vc[q * dims + d];
                    let delta = mw[d].to_f64() - mc[d].to_f64();
                    acc -= 0.5 * (LN_2PI + libm::log(s) + delta * delta / s);
                }
                e.terms.push(acc);
            }
        }
        log_sum_exp(&e.terms)
    }

    pub fn loss_margin(&self, w: u32, c: u32, neg: u32, margin: f64) -> f64 {
        hinge(margin, self.log_energy(w, c), self.log_energy(w, neg))
    }

    /// Adds `scale · ∇ ln E(w, c)` to `grad`, given the filled `e` and
    /// `log_e` from [`Self::energy_terms`]. Overwrites `e.terms`.
    #[allow(clippy::too_many_arguments)]
    fn add_log_energy_gradient(
        &self,
        w: u32,
        c: u32,
        log_e: f64,
        e: &mut EnergyTerms,
        scale: f64,
        grad: &mut GmGrad,
        buf: &mut PairBuf,
    ) {
        let k = self.components;
        let dims = self.dims;
        // responsibilities r_pq
        for t in e.terms.iter_mut() {
            *t = libm::exp(*t - log_e);
        }
        {
            let gw = grad.entry(w);
            for p in 0..k {
                let row: f64 = (0..k).map(|q| e.terms[p * k + q]).sum();
                gw.logits[p] += scale * (row - e.pw[p]);
            }
        }
        {
            let gc = grad.entry(c);
            for q in 0..k {
                let col: f64 = (0..k).map(|p| e.terms[p * k + q]).sum();
                gc.logits[q] += scale * (col - e.pc[q]);
            }
        }
        buf.dmw.resize(dims, 0.0);
        buf.dsw.resize(dims, 0.0);
        buf.dmc.resize(dims, 0.0);
        buf.dsc.resize(dims, 0.0);
        for p in 0..k {
            let mw = self.mean(w, p);
            for q in 0..k {
                let r = scale * e.terms[p * k + q];
                let mc = self.mean(c, q);
                for d in 0..dims {
                    let vw = e.vw[p * dims + d];
                    let vc = e.vc[q * dims + d];
                    let s = vw + vc;
                    let delta = mw[d].to_f64() - mc[d].to_f64();
                    let a = delta / s;
                    // d ln N / d S_d
                    let b = -0.5 * (1.0 / s - a * a);
                    buf.dmw[d] = -r * a;
                    buf.dmc[d] = r * a;
                    buf.dsw[d] = r * b * vw;
                    buf.dsc[d] = r * b * vc;
                }
                let gw = grad.entry(w);
                let off = p * dims;
                for d in 0..dims {
                    gw.means[off + d] += buf.dmw[d];
                    gw.log_vars[off + d] += buf.dsw[d];
                }
                let gc = grad.entry(c);
                let off = q * dims;
                for d in 0..dims {
                    gc.means[off + d] += buf.dmc[d];
                    gc.log_vars[off + d] += buf.dsc[d];
                }
            }
        }
    }

    /// Hinge loss and its (sub)gradient. The gradient is zero when the loss
    /// is zero.
    pub fn hinge_gradients(
        &self,
        w: u32,
        c: u32,
        neg: u32,
        margin: f64,
        grad: &mut GmGrad,
        scratch: &mut GmScratch,
    ) -> f64 {
        grad.reset(self.components, self.dims);
        let pos = self.energy_terms(w, c, &mut scratch.pos);
        let negative = self.energy_terms(w, neg, &mut scratch.neg);
        let loss = hinge(margin, pos, negative);
        if loss > 0.0 {
            self.add_log_energy_gradient(w, c, pos, &mut scratch.pos, -1.0, grad, &mut scratch.buf);
            self.add_log_energy_gradient(w, neg, negative, &mut scratch.neg, 1.0, grad, &mut scratch.buf);
        }
        loss
    }
}

#[inline]
fn hinge(margin: f64, log_pos: f64, log_neg: f64) -> f64 {
    (margin - log_pos + log_neg).max(0.0)
}

/// Per-word gradient blocks.
#[derive(Clone, Debug, Default)]
pub struct WordGrad {
    pub id: u32,
    pub logits: Vec<f64>,
    pub means: Vec<f64>,
    pub log_vars: Vec<f64>,
}

/// Sparse gradient over the (at most three) words touched by one hinge term.
#[derive(Clone, Debug, Default)]
pub struct GmGrad {
    entries: Vec<WordGrad>,
    active: usize,
    components: usize,
    dims: usize,
}

impl GmGrad {
    pub fn reset(&mut self, components: usize, dims: usize) {
        self.active = 0;
        self.components = components;
        self.dims = dims;
    }

    fn entry(&mut self, id: u32) -> &mut WordGrad {
        if let Some(i) = self.entries[..self.active].iter().position(|e| e.id == id) {
            return &mut self.entries[i];
        }
        if self.active == self.entries.len() {
            self.entries.push(WordGrad::default());
        }
        let (k, d) = (self.components, self.dims);
        let e = &mut self.entries[self.active];
        self.active += 1;
        e.id = id;
        for (buf, len) in [(&mut e.logits, k), (&mut e.means, k * d), (&mut e.log_vars, k * d)] {
            buf.clear();
            buf.resize(len, 0.0);
        }
        e
    }

    /// Gradient blocks of the touched words, each word once.
    pub fn words(&self) -> &[WordGrad] {
        &self.entries[..self.active]
    }

    /// Gradient block of `id`, if it was touched.
    pub fn word(&self, id: u32) -> Option<&WordGrad> {
        self.words().iter().find(|e| e.id == id)
    }
}

/// Weights, variances and log terms of one energy evaluation.
#[derive(Clone, Debug, Default)]
struct EnergyTerms {
    pw: Vec<f64>,
    pc: Vec<f64>,
    vw: Vec<f64>,
    vc: Vec<f64>,
    terms: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
struct PairBuf {
    dmw: Vec<f64>,
    dsw: Vec<f64>,
    dmc: Vec<f64>,
    dsc: Vec<f64>,
}

/// Reusable buffers for energy and gradient evaluation.
#[derive(Clone, Debug, Default)]
pub struct GmScratch {
    pos: EnergyTerms,
    neg: EnergyTerms,
    buf: PairBuf,
}

/// Clamps the variances of word `w` into `[var_min, var_max]` and rescales
/// means longer than `mu_max` onto the ball.
pub fn project_word<F: Real>(
    params: &mut GmSlices<'_, F>,
    dims: usize,
    components: usize,
    w: u32,
    cfg: &GmTrainConfig,
) {
    let lo = libm::log(cfg.var_min);
    let hi = libm::log(cfg.var_max);
    let start = w as usize * components * dims;
    for lv in &mut params.log_vars[start..start + components * dims] {
        let v = lv.to_f64();
        if v < lo {
            *lv = F::from_f64(lo);
        } else if v > hi {
            *lv = F::from_f64(hi);
        }
    }
    for k in 0..components {
        let s = start + k * dims;
        let mean = &mut params.means[s..s + dims];
        let n = crate::math::norm(mean);
        if n > cfg.mu_max {
            let scale = cfg.mu_max / n;
            for m in mean.iter_mut() {
                *m = F::from_f64(m.to_f64() * scale);
            }
        }
    }
}

/// One Adagrad step on the hinge loss of `(w, c, neg)` followed by
/// projection of the touched words. Returns the pre-update loss. A zero loss
/// leaves every parameter and accumulator untouched.
#[allow(clippy::too_many_arguments)]
pub fn gm_update<F: Real>(
    params: &mut GmSlices<'_, F>,
    accum: &mut GmSlices<'_, F>,
    dims: usize,
    components: usize,
    w: u32,
    c: u32,
    neg: u32,
    cfg: &GmTrainConfig,
    grad: &mut GmGrad,
    scratch: &mut GmScratch,
) -> f64 {
    let view = GmView {
        dims,
        components,
        logits: &*params.logits,
        means: &*params.means,
        log_vars: &*params.log_vars,
    };
    let loss = view.hinge_gradients(w, c, neg, cfg.margin, grad, scratch);
    if loss <= 0.0 {
        return loss;
    }
    let kd = components * dims;
    for g in grad.words() {
        let id = g.id as usize;
        if !cfg.freeze_weights {
            adagrad(
                &mut params.logits[id * components..(id + 1) * components],
                &mut accum.logits[id * components..(id + 1) * components],
                &g.logits,
                cfg.lr,
            );
        }
        adagrad(&mut params.means[id * kd..(id + 1) * kd], &mut accum.means[id * kd..(id + 1) * kd], &g.means, cfg.lr);
        adagrad(
            &mut params.log_vars[id * kd..(id + 1) * kd],
            &mut accum.log_vars[id * kd..(id + 1) * kd],
            &g.log_vars,
            cfg.lr,
        );
    }
    for g in grad.words() {
        project_word(params, dims, components, g.id, cfg);
    }
    loss
}

#[inline]
fn adagrad<F: Real>(theta: &mut [F], accum: &mut [F], grad: &[f64], lr: f64) {
    for ((t, a), &g) in theta.iter_mut().zip(accum.iter_mut()).zip(grad) {
        let acc = a.to_f64() + g * g;
        *a = F::from_f64(acc);
        *t = F::from_f64(t.to_f64() - lr * g / (libm::sqrt(acc) + ADAGRAD_EPS));
    }
}

/// Adagrad squared-gradient accumulators with the model's layout.
#[derive(Clone, Debug, PartialEq)]
pub struct GmAccumulators<F: Real = f32> {
    pub logits: Vec<F>,
    pub means: Vec<F>,
    pub log_vars: Vec<F>,
}

impl<F: Real> GmAccumulators<F> {
    pub fn zeros_like(model: &GmEmbedding<F>) -> Self {
        GmAccumulators {
            logits: vec![F::default(); model.logits.len()],
            means: vec![F::default(); model.means.len()],
            log_vars: vec![F::default(); model.log_vars.len()],
        }
    }

    pub fn slices_mut(&mut self) -> GmSlices<'_, F> {
        GmSlices { logits: &mut self.logits, means: &mut self.means, log_vars: &mut self.log_vars }
    }
}

/// Single-threaded convenience wrapper around [`gm_update`].
pub fn gm_step<F: Real>(
    model: &mut GmEmbedding<F>,
    accum: &mut GmAccumulators<F>,
    w: u32,
    c: u32,
    neg: u32,
    cfg: &GmTrainConfig,
) -> f64 {
    let (dims, k) = (model.dims, model.components);
    let mut grad = GmGrad::default();
    let mut scratch = GmScratch::default();
    gm_update(&mut model.slices_mut(), &mut accum.slices_mut(), dims, k, w, c, neg, cfg, &mut grad, &mut scratch)
}

/// Trains the hinge terms of individual sequences against caller-provided
/// parameter and accumulator slices. One instance per worker.
pub struct GmWorker<'v> {
    vocab: &'v Vocabulary,
    cfg: TrainConfig,
    gm: GmTrainConfig,
    rng: ChaCha8Rng,
    grad: GmGrad,
    scratch: GmScratch,
}

impl<'v> GmWorker<'v> {
    pub fn new(vocab: &'v Vocabulary, cfg: &TrainConfig, gm: &GmTrainConfig, worker: usize) -> Self {
        GmWorker {
            vocab,
            cfg: cfg.clone(),
            gm: gm.clone(),
            rng: worker_rng(cfg.seed, worker),
            grad: GmGrad::default(),
            scratch: GmScratch::default(),
        }
    }

    /// Returns `(loss sum, hinge term count)`.
    pub fn train_sequence<F: Real>(
        &mut self,
        params: &mut GmSlices<'_, F>,
        accum: &mut GmSlices<'_, F>,
        seq: &[u32],
    ) -> (f64, u64) {
        let (dims, k) = (self.cfg.dims, self.gm.components);
        let kept;
        let seq = if self.cfg.subsample > 0.0 {
            kept = subsample(seq, self.vocab, self.cfg.subsample, &mut self.rng);
            &kept[..]
        } else {
            seq
        };
        let stream = if self.cfg.dynamic_window {
            PairStream::dynamic(seq, self.cfg.window, &mut self.rng)
        } else {
            PairStream::fixed(seq, self.cfg.window)
        };
        let sampler = self.vocab.negative_sampler();
        let mut loss = 0.0;
        let mut terms = 0;
        for (w, c) in stream {
            for _ in 0..self.gm.negatives {
                let neg = sampler.sample(&mut self.rng);
                loss += gm_update(
                    params,
                    accum,
                    dims,
                    k,
                    w,
                    c,
                    neg,
                    &self.gm,
                    &mut self.grad,
                    &mut self.scratch,
                );
                terms += 1;
            }
        }
        (loss, terms)
    }
}

/// Single-worker, deterministic Gaussian-mixture training.
pub fn train_gm<F: Real>(
    sequences: &[Vec<u32>],
    vocab: &Vocabulary,
    cfg: &TrainConfig,
    gm: &GmTrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<GmEmbedding<F>> {
    cfg.validate()?;
    gm.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocab);
    }
    let mut model = GmEmbedding::init(vocab.len(), cfg.dims, gm, cfg.seed);
    let mut accum = GmAccumulators::zeros_like(&model);
    let mut worker = GmWorker::new(vocab, cfg, gm, 0);
    for epoch in 0..cfg.epochs {
        let mut stats = EpochStats { epoch: epoch + 1, ..EpochStats::default() };
        let mut loss = 0.0;
        for seq in sequences {
            let (l, n) = worker.train_sequence(&mut model.slices_mut(), &mut accum.slices_mut(), seq);
            loss += l;
            stats.pairs += n;
            stats.tokens += seq.len() as u64;
        }
        stats.mean_loss = if stats.pairs > 0 { loss / stats.pairs as f64 } else { 0.0 };
        on_epoch(&stats);
    }
    Ok(model)
}
