//! Out-of-vocabulary evaluation tasks.
//!
//! Task 1 ranks the category labels for each OOV word and scores the mean
//! rank of the gold label (`S1`) plus the best-1 accuracy. Task 2 predicts
//! the top `K` vocabulary tokens for each OOV word and scores
//! `S2 = (1 / (K N)) Σ_i [W_i ∩ Ŵ_i ≠ ∅]`.
//!
//! An OOV word is represented by the centroid of its in-vocabulary,
//! non-stopword context tokens.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::Real;
use crate::similarity::{cosine, nearest_neighbors, Metric, ModelRef, Query};
use crate::stopwords::Stopwords;
use crate::tokenize::tokenize;
use crate::vocab::Vocabulary;

pub const MAX_ATTRIBUTES: usize = 5;

pub const DEFAULT_CATEGORIES: [&str; 5] =
    ["greek_mythology", "locations", "animals", "plants", "technology"];

/// Ordered category labels and their tokenized forms.
#[derive(Clone, Debug, PartialEq)]
pub struct CategorySet {
    labels: Vec<String>,
    label_tokens: Vec<Vec<String>>,
}

impl Default for CategorySet {
    fn default() -> Self {
        Self::new(DEFAULT_CATEGORIES.iter().map(|s| s.to_string()).collect()).unwrap()
    }
}

fn normalize_label(name: &str) -> String {
    let mut out = String::new();
    for tok in tokenize(name) {
        if !out.is_empty() {
            out.push('_');
        }
        out.push_str(&tok);
    }
    out
}

impl CategorySet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Validation("category set is empty".into()));
        }
        let labels: Vec<String> = labels.iter().map(|l| normalize_label(l)).collect();
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return Err(Error::Validation("category label without tokens".into()));
            }
            if labels[..i].contains(l) {
                return Err(Error::Validation(format!("duplicate category '{l}'")));
            }
        }
        let label_tokens = labels.iter().map(|l| tokenize(l).collect()).collect();
        Ok(CategorySet { labels, label_tokens })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_tokens(&self, index: usize) -> &[String] {
        &self.label_tokens[index]
    }

    /// Index of the label matching `name`. Case, punctuation and a trailing
    /// plural `s` are ignored, so "Plant", "plants" and "Greek mythology"
    /// all resolve.
    pub fn resolve(&self, name: &str) -> Option<usize> {
        let n = normalize_label(name);
        if let Some(i) = self.labels.iter().position(|l| *l == n) {
            return Some(i);
        }
        let singular = |s: &str| -> String { s.strip_suffix('s').unwrap_or(s).to_string() };
        let ns = singular(&n);
        self.labels.iter().position(|l| singular(l) == ns)
    }
}

/// One evaluation record.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OovSample {
    pub word: String,
    pub context: String,
    pub category: String,
    pub attributes: Vec<String>,
}

impl OovSample {
    /// Checks the record and canonicalizes it: the category becomes the
    /// matching label of `categories`; the word and attributes are
    /// lowercased.
    pub fn validate(mut self, categories: &CategorySet) -> Result<Self> {
        self.word = self.word.trim().to_lowercase();
        if self.word.is_empty() {
            return Err(Error::Validation("empty OOV word".into()));
        }
        if self.context.trim().is_empty() {
            return Err(Error::Validation(format!("'{}': empty context", self.word)));
        }
        let Some(idx) = categories.resolve(&self.category) else {
            return Err(Error::Validation(format!(
                "'{}': category '{}' is not one of {:?}",
                self.word,
                self.category,
                categories.labels()
            )));
        };
        self.category = categories.labels()[idx].clone();
        if self.attributes.is_empty() || self.attributes.len() > MAX_ATTRIBUTES {
            return Err(Error::Validation(format!(
                "'{}': {} attributes, expected 1 to {MAX_ATTRIBUTES}",
                self.word,
                self.attributes.len()
            )));
        }
        for a in self.attributes.iter_mut() {
            *a = a.trim().to_lowercase();
            if a.is_empty() {
                return Err(Error::Validation(format!("'{}': empty attribute", self.word)));
            }
        }
        Ok(self)
    }

    pub fn context_tokens(&self) -> Vec<String> {
        tokenize(&self.context).collect()
    }
}

/// Samples whose OOV word is present in the training vocabulary.
pub fn in_vocabulary_words<'s>(samples: &'s [OovSample], vocab: &Vocabulary) -> Vec<&'s str> {
    samples.iter().filter(|s| vocab.contains(&s.word)).map(|s| s.word.as_str()).collect()
}

/// Centroid of the representations of in-vocabulary, non-stopword tokens.
pub fn context_vector<F: Real, S: AsRef<str>>(
    model: ModelRef<'_, F>,
    tokens: &[S],
    vocab: &Vocabulary,
    stopwords: &Stopwords,
) -> Result<Vec<f64>> {
    let ids: Vec<u32> = tokens
        .iter()
        .map(|t| t.as_ref())
        .filter(|t| !stopwords.contains(t))
        .filter_map(|t| vocab.id(t))
        .collect();
    centroid(model, &ids).ok_or(Error::NoContextSignal)
}

fn centroid<F: Real>(model: ModelRef<'_, F>, ids: &[u32]) -> Option<Vec<f64>> {
    if ids.is_empty() {
        return None;
    }
    let mut acc = vec![0.0; model.dims()];
    for &id in ids {
        for (a, x) in acc.iter_mut().zip(model.representation(id)) {
            *a += x;
        }
    }
    let n = ids.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Some(acc)
}

/// How a context vector is compared with a category label.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LabelSimilarity {
    /// Cosine against the centroid of the label's token representations.
    #[default]
    Centroid,
    /// Mixture models only: best cosine against any component mean of any
    /// label token.
    MaxCosine,
}

/// Similarity of `context` to every label, in label order.
pub fn label_scores<F: Real>(
    model: ModelRef<'_, F>,
    vocab: &Vocabulary,
    context: &[f64],
    categories: &CategorySet,
    mode: LabelSimilarity,
) -> Result<Vec<f64>> {
    let mut scores = Vec::with_capacity(categories.len());
    for (i, label) in categories.labels().iter().enumerate() {
        let ids: Vec<u32> = categories.label_tokens(i).iter().filter_map(|t| vocab.id(t)).collect();
        if ids.is_empty() {
            return Err(Error::LabelNotEmbeddable(label.clone()));
        }
        let score = match (mode, model) {
            (LabelSimilarity::MaxCosine, ModelRef::Gm(gm)) => {
                let mut best = f64::NEG_INFINITY;
                for &id in &ids {
                    for k in 0..gm.components() {
                        best = best.max(cosine(context, gm.mean(id, k)).unwrap_or(0.0));
                    }
                }
                best
            }
            (LabelSimilarity::MaxCosine, ModelRef::Point(_)) => {
                return Err(Error::UnknownMetricForModel(
                    "max-cosine label similarity needs a mixture model".into(),
                ))
            }
            (LabelSimilarity::Centroid, _) => {
                let c = centroid(model, &ids).expect("non-empty ids");
                match cosine(context, &c) {
                    Ok(s) => s,
                    Err(Error::ZeroVector) if crate::math::norm(context) == 0.0 => {
                        return Err(Error::NoContextSignal)
                    }
                    Err(_) => return Err(Error::LabelNotEmbeddable(label.clone())),
                }
            }
        };
        scores.push(score);
    }
    Ok(scores)
}

/// Label indices ordered by descending score; equal scores keep label order.
pub fn rank_by_scores(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Ranks every category for one sample, best first.
pub fn predict_category<F: Real>(
    model: ModelRef<'_, F>,
    vocab: &Vocabulary,
    sample: &OovSample,
    categories: &CategorySet,
    stopwords: &Stopwords,
    mode: LabelSimilarity,
) -> Result<Vec<usize>> {
    let ctx = context_vector(model, &sample.context_tokens(), vocab, stopwords)?;
    Ok(rank_by_scores(&label_scores(model, vocab, &ctx, categories, mode)?))
}

/// Top-`k` vocabulary tokens nearest to the context centroid, skipping
/// stopwords and the OOV word itself. Context words stay eligible.
pub fn predict_attributes<F: Real>(
    model: ModelRef<'_, F>,
    vocab: &Vocabulary,
    sample: &OovSample,
    k: usize,
    stopwords: &Stopwords,
) -> Result<Vec<String>> {
    let ctx = context_vector(model, &sample.context_tokens(), vocab, stopwords)?;
    nearest_tokens(model, vocab, &ctx, &sample.word, k, stopwords)
}

/// Nearest vocabulary tokens to a vector under the model's evaluation metric.
pub fn nearest_tokens<F: Real>(
    model: ModelRef<'_, F>,
    vocab: &Vocabulary,
    query: &[f64],
    oov_word: &str,
    k: usize,
    stopwords: &Stopwords,
) -> Result<Vec<String>> {
    let own = vocab.id(oov_word);
    let metric = Metric::default_for(&model);
    let hits = nearest_neighbors(model, Query::Vector(query), k, metric, |id| {
        Some(id) == own || stopwords.contains(vocab.token(id))
    })
    .map_err(|e| if e == Error::ZeroVector { Error::NoContextSignal } else { e })?;
    Ok(hits.into_iter().map(|(id, _)| vocab.token(id).to_string()).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Task1Score {
    pub n: usize,
    pub s1: f64,
    pub accuracy: f64,
}

/// `S1 = (1/N) Σ R_i` over the gold ranks and the fraction ranked first.
pub fn score_task1(ranks: &[usize], labels: usize) -> Result<Task1Score> {
    if ranks.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for &rank in ranks {
        if rank < 1 || rank > labels {
            return Err(Error::RankOutOfRange { rank, labels });
        }
    }
    let n = ranks.len();
    let sum: usize = ranks.iter().sum();
    let firsts = ranks.iter().filter(|&&r| r == 1).count();
    Ok(Task1Score { n, s1: sum as f64 / n as f64, accuracy: firsts as f64 / n as f64 })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Task2Score {
    pub n: usize,
    pub k: usize,
    pub hits: usize,
    pub s2: f64,
}

/// Whether any prediction matches any gold attribute, after lowercasing.
pub fn is_hit<P: AsRef<str>, G: AsRef<str>>(predictions: &[P], gold: &[G]) -> bool {
    predictions.iter().any(|p| {
        let p = p.as_ref().to_lowercase();
        gold.iter().any(|g| g.as_ref().to_lowercase() == p)
    })
}

/// `S2 = (1 / (K N)) Σ_i [W_i ∩ Ŵ_i ≠ ∅]`.
pub fn score_task2<P: AsRef<str>, G: AsRef<str>>(
    predictions: &[Vec<P>],
    golds: &[Vec<G>],
    k: usize,
) -> Result<Task2Score> {
    if predictions.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if k == 0 {
        return Err(Error::InvalidConfig("K must be at least 1".into()));
    }
    if predictions.len() != golds.len() {
        return Err(Error::LengthMismatch { expected: golds.len(), actual: predictions.len() });
    }
    if let Some(p) = predictions.iter().find(|p| p.len() > k) {
        return Err(Error::LengthMismatch { expected: k, actual: p.len() });
    }
    let hits = predictions.iter().zip(golds).filter(|(p, g)| is_hit(p, g)).count();
    let n = predictions.len();
    Ok(Task2Score { n, k, hits, s2: hits as f64 / (k * n) as f64 })
}

/// Per-sample evaluation detail.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalRow {
    pub word: String,
    /// Gold category (task 1) or annotated attributes (task 2).
    pub gold: Vec<String>,
    /// Ranked labels (task 1) or predicted tokens (task 2).
    pub predictions: Vec<String>,
    pub rank: Option<usize>,
    pub hit: Option<bool>,
    /// The context had no usable token; scored as worst rank or a miss.
    pub no_context: bool,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub task: u8,
    pub n: usize,
    pub k: Option<usize>,
    pub s1: Option<f64>,
    pub accuracy: Option<f64>,
    pub s2: Option<f64>,
    pub no_context: usize,
    pub rows: Vec<EvalRow>,
}

/// Runs task 1 over `samples`. Samples without context signal get the worst
/// rank.
pub fn evaluate_task1<F: Real>(
    model: ModelRef<'_, F>,
    vocab: &Vocabulary,
    samples: &[OovSample],
    categories: &CategorySet,
    stopwords: &Stopwords,
    mode: LabelSimilarity,
) -> Result<EvalReport> {
    let mut rows = Vec::with_capacity(samples.len());
    let mut ranks = Vec::with_capacity(samples.len());
    for s in samples {
        let gold = categories
            .resolve(&s.category)
            .ok_or_else(|| Error::Validation(format!("unknown category '{}'", s.category)))?;
        let (rank, predictions, no_context) =
            match predict_category(model, vocab, s, categories, stopwords, mode) {
                Ok(order) => {
                    let rank = order.iter().position(|&l| l == gold).expect("permutation") + 1;
                    let labels = order.iter().map(|&l| categories.labels()[l].clone()).collect();
                    (rank, labels, false)
                }
                Err(Error::NoContextSignal) => (categories.len(), Vec::new(), true),
                Err(e) => return Err(e),
            };
        ranks.push(rank);
        rows.push(EvalRow {
            word: s.word.clone(),
            gold: vec![categories.labels()[gold].clone()],
            predictions,
            rank: Some(rank),
            hit: Some(rank == 1),
            no_context,
        });
    }
    let score = score_task1(&ranks, categories.len())?;
    Ok(EvalReport {
        task: 1,
        n: score.n,
        k: None,
        s1: Some(score.s1),
        accuracy: Some(score.accuracy),
        s2: None,
        no_context: rows.iter().filter(|r| r.no_context).count(),
        rows,
    })
}

/// Runs task 2 with a budget of `k` predictions per sample. Samples without
/// context signal count as misses.
pub fn evaluate_task2<F: Real>(
    model: ModelRef<'_, F>,
    vocab: &Vocabulary,
    samples: &[OovSample],
    stopwords: &Stopwords,
    k: usize,
) -> Result<EvalReport> {
    let mut rows = Vec::with_capacity(samples.len());
    let mut predictions = Vec::with_capacity(samples.len());
    for s in samples {
        let (pred, no_context) = match predict_attributes(model, vocab, s, k, stopwords) {
            Ok(p) => (p, false),
            Err(Error::NoContextSignal) => (Vec::new(), true),
            Err(e) => return Err(e),
        };
        rows.push(EvalRow {
            word: s.word.clone(),
            gold: s.attributes.clone(),
            predictions: pred.clone(),
            rank: None,
            hit: Some(is_hit(&pred, &s.attributes)),
            no_context,
        });
        predictions.push(pred);
    }
    let golds: Vec<Vec<String>> = samples.iter().map(|s| s.attributes.clone()).collect();
    let score = score_task2(&predictions, &golds, k)?;
    Ok(EvalReport {
        task: 2,
        n: score.n,
        k: Some(k),
        s1: None,
        accuracy: None,
        s2: Some(score.s2),
        no_context: rows.iter().filter(|r| r.no_context).count(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gm::GmEmbedding;
    use crate::point::PointEmbedding;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(word: &str, context: &str, category: &str, attrs: &[&str]) -> OovSample {
        OovSample {
            word: word.into(),
            context: context.into(),
            category: category.into(),
            attributes: attrs.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Vocabulary in the given order with one-hot-ish vectors.
    fn toy(tokens: &[&str], vecs: &[&[f64]]) -> (Vocabulary, PointEmbedding<f64>) {
        let vocab = Vocabulary::from_ordered_tokens(tokens.iter().map(|s| s.to_string()).collect()).unwrap();
        let d = vecs[0].len();
        let word: Vec<f64> = vecs.iter().flat_map(|v| v.iter().copied()).collect();
        let n = word.len();
        (vocab, PointEmbedding::from_parts(d, word, vec![0.0; n]).unwrap())
    }

    #[test]
    fn category_resolution() {
        let c = CategorySet::default();
        assert_eq!(c.resolve("plant"), Some(3));
        assert_eq!(c.resolve("Plants"), Some(3));
        assert_eq!(c.resolve("Greek mythology"), Some(0));
        assert_eq!(c.resolve("location"), Some(1));
        assert_eq!(c.resolve("medicine"), None);
        assert_eq!(c.label_tokens(0), ["greek", "mythology"]);
        assert!(CategorySet::new(vec![]).is_err());
        assert!(CategorySet::new(vec!["a".into(), "A".into()]).is_err());
    }

    #[test]
    fn sample_validation() {
        let c = CategorySet::default();
        let s = sample("Arachis", "Arachis is a genus", "plant", &["pea", "Flower"]).validate(&c).unwrap();
        assert_eq!(s.word, "arachis");
        assert_eq!(s.category, "plants");
        assert_eq!(s.attributes, ["pea", "flower"]);
        assert!(sample("x", "ctx", "plants", &[]).validate(&c).is_err());
        assert!(sample("x", "ctx", "plants", &["a", "b", "c", "d", "e", "f"]).validate(&c).is_err());
        assert!(sample("x", "ctx", "chemistry", &["a"]).validate(&c).is_err());
        assert!(sample("x", "  ", "plants", &["a"]).validate(&c).is_err());
    }

    #[test]
    fn context_vector_cases() {
        let (vocab, m) = toy(&["pea", "flower", "the"], &[&[1.0, 0.0], &[0.0, 3.0], &[5.0, 5.0]]);
        let sw = Stopwords::default();
        let one = context_vector(ModelRef::Point(&m), &["pea", "zzz"], &vocab, &sw).unwrap();
        assert_eq!(one, vec![1.0, 0.0]);
        let two = context_vector(ModelRef::Point(&m), &["pea", "the", "flower"], &vocab, &sw).unwrap();
        assert_eq!(two, vec![0.5, 1.5]);
        let none = context_vector(ModelRef::Point(&m), &["the", "unknown"], &vocab, &sw);
        assert_eq!(none, Err(Error::NoContextSignal));
    }

    #[test]
    fn mixture_context_uses_expected_means() {
        let vocab = Vocabulary::from_ordered_tokens(vec!["a".into()]).unwrap();
        let gm = GmEmbedding::<f64>::from_parts(1, 2, vec![0.0, libm::log(3.0)], vec![4.0, 8.0], vec![0.0; 2])
            .unwrap();
        let v = context_vector(ModelRef::Gm(&gm), &["a"], &vocab, &Stopwords::none()).unwrap();
        assert!((v[0] - (0.25 * 4.0 + 0.75 * 8.0)).abs() < 1e-12);
    }

    #[test]
    fn category_ranking_by_construction() {
        let cats = CategorySet::new(vec!["alpha".into(), "beta".into(), "gamma".into()]).unwrap();
        let (vocab, m) = toy(
            &["alpha", "beta", "gamma", "x"],
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.2, 0.9, 0.5]],
        );
        let s = sample("oov", "x", "beta", &["beta"]);
        let order =
            predict_category(ModelRef::Point(&m), &vocab, &s, &cats, &Stopwords::none(), LabelSimilarity::Centroid)
                .unwrap();
        assert_eq!(order, vec![1, 2, 0]);
        let s = sample("oov", "gamma", "gamma", &["gamma"]);
        let order =
            predict_category(ModelRef::Point(&m), &vocab, &s, &cats, &Stopwords::none(), LabelSimilarity::Centroid)
                .unwrap();
        assert_eq!(order[0], 2);
    }

    #[test]
    fn unembeddable_label() {
        let cats = CategorySet::new(vec!["alpha".into(), "omega".into()]).unwrap();
        let (vocab, m) = toy(&["alpha", "x"], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let s = sample("oov", "x", "alpha", &["x"]);
        let err = predict_category(ModelRef::Point(&m), &vocab, &s, &cats, &Stopwords::none(), LabelSimilarity::Centroid);
        assert_eq!(err, Err(Error::LabelNotEmbeddable("omega".into())));
    }

    #[test]
    fn attribute_prediction_clips_and_excludes() {
        let (vocab, m) = toy(&["oov", "pea", "the"], &[&[1.0, 0.0], &[0.9, 0.1], &[0.0, 1.0]]);
        let s = sample("oov", "pea the", "plants", &["pea"]);
        let p = predict_attributes(ModelRef::Point(&m), &vocab, &s, 5, &Stopwords::default()).unwrap();
        assert_eq!(p, vec!["pea"]);
        let p = predict_attributes(ModelRef::Point(&m), &vocab, &s, 5, &Stopwords::none()).unwrap();
        assert_eq!(p.len(), 2);
        assert!(!p.contains(&"oov".to_string()));
    }

    #[test]
    fn gold_attribute_nearest_is_rank_one() {
        let (vocab, m) = toy(&["a", "b", "malware"], &[&[1.0, 0.0], &[0.0, 1.0], &[0.7, 0.7]]);
        let hits = nearest_tokens(ModelRef::Point(&m), &vocab, &[0.6, 0.65], "winwebsec", 2, &Stopwords::none())
            .unwrap();
        assert_eq!(hits[0], "malware");
    }

    #[test]
    fn task1_arithmetic() {
        let s = score_task1(&[1, 2, 3], 5).unwrap();
        assert_eq!(s.s1, 2.0);
        assert!((s.accuracy - 1.0 / 3.0).abs() < 1e-15);
        let s = score_task1(&[1, 1, 1, 1], 5).unwrap();
        assert_eq!((s.s1, s.accuracy), (1.0, 1.0));
        assert_eq!(score_task1(&[], 5), Err(Error::EmptyDataset));
        assert_eq!(score_task1(&[6], 5), Err(Error::RankOutOfRange { rank: 6, labels: 5 }));
    }

    #[test]
    fn task1_random_baseline() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let ranks: Vec<usize> = (0..10_000).map(|_| rng.random_range(1..=5)).collect();
        let s = score_task1(&ranks, 5).unwrap();
        assert!((s.s1 - 3.0).abs() <= 0.05, "{}", s.s1);
        assert!((s.accuracy - 0.2).abs() <= 0.02);
    }

    #[test]
    fn task2_arithmetic() {
        let preds = vec![vec!["pea", "x"], vec!["y"]];
        let golds = vec![vec!["Pea"], vec!["malware"]];
        assert!((score_task2(&preds, &golds, 5).unwrap().s2 - 0.1).abs() < 1e-15);
        let all = vec![vec!["a"], vec!["b"]];
        assert!((score_task2(&all, &[vec!["a"], vec!["b"]], 5).unwrap().s2 - 0.2).abs() < 1e-15);
        assert_eq!(score_task2(&all, &[vec!["q"], vec!["r"]], 5).unwrap().s2, 0.0);
        assert_eq!(score_task2::<&str, &str>(&[], &[], 5), Err(Error::EmptyDataset));
        assert!(matches!(score_task2(&all, &[vec!["a"]], 5), Err(Error::LengthMismatch { .. })));
        assert!(matches!(score_task2(&[vec!["a", "b"]], &[vec!["a"]], 1), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn no_context_samples_are_penalized() {
        let cats = CategorySet::new(vec!["alpha".into(), "beta".into()]).unwrap();
        let (vocab, m) = toy(&["alpha", "beta"], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let samples = vec![
            sample("w1", "the of", "alpha", &["alpha"]),
            sample("w2", "alpha", "alpha", &["alpha"]),
        ];
        let sw = Stopwords::default();
        let r = evaluate_task1(ModelRef::Point(&m), &vocab, &samples, &cats, &sw, LabelSimilarity::Centroid).unwrap();
        assert_eq!(r.no_context, 1);
        assert_eq!(r.s1, Some(1.5));
        assert_eq!(r.accuracy, Some(0.5));
        let r = evaluate_task2(ModelRef::Point(&m), &vocab, &samples, &sw, 5).unwrap();
        assert_eq!(r.no_context, 1);
        assert_eq!(r.s2, Some(0.1));
    }

    proptest! {
        #[test]
        fn ranking_invariant_under_monotone_transforms(scores in prop::collection::vec(-1.0f64..1.0, 1..8)) {
            let base = rank_by_scores(&scores);
            let cubed: Vec<f64> = scores.iter().map(|s| s * s * s + 2.0 * s).collect();
            let exp: Vec<f64> = scores.iter().map(|s| libm::exp(3.0 * s)).collect();
            prop_assert_eq!(&rank_by_scores(&cubed), &base);
            prop_assert_eq!(&rank_by_scores(&exp), &base);
            let mut sorted = base.clone();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..scores.len()).collect::<Vec<_>>());
        }

        #[test]
        fn score_bounds(ranks in prop::collection::vec(1usize..=5, 1..50), hits in prop::collection::vec(any::<bool>(), 1..50), k in 1usize..8) {
            let s1 = score_task1(&ranks, 5).unwrap();
            prop_assert!(s1.s1 >= 1.0 && s1.s1 <= 5.0);
            prop_assert!(s1.accuracy >= 0.0 && s1.accuracy <= 1.0);
            let preds: Vec<Vec<&str>> = hits.iter().map(|&h| if h { vec!["g"] } else { vec!["x"] }).collect();
            let golds: Vec<Vec<&str>> = hits.iter().map(|_| vec!["g"]).collect();
            let s2 = score_task2(&preds, &golds, k).unwrap();
            prop_assert!(s2.s2 >= 0.0 && s2.s2 <= 1.0 / k as f64 + 1e-15);
        }
    }
}
