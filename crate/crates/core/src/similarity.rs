//! Similarity metrics and nearest-neighbor search.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::gm::GmEmbedding;
use crate::math::{dot, norm, Real};
use crate::point::PointEmbedding;

/// `⟨u, v⟩ / (‖u‖ ‖v‖)`.
pub fn cosine<F: Real, G: Real>(u: &[F], v: &[G]) -> Result<f64> {
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Largest cosine between any component mean of `i` and any component mean
/// of `j`. Mixture weights do not enter.
pub fn max_cosine<F: Real>(gm: &GmEmbedding<F>, i: u32, j: u32) -> Result<f64> {
    let k = gm.components();
    let mut best = f64::NEG_INFINITY;
    for p in 0..k {
        for q in 0..k {
            best = best.max(cosine(gm.mean(i, p), gm.mean(j, q))?);
        }
    }
    Ok(best)
}

/// `KL(N(μ_p, diag v_p) ‖ N(μ_q, diag v_q))`.
pub fn kl_diag(mu_p: &[f64], var_p: &[f64], mu_q: &[f64], var_q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for d in 0..mu_p.len() {
        let diff = mu_q[d] - mu_p[d];
        acc += var_p[d] / var_q[d] + diff * diff / var_q[d] - 1.0 + libm::log(var_q[d] / var_p[d]);
    }
    (0.5 * acc).max(0.0)
}

/// KL divergence from component `p` of word `i` to component `q` of word `j`.
pub fn kl_component<F: Real>(gm: &GmEmbedding<F>, (i, p): (u32, usize), (j, q): (u32, usize)) -> f64 {
    let expand = |w: u32, k: usize| -> (Vec<f64>, Vec<f64>) {
        let mu = gm.mean(w, k).iter().map(|x| x.to_f64()).collect();
        let var = gm.log_var(w, k).iter().map(|x| libm::exp(x.to_f64())).collect();
        (mu, var)
    };
    let (mp, vp) = expand(i, p);
    let (mq, vq) = expand(j, q);
    kl_diag(&mp, &vp, &mq, &vq)
}

/// Similarity used to rank neighbors. Larger is more similar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Cosine of point vectors.
    Cosine,
    /// Maximum cosine over component means.
    MaxCosine,
    /// Log expected-likelihood energy.
    ExpectedLikelihood,
    /// Negated smallest component-pair KL divergence. `reverse` swaps the
    /// direction from `KL(query ‖ candidate)` to `KL(candidate ‖ query)`.
    Kl { reverse: bool },
}

impl Metric {
    /// The metric used to evaluate each kind of model.
    pub fn default_for(model: &ModelRef<'_, impl Real>) -> Metric {
        match model {
            ModelRef::Point(_) => Metric::Cosine,
            ModelRef::Gm(_) => Metric::MaxCosine,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Cosine => "cosine",
            Metric::MaxCosine => "max-cosine",
            Metric::ExpectedLikelihood => "el",
            Metric::Kl { reverse: false } => "kl",
            Metric::Kl { reverse: true } => "kl-reverse",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(Metric::Cosine),
            "max-cosine" | "max_cosine" => Ok(Metric::MaxCosine),
            "el" | "expected-likelihood" | "expected_likelihood" => Ok(Metric::ExpectedLikelihood),
            "kl" => Ok(Metric::Kl { reverse: false }),
            "kl-reverse" | "kl_reverse" => Ok(Metric::Kl { reverse: true }),
            other => Err(Error::UnknownMetricForModel(alloc::format!("unknown metric '{other}'"))),
        }
    }
}

/// Either kind of trained model.
#[derive(Clone, Copy, Debug)]
pub enum ModelRef<'a, F: Real> {
    Point(&'a PointEmbedding<F>),
    Gm(&'a GmEmbedding<F>),
}

impl<F: Real> ModelRef<'_, F> {
    pub fn len(&self) -> usize {
        match self {
            ModelRef::Point(m) => m.len(),
            ModelRef::Gm(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> usize {
        match self {
            ModelRef::Point(m) => m.dims(),
            ModelRef::Gm(m) => m.dims(),
        }
    }

    /// The single vector standing for word `id`: the word vector of a point
    /// model or the weight-averaged mean of a mixture.
    pub fn representation(&self, id: u32) -> Vec<f64> {
        match self {
            ModelRef::Point(m) => m.word(id).iter().map(|x| x.to_f64()).collect(),
            ModelRef::Gm(m) => m.expected_mean(id),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ModelRef::Point(_) => "point",
            ModelRef::Gm(_) => "gaussian-mixture",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Query<'a> {
    Word(u32),
    Vector(&'a [f64]),
}

/// Scores every candidate id against a fixed query.
enum Scorer<'a, F: Real> {
    PointCosine { model: &'a PointEmbedding<F>, query: Vec<f64> },
    GmVectorCosine { model: &'a GmEmbedding<F>, query: Vec<f64> },
    GmWordCosine { model: &'a GmEmbedding<F>, query: u32 },
    GmEnergy { model: &'a GmEmbedding<F>, query: u32 },
    GmKl { model: &'a GmEmbedding<F>, query: u32, reverse: bool },
}

fn unsupported(metric: Metric, what: &str) -> Error {
    Error::UnknownMetricForModel(alloc::format!("metric {metric} is not defined for {what}"))
}

impl<'a, F: Real> Scorer<'a, F> {
    fn new(model: ModelRef<'a, F>, query: Query<'_>, metric: Metric) -> Result<Self> {
        let query_vec = |q: &[f64]| -> Result<Vec<f64>> {
            if q.len() != model.dims() {
                return Err(Error::DimensionMismatch { expected: model.dims(), actual: q.len() });
            }
            if norm(q) == 0.0 {
                return Err(Error::ZeroVector);
            }
            Ok(q.to_vec())
        };
        match (model, metric, query) {
            (ModelRef::Point(m), Metric::Cosine, Query::Word(w)) => {
                Ok(Scorer::PointCosine { model: m, query: query_vec(&model.representation(w))? })
            }
            (ModelRef::Point(m), Metric::Cosine, Query::Vector(v)) => {
                Ok(Scorer::PointCosine { model: m, query: query_vec(v)? })
            }
            (ModelRef::Gm(m), Metric::MaxCosine, Query::Word(w)) => {
                Ok(Scorer::GmWordCosine { model: m, query: w })
            }
            (ModelRef::Gm(m), Metric::MaxCosine, Query::Vector(v)) => {
                Ok(Scorer::GmVectorCosine { model: m, query: query_vec(v)? })
            }
            (ModelRef::Gm(m), Metric::ExpectedLikelihood, Query::Word(w)) => {
                Ok(Scorer::GmEnergy { model: m, query: w })
            }
            (ModelRef::Gm(m), Metric::Kl { reverse }, Query::Word(w)) => {
                Ok(Scorer::GmKl { model: m, query: w, reverse })
            }
            (ModelRef::Gm(_), Metric::ExpectedLikelihood | Metric::Kl { .. }, Query::Vector(_)) => {
                Err(unsupported(metric, "raw vector queries"))
            }
            (model, metric, _) => Err(unsupported(metric, model.kind())),
        }
    }

    fn score(&self, j: u32) -> f64 {
        // Candidates with a zero vector have no direction; they score 0.
        match self {
            Scorer::PointCosine { model, query } => cosine(query, model.word(j)).unwrap_or(0.0),
            Scorer::GmVectorCosine { model, query } => (0..model.components())
                .map(|q| cosine(query, model.mean(j, q)).unwrap_or(0.0))
                .fold(f64::NEG_INFINITY, f64::max),
            Scorer::GmWordCosine { model, query } => max_cosine(model, *query, j).unwrap_or(0.0),
            Scorer::GmEnergy { model, query } => model.log_energy(*query, j),
            Scorer::GmKl { model, query, reverse } => {
                let k = model.components();
                let mut best = f64::INFINITY;
                for p in 0..k {
                    for q in 0..k {
                        let kl = if *reverse {
                            kl_component(model, (j, q), (*query, p))
                        } else {
                            kl_component(model, (*query, p), (j, q))
                        };
                        best = best.min(kl);
                    }
                }
                -best
            }
        }
    }
}

/// Heap key: larger is better; equal scores prefer the smaller id.
#[derive(PartialEq)]
struct Ranked(f64, u32);

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Score of candidate `j` for `query` under `metric`.
pub fn similarity<F: Real>(model: ModelRef<'_, F>, query: Query<'_>, j: u32, metric: Metric) -> Result<f64> {
    Ok(Scorer::new(model, query, metric)?.score(j))
}

/// Top-`k` vocabulary ids by `metric`, best first. Ties go to the smaller
/// id; ids for which `exclude` returns true are skipped.
pub fn nearest_neighbors<F: Real>(
    model: ModelRef<'_, F>,
    query: Query<'_>,
    k: usize,
    metric: Metric,
    exclude: impl Fn(u32) -> bool,
) -> Result<Vec<(u32, f64)>> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let scorer = Scorer::new(model, query, metric)?;
    let mut heap: BinaryHeap<Reverse<Ranked>> = BinaryHeap::with_capacity(k + 1);
    for j in 0..model.len() as u32 {
        if exclude(j) {
            continue;
        }
        let cand = Ranked(scorer.score(j), j);
        if heap.len() < k {
            heap.push(Reverse(cand));
        } else if let Some(Reverse(worst)) = heap.peek() {
            if cand > *worst {
                heap.pop();
                heap.push(Reverse(cand));
            }
        }
    }
    let mut out: Vec<Ranked> = heap.into_iter().map(|Reverse(r)| r).collect();
    out.sort_unstable_by(|a, b| b.cmp(a));
    Ok(out.into_iter().map(|Ranked(s, id)| (id, s)).collect())
}

/// Neighbor ids mapped to tokens.
pub fn named<'v>(vocab: &'v crate::vocab::Vocabulary, hits: &[(u32, f64)]) -> Vec<(&'v str, f64)> {
    hits.iter().map(|&(id, s)| (vocab.token(id), s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point(vecs: &[&[f64]]) -> PointEmbedding<f64> {
        let d = vecs[0].len();
        let word: Vec<f64> = vecs.iter().flat_map(|v| v.iter().copied()).collect();
        PointEmbedding::from_parts(d, word.clone(), vec![0.0; word.len()]).unwrap()
    }

    #[test]
    fn cosine_cases() {
        assert!((cosine(&[0.3, -1.2], &[0.3, -1.2]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 5.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 0.0], &[1.0, 1.0]).unwrap() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((cosine(&[1.0, 2.0], &[2.0, 4.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]), Err(Error::ZeroVector));
    }

    #[test]
    fn max_cosine_picks_best_pair() {
        // word 0: components along x and y; word 1: along 2y and (1,-1).
        let gm = GmEmbedding::<f64>::from_parts(
            2,
            2,
            vec![0.0; 4],
            vec![1.0, 0.0, 0.0, 1.0, 0.0, 2.0, 1.0, -1.0],
            vec![0.0; 8],
        )
        .unwrap();
        assert!((max_cosine(&gm, 0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(max_cosine(&gm, 0, 1), max_cosine(&gm, 1, 0));
    }

    #[test]
    fn max_cosine_single_component_is_cosine() {
        let gm = GmEmbedding::<f64>::from_parts(2, 1, vec![0.0; 2], vec![1.0, 2.0, -3.0, 0.5], vec![0.0; 4])
            .unwrap();
        let direct = cosine(&[1.0, 2.0], &[-3.0, 0.5]).unwrap();
        assert_eq!(max_cosine(&gm, 0, 1).unwrap(), direct);
    }

    #[test]
    fn kl_closed_form_values() {
        assert_eq!(kl_diag(&[0.3], &[0.7], &[0.3], &[0.7]), 0.0);
        assert!((kl_diag(&[0.0], &[1.0], &[1.0], &[1.0]) - 0.5).abs() < 1e-15);
        let expected = 0.5 * (libm::log(2.0) + 0.5 - 1.0);
        assert!((kl_diag(&[0.0], &[1.0], &[0.0], &[2.0]) - expected).abs() < 1e-15);
        assert!((expected - 0.096574).abs() < 1e-6);
    }

    #[test]
    fn kl_is_asymmetric() {
        let ab = kl_diag(&[0.0], &[1.0], &[0.0], &[2.0]);
        let ba = kl_diag(&[0.0], &[2.0], &[0.0], &[1.0]);
        assert!((ab - ba).abs() > 0.01);
    }

    #[test]
    fn exclusion_and_full_ranking() {
        let m = point(&[&[1.0, 0.0], &[0.9, 0.1], &[0.0, 1.0], &[-1.0, 0.0]]);
        let model = ModelRef::Point(&m);
        let hits = nearest_neighbors(model, Query::Word(0), 10, Metric::Cosine, |id| id == 0).unwrap();
        let ids: Vec<u32> = hits.iter().map(|h| h.0).collect();
        assert_eq!(ids, vec![1, 2, 3]);
        let all = nearest_neighbors(model, Query::Word(0), 10, Metric::Cosine, |_| false).unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(all[0].0, 0);
    }

    #[test]
    fn ties_prefer_smaller_ids() {
        let m = point(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 3.0], &[0.0, 2.0]]);
        let hits =
            nearest_neighbors(ModelRef::Point(&m), Query::Vector(&[0.0, 1.0]), 2, Metric::Cosine, |_| false)
                .unwrap();
        assert_eq!(hits.iter().map(|h| h.0).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn metric_model_compatibility() {
        let m = point(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let err = nearest_neighbors(ModelRef::Point(&m), Query::Word(0), 1, Metric::Kl { reverse: false }, |_| false);
        assert!(matches!(err, Err(Error::UnknownMetricForModel(_))));
        let gm = GmEmbedding::<f64>::from_parts(2, 1, vec![0.0; 2], vec![1.0, 0.0, 0.0, 1.0], vec![0.0; 4])
            .unwrap();
        let err = nearest_neighbors(ModelRef::Gm(&gm), Query::Word(0), 1, Metric::Cosine, |_| false);
        assert!(matches!(err, Err(Error::UnknownMetricForModel(_))));
        let err = nearest_neighbors(ModelRef::Gm(&gm), Query::Vector(&[1.0, 0.0]), 1, Metric::ExpectedLikelihood, |_| false);
        assert!(matches!(err, Err(Error::UnknownMetricForModel(_))));
        for metric in [Metric::MaxCosine, Metric::ExpectedLikelihood, Metric::Kl { reverse: true }] {
            let hits = nearest_neighbors(ModelRef::Gm(&gm), Query::Word(0), 2, metric, |_| false).unwrap();
            assert_eq!(hits[0].0, 0, "{metric}");
        }
    }

    #[test]
    fn metric_names_round_trip() {
        for m in [Metric::Cosine, Metric::MaxCosine, Metric::ExpectedLikelihood, Metric::Kl { reverse: false }, Metric::Kl { reverse: true }] {
            assert_eq!(alloc::format!("{m}").parse::<Metric>().unwrap(), m);
        }
        assert!("euclid".parse::<Metric>().is_err());
    }

    #[test]
    fn reordering_ids_only_changes_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (v, d) = (300usize, 6usize);
        let word: Vec<f64> = (0..v * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = PointEmbedding::from_parts(d, word.clone(), vec![0.0; v * d]).unwrap();
        // reversed id order
        let mut rev = Vec::with_capacity(v * d);
        for row in word.chunks(d).rev() {
            rev.extend_from_slice(row);
        }
        let r = PointEmbedding::from_parts(d, rev, vec![0.0; v * d]).unwrap();
        for q in [0u32, 17, 299] {
            let a = nearest_neighbors(ModelRef::Point(&m), Query::Word(q), 15, Metric::Cosine, |_| false).unwrap();
            let b = nearest_neighbors(ModelRef::Point(&r), Query::Word(v as u32 - 1 - q), 15, Metric::Cosine, |_| false)
                .unwrap();
            let mapped: Vec<u32> = b.iter().map(|h| v as u32 - 1 - h.0).collect();
            assert_eq!(a.iter().map(|h| h.0).collect::<Vec<_>>(), mapped);
        }
    }
}
