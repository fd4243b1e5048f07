//! Fixed-seed synthetic corpora with planted structure.
//!
//! Every document is drawn from a single topic; topic vocabularies are
//! disjoint. Optional shared tokens occur in documents of every topic and
//! therefore carry one sense per topic.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct TopicCorpusConfig {
    pub topics: usize,
    pub words_per_topic: usize,
    /// Approximate corpus length in tokens.
    pub tokens: usize,
    pub doc_len: usize,
    /// Tokens that appear in every topic.
    pub shared_words: Vec<String>,
    /// Per-position probability of emitting a shared token.
    pub shared_rate: f64,
    pub seed: u64,
}

impl Default for TopicCorpusConfig {
    fn default() -> Self {
        TopicCorpusConfig {
            topics: 2,
            words_per_topic: 500,
            tokens: 1_000_000,
            doc_len: 50,
            shared_words: Vec::new(),
            shared_rate: 0.0,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TopicCorpus {
    pub documents: Vec<Vec<String>>,
    /// Topic vocabularies, indexed by topic.
    pub topic_words: Vec<Vec<String>>,
    /// Topic of each document.
    pub doc_topics: Vec<usize>,
}

impl TopicCorpus {
    /// Documents joined by spaces, one per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for d in &self.documents {
            out.push_str(&d.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Name of word `index` of `topic`.
pub fn topic_word(topic: usize, index: usize) -> String {
    format!("t{topic}w{index}")
}

pub fn topic_corpus(cfg: &TopicCorpusConfig) -> TopicCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let topic_words: Vec<Vec<String>> = (0..cfg.topics)
        .map(|t| (0..cfg.words_per_topic).map(|i| topic_word(t, i)).collect())
        .collect();
    let n_docs = cfg.tokens.div_ceil(cfg.doc_len.max(1));
    let mut documents = Vec::with_capacity(n_docs);
    let mut doc_topics = Vec::with_capacity(n_docs);
    for d in 0..n_docs {
        let topic = d % cfg.topics;
        let doc = (0..cfg.doc_len)
            .map(|_| {
                if !cfg.shared_words.is_empty() && rng.random::<f64>() < cfg.shared_rate {
                    cfg.shared_words[rng.random_range(0..cfg.shared_words.len())].clone()
                } else {
                    topic_words[topic][rng.random_range(0..cfg.words_per_topic)].clone()
                }
            })
            .collect();
        documents.push(doc);
        doc_topics.push(topic);
    }
    TopicCorpus { documents, topic_words, doc_topics }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_and_topic_pure() {
        let cfg = TopicCorpusConfig {
            tokens: 2_000,
            words_per_topic: 10,
            shared_words: alloc::vec![String::from("bank")],
            shared_rate: 0.1,
            ..TopicCorpusConfig::default()
        };
        let a = topic_corpus(&cfg);
        let b = topic_corpus(&cfg);
        assert_eq!(a.documents, b.documents);
        assert_eq!(a.documents.len(), 40);
        for (doc, &t) in a.documents.iter().zip(&a.doc_topics) {
            for tok in doc {
                assert!(tok == "bank" || a.topic_words[t].contains(tok));
            }
        }
        assert!(a.documents.iter().flatten().any(|t| t == "bank"));
    }
}
