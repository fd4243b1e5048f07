//! Plain-text corpora and the vocabulary dump.
//!
//! A corpus is one or more UTF-8 text files. Every non-empty line is an
//! independent sequence; skip-gram windows never cross line boundaries.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use oov_embed_core::tokenize::tokenize;
use oov_embed_core::vocab::{VocabBuilder, Vocabulary};

use crate::error::{Error, Result};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn for_each_line(paths: &[PathBuf], mut f: impl FnMut(&str)) -> Result<()> {
    for path in paths {
        let mut reader = open(path)?;
        let mut line = String::new();
        loop {
            line.clear();
            let n = reader.read_line(&mut line).map_err(|e| Error::io(path, e))?;
            if n == 0 {
                break;
            }
            f(&line);
        }
    }
    Ok(())
}

/// Counts tokens in every file and applies the minimum-count filter.
pub fn build_vocab(paths: &[PathBuf], min_count: u64) -> Result<Vocabulary> {
    let mut builder = VocabBuilder::new();
    for_each_line(paths, |line| {
        for tok in tokenize(line) {
            builder.add(&tok);
        }
    })?;
    log::info!("{} distinct tokens", builder.distinct());
    Ok(builder.finish(min_count)?)
}

/// Token-id sequences, one per non-empty line, out-of-vocabulary tokens
/// dropped.
pub fn encode(paths: &[PathBuf], vocab: &Vocabulary) -> Result<Vec<Vec<u32>>> {
    let mut sequences = Vec::new();
    for_each_line(paths, |line| {
        let ids = vocab.encode(tokenize(line));
        if !ids.is_empty() {
            sequences.push(ids);
        }
    })?;
    Ok(sequences)
}

/// Writes `token<TAB>count` lines in id order.
pub fn write_vocab(vocab: &Vocabulary, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_vocab_to(vocab, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_vocab_to<W: Write>(vocab: &Vocabulary, w: &mut W) -> std::io::Result<()> {
    for (token, count) in vocab.tokens().iter().zip(vocab.counts()) {
        writeln!(w, "{token}\t{count}")?;
    }
    Ok(())
}

/// Reads a vocabulary dump back; ids follow the (count-sorted) input.
pub fn read_vocab(path: &Path) -> Result<Vocabulary> {
    let mut counts = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let (token, count) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            reason: "expected token<TAB>count".into(),
        })?;
        let count = count.trim().parse::<u64>().map_err(|e| Error::Parse {
            line: i + 1,
            reason: format!("bad count: {e}"),
        })?;
        counts.push((token.to_string(), count));
    }
    Ok(Vocabulary::from_counts(counts, 1)?)
}
