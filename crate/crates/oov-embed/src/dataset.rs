//! OOV dataset files.
//!
//! The native format is JSON Lines with exactly the keys `word`, `context`,
//! `category` and `attributes` (1 to 5 strings).
//!
//! [`convert_two_column`] reads the two-column record layout
//!
//! ```text
//! word        arachis
//! context     Arachis is a genus of ...
//! category    plant
//! attributes  pea, flower, fabaceae
//! ```
//!
//! with a tab between field name and value and a blank line between records.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use oov_embed_core::tasks::{in_vocabulary_words, CategorySet, OovSample};
use oov_embed_core::Vocabulary;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    word: String,
    context: String,
    category: String,
    attributes: Vec<String>,
}

pub fn parse_jsonl<R: BufRead>(reader: R, categories: &CategorySet) -> Result<Vec<OovSample>> {
    let mut samples = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line)
            .map_err(|e| Error::Dataset { line: line_no, reason: e.to_string() })?;
        let sample = OovSample {
            word: record.word,
            context: record.context,
            category: record.category,
            attributes: record.attributes,
        }
        .validate(categories)
        .map_err(|e| Error::Dataset { line: line_no, reason: e.to_string() })?;
        if !seen.insert(sample.word.clone()) {
            return Err(Error::Dataset {
                line: line_no,
                reason: format!("duplicate OOV word '{}'", sample.word),
            });
        }
        samples.push(sample);
    }
    Ok(samples)
}

pub fn load_dataset(path: &Path, categories: &CategorySet) -> Result<Vec<OovSample>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_jsonl(BufReader::new(file), categories)
}

/// Logs a warning for every sample whose word is in the training vocabulary.
pub fn warn_in_vocabulary(samples: &[OovSample], vocab: &Vocabulary) -> usize {
    let words = in_vocabulary_words(samples, vocab);
    for w in &words {
        log::warn!("'{w}' occurs in the training vocabulary and is not out-of-vocabulary");
    }
    words.len()
}

/// Converts the two-column record layout to JSON Lines. Returns the number
/// of records written.
pub fn convert_two_column<R: BufRead, W: Write>(reader: R, mut out: W) -> Result<usize> {
    let mut current: Vec<(usize, String, String)> = Vec::new();
    let mut written = 0;
    let mut flush = |fields: &mut Vec<(usize, String, String)>, out: &mut W| -> Result<()> {
        if fields.is_empty() {
            return Ok(());
        }
        let first = fields[0].0;
        let get = |key: &str| -> Result<String> {
            let matches: Vec<&(usize, String, String)> = fields.iter().filter(|f| f.1 == key).collect();
            match matches.as_slice() {
                [one] => Ok(one.2.clone()),
                [] => Err(Error::Dataset { line: first, reason: format!("record lacks '{key}'") }),
                [_, dup, ..] => Err(Error::Dataset { line: dup.0, reason: format!("repeated '{key}'") }),
            }
        };
        if let Some(f) = fields
            .iter()
            .find(|f| !["word", "context", "category", "attributes"].contains(&f.1.as_str()))
        {
            return Err(Error::Dataset { line: f.0, reason: format!("unknown field '{}'", f.1) });
        }
        let attributes: Vec<String> = get("attributes")?
            .split([',', ';'])
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .map(String::from)
            .collect();
        let json = serde_json::json!({
            "word": get("word")?,
            "context": get("context")?,
            "category": get("category")?,
            "attributes": attributes,
        });
        writeln!(out, "{json}")?;
        written += 1;
        fields.clear();
        Ok(())
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            flush(&mut current, &mut out)?;
            continue;
        }
        let (key, value) = line.split_once('\t').ok_or_else(|| Error::Dataset {
            line: i + 1,
            reason: "expected field<TAB>value".into(),
        })?;
        current.push((i + 1, key.trim().to_lowercase(), value.trim().to_string()));
    }
    flush(&mut current, &mut out)?;
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ARACHIS: &str = r#"{"word":"arachis","context":"Arachis is a genus of about 70 species of annual and perennial flowering plants in the pea family (Fabaceae).","category":"plant","attributes":["pea","flower","fabaceae"]}"#;

    #[test]
    fn parses_and_canonicalizes() {
        let s = parse_jsonl(ARACHIS.as_bytes(), &CategorySet::default()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].category, "plants");
        assert_eq!(s[0].attributes, ["pea", "flower", "fabaceae"]);
    }

    #[test]
    fn schema_violations() {
        let cats = CategorySet::default();
        let extra = r#"{"word":"a","context":"b","category":"plants","attributes":["x"],"more":1}"#;
        assert!(matches!(parse_jsonl(extra.as_bytes(), &cats), Err(Error::Dataset { line: 1, .. })));
        let missing = r#"{"word":"a","context":"b","category":"plants"}"#;
        assert!(parse_jsonl(missing.as_bytes(), &cats).is_err());
        let empty = format!("\n{}", r#"{"word":"a","context":"b","category":"plants","attributes":[]}"#);
        assert!(matches!(parse_jsonl(empty.as_bytes(), &cats), Err(Error::Dataset { line: 2, .. })));
        let dup = format!("{ARACHIS}\n{ARACHIS}\n");
        let err = parse_jsonl(dup.as_bytes(), &cats).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn two_column_conversion() {
        let input = "word\tarachis\ncontext\tArachis is a genus.\ncategory\tplant\nattributes\tpea, flower, fabaceae\n\n\
                     word\twinwebsec\ncontext\tWinwebsec is a category of malware.\ncategory\ttechnology\nattributes\tmalware;adware;spyware\n";
        let mut out = Vec::new();
        assert_eq!(convert_two_column(input.as_bytes(), &mut out).unwrap(), 2);
        let samples = parse_jsonl(out.as_slice(), &CategorySet::default()).unwrap();
        assert_eq!(samples[1].word, "winwebsec");
        assert_eq!(samples[1].attributes, ["malware", "adware", "spyware"]);

        let bad = "word\tx\ncontext\ty\n";
        assert!(convert_two_column(bad.as_bytes(), Vec::new()).is_err());
        let no_tab = "word arachis\n";
        assert!(convert_two_column(no_tab.as_bytes(), Vec::new()).is_err());
    }
}
