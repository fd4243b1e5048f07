//! Lowercasing tokenizer.
//!
//! Tokens are maximal runs of alphanumeric characters, lowercased. A token
//! made only of ASCII digits becomes [`NUM_TOKEN`].

use alloc::string::String;
use core::str::CharIndices;

pub const NUM_TOKEN: &str = "<num>";

/// Iterator over the tokens of `text`.
pub fn tokenize(text: &str) -> Tokens<'_> {
    Tokens { text, chars: text.char_indices() }
}

pub struct Tokens<'a> {
    text: &'a str,
    chars: CharIndices<'a>,
}

impl Iterator for Tokens<'_> {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        let start = loop {
            let (i, c) = self.chars.next()?;
            if c.is_alphanumeric() {
                break i;
            }
        };
        let mut end = self.text.len();
        for (i, c) in self.chars.by_ref() {
            if !c.is_alphanumeric() {
                end = i;
                break;
            }
        }
        let raw = &self.text[start..end];
        if raw.bytes().all(|b| b.is_ascii_digit()) {
            return Some(String::from(NUM_TOKEN));
        }
        Some(raw.to_lowercase())
    }
}
