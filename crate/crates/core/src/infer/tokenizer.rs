//! Token counting.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::text;

/// Counts tokens in text. `count("")` is always 0.
pub trait Tokenizer: Send + Sync {
    fn name(&self) -> &str;
    fn count(&self, text: &str) -> usize;
}

/// Whitespace-separated pieces. Exactly additive:
/// `count(a + " " + b) == count(a) + count(b)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct WhitespaceTokenizer;

impl Tokenizer for WhitespaceTokenizer {
    fn name(&self) -> &str {
        "whitespace"
    }

    fn count(&self, text: &str) -> usize {
        text::whitespace_words(text).count()
    }
}

/// Lowercase alphanumeric runs (the BM25/ROUGE term definition). Additive up
/// to one token when the separator splits a run.
#[derive(Debug, Clone, Copy, Default)]
pub struct WordTokenizer;

impl Tokenizer for WordTokenizer {
    fn name(&self) -> &str {
        "words"
    }

    fn count(&self, text: &str) -> usize {
        text::terms(text).len()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TokenizerKind {
    #[default]
    Whitespace,
    Words,
}

impl TokenizerKind {
    pub fn build(self) -> Box<dyn Tokenizer> {
        match self {
            TokenizerKind::Whitespace => Box::new(WhitespaceTokenizer),
            TokenizerKind::Words => Box::new(WordTokenizer),
        }
    }
}

impl FromStr for TokenizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "whitespace" => Ok(TokenizerKind::Whitespace),
            "words" => Ok(TokenizerKind::Words),
            other => Err(Error::Config(format!("unknown tokenizer {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counts() {
        assert_eq!(WhitespaceTokenizer.count(""), 0);
        assert_eq!(WordTokenizer.count(""), 0);
        assert_eq!(WhitespaceTokenizer.count("a  b\tc\n"), 3);
        assert_eq!(WordTokenizer.count("X-ray, today."), 3);
        assert_eq!(
            "words".parse::<TokenizerKind>().unwrap(),
            TokenizerKind::Words
        );
        assert!("bpe".parse::<TokenizerKind>().is_err());
    }

    proptest! {
        #[test]
        fn additivity(a in "[a-z .,-]{0,30}", b in "[a-z .,-]{0,30}") {
            let joined = format!("{a} {b}");
            prop_assert_eq!(WhitespaceTokenizer.count(&joined), WhitespaceTokenizer.count(&a) + WhitespaceTokenizer.count(&b));
            let w = WordTokenizer.count(&joined) as i64 - (WordTokenizer.count(&a) + WordTokenizer.count(&b)) as i64;
            prop_assert!(w.abs() <= 1);
        }
    }
}
