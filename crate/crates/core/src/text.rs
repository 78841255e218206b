//! Shared word tokenization.

/// Lowercased alphanumeric runs; everything else separates terms.
///
/// Used for BM25 terms, ROUGE n-grams and the test embedder so the three
/// agree on what a "word" is.
pub fn terms(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Whitespace-separated words, untouched.
pub fn whitespace_words(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_punctuation_and_lowercases() {
        assert_eq!(
            terms("I've had a Cough."),
            vec!["i", "ve", "had", "a", "cough"]
        );
        assert_eq!(terms("X-ray, 2.5mg"), vec!["x", "ray", "2", "5mg"]);
        assert!(terms("  ...  ").is_empty());
    }
}
