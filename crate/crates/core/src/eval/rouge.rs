//! ROUGE-N and ROUGE-L over lowercase alphanumeric tokens.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::text;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    #[serde(rename = "p")]
    pub precision: f64,
    #[serde(rename = "r")]
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        RougeScore {
            precision,
            recall,
            f1,
        }
    }

    /// `matched` overlaps out of `cand` candidate and `reference` reference units.
    fn from_counts(matched: usize, cand: usize, reference: usize) -> Self {
        if cand == 0 || reference == 0 {
            return RougeScore::default();
        }
        RougeScore::from_pr(
            matched as f64 / cand as f64,
            matched as f64 / reference as f64,
        )
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n == 0 || tokens.len() < n {
        return counts;
    }
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram overlap. `n == 0` or too-short texts give all zeros.
pub fn rouge_n(candidate: &str, reference: &str, n: usize) -> RougeScore {
    let (c, r) = (text::terms(candidate), text::terms(reference));
    let (cc, rc) = (ngram_counts(&c, n), ngram_counts(&r, n));
    let matched: usize = cc
        .iter()
        .map(|(g, &k)| k.min(rc.get(g).copied().unwrap_or(0)))
        .sum();
    RougeScore::from_counts(matched, cc.values().sum(), rc.values().sum())
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Whole-text longest common subsequence.
pub fn rouge_l(candidate: &str, reference: &str) -> RougeScore {
    let (c, r) = (text::terms(candidate), text::terms(reference));
    RougeScore::from_counts(lcs_len(&c, &r), c.len(), r.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity() {
        let s = "Patient reports a dry cough for six months.";
        for score in [rouge_n(s, s, 1), rouge_n(s, s, 2), rouge_l(s, s)] {
            assert_eq!((score.precision, score.recall, score.f1), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn unigram_hand_case() {
        let s = rouge_n("the cat sat", "the cat", 1);
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.recall, 1.0);
        assert!((s.f1 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn bigram_hand_case() {
        let s = rouge_n("a b c", "a b d", 2);
        assert_eq!((s.precision, s.recall, s.f1), (0.5, 0.5, 0.5));
    }

    #[test]
    fn clipping() {
        // "the" appears 3x in the candidate but once in the reference.
        let s = rouge_n("the the the", "the cat", 1);
        assert!((s.precision - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.recall, 0.5);
    }

    #[test]
    fn lcs_hand_case() {
        let s = rouge_l("the cat sat on mat", "the cat on the mat");
        assert_eq!(
            lcs_len(
                &text::terms("the cat sat on mat"),
                &text::terms("the cat on the mat")
            ),
            4
        );
        assert!((s.precision - 0.8).abs() < 1e-12);
        assert!((s.recall - 0.8).abs() < 1e-12);
        assert!((s.f1 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(rouge_l("alpha beta", "gamma delta"), RougeScore::default());
        assert_eq!(rouge_n("", "a b", 1), RougeScore::default());
        assert_eq!(rouge_n("a", "a", 2), RougeScore::default());
        assert_eq!(rouge_n("a b", "a b", 0), RougeScore::default());
    }

    #[test]
    fn serializes_short_keys() {
        let v = serde_json::to_value(RougeScore::from_pr(0.5, 0.5)).unwrap();
        assert_eq!(v, serde_json::json!({"p": 0.5, "r": 0.5, "f1": 0.5}));
    }

    proptest! {
        #[test]
        fn swapping_exchanges_precision_and_recall(a in "[a-d ]{0,24}", b in "[a-d ]{0,24}") {
            for (x, y) in [(rouge_n(&a, &b, 1), rouge_n(&b, &a, 1)), (rouge_n(&a, &b, 2), rouge_n(&b, &a, 2)), (rouge_l(&a, &b), rouge_l(&b, &a))] {
                prop_assert_eq!(x.precision, y.recall);
                prop_assert_eq!(x.recall, y.precision);
                prop_assert!((0.0..=1.0).contains(&x.f1));
            }
        }

        #[test]
        fn self_overlap_is_one_when_long_enough(words in prop::collection::vec("[a-z]{1,4}", 0..8)) {
            let s = words.join(" ");
            for n in 1..=2 {
                let score = rouge_n(&s, &s, n);
                if words.len() >= n {
                    prop_assert_eq!(score.f1, 1.0);
                } else {
                    prop_assert_eq!(score, RougeScore::default());
                }
            }
        }
    }
}
