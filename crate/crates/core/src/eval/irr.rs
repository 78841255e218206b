//! Chance-corrected agreement between raters.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::winrate::{Choice, PreferenceRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrrResult {
    pub fleiss_kappa: f64,
    pub krippendorff_alpha: f64,
}

/// Fleiss' kappa from an items x categories matrix of rating counts. Every
/// row must sum to `n_raters`.
pub fn fleiss_kappa(counts: &[Vec<usize>], n_raters: usize) -> Result<f64> {
    if n_raters < 2 {
        return Err(Error::Precondition(
            "Fleiss' kappa needs at least 2 raters".into(),
        ));
    }
    if counts.is_empty() {
        return Err(Error::Precondition(
            "Fleiss' kappa needs at least one item".into(),
        ));
    }
    let k = counts[0].len();
    for (i, row) in counts.iter().enumerate() {
        if row.len() != k {
            return Err(Error::Precondition(format!(
                "row {i} has {} categories, expected {k}",
                row.len()
            )));
        }
        let sum: usize = row.iter().sum();
        if sum != n_raters {
            return Err(Error::Precondition(format!(
                "row {i} sums to {sum}, expected {n_raters}"
            )));
        }
    }

    let n = n_raters;
    let items = counts.len() as f64;
    let p_bar = counts
        .iter()
        .map(|row| {
            let agree = row.iter().map(|&c| c * c).sum::<usize>() - n;
            agree as f64 / (n * (n - 1)) as f64
        })
        .sum::<f64>()
        / items;
    let total = items * n as f64;
    let p_e: f64 = (0..k)
        .map(|j| {
            let p = counts.iter().map(|row| row[j]).sum::<usize>() as f64 / total;
            p * p
        })
        .sum();

    if p_e == 1.0 {
        return if p_bar == 1.0 {
            Ok(1.0)
        } else {
            Err(Error::DegenerateAgreement("expected agreement is 1".into()))
        };
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Krippendorff's alpha for nominal data. Each inner list holds the values one
/// item received; items with fewer than two values are not pairable and are
/// skipped.
pub fn krippendorff_alpha_nominal<T: Ord>(ratings: &[Vec<T>]) -> Result<f64> {
    let pairable: Vec<&Vec<T>> = ratings.iter().filter(|r| r.len() >= 2).collect();
    if pairable.is_empty() {
        return Err(Error::Precondition(
            "no item has two or more ratings".into(),
        ));
    }
    let categories: BTreeSet<&T> = pairable.iter().flat_map(|r| r.iter()).collect();
    let index: BTreeMap<&T, usize> = categories
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i))
        .collect();
    let k = index.len();

    // Coincidence matrix.
    let mut o = vec![vec![0.0f64; k]; k];
    for item in &pairable {
        let weight = 1.0 / (item.len() - 1) as f64;
        for (a, x) in item.iter().enumerate() {
            for (b, y) in item.iter().enumerate() {
                if a != b {
                    o[index[x]][index[y]] += weight;
                }
            }
        }
    }
    let n_c: Vec<f64> = o.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = n_c.iter().sum();

    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for d in 0..k {
            if c != d {
                observed += o[c][d];
                expected += n_c[c] * n_c[d];
            }
        }
    }
    let d_o = observed / n;
    let d_e = expected / (n * (n - 1.0));
    if d_e == 0.0 {
        return Err(Error::DegenerateAgreement(
            "only one value was ever used".into(),
        ));
    }
    Ok(1.0 - d_o / d_e)
}

/// Agreement over the three nominal categories A, B and tie. Fleiss' kappa
/// requires every item to be rated by the same number of raters.
pub fn irr_from_preferences(records: &[PreferenceRecord]) -> Result<IrrResult> {
    let mut by_item: BTreeMap<&str, Vec<Choice>> = BTreeMap::new();
    for r in records {
        by_item
            .entry(r.item_id.as_str())
            .or_default()
            .push(r.choice);
    }
    let per_item: BTreeSet<usize> = by_item.values().map(Vec::len).collect();
    if per_item.len() > 1 {
        return Err(Error::Precondition(format!(
            "items have differing numbers of ratings: {per_item:?}"
        )));
    }
    let n_raters = per_item.into_iter().next().unwrap_or(0);
    let categories = [Choice::A, Choice::B, Choice::Tie];
    let counts: Vec<Vec<usize>> = by_item
        .values()
        .map(|cs| {
            categories
                .iter()
                .map(|cat| cs.iter().filter(|c| *c == cat).count())
                .collect()
        })
        .collect();
    let ratings: Vec<Vec<Choice>> = by_item.into_values().collect();
    Ok(IrrResult {
        fleiss_kappa: fleiss_kappa(&counts, n_raters)?,
        krippendorff_alpha: krippendorff_alpha_nominal(&ratings)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fleiss_hand_cases() {
        assert_eq!(fleiss_kappa(&[vec![2, 0], vec![0, 2]], 2).unwrap(), 1.0);
        assert!((fleiss_kappa(&[vec![1, 1], vec![1, 1]], 2).unwrap() + 1.0).abs() < 1e-12);
        // Single category everywhere: defined as perfect agreement.
        assert_eq!(fleiss_kappa(&[vec![3, 0], vec![3, 0]], 3).unwrap(), 1.0);
    }

    #[test]
    fn fleiss_textbook_example() {
        // Fleiss (1971) style table: 10 items, 14 raters, 5 categories; kappa = 0.210.
        let table = vec![
            vec![0, 0, 0, 0, 14],
            vec![0, 2, 6, 4, 2],
            vec![0, 0, 3, 5, 6],
            vec![0, 3, 9, 2, 0],
            vec![2, 2, 8, 1, 1],
            vec![7, 7, 0, 0, 0],
            vec![3, 2, 6, 3, 0],
            vec![2, 5, 3, 2, 2],
            vec![6, 5, 2, 1, 0],
            vec![0, 2, 2, 3, 7],
        ];
        assert!((fleiss_kappa(&table, 14).unwrap() - 0.20993).abs() < 1e-4);
    }

    #[test]
    fn fleiss_preconditions() {
        assert!(matches!(
            fleiss_kappa(&[vec![1, 0]], 2),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(fleiss_kappa(&[], 2), Err(Error::Precondition(_))));
        assert!(matches!(
            fleiss_kappa(&[vec![1]], 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn alpha_hand_cases() {
        let a = krippendorff_alpha_nominal(&[vec!["A", "A"], vec!["A", "B"]]).unwrap();
        assert!(a.abs() < 1e-12);
        assert_eq!(
            krippendorff_alpha_nominal(&[vec!["A", "A"], vec!["B", "B"]]).unwrap(),
            1.0
        );
        assert!(matches!(
            krippendorff_alpha_nominal(&[vec!["A"], vec!["B"]]),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            krippendorff_alpha_nominal(&[vec!["A", "A"]]),
            Err(Error::DegenerateAgreement(_))
        ));
    }

    #[test]
    fn alpha_with_missing_values() {
        // Krippendorff's worked nominal example (4 coders, 12 units, missing
        // data): alpha = 0.743.
        let data: Vec<Vec<u8>> = vec![
            vec![1, 1, 1],
            vec![2, 2, 3, 2],
            vec![3, 3, 3, 3],
            vec![3, 3, 3, 3],
            vec![2, 2, 2, 2],
            vec![1, 2, 3, 4],
            vec![4, 4, 4, 4],
            vec![1, 1, 2, 1],
            vec![2, 2, 2, 2],
            vec![5, 5, 5],
            vec![1, 1],
            vec![3],
        ];
        assert!((krippendorff_alpha_nominal(&data).unwrap() - 0.743).abs() < 1e-3);
    }

    #[test]
    fn preference_agreement() {
        let recs: Vec<PreferenceRecord> = [
            ("r1", "i1", "A"),
            ("r2", "i1", "A"),
            ("r1", "i2", "B"),
            ("r2", "i2", "B"),
        ]
        .iter()
        .map(|(r, i, c)| PreferenceRecord {
            rater_id: r.to_string(),
            item_id: i.to_string(),
            choice: c.parse().unwrap(),
        })
        .collect();
        let irr = irr_from_preferences(&recs).unwrap();
        assert_eq!((irr.fleiss_kappa, irr.krippendorff_alpha), (1.0, 1.0));
        assert!(irr_from_preferences(&recs[..3]).is_err());
    }

    proptest! {
        #[test]
        fn relabeling_preserves_alpha(items in prop::collection::vec(prop::collection::vec(0u8..3, 2..5), 2..20)) {
            let relabeled: Vec<Vec<u8>> = items.iter().map(|r| r.iter().map(|v| [7u8, 3, 5][*v as usize]).collect()).collect();
            match (krippendorff_alpha_nominal(&items), krippendorff_alpha_nominal(&relabeled)) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
                (Err(_), Err(_)) => {}
                other => prop_assert!(false, "{other:?}"),
            }
        }

        #[test]
        fn perfect_agreement_is_exactly_one(labels in prop::collection::vec(0usize..3, 2..30), raters in 2usize..6) {
            prop_assume!(labels.iter().collect::<BTreeSet<_>>().len() >= 2);
            let counts: Vec<Vec<usize>> = labels.iter().map(|&l| { let mut row = vec![0; 3]; row[l] = raters; row }).collect();
            prop_assert_eq!(fleiss_kappa(&counts, raters).unwrap(), 1.0);
            let ratings: Vec<Vec<usize>> = labels.iter().map(|&l| vec![l; raters]).collect();
            prop_assert_eq!(krippendorff_alpha_nominal(&ratings).unwrap(), 1.0);
        }
    }
}
