//! Blinded A/B review sheets for subject-matter experts.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One row handed to reviewers. System names never appear here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetRow {
    pub item_id: String,
    pub conversation: String,
    #[serde(rename = "summary_A")]
    pub summary_a: String,
    #[serde(rename = "summary_B")]
    pub summary_b: String,
    pub ground_truth: String,
    pub choice: String,
}

/// Which system sits behind each label of an item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyRow {
    pub item_id: String,
    #[serde(rename = "A_system")]
    pub a_system: String,
    #[serde(rename = "B_system")]
    pub b_system: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewSheet {
    pub rows: Vec<SheetRow>,
    pub key: Vec<KeyRow>,
}

impl ReviewSheet {
    /// Undoes the blinding: `(item_id, summary of systems[0], summary of systems[1])`.
    pub fn unblind(&self, systems: [&str; 2]) -> Result<Vec<(String, String, String)>> {
        let key: HashMap<&str, &KeyRow> =
            self.key.iter().map(|k| (k.item_id.as_str(), k)).collect();
        self.rows
            .iter()
            .map(|row| {
                let k = key
                    .get(row.item_id.as_str())
                    .ok_or_else(|| Error::Key(row.item_id.clone()))?;
                let (x, y) = if k.a_system == systems[0] {
                    (&row.summary_a, &row.summary_b)
                } else {
                    (&row.summary_b, &row.summary_a)
                };
                Ok((row.item_id.clone(), x.clone(), y.clone()))
            })
            .collect()
    }
}

/// Builds a review sheet where, per item, a seeded coin flip decides whether
/// `systems[0]`'s summary (first of each pair) is shown as A or as B.
pub fn make_review_sheet(
    ids: &[String],
    conversations: &[String],
    pairs: &[(String, String)],
    ground_truth: &[String],
    systems: [&str; 2],
    seed: u64,
) -> Result<ReviewSheet> {
    let n = pairs.len();
    if ids.len() != n || conversations.len() != n || ground_truth.len() != n {
        return Err(Error::Precondition(format!(
            "length mismatch: {} ids, {} conversations, {} pairs, {} references",
            ids.len(),
            conversations.len(),
            n,
            ground_truth.len()
        )));
    }
    if systems[0] == systems[1] {
        return Err(Error::Precondition(
            "the two systems need distinct names".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut key = Vec::with_capacity(n);
    for i in 0..n {
        let (x, y) = &pairs[i];
        let x_is_a: bool = rng.gen();
        let (summary_a, summary_b, a_system, b_system) = if x_is_a {
            (x, y, systems[0], systems[1])
        } else {
            (y, x, systems[1], systems[0])
        };
        rows.push(SheetRow {
            item_id: ids[i].clone(),
            conversation: conversations[i].clone(),
            summary_a: summary_a.clone(),
            summary_b: summary_b.clone(),
            ground_truth: ground_truth[i].clone(),
            choice: String::new(),
        });
        key.push(KeyRow {
            item_id: ids[i].clone(),
            a_system: a_system.to_string(),
            b_system: b_system.to_string(),
        });
    }
    Ok(ReviewSheet { rows, key })
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Precondition(format!("csv encode: {e}")))?;
    }
    w.into_inner()
        .map_err(|e| Error::Precondition(format!("csv encode: {e}")))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    crate::io::write_atomic(path, &to_csv(rows)?)
}

/// Reads CSV rows with a header line; parse errors carry the 1-based file line.
pub fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(file)
}

pub fn parse_csv<T: serde::de::DeserializeOwned>(reader: impl std::io::Read) -> Result<Vec<T>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    r.deserialize()
        .map(|rec| {
            rec.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })
        })
        .collect()
}
