//! Pairwise preference win rates.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::review::KeyRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Choice {
    A,
    B,
    Tie,
}

impl Choice {
    pub fn as_str(self) -> &'static str {
        match self {
            Choice::A => "A",
            Choice::B => "B",
            Choice::Tie => "AB",
        }
    }
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Choice {
    type Err = Error;

    /// Accepts `A`, `B`, and for a tie `AB`, `A/B` or `TIE` (any case).
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Choice::A),
            "B" => Ok(Choice::B),
            "AB" | "A/B" | "TIE" => Ok(Choice::Tie),
            other => Err(Error::Precondition(format!("unknown preference {other:?}"))),
        }
    }
}

impl Serialize for Choice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Choice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceRecord {
    pub rater_id: String,
    pub item_id: String,
    pub choice: Choice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinRateRow {
    pub rater_id: String,
    /// Wins per system, in [`WinRateTable::systems`] order.
    pub preferred: [usize; 2],
    pub ties: usize,
    /// `None` when every judgement was a tie.
    pub win_rate: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinRateTable {
    pub systems: [String; 2],
    pub raters: Vec<WinRateRow>,
    pub total_preferred: [usize; 2],
    pub total_ties: usize,
    /// Mean of the per-rater win rates (raters with only ties skipped).
    pub win_rate: Option<[f64; 2]>,
    /// Wins over all non-tie judgements, pooled across raters.
    pub pooled_win_rate: Option<[f64; 2]>,
}

fn rates(preferred: [usize; 2]) -> Option<[f64; 2]> {
    let decided = preferred[0] + preferred[1];
    (decided > 0).then(|| {
        let d = decided as f64;
        [preferred[0] as f64 / d, preferred[1] as f64 / d]
    })
}

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Counts wins per rater after mapping A/B labels back through `key`.
/// Systems are ordered as they first appear in the key. Raters keep the order
/// of their first record.
pub fn win_rate(records: &[PreferenceRecord], key: &[KeyRow]) -> Result<WinRateTable> {
    let mut systems: Vec<&str> = Vec::new();
    for k in key {
        for s in [k.a_system.as_str(), k.b_system.as_str()] {
            if !systems.contains(&s) {
                systems.push(s);
            }
        }
    }
    if systems.len() != 2 {
        return Err(Error::Precondition(format!(
            "key must name exactly two systems, found {systems:?}"
        )));
    }
    let lookup: HashMap<&str, &KeyRow> = key.iter().map(|k| (k.item_id.as_str(), k)).collect();
    let slot = |name: &str| usize::from(name != systems[0]);

    let mut order: Vec<&str> = Vec::new();
    let mut tallies: HashMap<&str, ([usize; 2], usize)> = HashMap::new();
    for rec in records {
        let k = lookup
            .get(rec.item_id.as_str())
            .ok_or_else(|| Error::Key(rec.item_id.clone()))?;
        let entry = tallies.entry(rec.rater_id.as_str()).or_insert_with(|| {
            order.push(rec.rater_id.as_str());
            ([0, 0], 0)
        });
        match rec.choice {
            Choice::A => entry.0[slot(&k.a_system)] += 1,
            Choice::B => entry.0[slot(&k.b_system)] += 1,
            Choice::Tie => entry.1 += 1,
        }
    }

    let raters: Vec<WinRateRow> = order
        .iter()
        .map(|r| {
            let (preferred, ties) = tallies[r];
            WinRateRow {
                rater_id: r.to_string(),
                preferred,
                ties,
                win_rate: rates(preferred),
            }
        })
        .collect();
    let total_preferred = raters.iter().fold([0, 0], |acc, r| {
        [acc[0] + r.preferred[0], acc[1] + r.preferred[1]]
    });
    let defined: Vec<[f64; 2]> = raters.iter().filter_map(|r| r.win_rate).collect();
    let win_rate = (!defined.is_empty()).then(|| {
        let n = defined.len() as f64;
        [
            defined.iter().map(|w| w[0]).sum::<f64>() / n,
            defined.iter().map(|w| w[1]).sum::<f64>() / n,
        ]
    });
    Ok(WinRateTable {
        systems: [systems[0].to_string(), systems[1].to_string()],
        total_ties: raters.iter().map(|r| r.ties).sum(),
        raters,
        total_preferred,
        win_rate,
        pooled_win_rate: rates(total_preferred),
    })
}

impl WinRateTable {
    /// Plain-text table with rates rounded to two decimals.
    pub fn render(&self) -> String {
        let fmt_rate = |w: Option<[f64; 2]>| match w {
            Some([a, b]) => format!("{:>8.2} {:>8.2}", round2(a), round2(b)),
            None => format!("{:>8} {:>8}", "n/a", "n/a"),
        };
        let [x, y] = &self.systems;
        let mut out = format!(
            "{:<10} {:>8} {:>8} {:>6} {:>8} {:>8}\n",
            "rater",
            x,
            y,
            "ties",
            format!("{x}%"),
            format!("{y}%")
        );
        for r in &self.raters {
            out.push_str(&format!(
                "{:<10} {:>8} {:>8} {:>6} {}\n",
                r.rater_id,
                r.preferred[0],
                r.preferred[1],
                r.ties,
                fmt_rate(r.win_rate)
            ));
        }
        out.push_str(&format!(
            "{:<10} {:>8} {:>8} {:>6} {}\n",
            "total",
            self.total_preferred[0],
            self.total_preferred[1],
            self.total_ties,
            fmt_rate(self.win_rate)
        ));
        out
    }
}
