//! Summary evaluation: lexical and embedding overlap, token counts, blinded
//! A/B review sheets, win rates and inter-rater agreement.

pub mod embed_score;
pub mod irr;
pub mod report;
pub mod review;
pub mod rouge;
pub mod tokens;
pub mod winrate;

pub use embed_score::embed_score;
pub use irr::{fleiss_kappa, irr_from_preferences, krippendorff_alpha_nominal, IrrResult};
pub use report::{evaluate_pairs, EvalItem, EvalReport};
pub use review::{make_review_sheet, KeyRow, ReviewSheet, SheetRow};
pub use rouge::{rouge_l, rouge_n, RougeScore};
pub use tokens::{token_report, TokenReport};
pub use winrate::{win_rate, Choice, PreferenceRecord, WinRateRow, WinRateTable};
