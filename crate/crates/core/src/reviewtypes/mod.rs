//! Review categories and their distribution across network layers.
//!
//! Labels normally come from an external classifier via a label file
//! ([`load_labels`]). [`HeuristicClassifier`] is a keyword-lexicon fallback
//! for demos; it is low fidelity and should not be used for findings.

mod crosstab;
mod heuristic;
mod labels;

pub use crosstab::{layer_review_crosstab, CrosstabAccumulator, LayerCrosstab, LayerIndex, LayerRow, UnlabeledPolicy};
pub use heuristic::{classify_review_heuristic, HeuristicClassifier, Lexicon};
pub use labels::{load_labels, write_labels, LabelSet, LabelStats, LABEL_HEADER};

use serde::{Deserialize, Serialize};

/// Non-exclusive review categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ReviewLabel {
    pub update_encouragement: bool,
    /// Substantive commentary, positive or constructive.
    pub targeted: bool,
}
