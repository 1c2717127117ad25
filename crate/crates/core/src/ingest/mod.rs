//! Raw review events in, qualifying relationships out.
//!
//! [`EventReader`] streams delimited-text or line-JSON records into
//! [`InteractionEvent`]s, [`RelationshipBuilder`] folds them into one
//! directed [`Relationship`] per ordered pair, and [`RelationshipFilter`]
//! keeps the pairs with at least two events spanning at least one month.

mod aggregate;
mod edgelist;
mod reader;

pub use aggregate::{
    build_relationships, build_relationships_sharded, filter_relationships, Relationship,
    RelationshipBuilder, RelationshipFilter,
};
pub use edgelist::{read_edge_list, write_edge_list, EDGE_LIST_HEADER};
pub use reader::{parse_events, EventReader};

use serde::{Deserialize, Serialize};

use crate::reviewtypes::ReviewLabel;
use crate::time::TimestampFormat;

/// One review event as read from the log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionEvent {
    /// Value of the event-id column, or the 1-based record number when the
    /// input has none.
    pub event_id: String,
    /// The reviewer.
    pub source_id: String,
    /// The author.
    pub target_id: String,
    pub timestamp: i64,
    pub text: Option<String>,
    pub label: Option<ReviewLabel>,
    pub anonymous: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// Delimited text with a header row.
    #[default]
    Delimited,
    /// One JSON object per line.
    Jsonl,
}

/// What to do with a record that cannot be turned into an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MalformedPolicy {
    #[default]
    Skip,
    Strict,
}

/// Column (or JSON key) names for each event field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldNames {
    pub event_id: String,
    pub source: String,
    pub target: String,
    pub timestamp: String,
    pub text: String,
    pub anonymous: String,
    pub label_update: String,
    pub label_targeted: String,
}

impl Default for FieldNames {
    fn default() -> Self {
        FieldNames {
            event_id: "event_id".into(),
            source: "source".into(),
            target: "target".into(),
            timestamp: "timestamp".into(),
            text: "text".into(),
            anonymous: "anonymous".into(),
            label_update: "label_update".into(),
            label_targeted: "label_targeted".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub format: InputFormat,
    /// Field delimiter for delimited input; a single ASCII character.
    pub delimiter: char,
    pub timestamp_format: TimestampFormat,
    pub policy: MalformedPolicy,
    pub fields: FieldNames,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            format: InputFormat::Delimited,
            delimiter: ',',
            timestamp_format: TimestampFormat::Iso8601,
            policy: MalformedPolicy::Skip,
            fields: FieldNames::default(),
        }
    }
}

/// Record accounting for one pass over an input stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub total: u64,
    pub accepted: u64,
    pub anonymous_dropped: u64,
    pub malformed_dropped: u64,
}

impl IngestStats {
    pub fn merge(&mut self, other: &IngestStats) {
        self.total += other.total;
        self.accepted += other.accepted;
        self.anonymous_dropped += other.anonymous_dropped;
        self.malformed_dropped += other.malformed_dropped;
    }
}

/// Lenient boolean: `1/0`, `true/false`, `yes/no`, `t/f`, any case.
pub(crate) fn parse_bool(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" | "y" => Some(true),
        "0" | "false" | "f" | "no" | "n" => Some(false),
        _ => None,
    }
}
