use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::ReviewLabel;
use crate::error::{Error, Result};
use crate::ingest::{parse_bool, MalformedPolicy};

pub const LABEL_HEADER: [&str; 3] = ["event_id", "update_encouragement", "targeted"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelSet {
    pub labels: HashMap<String, ReviewLabel>,
    pub stats: LabelStats,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelStats {
    pub records: u64,
    /// Records whose event id was already present; the later one wins.
    pub duplicates: u64,
    pub malformed: u64,
}

/// Reads a label file: header `event_id,update_encouragement,targeted`,
/// booleans as `0/1` or `true/false`. An empty input yields an empty map.
pub fn load_labels<R: Read>(input: R, delimiter: u8, policy: MalformedPolicy) -> Result<LabelSet> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let mut out = LabelSet::default();
    if headers.is_empty() {
        return Ok(out);
    }
    let mut idx = [0usize; 3];
    for (slot, name) in idx.iter_mut().zip(LABEL_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Data(format!("label file has no `{name}` column")))?;
    }
    for (n, record) in reader.records().enumerate() {
        let record = record?;
        out.stats.records += 1;
        let get = |i: usize| record.get(idx[i]).map(str::trim);
        let parsed = match (get(0), get(1).and_then(parse_bool), get(2).and_then(parse_bool)) {
            (Some(id), Some(u), Some(t)) if !id.is_empty() => Ok((
                id.to_string(),
                ReviewLabel {
                    update_encouragement: u,
                    targeted: t,
                },
            )),
            (Some(id), _, _) if !id.is_empty() => Err("flags must be 0/1 or true/false"),
            _ => Err("missing event id"),
        };
        match parsed {
            Ok((id, label)) => {
                if out.labels.insert(id, label).is_some() {
                    out.stats.duplicates += 1;
                }
            }
            Err(reason) => match policy {
                MalformedPolicy::Skip => out.stats.malformed += 1,
                MalformedPolicy::Strict => {
                    return Err(Error::MalformedRecord {
                        record: n as u64 + 1,
                        reason: reason.into(),
                    })
                }
            },
        }
    }
    Ok(out)
}

/// Writes labels in file order given by `rows`, flags as 0/1.
pub fn write_labels<'a, W: Write>(out: W, rows: impl IntoIterator<Item = (&'a str, ReviewLabel)>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LABEL_HEADER)?;
    for (id, l) in rows {
        w.write_record([id, bit(l.update_encouragement), bit(l.targeted)])?;
    }
    w.flush()?;
    Ok(())
}

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}
