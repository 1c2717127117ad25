use std::borrow::Cow;
use std::io::{BufRead, BufReader, Read};

use serde_json::Value;

use super::{parse_bool, IngestConfig, IngestStats, InputFormat, InteractionEvent, MalformedPolicy};
use crate::error::{Error, Result};
use crate::reviewtypes::ReviewLabel;

#[derive(Debug, Clone, Copy)]
enum Field {
    EventId,
    Source,
    Target,
    Timestamp,
    Text,
    Anonymous,
    LabelUpdate,
    LabelTargeted,
}

const ALL_FIELDS: [Field; 8] = [
    Field::EventId,
    Field::Source,
    Field::Target,
    Field::Timestamp,
    Field::Text,
    Field::Anonymous,
    Field::LabelUpdate,
    Field::LabelTargeted,
];

impl Field {
    fn name(self, config: &IngestConfig) -> &str {
        let f = &config.fields;
        match self {
            Field::EventId => &f.event_id,
            Field::Source => &f.source,
            Field::Target => &f.target,
            Field::Timestamp => &f.timestamp,
            Field::Text => &f.text,
            Field::Anonymous => &f.anonymous,
            Field::LabelUpdate => &f.label_update,
            Field::LabelTargeted => &f.label_targeted,
        }
    }

    fn required(self) -> bool {
        matches!(self, Field::Source | Field::Target | Field::Timestamp)
    }
}

enum Outcome {
    Accepted(InteractionEvent),
    Anonymous,
    Malformed(String),
}

enum Backend<R: Read> {
    Delimited {
        reader: csv::Reader<R>,
        record: csv::StringRecord,
        columns: [Option<usize>; 8],
    },
    Jsonl {
        lines: BufReader<R>,
        buf: String,
    },
    Exhausted,
}

/// Streaming event parser. Yields accepted events; anonymous and (under the
/// skip policy) malformed records are counted in [`EventReader::stats`].
pub struct EventReader<R: Read> {
    backend: Backend<R>,
    config: IngestConfig,
    stats: IngestStats,
}

impl<R: Read> EventReader<R> {
    pub fn new(input: R, config: &IngestConfig) -> Result<Self> {
        let backend = match config.format {
            InputFormat::Jsonl => Backend::Jsonl {
                lines: BufReader::with_capacity(1 << 16, input),
                buf: String::new(),
            },
            InputFormat::Delimited => {
                if !config.delimiter.is_ascii() {
                    return Err(Error::Config(format!(
                        "delimiter {:?} is not a single ASCII character",
                        config.delimiter
                    )));
                }
                let mut reader = csv::ReaderBuilder::new()
                    .delimiter(config.delimiter as u8)
                    .has_headers(true)
                    .flexible(true)
                    .from_reader(input);
                let headers = reader.headers()?.clone();
                if headers.is_empty() {
                    Backend::Exhausted
                } else {
                    let mut columns = [None; 8];
                    for (slot, field) in columns.iter_mut().zip(ALL_FIELDS) {
                        let name = field.name(config);
                        *slot = headers.iter().position(|h| h.trim() == name);
                        if slot.is_none() && field.required() {
                            return Err(Error::Data(format!(
                                "input header lacks required column `{name}`"
                            )));
                        }
                    }
                    Backend::Delimited {
                        reader,
                        record: csv::StringRecord::new(),
                        columns,
                    }
                }
            }
        };
        Ok(EventReader {
            backend,
            config: config.clone(),
            stats: IngestStats::default(),
        })
    }

    pub fn stats(&self) -> IngestStats {
        self.stats
    }

    /// Pulls the next raw record and classifies it. `None` at end of input.
    fn next_outcome(&mut self) -> Option<Result<Outcome>> {
        let ordinal = self.stats.total + 1;
        let config = &self.config;
        let outcome = match &mut self.backend {
            Backend::Exhausted => return None,
            Backend::Delimited {
                reader,
                record,
                columns,
            } => match reader.read_record(record) {
                Ok(false) => return None,
                Ok(true) => classify(ordinal, config, |field| {
                    let idx = columns[field as usize];
                    Ok(idx.and_then(|i| record.get(i)).map(Cow::Borrowed))
                }),
                Err(e) => match e.kind() {
                    csv::ErrorKind::Io(_) => return Some(Err(e.into())),
                    _ => Outcome::Malformed(e.to_string()),
                },
            },
            Backend::Jsonl { lines, buf } => loop {
                buf.clear();
                match lines.read_line(buf) {
                    Ok(0) => return None,
                    Ok(_) if buf.trim().is_empty() => continue,
                    Ok(_) => break classify_json(ordinal, config, buf),
                    Err(e) if e.kind() == std::io::ErrorKind::InvalidData => {
                        break Outcome::Malformed("invalid UTF-8".into())
                    }
                    Err(e) => return Some(Err(e.into())),
                }
            },
        };
        self.stats.total += 1;
        Some(Ok(outcome))
    }
}

impl<R: Read> Iterator for EventReader<R> {
    type Item = Result<InteractionEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let outcome = match self.next_outcome()? {
                Ok(o) => o,
                Err(e) => {
                    self.backend = Backend::Exhausted;
                    return Some(Err(e));
                }
            };
            match outcome {
                Outcome::Accepted(event) => {
                    self.stats.accepted += 1;
                    return Some(Ok(event));
                }
                Outcome::Anonymous => self.stats.anonymous_dropped += 1,
                Outcome::Malformed(reason) => {
                    self.stats.malformed_dropped += 1;
                    if self.config.policy == MalformedPolicy::Strict {
                        self.backend = Backend::Exhausted;
                        return Some(Err(Error::MalformedRecord {
                            record: self.stats.total,
                            reason,
                        }));
                    }
                }
            }
        }
    }
}

/// Reads a whole stream into memory.
pub fn parse_events<R: Read>(
    input: R,
    config: &IngestConfig,
) -> Result<(Vec<InteractionEvent>, IngestStats)> {
    let mut reader = EventReader::new(input, config)?;
    let events = reader.by_ref().collect::<Result<Vec<_>>>()?;
    Ok((events, reader.stats()))
}

fn classify_json(ordinal: u64, config: &IngestConfig, line: &str) -> Outcome {
    let value: Value = match serde_json::from_str(line) {
        Ok(v) => v,
        Err(e) => return Outcome::Malformed(format!("invalid JSON: {e}")),
    };
    let Value::Object(map) = value else {
        return Outcome::Malformed("JSON record is not an object".into());
    };
    classify(ordinal, config, |field| match map.get(field.name(config)) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(Cow::Borrowed(s.as_str()))),
        Some(Value::Number(n)) => Ok(Some(Cow::Owned(n.to_string()))),
        Some(Value::Bool(b)) => Ok(Some(Cow::Borrowed(if *b { "true" } else { "false" }))),
        Some(_) => Err(format!("field `{}` is not a scalar", field.name(config))),
    })
}

fn classify<'a, F>(ordinal: u64, config: &IngestConfig, get: F) -> Outcome
where
    F: Fn(Field) -> std::result::Result<Option<Cow<'a, str>>, String>,
{
    match try_classify(ordinal, config, get) {
        Ok(outcome) => outcome,
        Err(reason) => Outcome::Malformed(reason),
    }
}

fn try_classify<'a, F>(
    ordinal: u64,
    config: &IngestConfig,
    get: F,
) -> std::result::Result<Outcome, String>
where
    F: Fn(Field) -> std::result::Result<Option<Cow<'a, str>>, String>,
{
    let present = |field: Field| -> std::result::Result<Option<Cow<'a, str>>, String> {
        Ok(get(field)?.filter(|v| !v.trim().is_empty()))
    };

    let anonymous = match present(Field::Anonymous)? {
        None => false,
        Some(raw) => parse_bool(&raw).ok_or_else(|| format!("bad anonymous flag {raw:?}"))?,
    };
    if anonymous {
        return Ok(Outcome::Anonymous);
    }

    let source = present(Field::Source)?.ok_or("missing source")?;
    let target = present(Field::Target)?.ok_or("missing target")?;
    let raw_ts = present(Field::Timestamp)?.ok_or("missing timestamp")?;
    let timestamp = config
        .timestamp_format
        .parse(&raw_ts)
        .ok_or_else(|| format!("unparseable timestamp {raw_ts:?}"))?;

    let flag = |field: Field| -> std::result::Result<Option<bool>, String> {
        match present(field)? {
            None => Ok(None),
            Some(raw) => parse_bool(&raw)
                .map(Some)
                .ok_or_else(|| format!("bad label flag {raw:?}")),
        }
    };
    let update = flag(Field::LabelUpdate)?;
    let targeted = flag(Field::LabelTargeted)?;
    let label = (update.is_some() || targeted.is_some()).then(|| ReviewLabel {
        update_encouragement: update.unwrap_or(false),
        targeted: targeted.unwrap_or(false),
    });

    let event_id = match present(Field::EventId)? {
        Some(id) => id.trim().to_string(),
        None => ordinal.to_string(),
    };

    Ok(Outcome::Accepted(InteractionEvent {
        event_id,
        source_id: source.trim().to_string(),
        target_id: target.trim().to_string(),
        timestamp,
        text: get(Field::Text)?.filter(|t| !t.is_empty()).map(Cow::into_owned),
        label,
        anonymous: false,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::TimestampFormat;

    fn csv(input: &str) -> (Vec<InteractionEvent>, IngestStats) {
        parse_events(input.as_bytes(), &IngestConfig::default()).unwrap()
    }

    #[test]
    fn empty_input_has_zero_counts() {
        let (events, stats) = csv("");
        assert!(events.is_empty());
        assert_eq!(stats, IngestStats::default());

        let cfg = IngestConfig {
            format: InputFormat::Jsonl,
            ..Default::default()
        };
        let (events, stats) = parse_events(&b""[..], &cfg).unwrap();
        assert!(events.is_empty());
        assert_eq!(stats, IngestStats::default());
    }

    #[test]
    fn anonymous_record_is_dropped() {
        let (events, stats) = csv("source,target,timestamp,anonymous\n,b,2020-01-01,true\na,b,2020-01-02,false\n");
        assert_eq!(events.len(), 1);
        assert_eq!(stats.anonymous_dropped, 1);
        assert_eq!(stats.total, 2);
    }

    #[test]
    fn missing_timestamp_is_malformed() {
        let (events, stats) = csv(
            "source,target,timestamp\na,b,2020-01-01\na,b,2020-01-02\nb,a,2020-01-03\na,c,\n",
        );
        assert_eq!(events.len(), 3);
        assert_eq!(stats.malformed_dropped, 1);
        assert_eq!(stats.accepted, 3);
    }

    #[test]
    fn short_row_and_bad_timestamp_are_malformed() {
        let (events, stats) = csv("source,target,timestamp\na,b\na,b,not-a-date\n");
        assert!(events.is_empty());
        assert_eq!(stats.malformed_dropped, 2);
    }

    #[test]
    fn strict_policy_fails_hard() {
        let cfg = IngestConfig {
            policy: MalformedPolicy::Strict,
            ..Default::default()
        };
        let err = parse_events(&b"source,target,timestamp\na,b,2020-01-01\na,,2020-01-01\n"[..], &cfg)
            .unwrap_err();
        assert!(matches!(err, Error::MalformedRecord { record: 2, .. }), "{err}");
    }

    #[test]
    fn missing_required_column_is_data_error() {
        let err = parse_events(&b"source,timestamp\na,2020-01-01\n"[..], &IngestConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn inline_labels_event_ids_and_text() {
        let (events, _) = csv(
            "event_id,source,target,timestamp,text,label_update,label_targeted\n\
             e1,a,b,2020-01-01,\"Please, update soon\",1,0\n\
             ,a,b,2020-01-02,,,\n",
        );
        assert_eq!(events[0].event_id, "e1");
        assert_eq!(events[0].text.as_deref(), Some("Please, update soon"));
        assert_eq!(
            events[0].label,
            Some(ReviewLabel {
                update_encouragement: true,
                targeted: false
            })
        );
        assert_eq!(events[1].event_id, "2");
        assert_eq!(events[1].label, None);
        assert_eq!(events[1].text, None);
    }

    #[test]
    fn jsonl_with_unix_timestamps() {
        let cfg = IngestConfig {
            format: InputFormat::Jsonl,
            timestamp_format: TimestampFormat::Unix,
            ..Default::default()
        };
        let input = "{\"source\":\"a\",\"target\":7,\"timestamp\":100}\n\n\
                     {\"source\":null,\"target\":\"b\",\"timestamp\":5,\"anonymous\":true}\n\
                     not json\n\
                     [1,2]\n";
        let (events, stats) = parse_events(input.as_bytes(), &cfg).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].target_id, "7");
        assert_eq!(events[0].timestamp, 100);
        assert_eq!(stats.total, 4);
        assert_eq!(stats.anonymous_dropped, 1);
        assert_eq!(stats.malformed_dropped, 2);
    }

    #[test]
    fn custom_delimiter_and_field_names() {
        let mut cfg = IngestConfig {
            delimiter: '\t',
            ..Default::default()
        };
        cfg.fields.source = "reviewer".into();
        cfg.fields.target = "author".into();
        let (events, _) =
            parse_events(&b"reviewer\tauthor\ttimestamp\nx\ty\t2021-05-01T10:00:00Z\n"[..], &cfg).unwrap();
        assert_eq!(events[0].source_id, "x");
        assert_eq!(events[0].target_id, "y");
    }
}
