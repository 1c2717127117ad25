//! Plain edge-list format shared by ingest output and graph export.
//!
//! ```text
//! source,target,event_count,first_ts,last_ts,contact_frequency
//! A,B,10,2020-01-01T00:00:00Z,2020-06-01T00:00:00Z,2.002632
//! ```
//!
//! The printed frequency is for humans; readers recompute it from the count
//! and timestamps so re-read values match the originals exactly.

use std::io::{Read, Write};

use super::Relationship;
use crate::error::{Error, Result};
use crate::time::{format_iso8601, parse_iso8601, MonthConvention};

pub const EDGE_LIST_HEADER: [&str; 6] = [
    "source",
    "target",
    "event_count",
    "first_ts",
    "last_ts",
    "contact_frequency",
];

pub fn write_edge_list<'a, W, I>(out: W, relationships: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Relationship>,
{
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(EDGE_LIST_HEADER)?;
    for r in relationships {
        let freq = r.contact_frequency.map(|f| format!("{f:.6}")).unwrap_or_default();
        w.write_record([
            r.source_id.as_str(),
            r.target_id.as_str(),
            &r.event_count.to_string(),
            &format_iso8601(r.first_ts),
            &format_iso8601(r.last_ts),
            &freq,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_edge_list<R: Read>(input: R, months: MonthConvention) -> Result<Vec<Relationship>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(EDGE_LIST_HEADER) {
        return Err(Error::Data(format!(
            "edge list header {:?} does not match {:?}",
            headers.iter().collect::<Vec<_>>(),
            EDGE_LIST_HEADER
        )));
    }
    let mut out = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut line = 1u64;
    while reader.read_record(&mut record)? {
        line += 1;
        let bad = |what: &str| Error::MalformedRecord {
            record: line,
            reason: format!("edge list: {what}"),
        };
        let count: u64 = record[2].parse().map_err(|_| bad("event_count"))?;
        let first = parse_iso8601(&record[3]).ok_or_else(|| bad("first_ts"))?;
        let last = parse_iso8601(&record[4]).ok_or_else(|| bad("last_ts"))?;
        if first > last || count == 0 {
            return Err(bad("inconsistent count or span"));
        }
        let rel = Relationship::new(record[0].to_string(), record[1].to_string(), count, first, last, months);
        let printed = &record[5];
        match (rel.contact_frequency, printed.is_empty()) {
            (None, true) => {}
            (Some(f), false) => {
                let p: f64 = printed.parse().map_err(|_| bad("contact_frequency"))?;
                if (p - f).abs() > 5e-7 + 1e-12 * f.abs() {
                    return Err(bad("contact_frequency disagrees with count and span"));
                }
            }
            _ => return Err(bad("contact_frequency presence disagrees with span")),
        }
        out.push(rel);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_checked() {
        let err = read_edge_list(&b"a,b\n"[..], MonthConvention::default()).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn inconsistent_frequency_rejected() {
        let input = "source,target,event_count,first_ts,last_ts,contact_frequency\n\
                     A,B,10,2020-01-01T00:00:00Z,2020-06-01T00:00:00Z,3.000000\n";
        assert!(read_edge_list(input.as_bytes(), MonthConvention::default()).is_err());
    }

    #[test]
    fn quoting_survives() {
        let m = MonthConvention::default();
        let rel = Relationship::new("a,\"x\"".into(), "b\tc".into(), 3, 0, 5_000_000, m);
        let mut buf = Vec::new();
        write_edge_list(&mut buf, [&rel]).unwrap();
        let back = read_edge_list(&buf[..], m).unwrap();
        assert_eq!(back, vec![rel]);
    }
}
