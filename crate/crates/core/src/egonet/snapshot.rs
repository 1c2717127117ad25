//! Compact binary graph snapshot.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      8 bytes  "EGOGRAPH"
//! version    u32
//! nodes      u64, then per node: u32 byte length + UTF-8 name (sorted)
//! edges      u64
//! self_edges u64
//! source[]   u32 × edges
//! target[]   u32 × edges
//! count[]    u64 × edges
//! first_ts[] i64 × edges
//! last_ts[]  i64 × edges
//! freq[]     f64 bits × edges
//! ```

use std::io::{Read, Write};

use super::graph::{Edge, InteractionGraph, NodeId};
use crate::error::{Error, Result};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"EGOGRAPH";
pub const SNAPSHOT_VERSION: u32 = 1;

pub fn write_snapshot<W: Write>(graph: &InteractionGraph, out: W) -> Result<()> {
    let mut w = std::io::BufWriter::new(out);
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
    w.write_all(&(graph.node_count() as u64).to_le_bytes())?;
    for name in graph.node_names() {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
    }
    let edges = graph.edges();
    w.write_all(&(edges.len() as u64).to_le_bytes())?;
    w.write_all(&graph.self_edges_dropped().to_le_bytes())?;
    for e in edges {
        w.write_all(&e.source.0.to_le_bytes())?;
    }
    for e in edges {
        w.write_all(&e.target.0.to_le_bytes())?;
    }
    for e in edges {
        w.write_all(&e.event_count.to_le_bytes())?;
    }
    for e in edges {
        w.write_all(&e.first_ts.to_le_bytes())?;
    }
    for e in edges {
        w.write_all(&e.last_ts.to_le_bytes())?;
    }
    for e in edges {
        w.write_all(&e.frequency.to_bits().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

struct Input<R> {
    inner: R,
}

impl<R: Read> Input<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::Snapshot(format!("truncated: {e}")))?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.bytes()?))
    }

    fn len(&mut self, what: &str) -> Result<usize> {
        let n = self.u64()?;
        usize::try_from(n)
            .ok()
            .filter(|&n| n <= u32::MAX as usize)
            .ok_or_else(|| Error::Snapshot(format!("{what} count {n} out of range")))
    }
}

pub fn read_snapshot<R: Read>(input: R) -> Result<InteractionGraph> {
    let mut r = Input {
        inner: std::io::BufReader::new(input),
    };
    if &r.bytes::<8>()? != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("bad magic header".into()));
    }
    let version = r.u32()?;
    if version != SNAPSHOT_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let node_count = r.len("node")?;
    let mut nodes = Vec::with_capacity(node_count.min(1 << 20));
    for _ in 0..node_count {
        let len = r.u32()? as usize;
        let mut buf = vec![0u8; len];
        r.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::Snapshot(format!("truncated node name: {e}")))?;
        nodes.push(String::from_utf8(buf).map_err(|_| Error::Snapshot("node name is not UTF-8".into()))?);
    }
    let edge_count = r.len("edge")?;
    let self_edges = r.u64()?;
    let cap = edge_count.min(1 << 20);
    let mut sources = Vec::with_capacity(cap);
    for _ in 0..edge_count {
        sources.push(r.u32()?);
    }
    let mut targets = Vec::with_capacity(cap);
    for _ in 0..edge_count {
        targets.push(r.u32()?);
    }
    let mut counts = Vec::with_capacity(cap);
    for _ in 0..edge_count {
        counts.push(r.u64()?);
    }
    let mut firsts = Vec::with_capacity(cap);
    for _ in 0..edge_count {
        firsts.push(r.i64()?);
    }
    let mut lasts = Vec::with_capacity(cap);
    for _ in 0..edge_count {
        lasts.push(r.i64()?);
    }
    let mut edges = Vec::with_capacity(cap);
    for i in 0..edge_count {
        let frequency = f64::from_bits(r.u64()?);
        edges.push(Edge {
            source: NodeId(sources[i]),
            target: NodeId(targets[i]),
            event_count: counts[i],
            first_ts: firsts[i],
            last_ts: lasts[i],
            frequency,
        });
    }
    let mut trailing = [0u8; 1];
    if r.inner.read(&mut trailing)? != 0 {
        return Err(Error::Snapshot("trailing bytes after edge arrays".into()));
    }
    InteractionGraph::from_parts(nodes, edges, self_edges).map_err(|e| Error::Snapshot(e.to_string()))
}
