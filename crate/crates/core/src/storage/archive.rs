//! Single-file graph archive.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "HGRA"
//! 4       2     format version, u16 LE (currently 1)
//! 6       2     reserved, zero
//! 8       8     payload length in bytes, u64 LE
//! 16      32    SHA-256 of the payload
//! 48      ..    payload: metadata followed by the canonical graph encoding
//! ```
//!
//! Metadata is `embedder keywords chat config_hash` as length-prefixed
//! strings followed by `created_unix` as `u64` LE. The graph encoding is
//! documented in [`super::codec`].

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::graph::PassageGraph;

pub const MAGIC: &[u8; 4] = b"HGRA";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 48;

/// Provenance recorded alongside the graph. Not part of the fingerprint.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildMetadata {
    pub embedder: String,
    pub keywords: String,
    pub chat: String,
    pub config_hash: String,
    pub created_unix: u64,
}

impl BuildMetadata {
    /// Current time, or `SOURCE_DATE_EPOCH` when set for reproducible output.
    pub fn now_unix() -> u64 {
        if let Some(epoch) = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.trim().parse().ok())
        {
            return epoch;
        }
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphArchive {
    pub version: u16,
    pub metadata: BuildMetadata,
    pub graph: PassageGraph,
}

pub fn encode(graph: &PassageGraph, metadata: &BuildMetadata) -> Vec<u8> {
    let mut w = Writer::default();
    w.str(&metadata.embedder);
    w.str(&metadata.keywords);
    w.str(&metadata.chat);
    w.str(&metadata.config_hash);
    w.u64(metadata.created_unix);
    w.graph(graph);
    let payload = w.into_inner();

    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&Sha256::digest(&payload));
    out.extend_from_slice(&payload);
    out
}

pub fn decode(bytes: &[u8]) -> Result<GraphArchive> {
    if bytes.len() < 8 || &bytes[0..4] != MAGIC {
        return Err(Error::Format("not a graph archive (bad magic)".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Checksum {
            expected: "complete header".into(),
            actual: format!("{} byte file", bytes.len()),
        });
    }
    if bytes[6..8] != [0, 0] {
        return Err(Error::Format("reserved header bytes are not zero".into()));
    }
    let declared_len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let stored = &bytes[16..48];
    let payload = &bytes[HEADER_LEN..];
    let computed = Sha256::digest(payload);
    if computed.as_slice() != stored || payload.len() as u64 != declared_len {
        return Err(Error::Checksum {
            expected: hex::encode(stored),
            actual: hex::encode(computed),
        });
    }

    let mut r = Reader::new(payload);
    let metadata = BuildMetadata {
        embedder: r.string()?,
        keywords: r.string()?,
        chat: r.string()?,
        config_hash: r.string()?,
        created_unix: r.u64()?,
    };
    let graph = r.graph()?;
    if !r.is_exhausted() {
        return Err(Error::Format("trailing bytes after graph".into()));
    }
    Ok(GraphArchive {
        version,
        metadata,
        graph,
    })
}

/// Writes the archive atomically: a sibling temp file is written, synced and
/// renamed over `path`.
pub fn save(graph: &PassageGraph, metadata: &BuildMetadata, path: &Path) -> Result<()> {
    let bytes = encode(graph, metadata);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(Error::from)
}

pub fn load(path: &Path) -> Result<GraphArchive> {
    decode(&fs::read(path)?)
}

/// Graph only, for callers that do not need the metadata.
pub fn load_graph(path: &Path) -> Result<PassageGraph> {
    load(path).map(|a| a.graph)
}
