//! Restartable enumeration state.
//!
//! Layout, one item per line:
//!
//! ```text
//! unbalanced-checkpoint v1
//! n=5 generation=3 visited=120 frontier=40 lp_calls=2210 elapsed_ms=31
//! visited
//! <hex key>...
//! frontier
//! <hex key>...
//! digest=<16 hex digits>
//! ```
//!
//! The digest is the first 8 bytes of SHA-256 over every preceding byte,
//! read as a big-endian `u64`.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::ChamberKey;
use crate::error::{Error, Result};

const MAGIC: &str = "unbalanced-checkpoint v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub n: usize,
    pub generation: u64,
    /// Sorted.
    pub visited: Vec<ChamberKey>,
    /// Sorted; a subset of `visited`.
    pub frontier: Vec<ChamberKey>,
    pub lp_calls: u64,
    pub elapsed_ms: u64,
}

fn digest(bytes: &[u8]) -> u64 {
    let hash = Sha256::digest(bytes);
    u64::from_be_bytes(hash[..8].try_into().expect("sha-256 is 32 bytes"))
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::Integrity(msg.into())
}

impl Checkpoint {
    pub fn encode(&self) -> String {
        let mut body = format!(
            "{MAGIC}\nn={} generation={} visited={} frontier={} lp_calls={} elapsed_ms={}\nvisited\n",
            self.n,
            self.generation,
            self.visited.len(),
            self.frontier.len(),
            self.lp_calls,
            self.elapsed_ms
        );
        for k in &self.visited {
            body.push_str(&k.to_hex());
            body.push('\n');
        }
        body.push_str("frontier\n");
        for k in &self.frontier {
            body.push_str(&k.to_hex());
            body.push('\n');
        }
        let d = digest(body.as_bytes());
        body.push_str(&format!("digest={d:016x}\n"));
        body
    }

    pub fn decode(text: &str) -> Result<Self> {
        let trimmed = text.strip_suffix('\n').ok_or_else(|| corrupt("truncated checkpoint"))?;
        let split = trimmed.rfind('\n').ok_or_else(|| corrupt("missing digest line"))?;
        let (body, tail) = (&text[..split + 1], &trimmed[split + 1..]);
        let stored = tail
            .strip_prefix("digest=")
            .and_then(|h| u64::from_str_radix(h, 16).ok())
            .ok_or_else(|| corrupt("missing digest line"))?;
        if digest(body.as_bytes()) != stored {
            return Err(corrupt("digest mismatch"));
        }

        let mut lines = body.lines();
        if lines.next() != Some(MAGIC) {
            return Err(corrupt("bad magic line"));
        }
        let header = lines.next().ok_or_else(|| corrupt("missing header"))?;
        let field = |name: &str| -> Result<u64> {
            header
                .split_whitespace()
                .find_map(|kv| kv.strip_prefix(name)?.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| corrupt(format!("header lacks `{name}`")))
        };
        let n = field("n")? as usize;
        let generation = field("generation")?;
        let visited_len = field("visited")? as usize;
        let frontier_len = field("frontier")? as usize;
        let lp_calls = field("lp_calls")?;
        let elapsed_ms = field("elapsed_ms")?;

        if lines.next() != Some("visited") {
            return Err(corrupt("missing visited section"));
        }
        let mut visited = Vec::with_capacity(visited_len);
        let mut frontier = Vec::with_capacity(frontier_len);
        let mut in_frontier = false;
        for line in lines {
            if line == "frontier" && !in_frontier {
                in_frontier = true;
                continue;
            }
            let key = ChamberKey::from_hex(line).map_err(|_| corrupt(format!("bad key `{line}`")))?;
            if in_frontier {
                frontier.push(key);
            } else {
                visited.push(key);
            }
        }
        if !in_frontier || visited.len() != visited_len || frontier.len() != frontier_len {
            return Err(corrupt("section lengths disagree with header"));
        }
        let sorted = |v: &[ChamberKey]| v.windows(2).all(|w| w[0] < w[1]);
        if !sorted(&visited) || !sorted(&frontier) {
            return Err(corrupt("keys are not strictly sorted"));
        }
        if frontier.iter().any(|k| visited.binary_search(k).is_err()) {
            return Err(corrupt("frontier is not contained in visited"));
        }
        Ok(Checkpoint { n, generation, visited, frontier, lp_calls, elapsed_ms })
    }

    /// Writes through a temporary file and a rename.
    pub fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.encode())?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Checkpoint::decode(&fs::read_to_string(path)?)
    }
}
