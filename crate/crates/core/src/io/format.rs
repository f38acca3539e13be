//! The MDPB v1 container.
//!
//! All fields are little-endian:
//!
//! | offset | size | field |
//! |--------|------|-------|
//! | 0      | 4    | magic `"MDPB"` |
//! | 4      | 4    | version (`u32`, = 1) |
//! | 8      | 8    | `n` (`u64`) |
//! | 16     | 8    | `m` (`u64`) |
//! | 24     | 8    | `gamma` (`f64`) |
//! | 32     | 8    | `nnz` (`u64`) |
//! | 40     | 8·(n·m+1) | row offsets (`i64`) |
//! |        | 8·nnz | column indices (`i64`) |
//! |        | 8·nnz | transition probabilities (`f64`) |
//! |        | 8·n·m | costs (`f64`, row-major by state) |

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::sparse::SparseMatrix;

pub const MAGIC: [u8; 4] = *b"MDPB";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 40;

pub fn encode_mdp(mdp: &Mdp) -> Vec<u8> {
    let p = mdp.transitions();
    let rows = p.n_rows();
    let len = HEADER_LEN + 8 * (rows + 1 + 2 * p.nnz() + mdp.costs().len());
    let mut buf = Vec::with_capacity(len);
    buf.extend_from_slice(&MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(mdp.n_states() as u64).to_le_bytes());
    buf.extend_from_slice(&(mdp.n_actions() as u64).to_le_bytes());
    buf.extend_from_slice(&mdp.gamma().to_le_bytes());
    buf.extend_from_slice(&(p.nnz() as u64).to_le_bytes());
    for x in p.row_ptr() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for x in p.col_idx() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for x in p.vals() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for x in mdp.costs() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    buf
}

/// Parses an MDPB buffer and validates the model.
pub fn decode_mdp(bytes: &[u8]) -> Result<Mdp> {
    if bytes.len() < 4 {
        return Err(truncated(HEADER_LEN as u64, bytes.len()));
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if bytes.len() < HEADER_LEN {
        return Err(truncated(HEADER_LEN as u64, bytes.len()));
    }
    let mut cur = Cursor { bytes, pos: 4 };
    let version = u32::from_le_bytes(cur.take());
    if version != VERSION {
        return Err(Error::BadVersion(version));
    }
    let n = u64::from_le_bytes(cur.take());
    let m = u64::from_le_bytes(cur.take());
    let gamma = f64::from_le_bytes(cur.take());
    let nnz = u64::from_le_bytes(cur.take());

    let rows = n
        .checked_mul(m)
        .ok_or_else(|| Error::CorruptFile(format!("n·m overflows ({n}·{m})")))?;
    let expected = rows
        .checked_add(1)
        .and_then(|x| x.checked_add(nnz.checked_mul(2)?))
        .and_then(|x| x.checked_add(rows))
        .and_then(|x| x.checked_mul(8))
        .and_then(|x| x.checked_add(HEADER_LEN as u64))
        .ok_or_else(|| Error::CorruptFile("header counts overflow".into()))?;
    let found = bytes.len() as u64;
    if found < expected {
        return Err(truncated(expected, bytes.len()));
    }
    if found > expected {
        return Err(Error::CorruptFile(format!(
            "{} trailing bytes after payload",
            found - expected
        )));
    }
    // payload fits in memory, so every count fits in usize
    let (n, m, rows, nnz) = (n as usize, m as usize, rows as usize, nnz as usize);
    let row_ptr = cur.array(rows + 1, i64::from_le_bytes);
    let col_idx = cur.array(nnz, i64::from_le_bytes);
    let vals = cur.array(nnz, f64::from_le_bytes);
    let costs = cur.array(rows, f64::from_le_bytes);
    let p = SparseMatrix::from_csr(rows, n, row_ptr, col_idx, vals)
        .map_err(|e| Error::CorruptFile(format!("transition matrix: {e}")))?;
    Mdp::new(n, m, gamma, p, costs)
}

pub fn write_mdp(path: impl AsRef<Path>, mdp: &Mdp) -> Result<()> {
    let path = path.as_ref();
    mdp.validate().map_err(Error::Validation)?;
    fs::write(path, encode_mdp(mdp)).map_err(|e| Error::io(path, e))
}

pub fn read_mdp(path: impl AsRef<Path>) -> Result<Mdp> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_mdp(&bytes)
}

fn truncated(expected: u64, found: usize) -> Error {
    Error::TruncatedFile {
        expected,
        found: found as u64,
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let out = self.bytes[self.pos..self.pos + N].try_into().expect("length checked");
        self.pos += N;
        out
    }

    fn array<T>(&mut self, len: usize, decode: fn([u8; 8]) -> T) -> Vec<T> {
        (0..len).map(|_| decode(self.take())).collect()
    }
}
