//! Versioned binary model container.
//!
//! Layout (all integers little-endian `u32`):
//!
//! ```text
//! "IPODMDL1"
//! kind            string
//! meta            count, then (key, value) string pairs
//! string lists    count, then (name, count, strings...)
//! tensors         count, then (name, rows, cols, rows*cols f32 values)
//! ```
//!
//! A string is its byte length followed by UTF-8 bytes. Weights are always
//! stored as 32-bit reals whatever scalar type the model was trained in.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Matrix;

pub const MAGIC: &[u8; 8] = b"IPODMDL1";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelFile {
    pub kind: String,
    pub meta: Vec<(String, String)>,
    pub lists: Vec<(String, Vec<String>)>,
    pub tensors: Vec<(String, Matrix<f32>)>,
}

impl ModelFile {
    pub fn new(kind: impl Into<String>) -> Self {
        Self {
            kind: kind.into(),
            ..Self::default()
        }
    }

    pub fn push_meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn push_list(&mut self, name: &str, items: Vec<String>) {
        self.lists.push((name.to_string(), items));
    }

    pub fn push_tensor<T: Scalar>(&mut self, name: &str, m: &Matrix<T>) {
        self.tensors.push((name.to_string(), m.cast()));
    }

    pub fn meta(&self, key: &str) -> Result<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Model(format!("missing meta key '{key}'")))
    }

    pub fn meta_parse<V: std::str::FromStr>(&self, key: &str) -> Result<V> {
        let raw = self.meta(key)?;
        raw.parse()
            .map_err(|_| Error::Model(format!("bad value '{raw}' for meta key '{key}'")))
    }

    pub fn list(&self, name: &str) -> Result<&[String]> {
        self.lists
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::Model(format!("missing list '{name}'")))
    }

    /// Tensor `name` converted to `T`, with its shape checked.
    pub fn tensor<T: Scalar>(&self, name: &str, rows: usize, cols: usize) -> Result<Matrix<T>> {
        let m = self.tensor_any::<T>(name)?;
        if m.rows() != rows || m.cols() != cols {
            return Err(Error::Model(format!(
                "tensor '{name}' is {}x{}, expected {rows}x{cols}",
                m.rows(),
                m.cols()
            )));
        }
        Ok(m)
    }

    pub fn tensor_any<T: Scalar>(&self, name: &str) -> Result<Matrix<T>> {
        self.tensors
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, m)| m.cast())
            .ok_or_else(|| Error::Model(format!("missing tensor '{name}'")))
    }

    pub fn expect_kind(&self, kinds: &[&str]) -> Result<()> {
        if kinds.contains(&self.kind.as_str()) {
            Ok(())
        } else {
            Err(Error::Model(format!(
                "model kind is '{}', expected one of {kinds:?}",
                self.kind
            )))
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_str(&mut out, &self.kind);
        put_u32(&mut out, self.meta.len());
        for (k, v) in &self.meta {
            put_str(&mut out, k);
            put_str(&mut out, v);
        }
        put_u32(&mut out, self.lists.len());
        for (name, items) in &self.lists {
            put_str(&mut out, name);
            put_u32(&mut out, items.len());
            for s in items {
                put_str(&mut out, s);
            }
        }
        put_u32(&mut out, self.tensors.len());
        for (name, m) in &self.tensors {
            put_str(&mut out, name);
            put_u32(&mut out, m.rows());
            put_u32(&mut out, m.cols());
            for v in m.as_slice() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::Model("bad magic, not an IPODMDL1 container".into()));
        }
        let mut r = Reader {
            buf: bytes,
            pos: MAGIC.len(),
        };
        let kind = r.string()?;
        let mut meta = Vec::new();
        for _ in 0..r.u32()? {
            meta.push((r.string()?, r.string()?));
        }
        let mut lists = Vec::new();
        for _ in 0..r.u32()? {
            let name = r.string()?;
            let n = r.u32()?;
            let items = (0..n).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
            lists.push((name, items));
        }
        let mut tensors = Vec::new();
        for _ in 0..r.u32()? {
            let name = r.string()?;
            let rows = r.u32()?;
            let cols = r.u32()?;
            let len = rows
                .checked_mul(cols)
                .ok_or_else(|| Error::Model("tensor size overflow".into()))?;
            let raw = r.take(
                len.checked_mul(4)
                    .ok_or_else(|| Error::Model("tensor size overflow".into()))?,
            )?;
            let data = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            tensors.push((name, Matrix::from_vec(rows, cols, data)));
        }
        if r.pos != bytes.len() {
            return Err(Error::Model(format!(
                "{} trailing bytes after last tensor",
                bytes.len() - r.pos
            )));
        }
        Ok(Self {
            kind,
            meta,
            lists,
            tensors,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Hex SHA-256 of the serialized container.
    pub fn content_hash(&self) -> String {
        content_hash(&self.to_bytes())
    }
}

pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    let v = u32::try_from(v).expect("container field exceeds u32");
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Model(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()?;
        let b = self.take(n)?;
        String::from_utf8(b.to_vec()).map_err(|_| Error::Model("invalid UTF-8 string".into()))
    }
}
