//! Little-endian primitives and the trailing metadata block.

use crate::error::{Error, Result};

use super::Metadata;

pub(crate) struct Writer {
    pub buf: Vec<u8>,
}

impl Writer {
    pub fn new(magic: &[u8; 4], version: u32) -> Self {
        let mut w = Self { buf: Vec::new() };
        w.buf.extend_from_slice(magic);
        w.u32(version);
        w
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64s(&mut self, vs: &[f64]) {
        self.buf.reserve(8 * vs.len());
        for v in vs {
            self.f64(*v);
        }
    }

    /// Appends the metadata block and hands back the bytes.
    pub fn finish(mut self, meta: &Metadata) -> Vec<u8> {
        let text = meta.to_text();
        self.u64(text.len() as u64);
        self.buf.extend_from_slice(text.as_bytes());
        self.buf
    }
}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    /// Checks the magic and version and positions the cursor after them.
    pub fn open(bytes: &'a [u8], magic: &[u8; 4], version: u32) -> Result<Self> {
        let mut r = Self { bytes, pos: 0 };
        let found: [u8; 4] = r.take(4)?.try_into().expect("length checked");
        if &found != magic {
            return Err(Error::BadMagic { expected: *magic, found });
        }
        let v = r.u32()?;
        if v != version {
            return Err(Error::UnsupportedVersion(v));
        }
        Ok(r)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let available = self.bytes.len() - self.pos;
        if n > available {
            return Err(Error::Truncated { needed: self.pos.saturating_add(n), available: self.bytes.len() });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("length checked")))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("length checked")))
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("length checked")))
    }

    /// Reads `count` doubles, refusing up front when the buffer is too short
    /// so a corrupt header cannot trigger a huge allocation.
    pub fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        let n = count.checked_mul(8).ok_or_else(|| Error::Malformed(format!("value count {count} overflows")))?;
        let raw = self.take(n)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8"))).collect())
    }

    /// Reads the metadata block, which must end the file exactly.
    pub fn finish(mut self) -> Result<Metadata> {
        let len = self.u64()?;
        let len = usize::try_from(len).map_err(|_| Error::Malformed(format!("metadata length {len}")))?;
        let raw = self.take(len)?;
        if self.remaining() > 0 {
            return Err(Error::TrailingBytes(self.remaining()));
        }
        let text = std::str::from_utf8(raw).map_err(|e| Error::Malformed(format!("metadata is not UTF-8: {e}")))?;
        Metadata::parse(text)
    }
}

pub(crate) fn to_usize(v: u64, what: &str) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::Malformed(format!("{what} {v} does not fit in memory")))
}
