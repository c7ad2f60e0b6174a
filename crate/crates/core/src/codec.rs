//! Little-endian primitives shared by all serialized sections.

use crate::error::LoadError;

pub(crate) fn put_u8(out: &mut Vec<u8>, v: u8) {
    out.push(v);
}

pub(crate) fn put_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

/// Unsigned LEB128: 7 payload bits per byte, high bit set on all but the last.
pub(crate) fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

#[cfg(test)]
pub(crate) fn varint_len(mut v: u64) -> usize {
    let mut n = 1;
    while v >= 0x80 {
        v >>= 7;
        n += 1;
    }
    n
}

/// Decodes a varint from a buffer already validated at load time.
#[inline]
pub(crate) fn get_varint(data: &[u8], pos: &mut usize) -> usize {
    let mut v = 0usize;
    let mut shift = 0;
    loop {
        let b = data[*pos];
        *pos += 1;
        v |= ((b & 0x7f) as usize) << shift;
        if b < 0x80 {
            return v;
        }
        shift += 7;
    }
}

/// Bounds-checked cursor over untrusted input.
pub(crate) struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub(crate) fn bytes(&mut self, n: usize) -> Result<&'a [u8], LoadError> {
        if n > self.remaining() {
            return Err(LoadError::Truncated);
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8, LoadError> {
        Ok(self.bytes(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16, LoadError> {
        Ok(u16::from_le_bytes(self.bytes(2)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64, LoadError> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }

    /// Reads a u64 that must fit in memory as a count; `unit` bytes per element
    /// must still be available, which rejects absurd lengths before allocating.
    pub(crate) fn len(&mut self, unit: usize) -> Result<usize, LoadError> {
        let v = self.u64()?;
        let n = usize::try_from(v).map_err(|_| LoadError::Corrupt(format!("length {v}")))?;
        if unit > 0 && n.checked_mul(unit).is_none_or(|b| b > self.remaining()) {
            return Err(LoadError::Truncated);
        }
        Ok(n)
    }

    pub(crate) fn varint(&mut self) -> Result<u64, LoadError> {
        let mut v = 0u64;
        let mut shift = 0u32;
        loop {
            let b = self.u8()?;
            if shift == 63 && b > 1 || shift > 63 {
                return Err(LoadError::Corrupt("varint overflow".into()));
            }
            v |= ((b & 0x7f) as u64) << shift;
            if b < 0x80 {
                // Reject non-minimal encodings so that bytes round-trip exactly.
                if b == 0 && shift > 0 {
                    return Err(LoadError::Corrupt("non-canonical varint".into()));
                }
                return Ok(v);
            }
            shift += 7;
        }
    }

    pub(crate) fn finish(self) -> Result<(), LoadError> {
        if self.remaining() != 0 {
            return Err(LoadError::Corrupt(format!("{} trailing bytes", self.remaining())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn varint_sizes() {
        assert_eq!(varint_len(0), 1);
        assert_eq!(varint_len(127), 1);
        assert_eq!(varint_len(128), 2);
        assert_eq!(varint_len(u64::MAX), 10);
    }

    #[test]
    fn reader_rejects_short_input() {
        let mut r = Reader::new(&[1, 2, 3]);
        assert_eq!(r.u64(), Err(LoadError::Truncated));
        let mut r = Reader::new(&[0x80]);
        assert_eq!(r.varint(), Err(LoadError::Truncated));
        let mut r = Reader::new(&[0x80, 0x00]);
        assert!(matches!(r.varint(), Err(LoadError::Corrupt(_))));
    }

    #[test]
    fn huge_length_is_rejected_before_allocation() {
        let mut buf = Vec::new();
        put_u64(&mut buf, u64::MAX / 2);
        let mut r = Reader::new(&buf);
        assert!(r.len(8).is_err());
    }

    proptest! {
        #[test]
        fn varint_roundtrip(v in any::<u64>()) {
            let mut buf = Vec::new();
            put_varint(&mut buf, v);
            prop_assert_eq!(buf.len(), varint_len(v));
            let mut pos = 0;
            if v <= usize::MAX as u64 {
                prop_assert_eq!(get_varint(&buf, &mut pos) as u64, v);
            }
            let mut r = Reader::new(&buf);
            prop_assert_eq!(r.varint().unwrap(), v);
            prop_assert!(r.finish().is_ok());
        }
    }
}
