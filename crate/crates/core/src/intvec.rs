use crate::codec::{put_u64, put_u8, Reader};
use crate::error::LoadError;

/// Fixed-width packed array of unsigned integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntVector {
    words: Vec<u64>,
    width: u32,
    len: usize,
}

/// Bits needed to store every value in `0..=max`, at least 1.
pub fn bits_for(max: u64) -> u32 {
    (64 - max.leading_zeros()).max(1)
}

impl IntVector {
    pub fn new(width: u32) -> Self {
        assert!((1..=64).contains(&width), "width {width}");
        IntVector { words: Vec::new(), width, len: 0 }
    }

    pub fn with_capacity(width: u32, capacity: usize) -> Self {
        let mut v = Self::new(width);
        v.words.reserve((capacity * width as usize).div_ceil(64));
        v
    }

    /// Packs `values` with the smallest width that fits the maximum.
    pub fn from_slice(values: &[u64]) -> Self {
        let width = bits_for(values.iter().copied().max().unwrap_or(0));
        let mut v = Self::with_capacity(width, values.len());
        for &x in values {
            v.push(x);
        }
        v
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, value: u64) {
        let w = self.width as usize;
        debug_assert!(w == 64 || value >> w == 0, "{value} exceeds width {w}");
        let bit = self.len * w;
        let end_word = (bit + w).div_ceil(64);
        if self.words.len() < end_word {
            self.words.resize(end_word, 0);
        }
        let (wi, off) = (bit / 64, bit % 64);
        self.words[wi] |= value << off;
        if off + w > 64 {
            self.words[wi + 1] |= value >> (64 - off);
        }
        self.len += 1;
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        assert!(i < self.len, "index {i} out of range ({})", self.len);
        let w = self.width as usize;
        let bit = i * w;
        let (wi, off) = (bit / 64, bit % 64);
        let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
        let mut v = self.words[wi] >> off;
        if off + w > 64 {
            v |= self.words[wi + 1] << (64 - off);
        }
        v & mask
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn serialized_len(&self) -> usize {
        1 + 8 + 8 * self.words.len()
    }

    /// Width (u8), element count (u64), then packed words.
    pub fn write_to(&self, out: &mut Vec<u8>) {
        put_u8(out, self.width as u8);
        put_u64(out, self.len as u64);
        for &w in &self.words {
            put_u64(out, w);
        }
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self, LoadError> {
        let width = r.u8()? as u32;
        if !(1..=64).contains(&width) {
            return Err(LoadError::Corrupt(format!("integer width {width}")));
        }
        let len = r.len(0)?;
        let nbits = len
            .checked_mul(width as usize)
            .ok_or_else(|| LoadError::Corrupt("integer vector too long".into()))?;
        let nwords = nbits.div_ceil(64);
        if nwords.checked_mul(8).is_none_or(|b| b > r.remaining()) {
            return Err(LoadError::Truncated);
        }
        let mut words = Vec::with_capacity(nwords);
        for _ in 0..nwords {
            words.push(r.u64()?);
        }
        let tail = nbits % 64;
        if tail != 0 && words[nwords - 1] >> tail != 0 {
            return Err(LoadError::Corrupt("bits set past integer vector end".into()));
        }
        Ok(IntVector { words, width, len })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn widths() {
        assert_eq!(bits_for(0), 1);
        assert_eq!(bits_for(1), 1);
        assert_eq!(bits_for(8), 4);
        assert_eq!(bits_for(255), 8);
        assert_eq!(bits_for(u64::MAX), 64);
    }

    #[test]
    fn empty_roundtrip() {
        let v = IntVector::new(5);
        let mut buf = Vec::new();
        v.write_to(&mut buf);
        assert_eq!(buf.len(), v.serialized_len());
        assert_eq!(IntVector::read_from(&mut Reader::new(&buf)).unwrap(), v);
    }

    proptest! {
        #[test]
        fn get_returns_pushed(width in 1u32..=64, raw in proptest::collection::vec(any::<u64>(), 0..300)) {
            let mask = if width == 64 { u64::MAX } else { (1 << width) - 1 };
            let values: Vec<u64> = raw.iter().map(|v| v & mask).collect();
            let mut v = IntVector::new(width);
            for &x in &values {
                v.push(x);
            }
            prop_assert_eq!(v.iter().collect::<Vec<_>>(), values.clone());
            let mut buf = Vec::new();
            v.write_to(&mut buf);
            let back = IntVector::read_from(&mut Reader::new(&buf)).unwrap();
            prop_assert_eq!(back, v);
        }
    }
}
