//! Plain bit vector with rank and select support.
//!
//! Conventions used throughout the crate:
//!
//! - [`BitVector::rank1`] is *inclusive*: `rank1(i)` counts the 1-bits in
//!   positions `0..=i`. Most succinct libraries count `0..i` instead; that
//!   exclusive form is available as [`BitVector::ones_before`].
//! - Select ordinals are 0-based: `select1(0)` is the position of the first
//!   1-bit.
//!
//! The directory has two levels. Every 65536-bit superblock stores an
//! absolute count (u64) and every 512-bit block a count relative to its
//! superblock (u16), about 3.3% overhead. Select keeps one block hint per
//! 4096 ones (resp. zeros) and finishes with a binary search over the blocks
//! between two hints followed by a scan of at most eight words.

use crate::codec::{put_u64, Reader};
use crate::error::{out_of_range, LoadError, Result};

const WORD_BITS: usize = 64;
const BLOCK_WORDS: usize = 8;
const BLOCK_BITS: usize = WORD_BITS * BLOCK_WORDS;
const SUPER_BITS: usize = 1 << 16;
const BLOCKS_PER_SUPER: usize = SUPER_BITS / BLOCK_BITS;
const SELECT_SAMPLE: usize = 4096;

/// Incremental construction of a [`BitVector`].
#[derive(Debug, Default, Clone)]
pub struct BitBuilder {
    words: Vec<u64>,
    len: usize,
}

impl BitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitBuilder {
            words: Vec::with_capacity(bits.div_ceil(WORD_BITS)),
            len: 0,
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(WORD_BITS) {
            self.words.push(0);
        }
        if bit {
            *self.words.last_mut().unwrap() |= 1 << (self.len % WORD_BITS);
        }
        self.len += 1;
    }

    pub fn push_repeat(&mut self, bit: bool, count: usize) {
        for _ in 0..count {
            self.push(bit);
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn finish(self) -> BitVector {
        BitVector::from_words(self.words, self.len)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
    ones: usize,
    supers: Vec<u64>,
    blocks: Vec<u16>,
    select1_hints: Vec<u32>,
    select0_hints: Vec<u32>,
}

impl BitVector {
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut b = BitBuilder::new();
        for bit in bits {
            b.push(bit);
        }
        b.finish()
    }

    /// Builds from packed little-endian words. Bits at positions `>= len` must be zero.
    fn from_words(words: Vec<u64>, len: usize) -> Self {
        debug_assert_eq!(words.len(), len.div_ceil(WORD_BITS));
        let num_blocks = words.len().div_ceil(BLOCK_WORDS);
        let mut supers = Vec::with_capacity(num_blocks.div_ceil(BLOCKS_PER_SUPER) + 1);
        let mut blocks = Vec::with_capacity(num_blocks);
        let mut select1_hints = Vec::new();
        let mut select0_hints = Vec::new();
        let mut total = 0usize;
        let mut super_base = 0usize;
        for b in 0..num_blocks {
            if b % BLOCKS_PER_SUPER == 0 {
                supers.push(total as u64);
                super_base = total;
            }
            blocks.push((total - super_base) as u16);
            let zeros_before = b * BLOCK_BITS - total;
            let block_words = &words[b * BLOCK_WORDS..((b + 1) * BLOCK_WORDS).min(words.len())];
            let block_ones: usize = block_words.iter().map(|w| w.count_ones() as usize).sum();
            let block_end = ((b + 1) * BLOCK_BITS).min(len);
            let block_zeros = block_end - b * BLOCK_BITS - block_ones;
            // A hint for ordinal k*SAMPLE points at the block holding that bit.
            while select1_hints.len() * SELECT_SAMPLE < total + block_ones {
                select1_hints.push(b as u32);
            }
            while select0_hints.len() * SELECT_SAMPLE < zeros_before + block_zeros {
                select0_hints.push(b as u32);
            }
            total += block_ones;
        }
        BitVector {
            words,
            len,
            ones: total,
            supers,
            blocks,
            select1_hints,
            select0_hints,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.ones
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1)
    }

    /// Number of 1-bits in `0..=i`.
    pub fn rank1(&self, i: usize) -> Result<usize> {
        if i >= self.len {
            return Err(out_of_range("bit position", i, self.len));
        }
        Ok(self.ones_before(i + 1))
    }

    /// Number of 0-bits in `0..=i`.
    pub fn rank0(&self, i: usize) -> Result<usize> {
        Ok(i + 1 - self.rank1(i)?)
    }

    /// Position of the 1-bit with 0-based ordinal `j`.
    pub fn select1(&self, j: usize) -> Result<usize> {
        if j >= self.ones {
            return Err(out_of_range("select1 ordinal", j, self.ones));
        }
        Ok(self.select1_unchecked(j))
    }

    /// Position of the 0-bit with 0-based ordinal `j`.
    pub fn select0(&self, j: usize) -> Result<usize> {
        if j >= self.count_zeros() {
            return Err(out_of_range("select0 ordinal", j, self.count_zeros()));
        }
        Ok(self.select0_unchecked(j))
    }

    /// Exclusive rank: number of 1-bits in `0..i`, for `i <= len`.
    #[inline]
    pub fn ones_before(&self, i: usize) -> usize {
        assert!(i <= self.len, "ones_before({i}) past length {}", self.len);
        let word = i / WORD_BITS;
        let block = word / BLOCK_WORDS;
        if block >= self.blocks.len() {
            return self.ones;
        }
        let mut r = self.ones_before_block(block);
        for w in &self.words[block * BLOCK_WORDS..word] {
            r += w.count_ones() as usize;
        }
        let rem = i % WORD_BITS;
        if rem > 0 {
            r += (self.words[word] & ((1u64 << rem) - 1)).count_ones() as usize;
        }
        r
    }

    #[inline]
    fn ones_before_block(&self, block: usize) -> usize {
        self.supers[block / BLOCKS_PER_SUPER] as usize + self.blocks[block] as usize
    }

    #[inline]
    fn zeros_before_block(&self, block: usize) -> usize {
        block * BLOCK_BITS - self.ones_before_block(block)
    }

    #[inline]
    pub(crate) fn select1_unchecked(&self, j: usize) -> usize {
        let block = self.find_block(j, &self.select1_hints, |b| self.ones_before_block(b));
        let mut rem = j - self.ones_before_block(block);
        for (wi, &w) in self.words[block * BLOCK_WORDS..].iter().enumerate() {
            let c = w.count_ones() as usize;
            if rem < c {
                return (block * BLOCK_WORDS + wi) * WORD_BITS + select_in_word(w, rem);
            }
            rem -= c;
        }
        unreachable!("select1 ordinal beyond directory")
    }

    #[inline]
    pub(crate) fn select0_unchecked(&self, j: usize) -> usize {
        let block = self.find_block(j, &self.select0_hints, |b| self.zeros_before_block(b));
        let mut rem = j - self.zeros_before_block(block);
        for (wi, &w) in self.words[block * BLOCK_WORDS..].iter().enumerate() {
            let c = w.count_zeros() as usize;
            if rem < c {
                return (block * BLOCK_WORDS + wi) * WORD_BITS + select_in_word(!w, rem);
            }
            rem -= c;
        }
        unreachable!("select0 ordinal beyond directory")
    }

    /// Last block whose prefix count is `<= j`, searching between select hints.
    #[inline]
    fn find_block(&self, j: usize, hints: &[u32], count_before: impl Fn(usize) -> usize) -> usize {
        let h = j / SELECT_SAMPLE;
        let mut lo = hints[h] as usize;
        let mut hi = hints.get(h + 1).map_or(self.blocks.len(), |&b| b as usize + 1);
        // Invariant: count_before(lo) <= j, and the answer is < hi.
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if count_before(mid) <= j {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Bits held by the rank/select directory, excluding the raw bits.
    pub fn directory_bits(&self) -> usize {
        self.supers.len() * 64
            + self.blocks.len() * 16
            + (self.select1_hints.len() + self.select0_hints.len()) * 32
    }

    pub fn serialized_len(&self) -> usize {
        8 + 8 * self.words.len()
    }

    /// Bit length as u64, then the raw words; the directory is rebuilt on load.
    pub fn write_to(&self, out: &mut Vec<u8>) {
        put_u64(out, self.len as u64);
        for &w in &self.words {
            put_u64(out, w);
        }
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> std::result::Result<Self, LoadError> {
        let len = r.len(0)?;
        let nwords = len.div_ceil(WORD_BITS);
        if nwords.checked_mul(8).is_none_or(|b| b > r.remaining()) {
            return Err(LoadError::Truncated);
        }
        let mut words = Vec::with_capacity(nwords);
        for _ in 0..nwords {
            words.push(r.u64()?);
        }
        let tail = len % WORD_BITS;
        if tail != 0 && words[nwords - 1] >> tail != 0 {
            return Err(LoadError::Corrupt("bits set past bit vector length".into()));
        }
        Ok(Self::from_words(words, len))
    }
}

/// Position of the set bit with ordinal `k` inside `w`; requires `k < popcount(w)`.
#[inline]
fn select_in_word(mut w: u64, k: usize) -> usize {
    for _ in 0..k {
        w &= w - 1;
    }
    w.trailing_zeros() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bv(bits: &[u8]) -> BitVector {
        BitVector::from_bits(bits.iter().map(|&b| b == 1))
    }

    #[test]
    fn empty() {
        let b = bv(&[]);
        assert_eq!(b.len(), 0);
        assert_eq!(b.count_ones(), 0);
        assert!(b.rank1(0).is_err());
        assert!(b.select1(0).is_err());
        assert!(b.select0(0).is_err());
        assert_eq!(b.ones_before(0), 0);
    }

    #[test]
    fn hand_examples() {
        let b = bv(&[1, 0, 1, 1, 0]);
        assert_eq!(b.count_ones(), 3);
        assert_eq!(b.rank1(2).unwrap(), 2);
        assert_eq!(b.rank0(4).unwrap(), 2);
        assert_eq!(bv(&[0, 0, 0]).rank1(2).unwrap(), 0);
        assert_eq!(bv(&[1, 1]).rank0(1).unwrap(), 0);

        let b = bv(&[0, 0, 1, 0, 1]);
        assert_eq!(b.select1(0).unwrap(), 2);
        assert_eq!(b.select1(1).unwrap(), 4);
        assert_eq!(bv(&[1, 1, 0]).select0(0).unwrap(), 2);
        assert_eq!(bv(&[0, 1, 0]).select0(1).unwrap(), 2);
    }

    #[test]
    fn range_errors() {
        let b = bv(&[1, 0, 1]);
        assert_eq!(
            b.rank1(3),
            Err(Error::OutOfRange { what: "bit position", index: 3, len: 3 })
        );
        assert!(b.rank0(7).is_err());
        assert!(b.select1(2).is_err());
        assert!(b.select0(1).is_err());
    }

    fn check_against_scan(bits: &[bool]) {
        let b = BitVector::from_bits(bits.iter().copied());
        let mut ones = 0;
        let mut one_pos = Vec::new();
        let mut zero_pos = Vec::new();
        for (i, &bit) in bits.iter().enumerate() {
            if bit {
                ones += 1;
                one_pos.push(i);
            } else {
                zero_pos.push(i);
            }
            assert_eq!(b.rank1(i).unwrap(), ones, "rank1({i})");
            assert_eq!(b.rank0(i).unwrap(), i + 1 - ones, "rank0({i})");
        }
        assert_eq!(b.count_ones(), one_pos.len());
        for (j, &p) in one_pos.iter().enumerate() {
            assert_eq!(b.select1(j).unwrap(), p, "select1({j})");
        }
        for (j, &p) in zero_pos.iter().enumerate() {
            assert_eq!(b.select0(j).unwrap(), p, "select0({j})");
        }
        assert!(b.select1(one_pos.len()).is_err());
        assert!(b.select0(zero_pos.len()).is_err());
    }

    #[test]
    fn matches_scan_on_boundary_lengths() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for len in [0, 1, 63, 64, 65, 511, 512, 513, 4097, 100_000] {
            for density in [0.01, 0.5, 0.99] {
                let bits: Vec<bool> = (0..len).map(|_| rng.gen_bool(density)).collect();
                check_against_scan(&bits);
            }
        }
    }

    #[test]
    fn crosses_superblocks() {
        // Dense enough for several select hints and more than one superblock.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bits: Vec<bool> = (0..3 * SUPER_BITS + 77).map(|_| rng.gen_bool(0.3)).collect();
        check_against_scan(&bits);
        check_against_scan(&vec![true; SUPER_BITS + 1]);
        check_against_scan(&vec![false; SUPER_BITS + 1]);
    }

    #[test]
    fn directory_overhead_is_bounded() {
        for len in [1usize, 1000, 100_000, 1_000_000] {
            let b = BitVector::from_bits((0..len).map(|i| i % 3 == 0));
            assert!(
                b.directory_bits() * 4 <= len.max(512),
                "len {len}: {} directory bits",
                b.directory_bits()
            );
        }
    }

    #[test]
    fn serialization_rejects_padding_bits() {
        let b = bv(&[1, 0, 1]);
        let mut buf = Vec::new();
        b.write_to(&mut buf);
        assert_eq!(buf.len(), b.serialized_len());
        let back = BitVector::read_from(&mut Reader::new(&buf)).unwrap();
        assert_eq!(back, b);
        buf[8] |= 0x80;
        assert!(BitVector::read_from(&mut Reader::new(&buf)).is_err());
    }

    proptest! {
        #[test]
        fn rank_select_identities(bits in proptest::collection::vec(any::<bool>(), 0..2000)) {
            let b = BitVector::from_bits(bits.iter().copied());
            if !bits.is_empty() {
                prop_assert_eq!(b.rank1(bits.len() - 1).unwrap(), b.count_ones());
            }
            for i in 0..bits.len() {
                prop_assert_eq!(b.rank0(i).unwrap() + b.rank1(i).unwrap(), i + 1);
                let r = b.rank1(i).unwrap();
                if r > 0 {
                    prop_assert!(b.select1(r - 1).unwrap() <= i);
                }
            }
            let mut prev = None;
            for j in 0..b.count_ones() {
                let p = b.select1(j).unwrap();
                prop_assert_eq!(b.rank1(p).unwrap(), j + 1);
                prop_assert!(prev.is_none_or(|q| q < p));
                prev = Some(p);
            }
            let mut prev = None;
            for j in 0..b.count_zeros() {
                let p = b.select0(j).unwrap();
                prop_assert_eq!(b.rank0(p).unwrap(), j + 1);
                prop_assert!(prev.is_none_or(|q| q < p));
                prev = Some(p);
            }
        }
    }
}
