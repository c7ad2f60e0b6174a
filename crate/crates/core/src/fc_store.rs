//! Bucketed front coding of a sorted string list.
//!
//! Strings are grouped into buckets of `k`. The first string of a bucket (its
//! header) is stored verbatim; every other string is stored as the length of
//! the common prefix with its predecessor followed by the remaining suffix.
//! All lengths are varints. Layout of one bucket in `data`:
//!
//! ```text
//! varint(len) header-bytes  { varint(lcp) varint(suffix-len) suffix-bytes }*
//! ```
//!
//! `offsets[b]` is the byte offset of bucket `b`, bit-packed at the smallest
//! width that holds the largest offset.

use std::cmp::Ordering;

use crate::codec::{get_varint, put_u64, put_varint, Reader};
use crate::error::{out_of_range, Error, LoadError, Result};
use crate::intvec::IntVector;
use crate::lz_builder::common_prefix;

/// Bucket size used for the phrase store inside the LZ dictionary.
pub const DEFAULT_PHRASE_BUCKET: usize = 16;
/// Bucket size used by the plain front-coding dictionary.
pub const DEFAULT_BASELINE_BUCKET: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FcStore {
    bucket_size: usize,
    len: usize,
    offsets: IntVector,
    data: Vec<u8>,
}

impl FcStore {
    /// `strings` must be strictly increasing.
    pub fn build<S: AsRef<[u8]>>(strings: &[S], bucket_size: usize) -> Result<Self> {
        if bucket_size == 0 {
            return Err(Error::InvalidInput("bucket size must be at least 1".into()));
        }
        let mut data = Vec::new();
        let mut offsets = Vec::with_capacity(strings.len().div_ceil(bucket_size));
        let mut prev: &[u8] = &[];
        for (i, s) in strings.iter().enumerate() {
            let s = s.as_ref();
            if i > 0 && prev >= s {
                return Err(Error::Construction(format!(
                    "strings not strictly sorted at position {i}"
                )));
            }
            if i % bucket_size == 0 {
                offsets.push(data.len() as u64);
                put_varint(&mut data, s.len() as u64);
                data.extend_from_slice(s);
            } else {
                let lcp = common_prefix(prev, s);
                put_varint(&mut data, lcp as u64);
                put_varint(&mut data, (s.len() - lcp) as u64);
                data.extend_from_slice(&s[lcp..]);
            }
            prev = s;
        }
        Ok(FcStore {
            bucket_size,
            len: strings.len(),
            offsets: IntVector::from_slice(&offsets),
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bucket_size(&self) -> usize {
        self.bucket_size
    }

    fn num_buckets(&self) -> usize {
        self.offsets.len()
    }

    #[inline]
    fn header(&self, bucket: usize) -> (&[u8], usize) {
        let mut pos = self.offsets.get(bucket) as usize;
        let len = get_varint(&self.data, &mut pos);
        (&self.data[pos..pos + len], pos + len)
    }

    /// Decodes the next entry at `pos` into `buf`, which holds its predecessor.
    /// Returns the lcp with the predecessor and the suffix slice.
    #[inline]
    fn next_entry(&self, pos: &mut usize) -> (usize, &[u8]) {
        let lcp = get_varint(&self.data, pos);
        let n = get_varint(&self.data, pos);
        let suffix = &self.data[*pos..*pos + n];
        *pos += n;
        (lcp, suffix)
    }

    fn bucket_len(&self, bucket: usize) -> usize {
        (self.len - bucket * self.bucket_size).min(self.bucket_size)
    }

    /// String with rank `i`.
    pub fn access(&self, i: usize) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.access_into(i, &mut buf)?;
        Ok(buf)
    }

    /// Like [`FcStore::access`], writing into `buf` (cleared first).
    pub fn access_into(&self, i: usize, buf: &mut Vec<u8>) -> Result<()> {
        if i >= self.len {
            return Err(out_of_range("string rank", i, self.len));
        }
        buf.clear();
        self.append(i, buf);
        Ok(())
    }

    /// Appends string `i` (which must be in range) to `out`.
    #[inline]
    pub(crate) fn append(&self, i: usize, out: &mut Vec<u8>) {
        let start = out.len();
        let bucket = i / self.bucket_size;
        let (h, mut pos) = self.header(bucket);
        out.extend_from_slice(h);
        for _ in 0..i % self.bucket_size {
            let (lcp, suffix) = self.next_entry(&mut pos);
            out.truncate(start + lcp);
            out.extend_from_slice(suffix);
        }
    }

    /// Rank of the largest stored string `<= q`.
    pub fn predecessor(&self, q: &[u8]) -> Option<usize> {
        let mut buf = Vec::new();
        self.predecessor_into(q, &mut buf)
    }

    /// Like [`FcStore::predecessor`], leaving the found string in `buf`.
    pub(crate) fn predecessor_into(&self, q: &[u8], buf: &mut Vec<u8>) -> Option<usize> {
        // Last bucket whose header is <= q.
        let nb = self.num_buckets();
        let (mut lo, mut hi) = (0, nb);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.header(mid).0 <= q {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let bucket = lo.checked_sub(1)?;
        let (h, mut pos) = self.header(bucket);
        buf.clear();
        buf.extend_from_slice(h);
        // `matched` = lcp(buf, q); buf <= q throughout.
        let mut matched = common_prefix(buf, q);
        let mut rank = bucket * self.bucket_size;
        for _ in 1..self.bucket_len(bucket) {
            let (lcp, suffix) = self.next_entry(&mut pos);
            match lcp.cmp(&matched) {
                // The next string diverges from buf where buf still agrees
                // with q, and it is larger there than buf, so larger than q.
                Ordering::Less => break,
                // Shares buf's mismatch with q: still smaller than q.
                Ordering::Greater => {
                    buf.truncate(lcp);
                    buf.extend_from_slice(suffix);
                }
                Ordering::Equal => {
                    let extra = common_prefix(suffix, &q[matched..]);
                    let next_matched = matched + extra;
                    let greater = if extra < suffix.len() {
                        next_matched < q.len() && suffix[extra] > q[next_matched]
                            || next_matched == q.len()
                    } else {
                        false
                    };
                    if greater {
                        break;
                    }
                    buf.truncate(lcp);
                    buf.extend_from_slice(suffix);
                    matched = next_matched;
                }
            }
            rank += 1;
        }
        Some(rank)
    }

    /// The longest stored string that is a prefix of `q`, as (rank, length).
    ///
    /// The first pass finds the predecessor of `q`. If it is not a prefix of
    /// `q`, every candidate is also a prefix of the predecessor, so it fits in
    /// their common prefix and the search repeats on that shorter key. On
    /// phrase sets of a greedy parse the second pass almost always succeeds.
    pub fn longest_prefix(&self, q: &[u8]) -> Option<(usize, usize)> {
        let mut buf = Vec::new();
        self.longest_prefix_into(q, &mut buf)
    }

    pub(crate) fn longest_prefix_into(&self, q: &[u8], buf: &mut Vec<u8>) -> Option<(usize, usize)> {
        let mut key = q;
        loop {
            let rank = self.predecessor_into(key, buf)?;
            let lcp = common_prefix(buf, key);
            if lcp == buf.len() {
                return Some((rank, lcp));
            }
            key = &key[..lcp];
        }
    }

    /// Rank of `q` if stored.
    pub fn find(&self, q: &[u8]) -> Option<usize> {
        let mut buf = Vec::new();
        let rank = self.predecessor_into(q, &mut buf)?;
        (buf == q).then_some(rank)
    }

    pub fn serialized_len(&self) -> usize {
        8 + 8 + self.offsets.serialized_len() + 8 + self.data.len()
    }

    pub fn size_bits(&self) -> usize {
        self.serialized_len() * 8
    }

    /// bucket size (u64), count (u64), offsets, data length (u64), data.
    pub fn write_to(&self, out: &mut Vec<u8>) {
        put_u64(out, self.bucket_size as u64);
        put_u64(out, self.len as u64);
        self.offsets.write_to(out);
        put_u64(out, self.data.len() as u64);
        out.extend_from_slice(&self.data);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_len());
        self.write_to(&mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let store = Self::read_from(&mut r)?;
        r.finish()?;
        Ok(store)
    }

    /// Reads and fully validates a store, so queries on it cannot panic.
    pub(crate) fn read_from(r: &mut Reader<'_>) -> std::result::Result<Self, LoadError> {
        let corrupt = |m: &str| LoadError::Corrupt(format!("front-coded store: {m}"));
        let bucket_size = r.len(0)?;
        if bucket_size == 0 {
            return Err(corrupt("zero bucket size"));
        }
        let len = r.len(0)?;
        let offsets = IntVector::read_from(r)?;
        if offsets.len() != len.div_ceil(bucket_size) {
            return Err(corrupt("bucket count does not match string count"));
        }
        let data_len = r.len(1)?;
        let data = r.bytes(data_len)?.to_vec();

        let mut check = Reader::new(&data);
        let mut prev: Vec<u8> = Vec::new();
        for i in 0..len {
            if i % bucket_size == 0 {
                if offsets.get(i / bucket_size) != (data_len - check.remaining()) as u64 {
                    return Err(corrupt("bucket offset mismatch"));
                }
                let n = check.varint()? as usize;
                let s = check.bytes(n)?;
                if i > 0 && prev.as_slice() >= s {
                    return Err(corrupt("headers out of order"));
                }
                prev.clear();
                prev.extend_from_slice(s);
            } else {
                let lcp = check.varint()? as usize;
                let n = check.varint()? as usize;
                let suffix = check.bytes(n)?;
                if lcp > prev.len() {
                    return Err(corrupt("shared prefix longer than predecessor"));
                }
                // Exact lcp and strict order: the suffix must start with a
                // byte larger than the predecessor's byte at that position.
                let ok = match (prev.get(lcp), suffix.first()) {
                    (Some(&p), Some(&s)) => s > p,
                    (None, Some(_)) => true,
                    (_, None) => false,
                };
                if !ok {
                    return Err(corrupt("entry out of order"));
                }
                prev.truncate(lcp);
                prev.extend_from_slice(suffix);
            }
        }
        check.finish()?;
        Ok(FcStore { bucket_size, len, offsets, data })
    }
}
