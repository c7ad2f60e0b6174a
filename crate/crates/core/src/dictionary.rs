//! The composed string dictionary.
//!
//! In LZ mode a front-coded store holds the phrases and a
//! [`LinearizedIndex`] holds every string as a sequence of phrase IDs. In
//! baseline mode the front-coded store holds the strings themselves.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! 0   magic "LZD1"
//! 4   u16 format version
//! 6   u8  mode (0 = lzt-fc, 1 = fc)
//! 7   u8  phrase index variant (0xff in fc mode)
//! 8   3 x (u64 offset, u64 length): front-coded store, phrase index, metadata
//! 56  sections, contiguous and in that order
//! end u32 CRC-32 of every preceding byte
//! ```
//!
//! The metadata section is the original size in bytes (u64, one separator
//! per string included) followed by the string count (u64).

use std::fmt;
use std::str::FromStr;

use crate::codec::{put_u16, put_u32, put_u64, put_u8, Reader};
use crate::error::{Error, LoadError, Result};
use crate::fc_store::{FcStore, DEFAULT_BASELINE_BUCKET, DEFAULT_PHRASE_BUCKET};
use crate::lz_builder::{self, BuildStats, InputSet};
use crate::phrase_index::{LinearizedIndex, Variant, DEFAULT_THRESHOLD};

pub const MAGIC: &[u8; 4] = b"LZD1";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 8 + 3 * 16;
const NO_VARIANT: u8 = 0xff;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Reparsed LZ phrases in a front-coded store plus a linearized phrase trie.
    LztFc,
    /// Plain front coding of the whole strings.
    Fc,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::LztFc, Mode::Fc];

    fn tag(self) -> u8 {
        match self {
            Mode::LztFc => 0,
            Mode::Fc => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::LztFc => "lzt-fc",
            Mode::Fc => "fc",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown mode {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildConfig {
    pub mode: Mode,
    pub variant: Variant,
    /// Bucket size of the phrase store (LZ mode).
    pub phrase_bucket: usize,
    /// Bucket size of the string store (baseline mode).
    pub baseline_bucket: usize,
    /// Longest parsing kept in the fixed-length ranges of length-sorted variants.
    pub threshold: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            mode: Mode::LztFc,
            variant: Variant::Base,
            phrase_bucket: DEFAULT_PHRASE_BUCKET,
            baseline_bucket: DEFAULT_BASELINE_BUCKET,
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

impl BuildConfig {
    pub fn lz(variant: Variant) -> Self {
        BuildConfig { variant, ..Default::default() }
    }

    pub fn baseline() -> Self {
        BuildConfig { mode: Mode::Fc, ..Default::default() }
    }
}

/// A built dictionary together with the by-products of construction.
#[derive(Debug, Clone)]
pub struct Built {
    pub dict: LzDictionary,
    /// ID assigned to each string of the input set, in input order.
    pub permutation: Vec<usize>,
    /// Reparse statistics; `None` in baseline mode.
    pub stats: Option<BuildStats>,
}

/// Space used by the two components, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpaceReport {
    pub mode: Mode,
    /// Front-coded store (phrases, or whole strings in baseline mode).
    pub store_bits: usize,
    /// Phrase index; zero in baseline mode.
    pub index_bits: usize,
    pub original_bytes: u64,
}

impl SpaceReport {
    pub fn total_bits(&self) -> usize {
        self.store_bits + self.index_bits
    }

    fn pct(&self, bits: usize) -> f64 {
        if self.original_bytes == 0 {
            0.0
        } else {
            100.0 * bits as f64 / (self.original_bytes as f64 * 8.0)
        }
    }

    pub fn store_pct(&self) -> f64 {
        self.pct(self.store_bits)
    }

    pub fn index_pct(&self) -> f64 {
        self.pct(self.index_bits)
    }

    pub fn total_pct(&self) -> f64 {
        self.pct(self.total_bits())
    }

    /// Fraction of the total taken by the phrase index.
    pub fn index_share(&self) -> f64 {
        if self.total_bits() == 0 {
            0.0
        } else {
            self.index_bits as f64 / self.total_bits() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LzDictionary {
    mode: Mode,
    store: FcStore,
    index: Option<LinearizedIndex>,
    original_bytes: u64,
    num_strings: usize,
}

/// Per-query scratch buffers.
#[derive(Debug, Default)]
struct Scratch {
    ids: Vec<u32>,
    buf: Vec<u8>,
}

impl LzDictionary {
    pub fn build(input: &InputSet, config: &BuildConfig) -> Result<Built> {
        let original_bytes = (input.total_bytes() + input.len()) as u64;
        match config.mode {
            Mode::Fc => {
                let mut order: Vec<usize> = (0..input.len()).collect();
                let strings = input.strings();
                order.sort_unstable_by(|&a, &b| strings[a].cmp(&strings[b]));
                let sorted: Vec<&[u8]> = order.iter().map(|&i| strings[i].as_slice()).collect();
                let store = FcStore::build(&sorted, config.baseline_bucket)?;
                let mut permutation = vec![0; input.len()];
                for (rank, &orig) in order.iter().enumerate() {
                    permutation[orig] = rank;
                }
                let dict = LzDictionary {
                    mode: Mode::Fc,
                    store,
                    index: None,
                    original_bytes,
                    num_strings: input.len(),
                };
                Ok(Built { dict, permutation, stats: None })
            }
            Mode::LztFc => {
                let parse = lz_builder::build(input)?;
                let store = FcStore::build(parse.phrases.as_slice(), config.phrase_bucket)?;
                let (index, permutation) = LinearizedIndex::build(
                    &parse.parsings,
                    parse.phrases.len(),
                    config.variant,
                    config.threshold,
                )?;
                let dict = LzDictionary {
                    mode: Mode::LztFc,
                    store,
                    index: Some(index),
                    original_bytes,
                    num_strings: input.len(),
                };
                Ok(Built { dict, permutation, stats: Some(parse.stats) })
            }
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn variant(&self) -> Option<Variant> {
        self.index.as_ref().map(LinearizedIndex::variant)
    }

    pub fn len(&self) -> usize {
        self.num_strings
    }

    pub fn is_empty(&self) -> bool {
        self.num_strings == 0
    }

    pub fn original_bytes(&self) -> u64 {
        self.original_bytes
    }

    pub fn store(&self) -> &FcStore {
        &self.store
    }

    pub fn index(&self) -> Option<&LinearizedIndex> {
        self.index.as_ref()
    }

    /// The string with identifier `id`.
    pub fn access(&self, id: usize) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.access_into(id, &mut out)?;
        Ok(out)
    }

    pub fn access_into(&self, id: usize, out: &mut Vec<u8>) -> Result<()> {
        match &self.index {
            None => self.store.access_into(id, out),
            Some(index) => {
                let mut ids = Vec::new();
                index.access_into(id, &mut ids)?;
                out.clear();
                for &p in &ids {
                    self.store.append(p as usize, out);
                }
                Ok(())
            }
        }
    }

    /// Identifier of `s`, or `None` if `s` is not in the set.
    pub fn lookup(&self, s: &[u8]) -> Option<usize> {
        if s.is_empty() {
            return None;
        }
        match &self.index {
            None => self.store.find(s),
            Some(index) => {
                let mut scratch = Scratch::default();
                self.parse_into(s, &mut scratch)?;
                index.lookup(&scratch.ids)
            }
        }
    }

    /// Greedy phrase parse of `s`; `None` when some suffix starts with no phrase.
    pub fn parse(&self, s: &[u8]) -> Option<Vec<u32>> {
        let mut scratch = Scratch::default();
        self.parse_into(s, &mut scratch)?;
        Some(scratch.ids)
    }

    fn parse_into(&self, s: &[u8], scratch: &mut Scratch) -> Option<()> {
        scratch.ids.clear();
        let mut pos = 0;
        while pos < s.len() {
            let (rank, len) = self.store.longest_prefix_into(&s[pos..], &mut scratch.buf)?;
            if len == 0 {
                return None;
            }
            scratch.ids.push(rank as u32);
            pos += len;
        }
        Some(())
    }

    /// Lookup as the signed value of the classic interface: -1 for absent strings.
    pub fn lookup_signed(&self, s: &[u8]) -> i64 {
        self.lookup(s).map_or(-1, |id| id as i64)
    }

    pub fn space(&self) -> SpaceReport {
        SpaceReport {
            mode: self.mode,
            store_bits: self.store.size_bits(),
            index_bits: self.index.as_ref().map_or(0, LinearizedIndex::size_bits),
            original_bytes: self.original_bytes,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let store = self.store.to_bytes();
        let index = self.index.as_ref().map(LinearizedIndex::to_bytes).unwrap_or_default();
        let mut meta = Vec::with_capacity(16);
        put_u64(&mut meta, self.original_bytes);
        put_u64(&mut meta, self.num_strings as u64);

        let mut out = Vec::with_capacity(HEADER_LEN + store.len() + index.len() + meta.len() + 4);
        out.extend_from_slice(MAGIC);
        put_u16(&mut out, FORMAT_VERSION);
        put_u8(&mut out, self.mode.tag());
        put_u8(&mut out, self.variant().map_or(NO_VARIANT, Variant::tag));
        let mut offset = HEADER_LEN;
        for section in [&store, &index, &meta] {
            put_u64(&mut out, offset as u64);
            put_u64(&mut out, section.len() as u64);
            offset += section.len();
        }
        for section in [store, index, meta] {
            out.extend_from_slice(&section);
        }
        let crc = crc32fast::hash(&out);
        put_u32(&mut out, crc);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Ok(Self::load(bytes)?)
    }

    fn load(bytes: &[u8]) -> std::result::Result<Self, LoadError> {
        if bytes.len() < MAGIC.len() {
            return Err(if MAGIC.starts_with(bytes) { LoadError::Truncated } else { LoadError::BadMagic });
        }
        if &bytes[..4] != MAGIC {
            return Err(LoadError::BadMagic);
        }
        let mut r = Reader::new(&bytes[4..]);
        let version = r.u16()?;
        if version != FORMAT_VERSION {
            return Err(LoadError::VersionMismatch { found: version, expected: FORMAT_VERSION });
        }
        let mode_tag = r.u8()?;
        let variant_tag = r.u8()?;
        let mut sections = [(0usize, 0usize); 3];
        for s in &mut sections {
            let off = r.u64()?;
            let len = r.u64()?;
            *s = (
                usize::try_from(off).map_err(|_| LoadError::Truncated)?,
                usize::try_from(len).map_err(|_| LoadError::Truncated)?,
            );
        }
        let mut expected = HEADER_LEN;
        for &(off, len) in &sections {
            if off != expected {
                return Err(LoadError::Corrupt("section table is not contiguous".into()));
            }
            expected = off.checked_add(len).ok_or(LoadError::Truncated)?;
        }
        let payload_end = expected;
        match payload_end.checked_add(4) {
            Some(end) if end > bytes.len() => return Err(LoadError::Truncated),
            Some(end) if end < bytes.len() => {
                return Err(LoadError::Corrupt("trailing bytes after checksum".into()))
            }
            None => return Err(LoadError::Truncated),
            _ => {}
        }
        let stored = u32::from_le_bytes(bytes[payload_end..].try_into().unwrap());
        let computed = crc32fast::hash(&bytes[..payload_end]);
        if stored != computed {
            return Err(LoadError::ChecksumMismatch { stored, computed });
        }

        let mode = match mode_tag {
            0 => Mode::LztFc,
            1 => Mode::Fc,
            t => return Err(LoadError::Corrupt(format!("mode tag {t}"))),
        };
        let section = |k: usize| &bytes[sections[k].0..sections[k].0 + sections[k].1];

        let mut r = Reader::new(section(0));
        let store = FcStore::read_from(&mut r)?;
        r.finish()?;

        let mut r = Reader::new(section(2));
        let original_bytes = r.u64()?;
        let num_strings = r.len(0)?;
        r.finish()?;

        let index = match mode {
            Mode::Fc => {
                if variant_tag != NO_VARIANT || !section(1).is_empty() {
                    return Err(LoadError::Corrupt("baseline dictionary with phrase index".into()));
                }
                if store.len() != num_strings {
                    return Err(LoadError::Corrupt("string count mismatch".into()));
                }
                None
            }
            Mode::LztFc => {
                let mut r = Reader::new(section(1));
                let index = LinearizedIndex::read_from(&mut r)?;
                r.finish()?;
                if Some(index.variant()) != Variant::from_tag(variant_tag) {
                    return Err(LoadError::Corrupt("variant tag mismatch".into()));
                }
                if index.len() != num_strings || index.num_phrases() != store.len() {
                    return Err(LoadError::Corrupt("phrase index does not match phrase store".into()));
                }
                if store.len() > u32::MAX as usize + 1 {
                    return Err(LoadError::Corrupt("too many phrases".into()));
                }
                Some(index)
            }
        };
        Ok(LzDictionary { mode, store, index, original_bytes, num_strings })
    }
}

/// Sidecar with the ID of each input string: u64 count, then one u64 per entry.
pub fn permutation_to_bytes(permutation: &[usize]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 * (permutation.len() + 1));
    put_u64(&mut out, permutation.len() as u64);
    for &id in permutation {
        put_u64(&mut out, id as u64);
    }
    out
}

pub fn permutation_from_bytes(bytes: &[u8]) -> Result<Vec<usize>> {
    let mut r = Reader::new(bytes);
    let n = r.len(8)?;
    let mut seen = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let id = r.len(0)?;
        if id >= n || std::mem::replace(&mut seen[id], true) {
            return Err(LoadError::Corrupt(format!("permutation entry {id} invalid")).into());
        }
        out.push(id);
    }
    r.finish()?;
    Ok(out)
}
