//! Linearized phrase trie: all parsings, sorted, concatenated into one packed
//! symbol array `S` of phrase IDs (`width` bits each).
//!
//! The string IDs are the positions of the parsings in the stored order. The
//! index is a sequence of *ranges*, each covering consecutive IDs whose
//! parsings are sorted lexicographically. How a range finds the boundaries of
//! its parsings depends on the variant:
//!
//! | variant        | ranges                                            |
//! |----------------|---------------------------------------------------|
//! | `Base`         | one range; `B` has a 1 at the first symbol of each parsing |
//! | `LengthSorted` | one fixed-length range per length `1..=t`, then a tail range with `B` |
//! | `FirstOmitted` | one range without first phrases, first phrases in `C` |
//! | `Combined`     | like `LengthSorted`, first phrases moved to `C_l` where that saves space |
//!
//! `C` holds, for each phrase `x` in ID order, a 1 followed by one 0 per
//! parsing of the range that starts with `x`. The first phrase of local
//! parsing `j` is then `rank1(C, select0(C, j)) - 1`, and the parsings starting
//! with `x` occupy local positions `select1(C, x) - x .. select1(C, x + 1) - (x + 1)`.
//!
//! Dropping first phrases can leave empty remainders, which a start-marking
//! `B` cannot represent. Variable-length ranges with `C` therefore use a unary
//! `B`: a 1 per parsing followed by one 0 per stored symbol.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::bitvec::{BitBuilder, BitVector};
use crate::codec::{put_u64, put_u8, Reader};
use crate::error::{out_of_range, Error, LoadError, Result};
use crate::intvec::{bits_for, IntVector};
use crate::lz_builder::Parsing;

pub const DEFAULT_THRESHOLD: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Base,
    LengthSorted,
    FirstOmitted,
    Combined,
}

impl Variant {
    pub const ALL: [Variant; 4] =
        [Variant::Base, Variant::LengthSorted, Variant::FirstOmitted, Variant::Combined];

    pub fn tag(self) -> u8 {
        match self {
            Variant::Base => 0,
            Variant::LengthSorted => 1,
            Variant::FirstOmitted => 2,
            Variant::Combined => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Variant::ALL.get(tag as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::LengthSorted => "lensort",
            Variant::FirstOmitted => "omitfirst",
            Variant::Combined => "combined",
        }
    }

    fn sorts_by_length(self) -> bool {
        matches!(self, Variant::LengthSorted | Variant::Combined)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown variant {s:?}")))
    }
}

/// For each length `1..=hist.len()` (with `hist[l - 1]` parsings of length
/// `l`), whether storing first phrases in a `C_l` vector saves space:
/// `n_l * width > n_l + p`.
pub fn choose_combined_ranges(hist: &[usize], num_phrases: usize) -> Vec<bool> {
    let width = symbol_width(num_phrases) as usize;
    hist.iter().map(|&n| n * width > n + num_phrases).collect()
}

fn symbol_width(num_phrases: usize) -> u32 {
    bits_for(num_phrases.saturating_sub(1) as u64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Layout {
    /// Every stored parsing has this many symbols.
    Fixed(usize),
    /// One bit per stored symbol, 1 at each parsing's first symbol.
    Marked(BitVector),
    /// A 1 per parsing followed by a 0 per stored symbol of that parsing.
    Unary(BitVector),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Range {
    first_id: usize,
    count: usize,
    sym_start: usize,
    sym_len: usize,
    layout: Layout,
    /// First phrases, when omitted from `S`.
    firsts: Option<BitVector>,
}

impl Range {
    /// Symbol window of local parsing `j` in `S`.
    #[inline]
    fn window(&self, j: usize) -> (usize, usize) {
        let (a, b) = match &self.layout {
            Layout::Fixed(len) => (j * len, (j + 1) * len),
            Layout::Marked(b) => {
                let end = if j + 1 < self.count { b.select1_unchecked(j + 1) } else { b.len() };
                (b.select1_unchecked(j), end)
            }
            Layout::Unary(b) => {
                let end = if j + 1 < self.count {
                    b.select1_unchecked(j + 1) - (j + 1)
                } else {
                    b.len() - self.count
                };
                (b.select1_unchecked(j) - j, end)
            }
        };
        (self.sym_start + a, self.sym_start + b)
    }

    #[inline]
    fn first_phrase(c: &BitVector, j: usize) -> u64 {
        (c.ones_before(c.select0_unchecked(j)) - 1) as u64
    }

    fn start_bits(&self) -> usize {
        match &self.layout {
            Layout::Fixed(_) => 0,
            Layout::Marked(b) | Layout::Unary(b) => b.len(),
        }
    }
}

/// Bits of the main components, excluding word padding and headers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SizeBreakdown {
    /// Stored phrase IDs times symbol width.
    pub symbol_bits: usize,
    /// Parsing-boundary vectors (`B`).
    pub start_bits: usize,
    /// First-phrase vectors (`C`, `C_l`).
    pub first_phrase_bits: usize,
}

impl SizeBreakdown {
    pub fn payload(&self) -> usize {
        self.symbol_bits + self.start_bits + self.first_phrase_bits
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearizedIndex {
    variant: Variant,
    num_strings: usize,
    num_phrases: usize,
    threshold: usize,
    ranges: Vec<Range>,
    symbols: IntVector,
}

impl LinearizedIndex {
    /// Sorts and stores `parsings` over phrase IDs `0..num_phrases`. Returns the
    /// index and, for every input position, the ID it was assigned.
    pub fn build(
        parsings: &[Parsing],
        num_phrases: usize,
        variant: Variant,
        threshold: usize,
    ) -> Result<(Self, Vec<usize>)> {
        if threshold == 0 {
            return Err(Error::InvalidInput("length threshold must be at least 1".into()));
        }
        for (i, p) in parsings.iter().enumerate() {
            if p.is_empty() {
                return Err(Error::Construction(format!("parsing {i} is empty")));
            }
            if let Some(&id) = p.iter().find(|&&id| id as usize >= num_phrases) {
                return Err(Error::Construction(format!(
                    "parsing {i} uses phrase {id}, only {num_phrases} phrases exist"
                )));
            }
        }
        let group = |p: &Parsing| {
            if variant.sorts_by_length() {
                p.len().min(threshold + 1)
            } else {
                0
            }
        };
        let mut order: Vec<usize> = (0..parsings.len()).collect();
        order.sort_unstable_by(|&a, &b| {
            let (pa, pb) = (&parsings[a], &parsings[b]);
            group(pa).cmp(&group(pb)).then_with(|| pa.cmp(pb))
        });
        if let Some(w) = order.windows(2).find(|w| parsings[w[0]] == parsings[w[1]]) {
            return Err(Error::Construction(format!(
                "strings {} and {} have identical parsings",
                w[0], w[1]
            )));
        }
        let mut permutation = vec![0; parsings.len()];
        for (id, &orig) in order.iter().enumerate() {
            permutation[orig] = id;
        }
        let sorted: Vec<&Parsing> = order.iter().map(|&i| &parsings[i]).collect();

        // Contiguous groups as (group key, items).
        let mut groups: Vec<(usize, &[&Parsing])> = Vec::new();
        if variant.sorts_by_length() {
            let mut start = 0;
            for key in 1..=threshold + 1 {
                let end = start + sorted[start..].partition_point(|p| group(p) <= key);
                groups.push((key, &sorted[start..end]));
                start = end;
            }
        } else {
            groups.push((0, &sorted[..]));
        }
        let hist: Vec<usize> = groups.iter().take(threshold).map(|g| g.1.len()).collect();
        let omit_fixed = match variant {
            Variant::Combined => choose_combined_ranges(&hist, num_phrases),
            _ => vec![false; threshold],
        };

        let width = symbol_width(num_phrases);
        let total: usize = parsings.iter().map(Vec::len).sum();
        let mut symbols = IntVector::with_capacity(width, total);
        let mut ranges = Vec::with_capacity(groups.len());
        let mut first_id = 0;
        for (key, items) in groups {
            let fixed_len = (variant.sorts_by_length() && key <= threshold).then_some(key);
            let omit = match fixed_len {
                Some(len) => omit_fixed[len - 1],
                None => variant == Variant::FirstOmitted,
            };
            let skip = usize::from(omit);
            let sym_start = symbols.len();
            for p in items {
                for &id in &p[skip..] {
                    symbols.push(id as u64);
                }
            }
            let sym_len = symbols.len() - sym_start;
            let layout = match fixed_len {
                Some(len) => Layout::Fixed(len - skip),
                None if omit => {
                    let mut b = BitBuilder::with_capacity(items.len() + sym_len);
                    for p in items {
                        b.push(true);
                        b.push_repeat(false, p.len() - 1);
                    }
                    Layout::Unary(b.finish())
                }
                None => {
                    let mut b = BitBuilder::with_capacity(sym_len);
                    for p in items {
                        b.push(true);
                        b.push_repeat(false, p.len() - 1);
                    }
                    Layout::Marked(b.finish())
                }
            };
            let firsts = omit.then(|| {
                let mut counts = vec![0usize; num_phrases];
                for p in items {
                    counts[p[0] as usize] += 1;
                }
                let mut c = BitBuilder::with_capacity(num_phrases + items.len());
                for n in counts {
                    c.push(true);
                    c.push_repeat(false, n);
                }
                c.finish()
            });
            ranges.push(Range { first_id, count: items.len(), sym_start, sym_len, layout, firsts });
            first_id += items.len();
        }

        let index = LinearizedIndex {
            variant,
            num_strings: parsings.len(),
            num_phrases,
            threshold,
            ranges,
            symbols,
        };
        index.check_structure().map_err(|e| Error::Internal(e.to_string()))?;
        Ok((index, permutation))
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Number of stored parsings (strings).
    pub fn len(&self) -> usize {
        self.num_strings
    }

    pub fn is_empty(&self) -> bool {
        self.num_strings == 0
    }

    pub fn num_phrases(&self) -> usize {
        self.num_phrases
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// Number of phrase IDs held in `S`.
    pub fn stored_symbols(&self) -> usize {
        self.symbols.len()
    }

    /// Parsing lengths whose range stores first phrases in a `C_l` vector.
    pub fn first_omitted_lengths(&self) -> Vec<usize> {
        self.ranges
            .iter()
            .filter(|r| r.firsts.is_some())
            .filter_map(|r| match r.layout {
                Layout::Fixed(len) => Some(len + 1),
                _ => None,
            })
            .collect()
    }

    #[inline]
    fn range_of(&self, id: usize) -> &Range {
        let k = self.ranges.partition_point(|r| r.first_id + r.count <= id);
        &self.ranges[k]
    }

    /// Phrase IDs of string `id`.
    pub fn access(&self, id: usize) -> Result<Vec<u32>> {
        let mut out = Vec::new();
        self.access_into(id, &mut out)?;
        Ok(out)
    }

    pub fn access_into(&self, id: usize, out: &mut Vec<u32>) -> Result<()> {
        if id >= self.num_strings {
            return Err(out_of_range("string id", id, self.num_strings));
        }
        out.clear();
        let r = self.range_of(id);
        let j = id - r.first_id;
        if let Some(c) = &r.firsts {
            out.push(Range::first_phrase(c, j) as u32);
        }
        let (a, b) = r.window(j);
        out.extend((a..b).map(|k| self.symbols.get(k) as u32));
        Ok(())
    }

    /// ID of the string whose parsing equals `seq`.
    pub fn lookup(&self, seq: &[u32]) -> Option<usize> {
        if seq.is_empty() {
            return None;
        }
        let r = if self.variant.sorts_by_length() {
            &self.ranges[seq.len().min(self.threshold + 1) - 1]
        } else {
            &self.ranges[0]
        };
        let (lo, hi, key) = match &r.firsts {
            Some(c) => {
                let x = seq[0] as usize;
                if x >= self.num_phrases {
                    return None;
                }
                let lo = c.select1_unchecked(x) - x;
                let hi = if x + 1 < self.num_phrases {
                    c.select1_unchecked(x + 1) - (x + 1)
                } else {
                    r.count
                };
                (lo, hi, &seq[1..])
            }
            None => (0, r.count, seq),
        };
        if let Layout::Fixed(len) = r.layout {
            if key.len() != len {
                return None;
            }
        }
        let (mut lo, mut hi) = (lo, hi);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let (a, b) = r.window(mid);
            match self.compare(a, b, key) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(r.first_id + mid),
            }
        }
        None
    }

    /// Compares `S[a..b]` with `key` lexicographically.
    #[inline]
    fn compare(&self, a: usize, b: usize, key: &[u32]) -> Ordering {
        for (k, &x) in (a..b).zip(key) {
            match self.symbols.get(k).cmp(&(x as u64)) {
                Ordering::Equal => {}
                other => return other,
            }
        }
        (b - a).cmp(&key.len())
    }

    pub fn size_breakdown(&self) -> SizeBreakdown {
        SizeBreakdown {
            symbol_bits: self.symbols.len() * self.symbols.width() as usize,
            start_bits: self.ranges.iter().map(Range::start_bits).sum(),
            first_phrase_bits: self.ranges.iter().filter_map(|r| r.firsts.as_ref()).map(BitVector::len).sum(),
        }
    }

    /// Exact serialized size in bits.
    pub fn size_bits(&self) -> usize {
        self.serialized_len() * 8
    }

    pub fn serialized_len(&self) -> usize {
        let mut n = 1 + 8 * 4;
        for r in &self.ranges {
            n += 8 * 4 + 1 + 1;
            n += match &r.layout {
                Layout::Fixed(_) => 8,
                Layout::Marked(b) | Layout::Unary(b) => b.serialized_len(),
            };
            n += r.firsts.as_ref().map_or(0, BitVector::serialized_len);
        }
        n + self.symbols.serialized_len()
    }

    /// Layout: variant (u8), strings, phrases, threshold, range count (u64
    /// each); per range first id, count, symbol start, symbol count (u64
    /// each), layout tag (u8: 0 fixed, 1 marked, 2 unary) with the fixed
    /// length (u64) or the bit vector, a u8 flag and optional first-phrase
    /// vector; finally the packed symbols.
    pub fn write_to(&self, out: &mut Vec<u8>) {
        put_u8(out, self.variant.tag());
        put_u64(out, self.num_strings as u64);
        put_u64(out, self.num_phrases as u64);
        put_u64(out, self.threshold as u64);
        put_u64(out, self.ranges.len() as u64);
        for r in &self.ranges {
            put_u64(out, r.first_id as u64);
            put_u64(out, r.count as u64);
            put_u64(out, r.sym_start as u64);
            put_u64(out, r.sym_len as u64);
            match &r.layout {
                Layout::Fixed(len) => {
                    put_u8(out, 0);
                    put_u64(out, *len as u64);
                }
                Layout::Marked(b) => {
                    put_u8(out, 1);
                    b.write_to(out);
                }
                Layout::Unary(b) => {
                    put_u8(out, 2);
                    b.write_to(out);
                }
            }
            match &r.firsts {
                Some(c) => {
                    put_u8(out, 1);
                    c.write_to(out);
                }
                None => put_u8(out, 0),
            }
        }
        self.symbols.write_to(out);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_len());
        self.write_to(&mut out);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let index = Self::read_from(&mut r)?;
        r.finish()?;
        Ok(index)
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> std::result::Result<Self, LoadError> {
        let variant = Variant::from_tag(r.u8()?)
            .ok_or_else(|| LoadError::Corrupt("unknown phrase index variant".into()))?;
        let num_strings = r.len(0)?;
        let num_phrases = r.len(0)?;
        let threshold = r.len(0)?;
        let num_ranges = r.len(8 * 4 + 2)?;
        let mut ranges = Vec::with_capacity(num_ranges);
        for _ in 0..num_ranges {
            let first_id = r.len(0)?;
            let count = r.len(0)?;
            let sym_start = r.len(0)?;
            let sym_len = r.len(0)?;
            let layout = match r.u8()? {
                0 => Layout::Fixed(r.len(0)?),
                1 => Layout::Marked(BitVector::read_from(r)?),
                2 => Layout::Unary(BitVector::read_from(r)?),
                t => return Err(LoadError::Corrupt(format!("range layout tag {t}"))),
            };
            let firsts = match r.u8()? {
                0 => None,
                1 => Some(BitVector::read_from(r)?),
                t => return Err(LoadError::Corrupt(format!("first-phrase flag {t}"))),
            };
            ranges.push(Range { first_id, count, sym_start, sym_len, layout, firsts });
        }
        let symbols = IntVector::read_from(r)?;
        let index = LinearizedIndex { variant, num_strings, num_phrases, threshold, ranges, symbols };
        index.check_structure()?;
        Ok(index)
    }

    /// Verifies every structural invariant that queries rely on.
    fn check_structure(&self) -> std::result::Result<(), LoadError> {
        let bad = |m: String| Err(LoadError::Corrupt(format!("phrase index: {m}")));
        let expected_ranges = if self.variant.sorts_by_length() {
            if self.threshold == 0 || self.threshold > 1 << 16 {
                return bad(format!("threshold {}", self.threshold));
            }
            self.threshold + 1
        } else {
            1
        };
        if self.ranges.len() != expected_ranges {
            return bad(format!("{} ranges, expected {expected_ranges}", self.ranges.len()));
        }
        if self.symbols.width() != symbol_width(self.num_phrases) {
            return bad("symbol width does not match phrase count".into());
        }
        let (mut next_id, mut next_sym) = (0usize, 0usize);
        for (k, r) in self.ranges.iter().enumerate() {
            if r.first_id != next_id || r.sym_start != next_sym {
                return bad(format!("range {k} is not contiguous"));
            }
            let is_tail = k + 1 == self.ranges.len();
            let fixed_len = (self.variant.sorts_by_length() && !is_tail).then_some(k + 1);
            let omit = r.firsts.is_some();
            let omit_ok = match self.variant {
                Variant::Base | Variant::LengthSorted => !omit,
                Variant::FirstOmitted => omit,
                Variant::Combined => !omit || !is_tail,
            };
            if !omit_ok {
                return bad(format!("range {k} first-phrase vector does not match variant"));
            }
            let ok = match (&r.layout, fixed_len) {
                (Layout::Fixed(len), Some(l)) => {
                    *len + usize::from(omit) == l && r.count.checked_mul(*len) == Some(r.sym_len)
                }
                (Layout::Marked(b), None) if !omit => {
                    b.len() == r.sym_len
                        && b.count_ones() == r.count
                        && (r.count == 0 || b.get(0) == Some(true))
                }
                (Layout::Unary(b), None) if omit => {
                    Some(b.len()) == r.count.checked_add(r.sym_len)
                        && b.count_ones() == r.count
                        && (r.count == 0 || b.get(0) == Some(true))
                }
                _ => false,
            };
            if !ok {
                return bad(format!("range {k} boundaries are inconsistent"));
            }
            if let Some(c) = &r.firsts {
                if c.count_ones() != self.num_phrases
                    || c.count_zeros() != r.count
                    || (r.count > 0 && c.get(0) != Some(true))
                {
                    return bad(format!("range {k} first-phrase vector is malformed"));
                }
            }
            next_id = match r.first_id.checked_add(r.count) {
                Some(v) => v,
                None => return bad("id overflow".into()),
            };
            next_sym = match r.sym_start.checked_add(r.sym_len) {
                Some(v) => v,
                None => return bad("symbol overflow".into()),
            };
        }
        if next_id != self.num_strings || next_sym != self.symbols.len() {
            return bad("ranges do not cover all strings and symbols".into());
        }
        if self.symbols.iter().any(|x| x >= self.num_phrases as u64) {
            return bad("phrase id out of range".into());
        }
        Ok(())
    }
}
