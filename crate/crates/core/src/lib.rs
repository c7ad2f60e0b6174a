//! Compressed static string dictionaries.
//!
//! A dictionary stores a set of distinct byte strings and maps each one to a
//! dense identifier in `0..m` (lookup) and back (access). The main structure
//! parses all strings into LZ78 phrases, reparses every string greedily
//! against the resulting phrase trie so that a query string can be parsed the
//! same way, and stores:
//!
//! - the phrases, front-coded ([`fc_store`]);
//! - every string as a sequence of phrase IDs, sorted and packed into a
//!   linearized trie ([`phrase_index`]).
//!
//! A plain front-coding dictionary over the whole strings is available for
//! comparison ([`Mode::Fc`]).
//!
//! ```
//! use lzdict::{BuildConfig, InputSet, LzDictionary};
//!
//! let input = InputSet::new(["aba", "ababa", "abc"]).unwrap();
//! let built = LzDictionary::build(&input, &BuildConfig::default()).unwrap();
//! let id = built.dict.lookup(b"ababa").unwrap();
//! assert_eq!(built.dict.access(id).unwrap(), b"ababa");
//! assert_eq!(built.dict.lookup(b"abab"), None);
//! ```

pub mod bitvec;
mod codec;
pub mod datagen;
pub mod dictionary;
pub mod error;
pub mod fc_store;
pub mod intvec;
pub mod lz_builder;
pub mod phrase_index;
pub mod selftest;

pub use bitvec::BitVector;
pub use dictionary::{BuildConfig, Built, LzDictionary, Mode, SpaceReport};
pub use error::{Error, LoadError, Result};
pub use fc_store::FcStore;
pub use lz_builder::{BuildStats, InputSet, Parsing, PhraseSet};
pub use phrase_index::{LinearizedIndex, Variant};

/// A small string set whose construction is worked through by hand in the
/// tests: twelve LZ78 phrases, nine after reparsing.
pub const FIGURE_STRINGS: [&str; 8] =
    ["aba", "ababa", "abc", "abcb", "ba", "bacbacb", "bacbacba", "bca"];
