//! Built-in end-to-end checks, runnable from the command line.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitvec::BitVector;
use crate::dictionary::{BuildConfig, LzDictionary};
use crate::fc_store::FcStore;
use crate::lz_builder::{self, InputSet};
use crate::phrase_index::Variant;
use crate::FIGURE_STRINGS;

/// Deliberate faults for checking that the self-test can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Orders expected parsings with a reversed comparison.
    BrokenComparison,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<(), String>) -> CheckResult {
    match outcome {
        Ok(()) => CheckResult { name, passed: true, detail: String::new() },
        Err(detail) => CheckResult { name, passed: false, detail },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn run(fault: Option<Fault>) -> Vec<CheckResult> {
    let mut results = Vec::new();
    let input = InputSet::new(FIGURE_STRINGS).expect("figure strings are valid");

    results.push(check("golden initial parse has 12 phrases", {
        let trie = lz_builder::initial_parse(&input);
        ensure(trie.phrase_count() == 12, || format!("{} phrases", trie.phrase_count()))
    }));

    results.push(check("golden reparse matches B BF C D F GIE GIF HA", {
        let parse = lz_builder::build(&input).map_err(|e| e.to_string());
        parse.and_then(|parse| {
            let mut want: Vec<Vec<u32>> =
                vec![vec![1], vec![1, 5], vec![2], vec![3], vec![5], vec![6, 8, 4], vec![6, 8, 5], vec![7, 0]];
            if fault == Some(Fault::BrokenComparison) {
                want.sort_by(|a, b| b.cmp(a));
            }
            let phrases: Vec<&[u8]> = parse.phrases.as_slice().iter().map(Vec::as_slice).collect();
            ensure(
                phrases == [&b"a"[..], b"aba", b"abc", b"abcb", b"b", b"ba", b"bacba", b"bc", b"c"],
                || "phrase set differs".into(),
            )?;
            ensure(parse.parsings == want, || format!("parsings {:?}", parse.parsings))
        })
    }));

    results.push(check("golden lookup(bcbaa) = -1 via parse H F A", {
        LzDictionary::build(&input, &BuildConfig::default())
            .map_err(|e| e.to_string())
            .and_then(|b| {
                ensure(b.dict.parse(b"bcbaa") == Some(vec![7, 5, 0]), || "parse differs".into())?;
                ensure(b.dict.lookup(b"bcbaa").is_none(), || "bcbaa found".into())?;
                ensure(b.dict.access(6).ok().as_deref() == Some(&b"bacbacba"[..]), || "access(6)".into())
            })
    }));

    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    let sets: Vec<InputSet> = (0..12)
        .map(|_| {
            let sigma = rng.gen_range(2..=8u8);
            let n = rng.gen_range(1..=64);
            let strings: Vec<Vec<u8>> = (0..n)
                .map(|_| (0..rng.gen_range(1..=24)).map(|_| b'a' + rng.gen_range(0..sigma)).collect())
                .collect();
            InputSet::new(strings).unwrap()
        })
        .collect();

    results.push(check("lookup(access(i)) = i for all variants and modes", {
        let mut outcome = Ok(());
        'outer: for input in &sets {
            for config in all_configs() {
                let built = match LzDictionary::build(input, &config) {
                    Ok(b) => b,
                    Err(e) => {
                        outcome = Err(e.to_string());
                        break 'outer;
                    }
                };
                for i in 0..built.dict.len() {
                    let s = built.dict.access(i).unwrap_or_default();
                    if built.dict.lookup(&s) != Some(i) {
                        outcome = Err(format!("{config:?}: id {i}"));
                        break 'outer;
                    }
                }
            }
        }
        outcome
    }));

    results.push(check("non-members return -1 (hash-set oracle)", {
        let mut outcome = Ok(());
        'outer: for input in &sets {
            let members: HashSet<&[u8]> = input.strings().iter().map(Vec::as_slice).collect();
            let dicts: Vec<LzDictionary> =
                all_configs().iter().map(|c| LzDictionary::build(input, c).unwrap().dict).collect();
            for _ in 0..200 {
                let q: Vec<u8> = (0..rng.gen_range(0..26)).map(|_| b'a' + rng.gen_range(0..9)).collect();
                let expect = members.contains(q.as_slice());
                for d in &dicts {
                    if d.lookup(&q).is_some() != expect {
                        outcome = Err(format!("query {:?}", String::from_utf8_lossy(&q)));
                        break 'outer;
                    }
                }
            }
        }
        outcome
    }));

    results.push(check("serialization round trip is byte-identical", {
        let mut outcome = Ok(());
        for config in all_configs() {
            let d = LzDictionary::build(&sets[0], &config).unwrap().dict;
            let bytes = d.to_bytes();
            match LzDictionary::from_bytes(&bytes) {
                Ok(back) if back.to_bytes() == bytes => {}
                _ => outcome = Err(format!("{config:?}")),
            }
        }
        outcome
    }));

    results.push(check("rank/select agree with a linear scan", {
        let bits: Vec<bool> = (0..5000).map(|_| rng.gen_bool(0.4)).collect();
        let bv = BitVector::from_bits(bits.iter().copied());
        let mut ones = 0;
        let mut outcome = Ok(());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                if bv.select1(ones) != Ok(i) {
                    outcome = Err(format!("select1({ones})"));
                }
                ones += 1;
            } else if bv.select0(i - ones) != Ok(i) {
                outcome = Err(format!("select0({})", i - ones));
            }
            if bv.rank1(i) != Ok(ones) {
                outcome = Err(format!("rank1({i})"));
            }
        }
        outcome
    }));

    results.push(check("longest_prefix agrees with brute force", {
        let mut set: Vec<Vec<u8>> = (0..200)
            .map(|_| (0..rng.gen_range(1..8)).map(|_| b'a' + rng.gen_range(0..3)).collect())
            .collect();
        set.sort();
        set.dedup();
        let store = FcStore::build(&set, 16).unwrap();
        let mut outcome = Ok(());
        for _ in 0..1000 {
            let q: Vec<u8> = (0..rng.gen_range(0..10)).map(|_| b'a' + rng.gen_range(0..4)).collect();
            let brute = set
                .iter()
                .enumerate()
                .filter(|(_, s)| q.starts_with(s))
                .max_by_key(|(_, s)| s.len())
                .map(|(i, s)| (i, s.len()));
            if store.longest_prefix(&q) != brute {
                outcome = Err(format!("query {:?}", String::from_utf8_lossy(&q)));
                break;
            }
        }
        outcome
    }));

    results
}

fn all_configs() -> Vec<BuildConfig> {
    let mut configs: Vec<BuildConfig> = Variant::ALL.into_iter().map(BuildConfig::lz).collect();
    configs.push(BuildConfig::baseline());
    configs
}
