//! Synthetic `alpha_1 beta alpha_2` corpus.
//!
//! Two pools feed the generator. The alpha pool holds random strings over
//! `a..=z`, each copied `alpha_reps` times. The beta pool holds strings of
//! `beta_len` strictly increasing characters from `beta_alphabet_size`
//! consecutive bytes starting at `'!'`, each copied `beta_reps` times. Output
//! string `j` consumes the next beta and the next two alphas of the shuffled
//! pools, so every pool element is used exactly once. The alpha pool therefore
//! holds twice as many elements as the beta pool.
//!
//! At scale 1 with the default parameters the beta pool has
//! `6 * C(32, 6) = 5_437_152` elements and there are `339_822` distinct alphas.
//! Smaller scales shrink the beta pool, rounded down so that both pools
//! divide evenly into copies.

use std::collections::{HashMap, HashSet};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const BETA_FIRST: u8 = b'!';

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub alpha_len: usize,
    pub beta_len: usize,
    pub alpha_reps: usize,
    pub beta_reps: usize,
    pub beta_alphabet_size: usize,
    pub seed: u64,
    /// Fraction of the full-size beta pool to generate, in `(0, 1]`.
    pub scale: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            alpha_len: 16,
            beta_len: 6,
            alpha_reps: 32,
            beta_reps: 6,
            beta_alphabet_size: 32,
            seed: 42,
            scale: 1.0,
        }
    }
}

/// Pool sizes derived from [`SynthParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthPlan {
    /// Number of output strings, equal to the beta pool size.
    pub strings: usize,
    pub distinct_betas: usize,
    pub distinct_alphas: usize,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl SynthParams {
    pub fn with_scale(scale: f64, seed: u64) -> Self {
        SynthParams { scale, seed, ..Default::default() }
    }

    pub fn string_len(&self) -> usize {
        2 * self.alpha_len + self.beta_len
    }

    pub fn plan(&self) -> Result<SynthPlan> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.alpha_len == 0 || self.beta_len == 0 || self.alpha_reps == 0 || self.beta_reps == 0 {
            return bad("lengths and replication counts must be positive".into());
        }
        if !(1..=64).contains(&self.beta_alphabet_size) {
            return bad(format!(
                "beta alphabet size {} must be in 1..=64 to stay disjoint from a..z",
                self.beta_alphabet_size
            ));
        }
        if self.beta_len > self.beta_alphabet_size {
            return bad("beta length exceeds beta alphabet size".into());
        }
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return bad(format!("scale {} must be in (0, 1]", self.scale));
        }
        let combos = binomial(self.beta_alphabet_size, self.beta_len);
        let full = combos * self.beta_reps as u128;
        let target = (full as f64 * self.scale).floor() as u128;
        // Beta pool must split into beta_reps copies and twice its size into
        // alpha_reps copies.
        let half = self.alpha_reps / gcd(self.alpha_reps, 2);
        let step = (self.beta_reps / gcd(self.beta_reps, half) * half) as u128;
        let strings = target - target % step;
        if strings == 0 {
            return bad(format!("scale {} leaves an empty pool", self.scale));
        }
        let Ok(strings) = usize::try_from(strings) else { return bad("pool too large".into()) };
        let distinct_alphas = 2 * strings / self.alpha_reps;
        let alpha_space = 26f64.powi(self.alpha_len.min(64) as i32);
        if distinct_alphas as f64 * 2.0 > alpha_space {
            return bad("alpha length too short for the required distinct alphas".into());
        }
        Ok(SynthPlan { strings, distinct_betas: strings / self.beta_reps, distinct_alphas })
    }

    fn is_beta(&self, b: u8) -> bool {
        (BETA_FIRST..BETA_FIRST + self.beta_alphabet_size as u8).contains(&b)
    }
}

/// Generates the corpus. Same parameters and seed give identical output.
pub fn gen_synth(params: &SynthParams) -> Result<Vec<Vec<u8>>> {
    let plan = params.plan()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut alphas = Vec::with_capacity(plan.distinct_alphas);
    let mut seen = HashSet::with_capacity(plan.distinct_alphas);
    while alphas.len() < plan.distinct_alphas {
        let a: Vec<u8> = (0..params.alpha_len).map(|_| rng.gen_range(b'a'..=b'z')).collect();
        if seen.insert(a.clone()) {
            alphas.push(a);
        }
    }
    drop(seen);

    let betas = beta_strings(params, plan.distinct_betas, &mut rng);

    let mut gamma: Vec<u32> = (0..alphas.len() as u32)
        .flat_map(|i| std::iter::repeat_n(i, params.alpha_reps))
        .collect();
    let mut phi: Vec<u32> = (0..betas.len() as u32)
        .flat_map(|i| std::iter::repeat_n(i, params.beta_reps))
        .collect();
    gamma.shuffle(&mut rng);
    phi.shuffle(&mut rng);
    debug_assert_eq!(gamma.len(), 2 * phi.len());

    let compose = |a1: u32, b: u32, a2: u32| {
        let mut s = Vec::with_capacity(params.string_len());
        s.extend_from_slice(&alphas[a1 as usize]);
        s.extend_from_slice(&betas[b as usize]);
        s.extend_from_slice(&alphas[a2 as usize]);
        s
    };
    let mut out = Vec::with_capacity(phi.len());
    let mut emitted = HashSet::with_capacity(phi.len());
    for j in 0..phi.len() {
        let mut attempts = 0;
        loop {
            let triple = (gamma[2 * j], phi[j], gamma[2 * j + 1]);
            if emitted.insert(triple) {
                out.push(compose(triple.0, triple.1, triple.2));
                break;
            }
            // Collision: swap the second alpha with a random unconsumed one.
            let rest = 2 * j + 2..gamma.len();
            attempts += 1;
            if rest.is_empty() || attempts > 64 {
                return Err(Error::InvalidInput(
                    "cannot avoid duplicate strings with these parameters".into(),
                ));
            }
            let k = rng.gen_range(rest);
            gamma.swap(2 * j + 1, k);
        }
    }
    Ok(out)
}

/// `count` distinct beta strings in lexicographic order: all of them when the
/// pool is full size, otherwise a random subset.
fn beta_strings(params: &SynthParams, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<u8>> {
    let (n, k) = (params.beta_alphabet_size, params.beta_len);
    if count as u128 == binomial(n, k) {
        let mut out = Vec::with_capacity(count);
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.push(idx.iter().map(|&i| BETA_FIRST + i as u8).collect());
            // Next combination in lexicographic order.
            let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else { break };
            idx[pos] += 1;
            for p in pos + 1..k {
                idx[p] = idx[p - 1] + 1;
            }
        }
        return out;
    }
    let mut set = HashSet::with_capacity(count);
    while set.len() < count {
        let mut chosen = index::sample(rng, n, k).into_vec();
        chosen.sort_unstable();
        set.insert(chosen.into_iter().map(|i| BETA_FIRST + i as u8).collect::<Vec<u8>>());
    }
    let mut out: Vec<Vec<u8>> = set.into_iter().collect();
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynthReport {
    pub strings: usize,
    pub violations: Vec<String>,
}

impl SynthReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the layout of every string (alpha zones over `a..=z`, beta zone of
/// strictly increasing beta characters), that no string repeats, and that no
/// alpha or beta is used more often than its replication count.
pub fn verify_synth<S: AsRef<[u8]>>(strings: &[S], params: &SynthParams) -> SynthReport {
    let mut violations = Vec::new();
    let (al, bl) = (params.alpha_len, params.beta_len);
    let mut alpha_uses: HashMap<&[u8], usize> = HashMap::new();
    let mut beta_uses: HashMap<&[u8], usize> = HashMap::new();
    let mut seen = HashSet::new();
    for (i, s) in strings.iter().enumerate() {
        let s = s.as_ref();
        if !seen.insert(s) {
            violations.push(format!("string {i}: duplicate"));
            continue;
        }
        if s.len() != params.string_len() {
            violations.push(format!("string {i}: length {} != {}", s.len(), params.string_len()));
            continue;
        }
        let (a1, rest) = s.split_at(al);
        let (b, a2) = rest.split_at(bl);
        if !a1.iter().chain(a2).all(u8::is_ascii_lowercase) {
            violations.push(format!("string {i}: alpha zone has a byte outside a..z"));
            continue;
        }
        if !b.iter().all(|&c| params.is_beta(c)) || !b.windows(2).all(|w| w[0] < w[1]) {
            violations.push(format!("string {i}: beta zone is not an increasing beta string"));
            continue;
        }
        *alpha_uses.entry(a1).or_default() += 1;
        *alpha_uses.entry(a2).or_default() += 1;
        *beta_uses.entry(b).or_default() += 1;
    }
    let mut over: Vec<String> = alpha_uses
        .iter()
        .filter(|&(_, &n)| n > params.alpha_reps)
        .map(|(a, n)| format!("alpha {} used {n} times", String::from_utf8_lossy(a)))
        .chain(
            beta_uses
                .iter()
                .filter(|&(_, &n)| n > params.beta_reps)
                .map(|(b, n)| format!("beta {} used {n} times", String::from_utf8_lossy(b))),
        )
        .collect();
    over.sort();
    violations.extend(over);
    SynthReport { strings: strings.len(), violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_scale_pool_sizes() {
        assert_eq!(binomial(32, 6), 906_192);
        let plan = SynthParams::default().plan().unwrap();
        assert_eq!(plan.strings, 5_437_152);
        assert_eq!(plan.distinct_alphas, 339_822);
        assert_eq!(plan.distinct_betas, 906_192);
        assert_eq!(SynthParams::default().string_len(), 38);
    }

    #[test]
    fn scaled_pool_sizes() {
        let plan = SynthParams::with_scale(1.0 / 256.0, 42).plan().unwrap();
        // 5_437_152 / 256 = 21_238.9, rounded down to a multiple of lcm(6, 16) = 48.
        assert_eq!(plan.strings, 21_216);
        assert_eq!(plan.distinct_betas, 3_536);
        assert_eq!(plan.distinct_alphas, 1_326);
        assert!((plan.strings * 39) as f64 > 0.8e6);
    }

    #[test]
    fn infeasible_parameters() {
        assert!(SynthParams::with_scale(0.0, 1).plan().is_err());
        assert!(SynthParams::with_scale(2.0, 1).plan().is_err());
        assert!(SynthParams::with_scale(1e-9, 1).plan().is_err());
        let p = SynthParams { beta_len: 40, ..Default::default() };
        assert!(p.plan().is_err());
        let p = SynthParams { beta_alphabet_size: 65, ..Default::default() };
        assert!(p.plan().is_err());
        let p = SynthParams { alpha_len: 1, scale: 0.01, ..Default::default() };
        assert!(gen_synth(&p).is_err());
    }

    #[test]
    fn small_corpus_is_valid_and_deterministic() {
        let params = SynthParams::with_scale(1.0 / 2048.0, 7);
        let a = gen_synth(&params).unwrap();
        assert_eq!(a.len(), params.plan().unwrap().strings);
        assert_eq!(a, gen_synth(&params).unwrap());
        assert_ne!(a, gen_synth(&SynthParams { seed: 8, ..params.clone() }).unwrap());
        let report = verify_synth(&a, &params);
        assert!(report.is_valid(), "{:?}", report.violations);
        assert!(a.iter().all(|s| s.len() == 38));
    }

    #[test]
    fn pools_are_used_exactly() {
        let params = SynthParams::with_scale(1.0 / 4096.0, 3);
        let plan = params.plan().unwrap();
        let out = gen_synth(&params).unwrap();
        let mut alphas: HashMap<&[u8], usize> = HashMap::new();
        let mut betas: HashMap<&[u8], usize> = HashMap::new();
        for s in &out {
            *alphas.entry(&s[..16]).or_default() += 1;
            *alphas.entry(&s[22..]).or_default() += 1;
            *betas.entry(&s[16..22]).or_default() += 1;
        }
        assert_eq!(alphas.len(), plan.distinct_alphas);
        assert_eq!(betas.len(), plan.distinct_betas);
        assert!(alphas.values().all(|&n| n == 32));
        assert!(betas.values().all(|&n| n == 6));
    }

    #[test]
    fn full_beta_enumeration_is_lexicographic() {
        let params = SynthParams { beta_alphabet_size: 5, beta_len: 2, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let all = beta_strings(&params, 10, &mut rng);
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], b"!\"");
        assert_eq!(all[9], b"$%");
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn verify_catches_corruption() {
        let params = SynthParams::with_scale(1.0 / 4096.0, 5);
        let mut out = gen_synth(&params).unwrap();
        out[3][2] = b'#';
        let report = verify_synth(&out, &params);
        assert_eq!(report.violations.len(), 1, "{:?}", report.violations);

        let empty: Vec<Vec<u8>> = Vec::new();
        let report = verify_synth(&empty, &params);
        assert!(report.is_valid());
        assert_eq!(report.strings, 0);
    }
}
