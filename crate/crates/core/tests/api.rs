use std::sync::Arc;
use std::thread;

use lzdict::datagen::{gen_synth, verify_synth, SynthParams};
use lzdict::dictionary::{permutation_from_bytes, permutation_to_bytes};
use lzdict::{BuildConfig, Error, InputSet, LoadError, LzDictionary, Mode, Variant, FIGURE_STRINGS};

fn assert_send_sync<T: Send + Sync>() {}

#[test]
fn dictionary_is_shareable() {
    assert_send_sync::<LzDictionary>();
}

#[test]
fn concurrent_readers_agree() {
    let strings = gen_synth(&SynthParams::with_scale(1.0 / 1024.0, 3)).unwrap();
    let input = InputSet::new(strings).unwrap();
    let built = LzDictionary::build(&input, &BuildConfig::lz(Variant::Combined)).unwrap();
    let dict = Arc::new(built.dict);
    let strings = Arc::new(input.strings().to_vec());
    let perm = Arc::new(built.permutation);

    let handles: Vec<_> = (0..4)
        .map(|t| {
            let (dict, strings, perm) = (Arc::clone(&dict), Arc::clone(&strings), Arc::clone(&perm));
            thread::spawn(move || {
                let mut buf = Vec::new();
                for (k, s) in strings.iter().enumerate().skip(t).step_by(4) {
                    assert_eq!(dict.lookup(s), Some(perm[k]));
                    dict.access_into(perm[k], &mut buf).unwrap();
                    assert_eq!(&buf, s);
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
}

#[test]
fn every_configuration_survives_a_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("lzdict-api-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let input = InputSet::new(FIGURE_STRINGS).unwrap();
    let mut configs: Vec<BuildConfig> = Variant::ALL.into_iter().map(BuildConfig::lz).collect();
    configs.push(BuildConfig { baseline_bucket: 3, ..BuildConfig::baseline() });
    for (n, config) in configs.iter().enumerate() {
        let built = LzDictionary::build(&input, config).unwrap();
        let path = dir.join(format!("{n}.lzd"));
        std::fs::write(&path, built.dict.to_bytes()).unwrap();
        let back = LzDictionary::from_bytes(&std::fs::read(&path).unwrap()).unwrap();
        assert_eq!(back, built.dict);
        assert_eq!(back.mode(), config.mode);
        if config.mode == Mode::LztFc {
            assert_eq!(back.variant(), Some(config.variant));
        }
        for (k, s) in input.strings().iter().enumerate() {
            assert_eq!(back.lookup(s), Some(built.permutation[k]));
        }
        let sidecar = permutation_to_bytes(&built.permutation);
        assert_eq!(permutation_from_bytes(&sidecar).unwrap(), built.permutation);
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn load_errors_are_reported_by_kind() {
    let input = InputSet::new(FIGURE_STRINGS).unwrap();
    let bytes = LzDictionary::build(&input, &BuildConfig::default()).unwrap().dict.to_bytes();

    let kind = |b: &[u8]| match LzDictionary::from_bytes(b) {
        Err(Error::Load(e)) => e,
        other => panic!("expected a load error, got {other:?}"),
    };
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert_eq!(kind(&bad), LoadError::BadMagic);
    let mut bad = bytes.clone();
    bad[4] = 9;
    assert!(matches!(kind(&bad), LoadError::VersionMismatch { found: 9, .. }));
    assert_eq!(kind(&bytes[..bytes.len() - 3]), LoadError::Truncated);
    let mut bad = bytes.clone();
    let last = bad.len() - 5;
    bad[last] ^= 1;
    assert!(matches!(kind(&bad), LoadError::ChecksumMismatch { .. }));

    // Duplicated IDs in a sidecar are rejected.
    let mut side = permutation_to_bytes(&[0, 1, 2]);
    side[16..24].copy_from_slice(&0u64.to_le_bytes());
    assert!(permutation_from_bytes(&side).is_err());
}

#[test]
fn generated_synth_set_is_valid_and_corruption_is_detected() {
    let params = SynthParams::with_scale(1.0 / 512.0, 11);
    let mut strings = gen_synth(&params).unwrap();
    assert_eq!(strings.len(), params.plan().unwrap().strings);
    assert!(verify_synth(&strings, &params).is_valid());
    strings[0][20] = b'~';
    let report = verify_synth(&strings, &params);
    assert_eq!(report.violations.len(), 1, "{:?}", report.violations);
}

#[test]
fn invalid_input_is_rejected() {
    assert!(matches!(InputSet::new(Vec::<Vec<u8>>::new()), Err(Error::InvalidInput(_))));
    assert!(matches!(InputSet::new(["a", ""]), Err(Error::InvalidInput(_))));
    let input = InputSet::new(["b", "a", "b"]).unwrap();
    assert_eq!(input.len(), 2);
    assert_eq!(input.duplicates_removed(), 1);
}
