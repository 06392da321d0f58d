#![no_main]

use libfuzzer_sys::fuzz_target;
use relaxtag::synth::{generate_synthetic_corpus, parse_synth_spec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = parse_synth_spec(text) else { return };
    // Long sentences only cost time.
    if spec.lengths.keys().any(|&l| l > 64) {
        return;
    }
    if let Ok((_, corpus)) = generate_synthetic_corpus(&spec, 200, 1) {
        assert!(corpus.iter().all(|s| !s.tokens.is_empty()));
    }
});
