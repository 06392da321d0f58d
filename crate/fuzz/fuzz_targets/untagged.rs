#![no_main]

use libfuzzer_sys::fuzz_target;
use relaxtag::corpus::parse_untagged;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for sentence in parse_untagged(text) {
        assert!(!sentence.is_empty());
        assert!(sentence
            .iter()
            .all(|w| !w.is_empty() && !w.contains(char::is_whitespace)));
    }
});
