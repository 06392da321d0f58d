#![no_main]

use libfuzzer_sys::fuzz_target;
use relaxtag::corpus::{parse_tagged_corpus, write_tagged_corpus, TagPolicy};
use relaxtag::tagset::TagSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut ts = TagSet::new();
    let Ok(corpus) = parse_tagged_corpus(text, &mut ts, TagPolicy::Accumulate) else {
        return;
    };
    let written = write_tagged_corpus(&corpus, &ts);
    let back = parse_tagged_corpus(&written, &mut ts, TagPolicy::Validate).expect("written corpus parses");
    assert_eq!(back, corpus);
});
