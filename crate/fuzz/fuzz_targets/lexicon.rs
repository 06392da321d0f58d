#![no_main]

use libfuzzer_sys::fuzz_target;
use relaxtag::lexicon::{parse_lexicon, write_lexicon};
use relaxtag::tagset::TagSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut ts = TagSet::new();
    let Ok(lex) = parse_lexicon(text, &mut ts) else { return };
    let written = write_lexicon(&lex, &ts);
    let back = parse_lexicon(&written, &mut ts).expect("written lexicon parses");
    assert_eq!(write_lexicon(&back, &ts), written);
});
