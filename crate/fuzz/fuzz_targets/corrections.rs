#![no_main]

use libfuzzer_sys::fuzz_target;
use relaxtag::lexicon::parse_corrections;
use relaxtag::tagset::TagSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let ts = TagSet::from_symbols(["DT", "NN", "IN", "RB", "JJ", "WDT", ","]).unwrap();
    let _ = parse_corrections(text, &ts);
});
