#![no_main]

use libfuzzer_sys::fuzz_target;
use relaxtag::ngram::{parse_ngram_table, write_ngram_table};
use relaxtag::tagset::TagSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut ts = TagSet::new();
    let Ok(table) = parse_ngram_table(text, &mut ts) else {
        return;
    };
    let written = write_ngram_table(&table, &ts);
    let back = parse_ngram_table(&written, &mut ts).expect("written table parses");
    assert_eq!(back, table);
});
