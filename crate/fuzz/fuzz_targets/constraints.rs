#![no_main]

use libfuzzer_sys::fuzz_target;
use relaxtag::constraint::{parse_constraints, serialize_constraints};
use relaxtag::tagset::TagSet;

const TAGS: [&str; 19] = [
    "DT", "NN", "VBN", "VBZ", "IN", "RB", "JJ", "JJS", "JJR", ",", ":", ".", "D", "N", "V", "J", "P", "R", "E",
];

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let ts = TagSet::from_symbols(TAGS).unwrap();
    let Ok(file) = parse_constraints(text, &ts) else { return };
    let written = serialize_constraints(&file, &ts);
    let back = parse_constraints(&written, &ts).expect("serialized constraints parse");
    assert_eq!(back, file);
});
