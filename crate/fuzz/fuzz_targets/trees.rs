#![no_main]

use libfuzzer_sys::fuzz_target;
use relaxtag::tagset::TagSet;
use relaxtag::tree::{parse_trees, write_trees};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let ts = TagSet::from_symbols(["D", "N", "V", "J", "P", "R", "E", "DT", "NN"]).unwrap();
    let Ok(trees) = parse_trees(text, &ts) else { return };
    let written = write_trees(trees.iter().map(|(c, t)| (&c[..], t)), &ts);
    let back = parse_trees(&written, &ts).expect("written trees parse");
    assert_eq!(back, trees);
});
