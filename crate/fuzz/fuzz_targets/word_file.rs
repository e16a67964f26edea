#![no_main]

use libfuzzer_sys::fuzz_target;
use obstruct_core::formats::{parse_word_file, write_word_file};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(words) = parse_word_file(s) {
        let alphabet = words.iter().filter_map(|w| w.max_symbol()).max().map_or(2, |m| m as usize + 1);
        assert_eq!(parse_word_file(&write_word_file(&words, alphabet)).unwrap(), words);
    }
});
