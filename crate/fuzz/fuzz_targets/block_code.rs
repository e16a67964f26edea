#![no_main]

use libfuzzer_sys::fuzz_target;
use obstruct_core::formats::{parse_block_code, write_block_code};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(code) = parse_block_code(s) {
        assert_eq!(parse_block_code(&write_block_code(&code)).unwrap(), code);
    }
});
