#![no_main]

use libfuzzer_sys::fuzz_target;
use obstruct_core::formats::measure_from_json;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = measure_from_json(s);
    }
});
