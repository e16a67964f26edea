#![no_main]

use libfuzzer_sys::fuzz_target;
use obstruct_core::beta::BetaSystem;
use obstruct_core::formats::parse_expansion_file;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(e) = parse_expansion_file(s) {
        let _ = BetaSystem::from_expansion(e);
    }
});
