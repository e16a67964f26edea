#![no_main]

use libfuzzer_sys::fuzz_target;
use obstruct_core::beta::parse_beta;
use obstruct_core::formats::beta_literal;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(beta) = parse_beta(s) {
        // an exact value prints to a literal that parses back to itself
        if beta.as_exact().is_some() {
            assert_eq!(parse_beta(&beta_literal(&beta)).unwrap(), beta);
        }
    }
});
