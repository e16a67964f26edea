#![no_main]

use libfuzzer_sys::fuzz_target;
use obstruct_cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(config) = RunConfig::from_json(s) {
        assert_eq!(RunConfig::from_json(&config.to_json()).unwrap(), config);
    }
});
