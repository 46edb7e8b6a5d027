#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // parsing only; file sources are never opened here
        let _ = aon_cli::config::parse_pattern(text);
    }
});
