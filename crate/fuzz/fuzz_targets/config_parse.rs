#![no_main]
use libfuzzer_sys::fuzz_target;

use tangherlini::config::parse_config;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = parse_config(text) {
        let _ = file.resolve();
    }
});
