#![no_main]
use libfuzzer_sys::fuzz_target;

use tangherlini::document::decode_series;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(series) = decode_series(text) {
        // whatever decodes must survive a second trip unchanged
        let again = decode_series(&series.encode().to_string()).expect("re-encoded document decodes");
        assert_eq!(again.encode(), series.encode());
        let _ = series.to_c64().eval(0.5, 2);
    }
});
