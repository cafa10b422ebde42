#![no_main]
use libfuzzer_sys::fuzz_target;

use tangherlini::cli::run;

// Arguments are NUL-separated. Subcommands that read files or run long
// suites are skipped so each input stays fast and hermetic.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let args: Vec<&str> = text.split('\0').collect();
    if args.len() > 24 || args.iter().any(|a| matches!(*a, "verify" | "resummation-check" | "--config" | "--series")) {
        return;
    }
    let out = run(std::iter::once("tangherlini").chain(args), None);
    assert!(out.code <= 2);
});
